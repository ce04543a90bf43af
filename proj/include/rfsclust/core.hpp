#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfsclust/error.hpp"

namespace rfsclust {

// A finite multiset of feature vectors of common dimension, stored row-major.
// An empty pattern still records the dimension of the space it lives in.
class PointPattern {
 public:
  PointPattern() = default;

  PointPattern(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 && !coords_.empty()) throw Error(ErrorCode::DimensionMismatch, "zero-dimensional points");
    if (dim_ != 0 && coords_.size() % dim_ != 0)
      throw Error(ErrorCode::DimensionMismatch, "coordinate count is not a multiple of the dimension");
  }

  static PointPattern empty(std::size_t dim) { return PointPattern(dim, {}); }

  // Builds from nested vectors. All rows must share one length; `dim` is used
  // when the list is empty.
  static PointPattern from_rows(const std::vector<std::vector<double>>& rows, std::size_t dim = 0) {
    if (rows.empty()) return empty(dim);
    const std::size_t d = rows.front().size();
    if (d == 0) throw Error(ErrorCode::DimensionMismatch, "zero-dimensional point");
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d)
        throw Error(ErrorCode::DimensionMismatch,
                    "point " + std::to_string(i) + " has dimension " + std::to_string(rows[i].size()) +
                        ", expected " + std::to_string(d));
      flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return PointPattern(d, std::move(flat));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  std::span<const double> coords() const noexcept { return coords_; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.emplace_back(point(i).begin(), point(i).end());
    return out;
  }

  friend bool operator==(const PointPattern& a, const PointPattern& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

struct PatternDataset {
  std::vector<PointPattern> patterns;
  std::size_t dim = 0;
  // Record identifiers; empty means "p0", "p1", ... by position.
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> labels;

  std::size_t size() const noexcept { return patterns.size(); }

  std::string id(std::size_t i) const { return ids.empty() ? "p" + std::to_string(i) : ids[i]; }

  friend bool operator==(const PatternDataset&, const PatternDataset&) = default;
};

struct ClusteringResult {
  std::vector<std::size_t> hard_labels;
  // N x K, row-stochastic.
  std::optional<std::vector<std::vector<double>>> memberships;
  std::optional<std::vector<std::size_t>> exemplars;
  std::map<std::string, double> diagnostics;

  std::size_t cluster_count() const {
    std::size_t k = 0;
    for (auto l : hard_labels) k = std::max(k, l + 1);
    if (memberships && !memberships->empty()) k = std::max(k, memberships->front().size());
    if (exemplars) k = std::max(k, exemplars->size());
    return k;
  }
};

// Returns the dataset unchanged when every invariant holds; throws otherwise.
inline const PatternDataset& validate_dataset(const PatternDataset& data) {
  if (data.patterns.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no patterns");
  if (data.dim == 0) throw Error(ErrorCode::DimensionMismatch, "dataset dimension must be positive");
  for (std::size_t n = 0; n < data.patterns.size(); ++n) {
    const auto& x = data.patterns[n];
    if (!x.empty() && x.dim() != data.dim)
      throw Error(ErrorCode::DimensionMismatch, "pattern " + std::to_string(n) + " has dimension " +
                                                    std::to_string(x.dim()) + ", dataset has " +
                                                    std::to_string(data.dim));
    for (double v : x.coords())
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteCoordinate, "pattern " + std::to_string(n) + " has a non-finite coordinate");
  }
  if (!data.ids.empty() && data.ids.size() != data.patterns.size())
    throw Error(ErrorCode::LabelLengthMismatch, "id list length differs from pattern count");
  if (data.labels && data.labels->size() != data.patterns.size())
    throw Error(ErrorCode::LabelLengthMismatch, "label list has " + std::to_string(data.labels->size()) +
                                                    " entries for " + std::to_string(data.patterns.size()) +
                                                    " patterns");
  return data;
}

}  // namespace rfsclust
