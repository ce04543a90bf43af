#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rfsclust/combsolve.hpp"
#include "rfsclust/core.hpp"
#include "rfsclust/matrix.hpp"

namespace rfsclust {

enum class DistanceKind { Hausdorff, Wasserstein, Ospa };

inline std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::Hausdorff: return "hausdorff";
    case DistanceKind::Wasserstein: return "wasserstein";
    case DistanceKind::Ospa: return "ospa";
  }
  return "unknown";
}

inline DistanceKind parse_distance_kind(const std::string& name) {
  if (name == "hausdorff") return DistanceKind::Hausdorff;
  if (name == "wasserstein") return DistanceKind::Wasserstein;
  if (name == "ospa") return DistanceKind::Ospa;
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + name + "'");
}

// Which set distance to use. `order` applies to Wasserstein and OSPA, `cutoff`
// to OSPA only. The base metric is always Euclidean.
struct DistanceSpec {
  DistanceKind kind = DistanceKind::Ospa;
  double order = 2.0;
  double cutoff = 1.0;

  void validate() const {
    if (kind != DistanceKind::Hausdorff && !(order >= 1.0 && std::isfinite(order)))
      throw Error(ErrorCode::InvalidOrder, "order p must satisfy 1 <= p < inf");
    if (kind == DistanceKind::Ospa && !(cutoff > 0.0 && std::isfinite(cutoff)))
      throw Error(ErrorCode::InvalidCutoff, "cut-off c must be positive and finite");
  }

  friend bool operator==(const DistanceSpec&, const DistanceSpec&) = default;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace detail {

inline void require_same_dim(const PointPattern& x, const PointPattern& y) {
  if (!x.empty() && !y.empty() && x.dim() != y.dim())
    throw Error(ErrorCode::DimensionMismatch, "patterns of dimension " + std::to_string(x.dim()) + " and " +
                                                  std::to_string(y.dim()));
}

inline double directed_hausdorff(const PointPattern& from, const PointPattern& to) {
  double worst = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.size(); ++j) nearest = std::min(nearest, euclidean(from.point(i), to.point(j)));
    worst = std::max(worst, nearest);
  }
  return worst;
}

}  // namespace detail

// Infinite when exactly one pattern is empty, zero when both are.
inline double hausdorff(const PointPattern& x, const PointPattern& y) {
  detail::require_same_dim(x, y);
  if (x.empty() && y.empty()) return 0.0;
  if (x.empty() || y.empty()) return std::numeric_limits<double>::infinity();
  return std::max(detail::directed_hausdorff(x, y), detail::directed_hausdorff(y, x));
}

// Optimal-transport distance of order p between the uniform empirical
// measures on x and y.
inline double wasserstein(const PointPattern& x, const PointPattern& y, double p) {
  detail::require_same_dim(x, y);
  if (!(p >= 1.0 && std::isfinite(p))) throw Error(ErrorCode::InvalidOrder, "order p must satisfy 1 <= p < inf");
  if (x.empty() && y.empty()) return 0.0;
  if (x.empty() || y.empty()) return std::numeric_limits<double>::infinity();
  Matrix cost(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) cost(i, j) = std::pow(euclidean(x.point(i), y.point(j)), p);
  const double total = solve_uniform_transport(CostMatrix(std::move(cost))).total_cost;
  return std::pow(std::max(total, 0.0), 1.0 / p);
}

// OSPA distance of order p with cut-off c. The smaller pattern is padded with
// dummy points at distance c from everything, which turns the partial
// matching plus cardinality penalty into one square assignment.
inline double ospa(const PointPattern& x, const PointPattern& y, double p, double c) {
  detail::require_same_dim(x, y);
  if (!(p >= 1.0 && std::isfinite(p))) throw Error(ErrorCode::InvalidOrder, "order p must satisfy 1 <= p < inf");
  if (!(c > 0.0 && std::isfinite(c))) throw Error(ErrorCode::InvalidCutoff, "cut-off c must be positive and finite");
  const PointPattern& small = x.size() <= y.size() ? x : y;
  const PointPattern& large = x.size() <= y.size() ? y : x;
  const std::size_t m = small.size();
  const std::size_t n = large.size();
  if (n == 0) return 0.0;
  const double penalty = std::pow(c, p);
  Matrix cost(n, n, penalty);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost(i, j) = std::pow(std::min(c, euclidean(small.point(i), large.point(j))), p);
  const double total = solve_assignment(CostMatrix(std::move(cost))).total_cost;
  return std::min(c, std::pow(std::max(total, 0.0) / static_cast<double>(n), 1.0 / p));
}

inline double set_distance(const PointPattern& x, const PointPattern& y, const DistanceSpec& spec) {
  switch (spec.kind) {
    case DistanceKind::Hausdorff: return hausdorff(x, y);
    case DistanceKind::Wasserstein: return wasserstein(x, y, spec.order);
    case DistanceKind::Ospa: return ospa(x, y, spec.order, spec.cutoff);
  }
  return 0.0;
}

// Symmetric, zero-diagonal matrix of pairwise set distances. Entries may be
// +infinity for Hausdorff and Wasserstein when exactly one pattern is empty.
struct DissimilarityMatrix {
  Matrix values;
  DistanceSpec spec;
  std::vector<std::string> ids;

  std::size_t size() const noexcept { return values.rows(); }
};

// Entries are independent, so rows are shared out over `threads` workers;
// each cell is written by exactly one worker and the result does not depend
// on scheduling.
inline DissimilarityMatrix pairwise_dissimilarity(const PatternDataset& data, const DistanceSpec& spec,
                                                  unsigned threads = 1) {
  validate_dataset(data);
  spec.validate();
  const std::size_t n = data.size();
  DissimilarityMatrix out{Matrix(n, n, 0.0), spec, {}};
  for (std::size_t i = 0; i < n; ++i) out.ids.push_back(data.id(i));

  std::atomic<std::size_t> next_row{0};
  std::mutex error_mutex;
  std::optional<Error> first_error;
  auto worker = [&] {
    for (std::size_t i = next_row++; i < n; i = next_row++) {
      for (std::size_t j = i + 1; j < n; ++j) {
        try {
          const double d = set_distance(data.patterns[i], data.patterns[j], spec);
          out.values(i, j) = d;
          out.values(j, i) = d;
        } catch (const Error& e) {
          std::lock_guard lock(error_mutex);
          if (!first_error)
            first_error.emplace(e.code(), "pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
          return;
        }
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) throw *first_error;
  return out;
}

}  // namespace rfsclust
