#pragma once

// Affinity propagation over a set-distance dissimilarity matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "rfsclust/core.hpp"
#include "rfsclust/matrix.hpp"
#include "rfsclust/setdist.hpp"

namespace rfsclust {

struct ApConfig {
  // nullopt selects the median of the finite off-diagonal similarities.
  std::optional<double> preference;
  double damping = 0.9;
  std::size_t max_iterations = 1000;
  // Stop once the exemplar set has been unchanged for this many sweeps.
  std::size_t convergence_window = 50;

  void validate() const {
    if (!(damping >= 0.5 && damping < 1.0)) throw Error(ErrorCode::InvalidConfig, "damping must lie in [0.5, 1)");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be at least 1");
    if (convergence_window < 1) throw Error(ErrorCode::InvalidConfig, "convergence_window must be at least 1");
    if (preference && !std::isfinite(*preference)) throw Error(ErrorCode::InvalidConfig, "preference must be finite");
  }
};

// Relative size of the index tilt applied to similarities during message passing.
inline constexpr double kTieBreakTilt = 1e-10;

inline double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

// S[i][j] = -D[i][j] off the diagonal. Infinite dissimilarities become
// (min finite similarity - 1) * 10, strictly below every finite similarity.
// The diagonal holds the preference.
inline Matrix similarity_from_dissimilarity(const Matrix& d, std::optional<double> preference) {
  if (d.rows() != d.cols()) throw Error(ErrorCode::NonSquare, "dissimilarity matrix is not square");
  const std::size_t n = d.rows();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "empty dissimilarity matrix");
  std::vector<double> finite;
  finite.reserve(n * (n - 1));
  bool any_infinite = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = d(i, j);
      if (std::isnan(v) || v < 0) throw Error(ErrorCode::InvalidConfig, "dissimilarities must be nonnegative");
      if (std::isinf(v))
        any_infinite = true;
      else
        finite.push_back(-v);
    }
  if (n > 1 && finite.empty()) throw Error(ErrorCode::AllInfinite, "no finite off-diagonal dissimilarity");

  double floor_similarity = 0.0;
  if (any_infinite) floor_similarity = (*std::min_element(finite.begin(), finite.end()) - 1.0) * 10.0;
  const double pref = preference ? *preference : median(finite);

  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        s(i, j) = pref;
      else
        s(i, j) = std::isinf(d(i, j)) ? floor_similarity : -d(i, j);
    }
  return s;
}

inline Matrix similarity_from_dissimilarity(const DissimilarityMatrix& d, std::optional<double> preference) {
  return similarity_from_dissimilarity(d.values, preference);
}

namespace detail {

inline std::vector<std::size_t> current_exemplars(const Matrix& r, const Matrix& a) {
  std::vector<std::size_t> ex;
  for (std::size_t k = 0; k < r.rows(); ++k)
    if (r(k, k) + a(k, k) > 0) ex.push_back(k);
  return ex;
}

}  // namespace detail

// Each point goes to the exemplar of highest similarity (lowest index on ties);
// exemplars go to themselves. Labels number exemplars in ascending index order.
inline std::vector<std::size_t> assign_to_exemplars(const Matrix& s, const std::vector<std::size_t>& exemplars) {
  const std::size_t n = s.rows();
  std::vector<std::size_t> labels(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto self = std::find(exemplars.begin(), exemplars.end(), i);
    if (self != exemplars.end()) {
      labels[i] = static_cast<std::size_t>(self - exemplars.begin());
      continue;
    }
    std::size_t best = 0;
    for (std::size_t e = 1; e < exemplars.size(); ++e)
      if (s(i, exemplars[e]) > s(i, exemplars[best])) best = e;
    labels[i] = best;
  }
  return labels;
}

// Sum over non-exemplars of their similarity to the chosen exemplar, plus the
// preferences (diagonal) of the exemplars.
inline double net_similarity(const Matrix& s, const std::vector<std::size_t>& exemplars,
                             const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) total += s(i, exemplars[labels[i]]);
  return total;
}

inline ClusteringResult run_ap(const Matrix& s, const ApConfig& config = {}) {
  config.validate();
  if (s.rows() != s.cols()) throw Error(ErrorCode::NonSquare, "similarity matrix is not square");
  const std::size_t n = s.rows();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "empty similarity matrix");
  for (double v : s.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "similarities must be finite");

  const double lambda = config.damping;
  // Symmetric inputs (duplicated patterns, any N = 2 problem) leave the
  // self-evidence of tied candidates converging to exactly zero, so rounding
  // would pick the exemplars. A tiny column-index tilt breaks such ties
  // toward the lowest index; messages use the tilted copy, the final
  // assignment uses s itself.
  Matrix st = s;
  {
    double lo = s(0, 0), hi = s(0, 0);
    for (double v : s.data()) lo = std::min(lo, v), hi = std::max(hi, v);
    const double scale = std::max({hi - lo, std::abs(hi), std::abs(lo), 1e-300});
    const double tilt = kTieBreakTilt * scale / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) st(i, k) -= tilt * static_cast<double>(k);
  }
  Matrix r(n, n, 0.0), a(n, n, 0.0);
  std::vector<double> col_pos(n);

  std::vector<std::size_t> exemplars;
  std::size_t stable = 0;
  std::size_t iter = 0;
  bool converged = false;
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  while (iter < config.max_iterations) {
    ++iter;
    // Responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k')).
    for (std::size_t i = 0; i < n; ++i) {
      double first = neg_inf, second = neg_inf;
      std::size_t first_k = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = a(i, k) + st(i, k);
        if (v > first) {
          second = first;
          first = v;
          first_k = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double competitor = (k == first_k) ? second : first;
        // With n == 1 there is no competitor; the self-responsibility is s(k,k).
        const double fresh = st(i, k) - (std::isinf(competitor) ? 0.0 : competitor);
        r(i, k) = lambda * r(i, k) + (1.0 - lambda) * fresh;
      }
    }
    // Availabilities from the updated responsibilities.
    for (std::size_t k = 0; k < n; ++k) {
      double sum_pos = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        col_pos[i] = (i == k) ? r(k, k) : std::max(0.0, r(i, k));
        sum_pos += col_pos[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        double fresh;
        if (i == k)
          fresh = sum_pos - r(k, k);
        else
          fresh = std::min(0.0, sum_pos - col_pos[i]);
        a(i, k) = lambda * a(i, k) + (1.0 - lambda) * fresh;
      }
    }

    auto now = detail::current_exemplars(r, a);
    if (now == exemplars) {
      ++stable;
    } else {
      exemplars = std::move(now);
      stable = 1;
    }
    if (!exemplars.empty() && stable >= config.convergence_window) {
      converged = true;
      break;
    }
  }

  ClusteringResult result;
  bool fallback = false;
  if (exemplars.empty()) {
    fallback = true;
    std::size_t best = 0;
    double best_sum = neg_inf;
    for (std::size_t k = 0; k < n; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += s(i, k);
      if (sum > best_sum) {
        best_sum = sum;
        best = k;
      }
    }
    exemplars = {best};
  }
  result.hard_labels = assign_to_exemplars(s, exemplars);
  result.diagnostics["iterations"] = static_cast<double>(iter);
  result.diagnostics["converged"] = converged ? 1.0 : 0.0;
  result.diagnostics["fallback_exemplar"] = fallback ? 1.0 : 0.0;
  result.diagnostics["clusters"] = static_cast<double>(exemplars.size());
  result.diagnostics["net_similarity"] = net_similarity(s, exemplars, result.hard_labels);
  result.exemplars = std::move(exemplars);
  return result;
}

}  // namespace rfsclust
