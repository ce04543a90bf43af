#pragma once

// Independent reference computations used only by the tests. None of these
// call into the solvers they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

// Minimum of sum_i cost[i][perm[i]] over all n! permutations.
inline double brute_force_assignment(const Grid& cost) {
  const std::size_t n = cost.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i][perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Dense two-phase tableau simplex with Bland's rule for
//   min c.x  s.t.  A x = b, x >= 0   (b >= 0).
// Returns nullopt when infeasible or unbounded.
inline std::optional<double> linear_program_min(const Grid& a, const std::vector<double>& b,
                                                const std::vector<double>& c) {
  const std::size_t rows = a.size();
  const std::size_t vars = c.size();
  const std::size_t cols = vars + rows;  // originals then artificials
  constexpr double eps = 1e-11;
  Grid t(rows, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < vars; ++j) t[r][j] = a[r][j];
    t[r][vars + r] = 1.0;
    t[r][cols] = b[r];
    basis[r] = vars + r;
  }

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double p = t[pr][pc];
    for (double& v : t[pr]) v /= p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pr || t[r][pc] == 0.0) continue;
      const double f = t[r][pc];
      for (std::size_t j = 0; j <= cols; ++j) t[r][j] -= f * t[pr][j];
    }
    basis[pr] = pc;
  };

  // Runs simplex on objective `obj` (length cols), entering only columns < limit.
  auto run = [&](const std::vector<double>& obj, std::size_t limit) -> bool {
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < limit; ++j) {
        double reduced = obj[j];
        for (std::size_t r = 0; r < rows; ++r) reduced -= obj[basis[r]] * t[r][j];
        if (reduced < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return true;
      std::size_t leave = rows;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        if (t[r][enter] <= eps) continue;
        const double ratio = t[r][cols] / t[r][enter];
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && leave < rows && basis[r] < basis[leave])) {
          best_ratio = ratio;
          leave = r;
        }
      }
      if (leave == rows) return false;  // unbounded
      pivot(leave, enter);
    }
    return false;
  };

  std::vector<double> phase1(cols, 0.0);
  for (std::size_t j = vars; j < cols; ++j) phase1[j] = 1.0;
  run(phase1, cols);
  double infeasibility = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    if (basis[r] >= vars) infeasibility += t[r][cols];
  if (infeasibility > 1e-9) return std::nullopt;
  // Drive zero-level artificials out where possible; redundant rows stay.
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) continue;
    for (std::size_t j = 0; j < vars; ++j)
      if (std::abs(t[r][j]) > eps) {
        pivot(r, j);
        break;
      }
  }
  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < vars; ++j) phase2[j] = c[j];
  if (!run(phase2, vars)) return std::nullopt;
  double value = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    if (basis[r] < vars) value += c[basis[r]] * t[r][cols];
  return value;
}

// Optimal uniform-marginal transport cost via the generic LP above.
inline double transport_lp(const Grid& cost) {
  const std::size_t m = cost.size();
  const std::size_t n = cost.front().size();
  Grid a;
  std::vector<double> b, c(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(m * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1.0;
    a.push_back(row);
    b.push_back(1.0 / static_cast<double>(m));
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) row[i * n + j] = 1.0;
    a.push_back(row);
    b.push_back(1.0 / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = cost[i][j];
  return *linear_program_min(a, b, c);
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// OSPA straight from its definition: every injection of the smaller set into
// the larger, enumerated as permutations of the larger set.
inline double ospa_brute_force(Grid x, Grid y, double p, double c) {
  if (x.size() > y.size()) std::swap(x, y);
  const std::size_t m = x.size(), n = y.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += std::pow(std::min(c, euclid(x[i], y[perm[i]])), p);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow((best + std::pow(c, p) * static_cast<double>(n - m)) / static_cast<double>(n), 1.0 / p);
}

inline double hausdorff_direct(const Grid& x, const Grid& y) {
  auto directed = [](const Grid& a, const Grid& b) {
    double worst = 0.0;
    for (const auto& p : a) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& q : b) nearest = std::min(nearest, euclid(p, q));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(x, y), directed(y, x));
}

// Exemplar set maximizing net similarity: sum over points of the similarity
// to their best exemplar, exemplars taking their own preference s[k][k].
inline std::vector<std::size_t> best_exemplar_subset(const Grid& s) {
  const std::size_t n = s.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_set;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> ex;
    for (std::size_t k = 0; k < n; ++k)
      if (mask >> k & 1) ex.push_back(k);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        total += s[i][i];
        continue;
      }
      double top = -std::numeric_limits<double>::infinity();
      for (auto k : ex) top = std::max(top, s[i][k]);
      total += top;
    }
    if (total > best) {
      best = total;
      best_set = ex;
    }
  }
  return best_set;
}

template <class A, class B>
double rand_index_pairs(const std::vector<A>& x, const std::vector<B>& y) {
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++total;
      if ((x[i] == x[j]) == (y[i] == y[j])) ++agree;
    }
  return static_cast<double>(agree) / static_cast<double>(total);
}

// Golden-section search for the maximizer of a unimodal function on [lo, hi].
template <class F>
double golden_max(F f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < iters; ++i) {
    if (f(c) > f(d))
      b = d;
    else
      a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
