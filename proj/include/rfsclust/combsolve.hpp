#pragma once

// Exact solvers behind the set distances: square linear assignment and
// balanced transportation with uniform marginals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rfsclust/error.hpp"
#include "rfsclust/matrix.hpp"

namespace rfsclust {

// Nonnegative, finite costs with at least one row and column.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.cols() == 0)
      throw Error(ErrorCode::EmptyCostMatrix, "cost matrix needs at least one row and one column");
    for (double v : entries_.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NegativeCost, "cost entries must be finite");
      if (v < 0) throw Error(ErrorCode::NegativeCost, "cost entries must be nonnegative");
    }
  }

  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    return CostMatrix(Matrix::from_rows(rows));
  }

  std::size_t rows() const noexcept { return entries_.rows(); }
  std::size_t cols() const noexcept { return entries_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  const Matrix& entries() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

struct AssignmentResult {
  // permutation[i] is the column matched to row i. One optimum among possibly
  // several; only the cost is guaranteed unique.
  std::vector<std::size_t> permutation;
  double total_cost = 0.0;
};

// Minimum-cost perfect matching on a square matrix, O(n^3) shortest
// augmenting paths with dual potentials.
inline AssignmentResult solve_assignment(const CostMatrix& cost) {
  if (cost.rows() != cost.cols())
    throw Error(ErrorCode::NonSquare, std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()) +
                                          " cost matrix is not square");
  const std::size_t n = cost.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based with a virtual column 0, as in the classic formulation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t col = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col] = 1;
      const std::size_t row = row_of_col[col];
      double delta = inf;
      std::size_t next = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost(row - 1, j - 1) - u[row] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = col;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          next = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col = next;
    } while (row_of_col[col] != 0);
    do {
      const std::size_t prev = way[col];
      row_of_col[col] = row_of_col[prev];
      col = prev;
    } while (col != 0);
  }

  AssignmentResult result;
  result.permutation.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.permutation[row_of_col[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) result.total_cost += cost(i, result.permutation[i]);
  return result;
}

struct TransportResult {
  // Row sums 1/rows, column sums 1/cols.
  Matrix plan;
  double total_cost = 0.0;
  std::size_t pivots = 0;
};

namespace detail {

// Basis of the transportation simplex: a spanning tree on rows 0..m-1 and
// columns m..m+n-1, one edge per basic cell. Work buffers are reused across
// pivots.
class TransportBasis {
 public:
  TransportBasis(std::size_t m, std::size_t n)
      : m_(m), n_(n), start_(m + n + 1), fill_(m + n), via_(m + n), seen_(m + n) {}

  struct Cell {
    std::size_t row, col;
    std::int64_t flow;
  };

  std::vector<Cell> cells;

  // Cell indices along the tree path from row `from_row` to column `to_col`;
  // the first touches `to_col`, the last touches `from_row`.
  std::vector<std::size_t> path(std::size_t from_row, std::size_t to_col) {
    rebuild_adjacency();
    std::fill(seen_.begin(), seen_.end(), 0);
    stack_.assign(1, from_row);
    seen_[from_row] = 1;
    const std::size_t target = m_ + to_col;
    while (!stack_.empty()) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      if (node == target) break;
      for (std::size_t a = start_[node]; a < start_[node + 1]; ++a) {
        const std::size_t e = edges_[a];
        const std::size_t other = other_end(node, e);
        if (seen_[other]) continue;
        seen_[other] = 1;
        via_[other] = e;
        stack_.push_back(other);
      }
    }
    std::vector<std::size_t> out;
    for (std::size_t node = target; node != from_row;) {
      const std::size_t e = via_[node];
      out.push_back(e);
      node = other_end(node, e);
    }
    return out;
  }

  // Dual potentials with u[0] = 0 satisfying u[i] + v[j] = c(i, j) on the tree.
  template <class Cost>
  void potentials(const Cost& cost, std::vector<double>& u, std::vector<double>& v) {
    rebuild_adjacency();
    u.assign(m_, 0.0);
    v.assign(n_, 0.0);
    std::fill(seen_.begin(), seen_.end(), 0);
    stack_.assign(1, 0);
    seen_[0] = 1;
    while (!stack_.empty()) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      for (std::size_t a = start_[node]; a < start_[node + 1]; ++a) {
        const auto& c = cells[edges_[a]];
        const std::size_t other = other_end(node, edges_[a]);
        if (seen_[other]) continue;
        seen_[other] = 1;
        if (node < m_)
          v[c.col] = cost(c.row, c.col) - u[c.row];
        else
          u[c.row] = cost(c.row, c.col) - v[c.col];
        stack_.push_back(other);
      }
    }
  }

  // Tree flows for the given integer supplies/demands (leaf peeling).
  void resolve_flows(std::vector<std::int64_t> supply, std::vector<std::int64_t> demand) {
    rebuild_adjacency();
    const std::size_t nodes = m_ + n_;
    std::vector<std::size_t> degree(nodes, 0);
    for (std::size_t node = 0; node < nodes; ++node) degree[node] = start_[node + 1] - start_[node];
    std::vector<char> done(cells.size(), 0);
    std::vector<std::size_t> leaves;
    for (std::size_t node = 0; node < nodes; ++node)
      if (degree[node] == 1) leaves.push_back(node);
    while (!leaves.empty()) {
      const std::size_t node = leaves.back();
      leaves.pop_back();
      if (degree[node] != 1) continue;
      std::size_t edge = cells.size();
      for (std::size_t a = start_[node]; a < start_[node + 1]; ++a)
        if (!done[edges_[a]]) edge = edges_[a];
      auto& c = cells[edge];
      if (node < m_) {
        c.flow = supply[c.row];
        supply[c.row] = 0;
        demand[c.col] -= c.flow;
      } else {
        c.flow = demand[c.col];
        demand[c.col] = 0;
        supply[c.row] -= c.flow;
      }
      done[edge] = 1;
      --degree[c.row];
      --degree[m_ + c.col];
      const std::size_t other = other_end(node, edge);
      if (degree[other] == 1) leaves.push_back(other);
    }
  }

 private:
  std::size_t other_end(std::size_t node, std::size_t e) const {
    return node < m_ ? m_ + cells[e].col : cells[e].row;
  }

  void rebuild_adjacency() {
    const std::size_t nodes = m_ + n_;
    std::fill(start_.begin(), start_.end(), 0);
    for (const auto& c : cells) {
      ++start_[c.row + 1];
      ++start_[m_ + c.col + 1];
    }
    for (std::size_t node = 0; node < nodes; ++node) start_[node + 1] += start_[node];
    edges_.resize(2 * cells.size());
    std::copy(start_.begin(), start_.end() - 1, fill_.begin());
    for (std::size_t e = 0; e < cells.size(); ++e) {
      edges_[fill_[cells[e].row]++] = e;
      edges_[fill_[m_ + cells[e].col]++] = e;
    }
  }

  std::size_t m_, n_;
  std::vector<std::size_t> start_, fill_, edges_, via_, stack_;
  std::vector<char> seen_;
};

}  // namespace detail

// Minimum-cost plan between the uniform distributions on the rows and on the
// columns. Transportation simplex on integer supplies (n per row, m per
// column, so flow / (m n) is the plan). Degenerate pivots are ruled out by
// perturbing the supplies by 1/(m+1) of a unit and the last demand by
// m/(m+1); the optimal tree of the perturbed problem is optimal for the
// original one, whose flows are then re-solved on that tree.
inline TransportResult solve_uniform_transport(const CostMatrix& cost) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  const auto mi = static_cast<std::int64_t>(m);
  const auto ni = static_cast<std::int64_t>(n);

  std::vector<std::int64_t> supply(m, ni * (mi + 1) + 1);
  std::vector<std::int64_t> demand(n, mi * (mi + 1));
  demand[n - 1] += mi;

  // Least-cost start: fill cells in increasing cost order. Under the
  // perturbation every allocation exhausts exactly one row or column (both
  // only at the very end), so this yields a spanning tree of m + n - 1 cells.
  detail::TransportBasis basis(m, n);
  {
    std::vector<std::size_t> order(m * n);
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cost(a / n, a % n) < cost(b / n, b % n);
    });
    auto s = supply;
    auto d = demand;
    for (std::size_t c : order) {
      const std::size_t i = c / n, j = c % n;
      if (s[i] == 0 || d[j] == 0) continue;
      const std::int64_t f = std::min(s[i], d[j]);
      basis.cells.push_back({i, j, f});
      s[i] -= f;
      d[j] -= f;
      if (basis.cells.size() == m + n - 1) break;
    }
  }

  double max_cost = 0.0;
  for (double c : cost.entries().data()) max_cost = std::max(max_cost, c);
  const double tol = 1e-12 * std::max(1.0, max_cost);
  const std::size_t pivot_cap = 50 * (m + n) * (m + n) + 1000;

  std::vector<double> u, v;
  std::size_t pivots = 0;
  for (; pivots < pivot_cap; ++pivots) {
    basis.potentials(cost, u, v);
    double best = -tol;
    std::size_t enter_row = m, enter_col = n;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double reduced = cost(i, j) - u[i] - v[j];
        if (reduced < best) {
          best = reduced;
          enter_row = i;
          enter_col = j;
        }
      }
    if (enter_row == m) break;

    const auto path = basis.path(enter_row, enter_col);
    // Cells alternate -, +, -, ... starting next to the entering column.
    std::int64_t theta = std::numeric_limits<std::int64_t>::max();
    std::size_t leaving = path.size();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const auto f = basis.cells[path[k]].flow;
      if (f < theta || (f == theta && path[k] < path[leaving])) {
        theta = f;
        leaving = k;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k)
      basis.cells[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    basis.cells[path[leaving]] = {enter_row, enter_col, theta};
  }

  basis.resolve_flows(std::vector<std::int64_t>(m, ni), std::vector<std::int64_t>(n, mi));

  TransportResult result;
  result.plan = Matrix(m, n, 0.0);
  result.pivots = pivots;
  const double scale = 1.0 / static_cast<double>(m * n);
  for (const auto& c : basis.cells) result.plan(c.row, c.col) += static_cast<double>(c.flow) * scale;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) result.total_cost += result.plan(i, j) * cost(i, j);
  return result;
}

}  // namespace rfsclust
