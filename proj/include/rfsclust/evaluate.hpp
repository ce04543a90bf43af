#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rfsclust/error.hpp"

namespace rfsclust {

// Plain Rand index: the fraction of the C(N,2) pairs on which the two
// partitions agree (together in both, or apart in both). Labels are compared
// only for equality. Counted from the contingency table:
//   agreements = C(N,2) + 2*sum_ij C(n_ij,2) - sum_i C(a_i,2) - sum_j C(b_j,2).
template <class L1, class L2>
double rand_index(const std::vector<L1>& predicted, const std::vector<L2>& truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, "label lists differ in length (" + std::to_string(predicted.size()) +
                                               " vs " + std::to_string(truth.size()) + ")");
  const std::uint64_t n = predicted.size();
  if (n < 2) throw Error(ErrorCode::TooFew, "Rand index needs at least two items");

  std::map<L1, std::size_t> row_id;
  std::map<L2, std::size_t> col_id;
  std::vector<std::size_t> rows(n), cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = row_id.emplace(predicted[i], row_id.size()).first->second;
    cols[i] = col_id.emplace(truth[i], col_id.size()).first->second;
  }
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> cells;
  std::vector<std::uint64_t> row_tot(row_id.size(), 0), col_tot(col_id.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++cells[{rows[i], cols[i]}];
    ++row_tot[rows[i]];
    ++col_tot[cols[i]];
  }
  auto pairs = [](std::uint64_t k) { return k * (k - (k > 0 ? 1 : 0)) / 2; };
  std::uint64_t same_both = 0, same_pred = 0, same_truth = 0;
  for (const auto& [cell, count] : cells) same_both += pairs(count);
  for (auto t : row_tot) same_pred += pairs(t);
  for (auto t : col_tot) same_truth += pairs(t);
  const std::uint64_t total = pairs(n);
  const std::uint64_t agreements = total + 2 * same_both - same_pred - same_truth;
  return static_cast<double>(agreements) / static_cast<double>(total);
}

}  // namespace rfsclust
