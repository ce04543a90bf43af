#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rfsclust/evaluate.hpp"
#include "rfsclust/rng.hpp"

using namespace rfsclust;

TEST(RandIndex, Examples) {
  EXPECT_EQ(rand_index(std::vector<int>{1, 1, 2, 2}, std::vector<int>{2, 2, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(rand_index(std::vector<int>{1, 1, 2, 2}, std::vector<int>{1, 2, 1, 2}), 1.0 / 3.0);
  EXPECT_EQ(rand_index(std::vector<int>{0, 1, 2}, std::vector<std::string>{"a", "a", "a"}), 0.0);
}

TEST(RandIndex, MatchesPairEnumeration) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<std::size_t> a(n), b(n);
    const std::size_t ka = 1 + rng.below(6), kb = 1 + rng.below(6);
    for (auto& v : a) v = rng.below(ka);
    for (auto& v : b) v = rng.below(kb);
    EXPECT_EQ(rand_index(a, b), oracle::rand_index_pairs(a, b));
    EXPECT_EQ(rand_index(a, b), rand_index(b, a));
    // Relabel a bijectively.
    std::vector<std::size_t> relabel(a.size());
    for (std::size_t i = 0; i < n; ++i) relabel[i] = 100 - a[i];
    EXPECT_EQ(rand_index(relabel, b), rand_index(a, b));
    EXPECT_EQ(rand_index(a, relabel), 1.0);
  }
}

TEST(RandIndex, OneOnlyForIdenticalPartitions) {
  EXPECT_LT(rand_index(std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 1}), 1.0);
}

TEST(RandIndex, Errors) {
  try {
    rand_index(std::vector<int>{1, 2}, std::vector<int>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  try {
    rand_index(std::vector<int>{1}, std::vector<int>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFew);
  }
}
