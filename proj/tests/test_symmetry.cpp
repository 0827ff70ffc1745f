#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "support.hpp"

using namespace metricnet;

namespace {

Partition cycle_type(const std::vector<int>& perm) {
  std::vector<char> seen(perm.size(), 0);
  Partition out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = 1;
      ++len;
    }
    out.push_back(len);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

/// Every permutation of n points, grouped by cycle type.
std::map<Partition, std::vector<std::vector<int>>> enumerate(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::map<Partition, std::vector<std::vector<int>>> out;
  do out[cycle_type(p)].push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

int fixed_points(const std::vector<int>& p) {
  int c = 0;
  for (std::size_t i = 0; i < p.size(); ++i) c += p[i] == static_cast<int>(i);
  return c;
}

int parity(const std::vector<int>& p) {
  auto t = cycle_type(p);
  int transpositions = 0;
  for (int len : t) transpositions += len - 1;
  return transpositions % 2 ? -1 : 1;
}

}  // namespace

TEST(Symmetry, PartitionCounts) {
  std::vector<std::size_t> expected{1, 1, 2, 3, 5, 7, 11, 15, 22};
  for (int n = 0; n <= 8; ++n) EXPECT_EQ(partitions(n).size(), expected[static_cast<std::size_t>(n)]);
  auto p4 = partitions(4);
  EXPECT_EQ(p4.front(), (Partition{4}));
  EXPECT_EQ(p4.back(), (Partition{1, 1, 1, 1}));
}

TEST(Symmetry, S3TableExactly) {
  auto t = character_table(3);
  ASSERT_EQ(t.classes.size(), 3u);
  EXPECT_EQ(t.classes[0].representative, "()");
  EXPECT_EQ(t.classes[1].representative, "(1,2)");
  EXPECT_EQ(t.classes[2].representative, "(1,2,3)");
  EXPECT_EQ(t.classes[0].size, 1);
  EXPECT_EQ(t.classes[1].size, 3);
  EXPECT_EQ(t.classes[2].size, 2);
  ASSERT_EQ(t.irreps.size(), 3u);
  EXPECT_EQ(t.irreps[0].name, "trivial");
  EXPECT_EQ(t.irreps[0].characters, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(t.irreps[1].name, "sign");
  EXPECT_EQ(t.irreps[1].characters, (std::vector<int>{1, -1, 1}));
  EXPECT_EQ(t.irreps[2].name, "standard");
  EXPECT_EQ(t.irreps[2].characters, (std::vector<int>{2, 0, -1}));
}

TEST(Symmetry, S4TableMatchesTextbook) {
  auto t = character_table(4);
  std::vector<std::vector<int>> expected{
      {1, 1, 1, 1, 1}, {1, -1, 1, 1, -1}, {3, 1, 0, -1, -1}, {2, 0, -1, 2, 0}, {3, -1, 0, -1, 1}};
  ASSERT_EQ(t.irreps.size(), expected.size());
  for (std::size_t a = 0; a < expected.size(); ++a) EXPECT_EQ(t.irreps[a].characters, expected[a]) << t.irreps[a].name;
  EXPECT_EQ(t.classes[3].representative, "(1,2)(3,4)");
}

TEST(Symmetry, ClassSizesMatchEnumeration) {
  for (int n = 2; n <= 7; ++n) {
    auto groups = enumerate(n);
    auto t = character_table(n);
    std::int64_t total = 0;
    for (const auto& c : t.classes) {
      EXPECT_EQ(c.size, static_cast<std::int64_t>(groups.at(c.cycle_type).size()));
      total += c.size;
    }
    EXPECT_EQ(total, factorial(n));
  }
}

TEST(Symmetry, SignAndStandardMatchEnumeration) {
  for (int n = 2; n <= 7; ++n) {
    auto groups = enumerate(n);
    auto t = character_table(n);
    for (std::size_t b = 0; b < t.classes.size(); ++b) {
      const auto& rep = groups.at(t.classes[b].cycle_type).front();
      EXPECT_EQ(t.irreps[1].characters[b], parity(rep));
      if (n >= 3) EXPECT_EQ(t.irreps[2].characters[b], fixed_points(rep) - 1);
      EXPECT_EQ(permutation_character(t)[b], fixed_points(rep));
    }
  }
}

TEST(Symmetry, OrthogonalityRelations) {
  for (int n = 2; n <= 8; ++n) {
    auto t = character_table(n);
    std::int64_t dims = 0;
    for (const auto& a : t.irreps) {
      dims += static_cast<std::int64_t>(a.dimension) * a.dimension;
      for (const auto& b : t.irreps) {
        std::int64_t sum = 0;
        for (std::size_t c = 0; c < t.classes.size(); ++c)
          sum += t.classes[c].size * a.characters[c] * b.characters[c];
        EXPECT_EQ(sum, &a == &b ? t.group_order() : 0) << n;
      }
    }
    EXPECT_EQ(dims, t.group_order());
  }
}

TEST(Symmetry, HookShapeDimensionsByHookLengthFormula) {
  // λ = (n-j, 1^j) has dimension C(n-1, j)
  auto t = character_table(7);
  for (const auto& ir : t.irreps) {
    const auto& s = ir.shape;
    bool hook = std::all_of(s.begin() + 1, s.end(), [](int x) { return x == 1; });
    if (!hook) continue;
    int j = static_cast<int>(s.size()) - 1;
    std::int64_t binom = factorial(6) / (factorial(j) * factorial(6 - j));
    EXPECT_EQ(ir.dimension, binom);
  }
}

TEST(Symmetry, PermutationDecompositions) {
  auto t3 = character_table(3);
  EXPECT_EQ(decompose(permutation_character(t3), t3).coefficients, (std::vector<int>{1, 0, 1}));
  for (int n = 2; n <= 8; ++n) {
    auto t = character_table(n);
    auto d = decompose(permutation_character(t), t);
    EXPECT_EQ(d.dimension, n);
    EXPECT_EQ(d.coefficients[0], 1);
    if (n >= 3) {
      EXPECT_EQ(t.irreps[2].name, "standard");
      EXPECT_EQ(d.coefficients[2], 1);
      EXPECT_EQ(std::accumulate(d.coefficients.begin(), d.coefficients.end(), 0), 2);
    }
  }
}

TEST(Symmetry, RegularCharacterContainsEveryIrrepByDimension) {
  auto t = character_table(5);
  std::vector<int> regular(t.classes.size(), 0);
  regular[0] = static_cast<int>(t.group_order());
  auto d = decompose(regular, t);
  for (std::size_t a = 0; a < t.irreps.size(); ++a) EXPECT_EQ(d.coefficients[a], t.irreps[a].dimension);
}

TEST(Symmetry, InvalidCharacters) {
  auto t = character_table(3);
  auto kind = [&](const std::vector<int>& chi) {
    try {
      decompose(chi, t);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::internal_inconsistency;
  };
  EXPECT_EQ(kind({1, 0, 0}), ErrorKind::invalid_character);
  EXPECT_EQ(kind({1, -1}), ErrorKind::incompatible_operands);
  EXPECT_THROW(character_table(9), Error);
  EXPECT_THROW(character_table(1), Error);
}

TEST(Symmetry, StarDegeneracyPrediction) {
  EXPECT_EQ(predict_star_degeneracies(2), (std::vector<int>{1, 1}));
  EXPECT_EQ(predict_star_degeneracies(3), (std::vector<int>{1, 2}));
  EXPECT_EQ(predict_star_degeneracies(4), (std::vector<int>{1, 3}));
  EXPECT_EQ(predict_star_degeneracies(6), (std::vector<int>{1, 5}));
}
