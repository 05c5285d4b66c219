#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "cantor/oracle.hpp"

using namespace cantor;

namespace {

PrefixTree silver_prefix(const std::string& x, std::vector<std::size_t> free) {
  return to_prefix(SilverTree(Point::from_string(x), IndexSet(std::move(free))));
}

// Direct enumeration of all n-tuples of leaves.
std::set<std::uint64_t> tuple_sums(const PrefixTree& T, unsigned n) {
  std::set<std::uint64_t> out;
  const auto& L = T.leaves();
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    std::uint64_t s = 0;
    for (auto i : idx) s ^= L[i];
    out.insert(s);
    std::size_t k = 0;
    while (k < n && ++idx[k] == L.size()) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

PrefixTree random_tree(std::mt19937_64& rng, std::size_t h) {
  std::vector<std::uint64_t> leaves;
  for (std::uint64_t v = 0; v <= low_mask(h); ++v)
    if (rng() % 4 == 0) leaves.push_back(v);
  if (leaves.empty()) leaves.push_back(rng() & low_mask(h));
  return PrefixTree(h, leaves);
}

ECover random_e(std::mt19937_64& rng, const Partition& P, std::size_t thr) {
  std::vector<PatternSet> J;
  for (const auto& b : P.blocks()) {
    std::vector<std::uint64_t> ws;
    for (std::uint64_t w = 0; w <= low_mask(b.length()); ++w)
      if (rng() % 3) ws.push_back(w);
    J.emplace_back(b, ws);
  }
  return ECover(P, J, thr);
}

}  // namespace

TEST(NfoldBodySum, Examples) {
  const auto T = silver_prefix("01101", {0, 3});
  EXPECT_EQ(nfold_body_sum(T, 0), PatternSet::singleton(Word::zero(Block(0, 5))));
  EXPECT_EQ(nfold_body_sum(T, 1), body(T));
  const auto G = silver_prefix("00000", {1, 2, 4});
  EXPECT_EQ(nfold_body_sum(G, 2), body(G));
  EXPECT_EQ(nfold_body_sum(T, 3), nfold_body_sum(T, 1));
  EXPECT_EQ(nfold_body_sum(T, 4), nfold_body_sum(T, 2));
}

TEST(NfoldBodySum, AgreesWithTupleEnumeration) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const std::size_t h = 2 + rng() % 6;
    const auto T = random_tree(rng, h);
    for (unsigned n = 1; n <= 3; ++n) {
      const auto S = nfold_body_sum(T, n);
      const auto naive = tuple_sums(T, n);
      ASSERT_EQ(std::vector<std::uint64_t>(naive.begin(), naive.end()), S.values());
    }
  }
}

TEST(NfoldBodySum, BudgetIsAHardError) {
  EXPECT_THROW((void)nfold_body_sum(PrefixTree::full(12), 2, 1000), Error);
}

TEST(BlockSets, CardinalityMatchesEnumeration) {
  const Block b(0, 6);
  const BlockSet ex = Excluding{b, {3, 17}};
  const BlockSet diff = DifferingOn{b, {Word::from_string(Block(0, 2), "01"), Word::from_string(Block(3, 5), "11")}};
  EXPECT_EQ(cardinality(ex), BigInt(62));
  EXPECT_EQ(cardinality(diff), BigInt(3 * 3 * 4));
  EXPECT_EQ(BigInt(enumerate(diff).size()), cardinality(diff));
  EXPECT_FALSE(contains(diff, Word::from_string(b, "011000").bits));
  EXPECT_TRUE(contains(diff, Word::from_string(b, "001000").bits));
  BlockSet e = ex;
  remove_word(e, 5);
  EXPECT_EQ(cardinality(e), BigInt(61));
  BlockSet d = diff;
  EXPECT_THROW(remove_word(d, 0), Error);
}

TEST(BlockwiseCertify, TrivialPasses) {
  const auto P = Partition::uniform(6, 2);
  const auto T = PrefixTree::full(6);
  std::vector<BlockSet> full, src;
  for (const auto& b : P.blocks()) {
    full.emplace_back(PatternSet::full(b));
    src.emplace_back(PatternSet::from_strings(b, std::vector<std::string>{"01"}));
  }
  EXPECT_TRUE(blockwise_certify(src, T, {0, 1, 2, 3}, full, 0, 3).pass);
  EXPECT_TRUE(blockwise_certify(src, T, {0}, src, 0, 3).pass);
  const auto fail = blockwise_certify(src, T, {1}, src, 0, 3);
  EXPECT_FALSE(fail.pass);
  ASSERT_FALSE(fail.records.empty());
  EXPECT_TRUE(fail.records.front().counterexample.has_value());
  EXPECT_TRUE(blockwise_certify(src, T, {1}, src, 3, 3).pass);
}

TEST(ExhaustiveContainment, Trivial) {
  const auto P = Partition::uniform(6, 2);
  const auto x = Point::from_string("010011");
  const AnyCover src = MeagerCover(x, P);
  const AnyCover vacuous = MeagerCover(x, P, 3);
  EXPECT_TRUE(exhaustive_containment(src, PrefixTree::full(6), 3, vacuous));
  EXPECT_TRUE(exhaustive_containment(src, PrefixTree::full(6), 0, src));
  EXPECT_FALSE(exhaustive_containment(src, PrefixTree::full(6), 1, src));
  const AnyCover small = SmallCover(P, {PatternSet(P[0]), PatternSet(P[1]), PatternSet(P[2])});
  EXPECT_THROW((void)exhaustive_containment(small, PrefixTree::full(6), 1, src), Error);
  EXPECT_THROW((void)exhaustive_containment(src, PrefixTree::full(6), 1, src, 5), Error);
}

TEST(Certify, BlockwisePassImpliesExhaustive) {
  std::mt19937_64 rng(17);
  int passes = 0;
  for (int i = 0; i < 60; ++i) {
    const auto P = Partition::uniform(8, 2);
    const AnyCover src = random_e(rng, P, rng() % 2);
    const AnyCover wit = random_e(rng, P, rng() % 3);
    const auto T = random_tree(rng, 8);
    for (unsigned b = 0; b <= 2; ++b) {
      const auto cert = certify(src, T, {b}, wit);
      const bool ex = exhaustive_containment(src, T, b, wit);
      if (cert.pass) {
        ++passes;
        ASSERT_TRUE(ex) << "unsound certificate, trial " << i << " fold " << b;
      }
    }
  }
  EXPECT_GT(passes, 0);
}

TEST(Certify, MeagerSourceOnCoarserWitness) {
  const auto fine = Partition::uniform(8, 2);
  const auto coarse = Partition::uniform(8, 4);
  const auto x = Point::from_string("01100101");
  const AnyCover src = MeagerCover(x, fine);
  const auto aligned = aligned_source(src, coarse);
  ASSERT_EQ(aligned.size(), 2u);
  EXPECT_EQ(cardinality(aligned[0]), BigInt(9));
  EXPECT_THROW((void)aligned_source(src, Partition::from_lengths(std::vector<std::size_t>{3, 5})), Error);
}

TEST(DensityAuditTable, Rows) {
  const auto P = Partition::uniform(4, 2);
  const SmallCover s(P, {PatternSet::from_strings(P[0], std::vector<std::string>{"00"}), PatternSet(P[1])});
  const ECover e(P, {PatternSet::from_strings(P[0], std::vector<std::string>{"00", "01", "10"}), PatternSet::full(P[1])}, 0, 1);
  const std::vector<Witness> ws{{"small", s, s, 1u, Rational(1, 2)}, {"e", e, e, std::nullopt, Rational(1, 2)}, {"m", e, e, std::nullopt, std::nullopt}};
  const auto rows = density_audit_table(ws);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].measure, "mass");
  EXPECT_EQ(rows[0].value, Rational(1, 4));
  EXPECT_TRUE(rows[0].pass);
  EXPECT_EQ(rows[1].measure, "max_density");
  EXPECT_EQ(rows[1].value, Rational(3, 4));
  EXPECT_FALSE(rows[1].pass);
}
