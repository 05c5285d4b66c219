#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "cantor/constructions.hpp"

using namespace cantor;

namespace {

const std::vector<unsigned> kFolds{0, 1, 2, 3};

SilverTree silver(const std::string& x, std::vector<std::size_t> free) { return SilverTree(Point::from_string(x), IndexSet(std::move(free))); }

IndexSet evens(std::size_t h) {
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < h; i += 2) v.push_back(i);
  return IndexSet(v);
}

std::vector<PatternSet> singletons(const Partition& P, const Point& x) {
  std::vector<PatternSet> J;
  for (const auto& b : P.blocks()) J.push_back(PatternSet::singleton(restrict(x, b)));
  return J;
}

std::vector<PatternSet> random_patterns(std::mt19937_64& rng, const Partition& P, unsigned keep_one_in) {
  std::vector<PatternSet> J;
  for (const auto& b : P.blocks()) {
    std::vector<std::uint64_t> ws;
    for (std::uint64_t w = 0; w <= low_mask(b.length()); ++w)
      if (rng() % keep_one_in == 0) ws.push_back(w);
    J.emplace_back(b, ws);
  }
  return J;
}

// Tree output is a subtree of the input, keeps its promised kind, and every
// witness is certified blockwise and, when a point test exists, exhaustively.
void verify(const ShrinkResult& r) {
  const auto T = r.prefix_out();
  if (r.tree_in) {
    ASSERT_TRUE(is_subtree(T, *r.tree_in)) << r.op;
  }
  const auto f = classify(T);
  const bool kept = r.promised == "silver"              ? f.silver
                    : r.promised == "perfect"           ? f.perfect
                    : r.promised == "uniformly_perfect" ? f.uniformly_perfect
                                                        : f.splitting_at_horizon;
  EXPECT_TRUE(kept) << r.op << " promised " << r.promised;
  for (const auto& w : r.witnesses) {
    const auto folds = w.fold ? std::vector<unsigned>{*w.fold} : kFolds;
    EXPECT_TRUE(certify(w.source, T, folds, w.cover).pass) << r.op << " witness " << w.label;
    if (std::holds_alternative<SmallCover>(w.cover) || T.horizon() > 12) continue;
    for (auto b : folds) {
      EXPECT_TRUE(exhaustive_containment(w.source, T, b, w.cover)) << r.op << " fold " << b;
    }
  }
  for (const auto& row : density_audit_table(r.witnesses)) EXPECT_TRUE(row.pass) << r.op << " audit " << row.label;
}

std::string provenance(const ShrinkResult& r, const std::string& key) {
  for (const auto& [k, v] : r.provenance)
    if (k == key) return v;
  return "";
}

}  // namespace

TEST(ShrinkSilverMeager, EvensOnPairedUnitPairs) {
  const MeagerCover F(Point::zero(8), Partition::uniform(8, 2));
  const auto r = shrink_silver_meager(F, SilverTree(Point::zero(8), evens(8)));
  verify(r);
  EXPECT_EQ(std::get<SilverTree>(r.tree_out).free.members(), (std::vector<std::size_t>{0, 4}));
  for (const auto& w : r.witnesses) {
    if (*w.fold % 2 == 0) {
      EXPECT_EQ(std::get<MeagerCover>(w.cover).center, Point::zero(8));
    }
  }
}

TEST(ShrinkSilverMeager, DegenerateTree) {
  const MeagerCover F(Point::zero(6), Partition::uniform(6, 1));
  EXPECT_THROW((void)shrink_silver_meager(F, silver("010101", {})), Error);
  EXPECT_THROW((void)shrink_silver_meager(F, silver("0101010", {1})), Error);
}

TEST(ShrinkSilverMeager, RandomInstances) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 25; ++i) {
    const std::size_t h = 6 + rng() % 6;
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < h; ++k)
      if (rng() % 2) free.push_back(k);
    if (free.empty()) free.push_back(0);
    const MeagerCover F(Point(h, rng() & low_mask(h)), Partition::uniform(h, 1 + rng() % 2), rng() % 2);
    verify(shrink_silver_meager(F, SilverTree(Point(h, rng() & low_mask(h)), IndexSet(free))));
  }
}

TEST(ShrinkPerfectMeager, FullTree) {
  const MeagerCover F(Point::from_string("011010011101"), Partition::uniform(12, 1));
  for (bool uniform : {false, true}) {
    ConstructionOptions opt;
    opt.uniform = uniform;
    verify(shrink_perfect_meager(F, PrefixTree::full(12), opt));
  }
}

TEST(ShrinkPerfectMeager, RejectsNonPerfectTree) {
  const MeagerCover F(Point::zero(6), Partition::uniform(6, 1));
  EXPECT_THROW((void)shrink_perfect_meager(F, PrefixTree::branch(Point::zero(6))), Error);
}

TEST(BuildSplittingMeager, FirstBlockPatterns) {
  const MeagerCover F(Point::zero(12), Partition::uniform(12, 2));
  const auto r = build_splitting_meager(F);
  verify(r);
  const auto R = tree_restrict(r.prefix_out(), Block(0, 2));
  EXPECT_EQ(R.strings(), (std::vector<std::string>{"01", "10"}));
}

TEST(ShrinkSilverSmall, MassAndDegenerateBlocks) {
  const auto P = Partition::uniform(8, 2);
  const SmallCover F(P, singletons(P, Point::from_string("01101100")));
  const auto r = shrink_silver_small(F, silver("00000000", {0, 1, 4}));
  verify(r);
  const auto& out = std::get<SmallCover>(r.witnesses.front().cover);
  for (std::size_t n = 0; n < P.size(); ++n) {
    EXPECT_LE(out.patterns[n].size(), 4 * F.patterns[n].size());
    EXPECT_TRUE(out.patterns[n].size() == 1 || out.patterns[n].size() == 2 || out.patterns[n].size() == 4);
  }
  // x_T = 0 and no kept coordinate in blocks 1 and 3
  EXPECT_EQ(out.patterns[1], F.patterns[1]);
  EXPECT_EQ(out.patterns[3], F.patterns[3]);
}

TEST(ShrinkSilverNull, EmptySecondCover) {
  const auto P = Partition::uniform(8, 2);
  std::vector<PatternSet> none;
  for (const auto& b : P.blocks()) none.emplace_back(b);
  const NullCover F(SmallCover(P, singletons(P, Point::ones(8))), SmallCover(P, none));
  const auto r = shrink_silver_null(F, silver("10100101", {1, 2, 5, 6}));
  verify(r);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.tree_out, shrink_silver_small(F.first, silver("10100101", {1, 2, 5, 6})).tree_out);
}

TEST(ShrinkSilverNull, SubtreeChain) {
  std::mt19937_64 rng(8);
  const auto P1 = Partition::uniform(10, 2);
  const auto P2 = Partition::from_lengths(std::vector<std::size_t>{1, 3, 3, 3});
  const NullCover F(SmallCover(P1, random_patterns(rng, P1, 3)), SmallCover(P2, random_patterns(rng, P2, 4)));
  const auto T = silver("1011001110", {0, 1, 2, 3, 5, 7, 8, 9});
  const auto r = shrink_silver_null(F, T);
  verify(r);
  const auto first = shrink_silver_small(F.first, T);
  EXPECT_TRUE(is_subtree(r.prefix_out(), first.prefix_out()));
  EXPECT_EQ(r.witnesses.size(), 2u);
}

TEST(ShrinkPerfectSmall, SplitBudgetAndBounds) {
  const auto P = Partition::from_lengths(std::vector<std::size_t>{1, 4, 6, 3});
  const SmallCover F(P, {PatternSet::from_strings(P[0], std::vector<std::string>{"1"}),
                         PatternSet::from_strings(P[1], std::vector<std::string>{"0110"}),
                         PatternSet::from_strings(P[2], std::vector<std::string>{"101100"}), PatternSet(P[3])});
  for (bool uniform : {false, true}) {
    ConstructionOptions opt;
    opt.uniform = uniform;
    const auto r = shrink_perfect_small(F, PrefixTree::full(14), opt);
    verify(r);
    const auto ks = provenance(r, "k");
    ASSERT_FALSE(ks.empty());
    std::vector<std::size_t> k;
    for (std::size_t at = 0; at < ks.size();) {
      const auto next = ks.find(',', at);
      k.push_back(std::stoul(ks.substr(at, next - at)));
      at = next == std::string::npos ? ks.size() : next + 1;
    }
    ASSERT_EQ(k.size(), P.size());
    for (std::size_t n = 0; n < P.size(); ++n) EXPECT_LE(tree_restrict(r.prefix_out(), P[n]).size(), std::size_t{1} << k[n]);
    const auto zero = std::find_if(r.witnesses.begin(), r.witnesses.end(), [](const Witness& w) { return w.fold == 0u; });
    ASSERT_NE(zero, r.witnesses.end());
    EXPECT_EQ(small_mass(std::get<SmallCover>(zero->cover)), small_mass(F));
  }
}

TEST(ShrinkPerfectNull, ChainAndAudits) {
  std::mt19937_64 rng(12);
  const auto P = Partition::from_lengths(std::vector<std::size_t>{2, 3, 3, 4});
  const NullCover F(SmallCover(P, random_patterns(rng, P, 5)), SmallCover(P, random_patterns(rng, P, 6)));
  verify(shrink_perfect_null(F, PrefixTree::full(12)));
}

TEST(BuildSplittingNull, SplittingAndGrowth) {
  std::mt19937_64 rng(99);
  const auto P1 = Partition::from_lengths(std::vector<std::size_t>{2, 4, 4, 2});
  const auto P2 = Partition::from_lengths(std::vector<std::size_t>{4, 4, 4});
  const NullCover F(SmallCover(P1, random_patterns(rng, P1, 6)), SmallCover(P2, random_patterns(rng, P2, 8)));
  const auto r = build_splitting_null(F);
  verify(r);
  const auto badly = NullCover(SmallCover(P1, random_patterns(rng, P1, 6)),
                               SmallCover(Partition::from_lengths(std::vector<std::size_t>{3, 9}), random_patterns(rng, Partition::from_lengths(std::vector<std::size_t>{3, 9}), 8)));
  EXPECT_THROW((void)build_splitting_null(badly), Error);
}

TEST(ShrinkMN, AllKinds) {
  const auto P = Partition::uniform(10, 2);
  const MeagerCover Fm(Point::from_string("0110100110"), Partition::uniform(10, 1));
  std::mt19937_64 rng(4);
  const NullCover Fn(SmallCover(P, random_patterns(rng, P, 4)), SmallCover(P, random_patterns(rng, P, 4)));
  verify(shrink_mn(Fm, Fn, silver("1100110011", {0, 2, 3, 5, 6, 8, 9}), TreeKind::Silver));
  verify(shrink_mn(Fm, Fn, PrefixTree::full(10), TreeKind::Perfect));
  verify(shrink_mn(Fm, Fn, PrefixTree::full(10), TreeKind::UniformlyPerfect));
  EXPECT_THROW((void)shrink_mn(Fm, Fn, PrefixTree::full(10), TreeKind::Silver), Error);
}

TEST(SimplifyECover, HandFollowed) {
  using Stages = std::vector<std::vector<Node>>;
  const ClosedNullChain chain(Stages{{Node::from_string("000")}, {Node::from_string("000000")}});
  const auto E = simplify_e_cover(chain);
  ASSERT_EQ(E.partition.size(), 2u);
  EXPECT_EQ(E.partition[0], Block(0, 3));
  EXPECT_EQ(E.partition[1], Block(3, 6));
  EXPECT_EQ(E.patterns[0].strings(), (std::vector<std::string>{"000"}));
  EXPECT_EQ(E.patterns[1].strings(), (std::vector<std::string>{"000"}));
  EXPECT_EQ(density(E.patterns[0]), Rational(1, 8));
}

TEST(SimplifyECover, Errors) {
  using Stages = std::vector<std::vector<Node>>;
  try {
    (void)simplify_e_cover(ClosedNullChain(Stages{{Node::from_string("00")}, {Node::from_string("110")}}));
    FAIL() << "expected NotAscending";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotAscending);
  }
  try {
    (void)simplify_e_cover(ClosedNullChain(Stages{{Node::from_string("1")}, {Node::from_string("10")}}));
    FAIL() << "expected InsufficientNullity";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientNullity);
  }
}

TEST(ShrinkSilverE, DensityBounds) {
  const auto P = Partition::uniform(12, 2);
  const ECover E(P, singletons(P, Point::from_string("011011000111")));
  const auto r = shrink_silver_e(E, silver("101010101010", {1, 2, 4, 7, 8, 11}));
  verify(r);
  for (const auto& w : r.witnesses) EXPECT_LE(e_density_audit(std::get<ECover>(w.cover)).max_density, Rational(1, 16));

  std::mt19937_64 rng(6);
  std::vector<PatternSet> half;
  for (const auto& b : P.blocks()) {
    std::vector<std::uint64_t> all{0, 1, 2, 3};
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(2);
    half.emplace_back(b, all);
  }
  const auto r2 = shrink_silver_e(ECover(P, half), silver("000111000111", {0, 3, 4, 6, 9, 10}));
  verify(r2);
  for (const auto& w : r2.witnesses) EXPECT_LE(e_density_audit(std::get<ECover>(w.cover)).max_density, Rational(1, 2));
}

TEST(ShrinkPerfectE, FullTree) {
  std::mt19937_64 rng(21);
  const auto P = Partition::uniform(10, 1);
  std::vector<PatternSet> J;
  for (const auto& b : P.blocks()) J.push_back(PatternSet::singleton(Word(b, rng() & 1)));
  for (bool uniform : {false, true}) {
    ConstructionOptions opt;
    opt.uniform = uniform;
    verify(shrink_perfect_e(ECover(P, J), PrefixTree::full(10), opt));
  }
  EXPECT_THROW((void)shrink_perfect_e(ECover(P, J), PrefixTree::branch(Point::zero(10))), Error);
}

TEST(BuildSplittingE, SplittingAndDensity) {
  const auto P = Partition::uniform(12, 2);
  const auto r = build_splitting_e(ECover(P, singletons(P, Point::from_string("110010100011"))));
  verify(r);
  for (const auto& w : r.witnesses) EXPECT_LE(e_density_audit(std::get<ECover>(w.cover)).max_density, Rational(1, 2));
}
