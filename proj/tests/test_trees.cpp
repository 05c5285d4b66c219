#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "cantor/trees.hpp"

using namespace cantor;

namespace {

SilverTree silver(const std::string& x, std::vector<std::size_t> free) { return SilverTree(Point::from_string(x), IndexSet(std::move(free))); }

std::vector<std::string> leaf_strings(const PrefixTree& T) { return body(T).strings(); }

// Naive oracle: every word of length `depth`, kept when it matches x off `free`.
std::vector<std::string> silver_leaves_by_filter(const SilverTree& T, std::size_t depth) {
  std::vector<std::string> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << depth); ++v) {
    const Word w(Block(0, depth), v);
    bool ok = true;
    for (std::size_t i = 0; i < depth && ok; ++i)
      if (!T.free.contains(i)) ok = w.at(i) == T.x.at(i);
    if (ok) out.push_back(w.str());
  }
  return out;
}

}  // namespace

TEST(SilverToPrefix, Examples) {
  const auto T = silver("0000", {1, 3});
  EXPECT_EQ(leaf_strings(silver_to_prefix(T, 4)), (std::vector<std::string>{"0000", "0001", "0100", "0101"}));
  EXPECT_EQ(leaf_strings(to_prefix(silver("1011", {}))), (std::vector<std::string>{"1011"}));
  EXPECT_EQ(to_prefix(silver("0110", {0, 1, 2, 3})), PrefixTree::full(4));
  EXPECT_EQ(leaf_strings(silver_to_prefix(silver("10110", {1, 4}), 3)), (std::vector<std::string>{"101", "111"}));
}

TEST(SilverToPrefix, MatchesFilterOracle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::size_t h = 1 + rng() % 9;
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < h; ++k)
      if (rng() % 3 == 0) free.push_back(k);
    const SilverTree T(Point(h, rng() & low_mask(h)), IndexSet(free));
    const std::size_t depth = 1 + rng() % h;
    const auto P = silver_to_prefix(T, depth);
    ASSERT_EQ(leaf_strings(P), silver_leaves_by_filter(T, depth));
    EXPECT_EQ(P.size(), std::size_t{1} << T.free.within(Block(0, depth)).size());
    EXPECT_TRUE(classify(P).silver || T.free.within(Block(0, depth)).empty());
  }
}

TEST(Body, Examples) {
  EXPECT_EQ(body(PrefixTree::full(3)).size(), 8u);
  EXPECT_EQ(body(PrefixTree::branch(Point::from_string("0110"))).size(), 1u);
  EXPECT_EQ(leaf_strings(to_prefix(silver("00", {0}))), (std::vector<std::string>{"00", "10"}));
}

TEST(TreeRestrict, Examples) {
  EXPECT_EQ(tree_restrict(PrefixTree::full(5), Block(1, 4)), PatternSet::full(Block(1, 4)));
  EXPECT_EQ(tree_restrict(PrefixTree::branch(Point::from_string("01101")), Block(2, 5)).strings(), (std::vector<std::string>{"101"}));
  EXPECT_EQ(tree_restrict(to_prefix(silver("0000", {1, 3})), Block(0, 2)).strings(), (std::vector<std::string>{"00", "01"}));
  EXPECT_THROW((void)tree_restrict(PrefixTree::full(3), Block(2, 4)), Error);
}

TEST(TreeRestrict, SilverRestrictionSize) {
  const auto T = silver("0110100110", {0, 2, 3, 7, 9});
  const auto P = to_prefix(T);
  for (const auto& b : {Block(0, 4), Block(4, 8), Block(8, 10), Block(1, 2)})
    EXPECT_EQ(tree_restrict(P, b).size(), std::size_t{1} << T.free.within(b).size());
}

TEST(PrefixTree, FromNodesValidation) {
  const std::vector<std::string> ok{"", "0", "1", "00", "11"};
  const auto T = PrefixTree::from_nodes(2, ok);
  EXPECT_EQ(leaf_strings(T), (std::vector<std::string>{"00", "11"}));
  const std::vector<std::string> no_root{"0", "00"};
  EXPECT_THROW((void)PrefixTree::from_nodes(2, no_root), Error);
  const std::vector<std::string> not_closed{"", "0", "01", "11"};
  EXPECT_THROW((void)PrefixTree::from_nodes(2, not_closed), Error);
  const std::vector<std::string> not_pruned{"", "0", "1", "00"};
  EXPECT_THROW((void)PrefixTree::from_nodes(2, not_pruned), Error);
  EXPECT_THROW(PrefixTree(3, std::vector<std::uint64_t>{}), Error);
}

TEST(PrefixTree, NodesAndSplits) {
  const std::vector<std::string> leaves{"000", "001", "110"};
  const auto T = PrefixTree::from_leaves(3, leaves);
  EXPECT_TRUE(T.contains("11"));
  EXPECT_FALSE(T.contains("10"));
  EXPECT_TRUE(T.splits(Node{}));
  EXPECT_FALSE(T.splits(Node::from_string("0")));
  EXPECT_TRUE(T.splits(Node::from_string("00")));
  EXPECT_EQ(T.nodes().size(), 1u + 2u + 2u + 3u);
}

TEST(Classify, Examples) {
  const KindFlags all{true, true, true, true};
  EXPECT_EQ(classify(PrefixTree::full(6)), all);
  EXPECT_EQ(classify(PrefixTree::branch(Point::from_string("010011"))), KindFlags{});
  EXPECT_TRUE(classify(silver("0100110", {1, 4, 5})).silver);
}

TEST(Classify, PerfectButNotUniform) {
  // After 0 coordinates 1 and 3 split, after 1 coordinates 2 and 3.
  const std::vector<std::string> leaves{"0000", "0001", "0100", "0101", "1000", "1001", "1010", "1011"};
  const auto T = PrefixTree::from_leaves(4, leaves);
  const auto f = classify(T);
  EXPECT_TRUE(f.perfect);
  EXPECT_FALSE(f.uniformly_perfect);
  EXPECT_FALSE(f.silver);
}

TEST(Classify, NotPerfectWhenABranchStopsSplitting) {
  const std::vector<std::string> leaves{"0000", "0001", "1000"};
  EXPECT_FALSE(classify(PrefixTree::from_leaves(4, leaves)).perfect);
}

TEST(Classify, SplittingDiagnostics) {
  const auto full = splitting_thresholds(PrefixTree::full(6));
  EXPECT_FALSE(full.empty());
  // A Silver tree with a forced tail coordinate never splits there.
  EXPECT_FALSE(classify(silver("000000", {0, 1, 2, 3, 4})).splitting_at_horizon);
}

TEST(IsSubtree, Examples) {
  const auto T = to_prefix(silver("00000", {0, 2, 4}));
  EXPECT_TRUE(is_subtree(T, T));
  EXPECT_TRUE(is_subtree(PrefixTree::branch(Point::from_string("10001")), T));
  const std::vector<std::string> left{"00000"};
  const std::vector<std::string> right{"10000"};
  EXPECT_FALSE(is_subtree(PrefixTree::from_leaves(5, left), PrefixTree::from_leaves(5, right)));
  EXPECT_THROW((void)is_subtree(T, PrefixTree::full(4)), Error);
}

TEST(SilverSum, Examples) {
  EXPECT_EQ(silver_sum(silver("1010", {0}), silver("0110", {3})), silver("1100", {0, 3}));
  const auto T = silver("1011", {1, 2});
  const auto TT = silver_sum(T, T);
  EXPECT_EQ(TT.x, Point::from_string("0000"));
  EXPECT_EQ(TT.free, T.free);
  EXPECT_EQ(silver_sum(T, silver("0000", {})), T);
}

TEST(SilverSum, BodyLawAndMonotonicity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::size_t h = 1 + rng() % 8;
    auto random_silver = [&] {
      std::vector<std::size_t> free;
      for (std::size_t k = 0; k < h; ++k)
        if (rng() % 3 == 0) free.push_back(k);
      return SilverTree(Point(h, rng() & low_mask(h)), IndexSet(free));
    };
    const auto A = random_silver();
    const auto B = random_silver();
    const auto PA = to_prefix(A);
    const auto PB = to_prefix(B);
    ASSERT_EQ(body(to_prefix(silver_sum(A, B))), pattern_sum(body(PA), body(PB)));
    // S inside A: keep only the first free coordinate
    const auto S = to_prefix(SilverTree(A.x, A.free.empty() ? IndexSet() : IndexSet({A.free.members().front()})));
    ASSERT_TRUE(is_subtree(S, PA));
    EXPECT_TRUE(pattern_sum(body(S), body(S)).subset_of(pattern_sum(body(PA), body(PA))));
  }
}

TEST(SplitCountOnStem, Examples) {
  EXPECT_EQ(split_count_on_stem(PrefixTree::full(3), Node::from_string("010")), 3u);
  EXPECT_EQ(split_count_on_stem(PrefixTree::full(5), Node::from_string("010")), 4u);
  EXPECT_EQ(split_count_on_stem(PrefixTree::branch(Point::from_string("0110")), Node::from_string("011")), 0u);
  EXPECT_EQ(split_count_on_stem(to_prefix(silver("0000", {1, 3})), Node::from_string("0101")), 2u);
  EXPECT_THROW((void)split_count_on_stem(PrefixTree::branch(Point::from_string("0110")), Node::from_string("1")), Error);
}

TEST(Node, PrefixAndChild) {
  const auto n = Node::from_string("1011");
  EXPECT_EQ(n.prefix(2).str(), "10");
  EXPECT_EQ(n.child(true).str(), "10111");
  EXPECT_EQ(Node{}.str(), "");
}
