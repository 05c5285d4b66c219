#pragma once

// Shrink-and-witness constructions: given a cover of a set F in one of the
// ideals and (usually) a tree T, build T' inside T of the same kind together
// with explicit covers containing F + [T'] + ... + [T'].
//
// Every "choose some ..." step is resolved deterministically: least eligible
// coordinate for free-set selections, leftmost (preorder) splitting node for
// stems, earliest allowed split when pruning to a split budget.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cantor/bits.hpp"
#include "cantor/covers.hpp"
#include "cantor/oracle.hpp"
#include "cantor/seqlemma.hpp"
#include "cantor/trees.hpp"

namespace cantor {

struct ConstructionOptions {
  unsigned max_fold = 3;  // per-fold witnesses are produced for 0..max_fold
  bool uniform = false;   // keep the tree uniformly perfect
};

using AnyTree = std::variant<SilverTree, PrefixTree>;

[[nodiscard]] inline PrefixTree as_prefix(const AnyTree& t) {
  if (const auto* s = std::get_if<SilverTree>(&t)) return to_prefix(*s);
  return std::get<PrefixTree>(t);
}

struct ShrinkResult {
  std::string op;
  AnyTree tree_out;
  std::optional<PrefixTree> tree_in;  // absent when the tree is built from scratch
  std::string promised;               // "silver", "perfect", "uniformly_perfect" or "splitting"
  std::vector<Witness> witnesses;
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<std::string> warnings;

  [[nodiscard]] PrefixTree prefix_out() const { return as_prefix(tree_out); }
};

namespace detail {

inline void require_horizon(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorKind::HorizonMismatch, std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

/// Least element of `free` in each block (blocks without one are skipped).
inline IndexSet least_per_block(const IndexSet& free, const Partition& P) {
  std::vector<std::size_t> out;
  for (const auto& b : P) {
    auto in = free.within(b);
    if (!in.empty()) out.push_back(in.members().front());
  }
  return IndexSet(std::move(out));
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

/// Coarse block n counts as usable when every fine block in it is complete
/// in the source and at least `threshold`. Returns the least n such that all
/// complete coarse blocks from n on are usable and satisfy `extra(n)`.
inline std::size_t tail_threshold(const std::vector<std::pair<std::size_t, std::size_t>>& groups, std::size_t complete,
                                  std::size_t src_threshold, std::size_t src_complete,
                                  const std::function<bool(std::size_t)>& extra = {}) {
  std::size_t thr = complete;
  for (std::size_t n = complete; n-- > 0;) {
    auto [a, b] = groups[n];
    const bool ok = a >= src_threshold && b <= src_complete && (!extra || extra(n));
    if (!ok) break;
    thr = n;
  }
  return thr;
}

/// Number of leading groups lying entirely inside the first `complete` fine blocks and of full size.
inline std::size_t complete_groups(const std::vector<std::pair<std::size_t, std::size_t>>& groups,
                                   const std::vector<std::size_t>& wanted_sizes, std::size_t complete) {
  std::size_t c = 0;
  while (c < groups.size() && groups[c].second <= complete && groups[c].second - groups[c].first == wanted_sizes[c]) ++c;
  return c;
}

/// Leftmost splitting node extending `stem` with length >= need (preorder, 0 before 1).
inline std::optional<Node> leftmost_split(const PrefixTree& T, const Node& stem, std::size_t need) {
  if (!T.contains(stem)) return std::nullopt;
  if (stem.length >= T.horizon()) return std::nullopt;
  if (stem.length >= need && T.splits(stem)) return stem;
  for (bool bit : {false, true})
    if (auto r = leftmost_split(T, stem.child(bit), need)) return r;
  return std::nullopt;
}

/// Leftmost extension of `stem` inside T to the given length.
inline Node leftmost_extension(const PrefixTree& T, Node stem, std::size_t length) {
  while (stem.length < length) stem = T.contains(stem.child(false)) ? stem.child(false) : stem.child(true);
  return stem;
}

/// Prunes T so that a node deciding coordinate d splits only while fewer than
/// budget[d] splits lie on its stem. Uniform pruning decides per level.
inline PrefixTree prune_to_budget(const PrefixTree& T, const std::vector<std::size_t>& budget, bool uniform) {
  const auto h = T.horizon();
  std::vector<std::uint64_t> leaves;
  if (uniform) {
    std::vector<Node> frontier{Node{}};
    std::size_t count = 0;
    for (std::size_t d = 0; d < h; ++d) {
      const bool split = T.splits(frontier.front()) && count < budget[d];
      std::vector<Node> next;
      for (const auto& n : frontier) {
        if (split) {
          next.push_back(n.child(false));
          next.push_back(n.child(true));
        } else {
          next.push_back(T.contains(n.child(false)) ? n.child(false) : n.child(true));
        }
      }
      if (split) ++count;
      frontier = std::move(next);
    }
    for (const auto& n : frontier) leaves.push_back(n.bits);
  } else {
    std::function<void(const Node&, std::size_t)> walk = [&](const Node& n, std::size_t count) {
      if (n.length == h) {
        leaves.push_back(n.bits);
        return;
      }
      if (T.splits(n) && count < budget[n.length]) {
        walk(n.child(false), count + 1);
        walk(n.child(true), count + 1);
      } else {
        walk(T.contains(n.child(false)) ? n.child(false) : n.child(true), count);
      }
    };
    walk(Node{}, 0);
  }
  return PrefixTree(h, std::move(leaves));
}

inline void require_kind(const PrefixTree& T, bool uniform) {
  const auto f = classify(T);
  if (!f.perfect) throw Error(ErrorKind::NotPerfect, "input tree is not perfect at its horizon");
  if (uniform && !f.uniformly_perfect) throw Error(ErrorKind::NotPerfect, "input tree is not uniformly perfect at its horizon");
}

/// Super-block group sizes 1, 4, 64, ... i.e. (2^n)^(n+1), truncated to `blocks`.
inline std::vector<std::size_t> exponential_groups(std::size_t blocks, std::vector<std::size_t>& wanted) {
  std::vector<std::size_t> sizes;
  std::size_t used = 0;
  for (std::size_t n = 0; used < blocks; ++n) {
    const std::size_t want = n * (n + 1) >= 63 ? blocks + 1 : std::size_t{1} << (n * (n + 1));
    wanted.push_back(want);
    sizes.push_back(std::min(want, blocks - used));
    used += sizes.back();
  }
  return sizes;
}

inline std::vector<std::pair<std::size_t, std::size_t>> group_ranges(const std::vector<std::size_t>& sizes) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t at = 0;
  for (auto s : sizes) {
    out.emplace_back(at, at + s);
    at += s;
  }
  return out;
}

inline Rational pow2_rational(std::size_t n) { return pow2(n); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Category
// ---------------------------------------------------------------------------

/// Silver tree against a meager cover. Blocks are paired, T' keeps at most one
/// free coordinate per pair, and the fold-b witness is centred at x_F + b*x_T
/// on the paired partition: the pair half without a free coordinate still
/// differs from x_F there, and the tree sum is constant on it.
[[nodiscard]] inline ShrinkResult shrink_silver_meager(const MeagerCover& F, const SilverTree& T, const ConstructionOptions& opt = {}) {
  detail::require_horizon(F.horizon(), T.horizon(), "meager cover and Silver tree");
  if (T.free.empty()) throw Error(ErrorKind::Degenerate, "Silver tree has no free coordinates below the horizon");

  const auto sizes = group_sizes_of(F.partition.size(), 2);
  const auto coarse = coarsen(F.partition, sizes);
  const auto groups = detail::group_ranges(sizes);
  const std::vector<std::size_t> wanted(sizes.size(), 2);
  const auto complete = detail::complete_groups(groups, wanted, F.complete);
  const auto threshold = detail::tail_threshold(groups, complete, F.threshold, F.complete);

  const auto free_out = detail::least_per_block(T.free, coarse);
  ShrinkResult r;
  r.op = "shrink_silver_meager";
  r.tree_out = SilverTree(T.x, free_out);
  r.tree_in = to_prefix(T);
  r.promised = "silver";
  for (unsigned b = 0; b <= opt.max_fold; ++b) {
    const Point center = (b % 2) ? F.center + T.x : F.center;
    r.witnesses.push_back(Witness{"meager", F, MeagerCover(center, coarse, threshold, complete), b, std::nullopt});
  }
  r.provenance = {{"free_out", detail::join(free_out.members())},
                  {"coarse_blocks", std::to_string(coarse.size())},
                  {"complete", std::to_string(complete)},
                  {"threshold", std::to_string(threshold)}};
  return r;
}

/// (Uniformly) perfect tree against a meager cover. Original blocks are grouped
/// into super-blocks of 1, 4, 64, ... blocks; splitting nodes sigma'_tau are
/// placed so that every branch agrees with some sigma'_tau (|tau| = n) on
/// super-block n, and inside super-block n each block carries x_F plus the sum
/// of one tuple of at most n such nodes.
[[nodiscard]] inline ShrinkResult shrink_perfect_meager(const MeagerCover& F, const PrefixTree& T, const ConstructionOptions& opt = {}) {
  detail::require_horizon(F.horizon(), T.horizon(), "meager cover and tree");
  detail::require_kind(T, opt.uniform);
  const auto h = T.horizon();

  std::vector<std::size_t> wanted;
  const auto sizes = detail::exponential_groups(F.partition.size(), wanted);
  const auto groups = detail::group_ranges(sizes);
  const auto full = detail::complete_groups(groups, wanted, F.partition.size());
  auto super_hi = [&](std::size_t n) { return F.partition[groups[n].second - 1].hi; };

  // sigma'_tau, level by level; level n is indexed by tau in 2^n read as an integer.
  std::vector<std::vector<Node>> levels;
  auto split_level_at_least = [&](std::size_t need) -> std::optional<std::size_t> {
    for (std::size_t d = need; d < h; ++d) {
      auto lvl = T.level(d);
      if (!lvl.empty() && T.splits(lvl.front())) return d;
    }
    return std::nullopt;
  };

  if (full == 0) throw Error(ErrorKind::HorizonTooSmall, "no complete super-block at this horizon");
  if (opt.uniform) {
    auto L = split_level_at_least(super_hi(0));
    if (!L) throw Error(ErrorKind::HorizonTooSmall, "no splitting level past the first super-block");
    levels.push_back({detail::leftmost_extension(T, Node{}, *L)});
  } else {
    auto s = detail::leftmost_split(T, Node{}, super_hi(0));
    if (!s) throw Error(ErrorKind::HorizonTooSmall, "no splitting node past the first super-block");
    levels.push_back({*s});
  }
  for (std::size_t n = 1; n < full; ++n) {
    std::vector<Node> next;
    bool ok = true;
    if (opt.uniform) {
      auto L = split_level_at_least(std::max(super_hi(n), levels.back().front().length + 1));
      ok = L.has_value();
      for (std::size_t t = 0; ok && t < levels.back().size(); ++t)
        for (bool bit : {false, true}) next.push_back(detail::leftmost_extension(T, levels.back()[t].child(bit), *L));
    } else {
      for (std::size_t t = 0; ok && t < levels.back().size(); ++t)
        for (bool bit : {false, true}) {
          auto s = detail::leftmost_split(T, levels.back()[t].child(bit), super_hi(n));
          if (!s) {
            ok = false;
            break;
          }
          next.push_back(*s);
        }
    }
    if (!ok) break;
    levels.push_back(std::move(next));
  }
  const std::size_t placed = levels.size();

  // T': stems up to the deepest sigma', then everything of T below them.
  std::vector<std::uint64_t> leaves;
  for (const auto& s : levels.back()) {
    auto [a, b] = T.leaf_range(s);
    leaves.insert(leaves.end(), T.leaves().begin() + static_cast<long>(a), T.leaves().begin() + static_cast<long>(b));
  }
  PrefixTree out(h, std::move(leaves));

  // x_H block by block.
  std::uint64_t xh = F.center.bits;
  for (std::size_t n = 0; n < placed; ++n) {
    const auto& nodes = levels[n];  // 2^n entries
    std::vector<std::vector<std::size_t>> tuples{{}};
    for (std::size_t len = 1; len <= n && tuples.size() < sizes[n]; ++len) {
      std::vector<std::size_t> idx(len, 0);
      while (tuples.size() < sizes[n]) {
        tuples.push_back(idx);
        std::size_t k = len;
        while (k > 0 && ++idx[k - 1] == nodes.size()) idx[--k] = 0;
        if (k == 0) break;
      }
    }
    for (auto i = groups[n].first; i < groups[n].second; ++i) {
      const auto& blk = F.partition[i];
      const auto& tup = tuples[i - groups[n].first < tuples.size() ? i - groups[n].first : 0];
      std::uint64_t add = 0;
      for (auto t : tup) add ^= (nodes[t].bits >> (nodes[t].length - blk.hi)) & low_mask(blk.length());
      xh ^= place(add, h, blk);
    }
  }

  std::vector<std::size_t> witness_sizes(sizes.begin(), sizes.begin() + static_cast<long>(placed));
  const std::size_t used = groups[placed - 1].second;
  if (used < F.partition.size()) witness_sizes.push_back(F.partition.size() - used);
  const auto witness_partition = coarsen(F.partition, witness_sizes);
  const auto witness_groups = detail::group_ranges(witness_sizes);

  ShrinkResult r;
  r.op = "shrink_perfect_meager";
  r.tree_out = out;
  r.tree_in = T;
  r.promised = opt.uniform ? "uniformly_perfect" : "perfect";
  for (unsigned b = 0; b <= opt.max_fold; ++b) {
    const auto thr = detail::tail_threshold(witness_groups, placed, F.threshold, F.complete,
                                            [b](std::size_t n) { return n >= b; });
    r.witnesses.push_back(Witness{"meager", F, MeagerCover(Point(h, xh), witness_partition, thr, placed), b, std::nullopt});
  }
  std::vector<std::size_t> split_lengths;
  for (const auto& lvl : levels) split_lengths.push_back(lvl.front().length);
  r.provenance = {{"levels_placed", std::to_string(placed)},
                  {"super_block_sizes", detail::join(sizes)},
                  {"first_split_lengths", detail::join(split_lengths)}};
  if (placed < sizes.size())
    r.warnings.push_back("super-blocks from index " + std::to_string(placed) + " are incomplete at this horizon and excluded");
  return r;
}

/// Splitting tree for a meager cover: super-block n >= 1 is made of n original
/// blocks and every branch carries exactly one 1 in each super-block, so b
/// branches touch at most b of its original blocks.
[[nodiscard]] inline ShrinkResult build_splitting_meager(const MeagerCover& F, const ConstructionOptions& opt = {}) {
  const auto h = F.horizon();
  const auto nb = F.partition.size();
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> wanted;
  for (std::size_t n = 0, used = 0; used < nb; ++n) {
    const std::size_t want = std::max<std::size_t>(n, 1);
    wanted.push_back(want);
    sizes.push_back(std::min(want, nb - used));
    used += sizes.back();
  }
  const auto super = coarsen(F.partition, sizes);
  const auto groups = detail::group_ranges(sizes);
  const auto complete = detail::complete_groups(groups, wanted, nb);
  if (complete == 0) throw Error(ErrorKind::HorizonTooSmall, "no complete super-block");

  std::vector<PatternSet> segments;
  for (std::size_t n = 0; n < super.size(); ++n) {
    const auto& blk = super[n];
    std::vector<std::uint64_t> words;
    for (std::size_t i = 0; i < blk.length(); ++i) words.push_back(std::uint64_t{1} << i);
    if (n >= complete) words.push_back(0);
    segments.emplace_back(blk, std::move(words));
  }
  PrefixTree tree(h, block_product(segments).values());

  ShrinkResult r;
  r.op = "build_splitting_meager";
  r.tree_out = tree;
  r.promised = "splitting";
  for (unsigned b = 0; b <= opt.max_fold; ++b) {
    const auto thr = detail::tail_threshold(groups, complete, F.threshold, F.complete,
                                            [&](std::size_t n) { return sizes[n] > b; });
    r.witnesses.push_back(Witness{"meager", F, MeagerCover(F.center, super, thr, complete), b, std::nullopt});
  }
  r.provenance = {{"super_block_sizes", detail::join(sizes)}, {"complete", std::to_string(complete)}};
  return r;
}

// ---------------------------------------------------------------------------
// Measure
// ---------------------------------------------------------------------------

/// Silver tree against a small cover: at most one free coordinate per block,
/// J''_n = ((J_n + x_T) u J_n) + {0, e_n}.
[[nodiscard]] inline ShrinkResult shrink_silver_small(const SmallCover& F, const SilverTree& T, const ConstructionOptions& = {}) {
  detail::require_horizon(F.horizon(), T.horizon(), "small cover and Silver tree");
  const auto h = T.horizon();
  const auto free_out = detail::least_per_block(T.free, F.partition);
  const Point chi = indicator(free_out, h);

  std::vector<PatternSet> J2;
  for (std::size_t n = 0; n < F.partition.size(); ++n) {
    const auto& blk = F.partition[n];
    const auto& J = F.patterns[n];
    auto J1 = pattern_union(pattern_translate(J, restrict(T.x, blk)), J);
    const std::vector<std::uint64_t> shifts{0, restrict(chi, blk).bits};
    J2.push_back(pattern_sum(J1, PatternSet(blk, shifts)));
  }

  ShrinkResult r;
  r.op = "shrink_silver_small";
  r.tree_out = SilverTree(T.x, free_out);
  r.tree_in = to_prefix(T);
  r.promised = "silver";
  r.witnesses.push_back(Witness{"small", F, SmallCover(F.partition, std::move(J2)), std::nullopt, small_mass(F) * 4});
  r.provenance = {{"free_out", detail::join(free_out.members())}};
  if (free_out.empty()) r.warnings.push_back("Silver tree degenerate at this horizon: no free coordinate kept");
  return r;
}

[[nodiscard]] inline bool is_empty_cover(const SmallCover& C) {
  return std::all_of(C.patterns.begin(), C.patterns.end(), [](const PatternSet& J) { return J.empty(); });
}

namespace detail {

inline ShrinkResult compose_null(const std::string& op, ShrinkResult first, const SmallCover& second_cover,
                                 const std::function<ShrinkResult(const SmallCover&, const AnyTree&)>& step) {
  ShrinkResult r;
  r.op = op;
  r.tree_in = first.tree_in;
  r.promised = first.promised;
  for (auto& w : first.witnesses) w.label = w.label + "/first";
  if (is_empty_cover(second_cover)) {
    r.tree_out = first.tree_out;
    r.witnesses = std::move(first.witnesses);
    r.witnesses.push_back(Witness{"small/second", second_cover, second_cover, std::nullopt, Rational(0)});
    r.warnings.push_back("second small cover is empty; second shrink skipped");
  } else {
    auto second = step(second_cover, first.tree_out);
    r.tree_out = second.tree_out;
    r.witnesses = std::move(first.witnesses);
    for (auto& w : second.witnesses) {
      w.label = w.label + "/second";
      r.witnesses.push_back(std::move(w));
    }
    for (auto& p : second.provenance) r.provenance.emplace_back("second." + p.first, p.second);
    r.warnings.insert(r.warnings.end(), second.warnings.begin(), second.warnings.end());
  }
  for (auto& p : first.provenance) r.provenance.emplace_back("first." + p.first, p.second);
  r.warnings.insert(r.warnings.end(), first.warnings.begin(), first.warnings.end());
  return r;
}

}  // namespace detail

[[nodiscard]] inline ShrinkResult shrink_silver_null(const NullCover& F, const SilverTree& T, const ConstructionOptions& opt = {}) {
  return detail::compose_null("shrink_silver_null", shrink_silver_small(F.first, T, opt), F.second,
                              [&](const SmallCover& c, const AnyTree& t) { return shrink_silver_small(c, std::get<SilverTree>(t), opt); });
}

/// (Uniformly) perfect tree against a small cover. The split budget on block n
/// is k_n from the exponent-sequence lemma applied to a_n = |J_n| / 2^|I_n|;
/// the fold-b witness is J_n + b-fold sums of T' restricted to I_n.
[[nodiscard]] inline ShrinkResult shrink_perfect_small(const SmallCover& F, const PrefixTree& T, const ConstructionOptions& opt = {}) {
  detail::require_horizon(F.horizon(), T.horizon(), "small cover and tree");
  detail::require_kind(T, opt.uniform);
  const auto h = T.horizon();
  const auto nb = F.partition.size();

  std::vector<Rational> a;
  std::vector<std::size_t> positive;
  for (std::size_t n = 0; n < nb; ++n) {
    auto d = density(F.patterns[n]);
    if (d > 0) {
      a.push_back(d);
      positive.push_back(n);
    }
  }
  ShrinkResult r;
  std::vector<std::size_t> k(nb, 0);
  std::optional<KSeq> K;
  if (!a.empty()) {
    K = build_kseq(a);
    std::size_t current = 0;
    for (std::size_t n = 0, p = 0; n < nb; ++n) {
      if (p < positive.size() && positive[p] == n) current = K->k[p++];
      k[n] = current;  // zero-density blocks inherit the previous budget
    }
  } else {
    r.warnings.push_back("small cover is empty; split budget is zero everywhere");
  }

  std::vector<std::size_t> budget(h);
  for (std::size_t d = 0; d < h; ++d) budget[d] = k[F.partition.block_of(d)];
  auto out = detail::prune_to_budget(T, budget, opt.uniform);

  const auto flags = classify(out);
  if (!(opt.uniform ? flags.uniformly_perfect : flags.perfect)) {
    std::size_t deepest = 0;
    for (std::size_t d = 0; d < h; ++d)
      for (const auto& n : out.level(d))
        if (out.splits(n)) deepest = d + 1;
    r.warnings.push_back("split budget leaves the tree non-perfect at this horizon; splits exhaust at depth " + std::to_string(deepest));
  }

  r.op = "shrink_perfect_small";
  r.tree_out = out;
  r.tree_in = T;
  r.promised = opt.uniform ? "uniformly_perfect" : "perfect";
  const auto mass = small_mass(F);
  std::vector<PatternSet> restrictions;
  for (const auto& blk : F.partition) restrictions.push_back(tree_restrict(out, blk));
  for (unsigned b = 0; b <= opt.max_fold; ++b) {
    std::vector<PatternSet> Jb;
    for (std::size_t n = 0; n < nb; ++n) Jb.push_back(pattern_sum(F.patterns[n], pattern_fold(restrictions[n], b)));
    r.witnesses.push_back(Witness{"small", F, SmallCover(F.partition, std::move(Jb)), b, mass * pow2(std::size_t{b} * b)});
    if (K && b >= 1) {
      auto chk = check_kseq_bound(*K, b);
      r.provenance.emplace_back("kseq_bound_b" + std::to_string(b), to_string(chk.lhs) + " < " + to_string(chk.rhs) + (chk.pass ? " ok" : " FAIL"));
    }
  }
  r.provenance.emplace_back("k", detail::join(k));
  return r;
}

[[nodiscard]] inline ShrinkResult shrink_perfect_null(const NullCover& F, const PrefixTree& T, const ConstructionOptions& opt = {}) {
  return detail::compose_null("shrink_perfect_null", shrink_perfect_small(F.first, T, opt), F.second,
                              [&](const SmallCover& c, const AnyTree& t) { return shrink_perfect_small(c, as_prefix(t), opt); });
}

/// Splitting tree for a null cover given as two small covers whose interior
/// block boundaries strictly alternate. K is the common refinement; the tree
/// is constant on every K-block off a sparse coordinate set A.
[[nodiscard]] inline ShrinkResult build_splitting_null(const NullCover& F, const ConstructionOptions& = {}) {
  const auto h = F.horizon();
  const auto& P1 = F.first.partition;
  const auto& P2 = F.second.partition;

  std::vector<std::pair<std::size_t, int>> cuts;
  for (std::size_t i = 1; i < P1.size(); ++i) cuts.emplace_back(P1[i].lo, 1);
  for (std::size_t i = 1; i < P2.size(); ++i) cuts.emplace_back(P2[i].lo, 2);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i].first == cuts[i + 1].first)
      throw Error(ErrorKind::Misaligned, "both partitions cut at coordinate " + std::to_string(cuts[i].first));
    if (cuts[i].second == cuts[i + 1].second)
      throw Error(ErrorKind::Misaligned, "partition boundaries do not interleave near coordinate " + std::to_string(cuts[i + 1].first));
  }
  std::vector<Block> kblocks;
  std::size_t at = 0;
  for (const auto& c : cuts) {
    kblocks.emplace_back(at, c.first);
    at = c.first;
  }
  kblocks.emplace_back(at, h);
  const Partition K(std::move(kblocks));

  std::vector<std::size_t> a_members;
  {
    std::vector<bool> used1(P1.size(), false);
    std::vector<bool> used2(P2.size(), false);
    for (std::size_t i = 0; i < h; ++i) {
      auto b1 = P1.block_of(i);
      auto b2 = P2.block_of(i);
      if (!used1[b1] && !used2[b2]) {
        used1[b1] = used2[b2] = true;
        a_members.push_back(i);
      }
    }
  }
  const IndexSet A(a_members);
  const Point chi = indicator(A, h);

  // Per K-block: constant c off A, free on A.
  std::vector<PatternSet> segs;
  for (const auto& kb : K) {
    const auto a_mask = restrict(chi, kb).bits;
    const auto off = low_mask(kb.length()) & ~a_mask;
    std::vector<std::uint64_t> words;
    for (std::uint64_t c : {std::uint64_t{0}, off})
      for (std::uint64_t s : {std::uint64_t{0}, a_mask}) words.push_back(c | s);
    segs.emplace_back(kb, std::move(words));
  }
  PrefixTree tree(h, block_product(segs).values());

  auto witness_for = [&](const SmallCover& C) {
    const auto groups = alignment(K, C.partition);
    std::vector<PatternSet> J;
    for (std::size_t n = 0; n < C.partition.size(); ++n) {
      const auto& blk = C.partition[n];
      std::vector<PatternSet> consts;
      for (auto i = groups[n].first; i < groups[n].second; ++i)
        consts.emplace_back(K[i], std::vector<std::uint64_t>{0, low_mask(K[i].length())});
      const std::vector<std::uint64_t> shifts{0, restrict(chi, blk).bits};
      J.push_back(pattern_sum(pattern_sum(C.patterns[n], block_product(consts)), PatternSet(blk, shifts)));
    }
    return SmallCover(C.partition, std::move(J));
  };

  ShrinkResult r;
  r.op = "build_splitting_null";
  r.tree_out = tree;
  r.promised = "splitting";
  r.witnesses.push_back(Witness{"small/first", F.first, witness_for(F.first), std::nullopt, small_mass(F.first) * 8});
  r.witnesses.push_back(Witness{"small/second", F.second, witness_for(F.second), std::nullopt, small_mass(F.second) * 8});
  std::vector<std::size_t> kl;
  for (const auto& kb : K) kl.push_back(kb.lo);
  r.provenance = {{"refinement_starts", detail::join(kl)}, {"A", detail::join(A.members())}};
  return r;
}

// ---------------------------------------------------------------------------
// Meager and null together
// ---------------------------------------------------------------------------

enum class TreeKind { Silver, Perfect, UniformlyPerfect };

[[nodiscard]] inline ShrinkResult shrink_mn(const MeagerCover& Fm, const NullCover& Fn, const AnyTree& T, TreeKind kind,
                                            ConstructionOptions opt = {}) {
  ShrinkResult first;
  ShrinkResult second;
  if (kind == TreeKind::Silver) {
    const auto* s = std::get_if<SilverTree>(&T);
    if (!s) throw Error(ErrorKind::InvalidArgument, "Silver kind requires Silver tree parameters");
    first = shrink_silver_meager(Fm, *s, opt);
    second = shrink_silver_null(Fn, std::get<SilverTree>(first.tree_out), opt);
  } else {
    opt.uniform = kind == TreeKind::UniformlyPerfect;
    first = shrink_perfect_meager(Fm, as_prefix(T), opt);
    second = shrink_perfect_null(Fn, first.prefix_out(), opt);
  }
  ShrinkResult r;
  r.op = "shrink_mn";
  r.tree_out = second.tree_out;
  r.tree_in = as_prefix(T);
  r.promised = first.promised;
  r.witnesses = std::move(first.witnesses);
  for (auto& w : second.witnesses) r.witnesses.push_back(std::move(w));
  for (auto& p : first.provenance) r.provenance.emplace_back("meager." + p.first, p.second);
  for (auto& p : second.provenance) r.provenance.emplace_back("null." + p.first, p.second);
  r.warnings = first.warnings;
  r.warnings.insert(r.warnings.end(), second.warnings.begin(), second.warnings.end());
  return r;
}

// ---------------------------------------------------------------------------
// Closed measure zero
// ---------------------------------------------------------------------------

/// Turns a chain of cylinder covers into a partition-and-patterns cover with
/// block densities <= 1/2. Stage n+1 is saturated over the coordinates already
/// consumed by earlier blocks before its own new coordinates become I_{n+1}.
[[nodiscard]] inline ECover simplify_e_cover(const ClosedNullChain& chain) {
  const auto& st = chain.stages;
  if (st.empty()) throw Error(ErrorKind::InvalidArgument, "empty chain");
  for (std::size_t k = 0; k + 1 < st.size(); ++k) {
    for (const auto& a : st[k]) {
      const bool meets = std::any_of(st[k + 1].begin(), st[k + 1].end(), [&](const Node& b) {
        const auto m = std::min(a.length, b.length);
        return a.prefix(m) == b.prefix(m);
      });
      if (!meets)
        throw Error(ErrorKind::NotAscending, "cylinder '" + a.str() + "' of stage " + std::to_string(k) + " misses stage " + std::to_string(k + 1));
    }
  }

  std::vector<Block> blocks;
  std::vector<PatternSet> patterns;
  std::size_t consumed = 0;
  for (std::size_t k = 0; k < st.size(); ++k) {
    const auto depth = chain.depth(k);
    if (depth <= consumed)
      throw Error(ErrorKind::InsufficientNullity, "stage " + std::to_string(k) + " adds no coordinates; saturated measure is 1");
    if (depth > kMaxHorizon) throw Error(ErrorKind::OutOfRange, "stage depth beyond supported horizon");
    const Block blk(consumed, depth);
    // Project cylinders onto [consumed, |sigma|) and extend to the whole block.
    std::vector<std::uint64_t> words;
    for (const auto& n : st[k]) {
      if (n.length <= consumed)
        throw Error(ErrorKind::InsufficientNullity, "stage " + std::to_string(k) + " cylinder '" + n.str() + "' lies within consumed coordinates");
      const auto plen = n.length - consumed;
      const auto proj = n.bits & low_mask(plen);
      const auto free = depth - n.length;
      if (free > 24) throw Error(ErrorKind::BudgetExceeded, "cylinder extension on stage " + std::to_string(k));
      for (std::uint64_t s = 0; s < (std::uint64_t{1} << free); ++s) words.push_back((proj << free) | s);
    }
    PatternSet J(blk, std::move(words));
    if (!(density(J) < Rational(1, 2)))
      throw Error(ErrorKind::InsufficientNullity, "stage " + std::to_string(k) + " saturated measure " + to_string(density(J)) + " is not below 1/2");
    blocks.push_back(blk);
    patterns.push_back(std::move(J));
    consumed = depth;
  }
  return ECover(Partition(std::move(blocks)), std::move(patterns), 0);
}

/// Silver tree against an E cover: blocks in triples, one free coordinate per
/// triple, J'_n = (J_3n x J_3n+1 x J_3n+2) + {0, x_T, chi, x_T + chi}.
[[nodiscard]] inline ShrinkResult shrink_silver_e(const ECover& E, const SilverTree& T, const ConstructionOptions& = {}) {
  detail::require_horizon(E.horizon(), T.horizon(), "E cover and Silver tree");
  const auto h = T.horizon();
  const auto sizes = group_sizes_of(E.partition.size(), 3);
  const auto coarse = coarsen(E.partition, sizes);
  const auto groups = detail::group_ranges(sizes);
  const std::vector<std::size_t> wanted(sizes.size(), 3);
  const auto complete = detail::complete_groups(groups, wanted, E.complete);
  const std::size_t threshold = std::min(complete, (E.threshold + 2) / 3);

  const auto free_out = detail::least_per_block(T.free, coarse);
  const Point chi = indicator(free_out, h);
  std::vector<PatternSet> J;
  for (std::size_t n = 0; n < coarse.size(); ++n) {
    const auto& blk = coarse[n];
    const auto prod = block_product(std::span(E.patterns).subspan(groups[n].first, sizes[n]));
    const auto x = restrict(T.x, blk).bits;
    const auto c = restrict(chi, blk).bits;
    J.push_back(pattern_sum(prod, PatternSet(blk, std::vector<std::uint64_t>{0, x, c, x ^ c})));
  }

  ShrinkResult r;
  r.op = "shrink_silver_e";
  r.tree_out = SilverTree(T.x, free_out);
  r.tree_in = to_prefix(T);
  r.promised = "silver";
  r.witnesses.push_back(Witness{"e", E, ECover(coarse, std::move(J), threshold, complete), std::nullopt, Rational(1, 2)});
  r.provenance = {{"free_out", detail::join(free_out.members())}, {"threshold", std::to_string(threshold)},
                  {"complete", std::to_string(complete)}};
  if (complete < coarse.size()) r.warnings.push_back("trailing incomplete triple excluded from the witness");
  return r;
}

/// (Uniformly) perfect tree against an E cover: super-blocks of 1, 4, 64, ...
/// blocks, at most n splits on any stem through super-block n, and
/// J'_n = product of the group's J's + union over j <= n of j-fold sums.
[[nodiscard]] inline ShrinkResult shrink_perfect_e(const ECover& E, const PrefixTree& T, const ConstructionOptions& opt = {}) {
  detail::require_horizon(E.horizon(), T.horizon(), "E cover and tree");
  detail::require_kind(T, opt.uniform);
  const auto h = T.horizon();
  std::vector<std::size_t> wanted;
  const auto sizes = detail::exponential_groups(E.partition.size(), wanted);
  const auto groups = detail::group_ranges(sizes);
  const auto complete = detail::complete_groups(groups, wanted, E.complete);
  if (complete == 0) throw Error(ErrorKind::HorizonTooSmall, "first super-block is not complete");
  const auto coarse = coarsen(E.partition, sizes);

  std::vector<std::size_t> budget(h);
  for (std::size_t d = 0; d < h; ++d) budget[d] = coarse.block_of(d);
  auto out = detail::prune_to_budget(T, budget, opt.uniform);

  std::vector<PatternSet> J;
  for (std::size_t n = 0; n < coarse.size(); ++n) {
    const auto& blk = coarse[n];
    const auto prod = block_product(std::span(E.patterns).subspan(groups[n].first, sizes[n]));
    const auto R = tree_restrict(out, blk);
    PatternSet folds = PatternSet::singleton(Word::zero(blk));
    PatternSet acc = folds;
    for (std::size_t j = 1; j <= n; ++j) {
      acc = pattern_sum(acc, R);
      folds = pattern_union(folds, acc);
    }
    J.push_back(pattern_sum(prod, folds));
  }

  ShrinkResult r;
  r.op = "shrink_perfect_e";
  r.tree_out = out;
  r.tree_in = T;
  r.promised = opt.uniform ? "uniformly_perfect" : "perfect";
  const ECover base(coarse, J, 0, complete);
  for (unsigned b = 0; b <= opt.max_fold; ++b) {
    const auto thr = detail::tail_threshold(groups, complete, E.threshold, E.complete, [b](std::size_t n) { return n >= b; });
    ECover w = base;
    w.threshold = thr;
    r.witnesses.push_back(Witness{"e", E, std::move(w), b, Rational(1, 2)});
  }
  r.provenance = {{"super_block_sizes", detail::join(sizes)}, {"complete", std::to_string(complete)}};
  if (complete < coarse.size()) r.warnings.push_back("trailing incomplete super-block excluded from the witness");
  if (!classify(out).perfect) r.warnings.push_back("split budget leaves the tree non-perfect at this horizon");
  return r;
}

/// Splitting tree for an E cover: blocks in triples, one free coordinate (the
/// first of the triple) and a constant value on the rest of each triple.
[[nodiscard]] inline ShrinkResult build_splitting_e(const ECover& E, const ConstructionOptions& = {}) {
  const auto h = E.horizon();
  const auto sizes = group_sizes_of(E.partition.size(), 3);
  const auto coarse = coarsen(E.partition, sizes);
  const auto groups = detail::group_ranges(sizes);
  const std::vector<std::size_t> wanted(sizes.size(), 3);
  const auto complete = detail::complete_groups(groups, wanted, E.complete);
  if (complete == 0) throw Error(ErrorKind::HorizonTooSmall, "no complete triple of blocks");
  const std::size_t threshold = std::min(complete, (E.threshold + 2) / 3);

  std::vector<std::size_t> a_default;
  for (const auto& b : E.partition) a_default.push_back(b.lo);
  const auto A = detail::least_per_block(IndexSet(a_default), coarse);
  const Point chi = indicator(A, h);

  std::vector<PatternSet> segs;
  std::vector<PatternSet> J;
  for (std::size_t n = 0; n < coarse.size(); ++n) {
    const auto& blk = coarse[n];
    const auto c = restrict(chi, blk).bits;
    const auto one = low_mask(blk.length());
    const std::vector<std::uint64_t> shapes{0, one, c, one ^ c};
    segs.emplace_back(blk, shapes);
    const auto prod = block_product(std::span(E.patterns).subspan(groups[n].first, sizes[n]));
    J.push_back(pattern_sum(prod, PatternSet(blk, shapes)));
  }

  ShrinkResult r;
  r.op = "build_splitting_e";
  r.tree_out = PrefixTree(h, block_product(segs).values());
  r.promised = "splitting";
  r.witnesses.push_back(Witness{"e", E, ECover(coarse, std::move(J), threshold, complete), std::nullopt, Rational(1, 2)});
  r.provenance = {{"A", detail::join(A.members())}, {"complete", std::to_string(complete)}};
  return r;
}

}  // namespace cantor
