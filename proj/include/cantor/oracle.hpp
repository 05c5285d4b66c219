#pragma once

// Brute-force verification. Two independent routes:
//   * blockwise: per witness block, (source patterns) + b-fold sums of the
//     tree's restriction to the block must land in the witness patterns;
//   * exhaustive: enumerate every point of the horizon, keep the source
//     members, add every element of the b-fold body sum, test membership in
//     the witness cover pointwise.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cantor/bits.hpp"
#include "cantor/covers.hpp"
#include "cantor/trees.hpp"

namespace cantor {

inline constexpr std::size_t kDefaultBudget = std::size_t{1} << 22;
inline constexpr std::size_t kDefaultHorizonCap = 14;

/// All words on `block` except the listed ones.
struct Excluding {
  Block block;
  std::vector<std::uint64_t> words;  // sorted
};

/// Words that differ from each listed sub-word on that sub-word's block.
struct DifferingOn {
  Block block;
  std::vector<Word> sub_words;
};

using BlockSet = std::variant<PatternSet, Excluding, DifferingOn>;

[[nodiscard]] inline Block block_of(const BlockSet& s) {
  return std::visit(
      [](const auto& v) -> Block {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, PatternSet>) return v.block();
        else return v.block;
      },
      s);
}

[[nodiscard]] inline bool contains(const BlockSet& s, std::uint64_t w) {
  if (const auto* p = std::get_if<PatternSet>(&s)) return p->contains(w);
  if (const auto* e = std::get_if<Excluding>(&s)) return !std::binary_search(e->words.begin(), e->words.end(), w);
  const auto& d = std::get<DifferingOn>(s);
  const Word word(d.block, w);
  for (const auto& sub : d.sub_words)
    if (restrict(word, sub.block) == sub) return false;
  return true;
}

[[nodiscard]] inline BigInt cardinality(const BlockSet& s) {
  if (const auto* p = std::get_if<PatternSet>(&s)) return BigInt(p->size());
  if (const auto* e = std::get_if<Excluding>(&s)) return (BigInt(1) << e->block.length()) - e->words.size();
  const auto& d = std::get<DifferingOn>(s);
  std::size_t constrained = 0;
  BigInt c(1);
  for (const auto& sub : d.sub_words) {
    c *= (BigInt(1) << sub.block.length()) - 1;
    constrained += sub.block.length();
  }
  return c << (d.block.length() - constrained);
}

/// Explicit listing of a block set; throws if it exceeds `budget` words.
[[nodiscard]] inline PatternSet enumerate(const BlockSet& s, std::size_t budget = kDefaultBudget) {
  if (const auto* p = std::get_if<PatternSet>(&s)) return *p;
  if (cardinality(s) > budget) throw Error(ErrorKind::BudgetExceeded, "enumerating block set on " + to_string(block_of(s)));
  const auto b = block_of(s);
  std::vector<std::uint64_t> out;
  for (std::uint64_t w = 0; w <= low_mask(b.length()); ++w)
    if (contains(s, w)) out.push_back(w);
  return PatternSet(b, std::move(out));
}

/// Drops one word from the allowed set.
inline void remove_word(BlockSet& s, std::uint64_t w) {
  if (auto* p = std::get_if<PatternSet>(&s)) {
    p->erase(w);
  } else if (auto* e = std::get_if<Excluding>(&s)) {
    auto it = std::lower_bound(e->words.begin(), e->words.end(), w);
    if (it == e->words.end() || *it != w) e->words.insert(it, w);
  } else {
    throw Error(ErrorKind::InvalidArgument, "cannot remove a word from a sub-block constraint");
  }
}

/// Groups of consecutive fine blocks making up each coarse block.
[[nodiscard]] inline std::vector<std::pair<std::size_t, std::size_t>> alignment(const Partition& fine, const Partition& coarse) {
  if (fine.horizon() != coarse.horizon()) throw Error(ErrorKind::HorizonMismatch, "aligning partitions of different horizons");
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t at = 0;
  for (const auto& cb : coarse) {
    const auto first = at;
    if (at >= fine.size() || fine[at].lo != cb.lo) throw Error(ErrorKind::Misaligned, "coarse block " + to_string(cb) + " does not start on a fine boundary");
    while (at < fine.size() && fine[at].hi <= cb.hi) ++at;
    if (fine[at - 1].hi != cb.hi) throw Error(ErrorKind::Misaligned, "coarse block " + to_string(cb) + " does not end on a fine boundary");
    groups.emplace_back(first, at);
  }
  return groups;
}

/// Source cover data expressed on the blocks of `target`.
[[nodiscard]] inline std::vector<BlockSet> aligned_source(const AnyCover& source, const Partition& target) {
  std::vector<BlockSet> out;
  if (const auto* m = std::get_if<MeagerCover>(&source)) {
    for (auto [a, b] : alignment(m->partition, target)) {
      DifferingOn d{Block(m->partition[a].lo, m->partition[b - 1].hi), {}};
      for (auto n = a; n < b; ++n)
        if (n >= m->threshold && n < m->complete) d.sub_words.push_back(restrict(m->center, m->partition[n]));
      out.emplace_back(std::move(d));
    }
  } else if (const auto* s = std::get_if<SmallCover>(&source)) {
    if (!(s->partition == target)) throw Error(ErrorKind::Misaligned, "small cover witnesses must share the source partition");
    for (const auto& J : s->patterns) out.emplace_back(J);
  } else {
    const auto& e = std::get<ECover>(source);
    for (auto [a, b] : alignment(e.partition, target)) {
      std::vector<PatternSet> factors;
      for (auto n = a; n < b; ++n)
        factors.push_back(n >= e.threshold && n < e.complete ? e.patterns[n] : PatternSet::full(e.partition[n]));
      out.emplace_back(block_product(factors));
    }
  }
  return out;
}

[[nodiscard]] inline std::vector<BlockSet> witness_blocks(const AnyCover& w) {
  std::vector<BlockSet> out;
  if (const auto* m = std::get_if<MeagerCover>(&w)) {
    for (const auto& b : m->partition) out.emplace_back(Excluding{b, {restrict(m->center, b).bits}});
  } else if (const auto* s = std::get_if<SmallCover>(&w)) {
    for (const auto& J : s->patterns) out.emplace_back(J);
  } else {
    for (const auto& J : std::get<ECover>(w).patterns) out.emplace_back(J);
  }
  return out;
}

/// Block range [threshold, complete) a witness cover is tested on.
[[nodiscard]] inline std::pair<std::size_t, std::size_t> checked_range(const AnyCover& w) {
  if (const auto* m = std::get_if<MeagerCover>(&w)) return {m->threshold, m->complete};
  if (const auto* e = std::get_if<ECover>(&w)) return {e->threshold, e->complete};
  return {0, std::get<SmallCover>(w).partition.size()};
}

/// b-fold sum of the body, deduplicated after every round; 0-fold is {zero}.
[[nodiscard]] inline PatternSet nfold_body_sum(const PrefixTree& T, unsigned n, std::size_t budget = kDefaultBudget) {
  const auto B = body(T);
  PatternSet acc = PatternSet::singleton(Word::zero(B.block()));
  for (unsigned i = 0; i < n; ++i) {
    if (acc.size() * B.size() > budget)
      throw Error(ErrorKind::BudgetExceeded, std::to_string(acc.size()) + " x " + std::to_string(B.size()) + " sums at fold " + std::to_string(i + 1));
    acc = pattern_sum(acc, B);
  }
  return acc;
}

/// Whether source + sums lies inside target; sets `bad` to an offending sum.
[[nodiscard]] inline bool sum_included(const BlockSet& source, const PatternSet& sums, const BlockSet& target,
                                       std::optional<std::uint64_t>* bad, std::size_t budget) {
  if (const auto* ex = std::get_if<Excluding>(&target)) {
    // s + t = e with s in source  <=>  e + t in source
    for (auto e : ex->words)
      for (auto t : sums.values())
        if (contains(source, e ^ t)) {
          if (bad) *bad = e;
          return false;
        }
    return true;
  }
  const auto src = enumerate(source, budget);
  if (src.size() * sums.size() > budget) throw Error(ErrorKind::BudgetExceeded, "blockwise sum on " + to_string(src.block()));
  for (auto s : src.values())
    for (auto t : sums.values())
      if (!contains(target, s ^ t)) {
        if (bad) *bad = s ^ t;
        return false;
      }
  return true;
}

[[nodiscard]] inline Certificate blockwise_certify(const std::vector<BlockSet>& source, const PrefixTree& T,
                                                   const std::vector<unsigned>& folds, const std::vector<BlockSet>& witness,
                                                   std::size_t threshold, std::size_t complete,
                                                   std::size_t budget = kDefaultBudget) {
  if (source.size() != witness.size()) throw Error(ErrorKind::Misaligned, "source and witness block counts differ");
  if (complete > witness.size()) throw Error(ErrorKind::OutOfRange, "complete block count exceeds witness");
  Certificate cert;
  cert.threshold = threshold;
  cert.complete = complete;
  cert.folds = folds;
  unsigned max_fold = 0;
  for (auto b : folds) max_fold = std::max(max_fold, b);
  for (std::size_t n = threshold; n < complete; ++n) {
    const auto blk = block_of(witness[n]);
    if (block_of(source[n]) != blk) throw Error(ErrorKind::Misaligned, "source and witness blocks differ at " + std::to_string(n));
    const auto R = tree_restrict(T, blk);
    std::vector<PatternSet> fold_sets{PatternSet::singleton(Word::zero(blk))};
    for (unsigned b = 1; b <= max_fold; ++b) {
      if (fold_sets.back().size() * R.size() > budget) throw Error(ErrorKind::BudgetExceeded, "fold sums on " + to_string(blk));
      fold_sets.push_back(pattern_sum(fold_sets.back(), R));
    }
    for (auto b : folds) {
      BlockRecord rec;
      rec.block = n;
      rec.fold = b;
      rec.source_count = cardinality(source[n]);
      rec.tree_count = R.size();
      rec.target_count = cardinality(witness[n]);
      std::optional<std::uint64_t> bad;
      rec.pass = sum_included(source[n], fold_sets[b], witness[n], &bad, budget);
      if (bad) rec.counterexample = Word(blk, *bad);
      cert.pass = cert.pass && rec.pass;
      cert.records.push_back(std::move(rec));
    }
  }
  return cert;
}

/// Blockwise certificate of `witness` against `source` for the given folds.
[[nodiscard]] inline Certificate certify(const AnyCover& source, const PrefixTree& T, const std::vector<unsigned>& folds,
                                         const AnyCover& witness, std::size_t budget = kDefaultBudget) {
  const auto& P = partition_of(witness);
  if (T.horizon() != P.horizon()) throw Error(ErrorKind::HorizonMismatch, "tree and witness cover");
  auto [thr, complete] = checked_range(witness);
  return blockwise_certify(aligned_source(source, P), T, folds, witness_blocks(witness), thr, complete, budget);
}

[[nodiscard]] inline bool point_member(const AnyCover& c, const Point& p) {
  if (const auto* m = std::get_if<MeagerCover>(&c)) return meager_member(*m, p);
  if (const auto* e = std::get_if<ECover>(&c)) return e_member(*e, p);
  throw Error(ErrorKind::InvalidArgument, "small covers have no point membership test");
}

/// For every source member p and every t in the b-fold body sum, p + t is a witness member.
[[nodiscard]] inline bool exhaustive_containment(const AnyCover& source, const PrefixTree& T, unsigned b, const AnyCover& witness,
                                                 std::size_t horizon_cap = kDefaultHorizonCap,
                                                 std::size_t budget = std::size_t{1} << 27) {
  if (std::holds_alternative<SmallCover>(source) || std::holds_alternative<SmallCover>(witness))
    throw Error(ErrorKind::InvalidArgument, "small cover supplied to exhaustive containment");
  const auto h = T.horizon();
  if (h > horizon_cap) throw Error(ErrorKind::BudgetExceeded, "horizon " + std::to_string(h) + " above cap " + std::to_string(horizon_cap));
  if (partition_of(source).horizon() != h || partition_of(witness).horizon() != h)
    throw Error(ErrorKind::HorizonMismatch, "exhaustive containment operands");

  std::vector<std::uint64_t> members;
  for (std::uint64_t v = 0; v <= low_mask(h); ++v)
    if (point_member(source, Point(h, v))) members.push_back(v);
  const auto sums = nfold_body_sum(T, b);
  if (members.size() * sums.size() > budget) throw Error(ErrorKind::BudgetExceeded, "exhaustive pair count");
  for (auto t : sums.values())
    for (auto p : members)
      if (!point_member(witness, Point(h, p ^ t))) return false;
  return true;
}

/// Witness cover claimed by a construction.
struct Witness {
  std::string label;
  AnyCover source;
  AnyCover cover;
  std::optional<unsigned> fold;   // nullopt: one cover serves every fold
  std::optional<Rational> bound;  // mass bound (small) or density bound (E)
};

struct AuditRow {
  std::string label;
  std::optional<unsigned> fold;
  std::string measure;  // "mass" or "max_density"
  Rational value;
  Rational bound;
  bool pass = false;
};

[[nodiscard]] inline std::vector<AuditRow> density_audit_table(const std::vector<Witness>& witnesses) {
  std::vector<AuditRow> rows;
  for (const auto& w : witnesses) {
    if (!w.bound) continue;
    AuditRow r{w.label, w.fold, "", Rational(0), *w.bound, false};
    if (const auto* s = std::get_if<SmallCover>(&w.cover)) {
      r.measure = "mass";
      r.value = small_mass(*s);
    } else if (const auto* e = std::get_if<ECover>(&w.cover)) {
      r.measure = "max_density";
      r.value = e_density_audit(*e).max_density;
    } else {
      continue;
    }
    r.pass = r.value <= r.bound;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace cantor
