#pragma once

// Finite-horizon covers for the meager, small/null and closed-measure-zero
// ideals. "For almost all n" is read as "for every complete block with index
// at least `threshold`"; blocks at or past `complete` are trailing remnants
// that a construction could not fill at this horizon and are never tested.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cantor/bits.hpp"
#include "cantor/trees.hpp"

namespace cantor {

struct MeagerCover {
  Point center;  // x_F
  Partition partition;
  std::size_t threshold = 0;
  std::size_t complete = 0;

  MeagerCover() = default;
  MeagerCover(Point c, Partition p, std::size_t thr = 0, std::optional<std::size_t> complete_blocks = std::nullopt)
      : center(c), partition(std::move(p)), threshold(thr), complete(complete_blocks.value_or(partition.size())) {
    if (center.horizon != partition.horizon())
      throw Error(ErrorKind::HorizonMismatch, "meager center has horizon " + std::to_string(center.horizon) +
                                                  ", partition " + std::to_string(partition.horizon()));
    if (complete > partition.size()) throw Error(ErrorKind::OutOfRange, "complete block count exceeds partition");
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return partition.horizon(); }
};

struct SmallCover {
  Partition partition;
  std::vector<PatternSet> patterns;  // J_n, one per block

  SmallCover() = default;
  SmallCover(Partition p, std::vector<PatternSet> J) : partition(std::move(p)), patterns(std::move(J)) {
    if (patterns.size() != partition.size()) throw Error(ErrorKind::InvalidArgument, "one pattern set per block required");
    for (std::size_t n = 0; n < patterns.size(); ++n) require_same_block(patterns[n].block(), partition[n]);
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return partition.horizon(); }
};

struct NullCover {
  SmallCover first;
  SmallCover second;

  NullCover() = default;
  NullCover(SmallCover a, SmallCover b) : first(std::move(a)), second(std::move(b)) {
    if (first.horizon() != second.horizon()) throw Error(ErrorKind::HorizonMismatch, "null cover halves differ in horizon");
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return first.horizon(); }
};

struct ECover {
  Partition partition;
  std::vector<PatternSet> patterns;
  std::size_t threshold = 0;
  std::size_t complete = 0;

  ECover() = default;
  ECover(Partition p, std::vector<PatternSet> J, std::size_t thr = 0, std::optional<std::size_t> complete_blocks = std::nullopt)
      : partition(std::move(p)), patterns(std::move(J)), threshold(thr), complete(complete_blocks.value_or(partition.size())) {
    if (patterns.size() != partition.size()) throw Error(ErrorKind::InvalidArgument, "one pattern set per block required");
    for (std::size_t n = 0; n < patterns.size(); ++n) require_same_block(patterns[n].block(), partition[n]);
    if (complete > partition.size()) throw Error(ErrorKind::OutOfRange, "complete block count exceeds partition");
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return partition.horizon(); }
};

using AnyCover = std::variant<MeagerCover, SmallCover, ECover>;

[[nodiscard]] inline const Partition& partition_of(const AnyCover& c) {
  return std::visit([](const auto& v) -> const Partition& { return v.partition; }, c);
}

[[nodiscard]] inline std::string kind_name(const AnyCover& c) {
  if (std::holds_alternative<MeagerCover>(c)) return "meager";
  if (std::holds_alternative<SmallCover>(c)) return "small";
  return "e";
}

[[nodiscard]] inline bool meager_member(const MeagerCover& C, const Point& p) {
  if (p.horizon != C.horizon()) throw Error(ErrorKind::HorizonMismatch, "point and meager cover");
  for (std::size_t n = C.threshold; n < C.complete; ++n) {
    const auto& b = C.partition[n];
    if (slice(p.bits, p.horizon, b) == slice(C.center.bits, p.horizon, b)) return false;
  }
  return true;
}

[[nodiscard]] inline bool e_member(const ECover& C, const Point& p) {
  if (p.horizon != C.horizon()) throw Error(ErrorKind::HorizonMismatch, "point and E cover");
  for (std::size_t n = C.threshold; n < C.complete; ++n)
    if (!C.patterns[n].contains(slice(p.bits, p.horizon, C.partition[n]))) return false;
  return true;
}

struct DensityAudit {
  Rational max_density;
  bool pass = true;
};

/// Largest density over the complete blocks and whether all are <= 1/2.
[[nodiscard]] inline DensityAudit e_density_audit(const ECover& C) {
  DensityAudit a{Rational(0), true};
  for (std::size_t n = 0; n < C.complete; ++n) a.max_density = std::max(a.max_density, density(C.patterns[n]));
  a.pass = a.max_density <= Rational(1, 2);
  return a;
}

[[nodiscard]] inline Rational small_mass(const SmallCover& C) {
  Rational s(0);
  for (const auto& J : C.patterns) s += density(J);
  return s;
}

/// Re-reads a cover with density(J_n) <= 2^-n as a cover with densities <= 1/2.
/// Only block 0 can exceed 1/2; in that case blocks 0 and 1 are merged.
[[nodiscard]] inline ECover strict_e_to_simple(const ECover& C) {
  for (std::size_t n = 0; n < C.patterns.size(); ++n) {
    if (density(C.patterns[n]) > Rational(1) / pow2(n))
      throw Error(ErrorKind::GeometricBound, "block " + std::to_string(n) + " has density " + to_string(density(C.patterns[n])));
  }
  if (e_density_audit(C).pass) return C;
  if (C.partition.size() < 2) throw Error(ErrorKind::InvalidArgument, "single dense block cannot be merged");
  std::vector<std::size_t> sizes(C.partition.size() - 1, 1);
  sizes[0] = 2;
  auto merged = coarsen(C.partition, sizes);
  std::vector<PatternSet> J{block_product(std::span(C.patterns.data(), 2))};
  J.insert(J.end(), C.patterns.begin() + 2, C.patterns.end());
  const auto shift = [](std::size_t n) { return n == 0 ? std::size_t{0} : std::max<std::size_t>(1, n - 1); };
  return ECover(std::move(merged), std::move(J), shift(C.threshold), C.complete >= 2 ? C.complete - 1 : 0);
}

/// Ascending stages of cylinder antichains approximating closed null sets.
/// The finite-resolution closed set of stage k is the intersection of the
/// cylinder unions of stages k, k+1, ...
struct ClosedNullChain {
  std::vector<std::vector<Node>> stages;

  ClosedNullChain() = default;
  explicit ClosedNullChain(std::vector<std::vector<Node>> s) : stages(std::move(s)) {
    for (std::size_t k = 0; k < stages.size(); ++k) {
      auto& st = stages[k];
      std::sort(st.begin(), st.end());
      st.erase(std::unique(st.begin(), st.end()), st.end());
      if (st.empty()) throw Error(ErrorKind::InvalidArgument, "stage " + std::to_string(k) + " has no cylinders");
      for (const auto& a : st)
        for (const auto& b : st)
          if (a != b && a.length <= b.length && b.prefix(a.length) == a)
            throw Error(ErrorKind::InvalidArgument, "stage " + std::to_string(k) + " is not an antichain: '" + a.str() +
                                                        "' is a prefix of '" + b.str() + "'");
    }
  }

  /// Exact measure of the cylinder union of stage k.
  [[nodiscard]] Rational measure(std::size_t k) const {
    Rational m(0);
    for (const auto& n : stages.at(k)) m += Rational(1) / pow2(n.length);
    return m;
  }

  [[nodiscard]] std::size_t depth(std::size_t k) const {
    std::size_t d = 0;
    for (const auto& n : stages.at(k)) d = std::max(d, n.length);
    return d;
  }

  /// Whether the length-h value x lies in the cylinder union of stage k.
  [[nodiscard]] bool covers(std::size_t k, std::uint64_t x, std::size_t h) const {
    return std::any_of(stages.at(k).begin(), stages.at(k).end(),
                       [&](const Node& n) { return n.length <= h && (n.length == 0 || (x >> (h - n.length)) == n.bits); });
  }
};

/// Outcome of one (block, fold) inclusion check.
struct BlockRecord {
  std::size_t block = 0;
  unsigned fold = 0;
  BigInt source_count;
  std::size_t tree_count = 0;
  BigInt target_count;
  bool pass = true;
  std::optional<Word> counterexample;  // a sum landing outside the target
};

struct Certificate {
  std::vector<BlockRecord> records;
  bool pass = true;
  std::size_t threshold = 0;
  std::size_t complete = 0;
  std::vector<unsigned> folds;
};

}  // namespace cantor
