#pragma once

// Trees on 2^{<horizon}: Silver trees by their parameters, and general pruned
// trees stored by their maximal nodes (the body at the horizon).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cantor/bits.hpp"

namespace cantor {

/// Finite binary sequence starting at coordinate 0, MSB-first like Word.
struct Node {
  std::size_t length = 0;
  std::uint64_t bits = 0;

  static Node from_string(std::string_view s) {
    if (s.empty()) return {};
    auto w = Word::from_string(Block(0, s.size()), s);
    return Node{s.size(), w.bits};
  }

  [[nodiscard]] std::string str() const { return length == 0 ? std::string() : Word(Block(0, length), bits).str(); }
  [[nodiscard]] Node child(bool bit) const { return Node{length + 1, (bits << 1) | static_cast<std::uint64_t>(bit)}; }
  [[nodiscard]] Node prefix(std::size_t d) const { return Node{d, bits >> (length - d)}; }

  friend bool operator==(const Node&, const Node&) = default;
  friend auto operator<=>(const Node&, const Node&) = default;
};

/// Pruned tree: every node extends to a node of length `horizon`, so the
/// tree is exactly the downward closure of its maximal nodes.
class PrefixTree {
 public:
  PrefixTree() = default;

  PrefixTree(std::size_t horizon, std::vector<std::uint64_t> leaves) : horizon_(horizon), leaves_(std::move(leaves)) {
    if (horizon == 0 || horizon > kMaxHorizon) throw Error(ErrorKind::OutOfRange, "tree horizon " + std::to_string(horizon));
    std::sort(leaves_.begin(), leaves_.end());
    leaves_.erase(std::unique(leaves_.begin(), leaves_.end()), leaves_.end());
    if (leaves_.empty()) throw Error(ErrorKind::InvalidArgument, "tree has no branches");
    if (leaves_.back() & ~low_mask(horizon)) throw Error(ErrorKind::InvalidArgument, "leaf wider than horizon");
  }

  static PrefixTree full(std::size_t horizon) {
    return PrefixTree(horizon, PatternSet::full(Block(0, horizon)).values());
  }

  static PrefixTree branch(const Point& p) { return PrefixTree(p.horizon, {p.bits}); }

  /// Downward closure of the given maximal nodes.
  static PrefixTree from_leaves(std::size_t horizon, std::span<const std::string> leaves) {
    std::vector<std::uint64_t> v;
    for (const auto& s : leaves) v.push_back(Word::from_string(Block(0, horizon), s).bits);
    return PrefixTree(horizon, std::move(v));
  }

  /// Explicit node list; must be prefix-closed, contain the root and be pruned at `horizon`.
  static PrefixTree from_nodes(std::size_t horizon, std::span<const std::string> nodes) {
    std::vector<Node> ns;
    for (const auto& s : nodes) {
      if (s.size() > horizon) throw Error(ErrorKind::InvalidArgument, "node '" + s + "' longer than horizon");
      ns.push_back(Node::from_string(s));
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    auto has = [&](const Node& n) { return std::binary_search(ns.begin(), ns.end(), n); };
    if (!has(Node{})) throw Error(ErrorKind::InvalidArgument, "node list lacks the empty sequence");
    std::vector<std::uint64_t> leaves;
    for (const auto& n : ns) {
      if (n.length > 0 && !has(n.prefix(n.length - 1)))
        throw Error(ErrorKind::InvalidArgument, "node list not closed under initial segments at '" + n.str() + "'");
      if (n.length == horizon) {
        leaves.push_back(n.bits);
      } else if (!has(n.child(false)) && !has(n.child(true))) {
        throw Error(ErrorKind::InvalidArgument, "maximal node '" + n.str() + "' is shorter than the horizon");
      }
    }
    return PrefixTree(horizon, std::move(leaves));
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
  [[nodiscard]] const std::vector<std::uint64_t>& leaves() const noexcept { return leaves_; }
  [[nodiscard]] std::size_t size() const noexcept { return leaves_.size(); }

  /// Leaves extending node n, as an index range into leaves().
  [[nodiscard]] std::pair<std::size_t, std::size_t> leaf_range(const Node& n) const {
    if (n.length > horizon_) return {0, 0};
    const auto shift = horizon_ - n.length;
    const std::uint64_t lo = n.bits << shift;
    const std::uint64_t hi = (n.bits + 1) << shift;
    auto first = std::lower_bound(leaves_.begin(), leaves_.end(), lo);
    auto last = std::lower_bound(first, leaves_.end(), hi);
    return {static_cast<std::size_t>(first - leaves_.begin()), static_cast<std::size_t>(last - leaves_.begin())};
  }

  [[nodiscard]] bool contains(const Node& n) const {
    auto [a, b] = leaf_range(n);
    return a < b;
  }
  [[nodiscard]] bool contains(std::string_view s) const { return s.size() <= horizon_ && contains(Node::from_string(s)); }

  [[nodiscard]] bool splits(const Node& n) const {
    return n.length < horizon_ && contains(n.child(false)) && contains(n.child(true));
  }

  /// Nodes of length d.
  [[nodiscard]] std::vector<Node> level(std::size_t d) const {
    std::vector<Node> out;
    const auto shift = horizon_ - d;
    for (auto leaf : leaves_) {
      Node n{d, d == 0 ? 0 : leaf >> shift};
      if (out.empty() || out.back() != n) out.push_back(n);
    }
    return out;
  }

  /// All nodes, ordered by length then lexicographically.
  [[nodiscard]] std::vector<Node> nodes() const {
    std::vector<Node> out;
    for (std::size_t d = 0; d <= horizon_; ++d) {
      auto l = level(d);
      out.insert(out.end(), l.begin(), l.end());
    }
    return out;
  }

  friend bool operator==(const PrefixTree&, const PrefixTree&) = default;

 private:
  std::size_t horizon_ = 0;
  std::vector<std::uint64_t> leaves_;
};

/// Silver tree: coordinates outside `free` are forced to agree with `x`.
struct SilverTree {
  Point x;
  IndexSet free;

  SilverTree() = default;
  SilverTree(Point x_, IndexSet free_) : x(x_), free(std::move(free_)) {
    if (!free.empty() && free.members().back() >= x.horizon)
      throw Error(ErrorKind::OutOfRange, "free coordinate " + std::to_string(free.members().back()) + " beyond horizon");
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return x.horizon; }

  /// Same tree with x cleared on the free coordinates.
  [[nodiscard]] SilverTree canonical() const {
    auto chi = indicator(free, x.horizon);
    return SilverTree(Point(x.horizon, x.bits & ~chi.bits), free);
  }

  friend bool operator==(const SilverTree&, const SilverTree&) = default;
};

inline constexpr std::size_t kMaxSilverFreeBits = 24;

[[nodiscard]] inline PrefixTree silver_to_prefix(const SilverTree& T, std::size_t depth) {
  if (depth == 0 || depth > T.horizon())
    throw Error(ErrorKind::OutOfRange, "depth " + std::to_string(depth) + " outside (0, horizon]");
  const Block dom(0, depth);
  const auto free = T.free.within(dom);
  if (free.size() > kMaxSilverFreeBits)
    throw Error(ErrorKind::BudgetExceeded, std::to_string(free.size()) + " free coordinates below depth " + std::to_string(depth));
  const auto chi = indicator(free, dom).bits;
  const auto base = restrict(T.x, dom).bits & ~chi;
  std::vector<std::uint64_t> leaves;
  leaves.reserve(std::size_t{1} << free.size());
  // Enumerate all submasks of chi.
  std::uint64_t sub = 0;
  do {
    leaves.push_back(base | sub);
    sub = (sub - chi) & chi;
  } while (sub != 0);
  return PrefixTree(depth, std::move(leaves));
}

[[nodiscard]] inline PrefixTree to_prefix(const SilverTree& T) { return silver_to_prefix(T, T.horizon()); }

/// The maximal nodes, as words on [0, horizon).
[[nodiscard]] inline PatternSet body(const PrefixTree& T) { return PatternSet(Block(0, T.horizon()), T.leaves()); }

/// {sigma restricted to b : sigma maximal in T}.
[[nodiscard]] inline PatternSet tree_restrict(const PrefixTree& T, const Block& b) {
  if (b.hi > T.horizon()) throw Error(ErrorKind::OutOfRange, "block " + to_string(b) + " beyond tree horizon");
  std::vector<std::uint64_t> out;
  out.reserve(T.size());
  for (auto leaf : T.leaves()) out.push_back(slice(leaf, T.horizon(), b));
  return PatternSet(b, std::move(out));
}

[[nodiscard]] inline bool is_subtree(const PrefixTree& S, const PrefixTree& T) {
  if (S.horizon() != T.horizon()) throw Error(ErrorKind::HorizonMismatch, "subtree test across horizons");
  return std::includes(T.leaves().begin(), T.leaves().end(), S.leaves().begin(), S.leaves().end());
}

/// Parameters of [T1] + [T2].
[[nodiscard]] inline SilverTree silver_sum(const SilverTree& T1, const SilverTree& T2) {
  if (T1.horizon() != T2.horizon()) throw Error(ErrorKind::HorizonMismatch, "silver_sum across horizons");
  return SilverTree(T1.x + T2.x, T1.free.unite(T2.free));
}

/// Splitting nodes among the initial segments of sigma, sigma included.
[[nodiscard]] inline std::size_t split_count_on_stem(const PrefixTree& T, const Node& sigma) {
  if (!T.contains(sigma)) throw Error(ErrorKind::InvalidArgument, "node '" + sigma.str() + "' not in tree");
  std::size_t count = 0;
  for (std::size_t d = 0; d <= sigma.length; ++d)
    if (T.splits(sigma.prefix(d))) ++count;
  return count;
}

struct KindFlags {
  bool perfect = false;
  bool uniformly_perfect = false;
  bool silver = false;
  bool splitting_at_horizon = false;

  friend bool operator==(const KindFlags&, const KindFlags&) = default;
};

namespace detail {

struct LevelInfo {
  std::vector<Node> nodes;
  std::vector<unsigned char> succ;  // bit0: child 0 present, bit1: child 1 present
  std::vector<bool> split_below;    // node or some extension splits
};

inline std::vector<LevelInfo> level_table(const PrefixTree& T) {
  const auto h = T.horizon();
  std::vector<LevelInfo> levels(h + 1);
  for (std::size_t d = 0; d <= h; ++d) {
    levels[d].nodes = T.level(d);
    levels[d].succ.assign(levels[d].nodes.size(), 0);
    levels[d].split_below.assign(levels[d].nodes.size(), false);
  }
  for (std::size_t d = h; d-- > 0;) {
    const auto& next = levels[d + 1].nodes;
    for (std::size_t i = 0; i < levels[d].nodes.size(); ++i) {
      bool below = false;
      for (int bit = 0; bit < 2; ++bit) {
        auto c = levels[d].nodes[i].child(bit != 0);
        auto it = std::lower_bound(next.begin(), next.end(), c);
        if (it != next.end() && *it == c) {
          levels[d].succ[i] |= static_cast<unsigned char>(1U << bit);
          below = below || levels[d + 1].split_below[static_cast<std::size_t>(it - next.begin())];
        }
      }
      levels[d].split_below[i] = below || levels[d].succ[i] == 3;
    }
  }
  return levels;
}

}  // namespace detail

/// Per-stem splitting threshold: the least N >= |sigma| - 1 such that every
/// coordinate n with N < n < horizon takes both values below sigma. Reported
/// for stems with |sigma| <= horizon / 2.
[[nodiscard]] inline std::map<std::string, long> splitting_thresholds(const PrefixTree& T) {
  const auto h = T.horizon();
  std::map<std::string, long> out;
  for (std::size_t d = 0; d <= h / 2; ++d) {
    for (const auto& n : T.level(d)) {
      auto [a, b] = T.leaf_range(n);
      std::uint64_t ones = 0;
      std::uint64_t zeros = 0;
      for (auto i = a; i < b; ++i) {
        ones |= T.leaves()[i];
        zeros |= ~T.leaves()[i];
      }
      const auto both = ones & zeros & low_mask(h);
      long N = static_cast<long>(d) - 1;
      for (std::size_t c = d; c < h; ++c)
        if (!((both >> (h - 1 - c)) & 1U)) N = static_cast<long>(c);
      out.emplace(n.str(), N);
    }
  }
  return out;
}

/// Finite-horizon kind classification.
///
/// perfect: some node splits, and every node no deeper than the deepest
/// splitting level has a splitting extension. uniformly_perfect: perfect and
/// each level splits wholly or not at all. silver: perfect and all nodes of a
/// level have the same successor set. splitting_at_horizon: every stem in the
/// upper half of the tree has a splitting threshold below horizon - 1.
[[nodiscard]] inline KindFlags classify(const PrefixTree& T) {
  const auto h = T.horizon();
  const auto levels = detail::level_table(T);
  KindFlags f;

  long deepest = -1;
  for (std::size_t d = 0; d < h; ++d)
    for (auto s : levels[d].succ)
      if (s == 3) deepest = static_cast<long>(d);

  if (deepest >= 0) {
    f.perfect = true;
    for (std::size_t d = 0; d <= static_cast<std::size_t>(deepest) && f.perfect; ++d)
      for (bool b : levels[d].split_below) f.perfect = f.perfect && b;
  }

  bool uniform = true;
  bool same_succ = true;
  for (std::size_t d = 0; d < h; ++d) {
    const auto& s = levels[d].succ;
    const bool all = std::all_of(s.begin(), s.end(), [](auto v) { return v == 3; });
    const bool none = std::none_of(s.begin(), s.end(), [](auto v) { return v == 3; });
    uniform = uniform && (all || none);
    same_succ = same_succ && std::all_of(s.begin(), s.end(), [&](auto v) { return v == s.front(); });
  }
  f.uniformly_perfect = f.perfect && uniform;
  f.silver = f.perfect && same_succ;

  const auto thresholds = splitting_thresholds(T);
  f.splitting_at_horizon = h >= 2 && std::all_of(thresholds.begin(), thresholds.end(), [&](const auto& kv) {
                             return kv.second < static_cast<long>(h) - 1;
                           });
  return f;
}

[[nodiscard]] inline KindFlags classify(const SilverTree& T) { return classify(to_prefix(T)); }

}  // namespace cantor
