#pragma once

// Exact algebra of finite binary words over interval blocks of a truncated
// Cantor space, with coordinatewise XOR as the group operation.
//
// Bit layout: a word on [lo, hi) is stored MSB-first in a uint64_t, so the
// coordinate lo is the most significant of the (hi - lo) used bits. With this
// layout numeric order coincides with lexicographic order of the '0'/'1'
// string, and a prefix of length d of a word of length L is `bits >> (L - d)`.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cantor/error.hpp"

namespace cantor {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Largest supported horizon; every word fits one machine word with headroom
// for shifts by the full length.
inline constexpr std::size_t kMaxHorizon = 60;

[[nodiscard]] constexpr std::uint64_t low_mask(std::size_t n) noexcept {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

[[nodiscard]] inline Rational pow2(std::size_t n) {
  return Rational(BigInt(1) << n);
}

[[nodiscard]] inline std::string to_string(const Rational& r) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  return numerator(r).str() + "/" + denominator(r).str();
}

[[nodiscard]] inline Rational parse_rational(std::string_view s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(BigInt(std::string(s)));
    BigInt num(std::string(s.substr(0, slash)));
    BigInt den(std::string(s.substr(slash + 1)));
    if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator in '" + std::string(s) + "'");
    return Rational(num, den);
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw Error(ErrorKind::Parse, "malformed rational '" + std::string(s) + "'");
  }
}

/// Half-open interval [lo, hi) of coordinates.
struct Block {
  std::size_t lo = 0;
  std::size_t hi = 1;

  Block() = default;
  Block(std::size_t lo_, std::size_t hi_) : lo(lo_), hi(hi_) {
    if (lo >= hi) throw Error(ErrorKind::InvalidArgument, "empty block [" + std::to_string(lo) + "," + std::to_string(hi) + ")");
    if (hi > kMaxHorizon) throw Error(ErrorKind::OutOfRange, "block end " + std::to_string(hi) + " exceeds supported horizon");
  }

  [[nodiscard]] std::size_t length() const noexcept { return hi - lo; }
  [[nodiscard]] bool contains(std::size_t i) const noexcept { return lo <= i && i < hi; }
  [[nodiscard]] bool contains(const Block& b) const noexcept { return lo <= b.lo && b.hi <= hi; }

  friend bool operator==(const Block&, const Block&) = default;
  friend auto operator<=>(const Block&, const Block&) = default;
};

[[nodiscard]] inline std::string to_string(const Block& b) {
  return "[" + std::to_string(b.lo) + "," + std::to_string(b.hi) + ")";
}

/// Contiguous, gap-free blocks tiling [0, horizon).
class Partition {
 public:
  Partition() = default;

  explicit Partition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw Error(ErrorKind::InvalidArgument, "partition has no blocks");
    if (blocks_.front().lo != 0) throw Error(ErrorKind::InvalidArgument, "partition does not start at 0");
    for (std::size_t i = 0; i + 1 < blocks_.size(); ++i) {
      if (blocks_[i].hi != blocks_[i + 1].lo)
        throw Error(ErrorKind::InvalidArgument, "partition blocks " + std::to_string(i) + " and " +
                                                    std::to_string(i + 1) + " are not contiguous");
    }
  }

  static Partition from_lengths(std::span<const std::size_t> lengths) {
    std::vector<Block> blocks;
    std::size_t at = 0;
    for (auto len : lengths) {
      blocks.emplace_back(at, at + len);
      at += len;
    }
    return Partition(std::move(blocks));
  }

  /// Blocks of `length` coordinates; the last one is shortened to end at `horizon`.
  static Partition uniform(std::size_t horizon, std::size_t length) {
    if (length == 0) throw Error(ErrorKind::InvalidArgument, "zero block length");
    std::vector<Block> blocks;
    for (std::size_t at = 0; at < horizon; at += length) blocks.emplace_back(at, std::min(horizon, at + length));
    return Partition(std::move(blocks));
  }

  [[nodiscard]] std::size_t horizon() const noexcept { return blocks_.empty() ? 0 : blocks_.back().hi; }
  [[nodiscard]] std::size_t size() const noexcept { return blocks_.size(); }
  [[nodiscard]] const Block& operator[](std::size_t i) const { return blocks_.at(i); }
  [[nodiscard]] const std::vector<Block>& blocks() const noexcept { return blocks_; }
  [[nodiscard]] auto begin() const noexcept { return blocks_.begin(); }
  [[nodiscard]] auto end() const noexcept { return blocks_.end(); }

  /// Index of the block containing coordinate i.
  [[nodiscard]] std::size_t block_of(std::size_t i) const {
    auto it = std::upper_bound(blocks_.begin(), blocks_.end(), i,
                               [](std::size_t v, const Block& b) { return v < b.hi; });
    if (it == blocks_.end()) throw Error(ErrorKind::OutOfRange, "coordinate " + std::to_string(i) + " beyond horizon");
    return static_cast<std::size_t>(it - blocks_.begin());
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<Block> blocks_;
};

/// 0/1 assignment on exactly the coordinates of a block.
struct Word {
  Block block;
  std::uint64_t bits = 0;

  Word() = default;
  Word(Block b, std::uint64_t v) : block(b), bits(v) {
    if ((v & ~low_mask(b.length())) != 0) throw Error(ErrorKind::InvalidArgument, "word value wider than its block");
  }

  static Word zero(Block b) { return Word(b, 0); }
  static Word ones(Block b) { return Word(b, low_mask(b.length())); }

  static Word from_string(Block b, std::string_view s) {
    if (s.size() != b.length())
      throw Error(ErrorKind::BlockMismatch, "word '" + std::string(s) + "' has length " + std::to_string(s.size()) +
                                                ", block " + to_string(b) + " needs " + std::to_string(b.length()));
    std::uint64_t v = 0;
    for (char c : s) {
      if (c != '0' && c != '1') throw Error(ErrorKind::Parse, "non-binary character in word '" + std::string(s) + "'");
      v = (v << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return Word(b, v);
  }

  /// Value at absolute coordinate i (must lie in the block).
  [[nodiscard]] bool at(std::size_t i) const {
    if (!block.contains(i)) throw Error(ErrorKind::OutOfRange, "coordinate " + std::to_string(i) + " outside " + to_string(block));
    return ((bits >> (block.hi - 1 - i)) & 1U) != 0;
  }

  [[nodiscard]] std::string str() const {
    std::string s(block.length(), '0');
    for (std::size_t k = 0; k < s.size(); ++k)
      if ((bits >> (s.size() - 1 - k)) & 1U) s[k] = '1';
    return s;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

/// Truncation of an element of 2^omega to [0, horizon).
struct Point {
  std::size_t horizon = 0;
  std::uint64_t bits = 0;

  Point() = default;
  Point(std::size_t h, std::uint64_t v) : horizon(h), bits(v) {
    if (h == 0 || h > kMaxHorizon) throw Error(ErrorKind::OutOfRange, "horizon " + std::to_string(h) + " unsupported");
    if ((v & ~low_mask(h)) != 0) throw Error(ErrorKind::InvalidArgument, "point value wider than horizon");
  }

  static Point zero(std::size_t h) { return Point(h, 0); }
  static Point ones(std::size_t h) { return Point(h, low_mask(h)); }
  static Point from_string(std::string_view s) {
    auto w = Word::from_string(Block(0, s.size()), s);
    return Point(s.size(), w.bits);
  }
  static Point from_word(const Word& w) {
    if (w.block.lo != 0) throw Error(ErrorKind::BlockMismatch, "point words must start at coordinate 0");
    return Point(w.block.hi, w.bits);
  }

  [[nodiscard]] Word as_word() const { return Word(Block(0, horizon), bits); }
  [[nodiscard]] bool at(std::size_t i) const { return as_word().at(i); }
  [[nodiscard]] std::string str() const { return as_word().str(); }

  friend bool operator==(const Point&, const Point&) = default;
};

[[nodiscard]] inline Point operator+(const Point& a, const Point& b) {
  if (a.horizon != b.horizon) throw Error(ErrorKind::HorizonMismatch, "adding points of different horizons");
  return Point(a.horizon, a.bits ^ b.bits);
}

/// Sorted, duplicate-free set of coordinates.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<std::size_t> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  static IndexSet range(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> m(hi > lo ? hi - lo : 0);
    std::iota(m.begin(), m.end(), lo);
    return IndexSet(std::move(m));
  }

  [[nodiscard]] bool contains(std::size_t i) const { return std::binary_search(members_.begin(), members_.end(), i); }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
  [[nodiscard]] const std::vector<std::size_t>& members() const noexcept { return members_; }
  [[nodiscard]] auto begin() const noexcept { return members_.begin(); }
  [[nodiscard]] auto end() const noexcept { return members_.end(); }

  [[nodiscard]] IndexSet within(const Block& b) const {
    std::vector<std::size_t> m;
    for (auto i : members_)
      if (b.contains(i)) m.push_back(i);
    return IndexSet(std::move(m));
  }

  [[nodiscard]] IndexSet unite(const IndexSet& other) const {
    std::vector<std::size_t> m;
    std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(), std::back_inserter(m));
    return IndexSet(std::move(m));
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> members_;
};

/// Indicator word of `s` on block b.
[[nodiscard]] inline Word indicator(const IndexSet& s, const Block& b) {
  std::uint64_t v = 0;
  for (auto i : s.within(b)) v |= std::uint64_t{1} << (b.hi - 1 - i);
  return Word(b, v);
}

[[nodiscard]] inline Point indicator(const IndexSet& s, std::size_t horizon) {
  return Point::from_word(indicator(s, Block(0, horizon)));
}

/// Finite set of words on one block, kept in canonical (lexicographic) order.
class PatternSet {
 public:
  PatternSet() = default;
  explicit PatternSet(Block b) : block_(b) {}
  PatternSet(Block b, std::vector<std::uint64_t> words) : block_(b), words_(std::move(words)) {
    const auto mask = low_mask(b.length());
    for (auto w : words_)
      if ((w & ~mask) != 0) throw Error(ErrorKind::BlockMismatch, "pattern wider than block " + to_string(b));
    normalize();
  }
  PatternSet(Block b, std::span<const Word> words) : block_(b) {
    words_.reserve(words.size());
    for (const auto& w : words) {
      if (w.block != b) throw Error(ErrorKind::BlockMismatch, "word on " + to_string(w.block) + " added to set on " + to_string(b));
      words_.push_back(w.bits);
    }
    normalize();
  }

  static PatternSet full(Block b) {
    if (b.length() > 30) throw Error(ErrorKind::BudgetExceeded, "full pattern set on block of length " + std::to_string(b.length()));
    std::vector<std::uint64_t> w(std::size_t{1} << b.length());
    std::iota(w.begin(), w.end(), std::uint64_t{0});
    return PatternSet(b, std::move(w));
  }
  static PatternSet singleton(const Word& w) { return PatternSet(w.block, std::vector<std::uint64_t>{w.bits}); }

  static PatternSet from_strings(Block b, std::span<const std::string> words) {
    std::vector<std::uint64_t> v;
    v.reserve(words.size());
    for (const auto& s : words) v.push_back(Word::from_string(b, s).bits);
    return PatternSet(b, std::move(v));
  }

  [[nodiscard]] const Block& block() const noexcept { return block_; }
  [[nodiscard]] std::size_t size() const noexcept { return words_.size(); }
  [[nodiscard]] bool empty() const noexcept { return words_.empty(); }
  [[nodiscard]] const std::vector<std::uint64_t>& values() const noexcept { return words_; }
  [[nodiscard]] bool contains(std::uint64_t v) const { return std::binary_search(words_.begin(), words_.end(), v); }
  [[nodiscard]] bool contains(const Word& w) const { return w.block == block_ && contains(w.bits); }
  [[nodiscard]] Word word(std::size_t i) const { return Word(block_, words_.at(i)); }

  [[nodiscard]] std::vector<Word> words() const {
    std::vector<Word> out;
    out.reserve(words_.size());
    for (auto v : words_) out.emplace_back(block_, v);
    return out;
  }

  [[nodiscard]] std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (auto v : words_) out.push_back(Word(block_, v).str());
    return out;
  }

  [[nodiscard]] bool subset_of(const PatternSet& other) const {
    return block_ == other.block_ && std::includes(other.words_.begin(), other.words_.end(), words_.begin(), words_.end());
  }

  /// Removes one word; returns whether it was present.
  bool erase(std::uint64_t v) {
    auto it = std::lower_bound(words_.begin(), words_.end(), v);
    if (it == words_.end() || *it != v) return false;
    words_.erase(it);
    return true;
  }

  friend bool operator==(const PatternSet&, const PatternSet&) = default;

 private:
  void normalize() {
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  }

  Block block_;
  std::vector<std::uint64_t> words_;
};

inline void require_same_block(const Block& a, const Block& b) {
  if (a != b) throw Error(ErrorKind::BlockMismatch, to_string(a) + " vs " + to_string(b));
}

[[nodiscard]] inline Word xor_add(const Word& u, const Word& v) {
  require_same_block(u.block, v.block);
  return Word(u.block, u.bits ^ v.bits);
}

[[nodiscard]] inline Word operator+(const Word& u, const Word& v) { return xor_add(u, v); }

[[nodiscard]] inline Word restrict(const Point& p, const Block& b) {
  if (b.hi > p.horizon)
    throw Error(ErrorKind::OutOfRange, "block " + to_string(b) + " exceeds horizon " + std::to_string(p.horizon));
  return Word(b, (p.bits >> (p.horizon - b.hi)) & low_mask(b.length()));
}

/// Restriction of a word to a sub-block of its own block.
[[nodiscard]] inline Word restrict(const Word& w, const Block& b) {
  if (!w.block.contains(b)) throw Error(ErrorKind::OutOfRange, to_string(b) + " not inside " + to_string(w.block));
  return Word(b, (w.bits >> (w.block.hi - b.hi)) & low_mask(b.length()));
}

/// Raw restriction of a length-`horizon` value to block b, no checks.
[[nodiscard]] inline std::uint64_t slice(std::uint64_t value, std::size_t horizon, const Block& b) noexcept {
  return (value >> (horizon - b.hi)) & low_mask(b.length());
}

/// Places a word on block b into a length-`horizon` value.
[[nodiscard]] inline std::uint64_t place(std::uint64_t word, std::size_t horizon, const Block& b) noexcept {
  return word << (horizon - b.hi);
}

/// Sumset {j + k}. An empty operand yields the empty set and a warning.
[[nodiscard]] inline PatternSet pattern_sum(const PatternSet& J, const PatternSet& K,
                                            std::vector<std::string>* warnings = nullptr) {
  require_same_block(J.block(), K.block());
  if ((J.empty() || K.empty()) && warnings) warnings->push_back("pattern_sum with empty operand on " + to_string(J.block()));
  std::vector<std::uint64_t> out;
  out.reserve(J.size() * K.size());
  for (auto a : J.values())
    for (auto b : K.values()) out.push_back(a ^ b);
  return PatternSet(J.block(), std::move(out));
}

[[nodiscard]] inline PatternSet pattern_translate(const PatternSet& J, const Word& w) {
  require_same_block(J.block(), w.block);
  std::vector<std::uint64_t> out;
  out.reserve(J.size());
  for (auto a : J.values()) out.push_back(a ^ w.bits);
  return PatternSet(J.block(), std::move(out));
}

[[nodiscard]] inline PatternSet pattern_union(const PatternSet& J, const PatternSet& K) {
  require_same_block(J.block(), K.block());
  std::vector<std::uint64_t> out(J.values());
  out.insert(out.end(), K.values().begin(), K.values().end());
  return PatternSet(J.block(), std::move(out));
}

/// b-fold sumset S + ... + S; the 0-fold sum is {zero}.
[[nodiscard]] inline PatternSet pattern_fold(const PatternSet& S, unsigned b) {
  PatternSet acc = PatternSet::singleton(Word::zero(S.block()));
  for (unsigned i = 0; i < b; ++i) acc = pattern_sum(acc, S);
  return acc;
}

[[nodiscard]] inline Rational density(const PatternSet& J) {
  return Rational(BigInt(J.size()), BigInt(1) << J.block().length());
}

/// Cartesian product of pattern sets on consecutive blocks, as words on the merged block.
[[nodiscard]] inline PatternSet block_product(std::span<const PatternSet> Js) {
  if (Js.empty()) throw Error(ErrorKind::InvalidArgument, "empty product");
  for (std::size_t i = 0; i + 1 < Js.size(); ++i)
    if (Js[i].block().hi != Js[i + 1].block().lo)
      throw Error(ErrorKind::BlockMismatch, "non-contiguous blocks " + to_string(Js[i].block()) + " and " + to_string(Js[i + 1].block()));
  Block merged(Js.front().block().lo, Js.back().block().hi);
  std::vector<std::uint64_t> acc{0};
  for (const auto& J : Js) {
    const auto len = J.block().length();
    std::vector<std::uint64_t> next;
    next.reserve(acc.size() * J.size());
    for (auto a : acc)
      for (auto w : J.values()) next.push_back((a << len) | w);
    acc = std::move(next);
  }
  return PatternSet(merged, std::move(acc));
}

/// Merges consecutive runs of `group_sizes[i]` blocks.
[[nodiscard]] inline Partition coarsen(const Partition& P, std::span<const std::size_t> group_sizes) {
  std::vector<Block> out;
  std::size_t at = 0;
  for (auto g : group_sizes) {
    if (g == 0) throw Error(ErrorKind::InvalidArgument, "zero group size");
    if (at + g > P.size()) throw Error(ErrorKind::InvalidArgument, "group sizes exceed the number of blocks");
    out.emplace_back(P[at].lo, P[at + g - 1].hi);
    at += g;
  }
  if (at != P.size()) throw Error(ErrorKind::InvalidArgument, "group sizes do not tile the block list");
  return Partition(std::move(out));
}

/// Groups of `g` blocks; a shorter trailing group is kept if the count is not a multiple of g.
[[nodiscard]] inline std::vector<std::size_t> group_sizes_of(std::size_t blocks, std::size_t g) {
  std::vector<std::size_t> sizes(blocks / g, g);
  if (blocks % g) sizes.push_back(blocks % g);
  return sizes;
}

}  // namespace cantor
