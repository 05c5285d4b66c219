#pragma once

// Nondecreasing exponent sequence k_n for a positive summable sequence a_n
// with sum_n (2^b)^{k_n} a_n < 2^{b^2} s for every b >= 1.

#include <cstddef>
#include <limits>
#include <vector>

#include "cantor/bits.hpp"

namespace cantor {

struct KSeq {
  std::vector<Rational> a;
  Rational s;
  std::vector<std::size_t> nj;  // n_0 = 0, n_1, ...; n_j = length(a) once the tail is exhausted
  std::vector<std::size_t> k;   // one entry per a_n
};

/// n_j is the least n whose tail sum is strictly below s / 2^{j^2}; k_n is the
/// largest j with n_j <= n. Stops after j_max or when n_j reaches length(a).
[[nodiscard]] inline KSeq build_kseq(std::vector<Rational> a,
                                     std::size_t j_max = std::numeric_limits<std::size_t>::max()) {
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "empty sequence");
  for (std::size_t n = 0; n < a.size(); ++n)
    if (a[n] <= 0) throw Error(ErrorKind::InvalidArgument, "non-positive entry at index " + std::to_string(n));

  const auto len = a.size();
  std::vector<Rational> tail(len + 1, Rational(0));
  for (std::size_t n = len; n-- > 0;) tail[n] = tail[n + 1] + a[n];

  KSeq K;
  K.s = tail[0];
  K.nj.push_back(0);
  std::size_t n = 0;
  for (std::size_t j = 1; j <= j_max && K.nj.back() < len; ++j) {
    const Rational bound = K.s / pow2(j * j);
    while (!(tail[n] < bound)) ++n;
    K.nj.push_back(n);
  }

  K.k.assign(len, 0);
  for (std::size_t j = 1; j < K.nj.size(); ++j)
    for (std::size_t m = K.nj[j]; m < len; ++m) K.k[m] = j;
  K.a = std::move(a);
  return K;
}

struct KSeqBound {
  Rational lhs;
  Rational rhs;
  bool pass = false;
};

[[nodiscard]] inline KSeqBound check_kseq_bound(const KSeq& K, std::size_t b) {
  if (b == 0) throw Error(ErrorKind::InvalidArgument, "fold count must be at least 1");
  KSeqBound r{Rational(0), K.s * pow2(b * b), false};
  for (std::size_t n = 0; n < K.a.size(); ++n) r.lhs += pow2(b * K.k[n]) * K.a[n];
  r.pass = r.lhs < r.rhs;
  return r;
}

}  // namespace cantor
