#pragma once

// End-to-end acceptance checks shared by the acceptance test binary and the
// `selftest` command. Each criterion yields one pass/fail line.

#include <bit>
#include <bitset>
#include <chrono>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cantor/scenario.hpp"

#ifndef CANTOR_SCENARIO_DIR
#define CANTOR_SCENARIO_DIR "scenarios"
#endif

namespace cantor {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

namespace acceptance {

using Rng = std::mt19937_64;

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Random subset of the words on b with exactly `count` elements.
inline PatternSet random_patterns(Rng& rng, const Block& b, std::size_t count) {
  std::vector<std::uint64_t> all(std::size_t{1} << b.length());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, all.size()));
  return PatternSet(b, std::move(all));
}

inline Point random_point(Rng& rng, std::size_t h) { return Point(h, rng() & low_mask(h)); }

inline IndexSet random_index_set(Rng& rng, std::size_t h, std::size_t max_size) {
  std::vector<std::size_t> m;
  const auto k = uniform_int(rng, 1, max_size);
  for (std::size_t i = 0; i < k; ++i) m.push_back(uniform_int(rng, 0, h - 1));
  return IndexSet(std::move(m));
}

inline Partition random_partition(Rng& rng, std::size_t h, std::size_t max_len) {
  std::vector<std::size_t> lens;
  for (std::size_t at = 0; at < h;) {
    const auto len = std::min(h - at, uniform_int(rng, 1, max_len));
    lens.push_back(len);
    at += len;
  }
  return Partition::from_lengths(lens);
}

/// A perfect tree: two Silver pieces glued below the root, retried until perfect.
inline PrefixTree random_perfect_tree(Rng& rng, std::size_t h) {
  for (;;) {
    std::vector<std::uint64_t> leaves;
    for (std::uint64_t first : {0, 1}) {
      SilverTree S(random_point(rng, h), random_index_set(rng, h, 4));
      for (auto v : to_prefix(S).leaves()) leaves.push_back((v & low_mask(h - 1)) | (first << (h - 1)));
    }
    PrefixTree T(h, std::move(leaves));
    if (classify(T).perfect) return T;
  }
}

inline std::vector<std::filesystem::path> golden_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(CANTOR_SCENARIO_DIR))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// 1 -------------------------------------------------------------------------

inline CriterionResult exact_arithmetic() {
  CriterionResult r{1, "exact arithmetic reproductions", true, "", 0};
  Rng rng(1);
  const Rational half(1, 2);
  std::size_t n_a = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<PatternSet> triple;
    std::size_t at = 0;
    for (int k = 0; k < 3; ++k) {
      const auto len = uniform_int(rng, 1, 4);
      const Block b(at, at + len);
      at += len;
      triple.push_back(random_patterns(rng, b, uniform_int(rng, 0, (std::size_t{1} << len) / 2)));
    }
    const auto prod = block_product(triple);
    const auto bound = density(triple[0]) * density(triple[1]) * density(triple[2]) * 4;
    if (density(prod) * 4 != bound || bound > half) r.pass = false;
    ++n_a;
  }
  if (pow2(0) * 4 / pow2(3) != half) r.pass = false;

  std::size_t n_b = 0;
  for (int i = 0; i < 100; ++i) {
    const auto len = uniform_int(rng, 1, 8);
    const Block b(0, len);
    SmallCover F(Partition({b}), {random_patterns(rng, b, uniform_int(rng, 0, std::size_t{1} << (len - 1)))});
    SilverTree T(random_point(rng, len), random_index_set(rng, len, len));
    auto res = shrink_silver_small(F, T);
    const auto& J2 = std::get<SmallCover>(res.witnesses.front().cover).patterns.front();
    if (J2.size() > 4 * F.patterns.front().size()) r.pass = false;
    ++n_b;
  }

  for (std::size_t n = 0; n <= 4; ++n) {
    const std::size_t block_count = std::size_t{1} << (n * (n + 1));
    Rational fold_count(0);
    for (std::size_t j = 0; j <= n; ++j) fold_count += pow2(n * j);
    if (fold_count / pow2(block_count) > half) r.pass = false;
  }

  std::size_t n_d = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<Rational> a(uniform_int(rng, 1, 64));
    for (auto& x : a) x = Rational(BigInt(uniform_int(rng, 1, 1000)), BigInt(uniform_int(rng, 1, 1000)) << uniform_int(rng, 0, 40));
    const auto K = build_kseq(a);
    for (std::size_t b = 1; b <= 3; ++b)
      if (!check_kseq_bound(K, b).pass) r.pass = false;
    ++n_d;
  }
  r.detail = std::to_string(n_a) + " triples, " + std::to_string(n_b) + " small-Silver blocks, perfect-E n<=4, " +
             std::to_string(n_d) + " k-sequences x b in 1..3";
  return r;
}

// 2 -------------------------------------------------------------------------

// Pairs of Silver trees grow like 9^h; beyond this horizon the sum law is sampled.
inline constexpr std::size_t kExhaustivePairHorizon = 7;

// Body of a Silver tree as x plus every subset of the free coordinates.
inline std::bitset<1024> subset_bitset(const SilverTree& T, std::size_t h) {
  std::uint64_t mask = 0;
  for (auto i : T.free.members()) mask |= std::uint64_t{1} << (h - 1 - i);
  std::bitset<1024> out;
  std::uint64_t s = 0;
  do {
    out.set(T.x.bits ^ s);
    s = (s - mask) & mask;
  } while (s != 0);
  return out;
}

inline CriterionResult silver_algebra() {
  CriterionResult r{2, "Silver sum law and fold collapse", true, "", 0};
  std::size_t trees = 0;
  std::size_t pairs = 0;
  std::size_t exhaustive_pairs = 0;
  for (std::size_t h = 1; h <= 10; ++h) {
    std::vector<SilverTree> all;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << h); ++mask) {
      if (std::popcount(mask) > 5) continue;
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < h; ++i)
        if ((mask >> (h - 1 - i)) & 1U) free.push_back(i);
      // x ranges over every assignment of the forced coordinates
      const auto forced = low_mask(h) & ~mask;
      std::uint64_t x = 0;
      do {
        all.emplace_back(Point(h, x), IndexSet(free));
        x = (x - forced) & forced;
      } while (x != 0);
    }
    for (const auto& T : all) {
      const auto P = to_prefix(T);
      const auto one = nfold_body_sum(P, 1);
      const auto both = pattern_union(one, nfold_body_sum(P, 2));
      for (unsigned n = 3; n <= 5; ++n)
        if (!nfold_body_sum(P, n).subset_of(both)) r.pass = false;
      ++trees;
    }
    if (h <= kExhaustivePairHorizon) {
      // every ordered pair, on raw bitsets
      std::vector<std::vector<std::uint64_t>> bodies;
      for (const auto& T : all) bodies.push_back(to_prefix(T).leaves());
      for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = 0; j < all.size(); ++j) {
          std::bitset<1024> sums;
          for (auto a : bodies[i])
            for (auto b : bodies[j]) sums.set(a ^ b);
          if (sums != subset_bitset(silver_sum(all[i], all[j]), h)) r.pass = false;
          ++exhaustive_pairs;
        }
    } else {
      Rng rng(h);
      for (int i = 0; i < 400; ++i) {
        const auto& A = all[uniform_int(rng, 0, all.size() - 1)];
        const auto& B = all[uniform_int(rng, 0, all.size() - 1)];
        if (!(body(to_prefix(silver_sum(A, B))) == pattern_sum(body(to_prefix(A)), body(to_prefix(B))))) r.pass = false;
        ++pairs;
      }
    }
  }
  r.detail = std::to_string(trees) + " Silver trees (h<=10, |free|<=5, every x), folds 3..5; sum law on all " +
             std::to_string(exhaustive_pairs) + " pairs for h<=" + std::to_string(kExhaustivePairHorizon) + ", " +
             std::to_string(pairs) + " sampled pairs above";
  return r;
}

// 3 -------------------------------------------------------------------------

struct GoldenRun {
  std::string file;
  Scenario scenario;
  Report report;
};

inline std::vector<GoldenRun> run_goldens() {
  std::vector<GoldenRun> out;
  RunOptions ro;
  ro.folds = std::vector<unsigned>{0, 1, 2, 3};
  for (const auto& p : golden_files()) {
    auto sc = load_scenario(p.string());
    auto rep = run(sc, ro);
    out.push_back({p.filename().string(), std::move(sc), std::move(rep)});
  }
  return out;
}

inline CriterionResult golden_scenarios(const std::vector<GoldenRun>& goldens) {
  CriterionResult r{3, "golden end-to-end scenarios", true, "", 0};
  std::set<std::string> ops;
  std::size_t witnesses = 0;
  std::size_t exhaustive = 0;
  std::string failed;
  for (const auto& g : goldens) {
    if (!g.report.pass) {
      r.pass = false;
      failed += " " + g.file;
    }
    if (g.scenario.horizon < 10 || g.scenario.horizon > 14) r.pass = false;
    for (const auto& q : g.report.requests) {
      ops.insert(q.request.op);
      for (const auto& w : q.witnesses) {
        ++witnesses;
        if (!std::holds_alternative<SmallCover>(w.cover)) {
          if (!w.exhaustive || *w.exhaustive != w.certificate.pass) r.pass = false;
          ++exhaustive;
        }
      }
    }
  }
  if (ops.size() != operations().size()) r.pass = false;
  r.detail = std::to_string(goldens.size()) + " scenarios, " + std::to_string(ops.size()) + "/" + std::to_string(operations().size()) +
             " operations, " + std::to_string(witnesses) + " witnesses, " + std::to_string(exhaustive) + " exhaustive agreements" +
             (failed.empty() ? "" : "; failing:" + failed);
  return r;
}

// 4 -------------------------------------------------------------------------

inline PatternSet tuple_enumeration(const PrefixTree& T, unsigned n) {
  const auto& L = T.leaves();
  std::vector<std::uint64_t> out;
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    std::uint64_t s = 0;
    for (auto i : idx) s ^= L[i];
    out.push_back(s);
    std::size_t k = 0;
    while (k < n && ++idx[k] == L.size()) idx[k++] = 0;
    if (k == n) break;
  }
  return PatternSet(Block(0, T.horizon()), std::move(out));
}

/// Random meager or E scenario at horizon 10, run through a construction;
/// blockwise and exhaustive verdicts are compared on every witness and fold,
/// with an E witness pattern removed at random half of the time.
inline ShrinkResult random_construction_once(Rng& rng) {
  const std::size_t h = 10;
  const auto which = uniform_int(rng, 0, 5);
  ShrinkResult res;
  if (which <= 2) {
    MeagerCover F(random_point(rng, h), random_partition(rng, h, 3), uniform_int(rng, 0, 1));
    if (which == 0) res = shrink_silver_meager(F, SilverTree(random_point(rng, h), random_index_set(rng, h, 5)));
    if (which == 1) res = shrink_perfect_meager(F, random_perfect_tree(rng, h));
    if (which == 2) res = build_splitting_meager(F);
  } else {
    const auto P = random_partition(rng, h, 2);
    std::vector<PatternSet> J;
    for (const auto& b : P) J.push_back(random_patterns(rng, b, uniform_int(rng, 1, (std::size_t{1} << b.length()) / 2)));
    ECover E(P, J, uniform_int(rng, 0, 1));
    if (which == 3) res = shrink_silver_e(E, SilverTree(random_point(rng, h), random_index_set(rng, h, 5)));
    if (which == 4) res = shrink_perfect_e(E, random_perfect_tree(rng, h));
    if (which == 5) res = build_splitting_e(E);
  }
  return res;
}

// Random construction at horizon 10; inputs whose partition cannot hold the
// required super-blocks are redrawn.
inline ShrinkResult random_construction(Rng& rng, std::size_t& redraws) {
  for (;;) {
    try {
      return random_construction_once(rng);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::HorizonTooSmall) throw;
      ++redraws;
    }
  }
}

inline bool random_agreement(Rng& rng, std::size_t& comparisons, std::size_t& failures_seen, std::size_t& redraws) {
  const auto res = random_construction(rng, redraws);
  const auto T = res.prefix_out();
  bool agree = true;
  for (auto w : res.witnesses) {
    if (auto* e = std::get_if<ECover>(&w.cover); e && e->threshold < e->complete && (rng() & 1U)) {
      const auto n = uniform_int(rng, e->threshold, e->complete - 1);
      auto& Jn = e->patterns[n];
      if (!Jn.empty()) Jn.erase(Jn.values()[uniform_int(rng, 0, Jn.size() - 1)]);
    }
    const std::vector<unsigned> folds = w.fold ? std::vector<unsigned>{*w.fold} : std::vector<unsigned>{0, 1, 2, 3};
    for (auto b : folds) {
      const bool blockwise = certify(w.source, T, {b}, w.cover).pass;
      const bool exhaustive = exhaustive_containment(w.source, T, b, w.cover);
      agree = agree && blockwise == exhaustive;
      if (!blockwise) ++failures_seen;
      ++comparisons;
    }
  }
  return agree;
}

inline CriterionResult oracle_consistency(const std::vector<GoldenRun>& goldens) {
  CriterionResult r{4, "oracle self-consistency", true, "", 0};
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto h = uniform_int(rng, 2, 10);
    std::vector<std::uint64_t> leaves;
    const auto count = uniform_int(rng, 1, 40);
    for (std::size_t k = 0; k < count; ++k) leaves.push_back(rng() & low_mask(h));
    const PrefixTree T(h, leaves);
    for (unsigned n = 1; n <= 3; ++n)
      if (!(nfold_body_sum(T, n) == tuple_enumeration(T, n))) r.pass = false;
  }
  std::size_t sound = 0;
  for (const auto& g : goldens)
    for (const auto& q : g.report.requests)
      for (const auto& w : q.witnesses)
        if (w.certificate.pass && w.exhaustive) {
          if (!*w.exhaustive) r.pass = false;
          ++sound;
        }
  std::size_t comparisons = 0;
  std::size_t failures_seen = 0;
  std::size_t redraws = 0;
  for (int i = 0; i < 100; ++i)
    if (!random_agreement(rng, comparisons, failures_seen, redraws)) r.pass = false;
  r.detail = "50 random trees x n in 1..3; " + std::to_string(sound) + " golden soundness checks; 100 random scenarios, " +
             std::to_string(comparisons) + " verdict pairs (" + std::to_string(failures_seen) + " failing, " +
             std::to_string(redraws) + " inputs redrawn for horizon)";
  return r;
}

// 5 -------------------------------------------------------------------------

inline std::vector<ClosedNullChain> hand_built_chains() {
  auto nodes = [](std::initializer_list<const char*> l) {
    std::vector<Node> v;
    for (auto s : l) v.push_back(Node::from_string(s));
    return v;
  };
  return {
      ClosedNullChain({nodes({"00"}), nodes({"00010"}), nodes({"0001011"})}),
      ClosedNullChain({nodes({"000", "110"}), nodes({"000101", "110110"}), nodes({"0001010110", "1101100001"}),
                       nodes({"0001010110011", "1101100001101"})}),
      ClosedNullChain({nodes({"01", "100"}), nodes({"010000", "100011"}), nodes({"010000110", "100011101"})}),
      ClosedNullChain({nodes({"0000", "0101", "1010"}), nodes({"0000110", "0101001", "1010110"}),
                       nodes({"0000110101", "0101001010", "1010110011"})}),
      ClosedNullChain({nodes({"1"}), nodes({"10"})}),
  };
}

inline CriterionResult simplify_chains(const std::vector<GoldenRun>& goldens) {
  CriterionResult r{5, "simplify_e_cover on closed null chains", true, "", 0};
  std::size_t points = 0;
  std::size_t chains = 0;
  for (const auto& chain : hand_built_chains()) {
    try {
      const auto c = check_chain(chain, simplify_e_cover(chain));
      if (!c.audit.pass || !c.points_pass) r.pass = false;
      points += c.points_checked;
    } catch (const Error& e) {
      // the last chain has a stage of measure 1/2 and must be rejected
      if (e.kind() != ErrorKind::InsufficientNullity || chains + 1 != hand_built_chains().size()) r.pass = false;
    }
    ++chains;
  }
  for (const auto& g : goldens)
    for (const auto& q : g.report.requests)
      if (q.chain) {
        if (!q.pass) r.pass = false;
        points += q.chain->points_checked;
        ++chains;
      }
  r.detail = std::to_string(chains) + " chains, " + std::to_string(points) + " stage points checked";
  return r;
}

// 6 -------------------------------------------------------------------------

inline CriterionResult negative_controls(const std::vector<GoldenRun>& goldens) {
  CriterionResult r{6, "negative controls", true, "", 0};
  std::size_t flipped = 0;
  std::size_t vacuous = 0;
  RunOptions ro;
  ro.folds = std::vector<unsigned>{0, 1, 2, 3};
  for (const auto& g : goldens) {
    for (std::size_t qi = 0; qi < g.report.requests.size(); ++qi) {
      const auto& q = g.report.requests[qi];
      for (std::size_t wi = 0; wi < q.witnesses.size(); ++wi) {
        const auto [thr, complete] = checked_range(q.witnesses[wi].cover);
        if (thr >= complete) {
          ++vacuous;
          continue;
        }
        Scenario sc = g.scenario;
        sc.requests[qi].corrupt = Corruption{q.witnesses[wi].index, std::nullopt};
        const auto rep = run_request(sc, qi, ro);
        bool cert_failed = false;
        for (const auto& w : rep.witnesses)
          if (w.corrupted) cert_failed = !w.certificate.pass;
        if (rep.pass || !cert_failed) r.pass = false;
        ++flipped;
      }
    }
  }
  const auto neg = load_scenario(std::string(CANTOR_SCENARIO_DIR) + "/negative/silver-meager-corrupted.json");
  const auto neg_code = exit_code(run(neg));
  if (neg_code != 1) r.pass = false;
  r.detail = std::to_string(flipped) + " corrupted witnesses all rejected (" + std::to_string(vacuous) +
             " vacuous at this horizon); negative scenario exit code " + std::to_string(neg_code);
  return r;
}

}  // namespace acceptance

/// Runs all criteria, printing one line each to `out`.
inline std::vector<CriterionResult> run_acceptance(std::ostream& out) {
  using clock = std::chrono::steady_clock;
  std::vector<CriterionResult> results;
  auto timed = [&](int id, const char* name, const std::function<CriterionResult()>& f) {
    const auto start = clock::now();
    CriterionResult r{id, name, false, "", 0};
    try {
      r = f();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(clock::now() - start).count();
    out << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << " -- " << r.detail << " ("
        << static_cast<long>(r.seconds * 1000) << " ms)\n";
    out.flush();
    results.push_back(r);
  };
  std::vector<acceptance::GoldenRun> goldens;
  timed(1, "exact arithmetic reproductions", [] { return acceptance::exact_arithmetic(); });
  timed(2, "Silver sum law and fold collapse", [] { return acceptance::silver_algebra(); });
  timed(3, "golden end-to-end scenarios", [&] {
    goldens = acceptance::run_goldens();
    return acceptance::golden_scenarios(goldens);
  });
  timed(4, "oracle self-consistency", [&] { return acceptance::oracle_consistency(goldens); });
  timed(5, "simplify_e_cover on closed null chains", [&] { return acceptance::simplify_chains(goldens); });
  timed(6, "negative controls", [&] { return acceptance::negative_controls(goldens); });
  return results;
}

}  // namespace cantor
