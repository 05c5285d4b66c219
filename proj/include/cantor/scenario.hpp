#pragma once

// Scenario files (JSON) naming partitions, points, trees and covers, plus a
// list of construction requests; and the run that certifies every request.

#include <chrono>
#include <cstddef>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cantor/constructions.hpp"

namespace cantor {

using json = nlohmann::ordered_json;

using CoverValue = std::variant<MeagerCover, SmallCover, NullCover, ECover, ClosedNullChain>;

[[nodiscard]] inline std::string cover_value_kind(const CoverValue& c) {
  switch (c.index()) {
    case 0: return "meager";
    case 1: return "small";
    case 2: return "null";
    case 3: return "e";
    default: return "closed_null_chain";
  }
}

struct Corruption {
  std::size_t witness = 0;
  std::optional<std::size_t> block;  // default: first checked block
};

struct Request {
  std::string op;
  std::vector<std::string> args;
  std::optional<std::vector<unsigned>> folds;
  bool uniform = false;
  std::optional<std::string> kind;  // shrink_mn only
  std::optional<Corruption> corrupt;
};

struct Scenario {
  std::string name;
  std::size_t horizon = 0;
  std::map<std::string, Partition> partitions;
  std::map<std::string, Point> points;
  std::map<std::string, IndexSet> index_sets;
  std::map<std::string, AnyTree> trees;
  std::map<std::string, CoverValue> covers;
  std::vector<Request> requests;
};

// ---------------------------------------------------------------------------
// Operation table
// ---------------------------------------------------------------------------

struct OpInfo {
  std::string name;
  std::vector<std::string> args;  // meager, small, null, e, chain, silver, tree
  std::string summary;
};

[[nodiscard]] inline const std::vector<OpInfo>& operations() {
  static const std::vector<OpInfo> ops{
      {"shrink_silver_meager", {"meager", "silver"}, "Silver subtree and meager witnesses for F + n-fold sums"},
      {"shrink_perfect_meager", {"meager", "tree"}, "(uniformly) perfect subtree and meager witnesses"},
      {"build_splitting_meager", {"meager"}, "splitting tree and meager witnesses"},
      {"shrink_silver_small", {"small", "silver"}, "Silver subtree and a small witness with mass <= 4 mass(F)"},
      {"shrink_silver_null", {"null", "silver"}, "two small-cover shrinks for a null cover"},
      {"shrink_perfect_small", {"small", "tree"}, "(uniformly) perfect subtree with per-block split budgets"},
      {"shrink_perfect_null", {"null", "tree"}, "two perfect small-cover shrinks for a null cover"},
      {"build_splitting_null", {"null"}, "splitting tree for a null cover on interleaved partitions"},
      {"shrink_mn", {"meager", "null", "tree"}, "meager shrink followed by null shrink; needs \"kind\""},
      {"simplify_e_cover", {"chain"}, "partition-and-patterns cover from a closed null chain"},
      {"shrink_silver_e", {"e", "silver"}, "Silver subtree and an E witness on block triples"},
      {"shrink_perfect_e", {"e", "tree"}, "(uniformly) perfect subtree and E witnesses on super-blocks"},
      {"build_splitting_e", {"e"}, "splitting tree and an E witness on block triples"},
  };
  return ops;
}

[[nodiscard]] inline const OpInfo* find_operation(const std::string& name) {
  for (const auto& op : operations())
    if (op.name == name) return &op;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

template <class Map>
const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const std::string& what) {
  auto it = m.find(name);
  if (it == m.end()) throw Error(ErrorKind::UnresolvedReference, what + " '" + name + "' is not defined");
  return it->second;
}

inline Block parse_block(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Parse, "block must be [lo, hi]");
  return Block(j[0].get<std::size_t>(), j[1].get<std::size_t>());
}

inline Partition parse_partition(const json& j, std::size_t h, const std::string& name) {
  Partition P;
  if (j.is_array()) {
    std::vector<Block> blocks;
    for (const auto& b : j) blocks.push_back(parse_block(b));
    P = Partition(std::move(blocks));
  } else if (j.contains("uniform")) {
    P = Partition::uniform(h, j.at("uniform").get<std::size_t>());
  } else if (j.contains("lengths")) {
    P = Partition::from_lengths(j.at("lengths").get<std::vector<std::size_t>>());
  } else {
    throw Error(ErrorKind::Parse, "partition '" + name + "' needs a block list, \"uniform\" or \"lengths\"");
  }
  if (P.horizon() != h)
    throw Error(ErrorKind::HorizonMismatch, "partition '" + name + "' ends at " + std::to_string(P.horizon()) + ", horizon is " + std::to_string(h));
  return P;
}

inline Point parse_point(const std::string& s, std::size_t h, const std::string& name) {
  if (s.size() != h)
    throw Error(ErrorKind::HorizonMismatch, "point '" + name + "' has length " + std::to_string(s.size()) + ", horizon is " + std::to_string(h));
  return Point::from_string(s);
}

inline std::vector<PatternSet> parse_patterns(const json& j, const Partition& P, const std::string& name) {
  if (!j.is_array() || j.size() != P.size())
    throw Error(ErrorKind::Parse, "cover '" + name + "' needs one pattern list per block (" + std::to_string(P.size()) + ")");
  std::vector<PatternSet> out;
  for (std::size_t n = 0; n < P.size(); ++n) {
    if (j[n].is_string() && j[n].get<std::string>() == "all") {
      out.push_back(PatternSet::full(P[n]));
      continue;
    }
    std::vector<std::uint64_t> words;
    for (const auto& w : j[n]) {
      const auto s = w.get<std::string>();
      if (s.size() != P[n].length())
        throw Error(ErrorKind::BlockMismatch, "cover '" + name + "' block " + std::to_string(n) + ": word length " +
                                                  std::to_string(s.size()) + " differs from block length " + std::to_string(P[n].length()));
      words.push_back(Word::from_string(P[n], s).bits);
    }
    out.emplace_back(P[n], std::move(words));
  }
  return out;
}

inline IndexSet index_set_ref(const Scenario& sc, const json& j) {
  if (j.is_string()) return lookup(sc.index_sets, j.get<std::string>(), "index set");
  return IndexSet(j.get<std::vector<std::size_t>>());
}

inline AnyTree parse_tree(const Scenario& sc, const json& j, const std::string& name) {
  const auto h = sc.horizon;
  if (j.contains("silver")) {
    const auto& s = j.at("silver");
    SilverTree T(lookup(sc.points, s.at("x").get<std::string>(), "point"), index_set_ref(sc, s.at("free")));
    return T;
  }
  if (j.contains("full")) return PrefixTree::full(h);
  auto strings = [&](const char* key) {
    auto v = j.at(key).get<std::vector<std::string>>();
    for (const auto& s : v)
      if (std::string(key) == "leaves" && s.size() != h)
        throw Error(ErrorKind::HorizonMismatch, "tree '" + name + "' leaf '" + s + "' has length " + std::to_string(s.size()));
    return v;
  };
  if (j.contains("leaves")) return PrefixTree::from_leaves(h, strings("leaves"));
  if (j.contains("nodes")) return PrefixTree::from_nodes(h, strings("nodes"));
  throw Error(ErrorKind::Parse, "tree '" + name + "' needs \"silver\", \"full\", \"leaves\" or \"nodes\"");
}

inline SmallCover small_ref(const Scenario& sc, const std::string& name) {
  const auto& c = lookup(sc.covers, name, "cover");
  if (const auto* s = std::get_if<SmallCover>(&c)) return *s;
  throw Error(ErrorKind::InvalidArgument, "cover '" + name + "' is " + cover_value_kind(c) + ", expected small");
}

inline CoverValue parse_cover(const Scenario& sc, const json& j, const std::string& name) {
  if (j.contains("meager")) {
    const auto& m = j.at("meager");
    return MeagerCover(lookup(sc.points, m.at("center").get<std::string>(), "point"),
                       lookup(sc.partitions, m.at("partition").get<std::string>(), "partition"), m.value("threshold", std::size_t{0}));
  }
  if (j.contains("small")) {
    const auto& s = j.at("small");
    const auto& P = lookup(sc.partitions, s.at("partition").get<std::string>(), "partition");
    return SmallCover(P, parse_patterns(s.at("patterns"), P, name));
  }
  if (j.contains("null")) {
    const auto& n = j.at("null");
    return NullCover(small_ref(sc, n.at("first").get<std::string>()), small_ref(sc, n.at("second").get<std::string>()));
  }
  if (j.contains("e")) {
    const auto& e = j.at("e");
    const auto& P = lookup(sc.partitions, e.at("partition").get<std::string>(), "partition");
    return ECover(P, parse_patterns(e.at("patterns"), P, name), e.value("threshold", std::size_t{0}));
  }
  if (j.contains("closed_null_chain")) {
    std::vector<std::vector<Node>> stages;
    for (const auto& st : j.at("closed_null_chain").at("stages")) {
      std::vector<Node> nodes;
      for (const auto& s : st) nodes.push_back(Node::from_string(s.get<std::string>()));
      stages.push_back(std::move(nodes));
    }
    ClosedNullChain chain(std::move(stages));
    if (chain.depth(chain.stages.size() - 1) != sc.horizon)
      throw Error(ErrorKind::HorizonMismatch, "closed null chain '" + name + "' ends at depth " +
                                                  std::to_string(chain.depth(chain.stages.size() - 1)) + ", horizon is " + std::to_string(sc.horizon));
    return chain;
  }
  throw Error(ErrorKind::Parse, "cover '" + name + "' needs one of meager, small, null, e, closed_null_chain");
}

inline void check_request(const Scenario& sc, const Request& r, std::size_t index) {
  const auto where = "request " + std::to_string(index) + " (" + r.op + ")";
  const auto* op = find_operation(r.op);
  if (!op) throw Error(ErrorKind::UnknownOperation, "request " + std::to_string(index) + ": unknown operation '" + r.op + "'");
  if (r.args.size() != op->args.size())
    throw Error(ErrorKind::InvalidArgument, where + " takes " + std::to_string(op->args.size()) + " arguments");
  for (std::size_t i = 0; i < r.args.size(); ++i) {
    const auto& want = op->args[i];
    const auto& name = r.args[i];
    if (want == "silver" || want == "tree") {
      const auto& t = lookup(sc.trees, name, "tree");
      if (want == "silver" && !std::holds_alternative<SilverTree>(t))
        throw Error(ErrorKind::InvalidArgument, where + ": tree '" + name + "' must be given by Silver parameters");
    } else {
      const auto kind = cover_value_kind(lookup(sc.covers, name, "cover"));
      if (kind != (want == "chain" ? "closed_null_chain" : want))
        throw Error(ErrorKind::InvalidArgument, where + ": cover '" + name + "' is " + kind + ", expected " + want);
    }
  }
  if (r.op == "shrink_mn") {
    if (!r.kind) throw Error(ErrorKind::InvalidArgument, where + " needs \"kind\"");
    if (*r.kind != "silver" && *r.kind != "perfect" && *r.kind != "uniformly_perfect")
      throw Error(ErrorKind::InvalidArgument, where + ": unknown kind '" + *r.kind + "'");
  }
}

}  // namespace detail

/// Parses and validates a scenario document; `origin` names it in messages.
[[nodiscard]] inline Scenario parse_scenario(const std::string& text, const std::string& origin = "<input>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = detail::line_col(text, e.byte);
    throw Error(ErrorKind::Parse, origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  try {
    Scenario sc;
    sc.name = doc.value("name", origin);
    sc.horizon = doc.at("horizon").get<std::size_t>();
    if (sc.horizon == 0 || sc.horizon > kMaxHorizon) throw Error(ErrorKind::OutOfRange, "horizon " + std::to_string(sc.horizon));
    const auto section = [&](const char* key) { return doc.contains(key) ? doc.at(key) : json::object(); };
    const auto partitions = section("partitions");
    const auto points = section("points");
    const auto index_sets = section("index_sets");
    const auto trees = section("trees");
    const auto covers = section("covers");
    const auto requests = doc.contains("requests") ? doc.at("requests") : json::array();
    for (const auto& [k, v] : partitions.items()) sc.partitions.emplace(k, detail::parse_partition(v, sc.horizon, k));
    for (const auto& [k, v] : points.items()) sc.points.emplace(k, detail::parse_point(v.get<std::string>(), sc.horizon, k));
    for (const auto& [k, v] : index_sets.items()) {
      IndexSet s(v.get<std::vector<std::size_t>>());
      if (!s.empty() && s.members().back() >= sc.horizon)
        throw Error(ErrorKind::HorizonMismatch, "index set '" + k + "' reaches coordinate " + std::to_string(s.members().back()));
      sc.index_sets.emplace(k, std::move(s));
    }
    for (const auto& [k, v] : trees.items()) sc.trees.emplace(k, detail::parse_tree(sc, v, k));
    // Null covers refer to small covers, so small covers are read first.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& [k, v] : covers.items())
        if ((pass == 1) == v.contains("null")) sc.covers.emplace(k, detail::parse_cover(sc, v, k));
    std::size_t index = 0;
    for (const auto& r : requests) {
      Request req;
      req.op = r.at("op").get<std::string>();
      req.args = r.value("args", std::vector<std::string>{});
      if (r.contains("folds")) req.folds = r.at("folds").get<std::vector<unsigned>>();
      req.uniform = r.value("uniform", false);
      if (r.contains("kind")) req.kind = r.at("kind").get<std::string>();
      if (r.contains("corrupt")) {
        Corruption c;
        c.witness = r.at("corrupt").value("witness", std::size_t{0});
        if (r.at("corrupt").contains("block")) c.block = r.at("corrupt").at("block").get<std::size_t>();
        req.corrupt = c;
      }
      detail::check_request(sc, req, index++);
      sc.requests.push_back(std::move(req));
    }
    return sc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, origin + ": " + e.what());
  }
}

[[nodiscard]] inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct RunOptions {
  std::size_t horizon_cap = kDefaultHorizonCap;
  std::optional<std::vector<unsigned>> folds;  // overrides request folds; default 0..3
  bool exhaustive = true;
  bool deterministic = false;
  std::size_t budget = kDefaultBudget;
};

/// Parses "0..3" or "0,2,3".
[[nodiscard]] inline std::vector<unsigned> parse_folds(const std::string& s) {
  std::vector<unsigned> out;
  try {
    if (auto dots = s.find(".."); dots != std::string::npos) {
      const auto a = std::stoul(s.substr(0, dots));
      const auto b = std::stoul(s.substr(dots + 2));
      if (a > b) throw Error(ErrorKind::InvalidArgument, "empty fold range '" + s + "'");
      for (auto i = a; i <= b; ++i) out.push_back(static_cast<unsigned>(i));
    } else {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(static_cast<unsigned>(std::stoul(item)));
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "bad fold range '" + s + "'");
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "bad fold range '" + s + "'");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct WitnessCheck {
  std::size_t index = 0;  // position in the construction's witness list
  std::string label;
  std::optional<unsigned> fold;
  AnyCover source;
  AnyCover cover;
  std::vector<unsigned> folds;  // folds certified against this witness
  Certificate certificate;
  bool corrupted = false;
  std::optional<Word> removed;  // word dropped by a corruption
  std::optional<bool> exhaustive;
  std::string exhaustive_note;
};

struct ChainCheck {
  ECover cover;
  DensityAudit audit;
  bool points_pass = true;
  std::size_t points_checked = 0;
};

struct RequestReport {
  std::size_t index = 0;
  Request request;
  bool pass = false;
  std::optional<std::string> error;
  std::optional<ErrorKind> error_kind;
  std::optional<ShrinkResult> result;
  KindFlags flags;
  bool kind_ok = true;
  std::optional<bool> subtree_ok;
  std::vector<WitnessCheck> witnesses;
  std::vector<AuditRow> audit;
  std::optional<ChainCheck> chain;
  double elapsed_ms = 0;
};

struct Report {
  std::string scenario;
  std::size_t horizon = 0;
  bool pass = true;
  std::vector<RequestReport> requests;
};

/// Every point of the finite closed set of stage k (the intersection of the
/// cylinder unions of stages k, k+1, ...) is an e_member with threshold k.
[[nodiscard]] inline ChainCheck check_chain(const ClosedNullChain& chain, const ECover& E) {
  ChainCheck c{E, e_density_audit(E), true, 0};
  const auto h = E.horizon();
  if (h > 24) throw Error(ErrorKind::BudgetExceeded, "chain point check above horizon 24");
  for (std::size_t k = 0; k < chain.stages.size(); ++k) {
    ECover tail = E;
    tail.threshold = k;
    for (std::uint64_t x = 0; x <= low_mask(h); ++x) {
      bool in = true;
      for (std::size_t m = k; in && m < chain.stages.size(); ++m) in = chain.covers(m, x, h);
      if (!in) continue;
      ++c.points_checked;
      if (!e_member(tail, Point(h, x))) c.points_pass = false;
    }
  }
  return c;
}

namespace detail {

inline ShrinkResult dispatch(const Scenario& sc, const Request& r, const ConstructionOptions& opt) {
  auto tree = [&](std::size_t i) { return lookup(sc.trees, r.args[i], "tree"); };
  auto silver = [&](std::size_t i) { return std::get<SilverTree>(tree(i)); };
  auto prefix = [&](std::size_t i) { return as_prefix(tree(i)); };
  auto cover = [&](std::size_t i) { return lookup(sc.covers, r.args[i], "cover"); };
  auto meager = [&](std::size_t i) { return std::get<MeagerCover>(cover(i)); };
  auto small = [&](std::size_t i) { return std::get<SmallCover>(cover(i)); };
  auto null = [&](std::size_t i) { return std::get<NullCover>(cover(i)); };
  auto e = [&](std::size_t i) { return std::get<ECover>(cover(i)); };
  const auto& op = r.op;
  if (op == "shrink_silver_meager") return shrink_silver_meager(meager(0), silver(1), opt);
  if (op == "shrink_perfect_meager") return shrink_perfect_meager(meager(0), prefix(1), opt);
  if (op == "build_splitting_meager") return build_splitting_meager(meager(0), opt);
  if (op == "shrink_silver_small") return shrink_silver_small(small(0), silver(1), opt);
  if (op == "shrink_silver_null") return shrink_silver_null(null(0), silver(1), opt);
  if (op == "shrink_perfect_small") return shrink_perfect_small(small(0), prefix(1), opt);
  if (op == "shrink_perfect_null") return shrink_perfect_null(null(0), prefix(1), opt);
  if (op == "build_splitting_null") return build_splitting_null(null(0), opt);
  if (op == "shrink_mn") {
    const auto kind = *r.kind == "silver" ? TreeKind::Silver : *r.kind == "perfect" ? TreeKind::Perfect : TreeKind::UniformlyPerfect;
    return shrink_mn(meager(0), null(1), tree(2), kind, opt);
  }
  if (op == "shrink_silver_e") return shrink_silver_e(e(0), silver(1), opt);
  if (op == "shrink_perfect_e") return shrink_perfect_e(e(0), prefix(1), opt);
  if (op == "build_splitting_e") return build_splitting_e(e(0), opt);
  throw Error(ErrorKind::UnknownOperation, "unknown operation '" + op + "'");
}

inline bool promise_holds(const std::string& promised, const KindFlags& f) {
  if (promised == "silver") return f.silver;
  if (promised == "perfect") return f.perfect;
  if (promised == "uniformly_perfect") return f.uniformly_perfect;
  if (promised == "splitting") return f.splitting_at_horizon;
  return false;
}

/// Removes from block n of the witness one word that source + fold sums actually reach.
inline std::optional<Word> corrupt_blocks(const std::vector<BlockSet>& source, std::vector<BlockSet>& target,
                                          const PrefixTree& T, std::size_t n, unsigned fold, std::size_t budget) {
  const auto blk = block_of(target.at(n));
  const auto sums = pattern_fold(tree_restrict(T, blk), fold);
  const auto src = enumerate(source.at(n), budget);
  for (auto s : src.values())
    for (auto t : sums.values())
      if (contains(target[n], s ^ t)) {
        remove_word(target[n], s ^ t);
        return Word(blk, s ^ t);
      }
  return std::nullopt;
}

}  // namespace detail

[[nodiscard]] inline RequestReport run_request(const Scenario& sc, std::size_t index, const RunOptions& ro) {
  RequestReport rep;
  rep.index = index;
  rep.request = sc.requests.at(index);
  const auto& r = rep.request;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<unsigned> folds = ro.folds ? *ro.folds : r.folds ? *r.folds : std::vector<unsigned>{0, 1, 2, 3};
  try {
    if (r.op == "simplify_e_cover") {
      const auto& chain = std::get<ClosedNullChain>(detail::lookup(sc.covers, r.args[0], "cover"));
      rep.chain = check_chain(chain, simplify_e_cover(chain));
      rep.pass = rep.chain->audit.pass && rep.chain->points_pass;
    } else {
      ConstructionOptions opt;
      opt.uniform = r.uniform;
      opt.max_fold = folds.empty() ? 0 : folds.back();
      auto res = detail::dispatch(sc, r, opt);
      const auto T = res.prefix_out();
      rep.flags = classify(T);
      rep.kind_ok = detail::promise_holds(res.promised, rep.flags);
      if (res.tree_in) rep.subtree_ok = is_subtree(T, *res.tree_in);
      bool ok = rep.kind_ok && rep.subtree_ok.value_or(true);

      std::vector<Witness> audited;
      bool corrupted_any = false;
      for (std::size_t wi = 0; wi < res.witnesses.size(); ++wi) {
        const auto& w = res.witnesses[wi];
        WitnessCheck wc{wi, w.label, w.fold, w.source, w.cover, {}, {}, false, std::nullopt, std::nullopt, ""};
        if (w.fold) {
          if (std::find(folds.begin(), folds.end(), *w.fold) == folds.end()) continue;
          wc.folds = {*w.fold};
        } else {
          wc.folds = folds;
        }
        audited.push_back(w);
        const auto& P = partition_of(w.cover);
        auto src = aligned_source(w.source, P);
        auto tgt = witness_blocks(w.cover);
        auto [thr, complete] = checked_range(w.cover);
        if (r.corrupt && r.corrupt->witness == wi) {
          const auto n = r.corrupt->block.value_or(thr);
          if (n < thr || n >= complete)
            throw Error(ErrorKind::OutOfRange, "corrupted block " + std::to_string(n) + " is not checked by witness " + std::to_string(wi));
          wc.removed = detail::corrupt_blocks(src, tgt, T, n, wc.folds.front(), ro.budget);
          if (!wc.removed) throw Error(ErrorKind::InvalidArgument, "no reachable word to remove in block " + std::to_string(n));
          wc.corrupted = corrupted_any = true;
        }
        wc.certificate = blockwise_certify(src, T, wc.folds, tgt, thr, complete, ro.budget);
        ok = ok && wc.certificate.pass;

        const bool point_testable = !std::holds_alternative<SmallCover>(w.cover);
        if (!point_testable) {
          wc.exhaustive_note = "small cover: no point test";
        } else if (wc.corrupted) {
          wc.exhaustive_note = "corrupted witness: blockwise only";
        } else if (!ro.exhaustive) {
          wc.exhaustive_note = "disabled";
        } else if (sc.horizon > ro.horizon_cap) {
          wc.exhaustive_note = "horizon above cap";
        } else {
          try {
            bool all = true;
            for (auto b : wc.folds) all = all && exhaustive_containment(w.source, T, b, w.cover, ro.horizon_cap);
            wc.exhaustive = all;
            ok = ok && all;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::BudgetExceeded) throw;
            wc.exhaustive_note = std::string("skipped: ") + e.what();
          }
        }
        rep.witnesses.push_back(std::move(wc));
      }
      if (r.corrupt && !corrupted_any)
        throw Error(ErrorKind::OutOfRange, "corrupt.witness " + std::to_string(r.corrupt->witness) + " is not among the certified witnesses");
      rep.audit = density_audit_table(audited);
      for (const auto& row : rep.audit) ok = ok && row.pass;
      rep.result = std::move(res);
      rep.pass = ok;
    }
  } catch (const Error& e) {
    rep.pass = false;
    rep.error = e.what();
    rep.error_kind = e.kind();
  }
  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

[[nodiscard]] inline Report run(const Scenario& sc, const RunOptions& ro = {}) {
  Report rep;
  rep.scenario = sc.name;
  rep.horizon = sc.horizon;
  for (std::size_t i = 0; i < sc.requests.size(); ++i) {
    rep.requests.push_back(run_request(sc, i, ro));
    rep.pass = rep.pass && rep.requests.back().pass;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

[[nodiscard]] inline json to_json(const Block& b) { return json::array({b.lo, b.hi}); }

[[nodiscard]] inline json to_json(const Partition& P) {
  json a = json::array();
  for (const auto& b : P) a.push_back(to_json(b));
  return a;
}

[[nodiscard]] inline json to_json(const std::vector<PatternSet>& J) {
  json a = json::array();
  for (const auto& s : J) a.push_back(s.strings());
  return a;
}

[[nodiscard]] inline json to_json(const AnyCover& c) {
  json j;
  j["kind"] = kind_name(c);
  if (const auto* m = std::get_if<MeagerCover>(&c)) {
    j["center"] = m->center.str();
    j["partition"] = to_json(m->partition);
    j["threshold"] = m->threshold;
    j["complete"] = m->complete;
  } else if (const auto* s = std::get_if<SmallCover>(&c)) {
    j["partition"] = to_json(s->partition);
    j["patterns"] = to_json(s->patterns);
    j["mass"] = to_string(small_mass(*s));
  } else {
    const auto& e = std::get<ECover>(c);
    j["partition"] = to_json(e.partition);
    j["patterns"] = to_json(e.patterns);
    j["threshold"] = e.threshold;
    j["complete"] = e.complete;
  }
  return j;
}

inline constexpr std::size_t kMaxListedLeaves = 4096;

[[nodiscard]] inline json to_json(const AnyTree& t) {
  json j;
  if (const auto* s = std::get_if<SilverTree>(&t)) {
    j["silver"] = {{"x", s->x.str()}, {"free", s->free.members()}};
  } else {
    const auto& p = std::get<PrefixTree>(t);
    j["leaf_count"] = p.size();
    if (p.size() <= kMaxListedLeaves) j["leaves"] = body(p).strings();
  }
  return j;
}

[[nodiscard]] inline json to_json(const KindFlags& f) {
  return {{"perfect", f.perfect}, {"uniformly_perfect", f.uniformly_perfect}, {"silver", f.silver}, {"splitting_at_horizon", f.splitting_at_horizon}};
}

[[nodiscard]] inline json to_json(const Certificate& c) {
  json blocks = json::array();
  for (const auto& r : c.records) {
    json b{{"index", r.block}, {"fold", r.fold}, {"source_count", r.source_count.str()}, {"tree_count", r.tree_count},
           {"target_count", r.target_count.str()}, {"pass", r.pass}};
    if (r.counterexample) b["counterexample"] = r.counterexample->str();
    blocks.push_back(std::move(b));
  }
  return {{"pass", c.pass}, {"threshold", c.threshold}, {"complete", c.complete}, {"folds", c.folds}, {"blocks", blocks}};
}

[[nodiscard]] inline json to_json(const RequestReport& r, bool deterministic) {
  json j;
  j["index"] = r.index;
  j["op"] = r.request.op;
  j["args"] = r.request.args;
  j["pass"] = r.pass;
  if (r.error) {
    j["error"] = *r.error;
    j["error_kind"] = to_string(*r.error_kind);
  }
  if (r.chain) {
    j["cover"] = to_json(AnyCover(r.chain->cover));
    j["max_density"] = to_string(r.chain->audit.max_density);
    j["density_pass"] = r.chain->audit.pass;
    j["points_checked"] = r.chain->points_checked;
    j["points_pass"] = r.chain->points_pass;
  }
  if (r.result) {
    const auto& s = *r.result;
    j["promised"] = s.promised;
    j["kind_flags"] = to_json(r.flags);
    j["kind_ok"] = r.kind_ok;
    j["subtree_ok"] = r.subtree_ok ? json(*r.subtree_ok) : json(nullptr);
    j["tree"] = to_json(s.tree_out);
    json prov = json::object();
    for (const auto& [k, v] : s.provenance) prov[k] = v;
    j["provenance"] = prov;
    j["warnings"] = s.warnings;
    json ws = json::array();
    for (const auto& w : r.witnesses) {
      json wj{{"label", w.label}, {"fold", w.fold ? json(*w.fold) : json(nullptr)}, {"cover", to_json(w.cover)},
              {"certificate", to_json(w.certificate)}};
      // no block in [threshold, complete): the certificate holds trivially
      wj["vacuous"] = w.certificate.threshold >= w.certificate.complete;
      if (w.corrupted) wj["corrupted_word"] = w.removed->str();
      wj["exhaustive"] = w.exhaustive ? json(*w.exhaustive) : json(w.exhaustive_note);
      ws.push_back(std::move(wj));
    }
    j["witnesses"] = ws;
    json table = json::array();
    for (const auto& a : r.audit)
      table.push_back({{"label", a.label}, {"fold", a.fold ? json(*a.fold) : json(nullptr)}, {"measure", a.measure},
                       {"value", to_string(a.value)}, {"bound", to_string(a.bound)}, {"pass", a.pass}});
    j["density_table"] = table;
  }
  if (!deterministic) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

[[nodiscard]] inline json to_json(const Report& rep, bool deterministic) {
  json j;
  j["scenario"] = rep.scenario;
  j["horizon"] = rep.horizon;
  j["pass"] = rep.pass;
  if (!deterministic) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = buf;
  }
  json reqs = json::array();
  for (const auto& r : rep.requests) reqs.push_back(to_json(r, deterministic));
  j["requests"] = reqs;
  return j;
}

inline void emit(const Report& rep, const std::string& path, bool deterministic) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write report '" + path + "'");
  out << to_json(rep, deterministic).dump(2) << '\n';
}

/// Exit status of a finished run: 0 pass, 1 verification failure.
[[nodiscard]] inline int exit_code(const Report& rep) { return rep.pass ? 0 : 1; }

}  // namespace cantor
