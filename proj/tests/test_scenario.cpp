#include <gtest/gtest.h>

#include <string>

#include "cantor/scenario.hpp"

using namespace cantor;

namespace {

const char* kBase = R"({
  "name": "t",
  "horizon": 8,
  "partitions": {"P": {"uniform": 2}},
  "points": {"x": "10110010", "y": "01000111"},
  "index_sets": {"A": [0, 3, 5, 6]},
  "trees": {"T": {"silver": {"x": "y", "free": "A"}}, "Full": {"full": true}},
  "covers": {
    "F": {"meager": {"center": "x", "partition": "P", "threshold": 0}},
    "S": {"small": {"partition": "P", "patterns": [["01"], [], ["11", "00"], ["10"]]}},
    "E": {"e": {"partition": "P", "patterns": [["01"], ["00", "11"], ["10"], ["00"]], "threshold": 0}}
  },
  "requests": [
    {"op": "shrink_silver_meager", "args": ["F", "T"]},
    {"op": "shrink_silver_small", "args": ["S", "T"], "folds": [0, 1]},
    {"op": "shrink_silver_e", "args": ["E", "T"]},
    {"op": "build_splitting_meager", "args": ["F"]}
  ]
})";

std::string replaced(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

ErrorKind load_error(const std::string& text) {
  try {
    (void)parse_scenario(text, "case.json");
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "scenario loaded without error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(ParseScenario, LoadsAndRuns) {
  const auto sc = parse_scenario(kBase);
  EXPECT_EQ(sc.horizon, 8u);
  ASSERT_EQ(sc.requests.size(), 4u);
  RunOptions ro;
  ro.deterministic = true;
  const auto rep = run(sc, ro);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(exit_code(rep), 0);
  for (const auto& q : rep.requests) {
    EXPECT_TRUE(q.pass) << q.request.op << (q.error ? ": " + *q.error : "");
    EXPECT_FALSE(q.witnesses.empty());
  }
}

TEST(ParseScenario, LoadErrors) {
  EXPECT_EQ(load_error(replaced(kBase, R"("free": "A")", R"("free": "B")")), ErrorKind::UnresolvedReference);
  EXPECT_EQ(load_error(replaced(kBase, R"("10110010")", R"("1011001")")), ErrorKind::HorizonMismatch);
  EXPECT_EQ(load_error(replaced(kBase, R"(["11", "00"])", R"(["110"])")), ErrorKind::BlockMismatch);
  EXPECT_EQ(load_error(replaced(kBase, R"({"uniform": 2})", R"([[0, 2], [2, 7]])")), ErrorKind::HorizonMismatch);
  EXPECT_EQ(load_error(replaced(kBase, "shrink_silver_e", "shrink_silver_f")), ErrorKind::UnknownOperation);
  EXPECT_EQ(load_error(replaced(kBase, R"(["S", "T"])", R"(["E", "T"])")), ErrorKind::InvalidArgument);
  EXPECT_EQ(load_error(replaced(kBase, R"(["F", "T"])", R"(["F", "Full"])")), ErrorKind::InvalidArgument);
  EXPECT_EQ(load_error(replaced(kBase, R"("horizon": 8)", R"("horizon": "8")")), ErrorKind::Parse);
  EXPECT_EQ(load_error(replaced(kBase, R"([0, 3, 5, 6])", R"([0, 3, 5, 9])")), ErrorKind::HorizonMismatch);
}

TEST(ParseScenario, MalformedJsonReportsPosition) {
  try {
    (void)parse_scenario("{\n  \"name\": \"t\",\n  \"horizon\": ,\n}", "bad.json");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
}

TEST(ParseScenario, ShrinkMnNeedsKind) {
  const std::string text = replaced(replaced(kBase, R"("S": {"small")", R"("N": {"null": {"first": "S", "second": "S"}}, "S": {"small")"),
                                    R"({"op": "build_splitting_meager", "args": ["F"]})", R"({"op": "shrink_mn", "args": ["F", "N", "T"]})");
  EXPECT_EQ(load_error(text), ErrorKind::InvalidArgument);
  const auto sc = parse_scenario(replaced(text, R"("args": ["F", "N", "T"])", R"("args": ["F", "N", "T"], "kind": "silver")"));
  EXPECT_EQ(sc.requests.back().op, "shrink_mn");
}

TEST(Report, DeterministicOutputIsStable) {
  const auto sc = parse_scenario(kBase);
  RunOptions ro;
  ro.deterministic = true;
  const auto a = to_json(run(sc, ro), true).dump(2);
  const auto b = to_json(run(sc, ro), true).dump(2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("elapsed_ms"), std::string::npos);
  EXPECT_NE(a.find("\"pass\": true"), std::string::npos);
}

TEST(Report, CorruptionFailsTheRequest) {
  auto sc = parse_scenario(kBase);
  sc.requests[0].corrupt = Corruption{1, std::nullopt};
  const auto rep = run(sc);
  EXPECT_FALSE(rep.requests[0].pass);
  EXPECT_EQ(exit_code(rep), 1);
  bool seen = false;
  for (const auto& w : rep.requests[0].witnesses)
    if (w.corrupted) {
      seen = true;
      EXPECT_FALSE(w.certificate.pass);
      EXPECT_TRUE(w.removed.has_value());
    }
  EXPECT_TRUE(seen);
}

TEST(Report, ConstructionErrorIsAFailureNotACrash) {
  const auto sc = parse_scenario(replaced(kBase, R"("A": [0, 3, 5, 6])", R"("A": [])"));
  const auto rep = run(sc);
  EXPECT_FALSE(rep.requests[0].pass);
  ASSERT_TRUE(rep.requests[0].error.has_value());
  EXPECT_EQ(exit_code(rep), 1);
}

TEST(ParseFolds, Forms) {
  EXPECT_EQ(parse_folds("0..3"), (std::vector<unsigned>{0, 1, 2, 3}));
  EXPECT_EQ(parse_folds("2"), (std::vector<unsigned>{2}));
  EXPECT_EQ(parse_folds("0,2"), (std::vector<unsigned>{0, 2}));
  EXPECT_THROW((void)parse_folds("3..1"), Error);
  EXPECT_THROW((void)parse_folds("a"), Error);
  EXPECT_THROW((void)parse_folds(""), Error);
}

TEST(Operations, TableCoversEveryConstruction) {
  EXPECT_EQ(operations().size(), 13u);
  EXPECT_NE(find_operation("simplify_e_cover"), nullptr);
  EXPECT_EQ(find_operation("nope"), nullptr);
}
