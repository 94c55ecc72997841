#include "metagraph/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace {

const char* kMotivatingDoc = R"({
  "edges": [
    {"id": "e1", "invertex": ["x1"], "outvertex": ["x3", "x4"]},
    {"id": "e2", "invertex": ["x3"], "outvertex": ["x6"]},
    {"id": "e3", "invertex": ["x2"], "outvertex": ["x5"]},
    {"id": "e4", "invertex": ["x4", "x5"], "outvertex": ["x7"]},
    {"id": "e5", "invertex": ["x6", "x7"], "outvertex": ["x8"]}
  ],
  "format_version": 1,
  "generating_set": ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"]
})";

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  int code = metagraph::cli::run(std::move(args), in, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, SinglePathLine) {
  auto r = run_cli({"path", "--source", "x1", "--target", "x6"}, kMotivatingDoc);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "e1 e2\n");
}

TEST(Cli, AllPathsStreamed) {
  auto r = run_cli({"path", "--all", "--source", "x1,x2,x6,x7", "--target", "x8"},
                   kMotivatingDoc);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "e5\n");
}

TEST(Cli, PathLimitTruncatesStream) {
  // Two incomparable minimal paths to x8 exist from {x1,x2,x7}; --limit 1
  // stops after the first yield.
  auto all = run_cli({"path", "--all", "--source", "x1,x7", "--target", "x8"}, kMotivatingDoc);
  EXPECT_EQ(all.out, "e1 e2 e5\n");
  auto limited =
      run_cli({"path", "--all", "--limit", "1", "--source", "x1,x2,x6,x7", "--target", "x8"},
              kMotivatingDoc);
  EXPECT_EQ(limited.out, "e5\n");
}

TEST(Cli, TppGolden) {
  auto r = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8"}, kMotivatingDoc);
  EXPECT_EQ(r.code, 0);
  auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc["edges"].size(), 3u);
  EXPECT_EQ(doc["edges"][0]["invertex"], nlohmann::json::parse(R"(["x1"])"));
  EXPECT_EQ(doc["edges"][1]["outvertex"], nlohmann::json::parse(R"(["x7"])"));
}

TEST(Cli, TppIdempotentAtByteLevel) {
  auto first = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8"}, kMotivatingDoc);
  auto second = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8"}, first.out);
  EXPECT_EQ(first.code, 0);
  EXPECT_EQ(second.code, 0);
  EXPECT_EQ(first.out, second.out);
}

TEST(Cli, GenHnPipesIntoTpp) {
  auto gen = run_cli({"gen-hn", "--n", "2"});
  ASSERT_EQ(gen.code, 0);
  auto proj = run_cli({"tpp", "--subset", "F0,A0,A1,A2,B0,B1,B2"}, gen.out);
  ASSERT_EQ(proj.code, 0);
  EXPECT_EQ(nlohmann::json::parse(proj.out)["edges"].size(), 5u);
}

TEST(Cli, BbpGolden) {
  auto r = run_cli({"bbp", "--subset", "x1,x2,x6,x7,x8"}, kMotivatingDoc);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["edges"].size(), 4u);
}

TEST(Cli, BbpBudgetExceededIsDomainError) {
  auto gen = run_cli({"gen-hn", "--n", "4"});
  auto r = run_cli({"bbp", "--subset", "F0,A0,B0"}, gen.out);
  EXPECT_EQ(r.code, 1);  // 17 edges exceed the default power-set budget
  EXPECT_NE(r.err.find("BudgetExceeded"), std::string::npos);
}

TEST(Cli, GenRandIsDeterministic) {
  std::vector<std::string> args{"gen-rand", "--elements", "8", "--edges", "6",
                                "--max-vertex", "3", "--seed", "42"};
  auto a = run_cli(args);
  auto b = run_cli(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto c = run_cli({"gen-rand", "--elements", "8", "--edges", "6", "--max-vertex", "3",
                    "--seed", "43"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, DotHighlight) {
  auto r = run_cli({"dot", "--highlight", "e5"}, kMotivatingDoc);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("digraph"), std::string::npos);
  EXPECT_NE(r.out.find("color=red"), std::string::npos);
}

TEST(Cli, VerifyPasses) {
  auto r = run_cli({"verify"}, kMotivatingDoc);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("PASS round-trip"), std::string::npos);
  EXPECT_NE(r.out.find("PASS tpp-oracle-equivalence"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, BenchReportsTable) {
  auto r = run_cli({"bench", "--suite", "hn", "--max-n", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("tpp-edges"), std::string::npos);
  EXPECT_NE(r.out.find("bbp-edges"), std::string::npos);
}

TEST(Cli, BenchMarksOverBudgetAsDnf) {
  auto r = run_cli({"bench", "--suite", "hn", "--max-n", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("DNF(budget)"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  // Usage error: missing required option.
  auto usage = run_cli({"path", "--source", "x1"}, kMotivatingDoc);
  EXPECT_EQ(usage.code, 2);
  // Domain error: no metapath.
  auto nopath = run_cli({"path", "--source", "x8", "--target", "x1"}, kMotivatingDoc);
  EXPECT_EQ(nopath.code, 1);
  // Domain error: unknown element.
  auto unknown = run_cli({"path", "--source", "zz", "--target", "x1"}, kMotivatingDoc);
  EXPECT_EQ(unknown.code, 1);
  // Trivially connected: success with empty output.
  auto trivial = run_cli({"path", "--source", "x1,x6", "--target", "x6"}, kMotivatingDoc);
  EXPECT_EQ(trivial.code, 0);
  EXPECT_TRUE(trivial.out.empty());
  // Bad document.
  auto bad = run_cli({"tpp", "--subset", "x1"}, "{ not json");
  EXPECT_EQ(bad.code, 1);
}

TEST(Cli, DeterministicAcrossRuns) {
  auto a = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8", "--reverse-map"}, kMotivatingDoc);
  auto b = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8", "--reverse-map"}, kMotivatingDoc);
  EXPECT_EQ(a.out, b.out);
  auto c = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8", "--threads", "4"}, kMotivatingDoc);
  auto d = run_cli({"tpp", "--subset", "x1,x2,x6,x7,x8", "--threads", "1"}, kMotivatingDoc);
  EXPECT_EQ(c.out, d.out);
}

}  // namespace
