#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() {
  const char* b = std::getenv("MINORAGG_BIN");
  return b ? b : "./minoragg";
}

fs::path tmp() {
  static fs::path d = [] {
    auto p = fs::temp_directory_path() / ("minoragg_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string write(const std::string& name, const std::string& body) {
  auto p = tmp() / name;
  std::ofstream(p) << body;
  return p.string();
}

struct Out {
  int rc;
  std::string out, err;
};

Out run(const std::string& args) {
  auto errf = (tmp() / "stderr.txt").string();
  std::string cmd = bin() + " " + args + " 2>" + errf;
  FILE* f = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t k = fread(buf, 1, sizeof buf, f)) out.append(buf, k);
  int st = pclose(f);
  std::ifstream e(errf);
  std::string err((std::istreambuf_iterator<char>(e)), {});
  return {WEXITSTATUS(st), out, err};
}

std::string k8() {
  std::string s = "p 8 28\n";
  for (int i = 1; i <= 8; ++i)
    for (int j = i + 1; j <= 8; ++j) s += "e " + std::to_string(i) + " " + std::to_string(j) + " 1\n";
  return s;
}

const char* kC4 = "p 4 4\ne 1 2 1\ne 2 3 1\ne 3 4 1\ne 4 1 1\nt 1 2\nt 2 3\nt 3 4\nr 1\n";

}  // namespace

TEST(Cli, MincutK8WithOracle) {
  auto r = run("mincut " + write("k8.graph", k8()) + " --seed 7 --oracle");
  ASSERT_EQ(r.rc, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["value"], 7);
  EXPECT_EQ(j["oracle"]["match"], true);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_GT(j["ledger"]["total_rounds"].get<long long>(), 0);
}

TEST(Cli, TwoRespectingC4Deterministic) {
  auto f = write("c4.graph", kC4);
  auto a = run("two-respecting " + f), b = run("two-respecting " + f);
  ASSERT_EQ(a.rc, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto j = json::parse(a.out);
  EXPECT_EQ(j["value"], 2);
  EXPECT_EQ(j["cut"]["cut_edges"].size(), 2u);
  EXPECT_FALSE(j.contains("seed"));
  EXPECT_FALSE(j.contains("wall_ms"));
}

TEST(Cli, OneRespecting) {
  auto r = run("one-respecting " + write("c4b.graph", kC4) + " --oracle");
  ASSERT_EQ(r.rc, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["value"], 2);
  EXPECT_EQ(j["per_edge"].size(), 3u);
}

TEST(Cli, GenThenVerify) {
  auto f = (tmp() / "g50.graph").string();
  auto g = run("gen --model gnp --n 50 --p 0.2 --seed 3 --out " + f);
  ASSERT_EQ(g.rc, 0) << g.err;
  auto v = run("verify " + f);
  EXPECT_EQ(v.rc, 0) << v.err;
  auto j = json::parse(v.out);
  EXPECT_EQ(j["oracle"]["match"], true);
  // with a tree the 2-respecting stage is verified too
  auto f2 = (tmp() / "g30t.graph").string();
  ASSERT_EQ(run("gen --model planar-grid --n 30 --seed 4 --with-tree --out " + f2).rc, 0);
  auto v2 = run("verify " + f2 + " --report " + (tmp() / "rep.json").string());
  EXPECT_EQ(v2.rc, 0) << v2.err;
  EXPECT_TRUE(json::parse(v2.out).contains("two_respecting"));
  EXPECT_TRUE(fs::exists(tmp() / "rep.json"));
}

TEST(Cli, InputErrors) {
  auto bad = run("mincut " + write("bad.graph", "p 3 2\ne 1 2 1\ne 2 x 1\n"));
  EXPECT_EQ(bad.rc, 2);
  EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;
  EXPECT_EQ(run("mincut " + (tmp() / "missing.graph").string()).rc, 2);
  EXPECT_EQ(run("two-respecting " + write("notree.graph", "p 2 1\ne 1 2 3\n")).rc, 2);
  EXPECT_EQ(run("frobnicate").rc, 2);
  EXPECT_EQ(run("gen --model cube").rc, 2);
}

TEST(Cli, OracleRefusalAndStrictBits) {
  auto big = (tmp() / "big.graph").string();
  ASSERT_EQ(run("gen --model tree-plus --n 260 --p 1 --seed 1 --with-tree --out " + big).rc, 0);
  auto r = run("mincut " + big + " --oracle");
  EXPECT_EQ(r.rc, 2);
  EXPECT_NE(r.err.find("refusing"), std::string::npos);
  // a factor this small cannot carry an HL record
  auto s = run("two-respecting " + write("c4s.graph", kC4) + " --strict-bits --max-message-bits-factor 0.01");
  EXPECT_EQ(s.rc, 1);
}

TEST(Cli, RoundsTable) {
  auto r = run("rounds --sizes 256,512 --seeds 2");
  ASSERT_EQ(r.rc, 0) << r.err;
  auto j = json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 2u);
  for (auto& row : j["rows"]) EXPECT_TRUE(row["fits_envelope"].get<bool>());
}

TEST(Cli, Trials) {
  auto r = run("mincut " + write("k8t.graph", k8()) + " --trials 3 --oracle");
  ASSERT_EQ(r.rc, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["trials"].size(), 3u);
}
