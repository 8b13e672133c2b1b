#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hocpda/workspace.hpp"
#include "support.hpp"

using namespace hocpda;

namespace {

struct Run {
  int code;
  std::string out;
};

std::string fx(const std::string& name) { return std::string(HOCPDA_FIXTURES) + "/" + name; }

// Runs the command line tool through the shell; stderr is discarded unless
// the caller redirects it.
Run cli(const std::string& args, const std::string& input = "", const std::string& env = "") {
  std::string cmd;
  if (!input.empty()) cmd += "printf '" + input + "' | ";
  cmd += env + (env.empty() ? "" : " ") + std::string(HOCPDA_CLI) + " " + args;
  if (cmd.find("2>") == std::string::npos) cmd += " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string temp_file(const std::string& name, const std::string& text) {
  auto dir = std::filesystem::temp_directory_path() / "hocpda-workspace-test";
  std::filesystem::create_directories(dir);
  auto path = (dir / name).string();
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Cli, UnfoldSchemeAndCpdaAgree) {
  auto a = cli("unfold " + fx("chains.hrs") + " --depth 6");
  auto b = cli("unfold " + fx("chains.cpda") + " --labeling " + fx("chains.map") + " --depth 6");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, "(a (a (a (a (a (a (⊥) (⊥)) (b (⊥))) (b (b (⊥)))) (b (b (b (⊥))))) (b (b (c (c (⊥)))))) (b (c (d))))\n");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(cli("unfold " + fx("chains.hrs") + " --depth 0").out, "(⊥)\n");
  EXPECT_EQ(cli("unfold " + fx("chains.hrs") + " --depth 6").out, a.out);
}

TEST(Cli, BudgetFromEnvironment) {
  auto env = cli("unfold " + fx("diverge.hrs"), "", "HOCPDA_BUDGET=3,10");
  EXPECT_EQ(env.out, "(f (⊥) (f (a) (f (⊥) (⊥))))\n");
  auto flag = cli("unfold " + fx("diverge.hrs") + " --depth 2", "", "HOCPDA_BUDGET=3,10");
  EXPECT_EQ(flag.out, "(f (⊥) (f (⊥) (⊥)))\n");
  EXPECT_EQ(cli("unfold " + fx("diverge.hrs"), "", "HOCPDA_BUDGET=x").code, 2);
}

TEST(Cli, AcceptsWords) {
  auto r = cli("check accepts " + fx("counter.cpda"), "122222\\n1122222\\n");
  EXPECT_EQ(r.out, "true\nfalse\n");
  EXPECT_EQ(r.code, 1);
  r = cli("check accepts " + fx("counter.cpda"), "22222\\n1 2 2 2 2 2\\n");
  EXPECT_EQ(r.out, "false\ntrue\n");
  EXPECT_EQ(cli("check accepts " + fx("counter.cpda"), "22\\n").code, 1);
  EXPECT_EQ(cli("check accepts " + fx("counter.cpda"), "112222222\\n").code, 0);
}

TEST(Cli, Solve) {
  auto r = cli("check solve " + fx("even.arena"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("W_E: v0 v1 v2\nW_A:\n"), std::string::npos);
}

TEST(Cli, MuAndReflect) {
  auto r = cli("check mu " + fx("gchains.hrs") + " " + fx("gchains.mu") + " --depth 9");
  EXPECT_EQ(r.code, 0);
  std::set<std::string> yes;
  std::istringstream in(r.out);
  for (std::string node, v; in >> node >> v;)
    if (v == "true") yes.insert(node);
  EXPECT_TRUE(yes.count("2"));
  EXPECT_TRUE(yes.count("121"));
  EXPECT_TRUE(yes.count("112"));
  EXPECT_FALSE(yes.count("12"));
  EXPECT_FALSE(yes.count("1121"));
  auto t = cli("check reflect " + fx("gchains.hrs") + " " + fx("gchains.mu") + " --depth 3");
  EXPECT_EQ(t.out, "(f (f (f (⊥) (⊥)) (g (⊥))) (g' (a)))\nunknown: 12\n");
}

TEST(Cli, SelectAndPta) {
  auto r = cli("check select " + fx("gchains-select.pta") + " " + fx("gchains.hrs") +
               " --bits 1 --complete a --depth 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "(f[0] (f[0] (f[0] (a[0]) (a[0])) (g[1] (a[0]))) (g[1] (a[0])))\n");
  auto none = cli("check select " + fx("has-b.pta") + " " + fx("walk-other.tree"));
  EXPECT_EQ(none.out, "none\n");
  EXPECT_EQ(none.code, 1);
  EXPECT_EQ(cli("check pta " + fx("has-b.pta") + " " + fx("walk.tree")).out, "yes\n");
  auto no = cli("check pta " + fx("has-b.pta") + " " + fx("walk-other.tree"));
  EXPECT_EQ(no.out, "no\n");
  EXPECT_EQ(no.code, 1);
  EXPECT_EQ(cli("check pta " + fx("has-b.pta") + " " + fx("walk.tree") + " --depth 2").out, "unknown\n");
}

TEST(Cli, Twa) {
  auto r = cli("check twa " + fx("rightmost.twa") + " " + fx("walk.tree"));
  EXPECT_EQ(r.out, "accepted-at 212\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(cli("check twa " + fx("rightmost.twa") + " " + fx("walk.tree") + " --start 1").out, "accepted-at 1\n");
  auto stuck = temp_file("stuck.tree", "(h (a))");
  r = cli("check twa " + fx("rightmost.twa") + " " + stuck);
  EXPECT_EQ(r.out, "rejected\n");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(cli("check twa " + fx("rightmost.twa") + " " + fx("walk.tree") + " --start 3").code, 2);
}

TEST(Cli, Tick) {
  auto r = cli("check tick " + fx("diverge.hrs"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("((I) (@ (f (H a) (F f))))"), std::string::npos);
  EXPECT_NE(r.out.find("((H z) (@ (H (H z))))"), std::string::npos);
  EXPECT_NE(r.out.find("((F phi) (@ (phi a (F phi))))"), std::string::npos);
  EXPECT_EQ(cli("check tick " + fx("diverge.hrs") + " --eliminate --depth 3 --steps 50").out,
            "(f (⊠) (f (a) (f (⊥) (⊥))))\n");
}

TEST(Cli, Diff) {
  EXPECT_EQ(cli("diff " + fx("walk.tree") + " " + fx("walk.tree")).out, "equal\n");
  auto r = cli("diff " + fx("walk.tree") + " " + fx("walk-other.tree"));
  EXPECT_EQ(r.out, "211 b a\n");
  EXPECT_EQ(r.code, 1);
  auto ab = cli("diff " + fx("chains.hrs") + " " + fx("chains.cpda") + " --labeling " + fx("chains.map") +
                " --depth 10");
  EXPECT_EQ(ab.out, "equal\n");
  auto n21 = temp_file("n21.tree", "(f (a) (g (⊥)))");
  auto m21 = temp_file("m21.tree", "(f (a) (g (a)))");
  EXPECT_EQ(cli("diff " + n21 + " " + m21).out, "21 ⊥ a\n");
  EXPECT_EQ(cli("diff " + fx("chains.hrs") + " " + fx("diverge.hrs")).code, 2);
}

TEST(Cli, InputErrors) {
  auto bad = temp_file("bad.hrs", "(terminals (a 0)) (nonterminals (I o)) (start I) (rules ((I) (a b)))");
  auto r = cli("unfold " + bad + " 2>&1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("invalid scheme"), std::string::npos);
  EXPECT_EQ(cli("unfold " + temp_file("x.txt", "(a)")).code, 2);
  EXPECT_EQ(cli("unfold " + fx("chains.cpda")).code, 2);
  EXPECT_EQ(cli("check solve " + fx("chains.hrs")).code, 2);
  EXPECT_EQ(cli("check").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Workspace, FixturesRoundTrip) {
  std::size_t n = 0;
  for (auto& entry : std::filesystem::directory_iterator(HOCPDA_FIXTURES)) {
    auto path = entry.path().string();
    auto printed = print_artifact(parse_artifact(path, read_file(path)));
    EXPECT_EQ(print_artifact(parse_artifact(path, printed)), printed) << path;
    ++n;
  }
  EXPECT_GE(n, 10u);
}

TEST(Workspace, Budget) {
  EXPECT_EQ(parse_budget("7,99").max_depth, 7u);
  EXPECT_EQ(parse_budget("7,99").max_steps, 99u);
  EXPECT_EQ(parse_budget(",5").max_depth, 10u);
  EXPECT_EQ(parse_budget("4").max_steps, 100000u);
  EXPECT_THROW(parse_budget("4;5"), Error);
}

TEST(Workspace, DiffTrees) {
  auto a = parse_tree("(f (a) (g (b)))");
  EXPECT_EQ(diff_trees(a, a).to_string(), "equal");
  EXPECT_EQ(diff_trees(a, parse_tree("(f (a) (g (a)))")).to_string(), "21 b a");
  EXPECT_EQ(diff_trees(parse_tree("(g (a))"), parse_tree("(g (h (a)))")).to_string(), "1 a h");
  EXPECT_EQ(diff_trees(parse_tree("(h (a))"), parse_tree("(h (a) (b))")).to_string(), "2 - b");
}
