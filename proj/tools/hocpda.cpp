#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hocpda/workspace.hpp"

using namespace hocpda;

namespace {

struct Options {
  std::optional<std::size_t> depth, steps;
  std::optional<std::string> labeling;
};

void add_budget(CLI::App* cmd, Options& o) {
  cmd->add_option("--depth", o.depth, "truncation depth");
  cmd->add_option("--steps", o.steps, "step budget per node");
}

Budget resolve(const Options& o) {
  Budget b = budget_from_env();
  if (o.depth) b.max_depth = *o.depth;
  if (o.steps) b.max_steps = *o.steps;
  return b;
}

// A line with spaces is a list of symbols, otherwise every character is one.
std::vector<Symbol> split_word(const std::string& line) {
  std::vector<Symbol> out;
  if (line.find(' ') != std::string::npos) {
    std::istringstream in(line);
    for (std::string s; in >> s;) out.push_back(s);
  } else {
    for (char c : line) out.emplace_back(1, c);
  }
  return out;
}

PartialTree complete(PartialTree t, const std::optional<std::string>& leaf) {
  if (!leaf) return t;
  for (auto& u : bottom_nodes(t)) t.set(u, *leaf);
  return t;
}

bool compatible(const std::map<Symbol, std::size_t>& seen, const RankedAlphabet& sigma) {
  for (auto& [a, k] : seen)
    if (!sigma.contains(a) || sigma.arity(a) != k) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Workbench for recursion schemes, collapsible pushdown automata and tree automata"};
  app.require_subcommand(1);
  Options opt;
  std::string file, file2, formula_file, node_text = "ε";
  std::optional<std::string> leaf;
  std::size_t bits = 0;
  std::optional<std::size_t> fuel;
  bool eliminate = false;
  int code = 0;
  Workspace ws;

  auto* unfold = app.add_subcommand("unfold", "print the canonical prefix of a generated tree");
  unfold->add_option("file", file, "scheme, cpda or tree")->required();
  unfold->add_option("--labeling", opt.labeling, "state labeling for a cpda");
  add_budget(unfold, opt);

  auto* check = app.add_subcommand("check", "run a decision or analysis");
  check->require_subcommand(1);

  auto* accepts = check->add_subcommand("accepts", "read words from standard input, print true/false");
  accepts->add_option("cpda", file)->required();
  add_budget(accepts, opt);

  auto* solve_cmd = check->add_subcommand("solve", "winning regions and strategies of a parity game");
  solve_cmd->add_option("arena", file)->required();

  auto* mu = check->add_subcommand("mu", "three-valued truth of a formula at every decided node");
  mu->add_option("source", file)->required();
  mu->add_option("formula", formula_file)->required();
  mu->add_option("--labeling", opt.labeling);
  add_budget(mu, opt);

  auto* reflect = check->add_subcommand("reflect", "tree with the nodes satisfying a formula barred");
  reflect->add_option("source", file)->required();
  reflect->add_option("formula", formula_file)->required();
  reflect->add_option("--labeling", opt.labeling);
  add_budget(reflect, opt);

  auto* select = check->add_subcommand("select", "marking accepted by an automaton over marked labels");
  select->add_option("pta", file2)->required();
  select->add_option("source", file)->required();
  select->add_option("--bits", bits, "number of marking bits");
  select->add_option("--complete", leaf, "replace every ⊥ by this nullary symbol");
  select->add_option("--labeling", opt.labeling);
  add_budget(select, opt);

  auto* pta = check->add_subcommand("pta", "bounded acceptance by a parity tree automaton");
  pta->add_option("pta", file2)->required();
  pta->add_option("source", file)->required();
  pta->add_option("--labeling", opt.labeling);
  add_budget(pta, opt);

  auto* twa = check->add_subcommand("twa", "run a tree-walking automaton");
  twa->add_option("twa", file2)->required();
  twa->add_option("source", file)->required();
  twa->add_option("--start", node_text, "start node");
  twa->add_option("--fuel", fuel, "maximum number of moves");
  twa->add_option("--labeling", opt.labeling);
  add_budget(twa, opt);

  auto* tick = check->add_subcommand("tick", "tick a scheme, or eliminate its divergence");
  tick->add_option("scheme", file)->required();
  tick->add_flag("--eliminate", eliminate, "print the tree with diverging nodes as ⊠");
  add_budget(tick, opt);

  auto* diff = app.add_subcommand("diff", "first node where two tree prefixes differ");
  diff->add_option("first", file)->required();
  diff->add_option("second", file2)->required();
  diff->add_option("--labeling", opt.labeling);
  add_budget(diff, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ws.budget = resolve(opt);
    if (*unfold) {
      std::cout << print_tree(ws.tree(file, opt.labeling)) << "\n";
    } else if (*accepts) {
      const auto& m = ws.get<Cpda>(file);
      for (std::string line; std::getline(std::cin, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool ok = hocpda::accepts(m, split_word(line), ws.budget.max_steps);
        std::cout << (ok ? "true" : "false") << "\n";
        if (!ok) code = 1;
      }
    } else if (*solve_cmd) {
      const auto& g = ws.get<ParityArena>(file);
      std::cout << print_solution(g, hocpda::solve(g));
    } else if (*mu || *reflect) {
      auto r = ws.reflect(file, opt.labeling, ws.get<Formula>(formula_file));
      if (*reflect) {
        std::cout << print_reflection(r);
      } else {
        std::set<Node> unknown(r.unknown.begin(), r.unknown.end());
        for (auto& [u, a] : r.marked) {
          if (a == kBottom) continue;
          Truth v = unknown.count(u) ? Truth::unknown : unbar(a) != a ? Truth::tt : Truth::ff;
          std::cout << node_to_string(u) << " " << to_string(v) << "\n";
        }
      }
    } else if (*select) {
      const auto& aut = ws.get<ParityTreeAutomaton>(file2);
      auto marked = select_marking(aut, complete(ws.tree(file, opt.labeling), leaf), bits);
      std::cout << (marked ? print_tree(*marked) : "none") << "\n";
      if (!marked) code = 1;
    } else if (*pta) {
      auto v = bounded_accepts(ws.get<ParityTreeAutomaton>(file2), ws.tree(file, opt.labeling));
      std::cout << to_string(v) << "\n";
      if (v == Verdict::no) code = 1;
    } else if (*twa) {
      auto r = twa_run(ws.get<TreeWalkingAutomaton>(file2), ws.tree(file, opt.labeling), parse_node(node_text), fuel);
      std::cout << r.to_string() << "\n";
      if (r.outcome != TwaResult::Outcome::accepted) code = 1;
    } else if (*tick) {
      const auto& s = ws.get<Scheme>(file);
      if (eliminate)
        std::cout << print_tree(eliminate_divergence(s, ws.budget)) << "\n";
      else
        std::cout << print_scheme(tick_transform(s));
    } else if (*diff) {
      auto a = ws.tree(file, opt.labeling), b = ws.tree(file2, opt.labeling);
      auto sa = ws.alphabet(file, opt.labeling), sb = ws.alphabet(file2, opt.labeling);
      auto oa = observed_alphabet(a), ob = observed_alphabet(b);
      bool clash = (sa && sb && !(*sa == *sb)) || (sa && !compatible(ob, *sa)) || (sb && !compatible(oa, *sb));
      for (auto& [x, k] : oa)
        if (ob.count(x) && ob[x] != k) clash = true;
      if (clash) {
        std::cerr << "error: the two trees are over different alphabets\n";
        return 2;
      }
      auto d = diff_trees(a, b);
      std::cout << d.to_string() << "\n";
      if (d.at) code = 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
