#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hocpda/core.hpp"

namespace hocpda::test {

inline std::string fixture(const std::string& name) {
  std::ifstream in(std::string(HOCPDA_FIXTURES) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// Random ranked tree with at most max_nodes nodes; leaves are forced once
// the budget runs out, so the alphabet must contain a nullary symbol.
inline PartialTree random_tree(Rng& rng, const RankedAlphabet& sigma, std::size_t max_nodes,
                               double bottom_rate = 0.0) {
  std::vector<Symbol> leaves, inner;
  for (auto& s : sigma.symbols()) (sigma.arity(s) == 0 ? leaves : inner).push_back(s);
  PartialTree t;
  std::size_t budget = max_nodes;
  std::vector<Node> todo{Node{}};
  std::size_t pending = 1;
  while (!todo.empty()) {
    Node u = todo.back();
    todo.pop_back();
    --pending;
    Symbol f;
    if (bottom_rate > 0 && coin(rng, bottom_rate)) {
      f = kBottom;
    } else {
      std::vector<Symbol> fit = leaves;
      for (auto& s : inner)
        if (t.size() + 1 + pending + sigma.arity(s) <= budget) fit.push_back(s);
      f = fit[uniform(rng, 0, fit.size() - 1)];
    }
    t.set(u, f);
    std::size_t k = f == kBottom ? 0 : sigma.arity(f);
    for (std::size_t d = k; d >= 1; --d) {
      todo.push_back(child(u, static_cast<unsigned>(d)));
      ++pending;
    }
  }
  return t;
}

}  // namespace hocpda::test
