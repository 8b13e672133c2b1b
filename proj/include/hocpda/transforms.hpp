#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hocpda/hors.hpp"
#include "hocpda/treeauto.hpp"

namespace hocpda {

inline const Symbol kTick = "@";
inline const Symbol kBox = "⊠";

struct SymbolClash : Error {
  using Error::Error;
};
struct InvalidMark : Error {
  using Error::Error;
};

// ---------------------------------------------------------------- ticks

// Every rule F x̄ → e becomes F x̄ → @ e, with @ a fresh unary terminal.
inline Scheme tick_transform(const Scheme& s) {
  require_valid(s);
  if (s.terminals.contains(kTick) || s.nonterminal_type(kTick))
    throw SymbolClash("symbol '" + kTick + "' is already used by the scheme");
  for (auto& r : s.rules)
    for (auto& f : r.formals)
      if (f == kTick) throw SymbolClash("rule " + r.head + " has a parameter named '" + kTick + "'");
  Scheme out = s;
  out.terminals.add(kTick, 1);
  for (auto& r : out.rules) r.body = Term::apply(out.terminal(kTick), r.body);
  return out;
}

// Prefix of the value tree of a ticked scheme where only non-@ nodes count
// towards max_depth and each node gets max_steps contractions, each of which
// shows up as one @. A node that runs out of steps ends its @-chain with ⊥.
inline PartialTree unfold_ticked(const Scheme& ticked, const Budget& b,
                                 std::size_t max_nodes = 2000000) {
  require_valid(ticked);
  if (!ticked.terminals.contains(kTick) || ticked.terminals.arity(kTick) != 1)
    throw InvalidScheme({{"", "scheme has no unary '" + kTick + "' terminal"}});
  detail::RuleIndex idx(ticked);
  PartialTree out;
  struct Item {
    Node at;
    std::size_t depth;
    Term term;
  };
  std::vector<Item> todo{{Node{}, 0, ticked.nonterminal(ticked.start)}};
  while (!todo.empty()) {
    auto [u, depth, t] = std::move(todo.back());
    todo.pop_back();
    if (depth >= b.max_depth) {
      out.set(u, kBottom);
      continue;
    }
    std::size_t steps = 0;
    for (;;) {
      if (out.size() > max_nodes) throw TooLarge("ticked prefix exceeds " + std::to_string(max_nodes) + " nodes");
      Term h = t.head();
      if (h.kind() == SymbolKind::nonterminal) {
        if (steps == b.max_steps) break;
        t = idx.contract(t);
        ++steps;
      } else if (h.kind() == SymbolKind::terminal && h.name() == kTick && t.args().size() == 1) {
        out.set(u, kTick);
        u = child(u, 1);
        t = t.args()[0];
      } else {
        break;
      }
    }
    Term h = t.head();
    if (h.kind() != SymbolKind::terminal) {
      out.set(u, kBottom);
      continue;
    }
    out.set(u, h.name());
    auto args = t.args();
    for (std::size_t i = args.size(); i-- > 0;)
      todo.push_back({child(u, static_cast<unsigned>(i + 1)), depth + 1, args[i]});
  }
  return out;
}

// Starts of maximal @-chains that end in ⊥. On prefixes from unfold_ticked
// these are the nodes whose head reduction exhausted its step budget.
inline std::set<Node> divergence_marks(const PartialTree& t) {
  std::set<Node> out;
  for (auto& [u, a] : t) {
    if (a != kTick || (!u.empty() && t.at(parent(u)) == kTick)) continue;
    Node v = u;
    while (t.contains(v) && t.at(v) == kTick) v = child(v, 1);
    if (!t.contains(v) || t.at(v) == kBottom) out.insert(u);
  }
  return out;
}

// Marked @-nodes become ⊠ leaves; every other @ is skipped over.
inline PartialTree contract_ticks(const PartialTree& t, const std::set<Node>& marks) {
  for (auto& m : marks) {
    if (!t.contains(m)) throw NodeOutOfDomain("mark " + node_to_string(m) + " not in tree");
    if (t.at(m) != kTick)
      throw InvalidMark("mark " + node_to_string(m) + " is on '" + t.at(m) + "', not '" + kTick + "'");
  }
  PartialTree out;
  if (t.empty()) return out;
  std::vector<std::pair<Node, Node>> todo{{Node{}, Node{}}};  // (source, target)
  while (!todo.empty()) {
    auto [src, dst] = todo.back();
    todo.pop_back();
    while (!marks.count(src) && t.contains(src) && t.at(src) == kTick) src = child(src, 1);
    if (marks.count(src)) {
      out.set(dst, kBox);
      continue;
    }
    if (!t.contains(src)) {
      out.set(dst, kBottom);
      continue;
    }
    out.set(dst, t.at(src));
    std::size_t k = t.arity(src);
    for (std::size_t i = k; i >= 1; --i)
      todo.emplace_back(child(src, static_cast<unsigned>(i)), child(dst, static_cast<unsigned>(i)));
  }
  return out;
}

// Tick, unfold, and replace every diverging node by ⊠.
inline PartialTree eliminate_divergence(const Scheme& s, const Budget& b) {
  auto ticked = unfold_ticked(tick_transform(s), b);
  return contract_ticks(ticked, divergence_marks(ticked));
}

// ---------------------------------------------------------------- pair marks

// Inverse of pair_mark: drops the {..} suffix from every label.
inline PartialTree erase_pair_marks(const PartialTree& t) {
  PartialTree out;
  for (auto& [u, a] : t) {
    auto brace = a.rfind('{');
    out.set(u, brace != std::string::npos && a.back() == '}' ? a.substr(0, brace) : a);
  }
  return out;
}

}  // namespace hocpda
