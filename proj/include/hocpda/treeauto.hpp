#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hocpda/core.hpp"
#include "hocpda/games.hpp"

namespace hocpda {

struct NotFunctional : Error {
  using Error::Error;
};

struct PtaTransition {
  std::size_t from;
  Symbol label;
  std::vector<std::size_t> to;
};

// Nondeterministic parity tree automaton. Runs on finite trees end at
// leaves, where (state, label) must belong to the leaf table acc.
struct ParityTreeAutomaton {
  std::vector<Symbol> states;
  std::size_t initial = 0;
  RankedAlphabet alphabet;
  std::vector<PtaTransition> transitions;
  std::vector<unsigned> colors;
  std::set<std::pair<std::size_t, Symbol>> acc;

  std::size_t add_state(const Symbol& name, unsigned color = 0) {
    states.push_back(name);
    colors.push_back(color);
    return states.size() - 1;
  }

  std::size_t state(const Symbol& name) const {
    for (std::size_t q = 0; q < states.size(); ++q)
      if (states[q] == name) return q;
    throw Error("unknown state '" + name + "'");
  }

  void add_transition(std::size_t from, const Symbol& label, std::vector<std::size_t> to) {
    transitions.push_back({from, label, std::move(to)});
  }

  unsigned max_color() const {
    unsigned m = 0;
    for (auto c : colors) m = std::max(m, c);
    return m;
  }

  void validate() const {
    if (states.empty()) throw Error("automaton without states");
    if (initial >= states.size()) throw Error("initial state out of range");
    if (colors.size() != states.size()) throw Error("every state needs a colour");
    for (auto& t : transitions) {
      std::string where = "transition from " + (t.from < states.size() ? states[t.from] : "?") + " on " + t.label;
      if (t.from >= states.size()) throw Error(where + ": unknown source");
      if (!alphabet.contains(t.label)) throw ArityMismatch(where + ": label not in alphabet");
      if (t.to.size() != alphabet.arity(t.label))
        throw ArityMismatch(where + ": " + std::to_string(t.to.size()) + " targets for arity " +
                            std::to_string(alphabet.arity(t.label)));
      for (auto q : t.to)
        if (q >= states.size()) throw Error(where + ": unknown target");
    }
    for (auto& [q, a] : acc) {
      if (q >= states.size()) throw Error("leaf table names an unknown state");
      if (!alphabet.contains(a) || alphabet.arity(a) != 0)
        throw ArityMismatch("leaf table entry for non-nullary label " + a);
    }
  }
};

namespace detail {

class TransitionIndex {
 public:
  explicit TransitionIndex(const ParityTreeAutomaton& a) : a_(a) {
    for (std::size_t i = 0; i < a.transitions.size(); ++i)
      by_source_[{a.transitions[i].from, a.transitions[i].label}].push_back(i);
  }
  const std::vector<std::size_t>& from(std::size_t q, const Symbol& label) const {
    static const std::vector<std::size_t> none;
    auto it = by_source_.find({q, label});
    return it == by_source_.end() ? none : it->second;
  }
  const PtaTransition& operator[](std::size_t i) const { return a_.transitions[i]; }

 private:
  const ParityTreeAutomaton& a_;
  std::map<std::pair<std::size_t, Symbol>, std::vector<std::size_t>> by_source_;
};

}  // namespace detail

// Labels over Σ × {0,1}^ℓ: "a" when ℓ = 0, otherwise "a[b1..bℓ]".
inline Symbol mark_label(const Symbol& a, const std::vector<bool>& bits) {
  if (bits.empty()) return a;
  std::string out = a + "[";
  for (bool b : bits) out += b ? '1' : '0';
  return out + "]";
}

inline RankedAlphabet marked_alphabet(const RankedAlphabet& sigma, std::size_t ell) {
  RankedAlphabet out;
  for (auto& a : sigma.symbols())
    for (std::size_t m = 0; m < (std::size_t{1} << ell); ++m) {
      std::vector<bool> bits(ell);
      for (std::size_t i = 0; i < ell; ++i) bits[i] = (m >> (ell - 1 - i)) & 1;
      out.add(mark_label(a, bits), sigma.arity(a));
    }
  return out;
}

enum class BottomPolicy { reject, eloise_wins, abelard_wins };

// Acceptance game on a finite tree, restricted to the part reachable from
// (root, initial). Main vertices (node, state) belong to Éloïse; she picks a
// transition, Abelard picks a direction. With ell > 0 she also picks the
// bit vector of the current node as part of the same move.
struct TreeGame {
  ParityArena arena;
  std::size_t root = 0;
  std::map<std::size_t, std::pair<Node, std::size_t>> main;  // vertex -> (node, state)
  std::map<std::size_t, Symbol> chosen_label;                // move vertex -> marked label
};

inline TreeGame build_tree_game(const ParityTreeAutomaton& aut, const PartialTree& t, std::size_t initial,
                                std::size_t ell = 0, BottomPolicy bottoms = BottomPolicy::reject) {
  aut.validate();
  if (!t.well_formed() || t.empty()) throw ArityMismatch("tree domain is not prefix closed");
  detail::TransitionIndex idx(aut);
  TreeGame g;
  const unsigned top = aut.max_color();
  std::optional<std::size_t> sink;
  auto losing_sink = [&]() {
    if (!sink) {
      sink = g.arena.add_vertex(Player::abelard, 1, "lose");
      g.arena.add_edge(*sink, *sink);
    }
    return *sink;
  };
  std::map<std::pair<Node, std::size_t>, std::size_t> ids;
  std::vector<std::pair<Node, std::size_t>> todo;
  auto vertex = [&](const Node& u, std::size_t q) {
    auto it = ids.find({u, q});
    if (it != ids.end()) return it->second;
    std::size_t v = g.arena.add_vertex(Player::eloise, aut.colors[q], node_to_string(u) + "/" + aut.states[q]);
    ids[{u, q}] = v;
    g.main[v] = {u, q};
    todo.emplace_back(u, q);
    return v;
  };
  std::vector<std::vector<bool>> variants;
  for (std::size_t m = 0; m < (std::size_t{1} << ell); ++m) {
    std::vector<bool> bits(ell);
    for (std::size_t i = 0; i < ell; ++i) bits[i] = (m >> (ell - 1 - i)) & 1;
    variants.push_back(bits);
  }
  g.root = vertex(Node{}, initial);
  while (!todo.empty()) {
    auto [u, q] = todo.back();
    todo.pop_back();
    std::size_t v = ids.at({u, q});
    const Symbol& a = t.at(u);
    if (a == kBottom) {
      if (bottoms == BottomPolicy::reject) throw ArityMismatch("⊥ at node " + node_to_string(u));
      // a fresh self-looping vertex decides the play at this node
      std::size_t leaf = g.arena.add_vertex(Player::eloise, bottoms == BottomPolicy::eloise_wins ? 0 : 1,
                                            node_to_string(u) + "/" + aut.states[q] + "/⊥");
      g.arena.add_edge(leaf, leaf);
      g.arena.add_edge(v, leaf);
      continue;
    }
    std::size_t k = t.arity(u);
    if (!aut.alphabet.contains(mark_label(a, variants[0])))
      throw ArityMismatch("label '" + a + "' at " + node_to_string(u) + " not in the automaton alphabet");
    if (aut.alphabet.arity(mark_label(a, variants[0])) != k)
      throw ArityMismatch("node " + node_to_string(u) + " labelled " + a + " has " + std::to_string(k) +
                          " children");
    if (k == 0) {
      for (auto& bits : variants) {
        Symbol lab = mark_label(a, bits);
        std::size_t leaf = g.arena.add_vertex(Player::eloise, aut.acc.count({q, lab}) ? 0 : 1,
                                              node_to_string(u) + "/" + aut.states[q] + "/" + lab);
        g.arena.add_edge(leaf, leaf);
        g.arena.add_edge(v, leaf);
        g.chosen_label[leaf] = lab;
      }
      continue;
    }
    bool any = false;
    for (auto& bits : variants) {
      Symbol lab = mark_label(a, bits);
      for (auto ti : idx.from(q, lab)) {
        const PtaTransition& tr = idx[ti];
        std::size_t mv = g.arena.add_vertex(Player::abelard, top,
                                            node_to_string(u) + "/" + aut.states[q] + "/#" + std::to_string(ti));
        g.chosen_label[mv] = lab;
        g.arena.add_edge(v, mv);
        for (std::size_t i = 0; i < k; ++i) g.arena.add_edge(mv, vertex(child(u, static_cast<unsigned>(i + 1)), tr.to[i]));
        any = true;
      }
    }
    if (!any) g.arena.add_edge(v, losing_sink());
  }
  return g;
}

inline ParityArena acceptance_game(const ParityTreeAutomaton& aut, const PartialTree& t) {
  return build_tree_game(aut, t, aut.initial).arena;
}

inline bool finite_accepts_from(const ParityTreeAutomaton& aut, const PartialTree& t, std::size_t q) {
  auto g = build_tree_game(aut, t, q);
  return solve(g.arena).eloise_wins[g.root];
}

inline bool finite_accepts(const ParityTreeAutomaton& aut, const PartialTree& t) {
  return finite_accepts_from(aut, t, aut.initial);
}

enum class Verdict { yes, no, unknown };

inline std::string to_string(Verdict v) {
  return v == Verdict::yes ? "yes" : v == Verdict::no ? "no" : "unknown";
}

// Acceptance with ⊥ leaves counted as won by Éloïse (optimistic) or by
// Abelard (pessimistic).
inline bool accepts_with_bottoms(const ParityTreeAutomaton& aut, const PartialTree& t, bool optimistic) {
  auto g = build_tree_game(aut, t, aut.initial, 0,
                           optimistic ? BottomPolicy::eloise_wins : BottomPolicy::abelard_wins);
  return solve(g.arena).eloise_wins[g.root];
}

inline Verdict bounded_accepts(const ParityTreeAutomaton& aut, const PartialTree& t) {
  if (accepts_with_bottoms(aut, t, false)) return Verdict::yes;
  if (!accepts_with_bottoms(aut, t, true)) return Verdict::no;
  return Verdict::unknown;
}

// Finds bit vectors for every node so that the automaton (over Σ × {0,1}^ℓ)
// accepts the marked tree. The marking is read off Éloïse's positional
// winning strategy; nullopt when she loses.
inline std::optional<PartialTree> select_marking(const ParityTreeAutomaton& aut, const PartialTree& t,
                                                 std::size_t ell) {
  auto g = build_tree_game(aut, t, aut.initial, ell);
  auto sol = solve(g.arena);
  if (!sol.eloise_wins[g.root]) return std::nullopt;
  PartialTree out;
  std::vector<std::size_t> todo{g.root};
  while (!todo.empty()) {
    std::size_t v = todo.back();
    todo.pop_back();
    const Node& u = g.main.at(v).first;
    std::size_t mv = sol.strategy_eloise.at(v);
    out.set(u, g.chosen_label.at(mv));
    for (auto w : g.arena.successors(mv))
      if (g.main.count(w)) todo.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------- pair marks

// Labels over Σ × 2^{1,2}: "a{}", "a{1}", "a{2}", "a{1,2}".
inline Symbol pair_label(const Symbol& a, bool first, bool second) {
  std::string m = first && second ? "1,2" : first ? "1" : second ? "2" : "";
  return a + "{" + m + "}";
}

inline RankedAlphabet pair_alphabet(const RankedAlphabet& sigma) {
  RankedAlphabet out;
  for (auto& a : sigma.symbols())
    for (int m = 0; m < 4; ++m) out.add(pair_label(a, m & 1, m & 2), sigma.arity(a));
  return out;
}

// t[u, v]: u carries mark 1 and v mark 2; a missing node means no mark.
inline PartialTree pair_mark(const PartialTree& t, const std::optional<Node>& u, const std::optional<Node>& v) {
  if (u && !t.contains(*u)) throw NodeOutOfDomain("node " + node_to_string(*u) + " not in tree");
  if (v && !t.contains(*v)) throw NodeOutOfDomain("node " + node_to_string(*v) + " not in tree");
  PartialTree out;
  for (auto& [w, a] : t)
    out.set(w, a == kBottom ? a : pair_label(a, u && *u == w, v && *v == w));
  return out;
}

// ---------------------------------------------------------------- annotation

enum class Pointer { none, down, up, here };

inline const char* to_string(Pointer p) {
  switch (p) {
    case Pointer::none: return "⊥";
    case Pointer::down: return "↓";
    case Pointer::up: return "↑";
    case Pointer::here: return "↺";
  }
  return "?";
}

using DirState = std::pair<unsigned, std::size_t>;  // (direction, state)

struct DirectionInfo {
  Pointer pointer = Pointer::none;
  std::set<std::size_t> accepting;  // R: states accepting the unmarked subtree here
  std::set<DirState> children;      // S: (d, q) with q accepting the unmarked subtree at child d
  std::set<DirState> below;         // T: (d, q) with q accepting the subtree at child d marked 2 somewhere
  std::set<std::size_t> context;    // states reachable here by a partial run of the unmarked tree

  friend bool operator==(const DirectionInfo&, const DirectionInfo&) = default;
};

struct AnnotatedLabel {
  Symbol symbol;
  unsigned up = 0;  // direction from the parent; 0 at the root
  std::size_t arity = 0;
  std::vector<DirectionInfo> dirs;  // one per automaton

  friend bool operator==(const AnnotatedLabel&, const AnnotatedLabel&) = default;
};

using AnnotatedTree = LabelledTree<AnnotatedLabel>;

namespace detail {

inline std::set<std::size_t> accepting_states(const ParityTreeAutomaton& b, const PartialTree& t) {
  std::set<std::size_t> out;
  for (std::size_t q = 0; q < b.states.size(); ++q)
    if (finite_accepts_from(b, t, q)) out.insert(q);
  return out;
}

// Tries every transition (or leaf entry) from q on the given label whose
// child states pass the filter; calls f with the target vector.
template <class Filter, class F>
void for_each_run_step(const ParityTreeAutomaton& b, const TransitionIndex& idx, std::size_t q, const Symbol& label,
                       std::size_t arity, Filter filter, F f) {
  if (arity == 0) {
    if (b.acc.count({q, label})) f(std::vector<std::size_t>{});
    return;
  }
  for (auto ti : idx.from(q, label)) {
    const auto& to = idx[ti].to;
    if (filter(to)) f(to);
  }
}

}  // namespace detail

// Decorates every node with, for each automaton B (over pair labels) that
// defines a functional relation φ(x, y), where the φ-partner of the node is,
// and which states of B accept the relevant unmarked or marked subtrees.
inline AnnotatedTree annotate_tree(const PartialTree& t, const std::vector<ParityTreeAutomaton>& automata) {
  if (!t.well_formed() || t.empty()) throw ArityMismatch("tree domain is not prefix closed");
  std::map<Node, AnnotatedLabel> labels;
  for (auto& [u, a] : t) {
    AnnotatedLabel& l = labels[u];
    l.symbol = a;
    l.up = u.empty() ? 0 : u.back();
    l.arity = t.arity(u);
    l.dirs.resize(automata.size());
  }
  for (std::size_t ell = 0; ell < automata.size(); ++ell) {
    const auto& b = automata[ell];
    b.validate();
    detail::TransitionIndex idx(b);
    PartialTree plain = pair_mark(t, std::nullopt, std::nullopt);
    std::map<Node, std::set<std::size_t>> r;
    for (auto& [u, a] : t) r[u] = detail::accepting_states(b, subtree(plain, u));
    std::map<Node, std::set<std::size_t>> below;  // states accepting subtree(u) with a 2-mark inside
    for (auto& [u, a] : t) {
      std::set<std::size_t> qs;
      for (auto& [v, x] : t) {
        if (!is_prefix(u, v)) continue;
        auto marked = subtree(pair_mark(t, std::nullopt, v), u);
        for (auto q : detail::accepting_states(b, marked)) qs.insert(q);
      }
      below[u] = qs;
    }
    for (auto& [u, a] : t) {
      std::vector<Node> partners;
      for (auto& [v, x] : t)
        if (finite_accepts(b, pair_mark(t, u, v))) partners.push_back(v);
      DirectionInfo& info = labels[u].dirs[ell];
      if (partners.size() > 1)
        throw NotFunctional("automaton " + std::to_string(ell + 1) + " relates " + node_to_string(u) +
                            " to several nodes");
      if (partners.empty())
        info.pointer = Pointer::none;
      else if (partners[0] == u)
        info.pointer = Pointer::here;
      else if (is_prefix(u, partners[0]))
        info.pointer = Pointer::down;
      else
        info.pointer = Pointer::up;
      info.accepting = r[u];
      std::size_t k = t.arity(u);
      for (unsigned d = 1; d <= k; ++d) {
        for (auto q : r[child(u, d)]) info.children.insert({d, q});
        for (auto q : below[child(u, d)]) info.below.insert({d, q});
      }
    }
    // contexts, top down
    std::map<Node, std::set<std::size_t>> ctx;
    ctx[Node{}] = {b.initial};
    for (auto& [u, a] : t) {
      std::size_t k = t.arity(u);
      Symbol lab = pair_label(a, false, false);
      for (auto p : ctx[u])
        for (unsigned d = 1; d <= k; ++d)
          detail::for_each_run_step(
              b, idx, p, lab, k,
              [&](const std::vector<std::size_t>& to) {
                for (unsigned i = 1; i <= k; ++i)
                  if (i != d && !r[child(u, i)].count(to[i - 1])) return false;
                return true;
              },
              [&](const std::vector<std::size_t>& to) { ctx[child(u, d)].insert(to[d - 1]); });
      labels[u].dirs[ell].context = ctx[u];
    }
  }
  AnnotatedTree out;
  for (auto& [u, l] : labels) out.set(u, std::move(l));
  return out;
}

// ---------------------------------------------------------------- text format

inline ParityTreeAutomaton parse_pta(std::string_view text) {
  ParityTreeAutomaton a;
  auto all = read_sexps(text);
  std::map<Symbol, std::size_t> ids;
  auto state = [&](const Sexp& e) {
    auto it = ids.find(expect_atom(e, "state"));
    if (it == ids.end()) throw ParseError("unknown state '" + e.atom + "'", e.line);
    return it->second;
  };
  for (auto& l : all) {
    std::string h = l.head();
    if (h == "alphabet") {
      for (std::size_t i = 1; i < l.size(); ++i) {
        const Sexp& d = l[i];
        if (!d.is_list() || d.size() != 2) throw ParseError("expected (symbol arity)", d.line);
        a.alphabet.add(expect_atom(d[0], "symbol"), static_cast<std::size_t>(parse_int(d[1], "arity")));
      }
    } else if (h == "states") {
      for (std::size_t i = 1; i < l.size(); ++i) {
        const Symbol& n = expect_atom(l[i], "state");
        if (ids.count(n)) throw ParseError("duplicate state " + n, l.line);
        ids[n] = a.add_state(n);
      }
    }
  }
  bool have_initial = false;
  for (auto& l : all) {
    std::string h = l.head();
    if (h == "alphabet" || h == "states") continue;
    if (h == "initial" && l.size() == 2) {
      a.initial = state(l[1]);
      have_initial = true;
    } else if (h == "color" && l.size() == 3) {
      long c = parse_int(l[2], "colour");
      if (c < 0) throw ParseError("negative colour", l.line);
      a.colors[state(l[1])] = static_cast<unsigned>(c);
    } else if (h == "acc" && l.size() == 3) {
      a.acc.insert({state(l[1]), expect_atom(l[2], "label")});
    } else if (l.is_list() && l.size() >= 2 && l[0].is_atom && ids.count(l[0].atom)) {
      std::vector<std::size_t> to;
      for (std::size_t i = 2; i < l.size(); ++i) to.push_back(state(l[i]));
      a.add_transition(state(l[0]), expect_atom(l[1], "label"), to);
    } else {
      throw ParseError("unrecognised line " + l.to_string(), l.line);
    }
  }
  if (!have_initial) throw ParseError("missing initial state", 1);
  try {
    a.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), 1);
  }
  return a;
}

inline std::string print_pta(const ParityTreeAutomaton& a) {
  std::string out = "(alphabet";
  for (auto& s : a.alphabet.symbols()) out += " (" + s + " " + std::to_string(a.alphabet.arity(s)) + ")";
  out += ")\n(states";
  for (auto& q : a.states) out += " " + q;
  out += ")\n(initial " + a.states[a.initial] + ")\n";
  for (std::size_t q = 0; q < a.states.size(); ++q)
    out += "(color " + a.states[q] + " " + std::to_string(a.colors[q]) + ")\n";
  for (auto& [q, l] : a.acc) out += "(acc " + a.states[q] + " " + l + ")\n";
  for (auto& t : a.transitions) {
    out += "(" + a.states[t.from] + " " + t.label;
    for (auto q : t.to) out += " " + a.states[q];
    out += ")\n";
  }
  return out;
}

}  // namespace hocpda
