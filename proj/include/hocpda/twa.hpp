#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hocpda/core.hpp"
#include "hocpda/treeauto.hpp"

namespace hocpda {

struct TwaMove {
  enum class Kind { stay, up, down };
  Kind kind = Kind::stay;
  unsigned dir = 0;  // for down

  static TwaMove stay() { return {}; }
  static TwaMove up() { return {Kind::up, 0}; }
  static TwaMove down(unsigned d) { return {Kind::down, d}; }

  std::string to_string() const {
    return kind == Kind::stay ? "stay" : kind == Kind::up ? "up" : std::to_string(dir);
  }
  friend bool operator==(const TwaMove&, const TwaMove&) = default;
};

struct TwaResult {
  enum class Outcome { accepted, rejected, exhausted };
  Outcome outcome = Outcome::rejected;
  Node at;  // node where the run stopped
  std::size_t steps = 0;

  std::string to_string() const {
    switch (outcome) {
      case Outcome::accepted: return "accepted-at " + node_to_string(at);
      case Outcome::rejected: return "rejected";
      case Outcome::exhausted: return "exhausted";
    }
    return "?";
  }
};

inline std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

// Runs a deterministic walker. W provides State, initial(), is_final(s),
// step(s, label) -> optional<pair<State, TwaMove>> and state_count().
template <class W, class Label>
TwaResult twa_run(const W& w, const LabelledTree<Label>& t, const Node& start,
                  std::optional<std::size_t> fuel = std::nullopt) {
  if (!t.contains(start)) throw NodeOutOfDomain("node " + node_to_string(start) + " not in tree");
  std::size_t budget = fuel ? *fuel : saturating_mul(saturating_mul(4, t.size()), w.state_count());
  auto s = w.initial();
  Node u = start;
  TwaResult r;
  for (;;) {
    r.at = u;
    if (w.is_final(s)) {
      r.outcome = TwaResult::Outcome::accepted;
      return r;
    }
    if (r.steps == budget) {
      r.outcome = TwaResult::Outcome::exhausted;
      return r;
    }
    auto next = w.step(s, t.at(u));
    if (!next) {
      r.outcome = TwaResult::Outcome::rejected;
      return r;
    }
    ++r.steps;
    s = next->first;
    const TwaMove& m = next->second;
    if (m.kind == TwaMove::Kind::up) {
      if (u.empty()) {
        r.outcome = TwaResult::Outcome::rejected;
        return r;
      }
      u = parent(u);
    } else if (m.kind == TwaMove::Kind::down) {
      Node v = child(u, m.dir);
      if (!t.contains(v)) {
        r.outcome = TwaResult::Outcome::rejected;
        return r;
      }
      u = v;
    }
  }
}

// Deterministic TWA given by a table over plain symbols.
struct TreeWalkingAutomaton {
  using State = std::size_t;

  std::vector<Symbol> states;
  std::size_t start = 0;
  std::set<std::size_t> finals;
  std::map<std::pair<std::size_t, Symbol>, std::pair<std::size_t, TwaMove>> delta;

  std::size_t add_state(const Symbol& name) {
    states.push_back(name);
    return states.size() - 1;
  }
  std::size_t state(const Symbol& name) const {
    for (std::size_t q = 0; q < states.size(); ++q)
      if (states[q] == name) return q;
    throw Error("unknown state '" + name + "'");
  }
  void add(std::size_t from, const Symbol& label, std::size_t to, TwaMove move) {
    if (!delta.emplace(std::make_pair(from, label), std::make_pair(to, move)).second)
      throw Error("second transition for (" + states[from] + ", " + label + ")");
  }

  State initial() const { return start; }
  bool is_final(State s) const { return finals.count(s) > 0; }
  std::size_t state_count() const { return states.size(); }
  std::optional<std::pair<State, TwaMove>> step(State s, const Symbol& label) const {
    auto it = delta.find({s, label});
    if (it == delta.end()) return std::nullopt;
    return it->second;
  }
};

// Walker given by a transition function, over any label type.
template <class Label>
struct FunctionTwa {
  using State = std::size_t;
  std::size_t states = 1;
  std::size_t start = 0;
  std::set<std::size_t> finals;
  std::function<std::optional<std::pair<State, TwaMove>>(State, const Label&)> delta;

  State initial() const { return start; }
  bool is_final(State s) const { return finals.count(s) > 0; }
  std::size_t state_count() const { return states; }
  std::optional<std::pair<State, TwaMove>> step(State s, const Label& l) const { return delta(s, l); }
};

// Walks the annotated tree from x to the unique y with B accepting t[x, y].
// Phase one climbs with the set of states that accept the subtree below
// carrying mark 1, phase two descends with the states compatible with the
// context above and with a 2-mark below.
class PairWalker {
 public:
  struct State {
    enum class Phase { init, up, down, done };
    Phase phase = Phase::init;
    std::set<std::size_t> qs;
    unsigned from = 0;  // up phase: direction just climbed from

    friend bool operator==(const State&, const State&) = default;
  };

  PairWalker(const ParityTreeAutomaton& b, std::size_t ell) : b_(b), idx_(b), ell_(ell) {}

  State initial() const { return {}; }
  bool is_final(const State& s) const { return s.phase == State::Phase::done; }
  std::size_t state_count() const {
    std::size_t subsets = b_.states.size() >= 63 ? std::numeric_limits<std::size_t>::max()
                                                 : std::size_t{1} << b_.states.size();
    std::size_t m = b_.alphabet.max_arity() + 1;
    return saturating_mul(saturating_mul(2, subsets), m) + 2;
  }

  std::optional<std::pair<State, TwaMove>> step(const State& s, const AnnotatedLabel& l) const {
    const DirectionInfo& info = l.dirs.at(ell_);
    switch (s.phase) {
      case State::Phase::init: return start(l, info);
      case State::Phase::up: return climb(s, l, info);
      case State::Phase::down: return descend(s, l, info);
      case State::Phase::done: return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  using Filter = std::function<bool(unsigned, std::size_t)>;

  bool child_accepts(const DirectionInfo& info, unsigned d, std::size_t q) const {
    return info.children.count({d, q}) > 0;
  }
  bool child_marked(const DirectionInfo& info, unsigned d, std::size_t q) const {
    return info.below.count({d, q}) > 0;
  }

  // States q of `from` with a run step on (a, marks) whose child states pass ok.
  bool some_step(const std::set<std::size_t>& from, const AnnotatedLabel& l, bool m1, bool m2,
                 const Filter& ok) const {
    Symbol lab = pair_label(l.symbol, m1, m2);
    for (auto q : from) {
      bool found = false;
      detail::for_each_run_step(
          b_, idx_, q, lab, l.arity,
          [&](const std::vector<std::size_t>& to) {
            for (unsigned i = 1; i <= to.size(); ++i)
              if (!ok(i, to[i - 1])) return false;
            return true;
          },
          [&](const std::vector<std::size_t>&) { found = true; });
      if (found) return true;
    }
    return false;
  }

  // Child states at direction d over run steps from `from` on (a, marks).
  std::set<std::size_t> targets(const std::set<std::size_t>& from, const AnnotatedLabel& l, bool m1, bool m2,
                                unsigned d, const Filter& ok) const {
    std::set<std::size_t> out;
    Symbol lab = pair_label(l.symbol, m1, m2);
    for (auto q : from)
      detail::for_each_run_step(
          b_, idx_, q, lab, l.arity,
          [&](const std::vector<std::size_t>& to) {
            for (unsigned i = 1; i <= to.size(); ++i)
              if (!ok(i, to[i - 1])) return false;
            return true;
          },
          [&](const std::vector<std::size_t>& to) { out.insert(to[d - 1]); });
    return out;
  }

  std::set<std::size_t> sources(const AnnotatedLabel& l, bool m1, bool m2, const Filter& ok) const {
    std::set<std::size_t> out;
    for (std::size_t q = 0; q < b_.states.size(); ++q)
      if (some_step({q}, l, m1, m2, ok)) out.insert(q);
    return out;
  }

  std::optional<std::pair<State, TwaMove>> go_down(const std::set<std::size_t>& from, const AnnotatedLabel& l,
                                                   const DirectionInfo& info, bool m1,
                                                   std::optional<std::pair<unsigned, std::set<std::size_t>>> fixed,
                                                   unsigned skip) const {
    for (unsigned d = 1; d <= l.arity; ++d) {
      if (d == skip) continue;
      auto ys = targets(from, l, m1, false, d, [&](unsigned i, std::size_t q) {
        if (i == d) return child_marked(info, d, q);
        if (fixed && i == fixed->first) return fixed->second.count(q) > 0;
        return child_accepts(info, i, q);
      });
      if (!ys.empty()) return std::make_pair(State{State::Phase::down, ys, 0}, TwaMove::down(d));
    }
    return std::nullopt;
  }

  std::optional<std::pair<State, TwaMove>> start(const AnnotatedLabel& l, const DirectionInfo& info) const {
    switch (info.pointer) {
      case Pointer::here: return std::make_pair(State{State::Phase::done, {}, 0}, TwaMove::stay());
      case Pointer::none: return std::nullopt;
      case Pointer::down: return go_down(info.context, l, info, true, std::nullopt, 0);
      case Pointer::up: {
        if (l.up == 0) return std::nullopt;
        auto xs = sources(l, true, false, [&](unsigned i, std::size_t q) { return child_accepts(info, i, q); });
        if (xs.empty()) return std::nullopt;
        return std::make_pair(State{State::Phase::up, xs, l.up}, TwaMove::up());
      }
    }
    return std::nullopt;
  }

  std::optional<std::pair<State, TwaMove>> climb(const State& s, const AnnotatedLabel& l,
                                                 const DirectionInfo& info) const {
    unsigned d = s.from;
    auto below = [&](unsigned i, std::size_t q) { return i == d ? s.qs.count(q) > 0 : child_accepts(info, i, q); };
    if (some_step(info.context, l, false, true, below))
      return std::make_pair(State{State::Phase::done, {}, 0}, TwaMove::stay());
    if (auto down = go_down(info.context, l, info, false, std::make_pair(d, s.qs), d)) return down;
    if (l.up == 0) return std::nullopt;
    auto xs = sources(l, false, false, below);
    if (xs.empty()) return std::nullopt;
    return std::make_pair(State{State::Phase::up, xs, l.up}, TwaMove::up());
  }

  std::optional<std::pair<State, TwaMove>> descend(const State& s, const AnnotatedLabel& l,
                                                   const DirectionInfo& info) const {
    if (some_step(s.qs, l, false, true, [&](unsigned i, std::size_t q) { return child_accepts(info, i, q); }))
      return std::make_pair(State{State::Phase::done, {}, 0}, TwaMove::stay());
    return go_down(s.qs, l, info, false, std::nullopt, 0);
  }

  const ParityTreeAutomaton& b_;
  detail::TransitionIndex idx_;
  std::size_t ell_;
};

// ---------------------------------------------------------------- text format

inline TwaMove parse_move(const Sexp& e) {
  const std::string& m = expect_atom(e, "move");
  if (m == "stay") return TwaMove::stay();
  if (m == "up") return TwaMove::up();
  long d = parse_int(e, "move");
  if (d < 1) throw ParseError("directions start at 1", e.line);
  return TwaMove::down(static_cast<unsigned>(d));
}

// (states p q) (initial p) (final q) then transitions (p a q move).
inline TreeWalkingAutomaton parse_twa(std::string_view text) {
  TreeWalkingAutomaton w;
  auto all = read_sexps(text);
  std::map<Symbol, std::size_t> ids;
  for (auto& l : all)
    if (l.head() == "states")
      for (std::size_t i = 1; i < l.size(); ++i) {
        const Symbol& n = expect_atom(l[i], "state");
        if (ids.count(n)) throw ParseError("duplicate state " + n, l.line);
        ids[n] = w.add_state(n);
      }
  auto state = [&](const Sexp& e) {
    auto it = ids.find(expect_atom(e, "state"));
    if (it == ids.end()) throw ParseError("unknown state '" + e.atom + "'", e.line);
    return it->second;
  };
  bool have_initial = false;
  for (auto& l : all) {
    std::string h = l.head();
    if (h == "states") continue;
    if (h == "initial" && l.size() == 2) {
      w.start = state(l[1]);
      have_initial = true;
    } else if (h == "final") {
      for (std::size_t i = 1; i < l.size(); ++i) w.finals.insert(state(l[i]));
    } else if (l.is_list() && l.size() == 4 && l[0].is_atom && ids.count(l[0].atom)) {
      try {
        w.add(state(l[0]), expect_atom(l[1], "label"), state(l[2]), parse_move(l[3]));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), l.line);
      }
    } else {
      throw ParseError("unrecognised line " + l.to_string(), l.line);
    }
  }
  if (!have_initial) throw ParseError("missing initial state", 1);
  return w;
}

inline std::string print_twa(const TreeWalkingAutomaton& w) {
  std::string out = "(states";
  for (auto& q : w.states) out += " " + q;
  out += ")\n(initial " + w.states[w.start] + ")\n(final";
  for (auto q : w.finals) out += " " + w.states[q];
  out += ")\n";
  for (auto& [key, val] : w.delta)
    out += "(" + w.states[key.first] + " " + key.second + " " + w.states[val.first] + " " + val.second.to_string() +
           ")\n";
  return out;
}

}  // namespace hocpda
