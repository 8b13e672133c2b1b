#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hocpda/sexpr.hpp"

namespace hocpda {

struct DeadEnd : Error {
  using Error::Error;
};
struct TooLarge : Error {
  using Error::Error;
};

enum class Player { eloise, abelard };

inline Player opponent(Player p) { return p == Player::eloise ? Player::abelard : Player::eloise; }

// Player who wins when c is the least colour seen infinitely often.
inline Player winner_of_color(unsigned c) { return c % 2 == 0 ? Player::eloise : Player::abelard; }

using VertexSet = std::vector<std::size_t>;  // sorted vertex indices

// Min-parity game graph without dead-ends.
class ParityArena {
 public:
  std::size_t add_vertex(Player owner, unsigned color, std::string name = {}) {
    if (name.empty()) name = std::to_string(owner_.size());
    owner_.push_back(owner);
    color_.push_back(color);
    succ_.emplace_back();
    pred_.emplace_back();
    names_.push_back(std::move(name));
    return owner_.size() - 1;
  }

  void add_edge(std::size_t u, std::size_t v) {
    if (u >= size() || v >= size()) throw Error("edge endpoint out of range");
    auto& s = succ_[u];
    auto it = std::lower_bound(s.begin(), s.end(), v);
    if (it != s.end() && *it == v) return;
    s.insert(it, v);
    pred_[v].push_back(u);
  }

  std::size_t size() const { return owner_.size(); }
  Player owner(std::size_t v) const { return owner_[v]; }
  unsigned color(std::size_t v) const { return color_[v]; }
  const std::vector<std::size_t>& successors(std::size_t v) const { return succ_[v]; }
  const std::vector<std::size_t>& predecessors(std::size_t v) const { return pred_[v]; }
  const std::string& name(std::size_t v) const { return names_[v]; }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t v = 0; v < size(); ++v)
      if (names_[v] == name) return v;
    return std::nullopt;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (auto& s : succ_) n += s.size();
    return n;
  }

  void validate() const {
    for (std::size_t v = 0; v < size(); ++v)
      if (succ_[v].empty()) throw DeadEnd("vertex " + names_[v] + " has no successor");
  }

 private:
  std::vector<Player> owner_;
  std::vector<unsigned> color_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::vector<std::size_t>> pred_;
  std::vector<std::string> names_;
};

struct GameSolution {
  std::vector<bool> eloise_wins;                       // indexed by vertex
  std::map<std::size_t, std::size_t> strategy_eloise;  // on her vertices in W_E
  std::map<std::size_t, std::size_t> strategy_abelard; // on his vertices in W_A

  VertexSet region(Player p) const {
    VertexSet out;
    for (std::size_t v = 0; v < eloise_wins.size(); ++v)
      if (eloise_wins[v] == (p == Player::eloise)) out.push_back(v);
    return out;
  }
  const std::map<std::size_t, std::size_t>& strategy(Player p) const {
    return p == Player::eloise ? strategy_eloise : strategy_abelard;
  }
};

namespace detail {

using Mask = std::vector<bool>;

// Attractor for p to target inside the subgame given by mask. Strategy
// choices go to the lowest-index successor already attracted at an earlier
// round, so results do not depend on the work-list order.
inline Mask attractor(const ParityArena& g, const Mask& mask, Player p, const Mask& target,
                      std::map<std::size_t, std::size_t>* strategy) {
  const std::size_t n = g.size();
  Mask in(n, false);
  std::vector<std::size_t> rank(n, 0), missing(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask[v]) continue;
    for (auto w : g.successors(v))
      if (mask[w]) ++missing[v];
    if (target[v]) {
      in[v] = true;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    std::size_t w = queue.front();
    queue.pop_front();
    for (auto v : g.predecessors(w)) {
      if (!mask[v] || in[v]) continue;
      if (g.owner(v) == p || --missing[v] == 0) {
        in[v] = true;
        rank[v] = rank[w] + 1;
        queue.push_back(v);
      }
    }
  }
  if (strategy) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v] || target[v] || g.owner(v) != p) continue;
      for (auto w : g.successors(v))
        if (mask[w] && in[w] && rank[w] < rank[v]) {
          (*strategy)[v] = w;
          break;
        }
    }
  }
  return in;
}

struct SubSolution {
  Mask win[2];
  std::map<std::size_t, std::size_t> strat[2];
};

inline int idx(Player p) { return p == Player::eloise ? 0 : 1; }

inline SubSolution zielonka(const ParityArena& g, const Mask& mask) {
  const std::size_t n = g.size();
  SubSolution out;
  out.win[0] = out.win[1] = Mask(n, false);
  std::optional<unsigned> pmin;
  for (std::size_t v = 0; v < n; ++v)
    if (mask[v] && (!pmin || g.color(v) < *pmin)) pmin = g.color(v);
  if (!pmin) return out;
  Player alpha = winner_of_color(*pmin);
  Player beta = opponent(alpha);
  Mask top(n, false);
  for (std::size_t v = 0; v < n; ++v) top[v] = mask[v] && g.color(v) == *pmin;
  std::map<std::size_t, std::size_t> attr_strat;
  Mask a = attractor(g, mask, alpha, top, &attr_strat);
  Mask rest(n);
  for (std::size_t v = 0; v < n; ++v) rest[v] = mask[v] && !a[v];
  SubSolution sub = zielonka(g, rest);
  bool beta_empty = std::none_of(sub.win[idx(beta)].begin(), sub.win[idx(beta)].end(), [](bool b) { return b; });
  if (beta_empty) {
    out.win[idx(alpha)] = mask;
    out.strat[idx(alpha)] = sub.strat[idx(alpha)];
    for (auto& [v, w] : attr_strat) out.strat[idx(alpha)][v] = w;
    for (std::size_t v = 0; v < n; ++v) {
      if (!top[v] || g.owner(v) != alpha) continue;
      for (auto w : g.successors(v))
        if (mask[w]) {
          out.strat[idx(alpha)][v] = w;
          break;
        }
    }
    return out;
  }
  std::map<std::size_t, std::size_t> b_strat;
  Mask b = attractor(g, mask, beta, sub.win[idx(beta)], &b_strat);
  Mask rest2(n);
  for (std::size_t v = 0; v < n; ++v) rest2[v] = mask[v] && !b[v];
  SubSolution sub2 = zielonka(g, rest2);
  for (std::size_t v = 0; v < n; ++v) {
    out.win[idx(beta)][v] = b[v] || sub2.win[idx(beta)][v];
    out.win[idx(alpha)][v] = sub2.win[idx(alpha)][v];
  }
  out.strat[idx(beta)] = sub.strat[idx(beta)];
  for (auto& [v, w] : b_strat) out.strat[idx(beta)][v] = w;
  for (auto& [v, w] : sub2.strat[idx(beta)]) out.strat[idx(beta)][v] = w;
  out.strat[idx(alpha)] = sub2.strat[idx(alpha)];
  return out;
}

inline Mask to_mask(std::size_t n, const VertexSet& s) {
  Mask m(n, false);
  for (auto v : s) {
    if (v >= n) throw Error("vertex out of range");
    m[v] = true;
  }
  return m;
}

// Vertices of the graph (given by successor lists) from which some
// reachable cycle has a least colour of the given parity.
inline Mask reaches_bad_cycle(const ParityArena& g, const std::vector<std::vector<std::size_t>>& succ,
                              unsigned parity) {
  const std::size_t n = g.size();
  Mask bad_scc_vertex(n, false);
  std::vector<unsigned> colors;
  for (std::size_t v = 0; v < n; ++v) colors.push_back(g.color(v));
  std::sort(colors.begin(), colors.end());
  colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
  for (unsigned c : colors) {
    if (c % 2 != parity) continue;
    // Tarjan on vertices of colour >= c
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on(n, false);
    std::vector<std::size_t> stack;
    int counter = 0;
    std::function<void(std::size_t)> dfs = [&](std::size_t v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on[v] = true;
      for (auto w : succ[v]) {
        if (g.color(w) < c) continue;
        if (index[w] < 0) {
          dfs(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on[w] = false;
          comp.push_back(w);
        } while (w != v);
        bool nontrivial = comp.size() > 1;
        if (!nontrivial)
          for (auto x : succ[v]) nontrivial |= x == v;
        bool has_c = false;
        for (auto x : comp) has_c |= g.color(x) == c;
        if (nontrivial && has_c)
          for (auto x : comp) bad_scc_vertex[x] = true;
      }
    };
    for (std::size_t v = 0; v < n; ++v)
      if (g.color(v) >= c && index[v] < 0) dfs(v);
  }
  // backward reachability to bad SCCs
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t v = 0; v < n; ++v)
    for (auto w : succ[v]) pred[w].push_back(v);
  Mask out = bad_scc_vertex;
  std::vector<std::size_t> todo;
  for (std::size_t v = 0; v < n; ++v)
    if (out[v]) todo.push_back(v);
  while (!todo.empty()) {
    auto w = todo.back();
    todo.pop_back();
    for (auto v : pred[w])
      if (!out[v]) {
        out[v] = true;
        todo.push_back(v);
      }
  }
  return out;
}

// Vertices won by p with some positional strategy, by enumeration.
inline Mask brute_force_region(const ParityArena& g, Player p) {
  const std::size_t n = g.size();
  std::vector<std::size_t> mine;
  for (std::size_t v = 0; v < n; ++v)
    if (g.owner(v) == p) mine.push_back(v);
  std::vector<std::size_t> choice(mine.size(), 0);
  Mask won(n, false);
  unsigned bad_parity = p == Player::eloise ? 1 : 0;
  for (;;) {
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t v = 0; v < n; ++v) succ[v] = g.successors(v);
    for (std::size_t i = 0; i < mine.size(); ++i) succ[mine[i]] = {g.successors(mine[i])[choice[i]]};
    Mask bad = reaches_bad_cycle(g, succ, bad_parity);
    for (std::size_t v = 0; v < n; ++v)
      if (!bad[v]) won[v] = true;
    std::size_t i = 0;
    while (i < mine.size() && ++choice[i] == g.successors(mine[i]).size()) choice[i++] = 0;
    if (i == mine.size()) break;
  }
  return won;
}

}  // namespace detail

// Vertices from which p can force a visit to target.
inline VertexSet attractor(const ParityArena& g, Player p, const VertexSet& target) {
  detail::Mask all(g.size(), true);
  auto m = detail::attractor(g, all, p, detail::to_mask(g.size(), target), nullptr);
  VertexSet out;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (m[v]) out.push_back(v);
  return out;
}

// Zielonka's recursive algorithm with positional strategies.
inline GameSolution solve(const ParityArena& g) {
  g.validate();
  auto sub = detail::zielonka(g, detail::Mask(g.size(), true));
  GameSolution out;
  out.eloise_wins = sub.win[0];
  out.strategy_eloise = std::move(sub.strat[0]);
  out.strategy_abelard = std::move(sub.strat[1]);
  return out;
}

struct Regions {
  VertexSet eloise;
  VertexSet abelard;
};

inline constexpr std::size_t kBruteForceLimit = 12;

// Winning regions by enumerating positional strategies of each player.
inline Regions brute_force_solve(const ParityArena& g) {
  g.validate();
  if (g.size() > kBruteForceLimit)
    throw TooLarge("brute force limited to " + std::to_string(kBruteForceLimit) + " vertices");
  Regions r;
  auto we = detail::brute_force_region(g, Player::eloise);
  auto wa = detail::brute_force_region(g, Player::abelard);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (we[v]) r.eloise.push_back(v);
    if (wa[v]) r.abelard.push_back(v);
  }
  return r;
}

// Checks that the strategy of p is closed in W_p and wins every play.
inline bool verify_strategy(const ParityArena& g, const GameSolution& sol, Player p) {
  const std::size_t n = g.size();
  detail::Mask region(n);
  for (std::size_t v = 0; v < n; ++v) region[v] = sol.eloise_wins[v] == (p == Player::eloise);
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!region[v]) continue;
    if (g.owner(v) == p) {
      auto it = sol.strategy(p).find(v);
      if (it == sol.strategy(p).end()) return false;
      if (!std::binary_search(g.successors(v).begin(), g.successors(v).end(), it->second)) return false;
      if (!region[it->second]) return false;
      succ[v] = {it->second};
    } else {
      for (auto w : g.successors(v)) {
        if (!region[w]) return false;
        succ[v].push_back(w);
      }
    }
  }
  auto bad = detail::reaches_bad_cycle(g, succ, p == Player::eloise ? 1 : 0);
  for (std::size_t v = 0; v < n; ++v)
    if (region[v] && bad[v]) return false;
  return true;
}

// ---------------------------------------------------------------- text format

// (vertex id owner color) with owner E or A, and (edge u v).
inline ParityArena parse_arena(std::string_view text) {
  ParityArena g;
  std::map<std::string, std::size_t> ids;
  std::vector<std::pair<const Sexp*, const Sexp*>> edges;
  auto all = read_sexps(text);
  for (auto& l : all) {
    std::string h = l.head();
    if (h == "vertex" && l.size() == 4) {
      std::string id = expect_atom(l[1], "vertex id");
      std::string o = expect_atom(l[2], "owner");
      Player p;
      if (o == "E" || o == "eloise")
        p = Player::eloise;
      else if (o == "A" || o == "abelard")
        p = Player::abelard;
      else
        throw ParseError("owner must be E or A", l.line);
      long c = parse_int(l[3], "colour");
      if (c < 0) throw ParseError("negative colour", l.line);
      if (ids.count(id)) throw ParseError("duplicate vertex " + id, l.line);
      ids[id] = g.add_vertex(p, static_cast<unsigned>(c), id);
    } else if (h == "edge" && l.size() == 3) {
      edges.emplace_back(&l[1], &l[2]);
    } else {
      throw ParseError("unrecognised line " + l.to_string(), l.line);
    }
  }
  for (auto [a, b] : edges) {
    auto u = ids.find(expect_atom(*a, "vertex")), v = ids.find(expect_atom(*b, "vertex"));
    if (u == ids.end() || v == ids.end()) throw ParseError("edge to unknown vertex", a->line);
    g.add_edge(u->second, v->second);
  }
  g.validate();
  return g;
}

inline std::string print_arena(const ParityArena& g) {
  std::string out;
  for (std::size_t v = 0; v < g.size(); ++v)
    out += "(vertex " + g.name(v) + (g.owner(v) == Player::eloise ? " E " : " A ") +
           std::to_string(g.color(v)) + ")\n";
  for (std::size_t v = 0; v < g.size(); ++v)
    for (auto w : g.successors(v)) out += "(edge " + g.name(v) + " " + g.name(w) + ")\n";
  return out;
}

inline std::string print_solution(const ParityArena& g, const GameSolution& s) {
  std::string out;
  for (Player p : {Player::eloise, Player::abelard}) {
    out += p == Player::eloise ? "W_E:" : "W_A:";
    for (auto v : s.region(p)) out += " " + g.name(v);
    out += "\n";
  }
  for (Player p : {Player::eloise, Player::abelard}) {
    out += p == Player::eloise ? "strategy E:" : "strategy A:";
    for (auto& [v, w] : s.strategy(p)) out += " (" + g.name(v) + " " + g.name(w) + ")";
    out += "\n";
  }
  return out;
}

}  // namespace hocpda
