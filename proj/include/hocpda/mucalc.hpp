#pragma once

#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hocpda/core.hpp"
#include "hocpda/cpda.hpp"
#include "hocpda/hors.hpp"

namespace hocpda {

struct NonPositiveFixpoint : Error {
  using Error::Error;
};

class Formula {
 public:
  enum class Kind { tt, ff, prop, var, neg, conj, disj, dia, box, mu, nu };

  static Formula top() { return make(Kind::tt, "", "", {}); }
  static Formula bottom() { return make(Kind::ff, "", "", {}); }
  static Formula prop(const Symbol& a) { return make(Kind::prop, a, "", {}); }
  static Formula var(const Symbol& x) { return make(Kind::var, x, "", {}); }
  static Formula negate(const Formula& f) { return make(Kind::neg, "", "", {f}); }
  static Formula conj(const Formula& a, const Formula& b) { return make(Kind::conj, "", "", {a, b}); }
  static Formula disj(const Formula& a, const Formula& b) { return make(Kind::disj, "", "", {a, b}); }
  static Formula dia(const Symbol& d, const Formula& f) { return make(Kind::dia, "", d, {f}); }
  static Formula box(const Symbol& d, const Formula& f) { return make(Kind::box, "", d, {f}); }
  static Formula mu(const Symbol& x, const Formula& f) { return make(Kind::mu, x, "", {f}); }
  static Formula nu(const Symbol& x, const Formula& f) { return make(Kind::nu, x, "", {f}); }

  Kind kind() const { return rep_->kind; }
  // label of a proposition, name of a variable or of the bound variable
  const Symbol& name() const { return rep_->name; }
  const Symbol& dir() const { return rep_->dir; }
  const Formula& sub(std::size_t i = 0) const { return rep_->subs.at(i); }

  bool is_fixpoint() const { return kind() == Kind::mu || kind() == Kind::nu; }

  std::string to_string() const {
    switch (kind()) {
      case Kind::tt: return "true";
      case Kind::ff: return "false";
      case Kind::prop: return "p" + name();
      case Kind::var: return name();
      case Kind::neg: return "~" + sub().to_string();
      case Kind::conj: return "(" + sub(0).to_string() + " & " + sub(1).to_string() + ")";
      case Kind::disj: return "(" + sub(0).to_string() + " | " + sub(1).to_string() + ")";
      case Kind::dia: return "<" + dir() + ">" + sub().to_string();
      case Kind::box: return "[" + dir() + "]" + sub().to_string();
      case Kind::mu: return "(mu " + name() + " . " + sub().to_string() + ")";
      case Kind::nu: return "(nu " + name() + " . " + sub().to_string() + ")";
    }
    return "?";
  }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.rep_ == b.rep_) return true;
    return a.kind() == b.kind() && a.name() == b.name() && a.dir() == b.dir() && a.rep_->subs == b.rep_->subs;
  }

 private:
  struct Rep {
    Kind kind;
    Symbol name, dir;
    std::vector<Formula> subs;
  };
  static Formula make(Kind k, Symbol name, Symbol dir, std::vector<Formula> subs) {
    Formula f;
    f.rep_ = std::make_shared<const Rep>(Rep{k, std::move(name), std::move(dir), std::move(subs)});
    return f;
  }
  std::shared_ptr<const Rep> rep_;
};

// ---------------------------------------------------------------- parsing

namespace detail {

class MuParser {
 public:
  explicit MuParser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = disjunction();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  static bool special(char c) {
    return c == '(' || c == ')' || c == '&' || c == '|' || c == '<' || c == '>' || c == '[' || c == ']' ||
           c == '.' || c == ';';
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) line += text_[i] == '\n';
    throw ParseError(msg, line);
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  std::string word() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !special(text_[pos_]) && !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (eat('|')) f = Formula::disj(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (eat('&')) f = Formula::conj(f, unary());
    return f;
  }

  Formula unary() {
    skip();
    if (eat('~')) return Formula::negate(unary());
    if (eat('<')) {
      std::string d = word();
      expect('>');
      return Formula::dia(d, unary());
    }
    if (eat('[')) {
      std::string d = word();
      expect(']');
      return Formula::box(d, unary());
    }
    if (eat('(')) {
      Formula f = disjunction();
      expect(')');
      return f;
    }
    std::string w = word();
    if (w == "mu" || w == "nu") {
      std::string x = word();
      if (!std::isupper(static_cast<unsigned char>(x[0]))) fail("fixpoint variables start with a capital letter");
      expect('.');
      Formula body = disjunction();
      return w == "mu" ? Formula::mu(x, body) : Formula::nu(x, body);
    }
    if (w == "true") return Formula::top();
    if (w == "false") return Formula::bottom();
    if (std::isupper(static_cast<unsigned char>(w[0]))) return Formula::var(w);
    if (w[0] == 'p' && w.size() > 1) return Formula::prop(w.substr(1));
    fail("unknown token '" + w + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void check_positive(const Formula& f, bool negated, std::map<Symbol, bool>& binder_parity,
                           std::set<Symbol>& free) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::tt:
    case K::ff:
    case K::prop: return;
    case K::var: {
      auto it = binder_parity.find(f.name());
      if (it == binder_parity.end()) {
        free.insert(f.name());
        return;
      }
      if (it->second != negated)
        throw NonPositiveFixpoint("variable " + f.name() + " occurs under an odd number of negations");
      return;
    }
    case K::neg: check_positive(f.sub(), !negated, binder_parity, free); return;
    case K::conj:
    case K::disj:
      check_positive(f.sub(0), negated, binder_parity, free);
      check_positive(f.sub(1), negated, binder_parity, free);
      return;
    case K::dia:
    case K::box: check_positive(f.sub(), negated, binder_parity, free); return;
    case K::mu:
    case K::nu: {
      auto saved = binder_parity.find(f.name()) == binder_parity.end()
                       ? std::optional<bool>()
                       : std::optional<bool>(binder_parity[f.name()]);
      binder_parity[f.name()] = negated;
      check_positive(f.sub(), negated, binder_parity, free);
      if (saved)
        binder_parity[f.name()] = *saved;
      else
        binder_parity.erase(f.name());
      return;
    }
  }
}

}  // namespace detail

// Throws NonPositiveFixpoint; returns the free variables.
inline std::set<Symbol> check_positive(const Formula& f) {
  std::map<Symbol, bool> parity;
  std::set<Symbol> free;
  detail::check_positive(f, false, parity, free);
  return free;
}

inline Formula parse_formula(std::string_view text) {
  Formula f = detail::MuParser(text).parse();
  check_positive(f);
  return f;
}

// Negations pushed down to propositions.
inline Formula positive_normal_form(const Formula& f, bool negated = false) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::tt: return negated ? Formula::bottom() : f;
    case K::ff: return negated ? Formula::top() : f;
    case K::prop: return negated ? Formula::negate(f) : f;
    case K::var: return f;  // positivity makes the negations cancel
    case K::neg: return positive_normal_form(f.sub(), !negated);
    case K::conj:
    case K::disj: {
      Formula a = positive_normal_form(f.sub(0), negated), b = positive_normal_form(f.sub(1), negated);
      return (f.kind() == K::conj) != negated ? Formula::conj(a, b) : Formula::disj(a, b);
    }
    case K::dia:
    case K::box: {
      Formula s = positive_normal_form(f.sub(), negated);
      return (f.kind() == K::dia) != negated ? Formula::dia(f.dir(), s) : Formula::box(f.dir(), s);
    }
    case K::mu:
    case K::nu: {
      Formula s = positive_normal_form(f.sub(), negated);
      return (f.kind() == K::mu) != negated ? Formula::mu(f.name(), s) : Formula::nu(f.name(), s);
    }
  }
  return f;
}

// ---------------------------------------------------------------- structures

// Edge-labelled graph whose vertices carry propositions. Frontier vertices
// stand for unexplored parts.
struct KripkeStructure {
  std::vector<std::set<Symbol>> props;
  std::vector<std::map<Symbol, std::vector<std::size_t>>> succ;
  std::vector<bool> frontier;

  std::size_t add_vertex(std::set<Symbol> ps, bool is_frontier = false) {
    props.push_back(std::move(ps));
    succ.emplace_back();
    frontier.push_back(is_frontier);
    return props.size() - 1;
  }
  void add_edge(std::size_t u, const Symbol& d, std::size_t v) { succ[u][d].push_back(v); }
  std::size_t size() const { return props.size(); }
};

enum class Truth { tt, ff, unknown };

inline const char* to_string(Truth t) { return t == Truth::tt ? "true" : t == Truth::ff ? "false" : "unknown"; }

namespace detail {

using VSet = std::vector<bool>;

// Two-valued evaluation with frontier vertices forced to `forced` at
// propositions and modalities, the only places that look at the unexplored
// part. Everything else is monotone, so forced = false gives a lower bound
// and forced = true an upper bound.
class BoundEvaluator {
 public:
  BoundEvaluator(const KripkeStructure& k, bool forced) : k_(k), forced_(forced) {}

  VSet eval(const Formula& f, std::map<Symbol, VSet>& env) const {
    using K = Formula::Kind;
    std::size_t n = k_.size();
    VSet out(n, false);
    switch (f.kind()) {
      case K::tt: return VSet(n, true);
      case K::ff: return out;
      case K::prop:
        for (std::size_t v = 0; v < n; ++v) out[v] = k_.props[v].count(f.name()) > 0;
        break;
      case K::var: {
        auto it = env.find(f.name());
        if (it == env.end()) throw Error("free variable " + f.name());
        return it->second;
      }
      case K::neg: {
        if (f.sub().kind() != K::prop) throw Error("evaluation expects positive normal form");
        for (std::size_t v = 0; v < n; ++v) out[v] = k_.props[v].count(f.sub().name()) == 0;
        break;
      }
      case K::conj:
      case K::disj: {
        VSet a = eval(f.sub(0), env), b = eval(f.sub(1), env);
        for (std::size_t v = 0; v < n; ++v) out[v] = f.kind() == K::conj ? a[v] && b[v] : a[v] || b[v];
        return out;
      }
      case K::dia:
      case K::box: {
        VSet s = eval(f.sub(), env);
        bool is_dia = f.kind() == K::dia;
        for (std::size_t v = 0; v < n; ++v) {
          auto it = k_.succ[v].find(f.dir());
          bool val = !is_dia;
          if (it != k_.succ[v].end())
            for (auto w : it->second)
              if (is_dia ? s[w] : !s[w]) {
                val = is_dia;
                break;
              }
          out[v] = val;
        }
        break;
      }
      case K::mu:
      case K::nu: {
        VSet cur(n, f.kind() == K::nu);
        auto saved = env.find(f.name()) == env.end() ? std::optional<VSet>() : std::optional<VSet>(env[f.name()]);
        for (;;) {
          env[f.name()] = cur;
          VSet next = eval(f.sub(), env);
          if (next == cur) break;
          cur = std::move(next);
        }
        if (saved)
          env[f.name()] = *saved;
        else
          env.erase(f.name());
        return cur;
      }
    }
    apply_frontier(out);
    return out;
  }

 private:
  void apply_frontier(VSet& s) const {
    for (std::size_t v = 0; v < k_.size(); ++v)
      if (k_.frontier[v]) s[v] = forced_;
  }

  const KripkeStructure& k_;
  bool forced_;
};

}  // namespace detail

inline std::vector<Truth> evaluate(const Formula& f, const KripkeStructure& k) {
  auto free = check_positive(f);
  if (!free.empty()) throw Error("formula has free variable " + *free.begin());
  Formula p = positive_normal_form(f);
  std::map<Symbol, detail::VSet> env;
  auto lo = detail::BoundEvaluator(k, false).eval(p, env);
  auto hi = detail::BoundEvaluator(k, true).eval(p, env);
  std::vector<Truth> out(k.size());
  for (std::size_t v = 0; v < k.size(); ++v) out[v] = lo[v] ? Truth::tt : hi[v] ? Truth::unknown : Truth::ff;
  return out;
}

struct TreeStructure {
  KripkeStructure k;
  std::vector<Node> nodes;
  std::map<Node, std::size_t> index;
};

// Directions become edge labels "1", "2", ...; ⊥ nodes are frontier.
inline TreeStructure tree_structure(const PartialTree& t) {
  TreeStructure s;
  for (auto& [u, a] : t) {
    s.index[u] = s.k.add_vertex(a == kBottom ? std::set<Symbol>{} : std::set<Symbol>{a}, a == kBottom);
    s.nodes.push_back(u);
  }
  for (auto& [u, a] : t)
    if (!u.empty()) s.k.add_edge(s.index.at(parent(u)), std::to_string(u.back()), s.index.at(u));
  return s;
}

inline std::map<Node, Truth> eval_bounded(const Formula& f, const PartialTree& t) {
  auto s = tree_structure(t);
  auto vals = evaluate(f, s.k);
  std::map<Node, Truth> out;
  for (std::size_t v = 0; v < vals.size(); ++v) out[s.nodes[v]] = vals[v];
  return out;
}

struct ConfigGraph {
  KripkeStructure k;
  std::vector<Configuration> configs;
  std::unordered_map<std::string, std::size_t> index;  // Configuration::key
};

// Configuration graph from the initial configuration; vertices are
// expanded while fewer than max_depth letters have been read, up to
// max_vertices vertices. Propositions are control states.
inline ConfigGraph config_graph(const Cpda& m, const Budget& b, std::size_t max_vertices = 100000) {
  m.validate();
  ConfigGraph g;
  std::vector<std::size_t> depth;
  std::deque<std::size_t> todo;
  auto vertex = [&](const Configuration& c, std::size_t d, bool front) {
    auto it = g.index.find(c.key());
    if (it != g.index.end()) {
      if (d < depth[it->second]) {
        depth[it->second] = d;
        if (front) todo.push_front(it->second);
        else todo.push_back(it->second);
      }
      return it->second;
    }
    std::size_t v = g.k.add_vertex({c.state}, true);
    g.configs.push_back(c);
    g.index[c.key()] = v;
    depth.push_back(d);
    if (front) todo.push_front(v);
    else todo.push_back(v);
    return v;
  };
  vertex(initial_configuration(m), 0, true);
  std::vector<bool> expanded;
  while (!todo.empty()) {
    std::size_t v = todo.front();
    todo.pop_front();
    expanded.resize(g.k.size(), false);
    if (expanded[v] || depth[v] >= b.max_depth) continue;
    if (g.k.size() >= max_vertices) break;
    expanded[v] = true;
    g.k.frontier[v] = false;
    Configuration c = g.configs[v];
    std::vector<Symbol> letters{kEps};
    letters.insert(letters.end(), m.input.begin(), m.input.end());
    for (auto& a : letters) {
      auto nx = step_config(m, c, a);
      if (!nx) continue;
      bool eps = a == kEps;
      std::size_t w = vertex(*nx.next, depth[v] + (eps ? 0 : 1), eps);
      g.k.add_edge(v, a, w);
    }
  }
  return g;
}

// ---------------------------------------------------------------- translations

namespace detail {

inline void collect_vars(const Formula& f, std::set<Symbol>& out) {
  using K = Formula::Kind;
  if (f.kind() == K::var || f.is_fixpoint()) out.insert(f.name());
  if (f.kind() == K::neg || f.kind() == K::dia || f.kind() == K::box || f.is_fixpoint()) collect_vars(f.sub(), out);
  if (f.kind() == K::conj || f.kind() == K::disj) {
    collect_vars(f.sub(0), out);
    collect_vars(f.sub(1), out);
  }
}

template <class Fn>
Formula map_formula(const Formula& f, Fn&& leaf_or_modal) {
  using K = Formula::Kind;
  if (auto r = leaf_or_modal(f)) return *r;
  switch (f.kind()) {
    case K::neg: return Formula::negate(map_formula(f.sub(), leaf_or_modal));
    case K::conj: return Formula::conj(map_formula(f.sub(0), leaf_or_modal), map_formula(f.sub(1), leaf_or_modal));
    case K::disj: return Formula::disj(map_formula(f.sub(0), leaf_or_modal), map_formula(f.sub(1), leaf_or_modal));
    case K::dia: return Formula::dia(f.dir(), map_formula(f.sub(), leaf_or_modal));
    case K::box: return Formula::box(f.dir(), map_formula(f.sub(), leaf_or_modal));
    case K::mu: return Formula::mu(f.name(), map_formula(f.sub(), leaf_or_modal));
    case K::nu: return Formula::nu(f.name(), map_formula(f.sub(), leaf_or_modal));
    default: return f;
  }
}

}  // namespace detail

// ◇_a ψ becomes μX.(◇_a ψ ∨ ◇_ε X), outermost first; dually □_a ψ becomes
// νX.(□_a ψ ∧ □_ε X). Modalities already over ε are kept.
inline Formula eps_translate(const Formula& f) {
  std::set<Symbol> used;
  detail::collect_vars(f, used);
  std::size_t counter = 0;
  auto fresh = [&]() {
    for (;;) {
      Symbol x = "E" + std::to_string(++counter);
      if (used.insert(x).second) return x;
    }
  };
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    return detail::map_formula(g, [&](const Formula& h) -> std::optional<Formula> {
      using K = Formula::Kind;
      if ((h.kind() != K::dia && h.kind() != K::box) || h.dir() == kEps) return std::nullopt;
      Symbol x = fresh();
      Formula inner = go(h.sub());
      if (h.kind() == K::dia)
        return Formula::mu(x, Formula::disj(Formula::dia(h.dir(), inner), Formula::dia(kEps, Formula::var(x))));
      return Formula::nu(x, Formula::conj(Formula::box(h.dir(), inner), Formula::box(kEps, Formula::var(x))));
    });
  };
  return go(f);
}

// p_a becomes the disjunction of p_q over the states q with ρ(q) = a.
inline Formula translate_predicates(const Formula& f, const Labeling& rho) {
  return detail::map_formula(f, [&](const Formula& h) -> std::optional<Formula> {
    if (h.kind() != Formula::Kind::prop) return std::nullopt;
    std::optional<Formula> out;
    for (auto& [q, a] : rho.label)
      if (a == h.name()) out = out ? Formula::disj(*out, Formula::prop(q)) : Formula::prop(q);
    return out ? *out : Formula::bottom();
  });
}

// ---------------------------------------------------------------- reflection

inline Symbol bar(const Symbol& a) { return a + "'"; }
inline Symbol unbar(const Symbol& a) {
  return !a.empty() && a.back() == '\'' ? a.substr(0, a.size() - 1) : a;
}

struct Reflection {
  PartialTree marked;
  std::vector<Node> unknown;  // decided nodes where the truncation leaves φ open
};

inline Reflection mark_tree(const PartialTree& t, const std::map<Node, Truth>& vals) {
  Reflection r;
  for (auto& [u, a] : t) {
    Truth v = vals.at(u);
    r.marked.set(u, a != kBottom && v == Truth::tt ? bar(a) : a);
    if (a != kBottom && v == Truth::unknown) r.unknown.push_back(u);
  }
  return r;
}

inline Reflection reflect_tree(const Scheme& s, const Formula& f, const Budget& b) {
  auto t = unfold_value_tree(s, b);
  return mark_tree(t, eval_bounded(f, t));
}

// Evaluates the translated formula on the raw configuration graph at the
// configuration behind each decided node.
inline Reflection reflect_tree(const Cpda& m, const Labeling& rho, const Formula& f, const Budget& b) {
  auto gen = generate_tree_with_configs(m, rho, b);
  auto g = config_graph(m, b, std::max<std::size_t>(b.max_steps, 1000));
  auto vals = evaluate(eps_translate(translate_predicates(f, rho)), g.k);
  std::map<Node, Truth> at;
  for (auto& [u, a] : gen.tree) {
    auto it = gen.config.find(u);
    if (it == gen.config.end()) {
      at[u] = Truth::unknown;
      continue;
    }
    auto v = g.index.find(it->second.key());
    at[u] = v == g.index.end() ? Truth::unknown : vals[v->second];
  }
  return mark_tree(gen.tree, at);
}

inline std::string print_reflection(const Reflection& r) {
  std::string out = print_tree(r.marked) + "\nunknown:";
  for (auto& u : r.unknown) out += " " + node_to_string(u);
  return out + "\n";
}

}  // namespace hocpda
