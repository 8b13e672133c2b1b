#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hocpda/core.hpp"

namespace hocpda {

struct Rule {
  Symbol head;
  std::vector<Symbol> formals;
  Term body;
};

struct Diagnostic {
  Symbol rule;  // empty for scheme-level problems
  std::string message;
  std::string to_string() const {
    return rule.empty() ? message : "rule " + rule + ": " + message;
  }
};

struct InvalidScheme : Error {
  explicit InvalidScheme(const std::vector<Diagnostic>& ds)
      : Error(join(ds)), diagnostics(ds) {}
  std::vector<Diagnostic> diagnostics;

 private:
  static std::string join(const std::vector<Diagnostic>& ds) {
    std::string out = "invalid scheme";
    for (auto& d : ds) out += "\n  " + d.to_string();
    return out;
  }
};

// Higher-order recursion scheme: terminals, typed nonterminals, a start
// symbol of ground type and one rule per nonterminal.
struct Scheme {
  RankedAlphabet terminals;
  std::vector<std::pair<Symbol, SimpleType>> nonterminals;
  Symbol start;
  std::vector<Rule> rules;

  const SimpleType* nonterminal_type(const Symbol& f) const {
    for (auto& [n, t] : nonterminals)
      if (n == f) return &t;
    return nullptr;
  }

  const Rule* rule_for(const Symbol& f) const {
    for (auto& r : rules)
      if (r.head == f) return &r;
    return nullptr;
  }

  unsigned order() const {
    unsigned o = 0;
    for (auto& [n, t] : nonterminals) o = std::max(o, t.order());
    return o;
  }

  TypeEnv env() const {
    TypeEnv e;
    for (auto& s : terminals.symbols())
      e[s] = SimpleType::of_args(std::vector<SimpleType>(terminals.arity(s)));
    for (auto& [n, t] : nonterminals) e[n] = t;
    return e;
  }

  Term nonterminal(const Symbol& f) const { return Term::symbol(f, SymbolKind::nonterminal); }
  Term terminal(const Symbol& f) const { return Term::symbol(f, SymbolKind::terminal); }
};

inline std::vector<Diagnostic> validate(const Scheme& s) {
  std::vector<Diagnostic> out;
  std::set<Symbol> names;
  for (auto& t : s.terminals.symbols()) names.insert(t);
  for (auto& [n, t] : s.nonterminals) {
    if (n == kBottom) out.push_back({n, "the bottom symbol is reserved"});
    if (!names.insert(n).second) out.push_back({n, "name clash: '" + n + "' declared twice"});
  }
  const SimpleType* st = s.nonterminal_type(s.start);
  if (!st)
    out.push_back({"", "start symbol '" + s.start + "' is not a nonterminal"});
  else if (!st->is_ground())
    out.push_back({"", "start symbol '" + s.start + "' is not of ground type"});

  std::map<Symbol, int> count;
  for (auto& r : s.rules) ++count[r.head];
  for (auto& [n, c] : count)
    if (c > 1) out.push_back({n, "duplicate rule for '" + n + "'"});
  for (auto& [n, t] : s.nonterminals)
    if (!count.count(n)) out.push_back({n, "missing rule for '" + n + "'"});

  TypeEnv base = s.env();
  for (auto& r : s.rules) {
    const SimpleType* ty = s.nonterminal_type(r.head);
    if (!ty) {
      out.push_back({r.head, "rule for undeclared nonterminal '" + r.head + "'"});
      continue;
    }
    auto args = ty->args();
    if (args.size() != r.formals.size()) {
      out.push_back({r.head, "expects " + std::to_string(args.size()) + " parameters, rule has " +
                                 std::to_string(r.formals.size())});
      continue;
    }
    TypeEnv env = base;
    std::set<Symbol> seen;
    bool ok = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!seen.insert(r.formals[i]).second) {
        out.push_back({r.head, "repeated parameter '" + r.formals[i] + "'"});
        ok = false;
      }
      if (names.count(r.formals[i])) {
        out.push_back({r.head, "parameter '" + r.formals[i] + "' shadows a symbol"});
        ok = false;
      }
      env[r.formals[i]] = args[i];
    }
    if (!ok) continue;
    // classification must agree with the declarations
    std::function<void(const Term&)> scan = [&](const Term& t) {
      if (t.is_apply()) {
        scan(t.fun());
        scan(t.arg());
        return;
      }
      bool is_formal = seen.count(t.name()) != 0;
      if (t.kind() == SymbolKind::variable && !is_formal)
        out.push_back({r.head, "unbound variable '" + t.name() + "'"});
    };
    scan(r.body);
    try {
      SimpleType bt = infer_type(r.body, env);
      if (!bt.is_ground())
        out.push_back({r.head, "type mismatch: body has type " + bt.to_string() + ", expected o"});
    } catch (const UnboundSymbol& e) {
      // already reported as an unbound variable when it came from the body
      bool reported = false;
      for (auto& d : out)
        if (d.rule == r.head && d.message.rfind("unbound variable", 0) == 0) reported = true;
      if (!reported) out.push_back({r.head, std::string("unbound variable: ") + e.what()});
    } catch (const ArgumentTypeMismatch& e) {
      out.push_back({r.head, std::string("type mismatch: ") + e.what()});
    }
  }
  return out;
}

inline void require_valid(const Scheme& s) {
  auto ds = validate(s);
  if (!ds.empty()) throw InvalidScheme(ds);
}

// ---------------------------------------------------------------- rewriting

namespace detail {

inline Term substitute(const Term& body, const std::map<Symbol, Term>& sub) {
  if (body.is_symbol()) {
    if (body.kind() == SymbolKind::variable) {
      auto it = sub.find(body.name());
      if (it != sub.end()) return it->second;
    }
    return body;
  }
  Term f = substitute(body.fun(), sub);
  Term x = substitute(body.arg(), sub);
  return Term::apply(f, x);
}

class RuleIndex {
 public:
  explicit RuleIndex(const Scheme& s) {
    for (auto& r : s.rules) rules_.emplace(r.head, &r);
  }
  const Rule& at(const Symbol& f) const {
    auto it = rules_.find(f);
    if (it == rules_.end()) throw Error("no rule for '" + f + "'");
    return *it->second;
  }

  // Whether t is a nonterminal applied to all of its parameters.
  bool is_redex(const Term& t) const {
    Term h = t.head();
    if (h.kind() != SymbolKind::nonterminal) return false;
    return t.args().size() == at(h.name()).formals.size();
  }

  Term contract(const Term& t) const {
    const Rule& r = at(t.head().name());
    auto args = t.args();
    std::map<Symbol, Term> sub;
    for (std::size_t i = 0; i < args.size(); ++i) sub[r.formals[i]] = args[i];
    return substitute(r.body, sub);
  }

 private:
  std::map<Symbol, const Rule*> rules_;
};

inline void outermost_redexes(const Term& t, const Node& u, std::vector<Node>& out) {
  Term h = t.head();
  if (h.kind() != SymbolKind::terminal) {
    out.push_back(u);
    return;
  }
  auto args = t.args();
  for (std::size_t i = 0; i < args.size(); ++i)
    outermost_redexes(args[i], child(u, static_cast<unsigned>(i + 1)), out);
}

inline Term replace_at(const Term& t, const Node& u, std::size_t depth,
                       const std::function<Term(const Term&)>& f) {
  if (depth == u.size()) return f(t);
  auto args = t.args();
  std::size_t i = u[depth] - 1;
  args.at(i) = replace_at(args[i], u, depth + 1, f);
  return Term::apply(t.head(), args);
}

inline void all_reducts(const Term& t, const RuleIndex& idx, std::vector<Term>& out) {
  if (idx.is_redex(t)) out.push_back(idx.contract(t));
  if (t.is_symbol()) return;
  std::vector<Term> sub;
  all_reducts(t.fun(), idx, sub);
  for (auto& r : sub) out.push_back(Term::apply(r, t.arg()));
  sub.clear();
  all_reducts(t.arg(), idx, sub);
  for (auto& r : sub) out.push_back(Term::apply(t.fun(), r));
}

}  // namespace detail

// ⊥-projection of a ground term: terminal skeleton with ⊥ at every
// nonterminal-headed subterm.
inline PartialTree bottom_project(const Term& t) {
  PartialTree out;
  std::function<void(const Term&, const Node&)> go = [&](const Term& s, const Node& u) {
    Term h = s.head();
    if (h.kind() != SymbolKind::terminal) {
      out.set(u, kBottom);
      return;
    }
    out.set(u, h.name());
    auto args = s.args();
    for (std::size_t i = 0; i < args.size(); ++i) go(args[i], child(u, static_cast<unsigned>(i + 1)));
  };
  go(t, Node{});
  return out;
}

// Positions (in the terminal skeleton) of the outermost redexes, in
// left-to-right order. These are exactly the ⊥ nodes of bottom_project.
inline std::vector<Node> outermost_redexes(const Term& t) {
  std::vector<Node> out;
  detail::outermost_redexes(t, Node{}, out);
  return out;
}

enum class RedexOrder { leftmost_outermost, rightmost_outermost };

// One rewriting step at the chosen outermost redex; nullopt when the term is
// already a finite terminal tree.
inline std::optional<Term> step(const Scheme& s, const Term& t,
                                RedexOrder order = RedexOrder::leftmost_outermost) {
  auto rs = outermost_redexes(t);
  if (rs.empty()) return std::nullopt;
  detail::RuleIndex idx(s);
  const Node& u = order == RedexOrder::leftmost_outermost ? rs.front() : rs.back();
  return detail::replace_at(t, u, 0, [&](const Term& r) { return idx.contract(r); });
}

// All terms reachable in one step, including redexes nested in arguments.
inline std::vector<Term> successors(const Scheme& s, const Term& t) {
  std::vector<Term> out;
  detail::all_reducts(t, detail::RuleIndex(s), out);
  return out;
}

// Prefix of the value tree: each node is head-reduced with at most
// max_steps contractions; nodes that do not reach a terminal head become ⊥,
// as do all nodes at depth max_depth.
inline PartialTree unfold_value_tree(const Scheme& s, const Budget& b) {
  require_valid(s);
  detail::RuleIndex idx(s);
  PartialTree out;
  std::vector<std::pair<Node, Term>> todo{{Node{}, s.nonterminal(s.start)}};
  while (!todo.empty()) {
    auto [u, t] = std::move(todo.back());
    todo.pop_back();
    if (u.size() >= b.max_depth) {
      out.set(u, kBottom);
      continue;
    }
    std::size_t steps = 0;
    while (t.head().kind() == SymbolKind::nonterminal && steps < b.max_steps) {
      t = idx.contract(t);
      ++steps;
    }
    Term h = t.head();
    if (h.kind() != SymbolKind::terminal) {
      out.set(u, kBottom);
      continue;
    }
    out.set(u, h.name());
    auto args = t.args();
    for (std::size_t i = args.size(); i-- > 0;)
      todo.emplace_back(child(u, static_cast<unsigned>(i + 1)), args[i]);
  }
  return out;
}

// ---------------------------------------------------------------- text format

namespace detail {

inline Term parse_term(const Sexp& e, const Scheme& s, const std::set<Symbol>& formals) {
  if (e.is_atom) {
    if (formals.count(e.atom)) return Term::symbol(e.atom, SymbolKind::variable);
    if (s.nonterminal_type(e.atom)) return Term::symbol(e.atom, SymbolKind::nonterminal);
    if (s.terminals.contains(e.atom)) return Term::symbol(e.atom, SymbolKind::terminal);
    return Term::symbol(e.atom, SymbolKind::variable);
  }
  if (e.size() == 0) throw ParseError("empty term", e.line);
  Term t = parse_term(e[0], s, formals);
  for (std::size_t i = 1; i < e.size(); ++i) t = Term::apply(t, parse_term(e[i], s, formals));
  return t;
}

inline Rule parse_rule(const Sexp& e, const Scheme& s) {
  if (!e.is_list() || e.size() != 2) throw ParseError("rule must be (lhs body)", e.line);
  Rule r;
  const Sexp& lhs = e[0];
  if (lhs.is_atom) {
    r.head = lhs.atom;
  } else {
    if (lhs.size() == 0) throw ParseError("empty rule head", lhs.line);
    r.head = expect_atom(lhs[0], "nonterminal");
    for (std::size_t i = 1; i < lhs.size(); ++i) r.formals.push_back(expect_atom(lhs[i], "parameter"));
  }
  std::set<Symbol> fs(r.formals.begin(), r.formals.end());
  r.body = parse_term(e[1], s, fs);
  return r;
}

}  // namespace detail

inline Scheme parse_scheme(std::string_view text) {
  Scheme s;
  std::vector<const Sexp*> rule_blocks;
  auto all = read_sexps(text);
  bool have_start = false;
  for (auto& blk : all) {
    std::string h = blk.head();
    if (h == "terminals") {
      for (std::size_t i = 1; i < blk.size(); ++i) {
        const Sexp& d = blk[i];
        if (!d.is_list() || d.size() != 2) throw ParseError("terminal must be (name arity)", d.line);
        long a = parse_int(d[1], "arity");
        if (a < 0) throw ParseError("negative arity", d.line);
        try {
          s.terminals.add(expect_atom(d[0], "terminal"), static_cast<std::size_t>(a));
        } catch (const ParseError&) {
          throw;
        } catch (const Error& e) {
          throw ParseError(e.what(), d.line);
        }
      }
    } else if (h == "nonterminals") {
      for (std::size_t i = 1; i < blk.size(); ++i) {
        const Sexp& d = blk[i];
        if (!d.is_list() || d.size() < 2) throw ParseError("nonterminal must be (name type)", d.line);
        SimpleType t;
        if (d.size() == 2) {
          t = SimpleType::parse(d[1]);
        } else {
          Sexp rest;
          rest.line = d.line;
          rest.items.assign(d.items.begin() + 1, d.items.end());
          t = SimpleType::parse(rest);
        }
        s.nonterminals.emplace_back(expect_atom(d[0], "nonterminal"), t);
      }
    } else if (h == "start") {
      if (blk.size() != 2) throw ParseError("start must be (start name)", blk.line);
      s.start = expect_atom(blk[1], "start symbol");
      have_start = true;
    } else if (h == "rules") {
      rule_blocks.push_back(&blk);
    } else {
      throw ParseError("unknown block '" + blk.to_string() + "'", blk.line);
    }
  }
  if (!have_start) throw ParseError("missing start block", 1);
  for (auto* blk : rule_blocks)
    for (std::size_t i = 1; i < blk->size(); ++i) s.rules.push_back(detail::parse_rule((*blk)[i], s));
  return s;
}

inline std::string print_scheme(const Scheme& s) {
  std::string out = "(terminals";
  for (auto& t : s.terminals.symbols()) out += " (" + t + " " + std::to_string(s.terminals.arity(t)) + ")";
  out += ")\n(nonterminals";
  for (auto& [n, t] : s.nonterminals)
    out += " (" + n + " " + (t.is_ground() ? std::string("o") : "(" + t.to_string() + ")") + ")";
  out += ")\n(start " + s.start + ")\n(rules";
  for (auto& r : s.rules) {
    out += "\n  ((" + r.head;
    for (auto& f : r.formals) out += " " + f;
    out += ") " + r.body.to_string() + ")";
  }
  return out + ")\n";
}

inline bool operator==(const Rule& a, const Rule& b) {
  return a.head == b.head && a.formals == b.formals && a.body == b.body;
}

inline bool operator==(const Scheme& a, const Scheme& b) {
  return a.terminals == b.terminals && a.nonterminals == b.nonterminals && a.start == b.start &&
         a.rules == b.rules;
}

}  // namespace hocpda
