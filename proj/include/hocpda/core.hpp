#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hocpda/sexpr.hpp"

namespace hocpda {

using Symbol = std::string;

inline const Symbol kBottom = "⊥";

// Limits for producing finite prefixes of infinite objects. Nodes at depth
// max_depth are left as ⊥; max_steps bounds the work spent on one node.
struct Budget {
  std::size_t max_depth = 10;
  std::size_t max_steps = 100000;
};

struct UnboundSymbol : Error {
  using Error::Error;
};
struct ArgumentTypeMismatch : Error {
  using Error::Error;
};
struct ArityMismatch : Error {
  using Error::Error;
};
struct NodeOutOfDomain : Error {
  using Error::Error;
};

// ---------------------------------------------------------------- types

class SimpleType {
 public:
  SimpleType() = default;  // the ground type o

  static SimpleType ground() { return {}; }
  static SimpleType arrow(SimpleType from, SimpleType to) {
    SimpleType t;
    t.rep_ = std::make_shared<const std::vector<SimpleType>>(std::vector<SimpleType>{std::move(from), std::move(to)});
    return t;
  }
  // tau_1 -> ... -> tau_n -> o
  static SimpleType of_args(const std::vector<SimpleType>& args) {
    SimpleType t;
    for (auto it = args.rbegin(); it != args.rend(); ++it) t = arrow(*it, t);
    return t;
  }

  bool is_ground() const { return !rep_; }
  const SimpleType& from() const { return (*rep_)[0]; }
  const SimpleType& to() const { return (*rep_)[1]; }

  unsigned order() const {
    if (!rep_) return 0;
    return std::max(from().order() + 1, to().order());
  }

  std::size_t arity() const { return rep_ ? 1 + to().arity() : 0; }

  std::vector<SimpleType> args() const {
    std::vector<SimpleType> out;
    for (const SimpleType* t = this; !t->is_ground(); t = &t->to())
      out.push_back(t->from());
    return out;
  }

  friend bool operator==(const SimpleType& a, const SimpleType& b) {
    if (a.rep_ == b.rep_) return true;
    if (!a.rep_ || !b.rep_) return false;
    return a.from() == b.from() && a.to() == b.to();
  }

  std::string to_string() const {
    if (!rep_) return "o";
    std::string left = from().to_string();
    if (!from().is_ground()) left = "(" + left + ")";
    return left + " -> " + to().to_string();
  }

  // Parses `o`, or a list of types separated by `->` (right associative).
  static SimpleType parse(const Sexp& s) {
    if (s.is_atom) {
      if (s.atom != "o") throw ParseError("unknown type '" + s.atom + "'", s.line);
      return {};
    }
    if (s.size() == 0) throw ParseError("empty type", s.line);
    std::vector<SimpleType> parts;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i % 2 == 1) {
        if (!s[i].is("->")) throw ParseError("expected '->' in type", s[i].line);
        continue;
      }
      parts.push_back(parse(s[i]));
    }
    if (s.size() % 2 == 0) throw ParseError("dangling '->' in type", s.line);
    SimpleType t = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) t = arrow(parts[i], t);
    return t;
  }

  static SimpleType parse(std::string_view text) {
    auto all = read_sexps(text);
    if (all.size() == 1) return parse(all[0]);
    Sexp wrapped;
    wrapped.items = std::move(all);
    return parse(wrapped);
  }

 private:
  // {from, to}; null for the ground type
  std::shared_ptr<const std::vector<SimpleType>> rep_;
};

// Terminal symbols with arities. The bottom symbol is implicit and nullary.
class RankedAlphabet {
 public:
  RankedAlphabet() = default;
  RankedAlphabet(std::initializer_list<std::pair<Symbol, std::size_t>> init) {
    for (auto& [s, a] : init) add(s, a);
  }

  void add(const Symbol& s, std::size_t arity) {
    if (s == kBottom) throw Error("the bottom symbol is reserved");
    if (contains(s)) throw Error("duplicate symbol '" + s + "'");
    order_.push_back(s);
    arity_[s] = arity;
  }

  bool contains(const Symbol& s) const { return arity_.count(s) != 0; }

  std::size_t arity(const Symbol& s) const {
    if (s == kBottom) return 0;
    auto it = arity_.find(s);
    if (it == arity_.end()) throw UnboundSymbol("unknown symbol '" + s + "'");
    return it->second;
  }

  std::size_t max_arity() const {
    std::size_t m = 0;
    for (auto& [s, a] : arity_) m = std::max(m, a);
    return m;
  }

  const std::vector<Symbol>& symbols() const { return order_; }
  std::size_t size() const { return order_.size(); }

  friend bool operator==(const RankedAlphabet& a, const RankedAlphabet& b) {
    return a.order_ == b.order_ && a.arity_ == b.arity_;
  }

 private:
  std::vector<Symbol> order_;
  std::map<Symbol, std::size_t> arity_;
};

// ---------------------------------------------------------------- terms

enum class SymbolKind { terminal, nonterminal, variable };

// Immutable applicative term; subterms are shared between terms.
class Term {
 public:
  Term() = default;

  static Term symbol(Symbol name, SymbolKind kind) {
    Term t;
    t.rep_ = std::make_shared<const Rep>(Rep{std::move(name), kind, {}, {}});
    return t;
  }
  static Term apply(const Term& f, const Term& x) {
    Term t;
    t.rep_ = std::make_shared<const Rep>(Rep{{}, SymbolKind::terminal, f.rep_, x.rep_});
    return t;
  }
  static Term apply(Term head, const std::vector<Term>& args) {
    for (auto& a : args) head = apply(head, a);
    return head;
  }

  bool valid() const { return rep_ != nullptr; }
  bool is_symbol() const { return !rep_->fun; }
  bool is_apply() const { return rep_->fun != nullptr; }
  const Symbol& name() const { return rep_->name; }
  SymbolKind kind() const { return rep_->kind; }
  Term fun() const { return Term(rep_->fun); }
  Term arg() const { return Term(rep_->arg); }

  // Head symbol of the application spine.
  Term head() const {
    std::shared_ptr<const Rep> p = rep_;
    while (p->fun) p = p->fun;
    return Term(p);
  }

  // Arguments of the application spine, left to right.
  std::vector<Term> args() const {
    std::vector<Term> out;
    std::shared_ptr<const Rep> p = rep_;
    while (p->fun) {
      out.push_back(Term(p->arg));
      p = p->fun;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::size_t size() const {
    if (is_symbol()) return 1;
    return 1 + fun().size() + arg().size();
  }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.rep_ == b.rep_) return true;
    if (!a.rep_ || !b.rep_) return false;
    if (a.is_symbol() != b.is_symbol()) return false;
    if (a.is_symbol()) return a.name() == b.name() && a.kind() == b.kind();
    return a.fun() == b.fun() && a.arg() == b.arg();
  }

  // Spine-flattened s-expression, e.g. (F (Cp b b) c).
  std::string to_string() const {
    if (is_symbol()) return name();
    std::string out = "(" + head().name();
    for (auto& a : args()) out += " " + a.to_string();
    return out + ")";
  }

 private:
  struct Rep {
    Symbol name;
    SymbolKind kind;
    std::shared_ptr<const Rep> fun;
    std::shared_ptr<const Rep> arg;
  };
  explicit Term(std::shared_ptr<const Rep> r) : rep_(std::move(r)) {}
  std::shared_ptr<const Rep> rep_;
};

using TypeEnv = std::map<Symbol, SimpleType>;

inline SimpleType infer_type(const Term& t, const TypeEnv& env) {
  if (t.is_symbol()) {
    auto it = env.find(t.name());
    if (it == env.end()) throw UnboundSymbol("unbound symbol '" + t.name() + "'");
    return it->second;
  }
  SimpleType f = infer_type(t.fun(), env);
  SimpleType x = infer_type(t.arg(), env);
  if (f.is_ground())
    throw ArgumentTypeMismatch("ground term applied to an argument in " + t.to_string());
  if (!(f.from() == x))
    throw ArgumentTypeMismatch("argument of type " + x.to_string() + " where " +
                               f.from().to_string() + " expected in " + t.to_string());
  return f.to();
}

// ---------------------------------------------------------------- trees

// A node is a word over positive directions; the root is the empty word.
using Node = std::vector<unsigned>;

inline Node child(Node u, unsigned d) {
  u.push_back(d);
  return u;
}

inline Node parent(Node u) {
  u.pop_back();
  return u;
}

inline bool is_prefix(const Node& u, const Node& v) {
  return u.size() <= v.size() && std::equal(u.begin(), u.end(), v.begin());
}

inline std::string node_to_string(const Node& u) {
  if (u.empty()) return "ε";
  bool wide = std::any_of(u.begin(), u.end(), [](unsigned d) { return d > 9; });
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (wide && i) out += '.';
    out += std::to_string(u[i]);
  }
  return out;
}

inline Node parse_node(std::string_view s) {
  Node u;
  if (s.empty() || s == "ε" || s == "e") return u;
  bool dotted = s.find('.') != std::string_view::npos;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!dotted) {
      if (s[i] < '1' || s[i] > '9') throw Error("bad node word '" + std::string(s) + "'");
      u.push_back(static_cast<unsigned>(s[i] - '0'));
      ++i;
      continue;
    }
    std::size_t j = s.find('.', i);
    if (j == std::string_view::npos) j = s.size();
    std::string part(s.substr(i, j - i));
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos ||
        std::stoul(part) == 0)
      throw Error("bad node word '" + std::string(s) + "'");
    u.push_back(static_cast<unsigned>(std::stoul(part)));
    i = j + 1;
  }
  return u;
}

// Finite labelled tree stored as an explicit map from nodes to labels.
// Iteration order is the lexicographic (depth-first, left-to-right) order.
template <class Label>
class LabelledTree {
 public:
  using map_type = std::map<Node, Label>;

  bool contains(const Node& u) const { return labels_.count(u) != 0; }
  const Label& at(const Node& u) const {
    auto it = labels_.find(u);
    if (it == labels_.end())
      throw NodeOutOfDomain("node " + node_to_string(u) + " not in tree");
    return it->second;
  }
  void set(const Node& u, Label l) { labels_[u] = std::move(l); }
  void erase(const Node& u) { labels_.erase(u); }

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }
  const map_type& labels() const { return labels_; }

  // Number of children, i.e. the largest d with u.1 ... u.d all present.
  std::size_t arity(const Node& u) const {
    std::size_t d = 0;
    while (contains(child(u, static_cast<unsigned>(d + 1)))) ++d;
    return d;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (auto& [u, l] : labels_) d = std::max(d, u.size());
    return d;
  }

  // Domain is prefix closed and children are numbered 1..k without gaps.
  bool well_formed() const {
    for (auto& [u, l] : labels_) {
      if (u.empty()) continue;
      if (!contains(parent(u))) return false;
      if (u.back() > 1 && !contains(child(parent(u), u.back() - 1))) return false;
    }
    return empty() || contains(Node{});
  }

  friend bool operator==(const LabelledTree& a, const LabelledTree& b) {
    return a.labels_ == b.labels_;
  }

 private:
  map_type labels_;
};

using PartialTree = LabelledTree<Symbol>;

namespace detail {
inline void print_tree(const PartialTree& t, const Node& u, std::string& out) {
  out += '(';
  out += t.at(u);
  std::size_t k = t.arity(u);
  for (std::size_t i = 1; i <= k; ++i) {
    out += ' ';
    print_tree(t, child(u, static_cast<unsigned>(i)), out);
  }
  out += ')';
}

inline void parse_tree(const Sexp& s, const Node& u, PartialTree& t) {
  if (!s.is_list() || s.size() == 0 || !s[0].is_atom)
    throw ParseError("expected (label children...)", s.line);
  t.set(u, s[0].atom);
  for (std::size_t i = 1; i < s.size(); ++i)
    parse_tree(s[i], child(u, static_cast<unsigned>(i)), t);
}
}  // namespace detail

// Canonical text: (f (a) (f (a) (⊥))).
inline std::string print_tree(const PartialTree& t) {
  if (t.empty()) return "()";
  std::string out;
  detail::print_tree(t, Node{}, out);
  return out;
}

inline PartialTree parse_tree(std::string_view text) {
  PartialTree t;
  detail::parse_tree(read_sexp(text), Node{}, t);
  return t;
}

// t1 ⊑ t2: t1 is t2 with some subtrees replaced by ⊥.
inline bool tree_leq(const PartialTree& t1, const PartialTree& t2) {
  for (auto& [u, l] : t1) {
    if (!t2.contains(u)) return false;
    if (l != kBottom && l != t2.at(u)) return false;
  }
  return true;
}

// Keeps nodes of depth < d and replaces nodes at depth d by ⊥.
inline PartialTree truncate(const PartialTree& t, std::size_t d) {
  PartialTree out;
  for (auto& [u, l] : t) {
    if (u.size() < d)
      out.set(u, l);
    else if (u.size() == d)
      out.set(u, kBottom);
  }
  return out;
}

template <class Label>
LabelledTree<Label> subtree(const LabelledTree<Label>& t, const Node& u) {
  if (!t.contains(u)) throw NodeOutOfDomain("node " + node_to_string(u) + " not in tree");
  LabelledTree<Label> out;
  for (auto it = t.labels().lower_bound(u); it != t.end() && is_prefix(u, it->first); ++it)
    out.set(Node(it->first.begin() + static_cast<long>(u.size()), it->first.end()),
            it->second);
  return out;
}

// Throws ArityMismatch unless every node has exactly arity(label) children.
inline void check_ranked(const PartialTree& t, const RankedAlphabet& sigma) {
  if (!t.well_formed()) throw ArityMismatch("tree domain is not prefix closed");
  for (auto& [u, l] : t) {
    if (l != kBottom && !sigma.contains(l))
      throw ArityMismatch("unknown label '" + l + "' at " + node_to_string(u));
    if (t.arity(u) != sigma.arity(l))
      throw ArityMismatch("node " + node_to_string(u) + " labelled " + l + " has " +
                          std::to_string(t.arity(u)) + " children");
  }
}

inline std::vector<Node> bottom_nodes(const PartialTree& t) {
  std::vector<Node> out;
  for (auto& [u, l] : t)
    if (l == kBottom) out.push_back(u);
  return out;
}

}  // namespace hocpda
