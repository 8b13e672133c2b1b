#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "hocpda/core.hpp"

namespace hocpda {

struct DivergentEpsilon : Error {
  using Error::Error;
};

// Persistent stack with structural sharing; the top is the head cell.
template <class T>
class PList {
 public:
  std::size_t size() const { return head_ ? head_->size : 0; }
  bool empty() const { return !head_; }
  const T& top() const { return head_->value; }

  PList push(T v) const {
    PList out;
    out.head_ = std::make_shared<const Cell>(Cell{std::move(v), head_, size() + 1});
    return out;
  }
  PList pop() const {
    PList out;
    out.head_ = head_->next;
    return out;
  }
  PList truncate(std::size_t n) const {
    PList out = *this;
    while (out.size() > n) out = out.pop();
    return out;
  }
  // Bottom element first.
  std::vector<T> to_vector() const {
    std::vector<T> out;
    for (const Cell* c = head_.get(); c; c = c->next.get()) out.push_back(c->value);
    return {out.rbegin(), out.rend()};
  }

  friend bool operator==(const PList& a, const PList& b) {
    const Cell* x = a.head_.get();
    const Cell* y = b.head_.get();
    while (x && y) {
      if (x == y) return true;
      if (x->size != y->size || !(x->value == y->value)) return false;
      x = x->next.get();
      y = y->next.get();
    }
    return x == y;
  }

 private:
  struct Cell;
  std::shared_ptr<const Cell> head_;
};

template <class T>
struct PList<T>::Cell {
  T value;
  std::shared_ptr<const Cell> next;
  std::size_t size;
};

inline const Symbol kShape = "♯";

// A stack symbol with a numeric link: collapse on it truncates the enclosing
// link_order-stack to its first link_height elements. Order 0 means no link.
struct StackSymbol {
  Symbol name;
  int link_order = 0;
  std::size_t link_height = 0;

  friend bool operator==(const StackSymbol& a, const StackSymbol& b) {
    return a.name == b.name && a.link_order == b.link_order && a.link_height == b.link_height;
  }
};

// Order-n stack of linked symbols. Immutable; operations return new stacks
// that share unchanged parts with the argument.
class LinkedStack {
 public:
  LinkedStack() = default;

  // The initial stack [...[⊥]...] of the given order.
  static LinkedStack initial(int order) {
    LinkedStack s;
    s.order_ = 1;
    s.syms_ = s.syms_.push(StackSymbol{kBottom, 0, 0});
    while (s.order_ < order) s = wrap(s);
    return s;
  }

  int order() const { return order_; }
  std::size_t height() const { return order_ == 1 ? syms_.size() : subs_.size(); }

  const StackSymbol& top_symbol() const {
    return order_ == 1 ? syms_.top() : subs_.top().top_symbol();
  }

  // top_i for 2 <= i <= order+1; top_{order+1}(s) = s.
  LinkedStack top(int i) const {
    if (i == order_ + 1) return *this;
    if (i < 2 || i > order_ + 1) throw Error("top index out of range");
    return subs_.top().top(i);
  }

  std::optional<LinkedStack> pop(int k) const {
    if (k < 1 || k > order_) return std::nullopt;
    if (k == order_) {
      if (height() <= 1) return std::nullopt;
      LinkedStack s = *this;
      if (order_ == 1)
        s.syms_ = syms_.pop();
      else
        s.subs_ = subs_.pop();
      return s;
    }
    auto t = subs_.top().pop(k);
    if (!t) return std::nullopt;
    return replace_top(*t);
  }

  // push_k, 2 <= k <= order: duplicate the top (k-1)-stack.
  std::optional<LinkedStack> push(int k) const {
    if (k < 2 || k > order_) return std::nullopt;
    if (k == order_) {
      LinkedStack s = *this;
      s.subs_ = subs_.push(subs_.top());
      return s;
    }
    auto t = subs_.top().push(k);
    if (!t) return std::nullopt;
    return replace_top(*t);
  }

  // push1 of gamma with an e-link to the (e-1)-stack just below the top one.
  std::optional<LinkedStack> push1(const Symbol& gamma, int e) const {
    if (e < 1 || e > order_) return std::nullopt;
    if (order_ == 1) {
      LinkedStack s = *this;
      s.syms_ = syms_.push(StackSymbol{gamma, 1, syms_.size()});
      return s;
    }
    if (e == order_) {
      if (height() < 2) return std::nullopt;
      return replace_top(subs_.top().push_symbol(StackSymbol{gamma, e, height() - 1}));
    }
    auto t = subs_.top().push1(gamma, e);
    if (!t) return std::nullopt;
    return replace_top(*t);
  }

  // Replace the top symbol, keeping its link. Undefined on a bare ⊥ 1-stack.
  std::optional<LinkedStack> rewrite(const Symbol& gamma) const {
    if (order_ == 1) {
      if (syms_.size() < 2) return std::nullopt;
      StackSymbol top = syms_.top();
      top.name = gamma;
      LinkedStack s = *this;
      s.syms_ = syms_.pop().push(top);
      return s;
    }
    auto t = subs_.top().rewrite(gamma);
    if (!t) return std::nullopt;
    return replace_top(*t);
  }

  std::optional<LinkedStack> collapse() const {
    const StackSymbol& top = top_symbol();
    if (top.link_order == 0) return std::nullopt;
    return truncate_at(top.link_order, top.link_height);
  }

  // Every symbol replaced by ♯, links kept.
  LinkedStack shape() const {
    LinkedStack s;
    s.order_ = order_;
    if (order_ == 1) {
      for (auto sym : syms_.to_vector()) {
        sym.name = kShape;
        s.syms_ = s.syms_.push(sym);
      }
    } else {
      for (auto& sub : subs_.to_vector()) s.subs_ = s.subs_.push(sub.shape());
    }
    return s;
  }

  friend bool operator==(const LinkedStack& a, const LinkedStack& b) {
    if (a.order_ != b.order_) return false;
    return a.order_ == 1 ? a.syms_ == b.syms_ : a.subs_ == b.subs_;
  }

  // [[⊥ α] [⊥ α β@(2,1)]]; links of order 1 are implicit.
  std::string to_string() const {
    std::string out = "[";
    if (order_ == 1) {
      auto v = syms_.to_vector();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += v[i].name;
        if (v[i].link_order > 1)
          out += "@(" + std::to_string(v[i].link_order) + "," + std::to_string(v[i].link_height) + ")";
      }
    } else {
      auto v = subs_.to_vector();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += v[i].to_string();
      }
    }
    return out + "]";
  }

  static LinkedStack parse(std::string_view text);

  // Builders used by the parser.
  static LinkedStack from_symbols(const std::vector<StackSymbol>& syms) {
    LinkedStack s;
    s.order_ = 1;
    for (auto& x : syms) s.syms_ = s.syms_.push(x);
    return s;
  }
  static LinkedStack from_stacks(const std::vector<LinkedStack>& subs) {
    LinkedStack s;
    s.order_ = subs.front().order_ + 1;
    for (auto& x : subs) s.subs_ = s.subs_.push(x);
    return s;
  }
  std::vector<StackSymbol> symbols() const { return syms_.to_vector(); }
  std::vector<LinkedStack> substacks() const { return subs_.to_vector(); }

 private:
  static LinkedStack wrap(const LinkedStack& inner) {
    LinkedStack s;
    s.order_ = inner.order_ + 1;
    s.subs_ = s.subs_.push(inner);
    return s;
  }

  LinkedStack replace_top(const LinkedStack& t) const {
    LinkedStack s = *this;
    s.subs_ = subs_.pop().push(t);
    return s;
  }

  LinkedStack push_symbol(const StackSymbol& sym) const {
    if (order_ == 1) {
      LinkedStack s = *this;
      s.syms_ = syms_.push(sym);
      return s;
    }
    return replace_top(subs_.top().push_symbol(sym));
  }

  std::optional<LinkedStack> truncate_at(int e, std::size_t p) const {
    if (e == order_) {
      if (p < 1 || p >= height()) return std::nullopt;
      LinkedStack s = *this;
      if (order_ == 1)
        s.syms_ = syms_.truncate(p);
      else
        s.subs_ = subs_.truncate(p);
      return s;
    }
    auto t = subs_.top().truncate_at(e, p);
    if (!t) return std::nullopt;
    return replace_top(*t);
  }

  int order_ = 0;
  PList<StackSymbol> syms_;
  PList<LinkedStack> subs_;
};

namespace detail {

class StackReader {
 public:
  explicit StackReader(std::string_view t) : t_(t) {}

  LinkedStack read_top() {
    LinkedStack s = read();
    skip();
    if (i_ != t_.size()) fail("trailing input");
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& m) {
    throw ParseError("stack: " + m + " at offset " + std::to_string(i_), 1);
  }
  void skip() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
  }
  LinkedStack read() {
    skip();
    if (i_ >= t_.size() || t_[i_] != '[') fail("expected '['");
    ++i_;
    skip();
    if (i_ < t_.size() && t_[i_] == '[') {
      std::vector<LinkedStack> subs;
      while (true) {
        skip();
        if (i_ < t_.size() && t_[i_] == ']') break;
        subs.push_back(read());
        if (subs.back().order() != subs.front().order()) fail("mixed orders");
      }
      ++i_;
      return LinkedStack::from_stacks(subs);
    }
    std::vector<StackSymbol> syms;
    while (true) {
      skip();
      if (i_ >= t_.size()) fail("missing ']'");
      if (t_[i_] == ']') break;
      std::size_t st = i_;
      while (i_ < t_.size() && !std::isspace(static_cast<unsigned char>(t_[i_])) && t_[i_] != '[' &&
             t_[i_] != ']' && t_[i_] != '@')
        ++i_;
      StackSymbol sym{std::string(t_.substr(st, i_ - st)), 0, 0};
      if (sym.name.empty()) fail("expected symbol");
      if (sym.name == "_") sym.name = kBottom;
      if (i_ < t_.size() && t_[i_] == '@') {
        ++i_;
        std::size_t close = t_.find(')', i_);
        if (t_.substr(i_, 1) != "(" || close == std::string_view::npos) fail("bad link");
        std::string body(t_.substr(i_ + 1, close - i_ - 1));
        auto comma = body.find(',');
        if (comma == std::string::npos) fail("bad link");
        sym.link_order = std::stoi(body.substr(0, comma));
        sym.link_height = std::stoul(body.substr(comma + 1));
        i_ = close + 1;
      } else if (!syms.empty()) {
        sym.link_order = 1;
        sym.link_height = syms.size();
      }
      if (syms.empty() && sym.name != kBottom && sym.name != kShape) fail("1-stack must start with ⊥");
      if (!syms.empty() && sym.name == kBottom) fail("⊥ above the bottom");
      syms.push_back(sym);
    }
    ++i_;
    if (syms.empty()) fail("empty 1-stack");
    return LinkedStack::from_symbols(syms);
  }

  std::string_view t_;
  std::size_t i_ = 0;
};

}  // namespace detail

inline LinkedStack LinkedStack::parse(std::string_view text) {
  return detail::StackReader(text).read_top();
}

// ---------------------------------------------------------------- operations

struct StackOp {
  enum class Kind { pop, push, push1, rew, collapse, id };
  Kind kind = Kind::id;
  int k = 0;  // pop/push order, or link order for push1
  Symbol gamma;

  static StackOp pop(int k) { return {Kind::pop, k, {}}; }
  static StackOp push(int k) { return {Kind::push, k, {}}; }
  static StackOp push1(Symbol g, int e) { return {Kind::push1, e, std::move(g)}; }
  static StackOp rew(Symbol g) { return {Kind::rew, 0, std::move(g)}; }
  static StackOp collapse() { return {Kind::collapse, 0, {}}; }
  static StackOp id() { return {Kind::id, 0, {}}; }

  // Same kind and order parameter; the pushed symbol is ignored.
  bool same_type(const StackOp& o) const { return kind == o.kind && k == o.k; }

  friend bool operator==(const StackOp& a, const StackOp& b) {
    return a.kind == b.kind && a.k == b.k && a.gamma == b.gamma;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::pop: return "(pop " + std::to_string(k) + ")";
      case Kind::push: return "(push " + std::to_string(k) + ")";
      case Kind::push1: return "(push1 " + gamma + " " + std::to_string(k) + ")";
      case Kind::rew: return "(rew " + gamma + ")";
      case Kind::collapse: return "collapse";
      case Kind::id: return "id";
    }
    return "?";
  }
};

inline std::optional<LinkedStack> apply_op(const StackOp& op, const LinkedStack& s) {
  switch (op.kind) {
    case StackOp::Kind::pop: return s.pop(op.k);
    case StackOp::Kind::push: return s.push(op.k);
    case StackOp::Kind::push1: return s.push1(op.gamma, op.k);
    case StackOp::Kind::rew: return s.rewrite(op.gamma);
    case StackOp::Kind::collapse: return s.collapse();
    case StackOp::Kind::id: return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- automata

inline const Symbol kEps = "eps";

struct CpdaMove {
  Symbol target;
  StackOp op;
};

struct Cpda {
  int order = 1;
  std::vector<Symbol> input;           // without ε
  std::vector<Symbol> stack_alphabet;  // without ⊥
  std::vector<Symbol> states;
  Symbol initial;
  std::set<Symbol> finals;
  std::map<std::tuple<Symbol, Symbol, Symbol>, CpdaMove> delta;  // (q, γ, a)

  void add(const Symbol& q, const Symbol& gamma, const Symbol& a, const Symbol& q2, StackOp op) {
    if (!delta.emplace(std::make_tuple(q, gamma, a), CpdaMove{q2, std::move(op)}).second)
      throw Error("nondeterministic transition from (" + q + ", " + gamma + ", " + a + ")");
  }

  const CpdaMove* move(const Symbol& q, const Symbol& gamma, const Symbol& a) const {
    auto it = delta.find(std::make_tuple(q, gamma, a));
    return it == delta.end() ? nullptr : &it->second;
  }

  bool has_eps(const Symbol& q, const Symbol& gamma) const { return move(q, gamma, kEps) != nullptr; }

  void validate() const {
    std::set<Symbol> qs(states.begin(), states.end());
    std::set<Symbol> gs(stack_alphabet.begin(), stack_alphabet.end());
    gs.insert(kBottom);
    std::set<Symbol> as(input.begin(), input.end());
    if (!qs.count(initial)) throw Error("initial state '" + initial + "' undeclared");
    for (auto& f : finals)
      if (!qs.count(f)) throw Error("final state '" + f + "' undeclared");
    for (auto& [key, mv] : delta) {
      auto& [q, g, a] = key;
      std::string where = "transition (" + q + " " + g + " " + a + ")";
      if (!qs.count(q) || !qs.count(mv.target)) throw Error(where + ": undeclared state");
      if (!gs.count(g)) throw Error(where + ": undeclared stack symbol");
      if (a != kEps && !as.count(a)) throw Error(where + ": undeclared input letter");
      if (a != kEps && has_eps(q, g)) throw Error(where + ": letter move alongside an ε move");
      const StackOp& op = mv.op;
      bool bad = false;
      switch (op.kind) {
        case StackOp::Kind::pop: bad = op.k < 1 || op.k > order; break;
        case StackOp::Kind::push: bad = op.k < 2 || op.k > order; break;
        case StackOp::Kind::push1: bad = op.k < 1 || op.k > order || !gs.count(op.gamma) || op.gamma == kBottom; break;
        case StackOp::Kind::rew: bad = !gs.count(op.gamma) || op.gamma == kBottom; break;
        default: break;
      }
      if (bad) throw Error(where + ": bad stack operation " + op.to_string());
    }
  }
};

struct Configuration {
  Symbol state;
  LinkedStack stack;

  std::string key() const { return state + " " + stack.to_string(); }
  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.state == b.state && a.stack == b.stack;
  }
};

inline Configuration initial_configuration(const Cpda& m) {
  return {m.initial, LinkedStack::initial(m.order)};
}

struct StepOutcome {
  enum class Failure { none, no_transition, stack_undefined };
  std::optional<Configuration> next;
  Failure failure = Failure::none;
  explicit operator bool() const { return next.has_value(); }
};

inline StepOutcome step_config(const Cpda& m, const Configuration& c, const Symbol& a) {
  const CpdaMove* mv = m.move(c.state, c.stack.top_symbol().name, a);
  if (!mv) return {std::nullopt, StepOutcome::Failure::no_transition};
  auto s = apply_op(mv->op, c.stack);
  if (!s) return {std::nullopt, StepOutcome::Failure::stack_undefined};
  return {Configuration{mv->target, *s}, StepOutcome::Failure::none};
}

struct EpsClosure {
  enum class Status { reached, divergent, exhausted };
  Status status = Status::reached;
  Configuration config;               // the non-ε configuration when reached
  std::vector<Configuration> path;    // configurations visited, start included
};

// Follows ε moves until a configuration without an enabled ε move. A
// repeated configuration means divergence; more than max_steps moves means
// the budget ran out.
inline EpsClosure eps_closure(const Cpda& m, const Configuration& c, std::size_t max_steps) {
  EpsClosure out;
  std::unordered_set<std::string> seen;
  Configuration cur = c;
  for (std::size_t steps = 0;; ++steps) {
    out.path.push_back(cur);
    if (!seen.insert(cur.key()).second) {
      out.status = EpsClosure::Status::divergent;
      return out;
    }
    auto nx = step_config(m, cur, kEps);
    if (!nx) {
      out.status = EpsClosure::Status::reached;
      out.config = cur;
      return out;
    }
    if (steps == max_steps) {
      out.status = EpsClosure::Status::exhausted;
      return out;
    }
    cur = *nx.next;
  }
}

// Word acceptance: ε moves are interleaved freely; a word is accepted when
// a final configuration occurs after its last letter has been read.
inline bool accepts(const Cpda& m, const std::vector<Symbol>& word, std::size_t max_steps = 100000) {
  Configuration cur = initial_configuration(m);
  for (std::size_t i = 0;; ++i) {
    EpsClosure cl = eps_closure(m, cur, max_steps);
    if (i == word.size()) {
      for (auto& c : cl.path)
        if (m.finals.count(c.state)) return true;
      if (cl.status == EpsClosure::Status::reached) return false;
    }
    if (cl.status == EpsClosure::Status::divergent)
      throw DivergentEpsilon("ε-divergence from " + cur.key());
    if (cl.status == EpsClosure::Status::exhausted)
      throw DivergentEpsilon("ε-budget exhausted from " + cur.key());
    if (i == word.size()) return false;
    auto nx = step_config(m, cl.config, word[i]);
    if (!nx) return false;
    cur = *nx.next;
  }
}

// Assigns a terminal to every state; directions of the generated tree are
// the input letters "1" .. "m".
struct Labeling {
  RankedAlphabet alphabet;
  std::map<Symbol, Symbol> label;  // state -> terminal

  const Symbol& of(const Symbol& q) const {
    auto it = label.find(q);
    if (it == label.end()) throw Error("state '" + q + "' has no label");
    return it->second;
  }
};

struct GeneratedTree {
  PartialTree tree;
  std::map<Node, Configuration> config;  // non-ε configuration of each decided node
};

inline GeneratedTree generate_tree_with_configs(const Cpda& m, const Labeling& rho, const Budget& b) {
  m.validate();
  GeneratedTree out;
  std::vector<std::pair<Node, Configuration>> todo{{Node{}, initial_configuration(m)}};
  while (!todo.empty()) {
    auto [u, c] = std::move(todo.back());
    todo.pop_back();
    if (u.size() >= b.max_depth) {
      out.tree.set(u, kBottom);
      continue;
    }
    EpsClosure cl = eps_closure(m, c, b.max_steps);
    if (cl.status != EpsClosure::Status::reached) {
      out.tree.set(u, kBottom);
      continue;
    }
    const Configuration& v = cl.config;
    const Symbol& f = rho.of(v.state);
    std::size_t ar = rho.alphabet.arity(f);
    std::vector<Configuration> kids;
    for (std::size_t d = 1; d <= ar; ++d) {
      auto nx = step_config(m, v, std::to_string(d));
      if (!nx)
        throw ArityMismatch("configuration " + v.key() + " labelled " + f + " has no move on " +
                            std::to_string(d));
      kids.push_back(*nx.next);
    }
    for (auto& a : m.input) {
      bool in_range = false;
      for (std::size_t d = 1; d <= ar; ++d) in_range |= a == std::to_string(d);
      if (!in_range && step_config(m, v, a))
        throw ArityMismatch("configuration " + v.key() + " labelled " + f + " has a move on " + a);
    }
    out.tree.set(u, f);
    out.config.emplace(u, v);
    for (std::size_t d = ar; d-- > 0;) todo.emplace_back(child(u, static_cast<unsigned>(d + 1)), kids[d]);
  }
  return out;
}

inline PartialTree generate_tree(const Cpda& m, const Labeling& rho, const Budget& b) {
  return generate_tree_with_configs(m, rho, b).tree;
}

inline LinkedStack stack_shape(const LinkedStack& s) { return s.shape(); }

struct SyncReport {
  bool synchronised = true;
  std::string witness;  // description of the first disagreement
};

// Runs both machines along each word (ε moves included) and compares the
// type of every stack operation and the resulting stack shapes.
inline SyncReport synchronised_check(const Cpda& m1, const Cpda& m2,
                                     const std::vector<std::vector<Symbol>>& words,
                                     std::size_t max_steps = 10000) {
  if (m1.order != m2.order) return {false, "orders differ"};
  for (auto& w : words) {
    Configuration c1 = initial_configuration(m1), c2 = initial_configuration(m2);
    std::size_t i = 0;
    std::string trace;
    for (std::size_t n = 0; n < max_steps; ++n) {
      if (!(stack_shape(c1.stack) == stack_shape(c2.stack)))
        return {false, "shapes differ after " + trace};
      bool e1 = m1.has_eps(c1.state, c1.stack.top_symbol().name);
      bool e2 = m2.has_eps(c2.state, c2.stack.top_symbol().name);
      if (e1 != e2) return {false, "ε enabled in one machine only after " + trace};
      if (!e1 && i == w.size()) break;
      Symbol a = e1 ? kEps : w[i];
      const CpdaMove* mv1 = m1.move(c1.state, c1.stack.top_symbol().name, a);
      const CpdaMove* mv2 = m2.move(c2.state, c2.stack.top_symbol().name, a);
      if (!mv1 && !mv2) break;
      if (!mv1 || !mv2) return {false, "move on " + a + " defined in one machine only after " + trace};
      if (!mv1->op.same_type(mv2->op))
        return {false, "operations " + mv1->op.to_string() + " and " + mv2->op.to_string() + " after " + trace};
      auto s1 = apply_op(mv1->op, c1.stack);
      auto s2 = apply_op(mv2->op, c2.stack);
      if (s1.has_value() != s2.has_value()) return {false, "definedness differs after " + trace};
      if (!s1) break;
      c1 = {mv1->target, *s1};
      c2 = {mv2->target, *s2};
      trace += a + " ";
      if (!e1) ++i;
    }
  }
  return {};
}

// Deterministic finite automaton on input letters; missing moves go to an
// implicit rejecting sink.
struct WordDfa {
  std::vector<Symbol> states;
  Symbol initial;
  std::set<Symbol> finals;
  std::map<std::pair<Symbol, Symbol>, Symbol> delta;
};

inline const Symbol kDfaSink = "sink";

// Product of m with a word automaton that follows the letters read by m.
// The stack behaviour is that of m; final states are those whose automaton
// component is final.
inline Cpda synchronised_product(const Cpda& m, const WordDfa& d) {
  Cpda out;
  out.order = m.order;
  out.input = m.input;
  out.stack_alphabet = m.stack_alphabet;
  std::vector<Symbol> ds = d.states;
  ds.push_back(kDfaSink);
  auto name = [](const Symbol& q, const Symbol& p) { return q + "|" + p; };
  for (auto& q : m.states)
    for (auto& p : ds) {
      out.states.push_back(name(q, p));
      if (d.finals.count(p)) out.finals.insert(name(q, p));
    }
  out.initial = name(m.initial, d.initial);
  for (auto& [key, mv] : m.delta) {
    auto& [q, g, a] = key;
    for (auto& p : ds) {
      Symbol p2 = p;
      if (a != kEps) {
        auto it = d.delta.find({p, a});
        p2 = it == d.delta.end() || p == kDfaSink ? kDfaSink : it->second;
      }
      out.add(name(q, p), g, a, name(mv.target, p2), mv.op);
    }
  }
  return out;
}

// ---------------------------------------------------------------- text format

inline StackOp parse_stack_op(const Sexp& e) {
  if (e.is("collapse")) return StackOp::collapse();
  if (e.is("id")) return StackOp::id();
  std::string h = e.head();
  if (h == "pop" && e.size() == 2) return StackOp::pop(static_cast<int>(parse_int(e[1], "order")));
  if (h == "push" && e.size() == 2) return StackOp::push(static_cast<int>(parse_int(e[1], "order")));
  if (h == "push1" && e.size() == 3)
    return StackOp::push1(expect_atom(e[1], "stack symbol"), static_cast<int>(parse_int(e[2], "link order")));
  if (h == "rew" && e.size() == 2) return StackOp::rew(expect_atom(e[1], "stack symbol"));
  throw ParseError("unknown stack operation " + e.to_string(), e.line);
}

inline Cpda parse_cpda(std::string_view text) {
  Cpda m;
  bool have_order = false, have_initial = false;
  for (auto& blk : read_sexps(text)) {
    std::string h = blk.head();
    auto atoms = [&](std::vector<Symbol>& into) {
      for (std::size_t i = 1; i < blk.size(); ++i) into.push_back(expect_atom(blk[i], "name"));
    };
    if (h == "order") {
      m.order = static_cast<int>(parse_int(blk.size() == 2 ? blk[1] : blk, "order"));
      if (m.order < 1) throw ParseError("order must be positive", blk.line);
      have_order = true;
    } else if (h == "input") {
      atoms(m.input);
    } else if (h == "stack-alphabet") {
      atoms(m.stack_alphabet);
    } else if (h == "states") {
      atoms(m.states);
    } else if (h == "initial") {
      m.initial = expect_atom(blk.size() == 2 ? blk[1] : blk, "state");
      have_initial = true;
    } else if (h == "final") {
      std::vector<Symbol> fs;
      atoms(fs);
      m.finals.insert(fs.begin(), fs.end());
    } else if (blk.size() == 6 && blk[3].is("->")) {
      Symbol g = expect_atom(blk[1], "stack symbol");
      if (g == "_") g = kBottom;
      try {
        m.add(expect_atom(blk[0], "state"), g, expect_atom(blk[2], "letter"), expect_atom(blk[4], "state"),
              parse_stack_op(blk[5]));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), blk.line);
      }
    } else {
      throw ParseError("unrecognised line " + blk.to_string(), blk.line);
    }
  }
  if (!have_order) throw ParseError("missing order", 1);
  if (!have_initial) throw ParseError("missing initial state", 1);
  try {
    m.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), 1);
  }
  return m;
}

inline std::string print_cpda(const Cpda& m) {
  auto list = [](const std::string& h, const auto& xs) {
    std::string out = "(" + h;
    for (auto& x : xs) out += " " + x;
    return out + ")\n";
  };
  std::string out = "(order " + std::to_string(m.order) + ")\n";
  out += list("input", m.input);
  out += list("stack-alphabet", m.stack_alphabet);
  out += list("states", m.states);
  out += "(initial " + m.initial + ")\n";
  out += list("final", m.finals);
  for (auto& [key, mv] : m.delta) {
    auto& [q, g, a] = key;
    out += "(" + q + " " + g + " " + a + " -> " + mv.target + " " + mv.op.to_string() + ")\n";
  }
  return out;
}

// Labeling file: (alphabet (a 2) ...) followed by (label q a) lines.
inline Labeling parse_labeling(std::string_view text) {
  Labeling l;
  for (auto& blk : read_sexps(text)) {
    std::string h = blk.head();
    if (h == "alphabet") {
      for (std::size_t i = 1; i < blk.size(); ++i) {
        const Sexp& d = blk[i];
        if (!d.is_list() || d.size() != 2) throw ParseError("expected (symbol arity)", d.line);
        l.alphabet.add(expect_atom(d[0], "symbol"), static_cast<std::size_t>(parse_int(d[1], "arity")));
      }
    } else if (h == "label" && blk.size() == 3) {
      Symbol f = expect_atom(blk[2], "terminal");
      if (!l.alphabet.contains(f)) throw ParseError("label '" + f + "' not in alphabet", blk.line);
      l.label[expect_atom(blk[1], "state")] = f;
    } else {
      throw ParseError("unrecognised line " + blk.to_string(), blk.line);
    }
  }
  return l;
}

}  // namespace hocpda
