#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "hocpda/cpda.hpp"
#include "hocpda/games.hpp"
#include "hocpda/hors.hpp"
#include "hocpda/mucalc.hpp"
#include "hocpda/transforms.hpp"
#include "hocpda/treeauto.hpp"
#include "hocpda/twa.hpp"

namespace hocpda {

using Artifact = std::variant<Scheme, Cpda, ParityArena, ParityTreeAutomaton, TreeWalkingAutomaton,
                              Formula, PartialTree, Labeling>;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses by extension and validates what can be validated on its own.
inline Artifact parse_artifact(const std::string& path, std::string_view text) {
  std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".hrs") {
    auto s = parse_scheme(text);
    require_valid(s);
    return s;
  }
  if (ext == ".cpda") return parse_cpda(text);
  if (ext == ".arena") return parse_arena(text);
  if (ext == ".pta") {
    auto a = parse_pta(text);
    a.validate();
    return a;
  }
  if (ext == ".twa") return parse_twa(text);
  if (ext == ".mu") {
    auto f = parse_formula(text);
    auto free = check_positive(f);
    if (!free.empty()) throw Error("formula has free variable " + *free.begin());
    return f;
  }
  if (ext == ".tree") {
    auto t = parse_tree(text);
    if (!t.well_formed()) throw ArityMismatch("tree domain is not prefix closed");
    return t;
  }
  if (ext == ".map") return parse_labeling(text);
  throw Error("unknown file extension '" + ext + "' for " + path);
}

inline std::string print_labeling(const Labeling& l) {
  std::string out = "(alphabet";
  for (auto& a : l.alphabet.symbols()) out += " (" + a + " " + std::to_string(l.alphabet.arity(a)) + ")";
  out += ")\n";
  for (auto& [q, a] : l.label) out += "(label " + q + " " + a + ")\n";
  return out;
}

inline std::string print_artifact(const Artifact& a) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Scheme>) return print_scheme(x);
        if constexpr (std::is_same_v<T, Cpda>) return print_cpda(x);
        if constexpr (std::is_same_v<T, ParityArena>) return print_arena(x);
        if constexpr (std::is_same_v<T, ParityTreeAutomaton>) return print_pta(x);
        if constexpr (std::is_same_v<T, TreeWalkingAutomaton>) return print_twa(x);
        if constexpr (std::is_same_v<T, Formula>) return x.to_string() + "\n";
        if constexpr (std::is_same_v<T, PartialTree>) return print_tree(x) + "\n";
        if constexpr (std::is_same_v<T, Labeling>) return print_labeling(x);
      },
      a);
}

// Budget from "depth,steps"; either part may be empty to keep the default.
inline Budget parse_budget(std::string_view text, Budget b = {}) {
  auto comma = text.find(',');
  auto num = [&](std::string_view s, std::size_t& out) {
    if (s.empty()) return;
    std::size_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw Error("bad budget '" + std::string(text) + "', expected depth,steps");
      v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    out = v;
  };
  num(text.substr(0, comma), b.max_depth);
  if (comma != std::string_view::npos) num(text.substr(comma + 1), b.max_steps);
  return b;
}

inline Budget budget_from_env() {
  const char* env = std::getenv("HOCPDA_BUDGET");
  return env ? parse_budget(env) : Budget{};
}

struct Workspace {
  std::map<std::string, Artifact> artifacts;
  Budget budget;

  const Artifact& load(const std::string& path) {
    auto it = artifacts.find(path);
    if (it == artifacts.end()) it = artifacts.emplace(path, parse_artifact(path, read_file(path))).first;
    return it->second;
  }

  template <class T>
  const T& get(const std::string& path) {
    const Artifact& a = load(path);
    if (auto* p = std::get_if<T>(&a)) return *p;
    throw Error("'" + path + "' has the wrong kind of content for this command");
  }

  // The labelled tree behind a scheme, a CPDA with a labeling, or a tree file.
  PartialTree tree(const std::string& path, const std::optional<std::string>& labeling) {
    const Artifact& a = load(path);
    if (auto* s = std::get_if<Scheme>(&a)) return unfold_value_tree(*s, budget);
    if (auto* m = std::get_if<Cpda>(&a)) {
      if (!labeling) throw Error("'" + path + "' needs --labeling");
      return generate_tree(*m, get<Labeling>(*labeling), budget);
    }
    if (auto* t = std::get_if<PartialTree>(&a)) return truncate(*t, budget.max_depth);
    throw Error("'" + path + "' does not describe a tree");
  }

  // Declared alphabet of a tree source, if it has one.
  std::optional<RankedAlphabet> alphabet(const std::string& path, const std::optional<std::string>& labeling) {
    const Artifact& a = load(path);
    if (auto* s = std::get_if<Scheme>(&a)) return s->terminals;
    if (std::holds_alternative<Cpda>(a) && labeling) return get<Labeling>(*labeling).alphabet;
    return std::nullopt;
  }

  Reflection reflect(const std::string& path, const std::optional<std::string>& labeling, const Formula& f) {
    const Artifact& a = load(path);
    if (auto* s = std::get_if<Scheme>(&a)) return reflect_tree(*s, f, budget);
    if (auto* m = std::get_if<Cpda>(&a)) {
      if (!labeling) throw Error("'" + path + "' needs --labeling");
      return reflect_tree(*m, get<Labeling>(*labeling), f, budget);
    }
    auto t = tree(path, labeling);
    return mark_tree(t, eval_bounded(f, t));
  }
};

// Symbol/arity pairs seen in a tree; ⊥ is left out.
inline std::map<Symbol, std::size_t> observed_alphabet(const PartialTree& t) {
  std::map<Symbol, std::size_t> out;
  for (auto& [u, a] : t)
    if (a != kBottom) out[a] = t.arity(u);
  return out;
}

struct TreeDiff {
  std::optional<Node> at;  // nullopt when equal
  std::string left, right;  // "-" for a missing node
  std::string to_string() const {
    return at ? node_to_string(*at) + " " + left + " " + right : "equal";
  }
};

// First node in preorder where the two prefixes disagree.
inline TreeDiff diff_trees(const PartialTree& a, const PartialTree& b) {
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) return {ia->first, ia->second, "-"};
    if (ia == a.end() || ib->first < ia->first) return {ib->first, "-", ib->second};
    if (ia->second != ib->second) return {ia->first, ia->second, ib->second};
    ++ia;
    ++ib;
  }
  return {};
}

}  // namespace hocpda
