#include <gtest/gtest.h>

#include "hocpda/twa.hpp"
#include "support.hpp"

using namespace hocpda;

namespace {

RankedAlphabet sigma_m() {
  RankedAlphabet s;
  s.add("f", 2);
  s.add("g", 1);
  s.add("m", 1);
  s.add("a", 0);
  s.add("b", 0);
  return s;
}

RankedAlphabet sigma_plain() {
  RankedAlphabet s;
  s.add("f", 2);
  s.add("g", 1);
  s.add("a", 0);
  s.add("b", 0);
  return s;
}

// y = parent of x
ParityTreeAutomaton parent_relation(const RankedAlphabet& sigma) {
  ParityTreeAutomaton b;
  b.alphabet = pair_alphabet(sigma);
  auto none = b.add_state("none");
  auto want1 = b.add_state("want1");
  auto start = b.add_state("start");
  b.initial = start;
  for (auto& a : sigma.symbols()) {
    std::size_t k = sigma.arity(a);
    if (k == 0) {
      b.acc.insert({none, pair_label(a, false, false)});
      b.acc.insert({want1, pair_label(a, true, false)});
      continue;
    }
    b.add_transition(none, pair_label(a, false, false), std::vector<std::size_t>(k, none));
    b.add_transition(want1, pair_label(a, true, false), std::vector<std::size_t>(k, none));
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::size_t> to(k, none);
      to[i] = start;
      b.add_transition(start, pair_label(a, false, false), to);
      to[i] = want1;
      b.add_transition(start, pair_label(a, false, true), to);
    }
  }
  return b;
}

// y = first g on the leftmost path from x (x included)
ParityTreeAutomaton first_g_relation(const RankedAlphabet& sigma) {
  ParityTreeAutomaton b;
  b.alphabet = pair_alphabet(sigma);
  auto free = b.add_state("free");
  auto path = b.add_state("path");
  auto start = b.add_state("start");
  b.initial = start;
  for (auto& a : sigma.symbols()) {
    std::size_t k = sigma.arity(a);
    auto lab = [&](bool x, bool y) { return pair_label(a, x, y); };
    if (k == 0) {
      b.acc.insert({free, lab(false, false)});
      b.acc.insert({start, lab(false, false)});
      continue;
    }
    std::vector<std::size_t> all_free(k, free);
    b.add_transition(free, lab(false, false), all_free);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::size_t> to(k, free);
      to[i] = start;
      b.add_transition(start, lab(false, false), to);
    }
    auto first = all_free;
    first[0] = path;
    if (a == "g") {
      b.add_transition(start, lab(true, true), all_free);
      b.add_transition(path, lab(false, true), all_free);
    } else {
      b.add_transition(start, lab(true, false), first);
      b.add_transition(path, lab(false, false), first);
    }
  }
  return b;
}

// Exactly one 1-mark and one 2-mark; the 2-mark sits on the root
// (at_root) or on the only m-labelled node (otherwise).
ParityTreeAutomaton placed_relation(const RankedAlphabet& sigma, bool at_root) {
  ParityTreeAutomaton b;
  b.alphabet = pair_alphabet(sigma);
  // state n1 + 2*n2: which marks are still owed in this subtree; 4 is the root
  for (int n = 0; n < 4; ++n) b.add_state("n" + std::to_string(n));
  auto root = b.add_state("root");
  b.initial = at_root ? root : 3;
  for (auto& a : sigma.symbols()) {
    std::size_t k = sigma.arity(a);
    for (int src = 0; src < 5; ++src) {
      int n1 = src == 4 ? 1 : src & 1, n2 = src == 4 ? 1 : src >> 1;
      for (int m1 = 0; m1 <= n1; ++m1)
        for (int m2 = 0; m2 <= n2; ++m2) {
          if (at_root && (src == 4) != (m2 == 1)) continue;
          if (!at_root && (a == "m") != (m2 == 1)) continue;
          int r1 = n1 - m1, r2 = n2 - m2;
          Symbol lab = pair_label(a, m1, m2);
          if (k == 0) {
            if (r1 == 0 && r2 == 0) b.acc.insert({static_cast<std::size_t>(src), lab});
            continue;
          }
          // hand each owed mark to one child
          for (std::size_t c1 = 0; c1 < k; ++c1)
            for (std::size_t c2 = 0; c2 < k; ++c2) {
              if ((!r1 && c1) || (!r2 && c2)) continue;
              std::vector<std::size_t> to(k, 0);
              if (r1) to[c1] |= 1;
              if (r2) to[c2] |= 2;
              b.add_transition(static_cast<std::size_t>(src), lab, to);
            }
        }
    }
  }
  return b;
}

std::vector<Node> partners(const ParityTreeAutomaton& b, const PartialTree& t, const Node& u) {
  std::vector<Node> out;
  for (auto& [v, a] : t)
    if (finite_accepts(b, pair_mark(t, u, v))) out.push_back(v);
  return out;
}

PartialTree with_one_m(test::Rng& rng) {
  for (;;) {
    auto t = test::random_tree(rng, sigma_plain(), test::uniform(rng, 1, 14));
    std::vector<Node> gs;
    for (auto& [u, a] : t)
      if (a == "g") gs.push_back(u);
    if (gs.empty()) continue;
    t.set(gs[test::uniform(rng, 0, gs.size() - 1)], "m");
    return t;
  }
}

void check_walker(const ParityTreeAutomaton& b, const PartialTree& t) {
  auto ann = annotate_tree(t, {b});
  PairWalker w(b, 0);
  for (auto& [u, a] : t) {
    auto expect = partners(b, t, u);
    ASSERT_LE(expect.size(), 1u);
    auto r = twa_run(w, ann, u);
    if (expect.empty()) {
      ASSERT_EQ(r.outcome, TwaResult::Outcome::rejected) << print_tree(t) << " from " << node_to_string(u);
    } else {
      ASSERT_EQ(r.outcome, TwaResult::Outcome::accepted) << print_tree(t) << " from " << node_to_string(u);
      ASSERT_EQ(r.at, expect[0]) << print_tree(t) << " from " << node_to_string(u);
    }
  }
}

}  // namespace

TEST(Twa, TrivialTables) {
  auto t = parse_tree("(f (a) (g (b)))");
  TreeWalkingAutomaton w;
  auto p = w.add_state("p");
  w.finals.insert(p);
  auto r = twa_run(w, t, parse_node("21"));
  EXPECT_EQ(r.outcome, TwaResult::Outcome::accepted);
  EXPECT_EQ(node_to_string(r.at), "21");

  TreeWalkingAutomaton empty;
  empty.add_state("p");
  EXPECT_EQ(twa_run(empty, t, Node{}).outcome, TwaResult::Outcome::rejected);

  TreeWalkingAutomaton loop;
  auto q = loop.add_state("q");
  loop.add(q, "f", q, TwaMove::stay());
  r = twa_run(loop, t, Node{});
  EXPECT_EQ(r.outcome, TwaResult::Outcome::exhausted);
  EXPECT_EQ(r.steps, 4 * t.size());

  TreeWalkingAutomaton climb;
  q = climb.add_state("q");
  climb.add(q, "f", q, TwaMove::up());
  EXPECT_EQ(twa_run(climb, t, Node{}).outcome, TwaResult::Outcome::rejected);
  EXPECT_THROW(climb.add(q, "f", q, TwaMove::stay()), Error);
  EXPECT_THROW(twa_run(climb, t, parse_node("3")), NodeOutOfDomain);
}

TEST(Twa, WalksToRightmostLeaf) {
  auto w = parse_twa(R"((states go stop) (initial go) (final stop)
    (go f go 2) (go g go 1) (go a stop stay) (go b stop stay))");
  auto t = parse_tree("(f (a) (g (f (b) (a))))");
  auto r = twa_run(w, t, Node{});
  EXPECT_EQ(r.to_string(), "accepted-at 212");
  EXPECT_EQ(print_twa(parse_twa(print_twa(w))), print_twa(w));
  EXPECT_THROW(parse_twa("(states p) (initial p) (p a p stay) (p a p up)"), ParseError);
  EXPECT_THROW(parse_twa("(states p) (initial p) (p a p 0)"), ParseError);
}

TEST(Twa, HandBuiltTwoPhaseWalker) {
  // The annotation for the unique-m relation tells, at each node, which
  // children hold the m node; the walker climbs until one does, then descends.
  auto b = placed_relation(sigma_m(), false);
  auto t = parse_tree("(f (g (f (a) (m (b)))) (f (g (a)) (b)))");
  auto ann = annotate_tree(t, {b});
  const std::size_t owes_y = 2;
  FunctionTwa<AnnotatedLabel> w;
  w.states = 3;  // 0 climb, 1 descend, 2 found
  w.finals = {2};
  w.delta = [&](std::size_t s, const AnnotatedLabel& l) -> std::optional<std::pair<std::size_t, TwaMove>> {
    if (l.symbol == "m") return std::make_pair(std::size_t{2}, TwaMove::stay());
    for (unsigned d = 1; d <= l.arity; ++d)
      if (l.dirs[0].below.count({d, owes_y})) return std::make_pair(std::size_t{1}, TwaMove::down(d));
    if (s == 1) return std::nullopt;
    return std::make_pair(std::size_t{0}, TwaMove::up());
  };
  Node m_node;
  for (auto& [u, a] : t)
    if (a == "m") m_node = u;
  for (auto& [u, a] : t) {
    auto r = twa_run(w, ann, u);
    ASSERT_EQ(r.outcome, TwaResult::Outcome::accepted);
    EXPECT_EQ(r.at, m_node) << node_to_string(u);
  }
}

TEST(TwaProperty, WalkerFindsParent) {
  test::Rng rng(61);
  auto b = parent_relation(sigma_plain());
  for (int i = 0; i < 40; ++i) check_walker(b, test::random_tree(rng, sigma_plain(), test::uniform(rng, 1, 14)));
}

TEST(TwaProperty, WalkerFindsFirstGOnLeftPath) {
  test::Rng rng(62);
  auto b = first_g_relation(sigma_plain());
  for (int i = 0; i < 40; ++i) check_walker(b, test::random_tree(rng, sigma_plain(), test::uniform(rng, 1, 14)));
}

TEST(TwaProperty, WalkerFindsRoot) {
  test::Rng rng(63);
  auto b = placed_relation(sigma_plain(), true);
  for (int i = 0; i < 40; ++i) check_walker(b, test::random_tree(rng, sigma_plain(), test::uniform(rng, 1, 12)));
}

TEST(TwaProperty, WalkerFindsUniqueM) {
  test::Rng rng(64);
  auto b = placed_relation(sigma_m(), false);
  for (int i = 0; i < 40; ++i) check_walker(b, with_one_m(rng));
}
