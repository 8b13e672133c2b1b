#include <gtest/gtest.h>

#include "hocpda/transforms.hpp"
#include "oracles.hpp"

using namespace hocpda;
using namespace hocpda::test;

namespace {

Scheme diverge() { return parse_scheme(test::fixture("diverge.hrs")); }

// f(⊠, f(a, f(a, ...))) cut at depth d
PartialTree diverge_target(std::size_t d) {
  PartialTree t;
  for (std::size_t k = 0; k <= d; ++k) {
    Node spine(k, 2);
    if (k == d) {
      t.set(spine, kBottom);
      break;
    }
    t.set(spine, "f");
    t.set(child(spine, 1), k + 1 == d ? kBottom : k == 0 ? kBox : "a");
  }
  return t;
}

PartialTree box_to_bottom(PartialTree t) {
  for (auto& [u, a] : PartialTree(t))
    if (a == kBox) t.set(u, kBottom);
  return t;
}

bool has_label(const PartialTree& t, const Symbol& a) {
  for (auto& [u, l] : t)
    if (l == a) return true;
  return false;
}

}  // namespace

TEST(TickTransform, DivergeRules) {
  auto t = tick_transform(diverge());
  ASSERT_EQ(t.rules.size(), 3u);
  EXPECT_EQ(t.rules[0].head, "I");
  EXPECT_EQ(t.rules[0].body.to_string(), "(@ (f (H a) (F f)))");
  EXPECT_EQ(t.rules[1].body.to_string(), "(@ (H (H z)))");
  EXPECT_EQ(t.rules[2].body.to_string(), "(@ (phi a (F phi)))");
  EXPECT_EQ(t.rules[2].formals, std::vector<Symbol>{"phi"});
  EXPECT_EQ(t.terminals.arity(kTick), 1u);
  EXPECT_TRUE(validate(t).empty());
  EXPECT_EQ(parse_scheme(print_scheme(t)), t);
}

TEST(TickTransform, BodiesWithoutNonterminals) {
  auto s = parse_scheme("(terminals (g 1) (a 0)) (nonterminals (I o)) (start I) (rules ((I) (g a)))");
  auto t = tick_transform(s);
  EXPECT_EQ(t.rules[0].body.to_string(), "(@ (g a))");
  EXPECT_EQ(print_tree(unfold_value_tree(t, {5, 10})), "(@ (g (a)))");
  EXPECT_EQ(print_tree(unfold_ticked(t, {5, 10})), "(@ (g (a)))");
}

TEST(TickTransform, Clash) {
  auto s = parse_scheme("(terminals (@ 1) (a 0)) (nonterminals (I o)) (start I) (rules ((I) (@ a)))");
  EXPECT_THROW(tick_transform(s), SymbolClash);
  EXPECT_THROW(tick_transform(tick_transform(diverge())), SymbolClash);
  EXPECT_THROW(unfold_ticked(diverge(), {3, 3}), InvalidScheme);
}

TEST(TickTransform, NoBottomAtDecidedNodes) {
  for (auto name : {"diverge.hrs", "chains.hrs", "gchains.hrs"}) {
    auto t = tick_transform(parse_scheme(test::fixture(name)));
    for (std::size_t d = 0; d <= 12; ++d) {
      auto u = unfold_value_tree(t, {d, 1});
      for (auto& v : bottom_nodes(u)) EXPECT_EQ(v.size(), d) << name << " " << node_to_string(v);
    }
  }
}

TEST(ContractTicks, Basics) {
  auto t = parse_tree("(f (a) (g (⊥)))");
  EXPECT_EQ(contract_ticks(t, {}), t);
  EXPECT_EQ(print_tree(contract_ticks(parse_tree("(@ (@ (a)))"), {})), "(a)");
  auto c = parse_tree("(f (@ (@ (⊥))) (@ (g (@ (a)))))");
  EXPECT_EQ(print_tree(contract_ticks(c, {parse_node("1")})), "(f (⊠) (g (a)))");
  EXPECT_EQ(print_tree(contract_ticks(c, {parse_node("11")})), "(f (⊠) (g (a)))");
  EXPECT_EQ(print_tree(contract_ticks(c, {})), "(f (⊥) (g (a)))");
  EXPECT_EQ(divergence_marks(c), std::set<Node>{parse_node("1")});
  EXPECT_THROW(contract_ticks(c, {parse_node("21")}), InvalidMark);
  EXPECT_THROW(contract_ticks(c, {parse_node("3")}), NodeOutOfDomain);
}

TEST(ContractTicks, DivergencePipeline) {
  for (std::size_t d = 1; d <= 10; ++d)
    EXPECT_EQ(print_tree(eliminate_divergence(diverge(), {d, 64})), print_tree(diverge_target(d))) << d;
  EXPECT_EQ(print_tree(eliminate_divergence(diverge(), {8, 200})),
            "(f (⊠) (f (a) (f (a) (f (a) (f (a) (f (a) (f (a) (f (⊥) (⊥)))))))))");
}

TEST(TransformProperty, DomainCorrespondence) {
  test::Rng rng(81);
  std::vector<Scheme> fixed = {diverge(), parse_scheme(test::fixture("chains.hrs")),
                               parse_scheme(test::fixture("gchains.hrs"))};
  std::size_t boxes = 0;
  for (int i = 0; i < 600; ++i) {
    Scheme s = i < 150 ? fixed[static_cast<std::size_t>(i) % 3] : random_scheme(rng);
    ASSERT_TRUE(validate(s).empty()) << print_scheme(s);
    Budget b{test::uniform(rng, 0, 8), test::uniform(rng, 0, 40)};
    auto ticked_scheme = tick_transform(s);
    ASSERT_TRUE(validate(ticked_scheme).empty());
    auto ticked = unfold_ticked(ticked_scheme, b);
    auto out = contract_ticks(ticked, divergence_marks(ticked));
    ASSERT_FALSE(has_label(out, kTick));
    // without any step nothing is ticked, so undecided nodes stay ⊥
    if (b.max_steps > 0) {
      for (auto& v : bottom_nodes(out)) ASSERT_EQ(v.size(), b.max_depth) << print_tree(out);
    }
    ASSERT_EQ(box_to_bottom(out), unfold_value_tree(s, b)) << print_scheme(s);
    boxes += has_label(out, kBox);
  }
  EXPECT_GT(boxes, 60u);
}

TEST(PairMark, Marks) {
  auto t = parse_tree("(f (g (a)) (f (a) (b)))");
  for (auto& [u, a] : pair_mark(t, std::nullopt, std::nullopt)) EXPECT_EQ(a, t.at(u) + "{}");
  auto same = pair_mark(t, parse_node("21"), parse_node("21"));
  EXPECT_EQ(same.at(parse_node("21")), "a{1,2}");
  EXPECT_THROW(pair_mark(t, Node{}, parse_node("13")), NodeOutOfDomain);
  auto two = pair_mark(t, Node{}, parse_node("11"));
  std::size_t marked = 0;
  for (auto& [u, a] : two) marked += a.back() != '}' || a[a.size() - 2] != '{';
  EXPECT_EQ(marked, 2u);
  EXPECT_EQ(two.at(Node{}), "f{1}");
  EXPECT_EQ(two.at(parse_node("11")), "a{2}");
}

TEST(PairMarkProperty, EraseIsIdentity) {
  RankedAlphabet sigma;
  sigma.add("f", 2);
  sigma.add("g", 1);
  sigma.add("a", 0);
  test::Rng rng(82);
  for (int i = 0; i < 500; ++i) {
    auto t = test::random_tree(rng, sigma, test::uniform(rng, 1, 20), 0.1);
    std::vector<Node> dom;
    for (auto& [u, a] : t) dom.push_back(u);
    auto pick = [&]() -> std::optional<Node> {
      if (test::coin(rng, 0.2)) return std::nullopt;
      return dom[test::uniform(rng, 0, dom.size() - 1)];
    };
    auto u = pick(), v = pick();
    auto m = pair_mark(t, u, v);
    ASSERT_EQ(erase_pair_marks(m), t);
    for (auto& [w, a] : m) {
      if (a == kBottom) continue;
      bool one = u && *u == w, second = v && *v == w;
      ASSERT_EQ(a, pair_label(t.at(w), one, second));
    }
  }
}
