#include <gtest/gtest.h>

#include "hocpda/core.hpp"
#include "support.hpp"

using namespace hocpda;

TEST(SimpleType, OrderOfGroundAndArrows) {
  EXPECT_EQ(SimpleType::ground().order(), 0u);
  auto o = SimpleType::ground();
  auto oo = SimpleType::arrow(o, o);
  EXPECT_EQ(oo.order(), 1u);
  EXPECT_EQ(SimpleType::arrow(oo, o).order(), 2u);
  EXPECT_EQ(SimpleType::arrow(o, oo).order(), 1u);
  EXPECT_EQ(SimpleType::arrow(SimpleType::arrow(oo, o), o).order(), 3u);
}

TEST(SimpleType, ParseAndPrint) {
  auto t = SimpleType::parse("((o -> o) -> (o -> o) -> o)");
  EXPECT_EQ(t.arity(), 2u);
  EXPECT_EQ(t.order(), 2u);
  EXPECT_EQ(t.to_string(), "(o -> o) -> (o -> o) -> o");
  EXPECT_EQ(SimpleType::parse("(" + t.to_string() + ")"), t);
  EXPECT_THROW(SimpleType::parse("(o ->)"), ParseError);
  EXPECT_THROW(SimpleType::parse("x"), ParseError);
}

TEST(Term, InferType) {
  TypeEnv env{{"a", SimpleType::parse("(o -> o -> o)")},
              {"d", SimpleType::ground()},
              {"F", SimpleType::parse("((o -> o) -> o)")}};
  auto a = Term::symbol("a", SymbolKind::terminal);
  auto d = Term::symbol("d", SymbolKind::terminal);
  EXPECT_TRUE(infer_type(Term::apply(a, {d, d}), env).is_ground());
  EXPECT_EQ(infer_type(Term::apply(a, d), env), SimpleType::parse("(o -> o)"));
  auto F = Term::symbol("F", SymbolKind::nonterminal);
  EXPECT_THROW(infer_type(Term::apply(F, d), env), ArgumentTypeMismatch);
  EXPECT_THROW(infer_type(Term::apply(d, d), env), ArgumentTypeMismatch);
  EXPECT_THROW(infer_type(Term::symbol("zz", SymbolKind::variable), env), UnboundSymbol);
}

TEST(Term, SpineAndPrint) {
  auto F = Term::symbol("F", SymbolKind::nonterminal);
  auto b = Term::symbol("b", SymbolKind::terminal);
  auto t = Term::apply(F, {b, Term::apply(b, b)});
  EXPECT_EQ(t.to_string(), "(F b (b b))");
  EXPECT_EQ(t.head().name(), "F");
  EXPECT_EQ(t.args().size(), 2u);
}

TEST(PartialTree, CanonicalText) {
  PartialTree t;
  t.set({}, "f");
  t.set({1}, "a");
  t.set({2}, "f");
  t.set({2, 1}, "a");
  t.set({2, 2}, kBottom);
  EXPECT_EQ(print_tree(t), "(f (a) (f (a) (⊥)))");
  EXPECT_EQ(parse_tree("(f (a) (f (a) (⊥)))"), t);
  EXPECT_TRUE(t.well_formed());
  EXPECT_EQ(t.depth(), 2u);
}

TEST(PartialTree, OrderAndTruncation) {
  auto big = parse_tree("(f (a) (f (a) (a)))");
  auto small = parse_tree("(f (a) (⊥))");
  EXPECT_TRUE(tree_leq(small, big));
  EXPECT_FALSE(tree_leq(big, small));
  EXPECT_FALSE(tree_leq(parse_tree("(f (b) (⊥))"), big));
  EXPECT_EQ(truncate(big, 1), parse_tree("(f (⊥) (⊥))"));
  EXPECT_EQ(truncate(big, 0), parse_tree("(⊥)"));
  EXPECT_EQ(subtree(big, {2}), parse_tree("(f (a) (a))"));
  EXPECT_THROW(subtree(big, {3}), NodeOutOfDomain);
}

TEST(PartialTree, RankCheck) {
  RankedAlphabet sigma{{"f", 2}, {"a", 0}};
  EXPECT_NO_THROW(check_ranked(parse_tree("(f (a) (⊥))"), sigma));
  EXPECT_THROW(check_ranked(parse_tree("(f (a))"), sigma), ArityMismatch);
  EXPECT_THROW(check_ranked(parse_tree("(g (a))"), sigma), ArityMismatch);
}

TEST(Node, TextRoundTrip) {
  EXPECT_EQ(node_to_string({}), "ε");
  EXPECT_EQ(node_to_string({1, 2, 1}), "121");
  EXPECT_EQ(parse_node("121"), (Node{1, 2, 1}));
  EXPECT_EQ(parse_node("ε"), Node{});
  EXPECT_EQ(parse_node(node_to_string({12, 3})), (Node{12, 3}));
}

TEST(PartialTreeProperty, PrintParseRoundTrip) {
  test::Rng rng(11);
  RankedAlphabet sigma{{"f", 2}, {"g", 1}, {"h", 3}, {"a", 0}, {"b", 0}};
  for (int i = 0; i < 500; ++i) {
    auto t = test::random_tree(rng, sigma, 40, 0.1);
    auto text = print_tree(t);
    ASSERT_EQ(parse_tree(text), t) << text;
    ASSERT_EQ(print_tree(parse_tree(text)), text);
    ASSERT_NO_THROW(check_ranked(t, sigma));
  }
}

TEST(PartialTreeProperty, TruncationIsBelowAndMonotone) {
  test::Rng rng(12);
  RankedAlphabet sigma{{"f", 2}, {"g", 1}, {"a", 0}};
  for (int i = 0; i < 500; ++i) {
    auto t = test::random_tree(rng, sigma, 30);
    std::size_t d = test::uniform(rng, 0, 6);
    auto lo = truncate(t, d), hi = truncate(t, d + 1);
    ASSERT_TRUE(tree_leq(lo, t));
    ASSERT_TRUE(tree_leq(lo, hi));
    ASSERT_TRUE(tree_leq(hi, t));
    ASSERT_TRUE(tree_leq(t, t));
  }
}
