// The size order on machine states: graph bases, valuations, the
// well-foundedness measure, the decidable order fragment, and the safety
// check connecting graphs to the order.
#include <gtest/gtest.h>

#include <set>
#include <string>

#include "sctlam/order.hpp"
#include "sctlam/parse.hpp"
#include "testutil.hpp"

using namespace sctlam;

namespace {

// Shared scenario: s = r@(r@a) : [r -> succ:[], a -> 2] and
// s' = r@(r@a) : [r -> (\a.r@(r@a)):[r -> succ:[]], a -> 2].
struct Scenario {
  Program body = parse_program("r@(r@a)");
  Program succ = parse_program("(\\m.(\\s.(\\z.((m @ s) @ (s @ z)))))");
  Program wrap = parse_program("\\a.r@(r@a)");
  Ast scratch;
  FvCache fv{Grammar{}};
  StatePtr succ_clo = make_state(succ.root, Env{});
  StatePtr two = make_state(church_numeral(scratch, 2), Env{});
  StatePtr s = make_state(body.root, Env{}.extend("r", succ_clo)
                                         .extend("a", two));
  StatePtr s2 = make_state(
      body.root,
      Env{}.extend("r", make_state(wrap.root, Env{}.extend("r", succ_clo)))
          .extend("a", two));
};

}  // namespace

TEST(Order, GraphBasis) {
  Scenario sc;
  std::set<NamePath> basis_s = graph_basis(*sc.s, sc.fv);
  EXPECT_EQ(basis_s, (std::set<NamePath>{{}, {"r"}, {"a"}}));

  // The nested closure under r adds the two-step path r.r.
  std::set<NamePath> basis_s2 = graph_basis(*sc.s2, sc.fv);
  EXPECT_EQ(basis_s2, (std::set<NamePath>{{}, {"r"}, {"r", "r"}, {"a"}}));

  // Machine values have the trivial basis.
  StatePtr n = make_state(nullptr, Env{});
  n = make_numeral(7, sc.body.root);
  EXPECT_EQ(graph_basis(*n, sc.fv), (std::set<NamePath>{{}}));
}

TEST(Order, ShowPath) {
  EXPECT_EQ(show_path({}), "eps");
  EXPECT_EQ(show_path({"r"}), "r");
  EXPECT_EQ(show_path({"r", "r"}), "r.r");
}

TEST(Order, Valuate) {
  Scenario sc;
  EXPECT_EQ(valuate(sc.s, {}), sc.s);
  EXPECT_EQ(valuate(sc.s, {"r"}), sc.succ_clo);
  EXPECT_EQ(valuate(sc.s, {"a"}), sc.two);
  // succ is closed: the path r.r leaves the basis of s...
  EXPECT_EQ(valuate(sc.s, {"r", "r"}), nullptr);
  // ...but not the basis of s'.
  EXPECT_EQ(valuate(sc.s2, {"r", "r"}), sc.succ_clo);
  EXPECT_EQ(valuate(sc.s, {"q"}), nullptr);
}

TEST(Order, ExpressionLength) {
  EXPECT_EQ(expr_length(parse_program("x").root), 1);
  EXPECT_EQ(expr_length(parse_program("\\x.x").root), 2);
  EXPECT_EQ(expr_length(parse_program("x@y").root), 3);
  EXPECT_EQ(expr_length(parse_program("r@(r@a)").root), 5);
  // A literal numeral counts its value so that pred shrinks the measure.
  EXPECT_EQ(expr_length(parse_program("3").root), 4);
  EXPECT_EQ(expr_length(parse_program("0").root), 1);
  EXPECT_EQ(expr_length(parse_program("if(x, y, z)").root), 4);
}

TEST(Order, MeasureHeightThenLength) {
  Scenario sc;
  EXPECT_EQ(measure(*sc.s, sc.fv), (std::pair<long long, long long>{1, 5}));
  // The nested closure raises the height by one; the length is unchanged.
  EXPECT_EQ(measure(*sc.s2, sc.fv), (std::pair<long long, long long>{2, 5}));
  EXPECT_EQ(measure(*sc.succ_clo, sc.fv),
            (std::pair<long long, long long>{0, 10}));
  StatePtr five = make_numeral(5, sc.body.root);
  EXPECT_EQ(measure(*five, sc.fv), (std::pair<long long, long long>{0, 6}));
}

TEST(Order, StateOrderBasics) {
  Scenario sc;
  // Reflexive.
  EXPECT_TRUE(state_geq(sc.s, sc.s, sc.fv));
  EXPECT_FALSE(state_gt(sc.s, sc.s, sc.fv));
  // A state strictly dominates its environment entries...
  EXPECT_TRUE(state_gt(sc.s, sc.succ_clo, sc.fv));
  EXPECT_TRUE(state_gt(sc.s, sc.two, sc.fv));
  EXPECT_TRUE(state_gt(sc.s2, sc.succ_clo, sc.fv));  // two steps down
  // ...and its subexpressions under the same environment.
  StatePtr sub = make_state(sc.body.root->rand, sc.s->env);
  EXPECT_TRUE(state_gt(sc.s, sub, sc.fv));
  // The converse directions fail.
  EXPECT_FALSE(state_geq(sc.succ_clo, sc.s, sc.fv));
  EXPECT_FALSE(state_geq(sub, sc.s, sc.fv));
}

TEST(Order, NumeralsOrderByValue) {
  Scenario sc;
  StatePtr five = make_numeral(5, sc.body.root);
  StatePtr three = make_numeral(3, sc.body.root);
  EXPECT_TRUE(state_geq(five, three, sc.fv));
  EXPECT_TRUE(state_gt(five, three, sc.fv));
  EXPECT_FALSE(state_geq(three, five, sc.fv));
  EXPECT_TRUE(state_geq(three, three, sc.fv));
  EXPECT_FALSE(state_gt(three, three, sc.fv));
  // A state dominates machine numerals reachable in its environment.
  Program pn = parse_program("succ@a");
  StatePtr sn = make_state(
      pn.root, Env{}.extend("a", make_numeral(2, sc.body.root)));
  EXPECT_TRUE(state_gt(sn, make_numeral(1, sc.body.root), sc.fv));
  EXPECT_TRUE(state_gt(sn, make_numeral(2, sc.body.root), sc.fv));
  EXPECT_FALSE(state_geq(sn, make_numeral(3, sc.body.root), sc.fv));
}

TEST(Order, GraphSafety) {
  Scenario sc;
  // r =-> eps is safe from s to r's value; eps >-> eps likewise since the
  // value sits inside s.
  SizeChangeGraph good(VarSet{"r", "a"}, VarSet{});
  good.add_arc("r", ArcLabel::Eq, kEpsilon);
  good.add_arc(kEpsilon, ArcLabel::Dec, kEpsilon);
  EXPECT_TRUE(graph_safe_for(good, sc.s, sc.succ_clo, sc.fv));

  // a =-> eps claims 2 equals succ: rejected, with an explanation.
  SizeChangeGraph bad(VarSet{"r", "a"}, VarSet{});
  bad.add_arc("a", ArcLabel::Eq, kEpsilon);
  std::string why;
  EXPECT_FALSE(graph_safe_for(bad, sc.s, sc.succ_clo, sc.fv, &why));
  EXPECT_NE(why.find("(a,=,eps)"), std::string::npos);

  // An equality arc is not satisfied by a strict decrease.
  SizeChangeGraph eq_claim(VarSet{"r", "a"}, VarSet{});
  eq_claim.add_arc(kEpsilon, ArcLabel::Eq, kEpsilon);
  EXPECT_FALSE(graph_safe_for(eq_claim, sc.s, sc.succ_clo, sc.fv));

  // Arcs from names outside the basis are rejected as unjustifiable.
  SizeChangeGraph off(VarSet{"q"}, VarSet{});
  off.add_arc("q", ArcLabel::Eq, kEpsilon);
  EXPECT_FALSE(graph_safe_for(off, sc.s, sc.succ_clo, sc.fv, &why));
  EXPECT_NE(why.find("basis"), std::string::npos);

  // The identity graph is safe from any state to itself.
  SizeChangeGraph id = identity_eq(VarSet{"r", "a"});
  EXPECT_TRUE(graph_safe_for(id, sc.s, sc.s, sc.fv));
}
