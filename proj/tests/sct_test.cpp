// The composition closure, the termination condition, loop listings, and
// the bounded multipath audit.
#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "sctlam/absint.hpp"
#include "sctlam/parse.hpp"
#include "sctlam/report.hpp"
#include "sctlam/sct.hpp"
#include "testutil.hpp"

using namespace sctlam;

namespace {

SizeChangeGraph self_graph(std::initializer_list<Arc> arcs) {
  SizeChangeGraph g(VarSet{"x"}, VarSet{"x"});
  for (const Arc& a : arcs) g.add_arc(a.src, a.label, a.dst);
  return g;
}

// A synthetic two-point call graph over points of a placeholder program:
// p ->G1 q, q ->G2 q, q ->G3 p.
struct TwoPointCycle {
  Program prog = parse_program("((a@b)@c)");
  AnalysisResult analysis;

  TwoPointCycle(const SizeChangeGraph& g1, const SizeChangeGraph& g2,
                const SizeChangeGraph& g3) {
    analysis.edges.push_back(CallEdge{prog.at(2), CallKind::C, prog.at(5), g1});
    analysis.edges.push_back(CallEdge{prog.at(5), CallKind::C, prog.at(5), g2});
    analysis.edges.push_back(CallEdge{prog.at(5), CallKind::C, prog.at(2), g3});
    std::sort(analysis.edges.begin(), analysis.edges.end());
    for (int pt : {2, 5}) analysis.reachable.insert(pt);
  }
};

}  // namespace

TEST(Sct, IdempotentAndStrictSelfArc) {
  EXPECT_TRUE(idempotent(self_graph({{"x", ArcLabel::Eq, "x"}})));
  EXPECT_TRUE(idempotent(self_graph({{"x", ArcLabel::Dec, "x"}})));
  EXPECT_TRUE(idempotent(self_graph({})));
  // x and its target swap: composing with itself changes the graph.
  SizeChangeGraph swap(VarSet{"x", "y"}, VarSet{"x", "y"});
  swap.add_arc("x", ArcLabel::Dec, "y");
  swap.add_arc("y", ArcLabel::Dec, "x");
  EXPECT_FALSE(idempotent(swap));
  // Graphs with distinct interfaces are never idempotent.
  SizeChangeGraph cross(VarSet{"x"}, VarSet{"y"});
  EXPECT_FALSE(idempotent(cross));

  EXPECT_TRUE(has_strict_self_arc(self_graph({{"x", ArcLabel::Dec, "x"}})));
  EXPECT_FALSE(has_strict_self_arc(self_graph({{"x", ArcLabel::Eq, "x"}})));
  EXPECT_FALSE(has_strict_self_arc(
      self_graph({{"x", ArcLabel::Dec, kEpsilon}})));
  // The whole counts as a position: eps >-> eps certifies a loop.
  EXPECT_TRUE(has_strict_self_arc(
      self_graph({{kEpsilon, ArcLabel::Dec, kEpsilon}})));
}

TEST(Sct, IdempotentPowerReachesAFixedPoint) {
  SizeChangeGraph swap(VarSet{"x", "y"}, VarSet{"x", "y"});
  swap.add_arc("x", ArcLabel::Dec, "y");
  swap.add_arc("y", ArcLabel::Dec, "x");
  auto power = detail::idempotent_power(swap);
  ASSERT_TRUE(power.has_value());
  EXPECT_TRUE(idempotent(*power));
  EXPECT_TRUE(has_strict_self_arc(*power));
  EXPECT_EQ(power->to_text(), "[(x,>,x),(y,>,y)]");
  // Graphs with mismatched interfaces have no idempotent power.
  SizeChangeGraph cross(VarSet{"x"}, VarSet{"y"});
  EXPECT_FALSE(detail::idempotent_power(cross).has_value());
}

TEST(Sct, DecideOnHandBuiltElements) {
  auto strict = self_graph({{"x", ArcLabel::Dec, "x"}});
  auto lax = self_graph({{"x", ArcLabel::Eq, "x"}});

  // Every idempotent self-element strict: terminating.
  std::vector<ClosureElement> good{{1, 1, strict, {}}, {1, 2, lax, {}}};
  Verdict v = decide(good);
  EXPECT_TRUE(v.terminates);
  EXPECT_FALSE(v.counterexample.has_value());

  // One idempotent self-element without a strict self-arc: rejected, and
  // that element is the counterexample.
  std::vector<ClosureElement> bad{{1, 1, strict, {}}, {2, 2, lax, {7}}};
  Verdict w = decide(bad);
  EXPECT_FALSE(w.terminates);
  ASSERT_TRUE(w.counterexample.has_value());
  EXPECT_EQ(w.counterexample->src, 2);
  EXPECT_EQ(w.counterexample->witness, (std::vector<int>{7}));

  // Non-idempotent self-elements alone never reject.
  SizeChangeGraph swap(VarSet{"x", "y"}, VarSet{"x", "y"});
  swap.add_arc("x", ArcLabel::Eq, "y");
  std::vector<ClosureElement> skew{{3, 3, swap, {}}};
  EXPECT_TRUE(decide(skew).terminates);

  EXPECT_TRUE(decide(std::vector<ClosureElement>{}).terminates);
}

TEST(Sct, ClosureOfTwoPointCycle) {
  // All cycle composites keep x strictly shrinking: terminating.
  auto dec = self_graph({{"x", ArcLabel::Dec, "x"}});
  auto eq = self_graph({{"x", ArcLabel::Eq, "x"}});
  TwoPointCycle tpc(dec, dec, eq);
  std::vector<ClosureElement> cl = closure(tpc.analysis);

  // Single edges appear with empty witnesses.
  bool direct = false;
  for (const ClosureElement& el : cl)
    if (el.src == 5 && el.dst == 5 && el.witness.empty() &&
        el.graph == dec)
      direct = true;
  EXPECT_TRUE(direct);

  // The composite 2 -> 5 -> 2 appears with witness [5].
  bool composite = false;
  for (const ClosureElement& el : cl)
    if (el.src == 2 && el.dst == 2 && el.witness == std::vector<int>{5} &&
        el.graph == dec)
      composite = true;
  EXPECT_TRUE(composite);

  Verdict v = decide(cl);
  EXPECT_TRUE(v.terminates);

  // Weakening the returning edge to equality-only everywhere makes the
  // 2 -> 5 -> 2 composite without the inner loop an equality graph: the
  // condition now fails, with that composite as the counterexample.
  TwoPointCycle weak(eq, dec, eq);
  Verdict w = decide(closure(weak.analysis));
  EXPECT_FALSE(w.terminates);
  ASSERT_TRUE(w.counterexample.has_value());
  EXPECT_EQ(w.counterexample->graph, eq);
}

TEST(Sct, ClosureDeduplicatesByGraph) {
  auto dec = self_graph({{"x", ArcLabel::Dec, "x"}});
  TwoPointCycle tpc(dec, dec, dec);
  std::vector<ClosureElement> cl = closure(tpc.analysis);
  // Iterating the inner loop yields the same composed graph; there must be
  // exactly one settled element per (src, dst, graph).
  int count55 = 0;
  for (const ClosureElement& el : cl)
    if (el.src == 5 && el.dst == 5 && el.graph == dec) ++count55;
  EXPECT_EQ(count55, 1);
}

TEST(Sct, SelfLoopsListingMatchesFrozenOutput) {
  Program p = testutil::parse_fixture("pow_add.lam");
  std::vector<ClosureElement> cl = closure(absint(p));
  std::vector<ClosureElement> loops = self_loops(cl);
  ASSERT_EQ(loops.size(), 4u);
  EXPECT_EQ(loop_line(loops[0]), "11 \xe2\x86\x92* 11: [(r,>,r)] []");
  EXPECT_EQ(loop_line(loops[1]), "11 \xe2\x86\x92* 11: [(a,=,a),(r,>,r)] [13]");
  EXPECT_EQ(loop_line(loops[2]), "13 \xe2\x86\x92* 13: [(a,=,a),(r,>,r)] [11]");
  EXPECT_EQ(loop_line(loops[3]), "13 \xe2\x86\x92* 13: [(r,>,r)] [11,11]");
  EXPECT_TRUE(decide(cl).terminates);
}

TEST(Sct, DivergentSelfApplicationRejected) {
  Program p = testutil::parse_fixture("omega.lam");
  AnalysisResult a = absint(p);
  std::vector<ClosureElement> cl = closure(a);
  Verdict v = decide(cl);
  EXPECT_FALSE(v.terminates);
  ASSERT_TRUE(v.counterexample.has_value());
  EXPECT_EQ(loop_line(*v.counterexample), "7 \xe2\x86\x92* 7: [(y,=,y)] []");
  // The loop listing contains exactly that loop.
  std::vector<ClosureElement> loops = self_loops(cl);
  ASSERT_EQ(loops.size(), 1u);
  EXPECT_EQ(loops[0].src, 7);
}

TEST(Sct, AcyclicProgramHasNoSelfLoops) {
  Program p = parse_program("(\\x.x)@(\\y.y)");
  std::vector<ClosureElement> cl = closure(absint(p));
  EXPECT_TRUE(self_loops(cl).empty());
  EXPECT_TRUE(decide(cl).terminates);
}

TEST(Sct, AuditAgreesOnFixtures) {
  for (const char* name :
       {"omega.lam", "forcing.lam", "pow_add.lam", "typable_loop.lam"}) {
    Program p = testutil::parse_fixture(name);
    AnalysisResult a = absint(p);
    std::vector<ClosureElement> cl = closure(a);
    AuditReport rep = bounded_multipath_audit(a, cl, 6);
    EXPECT_TRUE(rep.agree) << name << ": " << rep.detail;
  }
}

TEST(Sct, AuditCountsCycles) {
  Program p = testutil::parse_fixture("omega.lam");
  AnalysisResult a = absint(p);
  AuditReport rep = bounded_multipath_audit(a, closure(a), 6);
  EXPECT_GE(rep.cycles, 1u);

  Program tiny = parse_program("(\\x.x)@(\\y.y)");
  AnalysisResult ta = absint(tiny);
  AuditReport trep = bounded_multipath_audit(ta, closure(ta), 6);
  EXPECT_EQ(trep.cycles, 0u);
  EXPECT_TRUE(trep.agree);
}
