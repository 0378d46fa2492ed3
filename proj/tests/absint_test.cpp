// The whole-program abstract interpretation: call edges, evaluation facts,
// and the reachability restriction.
#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "sctlam/absint.hpp"
#include "sctlam/parse.hpp"
#include "sctlam/report.hpp"
#include "testutil.hpp"

using namespace sctlam;

namespace {

std::string edges_text(const AnalysisResult& a) {
  std::ostringstream out;
  for (const CallEdge& e : a.edges) out << edge_line(e) << "\n";
  return out.str();
}

std::string evals_text(const AnalysisResult& a) {
  std::ostringstream out;
  for (const EvalFact& f : a.evals) out << eval_fact_line(f) << "\n";
  return out.str();
}

}  // namespace

TEST(Absint, SelfApplicationFullTable) {
  Program p = parse_program("(\\x.x@x)@(\\y.y@y)");
  AnalysisResult a = absint(p);
  EXPECT_EQ(edges_text(a),
            "1 -r-> 2 ; [(eps,>,eps)]\n"
            "1 -c-> 3 ; [(eps,>,x)]\n"
            "1 -d-> 6 ; [(eps,>,eps)]\n"
            "3 -r-> 4 ; [(eps,>,eps),(x,=,x)]\n"
            "3 -d-> 5 ; [(eps,>,eps),(x,=,x)]\n"
            "3 -c-> 7 ; [(x,=,y)]\n"
            "7 -c-> 7 ; [(y,=,y)]\n"
            "7 -r-> 8 ; [(eps,>,eps),(y,=,y)]\n"
            "7 -d-> 9 ; [(eps,>,eps),(y,=,y)]\n");
  // Facts exist exactly at the six value occurrences: the two lambdas and
  // the four variables, each variable mapping into the lambda it denotes.
  EXPECT_EQ(evals_text(a),
            "2 => 2 ; [(eps,=,eps)]\n"
            "4 => 6 ; [(x,=,eps)]\n"
            "5 => 6 ; [(x,=,eps)]\n"
            "6 => 6 ; [(eps,=,eps)]\n"
            "8 => 6 ; [(y,=,eps)]\n"
            "9 => 6 ; [(y,=,eps)]\n");
  EXPECT_EQ(a.reachable, (std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(Absint, SingleLambdaIsOneFact) {
  Program p = parse_program("\\x.x");
  AnalysisResult a = absint(p);
  EXPECT_TRUE(a.edges.empty());
  ASSERT_EQ(a.evals.size(), 1u);
  EXPECT_EQ(a.evals[0].subject, p.root);
  EXPECT_EQ(a.evals[0].value, abs_point(p.root));
  EXPECT_EQ(a.evals[0].graph.to_text(), "[(eps,=,eps)]");
}

TEST(Absint, BetaStepEdges) {
  Program p = parse_program("(\\x.x)@(\\y.y)");
  AnalysisResult a = absint(p);
  EXPECT_EQ(edges_text(a),
            "1 -r-> 2 ; [(eps,>,eps)]\n"
            "1 -c-> 3 ; [(eps,>,x)]\n"
            "1 -d-> 4 ; [(eps,>,eps)]\n");
  // The application evaluates to the operand's value.
  bool app_fact = false;
  for (const EvalFact& f : a.evals)
    if (f.subject == p.root && f.value == abs_point(p.at(4))) app_fact = true;
  EXPECT_TRUE(app_fact);
}

TEST(Absint, NumeralsEvaluateWithArcFreeGraphs) {
  Program p = parse_program("succ@3");
  AnalysisResult a = absint(p);
  for (const EvalFact& f : a.evals)
    if (f.value == abs_num()) {
      EXPECT_TRUE(f.graph.arcs().empty()) << eval_fact_line(f);
      EXPECT_EQ(f.graph.to_text(), "[]");
    }
  // The literal itself has a num fact.
  bool lit_fact = false;
  for (const EvalFact& f : a.evals)
    if (f.subject == p.root->rand && f.value == abs_num()) lit_fact = true;
  EXPECT_TRUE(lit_fact);
}

TEST(Absint, UnreachableBodyGetsNoEdges) {
  // The operand closure is never applied, so its body is never called.
  Program p = parse_program("(\\x.0)@(\\u.(u@u))");
  AnalysisResult a = absint(p);
  EXPECT_EQ(edges_text(a),
            "1 -r-> 2 ; [(eps,>,eps)]\n"
            "1 -c-> 3 ; [(eps,>,eps)]\n"
            "1 -d-> 4 ; [(eps,>,eps)]\n");
  EXPECT_EQ(evals_text(a),
            "1 => num ; []\n"
            "2 => 2 ; [(eps,=,eps)]\n"
            "3 => num ; []\n"
            "4 => 4 ; [(eps,=,eps)]\n");
  // Points 5..7 ((u@u) and both u's) are unreachable.
  EXPECT_EQ(a.reachable, (std::set<int>{1, 2, 3, 4}));
}

TEST(Absint, ConditionalEdgesAndFacts) {
  Program p = parse_program("if(ztst@_, succ@1, 0)");
  AnalysisResult a = absint(p);
  EXPECT_EQ(edges_text(a),
            "1 -r-> 2 ; [(eps,>,eps)]\n"
            "1 -c-> 5 ; [(eps,>,eps)]\n"
            "1 -c-> 8 ; [(eps,>,eps)]\n"
            "2 -r-> 3 ; [(eps,>,eps)]\n"
            "2 -d-> 4 ; [(eps,>,eps)]\n"
            "5 -r-> 6 ; [(eps,>,eps)]\n"
            "5 -d-> 7 ; [(eps,>,eps)]\n");
  EXPECT_EQ(evals_text(a),
            "1 => num ; []\n"
            "2 => bool ; []\n"
            "3 => 3 ; [(eps,=,eps)]\n"
            "4 => num ; []\n"
            "5 => num ; []\n"
            "6 => 6 ; [(eps,=,eps)]\n"
            "7 => num ; []\n"
            "8 => num ; []\n");
}

TEST(Absint, GrammarNonterminalEdgesAndFacts) {
  Program p = parse_program(
      "(C@(\\u.u))@(\\w.w)",
      "C ::= \\s.\\z.A ; A ::= z | (s@A)");
  AnalysisResult a = absint(p);
  EXPECT_EQ(edges_text(a),
            "1 -r-> 2 ; [(eps,>,eps)]\n"
            "1 -d-> 6 ; [(eps,>,eps)]\n"
            "1 -c-> 10 ; [(eps,>,s),(eps,>,z)]\n"
            "2 -r-> 3 ; [(eps,>,eps)]\n"
            "2 -d-> 4 ; [(eps,>,eps)]\n"
            "2 -c-> 9 ; [(eps,>,s)]\n"
            "3 -n-> 8 ; [(eps,=,eps)]\n"
            "10 -n-> 11 ; [(eps,=,eps),(z,=,z)]\n"
            "10 -n-> 12 ; [(eps,=,eps),(s,=,s),(z,=,z)]\n"
            "12 -c-> 5 ; [(z,=,u)]\n"
            "12 -r-> 13 ; [(eps,>,eps),(s,=,s)]\n"
            "12 -d-> 14 ; [(eps,>,eps),(s,=,s),(z,=,z)]\n"
            "14 -n-> 11 ; [(eps,=,eps),(z,=,z)]\n"
            "14 -n-> 12 ; [(eps,=,eps),(s,=,s),(z,=,z)]\n");
  // A nonterminal occurrence evaluates to whatever its bodies evaluate to,
  // through an interface-preserving graph.
  bool c_fact = false;
  for (const EvalFact& f : a.evals)
    if (f.subject == p.at(3) && f.value == abs_point(p.at(8))) {
      c_fact = true;
      EXPECT_EQ(f.graph.to_text(), "[(eps,=,eps)]");
    }
  EXPECT_TRUE(c_fact);
}

TEST(Absint, BareNonterminalProgram) {
  Program p = parse_program("C", "C ::= \\s.\\z.A ; A ::= z | (s@A)");
  AnalysisResult a = absint(p);
  EXPECT_EQ(edges_text(a), "1 -n-> 2 ; [(eps,=,eps)]\n");
  EXPECT_EQ(evals_text(a),
            "1 => 2 ; [(eps,=,eps)]\n"
            "2 => 2 ; [(eps,=,eps)]\n");
}

TEST(Absint, ResultsAreSortedAndDeduplicated) {
  for (const char* name :
       {"pow_add.lam", "ackermann_two_y.lam", "pow_add_grammar.lam"}) {
    Program p = testutil::parse_fixture(name);
    AnalysisResult a = absint(p);
    for (std::size_t i = 1; i < a.edges.size(); ++i)
      EXPECT_TRUE(a.edges[i - 1] < a.edges[i]) << name << " edge " << i;
    for (std::size_t i = 1; i < a.evals.size(); ++i)
      EXPECT_TRUE(a.evals[i - 1] < a.evals[i]) << name << " fact " << i;
  }
}

TEST(Absint, DeterministicAcrossRuns) {
  Program p = testutil::parse_fixture("ackermann_second_order.lam");
  AnalysisResult a = absint(p);
  AnalysisResult b = absint(p);
  EXPECT_EQ(edges_text(a), edges_text(b));
  EXPECT_EQ(evals_text(a), evals_text(b));
  EXPECT_EQ(a.reachable, b.reachable);
}

TEST(Absint, EveryEdgeEndpointIsReachable) {
  for (const char* name :
       {"omega.lam", "forcing.lam", "pow_add_grammar.lam",
        "ackermann_shared_y.lam"}) {
    Program p = testutil::parse_fixture(name);
    AnalysisResult a = absint(p);
    for (const CallEdge& e : a.edges) {
      EXPECT_TRUE(a.reachable.count(e.src->label)) << name;
      EXPECT_TRUE(a.reachable.count(e.dst->label)) << name;
    }
  }
}
