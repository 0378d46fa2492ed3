// Cross-checks a grammar program's static analysis against concrete runs of
// its instances: every instrumented step of an instance must be covered by
// an analysis edge (or an n-step followed by an edge) whose graph majorizes
// the concrete one.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sctlam/absint.hpp"
#include "sctlam/eval.hpp"
#include "sctlam/graph.hpp"
#include "sctlam/syntax.hpp"

namespace sctlam {

// Memoized derivability: does expression `a` (possibly with nonterminals)
// rewrite to pure expression `e` by replacing nonterminals with production
// bodies?  Lambda binder names must match exactly.
class Deriver {
 public:
  explicit Deriver(const Grammar& grammar) : grammar_(grammar) {}

  bool derives(const Exp* a, const Exp* e) {
    if (a == e) return true;
    auto key = std::make_pair(a, e);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool result = compute(a, e);
    memo_.emplace(key, result);
    return result;
  }

 private:
  bool compute(const Exp* a, const Exp* e) {
    if (a->kind == ExpKind::NonTerm) {
      if (e->kind == ExpKind::NonTerm && e->name == a->name) return true;
      for (const Exp* body : grammar_.bodies_of(a->name))
        if (derives(body, e)) return true;
      return false;
    }
    if (a->kind != e->kind) return false;
    switch (a->kind) {
      case ExpKind::Var:
        return a->name == e->name;
      case ExpKind::Lam:
        return a->binder == e->binder && derives(a->body, e->body);
      case ExpKind::App:
        return derives(a->rator, e->rator) && derives(a->rand, e->rand);
      case ExpKind::Prim:
        return a->prim == e->prim && a->num == e->num;
      case ExpKind::If:
        return derives(a->cond, e->cond) &&
               derives(a->then_branch, e->then_branch) &&
               derives(a->else_branch, e->else_branch);
      default:
        return false;
    }
  }

  Grammar grammar_;
  std::map<std::pair<const Exp*, const Exp*>, bool> memo_;
};

// Majorization between graphs: `coarse` differs from `fine` at most by names
// standing in for whole expressions.  Holds iff (i) coarse's name sets
// contain fine's, (ii) coarse restricted to fine's name sets is a sub-graph
// of fine, and (iii) every extra source name has no out-arc or only an
// equality self-arc, the latter only when the name is absent from fine's
// target set.
inline bool majorizes(const SizeChangeGraph& coarse,
                      const SizeChangeGraph& fine) {
  for (const auto& v : fine.source())
    if (!coarse.source().count(v)) return false;
  for (const auto& v : fine.target())
    if (!coarse.target().count(v)) return false;
  for (const Arc& a : coarse.arcs())
    if (fine.source().count(a.src) && fine.target().count(a.dst)) {
      auto label = fine.arc_label(a.src, a.dst);
      if (!label.has_value() || *label != a.label) return false;
    }
  for (const auto& z : coarse.source()) {
    if (fine.source().count(z)) continue;
    bool self_eq = false;
    for (const Arc& a : coarse.arcs()) {
      if (a.src != z) continue;
      if (a.dst == z && a.label == ArcLabel::Eq)
        self_eq = true;
      else
        return false;
    }
    if (self_eq && fine.target().count(z)) return false;
  }
  return true;
}

// Does the abstract value stand for this concrete value state?
inline bool value_matches(const AbsVal& av, const State& v, Deriver& derive) {
  switch (av.kind) {
    case AbsVal::Kind::Num:
      return classify(v) == StateClass::Numeral;
    case AbsVal::Kind::Bool:
      return classify(v) == StateClass::Boolean;
    case AbsVal::Kind::Point:
      if (av.occ->kind == ExpKind::Lam)
        return classify(v) == StateClass::Closure &&
               derive.derives(av.occ, v.expr);
      if (av.occ->kind == ExpKind::Prim)
        return classify(v) == StateClass::PrimFn &&
               av.occ->prim == v.expr->prim;
      return false;
  }
  return false;
}

// Deep copy of `e` into `ast`, with every nonterminal occurrence replaced by
// (a copy of) its entry in `repl`.
inline const Exp* clone_replacing(Ast& ast, const Exp* e,
                                  const std::map<std::string, const Exp*>& repl) {
  switch (e->kind) {
    case ExpKind::Var:
      return ast.var(e->name);
    case ExpKind::Lam:
      return ast.lam(e->binder, clone_replacing(ast, e->body, repl));
    case ExpKind::App:
      return ast.app(clone_replacing(ast, e->rator, repl),
                     clone_replacing(ast, e->rand, repl));
    case ExpKind::NonTerm: {
      auto it = repl.find(e->name);
      if (it == repl.end())
        throw InputError("no replacement given for nonterminal " + e->name);
      return clone_replacing(ast, it->second, repl);
    }
    case ExpKind::Prim:
      return ast.prim(e->prim, e->num);
    case ExpKind::If:
      return ast.if_(clone_replacing(ast, e->cond, repl),
                     clone_replacing(ast, e->then_branch, repl),
                     clone_replacing(ast, e->else_branch, repl));
  }
  throw InternalError("clone of unknown expression kind");
}

// Builds the pure instance of `p` in which each nonterminal occurrence is
// replaced by its entry in `repl` (replacement trees may live in any arena;
// they are copied).  The instance gets fresh labels and an empty grammar.
inline Program instantiate(const Program& p,
                           const std::map<std::string, const Exp*>& repl) {
  Program q;
  q.ast = std::make_shared<Ast>();
  q.root = clone_replacing(*q.ast, p.root, repl);
  q.points = assign_labels(q.root, q.grammar);
  return q;
}

struct SimulationReport {
  bool ok = false;
  std::size_t steps_checked = 0;
  std::string failure;  // empty when ok
  EvalResult::Status eval_status = EvalResult::Status::Value;
};

namespace detail {

inline CallKind call_kind_of(StepKind k) {
  switch (k) {
    case StepKind::R:
      return CallKind::R;
    case StepKind::D:
      return CallKind::D;
    case StepKind::C:
      return CallKind::C;
    case StepKind::N:
      return CallKind::N;
    default:
      throw InternalError("evaluation fact has no call kind");
  }
}

}  // namespace detail

// Runs the instance `q` with instrumentation and checks that every recorded
// step is covered by `analysis` (computed for the grammar program `p`):
// call steps by an edge of the same kind with derivable endpoints, or by an
// n-edge composed with such an edge; evaluation facts by a matching fact.
// In each case the analysis graph must majorize the concrete graph.  The
// prefix up to timeout/error is still checked.
inline SimulationReport simulate_check(const Program& p,
                                       const AnalysisResult& analysis,
                                       const Program& q,
                                       EvalOptions opts = {}) {
  SimulationReport report;
  Deriver derive(p.grammar);
  if (!derive.derives(p.root, q.root)) {
    report.failure = "instance root is not derivable from the program root";
    return report;
  }

  FvCache fv(q.grammar);
  EvalResult run = eval_instrumented(q.root, Env{}, fv, std::move(opts));
  report.eval_status = run.status;

  for (const InstrStep& step : run.steps) {
    if (step.src->expr == nullptr) {
      report.failure = "recorded step has a machine value as subject";
      return report;
    }
    bool matched = false;
    if (step.kind == StepKind::V) {
      for (const EvalFact& fact : analysis.evals) {
        if (!derive.derives(fact.subject, step.src->expr)) continue;
        if (!value_matches(fact.value, *step.dst, derive)) continue;
        if (majorizes(fact.graph, step.graph)) {
          matched = true;
          break;
        }
      }
    } else {
      CallKind kind = detail::call_kind_of(step.kind);
      for (const CallEdge& edge : analysis.edges) {
        if (edge.kind != kind) continue;
        if (!derive.derives(edge.src, step.src->expr)) continue;
        if (!derive.derives(edge.dst, step.dst->expr)) continue;
        if (majorizes(edge.graph, step.graph)) {
          matched = true;
          break;
        }
      }
      if (!matched) {
        // A nonterminal in p may stand where q has a concrete expression;
        // the covering pair is then an n-edge followed by a same-kind edge.
        for (const CallEdge& pre : analysis.edges) {
          if (pre.kind != CallKind::N) continue;
          if (!derive.derives(pre.src, step.src->expr)) continue;
          for (const CallEdge& edge : analysis.edges) {
            if (edge.kind != kind || edge.src != pre.dst) continue;
            if (!derive.derives(edge.dst, step.dst->expr)) continue;
            if (majorizes(compose(pre.graph, edge.graph), step.graph)) {
              matched = true;
              break;
            }
          }
          if (matched) break;
        }
      }
    }
    if (!matched) {
      report.failure = "step " + std::to_string(report.steps_checked + 1) +
                       " (" + show_state(*step.src) + " -" +
                       kind_letter(step.kind) + "-> " + show_state(*step.dst) +
                       " ; " + step.graph.to_text() +
                       ") has no covering analysis edge";
      return report;
    }
    ++report.steps_checked;
  }
  report.ok = true;
  return report;
}

}  // namespace sctlam
