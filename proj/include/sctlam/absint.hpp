#pragma once

// Abstract interpretation: a monovariant fixpoint over program points that
// over-approximates every call step and evaluation fact of every run,
// producing finitely many size-change graphs between occurrences.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sctlam/eval.hpp"
#include "sctlam/graph.hpp"
#include "sctlam/syntax.hpp"

namespace sctlam {

// An abstract value: a value-form occurrence (an abstraction or a
// primitive-function occurrence), or the token for all numerals, or the
// token for all booleans.
struct AbsVal {
  enum class Kind { Point, Num, Bool };
  Kind kind = Kind::Num;
  const Exp* occ = nullptr;  // engaged iff kind == Point

  friend bool operator==(const AbsVal& a, const AbsVal& b) {
    return a.kind == b.kind && (a.kind != Kind::Point || a.occ == b.occ);
  }
  friend bool operator<(const AbsVal& a, const AbsVal& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind != Kind::Point) return false;
    return a.occ->label < b.occ->label;
  }
};

inline AbsVal abs_point(const Exp* occ) {
  return AbsVal{AbsVal::Kind::Point, occ};
}
inline AbsVal abs_num() { return AbsVal{AbsVal::Kind::Num, nullptr}; }
inline AbsVal abs_bool() { return AbsVal{AbsVal::Kind::Bool, nullptr}; }

inline std::string show_absval(const AbsVal& v) {
  switch (v.kind) {
    case AbsVal::Kind::Num:
      return "num";
    case AbsVal::Kind::Bool:
      return "bool";
    case AbsVal::Kind::Point:
      return describe(v.occ);
  }
  return "?";
}

// A call edge between two occurrences, with its size-change graph.
struct CallEdge {
  const Exp* src = nullptr;
  CallKind kind = CallKind::C;
  const Exp* dst = nullptr;
  SizeChangeGraph graph;

  friend bool operator<(const CallEdge& a, const CallEdge& b) {
    auto ka = std::tuple(a.src->label, a.dst->label, static_cast<int>(a.kind),
                         a.graph.key());
    auto kb = std::tuple(b.src->label, b.dst->label, static_cast<int>(b.kind),
                         b.graph.key());
    return ka < kb;
  }
  friend bool operator==(const CallEdge& a, const CallEdge& b) {
    return a.src == b.src && a.kind == b.kind && a.dst == b.dst &&
           a.graph == b.graph;
  }
};

// An evaluation fact: an occurrence may evaluate to an abstract value, with
// a graph from the occurrence's names into the value's.
struct EvalFact {
  const Exp* subject = nullptr;
  AbsVal value;
  SizeChangeGraph graph;

  friend bool operator<(const EvalFact& a, const EvalFact& b) {
    auto ka = std::tuple(a.subject->label, a.value, a.graph.key());
    auto kb = std::tuple(b.subject->label, b.value, b.graph.key());
    return ka < kb;
  }
};

struct AnalysisResult {
  std::vector<CallEdge> edges;  // sorted by (src, dst, kind, graph)
  std::vector<EvalFact> evals;  // sorted by (subject, value, graph)
  std::set<int> reachable;      // labels of occurrences reachable from the
                                // root along call edges

  std::vector<const CallEdge*> edges_from(int label) const {
    std::vector<const CallEdge*> out;
    for (const CallEdge& e : edges)
      if (e.src->label == label) out.push_back(&e);
    return out;
  }
};

namespace detail {

inline const VarSet& absval_fv(const AbsVal& v, const FvCache& fv) {
  static const VarSet kEmpty;
  if (v.kind == AbsVal::Kind::Point && v.occ->kind == ExpKind::Lam)
    return fv.fv(v.occ);
  return kEmpty;
}

// The abstract value of a value-form occurrence, if it is one.
inline std::optional<AbsVal> value_form(const Exp* o) {
  if (o->kind == ExpKind::Lam) return abs_point(o);
  if (o->kind == ExpKind::Prim)
    return o->prim == PrimKind::Num ? abs_num() : abs_point(o);
  return std::nullopt;
}

}  // namespace detail

// Runs the abstract interpretation of a program (with or without a
// grammar).  The result lists, for every occurrence reachable from the
// root, all call edges and evaluation facts of the fixpoint.
inline AnalysisResult absint(const Program& prog) {
  if (prog.root == nullptr)
    throw InternalError("absint: program has no root expression");
  FvCache fv(prog.grammar);

  std::map<const Exp*, std::set<std::pair<AbsVal, SizeChangeGraph>>> evals;
  std::set<CallEdge> edges;
  std::map<std::string, std::set<AbsVal>> binds;

  bool changed = true;
  auto add_eval = [&](const Exp* subject, const AbsVal& v,
                      SizeChangeGraph g) {
    if (evals[subject].emplace(v, std::move(g)).second) changed = true;
  };
  auto add_edge = [&](const Exp* src, CallKind k, const Exp* dst,
                      SizeChangeGraph g) {
    if (edges.insert(CallEdge{src, k, dst, std::move(g)}).second)
      changed = true;
  };

  while (changed) {
    changed = false;
    for (const Exp* o : prog.points) {
      switch (o->kind) {
        case ExpKind::Lam:
        case ExpKind::Prim: {
          AbsVal v = *detail::value_form(o);
          // Numeric tokens evaluate with an arc-free graph: a number carries
          // no environment entries whose sizes could be tracked.
          SizeChangeGraph g = v.kind == AbsVal::Kind::Num
                                  ? SizeChangeGraph(VarSet{}, VarSet{})
                                  : identity_eq(fv.fv(o));
          add_eval(o, v, std::move(g));
          break;
        }
        case ExpKind::Var: {
          auto it = binds.find(o->name);
          if (it == binds.end()) break;
          for (const AbsVal& v : it->second) {
            const VarSet& vfv = detail::absval_fv(v, fv);
            SizeChangeGraph g(VarSet{o->name}, vfv);
            g.add_arc(o->name, ArcLabel::Eq, kEpsilon);
            for (const auto& y : vfv) g.add_arc(o->name, ArcLabel::Dec, y);
            add_eval(o, v, std::move(g));
          }
          break;
        }
        case ExpKind::App: {
          const Exp* e1 = o->rator;
          const Exp* e2 = o->rand;
          add_edge(o, CallKind::R, e1, bridge_dec(fv.fv(o), fv.fv(e1)));
          add_edge(o, CallKind::D, e2, bridge_dec(fv.fv(o), fv.fv(e2)));
          auto it1 = evals.find(e1);
          auto it2 = evals.find(e2);
          if (it1 == evals.end() || it2 == evals.end()) break;
          for (const auto& [v1, g1] : it1->second) {
            if (v1.kind != AbsVal::Kind::Point) continue;
            if (v1.occ->kind == ExpKind::Lam) {
              const Exp* lam = v1.occ;
              for (const auto& [v2, g2] : it2->second) {
                if (binds[lam->binder].insert(v2).second) changed = true;
                SizeChangeGraph gc =
                    call_combine(g1, g2, lam->binder, fv.fv(lam->body));
                auto itb = evals.find(lam->body);
                if (itb != evals.end())
                  for (const auto& [v, g] : itb->second)
                    add_eval(o, v, compose(gc, g));
                add_edge(o, CallKind::C, lam->body, std::move(gc));
              }
            } else {
              PrimKind k = v1.occ->prim;
              for (const auto& [v2, g2] : it2->second) {
                if (v2.kind != AbsVal::Kind::Num) continue;
                AbsVal out = k == PrimKind::Ztst ? abs_bool() : abs_num();
                add_eval(o, out, detail::prim_graph(k, g2, fv.fv(o)));
              }
            }
          }
          break;
        }
        case ExpKind::If: {
          add_edge(o, CallKind::R, o->cond,
                   bridge_dec(fv.fv(o), fv.fv(o->cond)));
          auto itc = evals.find(o->cond);
          bool cond_bool = false;
          if (itc != evals.end())
            for (const auto& [v, g] : itc->second)
              if (v.kind == AbsVal::Kind::Bool) {
                cond_bool = true;
                break;
              }
          if (!cond_bool) break;
          for (const Exp* branch : {o->then_branch, o->else_branch}) {
            SizeChangeGraph gb = bridge_dec(fv.fv(o), fv.fv(branch));
            auto itb = evals.find(branch);
            if (itb != evals.end())
              for (const auto& [v, g] : itb->second)
                add_eval(o, v, compose(gb, g));
            add_edge(o, CallKind::C, branch, std::move(gb));
          }
          break;
        }
        case ExpKind::NonTerm: {
          for (const Exp* body : prog.grammar.bodies_of(o->name)) {
            SizeChangeGraph gn = bridge_eq(fv.fv(o), fv.fv(body));
            auto itb = evals.find(body);
            if (itb != evals.end())
              for (const auto& [v, g] : itb->second)
                add_eval(o, v, compose(gn, g));
            add_edge(o, CallKind::N, body, std::move(gn));
          }
          break;
        }
      }
    }
  }

  // Restrict to the part reachable from the root along call edges.
  std::set<const Exp*> reach{prog.root};
  std::deque<const Exp*> queue{prog.root};
  std::multimap<const Exp*, const Exp*> succ;
  for (const CallEdge& e : edges) succ.emplace(e.src, e.dst);
  while (!queue.empty()) {
    const Exp* u = queue.front();
    queue.pop_front();
    auto [lo, hi] = succ.equal_range(u);
    for (auto it = lo; it != hi; ++it)
      if (reach.insert(it->second).second) queue.push_back(it->second);
  }

  AnalysisResult result;
  for (const CallEdge& e : edges)
    if (reach.count(e.src) > 0) result.edges.push_back(e);
  for (const auto& [subject, facts] : evals) {
    if (reach.count(subject) == 0) continue;
    for (const auto& [v, g] : facts)
      result.evals.push_back(EvalFact{subject, v, g});
  }
  for (const Exp* o : reach) result.reachable.insert(o->label);
  std::sort(result.evals.begin(), result.evals.end());
  return result;
}

// Grammar-extended analysis (identical engine; named separately because the
// extended judgement includes nonterminal expansion steps).
inline AnalysisResult absint_ext(const Program& prog) { return absint(prog); }

}  // namespace sctlam
