#pragma once

// The size order on states and the safety check for size-change graphs:
// name paths, the graph basis of a state, the valuation of a path, the
// well-foundedness measure, the decidable fragment of the state order used
// by tests, and graph_safe_for.

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sctlam/eval.hpp"
#include "sctlam/graph.hpp"
#include "sctlam/syntax.hpp"

namespace sctlam {

// A name path: a finite string of variable names ([] is the empty path).
using NamePath = std::vector<std::string>;

inline std::string show_path(const NamePath& p) {
  if (p.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) out += '.';
    out += p[i];
  }
  return out;
}

// Graph basis: gb(e:env) = {eps} u { x p | x in fv(e), p in gb(env(x)) }.
// Machine values have basis {eps}.
inline std::set<NamePath> graph_basis(const State& s, const FvCache& fv) {
  std::set<NamePath> out;
  out.insert(NamePath{});
  StateClass c = classify(s);
  if (c != StateClass::Plain && c != StateClass::Closure) return out;
  for (const auto& x : fv.fv(s.expr)) {
    const StatePtr* bound = s.env.lookup(x);
    if (bound == nullptr)
      throw InternalError("graph_basis: state not well-formed (missing '" +
                          x + "')");
    for (const NamePath& p : graph_basis(**bound, fv)) {
      NamePath xp{x};
      xp.insert(xp.end(), p.begin(), p.end());
      out.insert(std::move(xp));
    }
  }
  return out;
}

// Valuation: s(eps) = s, (e:env)(x p) = env(x)(p).  Null when the path
// leaves the basis.
inline StatePtr valuate(StatePtr s, const NamePath& p) {
  for (const std::string& x : p) {
    if (s == nullptr) return nullptr;
    StateClass c = classify(*s);
    if (c != StateClass::Plain && c != StateClass::Closure) return nullptr;
    const StatePtr* bound = s->env.lookup(x);
    if (bound == nullptr) return nullptr;
    s = *bound;
  }
  return s;
}

// Expression length: L(x) = 1, L(\x.e) = 1 + L(e), L(a@b) = 1 + L(a) + L(b).
// Extensions keep the decrease claims of the primitives honest: a numeral
// literal for n has length n + 1; the other leaves have length 1; a
// conditional sums its three parts.
inline long long expr_length(const Exp* e) {
  switch (e->kind) {
    case ExpKind::Var:
    case ExpKind::NonTerm:
      return 1;
    case ExpKind::Lam:
      return 1 + expr_length(e->body);
    case ExpKind::App:
      return 1 + expr_length(e->rator) + expr_length(e->rand);
    case ExpKind::If:
      return 1 + expr_length(e->cond) + expr_length(e->then_branch) +
             expr_length(e->else_branch);
    case ExpKind::Prim:
      if (e->prim == PrimKind::Num && e->num.has_value()) return *e->num + 1;
      return 1;
  }
  throw InternalError("expr_length: unhandled node kind");
}

// Environment height: H(e:[]) = 0, H(e:env) = max over x in fv(e) of
// 1 + H(env(x)).  Machine values have height 0.
inline long long env_height(const State& s, const FvCache& fv) {
  StateClass c = classify(s);
  if (c != StateClass::Plain && c != StateClass::Closure) return 0;
  long long h = 0;
  for (const auto& x : fv.fv(s.expr)) {
    const StatePtr* bound = s.env.lookup(x);
    if (bound == nullptr)
      throw InternalError("env_height: state not well-formed (missing '" + x +
                          "')");
    h = std::max(h, 1 + env_height(**bound, fv));
  }
  return h;
}

// The well-foundedness measure: a strict size decrease strictly lowers
// (height, length) lexicographically.
inline std::pair<long long, long long> measure(const State& s,
                                               const FvCache& fv) {
  long long len;
  switch (classify(s)) {
    case StateClass::Numeral:
      len = *numeral_value(s) + 1;
      break;
    case StateClass::Boolean:
      len = 1;
      break;
    default:
      len = expr_length(s.expr);
      break;
  }
  return {env_height(s, fv), len};
}

namespace detail {

inline bool measure_lex_lt(std::pair<long long, long long> a,
                           std::pair<long long, long long> b) {
  return a < b;  // pair comparison is lexicographic
}

// One-step successors of a state under the union of the two generating
// relations: every environment entry of a free variable (sub-environment),
// and every subexpression whose free variables the environment covers
// (subexpression, reusing the same environment).
inline std::vector<StatePtr> order_successors(const StatePtr& s,
                                              const FvCache& fv) {
  std::vector<StatePtr> out;
  StateClass c = classify(*s);
  if (c != StateClass::Plain && c != StateClass::Closure) return out;
  for (const auto& x : fv.fv(s->expr)) {
    const StatePtr* bound = s->env.lookup(x);
    if (bound != nullptr) out.push_back(*bound);
  }
  for (const Exp* sub : subexps(s->expr, fv.grammar())) {
    if (sub == s->expr) continue;
    bool covered = true;
    for (const auto& x : fv.fv(sub))
      if (s->env.lookup(x) == nullptr) {
        covered = false;
        break;
      }
    if (covered) out.push_back(make_state(sub, s->env));
  }
  return out;
}

}  // namespace detail

// Decides a >= b in the state size order (the reflexive-transitive closure
// of the sub-environment and subexpression relations, with numerals ordered
// by value).  Breadth-first search pruned by the well-foundedness measure.
inline bool state_geq(const StatePtr& a, const StatePtr& b,
                      const FvCache& fv) {
  const auto goal = measure(*b, fv);
  std::deque<StatePtr> queue{a};
  std::set<std::string> seen{state_key(*a, fv)};
  while (!queue.empty()) {
    StatePtr u = queue.front();
    queue.pop_front();
    if (state_equal(*u, *b, fv)) return true;
    if (classify(*u) == StateClass::Numeral) {
      if (classify(*b) == StateClass::Numeral &&
          *numeral_value(*u) >= *numeral_value(*b))
        return true;
      continue;
    }
    for (StatePtr& v : detail::order_successors(u, fv)) {
      if (detail::measure_lex_lt(measure(*v, fv), goal)) continue;
      std::string k = state_key(*v, fv);
      if (seen.insert(std::move(k)).second) queue.push_back(std::move(v));
    }
  }
  return false;
}

// Strict order: a > b iff a >= b and the states differ.
inline bool state_gt(const StatePtr& a, const StatePtr& b,
                     const FvCache& fv) {
  if (classify(*a) == StateClass::Numeral &&
      classify(*b) == StateClass::Numeral)
    return *numeral_value(*a) > *numeral_value(*b);
  return !state_equal(*a, *b, fv) && state_geq(a, b, fv);
}

// Safety of a graph for a pair of states: every =-arc connects equal
// valuations and every decreasing arc connects strictly ordered ones.
// `why`, when given, receives the first violated arc.
inline bool graph_safe_for(const SizeChangeGraph& g, const StatePtr& s1,
                           const StatePtr& s2, const FvCache& fv,
                           std::string* why = nullptr) {
  auto path_of = [](const std::string& p) {
    return p == kEpsilon ? NamePath{} : NamePath{p};
  };
  for (const Arc& a : g.arcs()) {
    StatePtr lhs = valuate(s1, path_of(a.src));
    StatePtr rhs = valuate(s2, path_of(a.dst));
    if (lhs == nullptr || rhs == nullptr) {
      if (why != nullptr)
        *why = "arc (" + show_name(a.src) + "," +
               (a.label == ArcLabel::Dec ? ">" : "=") + "," +
               show_name(a.dst) + ") leaves the graph basis";
      return false;
    }
    bool ok = a.label == ArcLabel::Eq ? state_equal(*lhs, *rhs, fv)
                                      : state_gt(lhs, rhs, fv);
    if (!ok) {
      if (why != nullptr)
        *why = "arc (" + show_name(a.src) + "," +
               (a.label == ArcLabel::Dec ? ">" : "=") + "," +
               show_name(a.dst) + ") is not justified by the state order";
      return false;
    }
  }
  return true;
}

}  // namespace sctlam
