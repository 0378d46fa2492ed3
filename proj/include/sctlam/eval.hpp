#pragma once

// Environment-based call-by-value evaluation: plain, call-tracing, and
// size-change-graph-instrumented, over one explicit-continuation machine
// (no host-stack recursion, so divergent programs can be driven for many
// thousands of steps).  Also contains the substitution-based reference
// evaluator, state flattening, and Church-numeral helpers used as oracles.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sctlam/graph.hpp"
#include "sctlam/print.hpp"
#include "sctlam/syntax.hpp"

namespace sctlam {

// Memoized free-variable queries for one program/grammar.
class FvCache {
 public:
  explicit FvCache(const Grammar& grammar = {})
      : grammar_(grammar), nt_fv_(grammar_free_vars(grammar)) {}

  const VarSet& fv(const Exp* e) const {
    auto it = memo_.find(e);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(e, free_vars(e, grammar_, &nt_fv_)).first->second;
  }

  const Grammar& grammar() const { return grammar_; }
  const std::map<std::string, VarSet>& nonterminal_fv() const {
    return nt_fv_;
  }

 private:
  Grammar grammar_;
  std::map<std::string, VarSet> nt_fv_;
  mutable std::map<const Exp*, VarSet> memo_;
};

struct State;
using StatePtr = std::shared_ptr<const State>;

// Persistent environment: name -> value state.  Extension shadows.
class Env {
 public:
  Env() = default;

  Env extend(const std::string& name, StatePtr value) const {
    Env e;
    e.head_ = std::make_shared<Node>(Node{name, std::move(value), head_});
    return e;
  }

  const StatePtr* lookup(const std::string& name) const {
    for (const Node* n = head_.get(); n != nullptr; n = n->next.get())
      if (n->name == name) return &n->value;
    return nullptr;
  }

  bool empty() const { return head_ == nullptr; }

  // Visible bindings, innermost winning, in name order.
  std::map<std::string, StatePtr> visible() const {
    std::map<std::string, StatePtr> out;
    for (const Node* n = head_.get(); n != nullptr; n = n->next.get())
      out.emplace(n->name, n->value);
    return out;
  }

 private:
  struct Node {
    std::string name;
    StatePtr value;
    std::shared_ptr<const Node> next;
  };
  std::shared_ptr<const Node> head_;
};

// A state e:env.  Machine-produced numerals and booleans (results of the
// numeral primitives) have a null expr and carry their payload directly;
// `origin` then points at the occurrence that produced them, for reporting.
struct State {
  const Exp* expr = nullptr;
  Env env;
  std::optional<long long> mnum;
  std::optional<bool> mbool;
  const Exp* origin = nullptr;
};

enum class StateClass { Plain, Closure, Numeral, Boolean, PrimFn, Hole };

inline StateClass classify(const State& s) {
  if (s.mnum.has_value()) return StateClass::Numeral;
  if (s.mbool.has_value()) return StateClass::Boolean;
  if (s.expr == nullptr)
    throw InternalError("state with neither expression nor payload");
  if (s.expr->kind == ExpKind::Lam) return StateClass::Closure;
  if (s.expr->kind == ExpKind::Prim) {
    if (s.expr->prim != PrimKind::Num) return StateClass::PrimFn;
    return s.expr->num.has_value() ? StateClass::Numeral : StateClass::Hole;
  }
  return StateClass::Plain;
}

inline std::optional<long long> numeral_value(const State& s) {
  if (s.mnum.has_value()) return s.mnum;
  if (s.expr != nullptr && s.expr->kind == ExpKind::Prim &&
      s.expr->prim == PrimKind::Num)
    return s.expr->num;
  return std::nullopt;
}

inline bool is_value_state(const State& s) {
  switch (classify(s)) {
    case StateClass::Closure:
    case StateClass::Numeral:
    case StateClass::Boolean:
    case StateClass::PrimFn:
      return true;
    default:
      return false;
  }
}

inline StatePtr make_state(const Exp* expr, Env env = {}) {
  auto s = std::make_shared<State>();
  s->expr = expr;
  s->env = std::move(env);
  return s;
}

inline StatePtr make_numeral(long long n, const Exp* origin) {
  auto s = std::make_shared<State>();
  s->mnum = n;
  s->origin = origin;
  return s;
}

inline StatePtr make_boolean(bool b, const Exp* origin) {
  auto s = std::make_shared<State>();
  s->mbool = b;
  s->origin = origin;
  return s;
}

// Free variables of a value state: a closure contributes the abstraction's
// free variables; every machine value is closed.
inline const VarSet& value_fv(const State& s, const FvCache& fv) {
  static const VarSet kEmpty;
  if (classify(s) == StateClass::Closure) return fv.fv(s.expr);
  return kEmpty;
}

// Program point used when printing a state in traces/reports.
inline int state_label(const State& s) {
  if (s.expr != nullptr) return s.expr->label;
  if (s.origin != nullptr) return s.origin->label;
  return 0;
}

// State equality: expressions structurally equal and environments agreeing
// on the expression's free variables (machine values compare by payload).
inline bool state_equal(const State& a, const State& b, const FvCache& fv) {
  StateClass ca = classify(a), cb = classify(b);
  if (ca == StateClass::Numeral || cb == StateClass::Numeral)
    return ca == cb && numeral_value(a) == numeral_value(b);
  if (ca == StateClass::Boolean || cb == StateClass::Boolean)
    return ca == cb && a.mbool == b.mbool;
  if (ca == StateClass::PrimFn || cb == StateClass::PrimFn)
    return ca == cb && a.expr->prim == b.expr->prim;
  // A nonterminal state denotes its productions: A:env equals a state that
  // one of A's bodies (under the same env) equals.  Same-name nonterminals
  // fall through to the ordinary free-variable comparison.
  bool ant = a.expr->kind == ExpKind::NonTerm;
  bool bnt = b.expr->kind == ExpKind::NonTerm;
  if ((ant || bnt) && !(ant && bnt && a.expr->name == b.expr->name)) {
    const State& nt = ant ? a : b;
    const State& other = ant ? b : a;
    for (const Exp* body : fv.grammar().bodies_of(nt.expr->name)) {
      State expanded;
      expanded.expr = body;
      expanded.env = nt.env;
      if (state_equal(expanded, other, fv)) return true;
    }
    return false;
  }
  if (!structural_equal(a.expr, b.expr)) return false;
  for (const auto& x : fv.fv(a.expr)) {
    const StatePtr* va = a.env.lookup(x);
    const StatePtr* vb = b.env.lookup(x);
    if (va == nullptr || vb == nullptr) return false;
    if (!state_equal(**va, **vb, fv)) return false;
  }
  return true;
}

// Canonical key implementing the same equality (for memo tables).
inline std::string state_key(const State& s, const FvCache& fv) {
  switch (classify(s)) {
    case StateClass::Numeral:
      return "N" + std::to_string(*numeral_value(s));
    case StateClass::Boolean:
      return *s.mbool ? "B1" : "B0";
    case StateClass::PrimFn:
      return "F" + std::to_string(static_cast<int>(s.expr->prim));
    default: {
      std::ostringstream os;
      os << "P(" << to_text(s.expr) << ")[";
      for (const auto& x : fv.fv(s.expr)) {
        const StatePtr* v = s.env.lookup(x);
        os << x << "=";
        os << (v == nullptr ? std::string("?") : state_key(**v, fv));
        os << ";";
      }
      os << "]";
      return os.str();
    }
  }
}

// Human-readable state description for diagnostics and traces.
inline std::string show_state(const State& s) {
  switch (classify(s)) {
    case StateClass::Numeral:
      return std::to_string(*numeral_value(s));
    case StateClass::Boolean:
      return *s.mbool ? "true" : "false";
    default:
      return describe(s.expr);
  }
}

enum class CallKind : std::uint8_t { R, D, C, N };
enum class StepKind : std::uint8_t { R, D, C, N, V };  // V = evaluation fact

inline char kind_letter(StepKind k) {
  switch (k) {
    case StepKind::R:
      return 'r';
    case StepKind::D:
      return 'd';
    case StepKind::C:
      return 'c';
    case StepKind::N:
      return 'n';
    case StepKind::V:
      return 'v';
  }
  return '?';
}

inline char kind_letter(CallKind k) {
  return kind_letter(static_cast<StepKind>(k));
}

// One instrumented step: a call edge (kinds r/d/c/n) or an evaluation fact
// (kind v, dst is the value).
struct InstrStep {
  StatePtr src;
  StepKind kind = StepKind::V;
  StatePtr dst;
  SizeChangeGraph graph;
};

// Production choice for nondeterministic grammar-extended evaluation.
struct ProductionPolicy {
  enum class Kind { First, RandomSeeded };
  Kind kind = Kind::First;
  std::uint64_t seed = 0;
  std::size_t depth_cap = 4096;  // max nonterminal expansions per run
};

struct EvalOptions {
  long long fuel = 100000;  // counted in inference-rule applications
  ProductionPolicy policy;
  std::map<const Exp*, long long> subst;  // hole occurrence -> numeral
  bool record_steps = false;
};

struct EvalResult {
  enum class Status { Value, Timeout, Error };
  Status status = Status::Error;
  StatePtr value;
  std::string message;
  bool internal_error = false;
  std::vector<InstrStep> steps;

  bool ok() const { return status == Status::Value; }
};

namespace detail {

// Result graph of applying a numeral primitive: the subject is the whole
// application, the value a machine numeral or boolean.  pred: variable arcs
// into eps become strict (the result is strictly below the operand
// numeral); succ/ztst claim nothing.
inline SizeChangeGraph prim_graph(PrimKind k, const SizeChangeGraph& operand,
                                  const VarSet& subject_fv) {
  SizeChangeGraph out(subject_fv, VarSet{});
  if (k == PrimKind::Pred) {
    for (const Arc& a : operand.arcs())
      if (a.dst == kEpsilon && a.src != kEpsilon)
        out.add_arc(a.src, ArcLabel::Dec, kEpsilon);
  }
  return out;
}

class Machine {
 public:
  Machine(const FvCache& fv, const EvalOptions& opts)
      : fv_(fv), opts_(opts), rng_(opts.policy.seed) {}

  EvalResult run(StatePtr start) {
    result_.status = EvalResult::Status::Error;
    control_ = std::move(start);
    returning_ = false;
    for (;;) {
      if (!returning_) {
        if (!step_eval()) break;
      } else {
        if (frames_.empty()) {
          result_.status = EvalResult::Status::Value;
          result_.value = value_;
          break;
        }
        if (!step_return()) break;
      }
    }
    result_.steps = std::move(steps_);
    return result_;
  }

 private:
  struct RatorDone {
    StatePtr app;
  };
  struct RandDone {
    StatePtr app;
    StatePtr rator_value;
    SizeChangeGraph rator_graph;
  };
  struct CondDone {
    StatePtr ifstate;
  };
  struct Compose {
    StatePtr subject;
    SizeChangeGraph pending;
  };
  using Frame = std::variant<RatorDone, RandDone, CondDone, Compose>;

  bool spend_fuel() {
    if (opts_.fuel <= 0) {
      result_.status = EvalResult::Status::Timeout;
      result_.message = "fuel exhausted";
      return false;
    }
    --opts_.fuel;
    return true;
  }

  bool fail(std::string msg, bool internal = false) {
    result_.status = EvalResult::Status::Error;
    result_.message = std::move(msg);
    result_.internal_error = internal;
    return false;
  }

  void record(StatePtr src, StepKind kind, StatePtr dst,
              SizeChangeGraph graph) {
    if (opts_.record_steps)
      steps_.push_back(
          InstrStep{std::move(src), kind, std::move(dst), std::move(graph)});
  }

  void produce(StatePtr value, SizeChangeGraph graph) {
    value_ = std::move(value);
    graph_ = std::move(graph);
    returning_ = true;
  }

  // Evaluate one control state.  Returns false to stop the machine.
  bool step_eval() {
    const StatePtr s = control_;
    switch (classify(*s)) {
      case StateClass::Closure:
      case StateClass::PrimFn: {
        if (!spend_fuel()) return false;
        SizeChangeGraph g = identity_eq(value_fv(*s, fv_));
        record(s, StepKind::V, s, g);
        produce(s, std::move(g));
        return true;
      }
      case StateClass::Numeral: {
        if (!spend_fuel()) return false;
        StatePtr v = s->mnum.has_value()
                         ? s
                         : make_numeral(*numeral_value(*s), s->expr);
        // Numbers evaluate with an arc-free graph: there is no environment
        // entry whose size the result could be related to.
        SizeChangeGraph g{VarSet{}, VarSet{}};
        record(s, StepKind::V, v, g);
        produce(std::move(v), std::move(g));
        return true;
      }
      case StateClass::Boolean: {
        if (!spend_fuel()) return false;
        SizeChangeGraph g = identity_eq(VarSet{});
        record(s, StepKind::V, s, g);
        produce(s, std::move(g));
        return true;
      }
      case StateClass::Hole: {
        auto it = opts_.subst.find(s->expr);
        if (it == opts_.subst.end())
          return fail("opaque numeral at point " +
                      std::to_string(s->expr->label) +
                      " has no substitution (use --subst i=NAT)");
        if (!spend_fuel()) return false;
        StatePtr v = make_numeral(it->second, s->expr);
        // Arc-free like literals; an identity arc would also be unsound here
        // because the substituted number is a different state.
        SizeChangeGraph g{VarSet{}, VarSet{}};
        record(s, StepKind::V, v, g);
        produce(std::move(v), std::move(g));
        return true;
      }
      case StateClass::Plain:
        break;
    }

    const Exp* e = s->expr;
    switch (e->kind) {
      case ExpKind::Var: {
        const StatePtr* bound = s->env.lookup(e->name);
        if (bound == nullptr)
          return fail("unbound variable '" + e->name + "' at point " +
                          std::to_string(e->label),
                      /*internal=*/true);
        if (!spend_fuel()) return false;
        SizeChangeGraph g(VarSet{e->name}, value_fv(**bound, fv_));
        g.add_arc(e->name, ArcLabel::Eq, kEpsilon);
        for (const auto& y : value_fv(**bound, fv_))
          g.add_arc(e->name, ArcLabel::Dec, y);
        record(s, StepKind::V, *bound, g);
        produce(*bound, std::move(g));
        return true;
      }
      case ExpKind::App: {
        if (!spend_fuel()) return false;
        StatePtr rator = make_state(e->rator, s->env);
        record(s, StepKind::R, rator,
               bridge_dec(fv_.fv(e), fv_.fv(e->rator)));
        frames_.push_back(RatorDone{s});
        control_ = std::move(rator);
        return true;
      }
      case ExpKind::If: {
        if (!spend_fuel()) return false;
        StatePtr cond = make_state(e->cond, s->env);
        record(s, StepKind::R, cond, bridge_dec(fv_.fv(e), fv_.fv(e->cond)));
        frames_.push_back(CondDone{s});
        control_ = std::move(cond);
        return true;
      }
      case ExpKind::NonTerm: {
        const Grammar& grammar = fv_.grammar();
        std::vector<const Exp*> bodies = grammar.bodies_of(e->name);
        if (bodies.empty())
          return fail("nonterminal '" + e->name + "' has no productions");
        if (++expansions_ > opts_.policy.depth_cap)
          return fail("grammar expansion depth cap (" +
                      std::to_string(opts_.policy.depth_cap) + ") exceeded");
        std::size_t idx = 0;
        if (opts_.policy.kind == ProductionPolicy::Kind::RandomSeeded)
          idx = static_cast<std::size_t>(rng_() % bodies.size());
        const Exp* body = bodies[idx];
        if (!spend_fuel()) return false;
        StatePtr target = make_state(body, s->env);
        SizeChangeGraph g = bridge_eq(fv_.fv(e), fv_.fv(body));
        record(s, StepKind::N, target, g);
        frames_.push_back(Compose{s, g});
        control_ = std::move(target);
        return true;
      }
      default:
        return fail("cannot evaluate node kind at point " +
                        std::to_string(e->label),
                    /*internal=*/true);
    }
  }

  // Hand the produced (value_, graph_) to the innermost frame.
  bool step_return() {
    Frame frame = std::move(frames_.back());
    frames_.pop_back();
    returning_ = false;

    if (auto* f = std::get_if<RatorDone>(&frame)) {
      const Exp* e = f->app->expr;
      if (!spend_fuel()) return false;
      StatePtr rand = make_state(e->rand, f->app->env);
      record(f->app, StepKind::D, rand,
             bridge_dec(fv_.fv(e), fv_.fv(e->rand)));
      frames_.push_back(RandDone{f->app, value_, graph_});
      control_ = std::move(rand);
      return true;
    }

    if (auto* f = std::get_if<RandDone>(&frame)) {
      const State& rv = *f->rator_value;
      StateClass rc = classify(rv);
      if (rc == StateClass::Closure) {
        const Exp* lam = rv.expr;
        Env callee = rv.env.extend(lam->binder, value_);
        StatePtr target = make_state(lam->body, callee);
        if (!spend_fuel()) return false;
        SizeChangeGraph gc = call_combine(f->rator_graph, graph_, lam->binder,
                                          fv_.fv(lam->body));
        record(f->app, StepKind::C, target, gc);
        frames_.push_back(Compose{f->app, std::move(gc)});
        control_ = std::move(target);
        return true;
      }
      if (rc == StateClass::PrimFn) {
        PrimKind k = rv.expr->prim;
        std::optional<long long> n = numeral_value(*value_);
        if (!n.has_value())
          return fail("primitive applied to a non-numeral at point " +
                      std::to_string(f->app->expr->label));
        StatePtr out;
        switch (k) {
          case PrimKind::Pred:
            if (*n == 0)
              return fail("predecessor of zero at point " +
                          std::to_string(f->app->expr->label));
            out = make_numeral(*n - 1, f->app->expr);
            break;
          case PrimKind::Succ:
            out = make_numeral(*n + 1, f->app->expr);
            break;
          case PrimKind::Ztst:
            out = make_boolean(*n == 0, f->app->expr);
            break;
          default:
            return fail("numeral used as a function at point " +
                        std::to_string(f->app->expr->label));
        }
        if (!spend_fuel()) return false;
        SizeChangeGraph g = prim_graph(k, graph_, fv_.fv(f->app->expr));
        record(f->app, StepKind::V, out, g);
        produce(std::move(out), std::move(g));
        return true;
      }
      return fail("cannot apply a non-function value at point " +
                  std::to_string(f->app->expr->label));
    }

    if (auto* f = std::get_if<CondDone>(&frame)) {
      const State& cv = *value_;
      if (classify(cv) != StateClass::Boolean)
        return fail("if-condition did not evaluate to a boolean at point " +
                    std::to_string(f->ifstate->expr->label));
      const Exp* e = f->ifstate->expr;
      const Exp* branch = *cv.mbool ? e->then_branch : e->else_branch;
      if (!spend_fuel()) return false;
      StatePtr target = make_state(branch, f->ifstate->env);
      SizeChangeGraph g = bridge_dec(fv_.fv(e), fv_.fv(branch));
      record(f->ifstate, StepKind::C, target, g);
      frames_.push_back(Compose{f->ifstate, std::move(g)});
      control_ = std::move(target);
      return true;
    }

    auto& f = std::get<Compose>(frame);
    if (!spend_fuel()) return false;
    SizeChangeGraph g = opts_.record_steps ? compose(f.pending, graph_)
                                           : SizeChangeGraph{};
    record(f.subject, StepKind::V, value_, g);
    produce(value_, std::move(g));
    return true;
  }

  const FvCache& fv_;
  EvalOptions opts_;
  std::mt19937_64 rng_;
  std::size_t expansions_ = 0;

  StatePtr control_;
  bool returning_ = false;
  StatePtr value_;
  SizeChangeGraph graph_;
  std::vector<Frame> frames_;
  std::vector<InstrStep> steps_;
  EvalResult result_;
};

}  // namespace detail

// Evaluates e:env.  Pure-mode evaluation is deterministic; with a grammar
// the production policy picks among productions.
inline EvalResult eval(const Exp* e, const Env& env, const FvCache& fv,
                       EvalOptions opts = {}) {
  detail::Machine machine(fv, opts);
  return machine.run(make_state(e, env));
}

inline EvalResult eval(const Program& prog, EvalOptions opts = {}) {
  FvCache fv(prog.grammar);
  return eval(prog.root, Env{}, fv, std::move(opts));
}

// Size-change-graph-instrumented evaluation: like eval, plus the full list
// of call steps and evaluation facts with their graphs.
inline EvalResult eval_instrumented(const Exp* e, const Env& env,
                                    const FvCache& fv, EvalOptions opts = {}) {
  opts.record_steps = true;
  return eval(e, env, fv, std::move(opts));
}

inline EvalResult eval_instrumented(const Program& prog,
                                    EvalOptions opts = {}) {
  opts.record_steps = true;
  FvCache fv(prog.grammar);
  return eval(prog.root, Env{}, fv, std::move(opts));
}

// The call edges (kinds r/d/c/n) fired during an evaluation, in firing
// order.
struct CallStep {
  StatePtr src;
  CallKind kind = CallKind::C;
  StatePtr dst;
};

inline std::vector<CallStep> trace_calls(const Exp* e, const Env& env,
                                         const FvCache& fv,
                                         EvalOptions opts = {}) {
  EvalResult r = eval_instrumented(e, env, fv, std::move(opts));
  std::vector<CallStep> out;
  for (const InstrStep& s : r.steps)
    if (s.kind != StepKind::V)
      out.push_back(CallStep{s.src, static_cast<CallKind>(s.kind), s.dst});
  return out;
}

// ---- substitution semantics (reference evaluator) ----

namespace detail {

// Capture-avoiding substitution e[v/x] for closed v (values of closed
// programs are closed, so no renaming is ever required; shadowing stops the
// walk).
inline const Exp* subst_exp(Ast& ast, const Exp* e, const std::string& x,
                            const Exp* v) {
  switch (e->kind) {
    case ExpKind::Var:
      return e->name == x ? v : e;
    case ExpKind::NonTerm:
    case ExpKind::Prim:
      return e;
    case ExpKind::Lam:
      if (e->binder == x) return e;
      return ast.lam(e->binder, subst_exp(ast, e->body, x, v));
    case ExpKind::App:
      return ast.app(subst_exp(ast, e->rator, x, v),
                     subst_exp(ast, e->rand, x, v));
    case ExpKind::If:
      return ast.if_(subst_exp(ast, e->cond, x, v),
                     subst_exp(ast, e->then_branch, x, v),
                     subst_exp(ast, e->else_branch, x, v));
  }
  throw InternalError("subst: unhandled node kind");
}

}  // namespace detail

// Decodes a Church boolean (\t.\f.t or \t.\f.f, any binder names).
inline std::optional<bool> church_bool_decode(const Exp* e) {
  if (e->kind != ExpKind::Lam || e->body->kind != ExpKind::Lam) return {};
  const Exp* inner = e->body->body;
  if (inner->kind != ExpKind::Var) return {};
  if (inner->name == e->binder) return true;
  if (inner->name == e->body->binder) return false;
  return {};
}

struct SubstResult {
  enum class Status { Value, Timeout, Error };
  Status status = Status::Error;
  const Exp* value = nullptr;
  std::string message;

  bool ok() const { return status == Status::Value; }
};

// Classical substitution-based CBV evaluation (the reference the
// environment machine is cross-checked against).  Fuel counts beta/delta
// contractions and conditional reductions.
inline SubstResult eval_subst(const Exp* e, Ast& ast, long long fuel = 100000) {
  struct Impl {
    Ast& ast;
    long long fuel;
    SubstResult out;

    const Exp* go(const Exp* e) {
      if (out.status != SubstResult::Status::Value) return nullptr;
      switch (e->kind) {
        case ExpKind::Lam:
        case ExpKind::Prim:
          return e;
        case ExpKind::Var:
          fail("free variable '" + e->name + "' reached during evaluation");
          return nullptr;
        case ExpKind::NonTerm:
          fail("nonterminal reached by the substitution evaluator");
          return nullptr;
        case ExpKind::If: {
          const Exp* c = go(e->cond);
          if (c == nullptr) return nullptr;
          std::optional<bool> b = church_bool_decode(c);
          if (!b.has_value()) {
            fail("if-condition is not a boolean");
            return nullptr;
          }
          if (!burn()) return nullptr;
          return go(*b ? e->then_branch : e->else_branch);
        }
        case ExpKind::App: {
          const Exp* f = go(e->rator);
          if (f == nullptr) return nullptr;
          const Exp* a = go(e->rand);
          if (a == nullptr) return nullptr;
          if (f->kind == ExpKind::Lam) {
            if (!burn()) return nullptr;
            return go(detail::subst_exp(ast, f->body, f->binder, a));
          }
          if (f->kind == ExpKind::Prim && f->prim != PrimKind::Num) {
            if (a->kind != ExpKind::Prim || a->prim != PrimKind::Num ||
                !a->num.has_value()) {
              fail("primitive applied to a non-numeral");
              return nullptr;
            }
            if (!burn()) return nullptr;
            long long n = *a->num;
            switch (f->prim) {
              case PrimKind::Pred:
                if (n == 0) {
                  fail("predecessor of zero");
                  return nullptr;
                }
                return ast.prim(PrimKind::Num, n - 1);
              case PrimKind::Succ:
                return ast.prim(PrimKind::Num, n + 1);
              case PrimKind::Ztst:
                return ast.lam("t", ast.lam("f", ast.var(n == 0 ? "t" : "f")));
              default:
                break;
            }
          }
          fail("cannot apply a non-function value");
          return nullptr;
        }
      }
      fail("unhandled node kind");
      return nullptr;
    }

    bool burn() {
      if (fuel <= 0) {
        out.status = SubstResult::Status::Timeout;
        out.message = "fuel exhausted";
        return false;
      }
      --fuel;
      return true;
    }

    void fail(std::string msg) {
      out.status = SubstResult::Status::Error;
      out.message = std::move(msg);
    }
  };

  Impl impl{ast, fuel, SubstResult{SubstResult::Status::Value, nullptr, {}}};
  const Exp* v = impl.go(e);
  SubstResult out = impl.out;
  if (out.status == SubstResult::Status::Value) out.value = v;
  return out;
}

// ---- flattening (environment -> substitution view) ----

// F(e:env) = e with every free variable replaced by the flattening of its
// bound value.  Machine numerals flatten to literals, booleans to Church
// booleans, so flattened results compare directly against eval_subst.
inline const Exp* flatten(const State& s, Ast& ast, const FvCache& fv) {
  switch (classify(s)) {
    case StateClass::Numeral:
      return ast.prim(PrimKind::Num, *numeral_value(s));
    case StateClass::Boolean:
      return ast.lam("t", ast.lam("f", ast.var(*s.mbool ? "t" : "f")));
    default:
      break;
  }
  const Exp* out = s.expr;
  for (const auto& x : fv.fv(s.expr)) {
    const StatePtr* bound = s.env.lookup(x);
    if (bound == nullptr)
      throw InternalError("flatten: state not well-formed (missing '" + x +
                          "')");
    out = detail::subst_exp(ast, out, x, flatten(**bound, ast, fv));
  }
  return out;
}

// ---- Church numeral helpers ----

inline const Exp* church_numeral(Ast& ast, long long n,
                                 const std::string& s = "s",
                                 const std::string& z = "z") {
  const Exp* body = ast.var(z);
  for (long long i = 0; i < n; ++i) body = ast.app(ast.var(s), body);
  return ast.lam(s, ast.lam(z, body));
}

// Decodes \s.\z.s@(s@...(z)) to its iteration count (any binder names).
inline std::optional<long long> church_decode(const Exp* e) {
  if (e->kind != ExpKind::Lam || e->body->kind != ExpKind::Lam) return {};
  const std::string& s = e->binder;
  const std::string& z = e->body->binder;
  if (s == z) return {};
  const Exp* body = e->body->body;
  long long n = 0;
  while (body->kind == ExpKind::App) {
    if (body->rator->kind != ExpKind::Var || body->rator->name != s) return {};
    ++n;
    body = body->rand;
  }
  if (body->kind != ExpKind::Var || body->name != z) return {};
  return n;
}

}  // namespace sctlam
