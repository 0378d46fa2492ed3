#pragma once

// Core term representation for the untyped call-by-value lambda-calculus,
// extended with regular-tree-grammar nonterminals and opaque-numeral
// primitives.  Provides the arena that owns all nodes, program-point
// labeling, free-variable and subexpression queries (including their
// grammar-extended least-fixpoint versions), and structural equality.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace sctlam {

// A finite set of variable names.  All set operations are pure.
using VarSet = std::set<std::string>;

// Reserved name for the epsilon position of a size-change graph.  The empty
// string cannot be produced by the parser, so it never collides with a
// program variable.  It prints as "eps".
inline const std::string kEpsilon{};

enum class ExpKind : std::uint8_t { Var, Lam, App, NonTerm, Prim, If };

// Primitive kinds.  Num covers both the opaque numeral input hole (no fixed
// value; written `_` or the bullet character) and integer literals (fixed
// value).
enum class PrimKind : std::uint8_t { Pred, Succ, Ztst, Num };

// One expression node.  Nodes are immutable after construction and owned by
// an Ast arena; children are plain pointers into the same arena.
struct Exp {
  ExpKind kind = ExpKind::Var;
  int label = 0;  // program point, assigned 1.. by preorder; 0 = unlabeled

  std::string name;                  // Var, NonTerm
  std::string binder;                // Lam
  const Exp* body = nullptr;         // Lam
  const Exp* rator = nullptr;        // App operator
  const Exp* rand = nullptr;         // App operand
  PrimKind prim = PrimKind::Num;     // Prim
  std::optional<long long> num;      // Prim(Num): engaged for literals
  const Exp* cond = nullptr;         // If
  const Exp* then_branch = nullptr;  // If
  const Exp* else_branch = nullptr;  // If
};

// Errors raised on malformed input (programs, grammars, flags).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Errors that indicate a broken internal invariant, never a user mistake.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// Arena owning expression nodes.  std::deque keeps addresses stable.
class Ast {
 public:
  const Exp* make(Exp node) {
    nodes_.push_back(std::move(node));
    return &nodes_.back();
  }

  const Exp* var(std::string name) {
    Exp e;
    e.kind = ExpKind::Var;
    e.name = std::move(name);
    return make(std::move(e));
  }
  const Exp* lam(std::string binder, const Exp* body) {
    Exp e;
    e.kind = ExpKind::Lam;
    e.binder = std::move(binder);
    e.body = body;
    return make(std::move(e));
  }
  const Exp* app(const Exp* rator, const Exp* rand) {
    Exp e;
    e.kind = ExpKind::App;
    e.rator = rator;
    e.rand = rand;
    return make(std::move(e));
  }
  const Exp* nonterm(std::string name) {
    Exp e;
    e.kind = ExpKind::NonTerm;
    e.name = std::move(name);
    return make(std::move(e));
  }
  const Exp* prim(PrimKind kind, std::optional<long long> value = {}) {
    Exp e;
    e.kind = ExpKind::Prim;
    e.prim = kind;
    e.num = value;
    return make(std::move(e));
  }
  const Exp* if_(const Exp* cond, const Exp* then_branch,
                 const Exp* else_branch) {
    Exp e;
    e.kind = ExpKind::If;
    e.cond = cond;
    e.then_branch = then_branch;
    e.else_branch = else_branch;
    return make(std::move(e));
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::deque<Exp> nodes_;
};

// One production A ::= rhs of a lambda-regular tree grammar.
struct Production {
  std::string lhs;
  const Exp* rhs = nullptr;
};

// A lambda-regular tree grammar: nonterminal names plus productions.
// Invariant (established by the parser/normalizer): no production body is a
// bare nonterminal, and every nonterminal mentioned anywhere is declared.
struct Grammar {
  std::vector<std::string> nonterminals;  // declaration order
  std::vector<Production> productions;    // declaration order

  bool empty() const { return productions.empty(); }

  bool has(const std::string& name) const {
    for (const auto& n : nonterminals)
      if (n == name) return true;
    return false;
  }

  std::vector<const Exp*> bodies_of(const std::string& name) const {
    std::vector<const Exp*> out;
    for (const auto& p : productions)
      if (p.lhs == name) out.push_back(p.rhs);
    return out;
  }
};

// A parsed program: the arena, the root expression, the (possibly empty)
// grammar, and the label -> node table (points[label - 1]).
struct Program {
  std::shared_ptr<Ast> ast;
  const Exp* root = nullptr;
  Grammar grammar;
  std::vector<const Exp*> points;

  const Exp* at(int label) const {
    if (label < 1 || label > static_cast<int>(points.size()))
      throw InternalError("program point out of range: " +
                          std::to_string(label));
    return points[static_cast<std::size_t>(label) - 1];
  }
};

namespace detail {

inline void preorder_collect(const Exp* e, std::vector<const Exp*>& out) {
  if (e == nullptr) return;
  out.push_back(e);
  switch (e->kind) {
    case ExpKind::Var:
    case ExpKind::NonTerm:
    case ExpKind::Prim:
      break;
    case ExpKind::Lam:
      preorder_collect(e->body, out);
      break;
    case ExpKind::App:
      preorder_collect(e->rator, out);
      preorder_collect(e->rand, out);
      break;
    case ExpKind::If:
      preorder_collect(e->cond, out);
      preorder_collect(e->then_branch, out);
      preorder_collect(e->else_branch, out);
      break;
  }
}

}  // namespace detail

// The nodes of one expression tree in preorder (no grammar expansion).
inline std::vector<const Exp*> subterms(const Exp* e) {
  std::vector<const Exp*> out;
  detail::preorder_collect(e, out);
  return out;
}

// Assigns preorder labels 1.. across the root expression followed by the
// grammar production bodies in declaration order, and returns the
// label -> node table.  Labels are written through the arena's ownership of
// the (otherwise immutable) nodes.
inline std::vector<const Exp*> assign_labels(const Exp* root,
                                             const Grammar& grammar) {
  std::vector<const Exp*> order = subterms(root);
  // Unit-production inlining can make two productions share a body node;
  // each node gets exactly one label.
  std::set<const Exp*> taken(order.begin(), order.end());
  for (const auto& prod : grammar.productions)
    for (const Exp* node : subterms(prod.rhs))
      if (taken.insert(node).second) order.push_back(node);
  int next = 1;
  for (const Exp* node : order) const_cast<Exp*>(node)->label = next++;
  return order;
}

// Free variables of every nonterminal, as the least fixpoint of
// fv(A) = union over productions A ::= e of fv(e), where fv of a nonterminal
// occurrence is looked up in the current approximation.
inline std::map<std::string, VarSet> grammar_free_vars(const Grammar& g) {
  std::map<std::string, VarSet> fv;
  for (const auto& n : g.nonterminals) fv[n];  // start from empty sets

  // fv of one expression under the current nonterminal approximation.
  auto fv_exp = [&fv](const auto& self, const Exp* e) -> VarSet {
    switch (e->kind) {
      case ExpKind::Var:
        return {e->name};
      case ExpKind::NonTerm: {
        auto it = fv.find(e->name);
        if (it == fv.end())
          throw InputError("unknown nonterminal: " + e->name);
        return it->second;
      }
      case ExpKind::Lam: {
        VarSet s = self(self, e->body);
        s.erase(e->binder);
        return s;
      }
      case ExpKind::App: {
        VarSet s = self(self, e->rator);
        VarSet t = self(self, e->rand);
        s.insert(t.begin(), t.end());
        return s;
      }
      case ExpKind::Prim:
        return {};
      case ExpKind::If: {
        VarSet s = self(self, e->cond);
        VarSet t = self(self, e->then_branch);
        VarSet u = self(self, e->else_branch);
        s.insert(t.begin(), t.end());
        s.insert(u.begin(), u.end());
        return s;
      }
    }
    throw InternalError("fv: unhandled node kind");
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& prod : g.productions) {
      VarSet body = fv_exp(fv_exp, prod.rhs);
      VarSet& cur = fv[prod.lhs];
      for (const auto& v : body)
        if (cur.insert(v).second) changed = true;
    }
  }
  return fv;
}

// Free variables of e.  For nonterminal occurrences the grammar fixpoint is
// consulted; pass a precomputed map to avoid recomputing it in hot loops.
inline VarSet free_vars(const Exp* e, const Grammar& grammar = {},
                        const std::map<std::string, VarSet>* nt_fv = nullptr) {
  std::map<std::string, VarSet> local;
  if (nt_fv == nullptr && !grammar.empty()) {
    local = grammar_free_vars(grammar);
    nt_fv = &local;
  }
  auto walk = [&](const auto& self, const Exp* node) -> VarSet {
    switch (node->kind) {
      case ExpKind::Var:
        return {node->name};
      case ExpKind::NonTerm: {
        if (nt_fv == nullptr)
          throw InputError("unknown nonterminal: " + node->name);
        auto it = nt_fv->find(node->name);
        if (it == nt_fv->end())
          throw InputError("unknown nonterminal: " + node->name);
        return it->second;
      }
      case ExpKind::Lam: {
        VarSet s = self(self, node->body);
        s.erase(node->binder);
        return s;
      }
      case ExpKind::App: {
        VarSet s = self(self, node->rator);
        VarSet t = self(self, node->rand);
        s.insert(t.begin(), t.end());
        return s;
      }
      case ExpKind::Prim:
        return {};
      case ExpKind::If: {
        VarSet s = self(self, node->cond);
        VarSet t = self(self, node->then_branch);
        VarSet u = self(self, node->else_branch);
        s.insert(t.begin(), t.end());
        s.insert(u.begin(), u.end());
        return s;
      }
    }
    throw InternalError("free_vars: unhandled node kind");
  };
  return walk(walk, e);
}

// Subexpressions of e as a set of occurrences (labeled nodes).  For a pure
// expression this is exactly its subterm set; a nonterminal occurrence
// additionally contributes the subexpressions of every production body of
// that nonterminal (each body contributing once, in declaration order).
inline std::vector<const Exp*> subexps(const Exp* e,
                                       const Grammar& grammar = {}) {
  std::vector<const Exp*> out = subterms(e);
  std::set<std::string> reached;
  auto scan_nonterms = [&](const std::vector<const Exp*>& nodes) {
    std::vector<std::string> found;
    for (const Exp* n : nodes)
      if (n->kind == ExpKind::NonTerm && reached.insert(n->name).second)
        found.push_back(n->name);
    return found;
  };
  std::vector<std::string> pending = scan_nonterms(out);
  while (!pending.empty()) {
    std::vector<std::string> next;
    // Expand in grammar declaration order for determinism.
    for (const auto& prod : grammar.productions) {
      bool wanted = false;
      for (const auto& name : pending)
        if (prod.lhs == name) wanted = true;
      if (!wanted) continue;
      std::vector<const Exp*> body = subterms(prod.rhs);
      out.insert(out.end(), body.begin(), body.end());
      for (const auto& name : scan_nonterms(body)) next.push_back(name);
    }
    // Verify every pending nonterminal exists in the grammar.
    for (const auto& name : pending) {
      bool known = false;
      for (const auto& n : grammar.nonterminals)
        if (n == name) known = true;
      if (!known) throw InputError("unknown nonterminal: " + name);
    }
    pending = std::move(next);
  }
  return out;
}

// True iff e has no free variables (under the grammar-extended fv).
inline bool is_closed(const Exp* e, const Grammar& grammar = {}) {
  return free_vars(e, grammar).empty();
}

// Structural equality, ignoring labels.
inline bool structural_equal(const Exp* a, const Exp* b) {
  if (a == b) return true;
  if (a == nullptr || b == nullptr) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExpKind::Var:
    case ExpKind::NonTerm:
      return a->name == b->name;
    case ExpKind::Lam:
      return a->binder == b->binder && structural_equal(a->body, b->body);
    case ExpKind::App:
      return structural_equal(a->rator, b->rator) &&
             structural_equal(a->rand, b->rand);
    case ExpKind::Prim:
      return a->prim == b->prim && a->num == b->num;
    case ExpKind::If:
      return structural_equal(a->cond, b->cond) &&
             structural_equal(a->then_branch, b->then_branch) &&
             structural_equal(a->else_branch, b->else_branch);
  }
  return false;
}

// Deduplicates a set of occurrences by structure (used by tests that compare
// occurrence sets against the structural subexpression sets).
inline std::vector<const Exp*> dedupe_structural(
    const std::vector<const Exp*>& nodes) {
  std::vector<const Exp*> out;
  for (const Exp* n : nodes) {
    bool seen = false;
    for (const Exp* m : out)
      if (structural_equal(n, m)) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(n);
  }
  return out;
}

}  // namespace sctlam
