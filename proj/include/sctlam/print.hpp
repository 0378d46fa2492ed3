#pragma once

// Pretty-printing of expressions and grammars.  The printed form parses back
// to a structurally equal expression (round-trip up to whitespace).

#include <sstream>
#include <string>

#include "sctlam/syntax.hpp"

namespace sctlam {

namespace detail {

inline void print_exp(const Exp* e, std::ostream& os) {
  switch (e->kind) {
    case ExpKind::Var:
    case ExpKind::NonTerm:
      os << e->name;
      return;
    case ExpKind::Lam:
      os << "(\\" << e->binder << ".";
      print_exp(e->body, os);
      os << ")";
      return;
    case ExpKind::App:
      os << "(";
      print_exp(e->rator, os);
      os << " @ ";
      print_exp(e->rand, os);
      os << ")";
      return;
    case ExpKind::Prim:
      switch (e->prim) {
        case PrimKind::Pred:
          os << "pred";
          return;
        case PrimKind::Succ:
          os << "succ";
          return;
        case PrimKind::Ztst:
          os << "ztst";
          return;
        case PrimKind::Num:
          if (e->num.has_value())
            os << *e->num;
          else
            os << "_";
          return;
      }
      return;
    case ExpKind::If:
      os << "if(";
      print_exp(e->cond, os);
      os << ", ";
      print_exp(e->then_branch, os);
      os << ", ";
      print_exp(e->else_branch, os);
      os << ")";
      return;
  }
}

}  // namespace detail

inline std::string to_text(const Exp* e) {
  std::ostringstream os;
  detail::print_exp(e, os);
  return os.str();
}

inline std::string to_text(const Grammar& g) {
  std::ostringstream os;
  bool first = true;
  for (const auto& prod : g.productions) {
    if (!first) os << " ; ";
    first = false;
    os << prod.lhs << " ::= " << to_text(prod.rhs);
  }
  return os.str();
}

// Short node description for diagnostics: "label:kind" plus a text fragment.
inline std::string describe(const Exp* e) {
  std::string text = to_text(e);
  if (text.size() > 40) text = text.substr(0, 37) + "...";
  return std::to_string(e->label) + ":" + text;
}

}  // namespace sctlam
