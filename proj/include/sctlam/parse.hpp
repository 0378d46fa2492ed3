#pragma once

// Parser for programs and lambda-regular grammars.
//
// Concrete syntax:
//   expression   \x.e  or  λx.e        abstraction (body extends right)
//                e1 @ e2  or  e1 e2    application (left-associative)
//                ( e )  or  [ e ]      grouping
//                _  or  •              opaque numeral input hole
//                0, 1, 2, ...          fixed opaque numeral literals
//                pred succ ztst        numeral primitives
//                if(c, a, b)           conditional
//                name                  variable, or nonterminal if declared
//   program file optional leading block `grammar: <productions> end`
//                followed by one expression
//   productions  A ::= e1 | e2   separated by `;` or line breaks
//   comments     `--` to end of line
//
// Post-parse the grammar is normalized (unit productions A ::= B inlined;
// pure-nonterminal cycles rejected), duplicate lambda binders are freshened
// (default) or rejected (strict mode), and program points are assigned by
// preorder over the main expression followed by the production bodies.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sctlam/syntax.hpp"

namespace sctlam {

struct ParseOptions {
  bool strict_alpha = false;     // reject duplicate binders instead of freshening
  bool allow_primitives = true;  // permit _, literals, pred/succ/ztst, if(,,)
};

namespace detail {

enum class Tok : std::uint8_t {
  Lambda,
  Dot,
  At,
  LParen,
  RParen,
  Comma,
  Semi,
  Pipe,
  Colon,
  ProdArrow,  // ::=
  Ident,
  Int,
  Hole,
  KwIf,
  KwPred,
  KwSucc,
  KwZtst,
  End,  // end of input
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long num = 0;
  int line = 1;
  int col = 1;
};

[[noreturn]] inline void parse_fail(const std::string& msg, int line,
                                    int col) {
  throw InputError("parse error at " + std::to_string(line) + ":" +
                   std::to_string(col) + ": " + msg);
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }
  const Token& peek2() {
    if (!tok2_.has_value()) tok2_ = scan();
    return *tok2_;
  }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    if (tok2_.has_value()) {
      tok_ = *tok2_;
      tok2_.reset();
    } else {
      tok_ = scan();
    }
  }

  bool starts_with(const char* s) const {
    std::size_t n = std::char_traits<char>::length(s);
    return text_.compare(pos_, n, s) == 0;
  }

  void bump(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  Token scan() {
    // Skip whitespace and comments.
    for (;;) {
      while (pos_ < text_.size() &&
             std::isspace(static_cast<unsigned char>(text_[pos_])))
        bump();
      if (starts_with("--")) {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = text_[pos_];
    if (c == '\\') {
      bump();
      t.kind = Tok::Lambda;
      return t;
    }
    if (starts_with("\xCE\xBB")) {  // UTF-8 lambda
      bump(2);
      t.kind = Tok::Lambda;
      return t;
    }
    if (starts_with("\xE2\x80\xA2")) {  // UTF-8 bullet
      bump(3);
      t.kind = Tok::Hole;
      return t;
    }
    if (starts_with("::=")) {
      bump(3);
      t.kind = Tok::ProdArrow;
      return t;
    }
    switch (c) {
      case '.':
        bump();
        t.kind = Tok::Dot;
        return t;
      case '@':
        bump();
        t.kind = Tok::At;
        return t;
      case '(':
      case '[':
        bump();
        t.kind = Tok::LParen;
        return t;
      case ')':
      case ']':
        bump();
        t.kind = Tok::RParen;
        return t;
      case ',':
        bump();
        t.kind = Tok::Comma;
        return t;
      case ';':
        bump();
        t.kind = Tok::Semi;
        return t;
      case '|':
        bump();
        t.kind = Tok::Pipe;
        return t;
      case ':':
        bump();
        t.kind = Tok::Colon;
        return t;
      default:
        break;
    }
    if (c == '_') {
      bump();
      if (pos_ < text_.size() &&
          (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
           text_[pos_] == '_'))
        parse_fail("identifiers may not start with '_'", t.line, t.col);
      t.kind = Tok::Hole;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long value = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + (text_[pos_] - '0');
        bump();
      }
      t.kind = Tok::Int;
      t.num = value;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '\'')) {
        name.push_back(text_[pos_]);
        bump();
      }
      if (name == "if")
        t.kind = Tok::KwIf;
      else if (name == "pred")
        t.kind = Tok::KwPred;
      else if (name == "succ")
        t.kind = Tok::KwSucc;
      else if (name == "ztst")
        t.kind = Tok::KwZtst;
      else {
        t.kind = Tok::Ident;
        t.text = std::move(name);
      }
      return t;
    }
    parse_fail(std::string("unexpected character '") + c + "'", t.line,
               t.col);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
  std::optional<Token> tok2_;
};

class Parser {
 public:
  Parser(Ast& ast, const std::string& text, const ParseOptions& opts,
         const std::set<std::string>* nonterminals)
      : ast_(ast), lex_(text), opts_(opts) {
    if (nonterminals != nullptr) nonterminals_ = *nonterminals;
  }

  // Parses a `grammar: ... end` block if present at the current position
  // (only meaningful at the very start of a program file).  The word
  // `grammar` stays an ordinary identifier unless followed by ':'.
  bool try_parse_grammar_block(Grammar& out) {
    if (lex_.peek().kind != Tok::Ident || lex_.peek().text != "grammar")
      return false;
    if (lex_.peek2().kind != Tok::Colon) return false;
    lex_.next();  // "grammar"
    lex_.next();  // ":"
    parse_productions(out, /*stop_at_end_keyword=*/true);
    return true;
  }

  void parse_productions(Grammar& out, bool stop_at_end_keyword) {
    in_grammar_ = true;
    for (;;) {
      while (lex_.peek().kind == Tok::Semi) lex_.next();
      if (lex_.peek().kind == Tok::End) break;
      if (stop_at_end_keyword && lex_.peek().kind == Tok::Ident &&
          lex_.peek().text == "end") {
        lex_.next();
        break;
      }
      Token name = lex_.next();
      if (name.kind != Tok::Ident)
        parse_fail("expected nonterminal name", name.line, name.col);
      Token arrow = lex_.next();
      if (arrow.kind != Tok::ProdArrow)
        parse_fail("expected ::= after nonterminal name", arrow.line,
                   arrow.col);
      if (std::find(out.nonterminals.begin(), out.nonterminals.end(),
                    name.text) == out.nonterminals.end())
        out.nonterminals.push_back(name.text);
      nonterminals_.insert(name.text);
      for (;;) {
        const Exp* body = parse_expr();
        out.productions.push_back(Production{name.text, body});
        if (lex_.peek().kind == Tok::Pipe) {
          lex_.next();
          continue;
        }
        break;
      }
    }
    in_grammar_ = false;
  }

  const Exp* parse_expr() {
    if (lex_.peek().kind == Tok::Lambda) return parse_lambda();
    return parse_application();
  }

  void expect_end() {
    if (lex_.peek().kind != Tok::End)
      parse_fail("trailing input after expression", lex_.peek().line,
                 lex_.peek().col);
  }

  // Pre-registered nonterminal names (for two-pass grammar parsing).
  void register_nonterminals(const std::set<std::string>& names) {
    for (const auto& n : names) nonterminals_.insert(n);
  }

 private:
  bool has_nonterminal(const std::string& name) const {
    return nonterminals_.count(name) > 0;
  }

  const Exp* parse_lambda() {
    Token l = lex_.next();  // lambda
    Token name = lex_.next();
    if (name.kind != Tok::Ident)
      parse_fail("expected binder name after lambda", name.line, name.col);
    if (has_nonterminal(name.text))
      parse_fail("binder '" + name.text + "' shadows a nonterminal",
                 name.line, name.col);
    Token dot = lex_.next();
    if (dot.kind != Tok::Dot)
      parse_fail("expected '.' after binder", dot.line, dot.col);
    (void)l;
    const Exp* body = parse_expr();
    return ast_.lam(name.text, body);
  }

  bool at_atom_start() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::LParen:
      case Tok::Int:
      case Tok::Hole:
      case Tok::KwIf:
      case Tok::KwPred:
      case Tok::KwSucc:
      case Tok::KwZtst:
        return true;
      case Tok::Ident:
        if (in_grammar_ && t.text == "end") return false;
        // An identifier followed by ::= begins the next production.
        if (in_grammar_ && lex_.peek2().kind == Tok::ProdArrow) return false;
        return true;
      default:
        return false;
    }
  }

  const Exp* parse_application() {
    const Exp* left = parse_atom();
    for (;;) {
      if (lex_.peek().kind == Tok::At) {
        lex_.next();
        const Exp* right = (lex_.peek().kind == Tok::Lambda)
                               ? parse_lambda()
                               : parse_atom();
        left = ast_.app(left, right);
        continue;
      }
      if (lex_.peek().kind == Tok::Lambda) {
        // Trailing lambda operand extends to the end of the current scope.
        left = ast_.app(left, parse_lambda());
        continue;
      }
      if (at_atom_start()) {
        left = ast_.app(left, parse_atom());
        continue;
      }
      break;
    }
    return left;
  }

  const Exp* parse_atom() {
    Token t = lex_.next();
    switch (t.kind) {
      case Tok::LParen: {
        const Exp* inner = parse_expr();
        Token close = lex_.next();
        if (close.kind != Tok::RParen)
          parse_fail("expected closing bracket", close.line, close.col);
        return inner;
      }
      case Tok::Ident:
        if (has_nonterminal(t.text)) return ast_.nonterm(t.text);
        return ast_.var(t.text);
      case Tok::Int:
        require_primitives(t);
        return ast_.prim(PrimKind::Num, t.num);
      case Tok::Hole:
        require_primitives(t);
        return ast_.prim(PrimKind::Num);
      case Tok::KwPred:
        require_primitives(t);
        return ast_.prim(PrimKind::Pred);
      case Tok::KwSucc:
        require_primitives(t);
        return ast_.prim(PrimKind::Succ);
      case Tok::KwZtst:
        require_primitives(t);
        return ast_.prim(PrimKind::Ztst);
      case Tok::KwIf: {
        require_primitives(t);
        Token open = lex_.next();
        if (open.kind != Tok::LParen)
          parse_fail("expected '(' after if", open.line, open.col);
        const Exp* cond = parse_expr();
        expect_comma();
        const Exp* then_branch = parse_expr();
        expect_comma();
        const Exp* else_branch = parse_expr();
        Token close = lex_.next();
        if (close.kind != Tok::RParen)
          parse_fail("expected ')' closing if", close.line, close.col);
        return ast_.if_(cond, then_branch, else_branch);
      }
      default:
        parse_fail("expected an expression", t.line, t.col);
    }
  }

  void expect_comma() {
    Token c = lex_.next();
    if (c.kind != Tok::Comma)
      parse_fail("expected ',' in if(c, a, b)", c.line, c.col);
  }

  void require_primitives(const Token& t) {
    if (!opts_.allow_primitives)
      parse_fail("primitive used while the primitives extension is disabled",
                 t.line, t.col);
  }

  Ast& ast_;
  Lexer lex_;
  ParseOptions opts_;
  std::set<std::string> nonterminals_;
  bool in_grammar_ = false;
};

// --- post-parse passes ---

// Normalizes the grammar: inlines unit productions A ::= B.  A cycle of unit
// productions is an error.
inline void normalize_grammar(Grammar& g) {
  // Detect pure-nonterminal cycles first.
  std::map<std::string, std::set<std::string>> unit_edges;
  for (const auto& p : g.productions)
    if (p.rhs->kind == ExpKind::NonTerm)
      unit_edges[p.lhs].insert(p.rhs->name);
  // DFS cycle check over unit edges.
  std::set<std::string> done, active;
  auto dfs = [&](const auto& self, const std::string& a) -> void {
    if (done.count(a)) return;
    if (!active.insert(a).second)
      throw InputError("cyclic pure-nonterminal production chain through '" +
                       a + "'");
    for (const auto& b : unit_edges[a]) self(self, b);
    active.erase(a);
    done.insert(a);
  };
  for (const auto& [a, _] : unit_edges) dfs(dfs, a);

  // Inline until no unit production remains.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Production> next;
    for (const auto& p : g.productions) {
      if (p.rhs->kind != ExpKind::NonTerm) {
        next.push_back(p);
        continue;
      }
      changed = true;
      for (const auto& q : g.productions)
        if (q.lhs == p.rhs->name && q.rhs->kind != ExpKind::NonTerm)
          next.push_back(Production{p.lhs, q.rhs});
      // Unit productions of the referenced nonterminal are handled on the
      // next round (the cycle check above guarantees progress).
      for (const auto& q : g.productions)
        if (q.lhs == p.rhs->name && q.rhs->kind == ExpKind::NonTerm)
          next.push_back(Production{p.lhs, q.rhs});
    }
    // Deduplicate structurally (inlining can create duplicates).
    std::vector<Production> dedup;
    for (const auto& p : next) {
      bool seen = false;
      for (const auto& q : dedup)
        if (q.lhs == p.lhs && structural_equal(q.rhs, p.rhs)) seen = true;
      if (!seen) dedup.push_back(p);
    }
    g.productions = std::move(dedup);
  }

  // Every nonterminal mentioned in a body must be declared.
  for (const auto& p : g.productions)
    for (const Exp* n : subterms(p.rhs))
      if (n->kind == ExpKind::NonTerm && !g.has(n->name))
        throw InputError("unknown nonterminal: " + n->name);
}

inline void collect_names(const Exp* e, std::set<std::string>& out) {
  for (const Exp* n : subterms(e)) {
    if (n->kind == ExpKind::Var || n->kind == ExpKind::NonTerm)
      out.insert(n->name);
    if (n->kind == ExpKind::Lam) out.insert(n->binder);
  }
}

inline std::string fresh_name(const std::string& base,
                              std::set<std::string>& used) {
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (used.insert(candidate).second) return candidate;
  }
}

// Scope-aware renaming of duplicate binders.  `rename` maps an in-scope old
// name to its fresh replacement.  Mutates nodes in place (pre-labeling).
inline void freshen_binders(const Exp* e, bool strict,
                            std::set<std::string>& seen_binders,
                            const std::set<std::string>& grammar_binders,
                            std::set<std::string>& used,
                            std::map<std::string, std::string> rename) {
  switch (e->kind) {
    case ExpKind::Var: {
      auto it = rename.find(e->name);
      if (it != rename.end()) const_cast<Exp*>(e)->name = it->second;
      return;
    }
    case ExpKind::NonTerm:
    case ExpKind::Prim:
      return;
    case ExpKind::Lam: {
      std::string binder = e->binder;
      if (grammar_binders.count(binder))
        throw InputError("binder '" + binder +
                         "' collides with a grammar binder; rename one");
      if (!seen_binders.insert(binder).second) {
        if (strict)
          throw InputError("duplicate binder '" + binder +
                           "' (strict alpha mode)");
        std::string fresh = fresh_name(binder, used);
        const_cast<Exp*>(e)->binder = fresh;
        seen_binders.insert(fresh);
        rename[binder] = fresh;
      } else {
        rename.erase(binder);  // inner binding shadows any outer renaming
      }
      freshen_binders(e->body, strict, seen_binders, grammar_binders, used,
                      rename);
      return;
    }
    case ExpKind::App:
      freshen_binders(e->rator, strict, seen_binders, grammar_binders, used,
                      rename);
      freshen_binders(e->rand, strict, seen_binders, grammar_binders, used,
                      rename);
      return;
    case ExpKind::If:
      freshen_binders(e->cond, strict, seen_binders, grammar_binders, used,
                      rename);
      freshen_binders(e->then_branch, strict, seen_binders, grammar_binders,
                      used, rename);
      freshen_binders(e->else_branch, strict, seen_binders, grammar_binders,
                      used, rename);
      return;
  }
}

// Pre-scan for production left-hand sides (`NAME ::=`) so that forward
// references between productions resolve as nonterminals on the real pass.
inline std::set<std::string> collect_production_names(
    const std::string& text) {
  std::set<std::string> names;
  Lexer lex(text);
  Token prev;
  while (lex.peek().kind != Tok::End) {
    Token t = lex.next();
    if (t.kind == Tok::ProdArrow && prev.kind == Tok::Ident)
      names.insert(prev.text);
    prev = t;
  }
  return names;
}

inline std::set<std::string> grammar_binder_set(const Grammar& g) {
  std::set<std::string> binders;
  std::set<const Exp*> seen;  // inlined unit productions share body nodes
  for (const auto& p : g.productions)
    for (const Exp* n : subterms(p.rhs))
      if (n->kind == ExpKind::Lam && seen.insert(n).second) {
        if (!binders.insert(n->binder).second)
          throw InputError("duplicate binder '" + n->binder +
                           "' inside the grammar; productions bind across "
                           "productions by name, rename one");
      }
  return binders;
}

}  // namespace detail

// Parses a grammar in isolation (no main expression).  The returned
// Program's root is the grammar's first nonterminal.
inline Program parse_grammar(const std::string& text,
                             const ParseOptions& opts = {}) {
  Program prog;
  prog.ast = std::make_shared<Ast>();
  std::set<std::string> forward = detail::collect_production_names(text);
  detail::Parser parser(*prog.ast, text, opts, &forward);
  parser.parse_productions(prog.grammar, /*stop_at_end_keyword=*/false);
  detail::normalize_grammar(prog.grammar);
  detail::grammar_binder_set(prog.grammar);  // duplicate-binder check
  if (prog.grammar.empty())
    throw InputError("grammar input contains no productions");
  // The root of a grammar-only program is its first nonterminal.
  prog.root = prog.ast->nonterm(prog.grammar.productions.front().lhs);
  prog.points = assign_labels(prog.root, prog.grammar);
  return prog;
}

// Parses a program: optional inline `grammar: ... end` header, then one
// expression.  `extra_grammar_text` (e.g. from a --grammar file) contributes
// additional productions, parsed before the program expression so that its
// nonterminals resolve.
inline Program parse_program(const std::string& text,
                             const std::string& extra_grammar_text,
                             const ParseOptions& opts = {}) {
  Program prog;
  prog.ast = std::make_shared<Ast>();

  if (!extra_grammar_text.empty()) {
    std::set<std::string> forward =
        detail::collect_production_names(extra_grammar_text);
    detail::Parser gparser(*prog.ast, extra_grammar_text, opts, &forward);
    gparser.parse_productions(prog.grammar, /*stop_at_end_keyword=*/false);
  }

  std::set<std::string> known;
  for (const auto& n : prog.grammar.nonterminals) known.insert(n);
  for (const auto& n : detail::collect_production_names(text))
    known.insert(n);
  detail::Parser parser(*prog.ast, text, opts, &known);
  parser.try_parse_grammar_block(prog.grammar);

  prog.root = parser.parse_expr();
  parser.expect_end();

  detail::normalize_grammar(prog.grammar);

  std::set<std::string> grammar_binders =
      detail::grammar_binder_set(prog.grammar);
  std::set<std::string> used;
  detail::collect_names(prog.root, used);
  for (const auto& p : prog.grammar.productions)
    detail::collect_names(p.rhs, used);
  std::set<std::string> seen;
  detail::freshen_binders(prog.root, opts.strict_alpha, seen, grammar_binders,
                          used, {});

  prog.points = assign_labels(prog.root, prog.grammar);
  return prog;
}

inline Program parse_program(const std::string& text,
                             const ParseOptions& opts = {}) {
  return parse_program(text, std::string{}, opts);
}

}  // namespace sctlam
