#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tog/term.hpp"

// Surface syntax: lexer, parser and scope checker for `.tog` files.
//
//   file  ::= decl*
//   decl  ::= "postulate" IDENT ":" expr
//           | "define" IDENT ":" expr "=" expr
//           | "meta" IDENT ":" expr
//           | "check" expr ":" expr
//   expr  ::= "\" IDENT+ "->" expr
//           | "if" app "/" IDENT "." expr "then" expr "else" expr
//           | "(" IDENT ":" expr ")" "->" expr
//           | prod ("->" expr)?
//   prod  ::= app ("*" prod)?
//   app   ::= head atom*
//   head  ::= ("suc" | "fst" | "snd") atom | atom
//   atom  ::= "Set" | "Bool" | "Nat" | "true" | "false" | "zero" | NUMBER
//           | IDENT | "(" expr ")" | "(" expr "," expr ")"
//
// Application is left-associative, "->" and "*" right-associative, numerals
// desugar to suc-towers, "--" starts a line comment.  The Unicode spellings
// of lambda, arrow and product are accepted as aliases.  The grammar only
// produces beta-normal terms; the scope checker rejects the residual redex
// forms (applying a lambda, projecting a pair literal, and so on).

namespace tog::surface {

struct Pos {
  int line = 1;
  int col = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(Pos pos, const std::string& msg)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg),
        pos(pos) {}
  Pos pos;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Set, Bool, Nat, True, False, Zero,
    Num,     // numeral literal
    Ident,
    App,     // sub: fn, arg
    Lam,     // name; sub: body
    Pi,      // name; sub: domain, codomain
    Arrow,   // sub: domain, codomain (non-dependent sugar)
    Prod,    // sub: left, right
    Pair,    // sub: first, second
    If,      // name (motive binder); sub: scrutinee, motive, then, else
    Suc,     // sub: argument
    Fst,     // sub: argument
    Snd,     // sub: argument
  };
  Kind kind;
  Pos pos;
  std::string name;
  std::uint64_t num = 0;
  std::vector<ExprPtr> sub;
};

struct Decl {
  enum class Kind { Postulate, Define, MetaDecl, Check };
  Kind kind;
  Pos pos;
  std::string name;  // Postulate / Define / MetaDecl
  ExprPtr type;
  ExprPtr body;      // Define body; Check term
};

struct SourceFile {
  std::vector<Decl> decls;
};

/// Parses a whole file; throws ParseError with a position on bad input.
SourceFile parse(const std::string& text);

/// Parses a single expression (used by tests and the round-trip property).
ExprPtr parse_expr(const std::string& text);

/// Resolves names to de Bruijn indices, definition heads and declared metas.
/// `locals` is the binder stack, innermost last.  Throws ParseError for
/// unresolved identifiers and for redex forms outside the beta-normal
/// fragment.
Term scope_expr(const ExprPtr& expr, const DefEnv& defs,
                const std::map<std::string, MetaId>& metas, std::vector<std::string> locals = {});

}  // namespace tog::surface
