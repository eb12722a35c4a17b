#include "tog/syntax.hpp"

#include <algorithm>

namespace tog::surface {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident, Number,
  KwPostulate, KwDefine, KwMeta, KwCheck,
  KwSet, KwBool, KwNat, KwTrue, KwFalse, KwZero, KwSuc, KwFst, KwSnd,
  KwIf, KwThen, KwElse,
  Colon, Equal, Arrow, Backslash, LParen, RParen, Comma, Star, Slash, Dot,
  End,
};

struct Token {
  Tok tok;
  Pos pos;
  std::string text;
  std::uint64_t num = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  Pos pos;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        pos.line++;
        pos.col = 1;
      } else {
        pos.col++;
      }
    }
    i += n;
  };

  static const std::map<std::string, Tok> keywords = {
      {"postulate", Tok::KwPostulate}, {"define", Tok::KwDefine}, {"meta", Tok::KwMeta},
      {"check", Tok::KwCheck},         {"Set", Tok::KwSet},       {"Bool", Tok::KwBool},
      {"Nat", Tok::KwNat},             {"true", Tok::KwTrue},     {"false", Tok::KwFalse},
      {"zero", Tok::KwZero},           {"suc", Tok::KwSuc},       {"fst", Tok::KwFst},
      {"snd", Tok::KwSnd},             {"if", Tok::KwIf},         {"then", Tok::KwThen},
      {"else", Tok::KwElse},
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Pos start = pos;
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      advance(2);
      out.push_back({Tok::Arrow, start, "->"});
      continue;
    }
    // Unicode aliases for lambda, arrow and product.
    if (text.compare(i, 2, "\xce\xbb") == 0) {  // lambda
      advance(2);
      out.push_back({Tok::Backslash, start, "\\"});
      continue;
    }
    if (text.compare(i, 3, "\xe2\x86\x92") == 0) {  // rightwards arrow
      advance(3);
      out.push_back({Tok::Arrow, start, "->"});
      continue;
    }
    if (text.compare(i, 2, "\xc3\x97") == 0) {  // multiplication sign
      advance(2);
      out.push_back({Tok::Star, start, "*"});
      continue;
    }
    switch (c) {
      case ':': advance(1); out.push_back({Tok::Colon, start, ":"}); continue;
      case '=': advance(1); out.push_back({Tok::Equal, start, "="}); continue;
      case '\\': advance(1); out.push_back({Tok::Backslash, start, "\\"}); continue;
      case '(': advance(1); out.push_back({Tok::LParen, start, "("}); continue;
      case ')': advance(1); out.push_back({Tok::RParen, start, ")"}); continue;
      case ',': advance(1); out.push_back({Tok::Comma, start, ","}); continue;
      case '*': advance(1); out.push_back({Tok::Star, start, "*"}); continue;
      case '/': advance(1); out.push_back({Tok::Slash, start, "/"}); continue;
      case '.': advance(1); out.push_back({Tok::Dot, start, "."}); continue;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      std::string digits = text.substr(i, j - i);
      advance(j - i);
      Token t{Tok::Number, start, digits};
      t.num = std::stoull(digits);
      out.push_back(std::move(t));
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      std::string word = text.substr(i, j - i);
      advance(j - i);
      auto it = keywords.find(word);
      out.push_back({it == keywords.end() ? Tok::Ident : it->second, start, word});
      continue;
    }
    // ?N: a meta-variable by number, as the printer writes them.
    if (c == '?' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t j = i + 1;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      std::string word = text.substr(i, j - i);
      advance(j - i);
      out.push_back({Tok::Ident, start, word});
      continue;
    }
    throw ParseError(start, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, pos, ""});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  SourceFile file() {
    SourceFile out;
    while (peek().tok != Tok::End) out.decls.push_back(decl());
    return out;
  }

  ExprPtr top_expr() {
    ExprPtr e = expr();
    expect(Tok::End, "end of input");
    return e;
  }

 private:
  Decl decl() {
    const Token& t = peek();
    switch (t.tok) {
      case Tok::KwPostulate: {
        next();
        Decl d{Decl::Kind::Postulate, t.pos, ident(), nullptr, nullptr};
        expect(Tok::Colon, "':'");
        d.type = expr();
        return d;
      }
      case Tok::KwDefine: {
        next();
        Decl d{Decl::Kind::Define, t.pos, ident(), nullptr, nullptr};
        expect(Tok::Colon, "':'");
        d.type = expr();
        expect(Tok::Equal, "'='");
        d.body = expr();
        return d;
      }
      case Tok::KwMeta: {
        next();
        Decl d{Decl::Kind::MetaDecl, t.pos, ident(), nullptr, nullptr};
        expect(Tok::Colon, "':'");
        d.type = expr();
        return d;
      }
      case Tok::KwCheck: {
        next();
        Decl d{Decl::Kind::Check, t.pos, "", nullptr, nullptr};
        d.body = expr();
        expect(Tok::Colon, "':'");
        d.type = expr();
        return d;
      }
      default:
        throw ParseError(t.pos, "expected a declaration (postulate, define, meta, check)");
    }
  }

  ExprPtr expr() {
    const Token& t = peek();
    if (t.tok == Tok::Backslash) {
      next();
      std::vector<std::pair<std::string, Pos>> binders;
      while (peek().tok == Tok::Ident) {
        binders.emplace_back(peek().text, peek().pos);
        next();
      }
      if (binders.empty()) throw ParseError(peek().pos, "expected a binder after '\\'");
      expect(Tok::Arrow, "'->'");
      ExprPtr body = expr();
      for (std::size_t i = binders.size(); i-- > 0;) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Lam;
        e->pos = binders[i].second;
        e->name = binders[i].first;
        e->sub = {body};
        body = std::move(e);
      }
      return body;
    }
    if (t.tok == Tok::KwIf) return if_expr();
    // Dependent function type: "(" IDENT ":" commits to a Pi binder.
    if (t.tok == Tok::LParen && peek(1).tok == Tok::Ident && peek(2).tok == Tok::Colon) {
      next();
      std::string name = ident();
      expect(Tok::Colon, "':'");
      ExprPtr domain = expr();
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      ExprPtr codomain = expr();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Pi;
      e->pos = t.pos;
      e->name = std::move(name);
      e->sub = {std::move(domain), std::move(codomain)};
      return e;
    }
    ExprPtr left = prod();
    if (peek().tok == Tok::Arrow) {
      next();
      ExprPtr right = expr();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Arrow;
      e->pos = t.pos;
      e->sub = {std::move(left), std::move(right)};
      return e;
    }
    return left;
  }

  ExprPtr if_expr() {
    Pos pos = peek().pos;
    expect(Tok::KwIf, "'if'");
    ExprPtr scrutinee = app();
    expect(Tok::Slash, "'/'");
    std::string binder = ident();
    expect(Tok::Dot, "'.'");
    ExprPtr motive = expr();
    expect(Tok::KwThen, "'then'");
    ExprPtr then_branch = expr();
    expect(Tok::KwElse, "'else'");
    ExprPtr else_branch = expr();
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::If;
    e->pos = pos;
    e->name = std::move(binder);
    e->sub = {std::move(scrutinee), std::move(motive), std::move(then_branch),
              std::move(else_branch)};
    return e;
  }

  ExprPtr prod() {
    Pos pos = peek().pos;
    ExprPtr left = app();
    if (peek().tok == Tok::Star) {
      next();
      ExprPtr right = prod();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Prod;
      e->pos = pos;
      e->sub = {std::move(left), std::move(right)};
      return e;
    }
    return left;
  }

  bool atom_start(Tok t) const {
    switch (t) {
      case Tok::Ident:
      case Tok::Number:
      case Tok::KwSet:
      case Tok::KwBool:
      case Tok::KwNat:
      case Tok::KwTrue:
      case Tok::KwFalse:
      case Tok::KwZero:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  ExprPtr app() {
    ExprPtr head = prefix_or_atom();
    while (atom_start(peek().tok)) {
      ExprPtr arg = atom();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::App;
      e->pos = head->pos;
      e->sub = {std::move(head), std::move(arg)};
      head = std::move(e);
    }
    return head;
  }

  ExprPtr prefix_or_atom() {
    const Token& t = peek();
    Expr::Kind kind;
    switch (t.tok) {
      case Tok::KwSuc: kind = Expr::Kind::Suc; break;
      case Tok::KwFst: kind = Expr::Kind::Fst; break;
      case Tok::KwSnd: kind = Expr::Kind::Snd; break;
      default:
        return atom();
    }
    next();
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->pos = t.pos;
    e->sub = {atom()};
    return e;
  }

  ExprPtr atom() {
    const Token& t = peek();
    auto simple = [&](Expr::Kind k) {
      next();
      auto e = std::make_shared<Expr>();
      e->kind = k;
      e->pos = t.pos;
      return e;
    };
    switch (t.tok) {
      case Tok::KwSet: return simple(Expr::Kind::Set);
      case Tok::KwBool: return simple(Expr::Kind::Bool);
      case Tok::KwNat: return simple(Expr::Kind::Nat);
      case Tok::KwTrue: return simple(Expr::Kind::True);
      case Tok::KwFalse: return simple(Expr::Kind::False);
      case Tok::KwZero: return simple(Expr::Kind::Zero);
      case Tok::Number: {
        next();
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Num;
        e->pos = t.pos;
        e->num = t.num;
        return e;
      }
      case Tok::Ident: {
        next();
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Ident;
        e->pos = t.pos;
        e->name = t.text;
        return e;
      }
      case Tok::LParen: {
        next();
        ExprPtr inner = expr();
        if (peek().tok == Tok::Comma) {
          next();
          ExprPtr second = expr();
          expect(Tok::RParen, "')'");
          auto e = std::make_shared<Expr>();
          e->kind = Expr::Kind::Pair;
          e->pos = t.pos;
          e->sub = {std::move(inner), std::move(second)};
          return e;
        }
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        throw ParseError(t.pos, "expected a term, found '" + t.text + "'");
    }
  }

  std::string ident() {
    const Token& t = peek();
    if (t.tok != Tok::Ident) throw ParseError(t.pos, "expected an identifier");
    next();
    return t.text;
  }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  void next() { ++pos_; }
  void expect(Tok tok, const std::string& what) {
    if (peek().tok != tok)
      throw ParseError(peek().pos, "expected " + what + ", found '" + peek().text + "'");
    next();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SourceFile parse(const std::string& text) { return Parser(lex(text)).file(); }

ExprPtr parse_expr(const std::string& text) { return Parser(lex(text)).top_expr(); }

// ---------------------------------------------------------------------------
// Scope checking

namespace {

Term scope_rec(const ExprPtr& e, const DefEnv& defs, const std::map<std::string, MetaId>& metas,
               std::vector<std::string>& locals);

/// Appends an elimination to a scope-checked target, insisting the target is
/// neutral: the grammar's redex forms fall outside the beta-normal fragment.
Term append_elim(const ExprPtr& at, const Term& target, Elim elim, const char* what) {
  if (!target.is_neutral())
    throw ParseError(at->pos, std::string(what) +
                                  " of a canonical term is a redex; terms must be beta-normal");
  std::vector<Elim> elims = target.elims();
  elims.push_back(std::move(elim));
  return Term::neutral(target.head(), std::move(elims));
}

Term scope_rec(const ExprPtr& e, const DefEnv& defs, const std::map<std::string, MetaId>& metas,
               std::vector<std::string>& locals) {
  switch (e->kind) {
    case Expr::Kind::Set: return Term::set();
    case Expr::Kind::Bool: return Term::boolean();
    case Expr::Kind::Nat: return Term::nat();
    case Expr::Kind::True: return Term::true_();
    case Expr::Kind::False: return Term::false_();
    case Expr::Kind::Zero: return Term::zero();
    case Expr::Kind::Num: {
      Term t = Term::zero();
      for (std::uint64_t i = 0; i < e->num; ++i) t = Term::suc(std::move(t));
      return t;
    }
    case Expr::Kind::Ident: {
      // Innermost binder first, then declared metas, then global definitions.
      for (std::size_t i = locals.size(); i-- > 0;) {
        if (locals[i] == e->name)
          return Term::var(static_cast<std::uint32_t>(locals.size() - 1 - i));
      }
      if (auto it = metas.find(e->name); it != metas.end()) return Term::meta(it->second);
      if (defs.contains(e->name)) return Term::def(e->name);
      if (e->name.size() > 1 && e->name[0] == '?')
        return Term::meta(static_cast<MetaId>(std::stoul(e->name.substr(1))));
      throw ParseError(e->pos, "identifier '" + e->name + "' is not in scope");
    }
    case Expr::Kind::App: {
      Term fn = scope_rec(e->sub[0], defs, metas, locals);
      Term arg = scope_rec(e->sub[1], defs, metas, locals);
      return append_elim(e, fn, Elim::app(std::move(arg)), "application");
    }
    case Expr::Kind::Lam: {
      locals.push_back(e->name);
      Term body = scope_rec(e->sub[0], defs, metas, locals);
      locals.pop_back();
      return Term::lam(std::move(body), e->name);
    }
    case Expr::Kind::Pi: {
      Term domain = scope_rec(e->sub[0], defs, metas, locals);
      locals.push_back(e->name);
      Term codomain = scope_rec(e->sub[1], defs, metas, locals);
      locals.pop_back();
      return Term::pi(std::move(domain), std::move(codomain), e->name);
    }
    case Expr::Kind::Arrow: {
      Term domain = scope_rec(e->sub[0], defs, metas, locals);
      Term codomain = scope_rec(e->sub[1], defs, metas, locals);
      return Term::pi(std::move(domain), shift(codomain, 1), "_");
    }
    case Expr::Kind::Prod: {
      Term left = scope_rec(e->sub[0], defs, metas, locals);
      Term right = scope_rec(e->sub[1], defs, metas, locals);
      return Term::prod(std::move(left), std::move(right));
    }
    case Expr::Kind::Pair: {
      Term first = scope_rec(e->sub[0], defs, metas, locals);
      Term second = scope_rec(e->sub[1], defs, metas, locals);
      return Term::pair(std::move(first), std::move(second));
    }
    case Expr::Kind::If: {
      Term scrutinee = scope_rec(e->sub[0], defs, metas, locals);
      locals.push_back(e->name);
      Term motive = scope_rec(e->sub[1], defs, metas, locals);
      locals.pop_back();
      Term then_branch = scope_rec(e->sub[2], defs, metas, locals);
      Term else_branch = scope_rec(e->sub[3], defs, metas, locals);
      return append_elim(
          e, scrutinee,
          Elim::if_then_else(std::move(motive), std::move(then_branch), std::move(else_branch),
                             e->name),
          "if-elimination");
    }
    case Expr::Kind::Suc:
      return Term::suc(scope_rec(e->sub[0], defs, metas, locals));
    case Expr::Kind::Fst:
      return append_elim(e, scope_rec(e->sub[0], defs, metas, locals), Elim::fst(), "projection");
    case Expr::Kind::Snd:
      return append_elim(e, scope_rec(e->sub[0], defs, metas, locals), Elim::snd(), "projection");
  }
  throw InternalError("unreachable surface expression kind");
}

}  // namespace

Term scope_expr(const ExprPtr& expr, const DefEnv& defs, const std::map<std::string, MetaId>& metas,
                std::vector<std::string> locals) {
  return scope_rec(expr, defs, metas, locals);
}

}  // namespace tog::surface
