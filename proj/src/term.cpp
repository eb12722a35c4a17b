#include "tog/term.hpp"

#include <algorithm>

namespace tog {

bool Head::operator==(const Head& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case HeadKind::Var: return var == other.var;
    case HeadKind::Meta: return meta == other.meta;
    case HeadKind::Def: return def == other.def;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Representations

struct Term::Rep {
  Kind kind;
  std::string hint;        // Pi / Lam binder
  std::vector<Term> sub;   // Suc:[t] Pi:[dom,cod] Lam:[body] Prod:[l,r] Pair:[a,b]
  Head head;               // Neutral
  std::vector<Elim> elims; // Neutral
};

struct Elim::Rep {
  Kind kind;
  std::string hint;       // If motive binder
  std::vector<Term> sub;  // App:[arg] If:[motive,then,else]
};

Term Term::set() {
  static const Term t = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Set;
    return Term(std::move(rep));
  }();
  return t;
}

Term Term::boolean() {
  static const Term t = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Bool;
    return Term(std::move(rep));
  }();
  return t;
}

Term Term::true_() {
  static const Term t = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::True;
    return Term(std::move(rep));
  }();
  return t;
}

Term Term::false_() {
  static const Term t = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::False;
    return Term(std::move(rep));
  }();
  return t;
}

Term Term::nat() {
  static const Term t = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Nat;
    return Term(std::move(rep));
  }();
  return t;
}

Term Term::zero() {
  static const Term t = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Zero;
    return Term(std::move(rep));
  }();
  return t;
}

Term Term::suc(Term t) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::Suc;
  rep->sub = {std::move(t)};
  return Term(std::move(rep));
}

Term Term::pi(Term domain, Term codomain, std::string hint) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::Pi;
  rep->hint = std::move(hint);
  rep->sub = {std::move(domain), std::move(codomain)};
  return Term(std::move(rep));
}

Term Term::lam(Term body, std::string hint) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::Lam;
  rep->hint = std::move(hint);
  rep->sub = {std::move(body)};
  return Term(std::move(rep));
}

Term Term::prod(Term left, Term right) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::Prod;
  rep->sub = {std::move(left), std::move(right)};
  return Term(std::move(rep));
}

Term Term::pair(Term first, Term second) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::Pair;
  rep->sub = {std::move(first), std::move(second)};
  return Term(std::move(rep));
}

Term Term::neutral(Head head, std::vector<Elim> elims) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::Neutral;
  rep->head = std::move(head);
  rep->elims = std::move(elims);
  return Term(std::move(rep));
}

Term Term::var(std::uint32_t index) { return neutral(Head::mk_var(index)); }
Term Term::meta(MetaId id) { return neutral(Head::mk_meta(id)); }
Term Term::def(std::string name) { return neutral(Head::mk_def(std::move(name))); }

Term::Kind Term::kind() const { return rep_->kind; }

namespace {
void require(bool cond, const char* what) {
  if (!cond) throw InternalError(std::string("term accessor misuse: ") + what);
}
}  // namespace

const Term& Term::domain() const {
  require(kind() == Kind::Pi, "domain of non-Pi");
  return rep_->sub[0];
}
const Term& Term::codomain() const {
  require(kind() == Kind::Pi, "codomain of non-Pi");
  return rep_->sub[1];
}
const Term& Term::body() const {
  require(kind() == Kind::Lam, "body of non-Lam");
  return rep_->sub[0];
}
const Term& Term::suc_arg() const {
  require(kind() == Kind::Suc, "suc_arg of non-Suc");
  return rep_->sub[0];
}
const Term& Term::left() const {
  require(kind() == Kind::Prod, "left of non-Prod");
  return rep_->sub[0];
}
const Term& Term::right() const {
  require(kind() == Kind::Prod, "right of non-Prod");
  return rep_->sub[1];
}
const Term& Term::first() const {
  require(kind() == Kind::Pair, "first of non-Pair");
  return rep_->sub[0];
}
const Term& Term::second() const {
  require(kind() == Kind::Pair, "second of non-Pair");
  return rep_->sub[1];
}
const Head& Term::head() const {
  require(kind() == Kind::Neutral, "head of non-neutral");
  return rep_->head;
}
const std::vector<Elim>& Term::elims() const {
  require(kind() == Kind::Neutral, "elims of non-neutral");
  return rep_->elims;
}
const std::string& Term::hint() const { return rep_->hint; }

bool Term::operator==(const Term& other) const {
  if (rep_ == other.rep_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::Set:
    case Kind::Bool:
    case Kind::True:
    case Kind::False:
    case Kind::Nat:
    case Kind::Zero:
      return true;
    case Kind::Suc:
    case Kind::Pi:
    case Kind::Lam:
    case Kind::Prod:
    case Kind::Pair:
      return rep_->sub == other.rep_->sub;
    case Kind::Neutral:
      return rep_->head == other.rep_->head && rep_->elims == other.rep_->elims;
  }
  return false;
}

Elim Elim::app(Term argument) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::App;
  rep->sub = {std::move(argument)};
  return Elim(std::move(rep));
}

Elim Elim::if_then_else(Term motive, Term then_branch, Term else_branch, std::string hint) {
  auto rep = std::make_shared<Rep>();
  rep->kind = Kind::If;
  rep->hint = std::move(hint);
  rep->sub = {std::move(motive), std::move(then_branch), std::move(else_branch)};
  return Elim(std::move(rep));
}

Elim Elim::fst() {
  static const Elim e = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Fst;
    return Elim(std::move(rep));
  }();
  return e;
}

Elim Elim::snd() {
  static const Elim e = [] {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Snd;
    return Elim(std::move(rep));
  }();
  return e;
}

Elim::Kind Elim::kind() const { return rep_->kind; }

const Term& Elim::argument() const {
  require(kind() == Kind::App, "argument of non-App elim");
  return rep_->sub[0];
}
const Term& Elim::motive() const {
  require(kind() == Kind::If, "motive of non-If elim");
  return rep_->sub[0];
}
const Term& Elim::then_branch() const {
  require(kind() == Kind::If, "then_branch of non-If elim");
  return rep_->sub[1];
}
const Term& Elim::else_branch() const {
  require(kind() == Kind::If, "else_branch of non-If elim");
  return rep_->sub[2];
}
const std::string& Elim::hint() const { return rep_->hint; }

bool Elim::operator==(const Elim& other) const {
  if (rep_ == other.rep_) return true;
  if (kind() != other.kind()) return false;
  return rep_->sub == other.rep_->sub;
}

// ---------------------------------------------------------------------------
// Contexts

void Context::push(std::string name, Term type) {
  entries_.push_back(Entry{std::move(name), std::move(type)});
}

Context Context::extended(std::string name, Term type) const {
  Context out = *this;
  out.push(std::move(name), std::move(type));
  return out;
}

Term lookup_var(const Context& ctx, std::uint32_t index) {
  if (index >= ctx.size())
    throw ScopeError("variable index " + std::to_string(index) + " out of scope in context of size " +
                     std::to_string(ctx.size()));
  // Index 0 is the innermost entry; its stored type lives in the prefix and
  // has to be weakened past everything bound since (including itself).
  const std::size_t position = ctx.size() - 1 - index;
  return shift(ctx[position].type, index + 1);
}

// ---------------------------------------------------------------------------
// Signatures

const Term& Signature::type_of(MetaId id) const {
  if (!contains(id)) throw ScopeError("meta-variable ?" + std::to_string(id) + " not in signature");
  return types_[id];
}

MetaId Signature::extend(Term closed_type) {
  MetaId id = static_cast<MetaId>(types_.size());
  note_open(id, closed_type);
  types_.push_back(std::move(closed_type));
  return id;
}

void Signature::update_type(MetaId id, Term type) {
  if (!contains(id)) throw ScopeError("meta-variable ?" + std::to_string(id) + " not in signature");
  note_open(id, type);
  types_[id] = std::move(type);
}

void Signature::note_open(MetaId id, const Term& type) {
  std::vector<MetaId> metas;
  collect_metas(type, metas);
  if (metas.empty()) {
    open_entries_.erase(id);
  } else {
    open_entries_.insert(id);
  }
}

std::pair<Signature, MetaId> extend_signature(const Signature& sig, Term closed_type) {
  Signature out = sig;
  MetaId id = out.extend(std::move(closed_type));
  return {std::move(out), id};
}

// ---------------------------------------------------------------------------
// Meta substitutions

const Term* MetaSubst::lookup(MetaId id) const {
  auto it = map_.find(id);
  return it == map_.end() ? nullptr : &it->second;
}

void MetaSubst::bind(MetaId id, Term closed_term) {
  map_.insert_or_assign(id, std::move(closed_term));
}

// ---------------------------------------------------------------------------
// Definitions

bool DefEnv::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

const Definition& DefEnv::lookup(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return e.second;
  throw ScopeError("definition '" + name + "' not found");
}

void DefEnv::add(const std::string& name, Definition def) {
  if (contains(name)) throw InternalError("duplicate definition '" + name + "'");
  entries_.emplace_back(name, std::move(def));
}

void DefEnv::replace(const std::string& name, Definition def) {
  for (auto& e : entries_) {
    if (e.first == name) {
      e.second = std::move(def);
      return;
    }
  }
  throw ScopeError("definition '" + name + "' not found");
}

// ---------------------------------------------------------------------------
// Structural queries

std::size_t term_size(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return 1;
    case Term::Kind::Suc:
      return 1 + term_size(t.suc_arg());
    case Term::Kind::Pi:
      return 1 + term_size(t.domain()) + term_size(t.codomain());
    case Term::Kind::Lam:
      return 1 + term_size(t.body());
    case Term::Kind::Prod:
      return 1 + term_size(t.left()) + term_size(t.right());
    case Term::Kind::Pair:
      return 1 + term_size(t.first()) + term_size(t.second());
    case Term::Kind::Neutral: {
      std::size_t n = 1;  // head
      for (const Elim& e : t.elims()) {
        switch (e.kind()) {
          case Elim::Kind::App:
            n += 1 + term_size(e.argument());
            break;
          case Elim::Kind::If:
            n += 1 + term_size(e.motive()) + term_size(e.then_branch()) + term_size(e.else_branch());
            break;
          case Elim::Kind::Fst:
          case Elim::Kind::Snd:
            n += 1;
            break;
        }
      }
      return n;
    }
  }
  return 1;
}

namespace {

Elim shift_elim(const Elim& e, std::uint32_t by, std::uint32_t cutoff) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(shift(e.argument(), by, cutoff));
    case Elim::Kind::If:
      return Elim::if_then_else(shift(e.motive(), by, cutoff + 1), shift(e.then_branch(), by, cutoff),
                                shift(e.else_branch(), by, cutoff), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable elim kind");
}

}  // namespace

Term shift(const Term& t, std::uint32_t by, std::uint32_t cutoff) {
  if (by == 0) return t;
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return t;
    case Term::Kind::Suc:
      return Term::suc(shift(t.suc_arg(), by, cutoff));
    case Term::Kind::Pi:
      return Term::pi(shift(t.domain(), by, cutoff), shift(t.codomain(), by, cutoff + 1), t.hint());
    case Term::Kind::Lam:
      return Term::lam(shift(t.body(), by, cutoff + 1), t.hint());
    case Term::Kind::Prod:
      return Term::prod(shift(t.left(), by, cutoff), shift(t.right(), by, cutoff));
    case Term::Kind::Pair:
      return Term::pair(shift(t.first(), by, cutoff), shift(t.second(), by, cutoff));
    case Term::Kind::Neutral: {
      Head h = t.head();
      if (h.kind == HeadKind::Var && h.var >= cutoff) h.var += by;
      std::vector<Elim> elims;
      elims.reserve(t.elims().size());
      for (const Elim& e : t.elims()) elims.push_back(shift_elim(e, by, cutoff));
      return Term::neutral(std::move(h), std::move(elims));
    }
  }
  throw InternalError("unreachable term kind");
}

namespace {

bool scoped_elim(const Elim& e, std::uint32_t depth) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return scoped_under(e.argument(), depth);
    case Elim::Kind::If:
      return scoped_under(e.motive(), depth + 1) && scoped_under(e.then_branch(), depth) &&
             scoped_under(e.else_branch(), depth);
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return true;
  }
  return false;
}

}  // namespace

bool scoped_under(const Term& t, std::uint32_t depth) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return true;
    case Term::Kind::Suc:
      return scoped_under(t.suc_arg(), depth);
    case Term::Kind::Pi:
      return scoped_under(t.domain(), depth) && scoped_under(t.codomain(), depth + 1);
    case Term::Kind::Lam:
      return scoped_under(t.body(), depth + 1);
    case Term::Kind::Prod:
      return scoped_under(t.left(), depth) && scoped_under(t.right(), depth);
    case Term::Kind::Pair:
      return scoped_under(t.first(), depth) && scoped_under(t.second(), depth);
    case Term::Kind::Neutral: {
      if (t.head().kind == HeadKind::Var && t.head().var >= depth) return false;
      for (const Elim& e : t.elims())
        if (!scoped_elim(e, depth)) return false;
      return true;
    }
  }
  return false;
}

bool is_closed(const Term& t) { return scoped_under(t, 0); }

namespace {

void collect_metas_elim(const Elim& e, std::vector<MetaId>& out) {
  switch (e.kind()) {
    case Elim::Kind::App:
      collect_metas(e.argument(), out);
      break;
    case Elim::Kind::If:
      collect_metas(e.motive(), out);
      collect_metas(e.then_branch(), out);
      collect_metas(e.else_branch(), out);
      break;
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      break;
  }
}

}  // namespace

void collect_metas(const Term& t, std::vector<MetaId>& out) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return;
    case Term::Kind::Suc:
      collect_metas(t.suc_arg(), out);
      return;
    case Term::Kind::Pi:
      collect_metas(t.domain(), out);
      collect_metas(t.codomain(), out);
      return;
    case Term::Kind::Lam:
      collect_metas(t.body(), out);
      return;
    case Term::Kind::Prod:
      collect_metas(t.left(), out);
      collect_metas(t.right(), out);
      return;
    case Term::Kind::Pair:
      collect_metas(t.first(), out);
      collect_metas(t.second(), out);
      return;
    case Term::Kind::Neutral:
      if (t.head().kind == HeadKind::Meta) out.push_back(t.head().meta);
      for (const Elim& e : t.elims()) collect_metas_elim(e, out);
      return;
  }
}

bool mentions_meta(const Term& t, MetaId id) {
  std::vector<MetaId> ms;
  collect_metas(t, ms);
  return std::find(ms.begin(), ms.end(), id) != ms.end();
}

bool is_beta_normal(const Term& t, std::uint32_t depth) {
  // The canonical/neutral split makes redexes unrepresentable, so the scan
  // reduces to scoping plus walking every node through the checked accessors.
  return scoped_under(t, depth);
}

Term telescope(const Context& ctx, const Term& target) {
  Term out = target;
  for (std::size_t i = ctx.size(); i-- > 0;) {
    out = Term::pi(ctx[i].type, out, ctx[i].name);
  }
  return out;
}

Term apply_to_context_vars(Head head, const Context& ctx) {
  std::vector<Elim> elims;
  elims.reserve(ctx.size());
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    // Outermost variable first: with n entries that is index n-1.
    elims.push_back(Elim::app(Term::var(static_cast<std::uint32_t>(ctx.size() - 1 - i))));
  }
  return Term::neutral(std::move(head), std::move(elims));
}

}  // namespace tog
