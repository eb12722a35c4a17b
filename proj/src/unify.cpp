#include "tog/unify.hpp"

#include <algorithm>
#include <iostream>

#include "tog/normalize.hpp"
#include "tog/print.hpp"

namespace tog {

namespace {

std::string print_eq(const HomogeneousEq& eq) {
  return print_context(eq.ctx) + " |- " + print_term(eq.lhs, eq.ctx) + " = " +
         print_term(eq.rhs, eq.ctx) + " : " + print_term(eq.type, eq.ctx);
}

std::string print_meta_set(const std::set<MetaId>& metas) {
  std::string out = "{";
  bool first = true;
  for (MetaId m : metas) {
    if (!first) out += ", ";
    first = false;
    out += meta_name(m);
  }
  return out + "}";
}

/// Meta-headed neutral whose spine is applications only.
struct FlexView {
  MetaId meta;
  std::vector<Term> args;
};

std::optional<FlexView> flex_view(const Term& t) {
  if (!t.is_neutral() || t.head().kind != HeadKind::Meta) return std::nullopt;
  FlexView v{t.head().meta, {}};
  for (const Elim& e : t.elims()) {
    if (e.kind() != Elim::Kind::App) return std::nullopt;
    v.args.push_back(e.argument());
  }
  return v;
}

bool meta_headed(const Term& t) {
  return t.is_neutral() && t.head().kind == HeadKind::Meta;
}

/// Spine of pairwise-distinct bound variables (the Miller fragment).
std::optional<std::vector<std::uint32_t>> pattern_spine(const FlexView& v) {
  std::vector<std::uint32_t> vars;
  vars.reserve(v.args.size());
  for (const Term& a : v.args) {
    if (!a.is_neutral() || a.head().kind != HeadKind::Var || !a.elims().empty())
      return std::nullopt;
    std::uint32_t idx = a.head().var;
    if (std::find(vars.begin(), vars.end(), idx) != vars.end()) return std::nullopt;
    vars.push_back(idx);
  }
  return vars;
}

/// Deep normalisation: whnf at every node.  Used before the occurs and scope
/// checks so that definition unfoldings cannot hide or fabricate occurrences.
Term normalize_deep(const Signature& sig, const DefEnv& defs, const Term& t);

Elim normalize_deep_elim(const Signature& sig, const DefEnv& defs, const Elim& e) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(normalize_deep(sig, defs, e.argument()));
    case Elim::Kind::If:
      return Elim::if_then_else(normalize_deep(sig, defs, e.motive()),
                                normalize_deep(sig, defs, e.then_branch()),
                                normalize_deep(sig, defs, e.else_branch()), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable elim kind");
}

Term normalize_deep(const Signature& sig, const DefEnv& defs, const Term& t) {
  Term w = whnf(sig, defs, t).term;
  switch (w.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return w;
    case Term::Kind::Suc:
      return Term::suc(normalize_deep(sig, defs, w.suc_arg()));
    case Term::Kind::Pi:
      return Term::pi(normalize_deep(sig, defs, w.domain()), normalize_deep(sig, defs, w.codomain()),
                      w.hint());
    case Term::Kind::Lam:
      return Term::lam(normalize_deep(sig, defs, w.body()), w.hint());
    case Term::Kind::Prod:
      return Term::prod(normalize_deep(sig, defs, w.left()), normalize_deep(sig, defs, w.right()));
    case Term::Kind::Pair:
      return Term::pair(normalize_deep(sig, defs, w.first()), normalize_deep(sig, defs, w.second()));
    case Term::Kind::Neutral: {
      std::vector<Elim> elims;
      elims.reserve(w.elims().size());
      for (const Elim& e : w.elims()) elims.push_back(normalize_deep_elim(sig, defs, e));
      return Term::neutral(w.head(), std::move(elims));
    }
  }
  throw InternalError("unreachable term kind");
}

/// Occurrence of `id` outside every meta-headed spine argument.  Rigid
/// occurrences survive any further instantiation.
bool occurs_rigidly(const Term& t, MetaId id);
bool occurs_at_all(const Term& t, MetaId id) { return mentions_meta(t, id); }

bool occurs_rigidly_elim(const Elim& e, MetaId id) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return occurs_rigidly(e.argument(), id);
    case Elim::Kind::If:
      return occurs_rigidly(e.motive(), id) || occurs_rigidly(e.then_branch(), id) ||
             occurs_rigidly(e.else_branch(), id);
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return false;
  }
  return false;
}

bool occurs_rigidly(const Term& t, MetaId id) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return false;
    case Term::Kind::Suc:
      return occurs_rigidly(t.suc_arg(), id);
    case Term::Kind::Pi:
      return occurs_rigidly(t.domain(), id) || occurs_rigidly(t.codomain(), id);
    case Term::Kind::Lam:
      return occurs_rigidly(t.body(), id);
    case Term::Kind::Prod:
      return occurs_rigidly(t.left(), id) || occurs_rigidly(t.right(), id);
    case Term::Kind::Pair:
      return occurs_rigidly(t.first(), id) || occurs_rigidly(t.second(), id);
    case Term::Kind::Neutral: {
      if (t.head().kind == HeadKind::Meta) {
        // Occurrences inside another meta's spine are flexible: instantiating
        // that meta may drop them.
        return t.head().meta == id;
      }
      for (const Elim& e : t.elims())
        if (occurs_rigidly_elim(e, id)) return true;
      return false;
    }
  }
  return false;
}

struct ScopeViolation {};

/// Rewrites the free variables of `t` (spine variables of the pattern) to the
/// corresponding lambda binders of the instantiation.  Throws ScopeViolation
/// on any other free variable.
Term abstract_free_vars(const Term& t, const std::vector<std::uint32_t>& spine,
                        std::uint32_t depth);

Elim abstract_free_vars_elim(const Elim& e, const std::vector<std::uint32_t>& spine,
                             std::uint32_t depth) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(abstract_free_vars(e.argument(), spine, depth));
    case Elim::Kind::If:
      return Elim::if_then_else(abstract_free_vars(e.motive(), spine, depth + 1),
                                abstract_free_vars(e.then_branch(), spine, depth),
                                abstract_free_vars(e.else_branch(), spine, depth), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable elim kind");
}

Term abstract_free_vars(const Term& t, const std::vector<std::uint32_t>& spine,
                        std::uint32_t depth) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return t;
    case Term::Kind::Suc:
      return Term::suc(abstract_free_vars(t.suc_arg(), spine, depth));
    case Term::Kind::Pi:
      return Term::pi(abstract_free_vars(t.domain(), spine, depth),
                      abstract_free_vars(t.codomain(), spine, depth + 1), t.hint());
    case Term::Kind::Lam:
      return Term::lam(abstract_free_vars(t.body(), spine, depth + 1), t.hint());
    case Term::Kind::Prod:
      return Term::prod(abstract_free_vars(t.left(), spine, depth),
                        abstract_free_vars(t.right(), spine, depth));
    case Term::Kind::Pair:
      return Term::pair(abstract_free_vars(t.first(), spine, depth),
                        abstract_free_vars(t.second(), spine, depth));
    case Term::Kind::Neutral: {
      Head h = t.head();
      if (h.kind == HeadKind::Var && h.var >= depth) {
        std::uint32_t free_index = h.var - depth;
        auto it = std::find(spine.begin(), spine.end(), free_index);
        if (it == spine.end()) throw ScopeViolation{};
        std::size_t position = static_cast<std::size_t>(it - spine.begin());
        // Spine position p (outermost lambda first) binds index k-1-p.
        h.var = static_cast<std::uint32_t>(spine.size() - 1 - position) + depth;
      }
      std::vector<Elim> elims;
      elims.reserve(t.elims().size());
      for (const Elim& e : t.elims()) elims.push_back(abstract_free_vars_elim(e, spine, depth));
      return Term::neutral(std::move(h), std::move(elims));
    }
  }
  throw InternalError("unreachable term kind");
}

}  // namespace

std::pair<HomogeneousEq, HomogeneousEq> split(const Constraint& c, EqId first_id) {
  HomogeneousEq type_eq;
  type_eq.id = first_id;
  type_eq.ctx = c.ctx;
  type_eq.lhs = c.lhs_type;
  type_eq.rhs = c.rhs_type;
  type_eq.type = Term::set();

  HomogeneousEq term_eq;
  term_eq.id = first_id + 1;
  term_eq.ctx = c.ctx;
  term_eq.lhs = c.lhs_term;
  term_eq.rhs = c.rhs_term;
  term_eq.type = c.lhs_type;
  term_eq.guard = first_id;

  return {std::move(type_eq), std::move(term_eq)};
}

// ---------------------------------------------------------------------------
// Store

class ConstraintStore {
 public:
  enum class State : std::uint8_t { Queued, Parked, Sleeping, Latent, Solved };

  struct Entry {
    HomogeneousEq eq;
    State state = State::Queued;
    std::optional<EqId> parent;
    std::uint32_t pending_children = 0;
    std::vector<EqId> children;
    std::set<MetaId> asleep_on;
    // Set when the entry decomposed as a type equation at a pair type; term
    // equations guarded on it decompose in lockstep against these children.
    std::optional<std::array<EqId, 2>> prod_split_children;
  };

  std::deque<EqId> active;
  std::map<MetaId, std::vector<EqId>> sleeping;
  std::map<EqId, std::vector<EqId>> guard_waiters;
  std::vector<EqId> solved_log;
  std::vector<Entry> entries;

  EqId add(HomogeneousEq eq, std::optional<EqId> parent = std::nullopt) {
    EqId id = static_cast<EqId>(entries.size());
    eq.id = id;
    Entry e;
    e.eq = std::move(eq);
    e.parent = parent;
    entries.push_back(std::move(e));
    if (parent) entries[*parent].children.push_back(id);
    push(id);
    return id;
  }

  void push(EqId id) {
    if (entries[id].state == State::Queued) {
      // Avoid double enqueueing: Queued entries are already in the deque.
      if (std::find(active.begin(), active.end(), id) != active.end()) return;
    }
    entries[id].state = State::Queued;
    active.push_back(id);
  }

  bool is_solved(EqId id) const { return entries[id].state == State::Solved; }
};

// ---------------------------------------------------------------------------
// Unifier

Unifier::Unifier(Signature sig, const DefEnv& defs, SolveOptions opts)
    : sig_(std::move(sig)), defs_(defs), opts_(opts), store_(std::make_unique<ConstraintStore>()) {
  for (MetaId k : sig_.open_entries()) index_type_deps(k);
}

void Unifier::index_type_deps(MetaId entry) {
  std::vector<MetaId> metas;
  collect_metas(sig_.type_of(entry), metas);
  for (MetaId m : metas) type_deps_[m].push_back(entry);
}

Unifier::~Unifier() = default;

bool Unifier::solved_pair(EqId a, EqId b) const {
  return store_->is_solved(a) && store_->is_solved(b);
}

Context Unifier::theta_context(const Context& ctx) const { return apply_theta_ctx(ctx); }

void Unifier::add_constraint(const Constraint& c) {
  auto [type_eq, term_eq] = tog::split(c, static_cast<EqId>(store_->entries.size()));
  store_->add(std::move(type_eq));
  store_->add(std::move(term_eq));
}

Term Unifier::apply_theta(const Term& t) const { return apply_meta_subst(theta_, t); }

Context Unifier::apply_theta_ctx(const Context& ctx) const {
  if (theta_.empty()) return ctx;
  Context out;
  for (const auto& e : ctx.entries()) out.push(e.name, apply_theta(e.type));
  return out;
}

HomogeneousEq Unifier::apply_theta_eq(const HomogeneousEq& eq) const {
  if (theta_.empty()) return eq;
  HomogeneousEq out = eq;
  out.ctx = apply_theta_ctx(eq.ctx);
  out.lhs = apply_theta(eq.lhs);
  out.rhs = apply_theta(eq.rhs);
  out.type = apply_theta(eq.type);
  return out;
}

void Unifier::fail(const std::string& diagnostic) {
  failed_ = true;
  diagnostic_ = diagnostic;
  if (opts_.trace) {
    std::ostream& os = opts_.trace_out ? *opts_.trace_out : std::cerr;
    os << "FAIL " << diagnostic << "\n";
  }
}

void Unifier::bind(MetaId id, Term instantiation) {
  // Instantiations are never retracted or overwritten.
  if (theta_.contains(id))
    throw InternalError("meta " + meta_name(id) + " instantiated twice");
  Term inst = apply_theta(instantiation);
  // Keep theta idempotent: fold the new binding into every older entry.
  std::vector<std::pair<MetaId, Term>> updated;
  for (const auto& [m, t] : theta_.entries())
    if (mentions_meta(t, id)) updated.emplace_back(m, subst_meta(t, id, inst));
  for (auto& [m, t] : updated) theta_.bind(m, std::move(t));
  theta_.bind(id, inst);
  // Signature types track the substitution so fresh metas and eta expansions
  // see up-to-date types.  The dependency index names the candidate entries;
  // stale ones are skipped, rewritten ones are re-indexed (the instantiation
  // may introduce metas of its own).
  if (auto it = type_deps_.find(id); it != type_deps_.end()) {
    std::vector<MetaId> dependents = std::move(it->second);
    type_deps_.erase(it);
    std::vector<MetaId> inst_metas;
    collect_metas(inst, inst_metas);
    for (MetaId k : dependents) {
      if (!mentions_meta(sig_.type_of(k), id)) continue;
      sig_.update_type(k, subst_meta(sig_.type_of(k), id, inst));
      for (MetaId m : inst_metas) type_deps_[m].push_back(k);
    }
  }

  std::ostream& os = opts_.trace_out ? *opts_.trace_out : std::cerr;
  if (opts_.trace) os << "SOLVE " << meta_name(id) << " := " << print_term(inst) << "\n";

  // Wake the equations indexed by this meta.
  auto it = store_->sleeping.find(id);
  if (it != store_->sleeping.end()) {
    std::size_t woken = 0;
    for (EqId eq_id : it->second) {
      auto& entry = store_->entries[eq_id];
      if (entry.state != ConstraintStore::State::Sleeping) continue;
      entry.asleep_on.clear();
      store_->push(eq_id);
      ++woken;
    }
    store_->sleeping.erase(it);
    if (opts_.trace && woken > 0)
      os << "WAKE " << meta_name(id) << " (" << woken << " constraints)\n";
  }
}

bool Unifier::eta_expand_meta(MetaId id) {
  if (theta_.contains(id)) return false;
  Context tele;
  Term body = sig_.type_of(id);
  for (;;) {
    Blocked w = whnf(sig_, defs_, body);
    if (w.blocked()) return false;
    if (w.term.kind() == Term::Kind::Pi) {
      tele.push(w.term.hint(), w.term.domain());
      body = w.term.codomain();
    } else {
      body = w.term;
      break;
    }
  }

  auto close = [&](Term inner) {
    for (std::size_t i = tele.size(); i-- > 0;) inner = Term::lam(std::move(inner), tele[i].name);
    return inner;
  };

  if (body.kind() == Term::Kind::Prod) {
    MetaId first = sig_.extend(telescope(tele, body.left()));
    index_type_deps(first);
    MetaId second = sig_.extend(telescope(tele, body.right()));
    index_type_deps(second);
    Term inst = close(Term::pair(apply_to_context_vars(Head::mk_meta(first), tele),
                                 apply_to_context_vars(Head::mk_meta(second), tele)));
    bind(id, std::move(inst));
    return true;
  }
  if (!tele.empty()) {
    // Function type: expand to a lambda over a fresh meta of the same type.
    MetaId fresh = sig_.extend(sig_.type_of(id));
    index_type_deps(fresh);
    Term inst = close(apply_to_context_vars(Head::mk_meta(fresh), tele));
    bind(id, std::move(inst));
    return true;
  }
  return false;
}

SimplifyResult Unifier::simplify(const HomogeneousEq& eq) const {
  SimplifyResult out;
  if (eq.lhs == eq.rhs) {
    out.kind = SimplifyResult::Kind::Solved;
    return out;
  }

  Blocked tw = whnf(sig_, defs_, eq.type);
  if (tw.blocked()) {
    out.kind = SimplifyResult::Kind::Blocked;
    out.blockers = tw.blockers;
    return out;
  }
  const Term& ty = tw.term;

  // Eta at function type: compare under a fresh variable.
  if (ty.kind() == Term::Kind::Pi) {
    HomogeneousEq e = eq;
    e.ctx = eq.ctx.extended(ty.hint(), ty.domain());
    e.lhs = elim_app(shift(eq.lhs, 1), Term::var(0));
    e.rhs = elim_app(shift(eq.rhs, 1), Term::var(0));
    e.type = ty.codomain();
    out.kind = SimplifyResult::Kind::Eta;
    out.eta = std::move(e);
    return out;
  }

  // Eta at pair type: compare the projections.  A meta-headed side is
  // eta-expanded to a pair of fresh metas first so the projections reduce.
  if (ty.kind() == Term::Kind::Prod) {
    if (auto v = flex_view(whnf(sig_, defs_, eq.lhs).term)) {
      out.kind = SimplifyResult::Kind::NeedsEtaExpand;
      out.expand = v->meta;
      return out;
    }
    if (auto v = flex_view(whnf(sig_, defs_, eq.rhs).term)) {
      out.kind = SimplifyResult::Kind::NeedsEtaExpand;
      out.expand = v->meta;
      return out;
    }
    HomogeneousEq fst_eq;
    fst_eq.ctx = eq.ctx;
    fst_eq.lhs = eliminate(eq.lhs, Elim::fst());
    fst_eq.rhs = eliminate(eq.rhs, Elim::fst());
    fst_eq.type = ty.left();
    HomogeneousEq snd_eq;
    snd_eq.ctx = eq.ctx;
    snd_eq.lhs = eliminate(eq.lhs, Elim::snd());
    snd_eq.rhs = eliminate(eq.rhs, Elim::snd());
    snd_eq.type = ty.right();
    out.kind = SimplifyResult::Kind::Children;
    out.children = {std::move(fst_eq), std::move(snd_eq)};
    out.child_guards = {-1, -1};
    return out;
  }

  // Base or rigid-neutral type: compare the terms.
  Blocked wl = whnf(sig_, defs_, eq.lhs);
  Blocked wr = whnf(sig_, defs_, eq.rhs);
  const Term& l = wl.term;
  const Term& r = wr.term;
  if (l == r) {
    out.kind = SimplifyResult::Kind::Solved;
    return out;
  }

  if (meta_headed(l) || meta_headed(r)) {
    out.kind = SimplifyResult::Kind::Flex;
    return out;
  }

  const bool l_canonical = !l.is_neutral();
  const bool r_canonical = !r.is_neutral();

  if (l_canonical && r_canonical) {
    if (l.kind() != r.kind()) {
      out.kind = SimplifyResult::Kind::Failed;
      out.diagnostic = print_term(l, eq.ctx) + " != " + print_term(r, eq.ctx);
      return out;
    }
    switch (l.kind()) {
      case Term::Kind::Set:
      case Term::Kind::Bool:
      case Term::Kind::True:
      case Term::Kind::False:
      case Term::Kind::Nat:
      case Term::Kind::Zero:
        out.kind = SimplifyResult::Kind::Solved;  // equal atoms are caught above
        return out;
      case Term::Kind::Suc: {
        HomogeneousEq child;
        child.ctx = eq.ctx;
        child.lhs = l.suc_arg();
        child.rhs = r.suc_arg();
        child.type = Term::nat();
        out.kind = SimplifyResult::Kind::Children;
        out.children = {std::move(child)};
        out.child_guards = {-1};
        return out;
      }
      case Term::Kind::Pi: {
        HomogeneousEq dom;
        dom.ctx = eq.ctx;
        dom.lhs = l.domain();
        dom.rhs = r.domain();
        dom.type = Term::set();
        HomogeneousEq cod;
        cod.ctx = eq.ctx.extended(l.hint(), l.domain());
        cod.lhs = l.codomain();
        cod.rhs = r.codomain();
        cod.type = Term::set();
        out.kind = SimplifyResult::Kind::Children;
        out.children = {std::move(dom), std::move(cod)};
        // The codomains are only comparable once the domains are known equal.
        out.child_guards = {-1, 0};
        return out;
      }
      case Term::Kind::Prod: {
        HomogeneousEq left;
        left.ctx = eq.ctx;
        left.lhs = l.left();
        left.rhs = r.left();
        left.type = Term::set();
        HomogeneousEq right;
        right.ctx = eq.ctx;
        right.lhs = l.right();
        right.rhs = r.right();
        right.type = Term::set();
        out.kind = SimplifyResult::Kind::Children;
        out.children = {std::move(left), std::move(right)};
        out.child_guards = {-1, -1};
        return out;
      }
      case Term::Kind::Lam:
      case Term::Kind::Pair:
        out.kind = SimplifyResult::Kind::Failed;
        out.diagnostic = "introduction forms compared at a mismatched type";
        return out;
      case Term::Kind::Neutral:
        break;  // unreachable
    }
  }

  if (l_canonical != r_canonical) {
    out.kind = SimplifyResult::Kind::Failed;
    out.diagnostic = print_term(l, eq.ctx) + " != " + print_term(r, eq.ctx);
    return out;
  }

  // Rigid-rigid neutrals: equal heads, pointwise spines, threading the type.
  if (l.head() != r.head()) {
    out.kind = SimplifyResult::Kind::Failed;
    out.diagnostic = print_term(l, eq.ctx) + " != " + print_term(r, eq.ctx) + " (different heads)";
    return out;
  }
  if (l.elims().size() != r.elims().size()) {
    out.kind = SimplifyResult::Kind::Failed;
    out.diagnostic = print_term(l, eq.ctx) + " != " + print_term(r, eq.ctx) + " (spine lengths)";
    return out;
  }

  Term type = Term::set();
  switch (l.head().kind) {
    case HeadKind::Var:
      type = lookup_var(eq.ctx, l.head().var);
      break;
    case HeadKind::Def:
      type = defs_.lookup(l.head().def).type;
      break;
    case HeadKind::Meta:
      throw InternalError("meta head classified as rigid");
  }

  std::vector<HomogeneousEq> children;
  std::vector<int> guards;
  std::vector<Elim> prefix;
  for (std::size_t i = 0; i < l.elims().size(); ++i) {
    const Elim& le = l.elims()[i];
    const Elim& re = r.elims()[i];
    if (le.kind() != re.kind()) {
      out.kind = SimplifyResult::Kind::Failed;
      out.diagnostic = "spine elimination mismatch";
      return out;
    }
    Blocked wt = whnf(sig_, defs_, type);
    if (wt.blocked()) {
      out.kind = SimplifyResult::Kind::Blocked;
      out.blockers = wt.blockers;
      return out;
    }
    const Term& hty = wt.term;
    switch (le.kind()) {
      case Elim::Kind::App: {
        if (hty.kind() != Term::Kind::Pi) {
          out.kind = SimplifyResult::Kind::Failed;
          out.diagnostic = "spine applies a non-function";
          return out;
        }
        HomogeneousEq child;
        child.ctx = eq.ctx;
        child.lhs = le.argument();
        child.rhs = re.argument();
        child.type = hty.domain();
        children.push_back(std::move(child));
        guards.push_back(-1);
        type = subst_var(hty.codomain(), 0, le.argument());
        break;
      }
      case Elim::Kind::If: {
        if (hty.kind() != Term::Kind::Bool) {
          out.kind = SimplifyResult::Kind::Failed;
          out.diagnostic = "spine if-eliminates a non-boolean";
          return out;
        }
        int motive_index = static_cast<int>(children.size());
        HomogeneousEq motive;
        motive.ctx = eq.ctx.extended(le.hint(), Term::boolean());
        motive.lhs = le.motive();
        motive.rhs = re.motive();
        motive.type = Term::set();
        children.push_back(std::move(motive));
        guards.push_back(-1);
        HomogeneousEq then_eq;
        then_eq.ctx = eq.ctx;
        then_eq.lhs = le.then_branch();
        then_eq.rhs = re.then_branch();
        then_eq.type = subst_var(le.motive(), 0, Term::true_());
        children.push_back(std::move(then_eq));
        guards.push_back(motive_index);
        HomogeneousEq else_eq;
        else_eq.ctx = eq.ctx;
        else_eq.lhs = le.else_branch();
        else_eq.rhs = re.else_branch();
        else_eq.type = subst_var(le.motive(), 0, Term::false_());
        children.push_back(std::move(else_eq));
        guards.push_back(motive_index);
        type = subst_var(le.motive(), 0, Term::neutral(l.head(), prefix));
        break;
      }
      case Elim::Kind::Fst: {
        if (hty.kind() != Term::Kind::Prod) {
          out.kind = SimplifyResult::Kind::Failed;
          out.diagnostic = "spine projects a non-pair";
          return out;
        }
        type = hty.left();
        break;
      }
      case Elim::Kind::Snd: {
        if (hty.kind() != Term::Kind::Prod) {
          out.kind = SimplifyResult::Kind::Failed;
          out.diagnostic = "spine projects a non-pair";
          return out;
        }
        type = hty.right();
        break;
      }
    }
    prefix.push_back(le);
  }

  if (children.empty()) {
    out.kind = SimplifyResult::Kind::Solved;
    return out;
  }
  out.kind = SimplifyResult::Kind::Children;
  out.children = std::move(children);
  out.child_guards = std::move(guards);
  return out;
}

TrySolveResult Unifier::try_solve(const HomogeneousEq& eq) const {
  TrySolveResult out;
  Term l = whnf(sig_, defs_, eq.lhs).term;
  Term r = whnf(sig_, defs_, eq.rhs).term;

  const bool l_meta = meta_headed(l);
  const bool r_meta = meta_headed(r);
  if (!l_meta && !r_meta) throw InternalError("try_solve on an equation without a flex side");

  if (l_meta && r_meta) {
    // Identical sides are solved by the caller; every other flex-flex pair is
    // postponed (no intersection/pruning).
    out.kind = TrySolveResult::Kind::Blocked;
    out.blockers = {l.head().meta, r.head().meta};
    return out;
  }

  const Term& flex = l_meta ? l : r;
  const Term& rigid = l_meta ? r : l;

  auto view = flex_view(flex);
  if (!view) {
    out.kind = TrySolveResult::Kind::Blocked;
    out.blockers = {flex.head().meta};
    return out;
  }
  auto spine = pattern_spine(*view);
  if (!spine) {
    out.kind = TrySolveResult::Kind::Blocked;
    out.blockers = {view->meta};
    return out;
  }

  Term rhs = normalize_deep(sig_, defs_, rigid);

  if (occurs_at_all(rhs, view->meta)) {
    if (occurs_rigidly(rhs, view->meta)) {
      out.kind = TrySolveResult::Kind::Failed;
      out.diagnostic = "occurs check: " + meta_name(view->meta) + " occurs in " +
                       print_term(rhs, eq.ctx);
      return out;
    }
    out.kind = TrySolveResult::Kind::Blocked;
    out.blockers = {view->meta};
    std::vector<MetaId> ms;
    collect_metas(rhs, ms);
    out.blockers.insert(ms.begin(), ms.end());
    return out;
  }

  Term body;
  try {
    body = abstract_free_vars(rhs, *spine, 0);
  } catch (const ScopeViolation&) {
    // A free variable outside the pattern spine; instantiating the metas in
    // the right-hand side may still remove it, so postpone.
    out.kind = TrySolveResult::Kind::Blocked;
    out.blockers = {view->meta};
    std::vector<MetaId> ms;
    collect_metas(rhs, ms);
    out.blockers.insert(ms.begin(), ms.end());
    return out;
  }

  // Lambda hints: reuse the context names of the spine variables.
  Term inst = body;
  for (std::size_t i = spine->size(); i-- > 0;) {
    std::uint32_t var = (*spine)[i];
    std::string hint = "x";
    if (var < eq.ctx.size()) hint = eq.ctx[eq.ctx.size() - 1 - var].name;
    inst = Term::lam(std::move(inst), hint);
  }

  out.kind = TrySolveResult::Kind::Instantiated;
  out.meta = view->meta;
  out.instantiation = std::move(inst);
  return out;
}

namespace {

void mark_solved_rec(ConstraintStore& store, EqId solved_id) {
  auto& entry = store.entries[solved_id];
  entry.state = ConstraintStore::State::Solved;
  store.solved_log.push_back(solved_id);
  auto it = store.guard_waiters.find(solved_id);
  if (it != store.guard_waiters.end()) {
    std::vector<EqId> waiters = std::move(it->second);
    store.guard_waiters.erase(it);
    for (EqId w : waiters)
      if (store.entries[w].state == ConstraintStore::State::Parked) store.push(w);
  }
  if (entry.parent) {
    auto& parent = store.entries[*entry.parent];
    if (parent.pending_children > 0 && --parent.pending_children == 0)
      mark_solved_rec(store, *entry.parent);
  }
}

}  // namespace

// Decomposes a term equation guarded on a type equation that has itself
// split at a pair type: the term equation's projections pair up with the
// component type equations, so the solved component can make progress while
// the blocked one keeps guarding its half.  Returns false when the guard is
// not in that shape (the waiter then parks as usual).
bool Unifier::try_lockstep(EqId waiter, EqId guard) {
  auto& store = *store_;
  // Copy what we need up front: store.add below reallocates the entry table.
  if (store.entries[guard].state != ConstraintStore::State::Latent ||
      !store.entries[guard].prod_split_children)
    return false;
  const std::array<EqId, 2> split_children = *store.entries[guard].prod_split_children;
  const Term guard_lhs = apply_theta(store.entries[guard].eq.lhs);

  HomogeneousEq weq = apply_theta_eq(store.entries[waiter].eq);
  if (!(weq.type == guard_lhs)) return false;
  Term type = whnf(sig_, defs_, weq.type).term;
  if (type.kind() != Term::Kind::Prod) return false;

  // Make both sides projectable: a bare meta side becomes a pair of metas.
  for (int side = 0; side < 2; ++side) {
    const Term& s = side == 0 ? weq.lhs : weq.rhs;
    if (auto v = flex_view(whnf(sig_, defs_, s).term)) eta_expand_meta(v->meta);
  }
  weq = apply_theta_eq(weq);
  type = whnf(sig_, defs_, weq.type).term;

  {
    auto& waiter_entry = store.entries[waiter];
    waiter_entry.eq = weq;
    waiter_entry.eq.id = waiter;
    waiter_entry.state = ConstraintStore::State::Latent;
    waiter_entry.pending_children = 2;
  }

  HomogeneousEq fst_eq;
  fst_eq.ctx = weq.ctx;
  fst_eq.lhs = eliminate(weq.lhs, Elim::fst());
  fst_eq.rhs = eliminate(weq.rhs, Elim::fst());
  fst_eq.type = type.left();
  fst_eq.guard = split_children[0];
  store.add(std::move(fst_eq), waiter);

  HomogeneousEq snd_eq;
  snd_eq.ctx = weq.ctx;
  snd_eq.lhs = eliminate(weq.lhs, Elim::snd());
  snd_eq.rhs = eliminate(weq.rhs, Elim::snd());
  snd_eq.type = type.right();
  snd_eq.guard = split_children[1];
  store.add(std::move(snd_eq), waiter);
  return true;
}

void Unifier::process(EqId id) {
  auto& store = *store_;
  // Guarded equations wait until their guard is in the solved log, except
  // that a guard half-split at a pair type lets the waiter split alongside.
  if (store.entries[id].eq.guard) {
    EqId g = *store.entries[id].eq.guard;
    if (!store.is_solved(g)) {
      if (try_lockstep(id, g)) return;
      store.entries[id].state = ConstraintStore::State::Parked;
      store.guard_waiters[g].push_back(id);
      return;
    }
  }

  HomogeneousEq eq = apply_theta_eq(store.entries[id].eq);

  auto mark_solved = [&](EqId solved_id) { mark_solved_rec(store, solved_id); };

  auto sleep = [&](const HomogeneousEq& snapshot, const std::set<MetaId>& blockers) {
    auto& entry = store.entries[id];
    entry.eq = snapshot;
    entry.eq.id = id;
    entry.state = ConstraintStore::State::Sleeping;
    entry.asleep_on = blockers;
    for (MetaId m : blockers) store.sleeping[m].push_back(id);
    if (opts_.trace) {
      std::ostream& os = opts_.trace_out ? *opts_.trace_out : std::cerr;
      os << "POSTPONE on " << print_meta_set(blockers) << "\n";
    }
  };

  // Registers the children of a decomposition; waiters already parked on a
  // pair-type split decompose in lockstep.
  auto decompose = [&](const std::vector<HomogeneousEq>& children,
                       const std::vector<int>& child_guards) {
    auto& parent_entry = store.entries[id];
    parent_entry.eq = eq;
    parent_entry.eq.id = id;
    parent_entry.state = ConstraintStore::State::Latent;
    parent_entry.pending_children = static_cast<std::uint32_t>(children.size());

    std::vector<EqId> ids;
    ids.reserve(children.size());
    for (std::size_t i = 0; i < children.size(); ++i) {
      HomogeneousEq child = children[i];
      if (child_guards[i] >= 0) child.guard = ids[static_cast<std::size_t>(child_guards[i])];
      ids.push_back(store.add(std::move(child), id));
    }

    const bool prod_type_split = eq.type.kind() == Term::Kind::Set && children.size() == 2 &&
                                 whnf(sig_, defs_, eq.lhs).term.kind() == Term::Kind::Prod;
    if (!prod_type_split) return;
    store.entries[id].prod_split_children = std::array<EqId, 2>{ids[0], ids[1]};

    auto it = store.guard_waiters.find(id);
    if (it == store.guard_waiters.end()) return;
    std::vector<EqId> waiters = std::move(it->second);
    store.guard_waiters.erase(it);
    for (EqId w : waiters) {
      if (store.entries[w].state != ConstraintStore::State::Parked) continue;
      if (!try_lockstep(w, id)) store.guard_waiters[id].push_back(w);
    }
  };

  for (;;) {
    SimplifyResult s = simplify(eq);
    switch (s.kind) {
      case SimplifyResult::Kind::Solved:
        store.entries[id].eq = eq;
        store.entries[id].eq.id = id;
        mark_solved(id);
        return;
      case SimplifyResult::Kind::Failed:
        fail(s.diagnostic);
        return;
      case SimplifyResult::Kind::Eta:
        eq = *s.eta;
        eq.id = id;
        continue;
      case SimplifyResult::Kind::NeedsEtaExpand:
        if (!eta_expand_meta(s.expand)) {
          sleep(eq, {s.expand});
          return;
        }
        eq = apply_theta_eq(eq);
        continue;
      case SimplifyResult::Kind::Children:
        decompose(s.children, s.child_guards);
        return;
      case SimplifyResult::Kind::Flex: {
        TrySolveResult r = try_solve(eq);
        if (r.kind == TrySolveResult::Kind::Instantiated) {
          bind(r.meta, r.instantiation);
          store.entries[id].eq = eq;
          store.entries[id].eq.id = id;
          mark_solved(id);
          return;
        }
        if (r.kind == TrySolveResult::Kind::Failed) {
          fail(r.diagnostic);
          return;
        }
        sleep(eq, r.blockers);
        return;
      }
      case SimplifyResult::Kind::Blocked:
        sleep(eq, s.blockers);
        return;
    }
  }
}

SolveResult Unifier::run() {
  auto& store = *store_;
  bool exhausted = false;
  while (!failed_ && !store.active.empty()) {
    if (steps_ >= opts_.max_steps) {
      exhausted = true;
      break;
    }
    EqId id = store.active.front();
    store.active.pop_front();
    if (store.entries[id].state != ConstraintStore::State::Queued) continue;
    ++steps_;
    if (opts_.trace) {
      std::ostream& os = opts_.trace_out ? *opts_.trace_out : std::cerr;
      os << "POP " << print_eq(apply_theta_eq(store.entries[id].eq)) << "\n";
    }
    process(id);
  }

  SolveResult res;
  res.signature = sig_;
  res.solution = theta_;
  res.steps = steps_;

  if (failed_) {
    res.outcome = SolveResult::Outcome::Failed;
    res.diagnostic = diagnostic_;
    return res;
  }

  // Blocking set of an unsolved entry: its own sleep set, its guard's, or the
  // union over unsolved children.
  auto blocking_set = [&](EqId id, auto&& self) -> std::set<MetaId> {
    const auto& entry = store.entries[id];
    switch (entry.state) {
      case ConstraintStore::State::Sleeping:
        return entry.asleep_on;
      case ConstraintStore::State::Parked:
        return entry.eq.guard ? self(*entry.eq.guard, self) : std::set<MetaId>{};
      case ConstraintStore::State::Latent: {
        std::set<MetaId> out;
        for (EqId c : entry.children) {
          if (store.entries[c].state == ConstraintStore::State::Solved) continue;
          auto sub = self(c, self);
          out.insert(sub.begin(), sub.end());
        }
        return out;
      }
      case ConstraintStore::State::Queued:
        return {};
      case ConstraintStore::State::Solved:
        return {};
    }
    return {};
  };

  // Residuals: unsolved leaves, rendered heterogeneously through their guard
  // when that guard is itself unsolved (the guard then does not render on its
  // own).
  std::set<EqId> covered_guards;
  for (const auto& entry : store.entries) {
    const auto st = entry.state;
    if (st == ConstraintStore::State::Solved || st == ConstraintStore::State::Latent) continue;
    if (entry.eq.guard && !store.is_solved(*entry.eq.guard)) covered_guards.insert(*entry.eq.guard);
  }

  for (EqId id = 0; id < store.entries.size(); ++id) {
    const auto& entry = store.entries[id];
    const auto st = entry.state;
    if (st == ConstraintStore::State::Solved || st == ConstraintStore::State::Latent) continue;
    if (covered_guards.count(id)) continue;

    HomogeneousEq eq = apply_theta_eq(entry.eq);
    Constraint c;
    c.ctx = eq.ctx;
    c.lhs_term = eq.lhs;
    c.rhs_term = eq.rhs;
    if (entry.eq.guard && !store.is_solved(*entry.eq.guard)) {
      const HomogeneousEq& guard_eq = store.entries[*entry.eq.guard].eq;
      c.lhs_type = apply_theta(guard_eq.lhs);
      c.rhs_type = apply_theta(guard_eq.rhs);
    } else {
      c.lhs_type = eq.type;
      c.rhs_type = eq.type;
    }
    res.residuals.push_back(std::move(c));
    res.residual_blockers.push_back(blocking_set(id, blocking_set));
  }

  if (!res.residuals.empty()) {
    for (MetaId m = 0; m < sig_.size(); ++m)
      if (!theta_.contains(m)) res.unsolved_metas.insert(m);
  }

  res.outcome = res.residuals.empty() ? SolveResult::Outcome::Solved : SolveResult::Outcome::Stuck;
  if (exhausted) {
    res.outcome = SolveResult::Outcome::Stuck;
    res.diagnostic = "step budget exhausted after " + std::to_string(steps_) + " steps";
  }
  return res;
}

SolveResult solve_all(const Signature& sig, const DefEnv& defs,
                      const std::vector<Constraint>& constraints, const SolveOptions& opts) {
  Unifier u(sig, defs, opts);
  for (const Constraint& c : constraints) u.add_constraint(c);
  SolveResult res = u.run();

  // Report which of the original constraints were fully discharged: the i-th
  // constraint splits into equations 2i and 2i+1 before any decomposition
  // children are added.
  if (res.outcome != SolveResult::Outcome::Failed) {
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      EqId type_id = static_cast<EqId>(2 * i);
      EqId term_id = type_id + 1;
      if (u.solved_pair(type_id, term_id)) {
        Constraint c;
        c.ctx = u.theta_context(constraints[i].ctx);
        c.lhs_term = apply_meta_subst(res.solution, constraints[i].lhs_term);
        c.lhs_type = apply_meta_subst(res.solution, constraints[i].lhs_type);
        c.rhs_term = apply_meta_subst(res.solution, constraints[i].rhs_term);
        c.rhs_type = apply_meta_subst(res.solution, constraints[i].rhs_type);
        res.solved_constraints.push_back(std::move(c));
      }
    }
  }
  return res;
}

CheckResult verify_solve_result(const SolveResult& result, const DefEnv& defs) {
  // Totalize the substitution: uninstantiated metas map to themselves, scoped
  // over the final signature.
  MetaSubst total = result.solution;
  for (MetaId m = 0; m < result.signature.size(); ++m)
    if (!total.contains(m)) total.bind(m, Term::meta(m));

  CheckResult r = check_meta_subst(result.signature, defs, total, result.signature);
  if (!r.ok()) return r;

  for (const Constraint& c : result.solved_constraints) {
    CheckResult types =
        convert(result.signature, defs, c.ctx, c.lhs_type, c.rhs_type, Term::set());
    if (!types.ok())
      return CheckResult::no("solved constraint has unequal types: " + print_constraint(c));
    CheckResult terms =
        convert(result.signature, defs, c.ctx, c.lhs_term, c.rhs_term, c.lhs_type);
    if (!terms.ok())
      return CheckResult::no("solved constraint has unequal terms: " + print_constraint(c));
  }
  return CheckResult::yes();
}

}  // namespace tog
