#include "tog/normalize.hpp"

namespace tog {

namespace {

// Safety fuse for the structural recursions: counts reduction steps across
// one top-level call and aborts with a diagnostic rather than looping.
constexpr std::size_t kMaxSteps = 1'000'000;

thread_local std::size_t g_steps = 0;
thread_local int g_active = 0;

struct FuseGuard {
  FuseGuard() {
    if (g_active++ == 0) g_steps = 0;
  }
  ~FuseGuard() { --g_active; }
};

void tick() {
  if (++g_steps > kMaxSteps)
    throw InternalError("normalization step limit exceeded (possible divergence)");
}

Elim subst_var_elim(const Elim& e, std::uint32_t index, const Term& u);

}  // namespace

Term eliminate(const Term& t, const Elim& e) {
  tick();
  if (t.is_neutral()) {
    std::vector<Elim> elims = t.elims();
    elims.push_back(e);
    return Term::neutral(t.head(), std::move(elims));
  }
  switch (e.kind()) {
    case Elim::Kind::App:
      if (t.kind() == Term::Kind::Lam) return subst_var(t.body(), 0, e.argument());
      throw InternalError("application of a canonical non-function");
    case Elim::Kind::If:
      if (t.kind() == Term::Kind::True) return e.then_branch();
      if (t.kind() == Term::Kind::False) return e.else_branch();
      throw InternalError("if-elimination of a canonical non-boolean");
    case Elim::Kind::Fst:
      if (t.kind() == Term::Kind::Pair) return t.first();
      throw InternalError("first projection of a canonical non-pair");
    case Elim::Kind::Snd:
      if (t.kind() == Term::Kind::Pair) return t.second();
      throw InternalError("second projection of a canonical non-pair");
  }
  throw InternalError("unreachable elim kind");
}

Term elim_app(const Term& t, const Term& argument) {
  FuseGuard fuse;
  return eliminate(t, Elim::app(argument));
}

Term elim_if(const Term& scrutinee, const Term& motive, const Term& then_branch,
             const Term& else_branch, const std::string& hint) {
  FuseGuard fuse;
  return eliminate(scrutinee, Elim::if_then_else(motive, then_branch, else_branch, hint));
}

namespace {

Term subst_var_impl(const Term& t, std::uint32_t index, const Term& u) {
  tick();
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return t;
    case Term::Kind::Suc:
      return Term::suc(subst_var_impl(t.suc_arg(), index, u));
    case Term::Kind::Pi:
      return Term::pi(subst_var_impl(t.domain(), index, u),
                      subst_var_impl(t.codomain(), index + 1, shift(u, 1)), t.hint());
    case Term::Kind::Lam:
      return Term::lam(subst_var_impl(t.body(), index + 1, shift(u, 1)), t.hint());
    case Term::Kind::Prod:
      return Term::prod(subst_var_impl(t.left(), index, u), subst_var_impl(t.right(), index, u));
    case Term::Kind::Pair:
      return Term::pair(subst_var_impl(t.first(), index, u), subst_var_impl(t.second(), index, u));
    case Term::Kind::Neutral: {
      // Substitute the head first, then push the (substituted) eliminations
      // back on, firing any redexes this creates.
      Term base = Term::set();
      const Head& h = t.head();
      if (h.kind == HeadKind::Var) {
        if (h.var == index) {
          base = u;
        } else if (h.var > index) {
          base = Term::var(h.var - 1);
        } else {
          base = Term::var(h.var);
        }
      } else {
        base = Term::neutral(h);
      }
      for (const Elim& e : t.elims()) base = eliminate(base, subst_var_elim(e, index, u));
      return base;
    }
  }
  throw InternalError("unreachable term kind");
}

Elim subst_var_elim(const Elim& e, std::uint32_t index, const Term& u) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(subst_var_impl(e.argument(), index, u));
    case Elim::Kind::If:
      return Elim::if_then_else(subst_var_impl(e.motive(), index + 1, shift(u, 1)),
                                subst_var_impl(e.then_branch(), index, u),
                                subst_var_impl(e.else_branch(), index, u), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable elim kind");
}

Term subst_meta_impl(const Term& t, MetaId id, const Term& u);

Elim subst_meta_elim(const Elim& e, MetaId id, const Term& u) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(subst_meta_impl(e.argument(), id, u));
    case Elim::Kind::If:
      return Elim::if_then_else(subst_meta_impl(e.motive(), id, u),
                                subst_meta_impl(e.then_branch(), id, u),
                                subst_meta_impl(e.else_branch(), id, u), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable elim kind");
}

Term subst_meta_impl(const Term& t, MetaId id, const Term& u) {
  tick();
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return t;
    case Term::Kind::Suc:
      return Term::suc(subst_meta_impl(t.suc_arg(), id, u));
    case Term::Kind::Pi:
      return Term::pi(subst_meta_impl(t.domain(), id, u), subst_meta_impl(t.codomain(), id, u),
                      t.hint());
    case Term::Kind::Lam:
      return Term::lam(subst_meta_impl(t.body(), id, u), t.hint());
    case Term::Kind::Prod:
      return Term::prod(subst_meta_impl(t.left(), id, u), subst_meta_impl(t.right(), id, u));
    case Term::Kind::Pair:
      return Term::pair(subst_meta_impl(t.first(), id, u), subst_meta_impl(t.second(), id, u));
    case Term::Kind::Neutral: {
      const Head& h = t.head();
      // Instantiations are closed, so no shifting is needed under binders.
      Term base =
          (h.kind == HeadKind::Meta && h.meta == id) ? u : Term::neutral(h);
      for (const Elim& e : t.elims()) base = eliminate(base, subst_meta_elim(e, id, u));
      return base;
    }
  }
  throw InternalError("unreachable term kind");
}

Term apply_meta_subst_impl(const MetaSubst& theta, const Term& t);

Elim apply_meta_subst_elim(const MetaSubst& theta, const Elim& e) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(apply_meta_subst_impl(theta, e.argument()));
    case Elim::Kind::If:
      return Elim::if_then_else(apply_meta_subst_impl(theta, e.motive()),
                                apply_meta_subst_impl(theta, e.then_branch()),
                                apply_meta_subst_impl(theta, e.else_branch()), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable elim kind");
}

Term apply_meta_subst_impl(const MetaSubst& theta, const Term& t) {
  tick();
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return t;
    case Term::Kind::Suc:
      return Term::suc(apply_meta_subst_impl(theta, t.suc_arg()));
    case Term::Kind::Pi:
      return Term::pi(apply_meta_subst_impl(theta, t.domain()),
                      apply_meta_subst_impl(theta, t.codomain()), t.hint());
    case Term::Kind::Lam:
      return Term::lam(apply_meta_subst_impl(theta, t.body()), t.hint());
    case Term::Kind::Prod:
      return Term::prod(apply_meta_subst_impl(theta, t.left()),
                        apply_meta_subst_impl(theta, t.right()));
    case Term::Kind::Pair:
      return Term::pair(apply_meta_subst_impl(theta, t.first()),
                        apply_meta_subst_impl(theta, t.second()));
    case Term::Kind::Neutral: {
      const Head& h = t.head();
      Term base = Term::neutral(h);
      if (h.kind == HeadKind::Meta) {
        if (const Term* inst = theta.lookup(h.meta)) {
          // Chase chains so no meta in dom(theta) survives; the solver keeps
          // theta acyclic (occurs check), so this terminates.  Identity
          // entries (alpha := alpha) stand for "left uninstantiated".
          const bool identity = inst->is_neutral() && inst->elims().empty() &&
                                inst->head().kind == HeadKind::Meta &&
                                inst->head().meta == h.meta;
          if (!identity) base = apply_meta_subst_impl(theta, *inst);
        }
      }
      for (const Elim& e : t.elims()) base = eliminate(base, apply_meta_subst_elim(theta, e));
      return base;
    }
  }
  throw InternalError("unreachable term kind");
}

}  // namespace

Term subst_var(const Term& t, std::uint32_t index, const Term& u) {
  FuseGuard fuse;
  return subst_var_impl(t, index, u);
}

Term subst_meta(const Term& t, MetaId id, const Term& u) {
  FuseGuard fuse;
  return subst_meta_impl(t, id, u);
}

Term subst(const Term& t, const Head& h, const Term& u) {
  switch (h.kind) {
    case HeadKind::Var:
      return subst_var(t, h.var, u);
    case HeadKind::Meta:
      return subst_meta(t, h.meta, u);
    case HeadKind::Def:
      throw InternalError("substitution for a definition head");
  }
  throw InternalError("unreachable head kind");
}

Term apply_meta_subst(const MetaSubst& theta, const Term& t) {
  if (theta.empty()) return t;
  FuseGuard fuse;
  return apply_meta_subst_impl(theta, t);
}

Blocked whnf(const Signature& sig, const DefEnv& defs, const Term& t) {
  FuseGuard fuse;
  Term cur = t;
  for (;;) {
    tick();
    if (!cur.is_neutral()) return Blocked{cur, {}};
    const Head& h = cur.head();
    switch (h.kind) {
      case HeadKind::Var:
        return Blocked{cur, {}};
      case HeadKind::Meta:
        if (!sig.contains(h.meta))
          throw ScopeError("meta-variable ?" + std::to_string(h.meta) + " not in signature");
        return Blocked{cur, {h.meta}};
      case HeadKind::Def: {
        const Definition& d = defs.lookup(h.def);
        if (!d.body) return Blocked{cur, {}};  // postulates are rigid
        Term unfolded = *d.body;
        for (const Elim& e : cur.elims()) unfolded = eliminate(unfolded, e);
        cur = unfolded;  // loop: the unfolding may expose further redexes
        break;
      }
    }
  }
}

}  // namespace tog
