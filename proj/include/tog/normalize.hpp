#pragma once

#include <set>

#include "tog/term.hpp"

// Hereditary substitution and weak-head normalisation.  Substitution
// re-normalises on the fly, so every function here maps beta-normal terms to
// beta-normal terms.  Weak-head normalisation additionally unfolds top-level
// definition bodies (delta) and reports the meta-variables that impede
// reduction.

namespace tog {

/// Result of weak-head normalisation.  `blockers` is empty when the term has
/// a canonical or rigid-neutral head; otherwise it holds exactly the
/// meta-variables whose instantiation could change the head of `term`.
struct Blocked {
  Term term;
  std::set<MetaId> blockers;

  bool blocked() const { return !blockers.empty(); }
};

/// Eliminates a single redex candidate: beta for App-of-Lam, branch selection
/// for If-of-literal, projection for Fst/Snd-of-Pair; appends to the spine
/// when `t` is neutral.  Throws InternalError on an ill-typed elimination
/// (e.g. applying Bool).
Term eliminate(const Term& t, const Elim& e);

/// Application elimination: `t` must be an abstraction or neutral.
Term elim_app(const Term& t, const Term& argument);

/// Bool elimination: `scrutinee` must be true, false, or neutral.
Term elim_if(const Term& scrutinee, const Term& motive, const Term& then_branch,
             const Term& else_branch, const std::string& hint = "x");

/// Substitutes `u` for the variable with de Bruijn index `index`.  `u` lives
/// in the context with that binding removed; indices above `index` drop by
/// one.  Redexes created along the way are eliminated hereditarily.
Term subst_var(const Term& t, std::uint32_t index, const Term& u);

/// Substitutes the closed term `u` for the meta-variable `id`.
Term subst_meta(const Term& t, MetaId id, const Term& u);

/// Generic head substitution t[h := u]; dispatches on the head kind.
Term subst(const Term& t, const Head& h, const Term& u);

/// Substitutes every meta-variable in dom(theta) by its instantiation,
/// chasing chains so that no meta in the domain survives in the result.
/// Metas outside the domain are left in place.
Term apply_meta_subst(const MetaSubst& theta, const Term& t);

/// Weak-head normalisation.  Unfolds Def bodies; a meta-headed result is
/// reported as blocked on its head meta, and a Def whose unfolding gets stuck
/// propagates the inner blocking set.
Blocked whnf(const Signature& sig, const DefEnv& defs, const Term& t);

}  // namespace tog
