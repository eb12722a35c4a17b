#pragma once

#include <optional>
#include <vector>

#include "tog/term.hpp"

// Elaboration: compiles a type-checking problem into a well-typed
// approximation plus heterogeneous unification constraints, in a single
// traversal.  Canonical forms are elaborated in checking mode, neutral forms
// in inference mode with a final fresh-meta wrapper when a checking target
// exists.  The signature and the constraint list are threaded through the
// traversal; constraint order is deterministic: the rule's own result
// constraint first, then the subterm constraints left to right.

namespace tog {

/// Heterogeneous equation `ctx |- lhs_term : lhs_type = rhs_term : rhs_type`.
/// Well-formed when each side checks against its own type in `ctx`; the two
/// types need not be related until the constraint is solved.
struct Constraint {
  Context ctx;
  Term lhs_term;
  Term lhs_type;
  Term rhs_term;
  Term rhs_type;
};

/// Result of one elaboration call.
struct ElabOutput {
  Signature signature;                 // extension of the input signature
  Term term;                           // well-typed approximation
  std::vector<Constraint> constraints; // well-formed, deterministic order
  std::optional<Term> inferred_type;   // inference mode only
  std::size_t fresh_metas = 0;         // metas added by this call
};

/// Adds a fresh meta-variable alpha : ctx -> type to the signature and
/// returns alpha applied to all context variables, which infers `type` in
/// `ctx`.
std::pair<Signature, Term> fresh_meta(const Signature& sig, const Context& ctx, const Term& type);

/// Elaborates `t` against `type` (which must check as Set, possibly blocked
/// on metas).  Throws ScopeError on out-of-scope variables, metas or names.
ElabOutput elaborate_check(const Signature& sig, const DefEnv& defs, const Context& ctx,
                           const Term& t, const Term& type);

/// Elaborates a neutral term in inference mode; `inferred_type` is set.
ElabOutput elaborate_infer(const Signature& sig, const DefEnv& defs, const Context& ctx,
                           const Term& neutral);

/// Elaborates a type expression (checking against Set).
ElabOutput elaborate_type(const Signature& sig, const DefEnv& defs, const Context& ctx,
                          const Term& type_expr);

/// Degenerate baseline that wraps the whole problem in a single opaque
/// constraint `ctx |- alpha ctx : type = t : beta ctx`.  It satisfies the
/// same soundness contract but gives the solver nothing to work with; kept
/// behind a debug flag as a differential comparison point.
ElabOutput elaborate_opaque(const Signature& sig, const DefEnv& defs, const Context& ctx,
                            const Term& t, const Term& type);

}  // namespace tog
