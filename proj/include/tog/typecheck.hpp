#pragma once

#include <set>
#include <string>

#include "tog/normalize.hpp"
#include "tog/term.hpp"

// The declarative system: bidirectional type checking and inference,
// type-directed definitional equality with eta laws, and the validity
// judgments for signatures, contexts and meta-variable substitutions.  It
// serves as the oracle for the elaboration pipeline and as the debug-mode
// verifier of solver output.
//
// Judgments are three-valued: a query can succeed, definitely fail, or be
// blocked on uninstantiated meta-variables (a rule needed the shape of a type
// whose weak-head normalisation is impeded).  On meta-free inputs Blocked
// cannot occur and the system coincides with the two-valued presentation.

namespace tog {

enum class Verdict { Yes, No, Blocked };

struct CheckResult {
  Verdict verdict;
  std::string reason;          // No
  std::set<MetaId> blockers;   // Blocked

  bool ok() const { return verdict == Verdict::Yes; }

  static CheckResult yes() { return {Verdict::Yes, {}, {}}; }
  static CheckResult no(std::string reason) { return {Verdict::No, std::move(reason), {}}; }
  static CheckResult blocked(std::set<MetaId> blockers) {
    return {Verdict::Blocked, "blocked", std::move(blockers)};
  }
};

struct InferResult {
  Verdict verdict;
  Term type;                   // Yes
  std::string reason;
  std::set<MetaId> blockers;

  bool ok() const { return verdict == Verdict::Yes; }

  static InferResult yes(Term type) { return {Verdict::Yes, std::move(type), {}, {}}; }
  static InferResult no(std::string reason) {
    return {Verdict::No, Term::set(), std::move(reason), {}};
  }
  static InferResult blocked(std::set<MetaId> blockers) {
    return {Verdict::Blocked, Term::set(), "blocked", std::move(blockers)};
  }
};

/// Checks a term against a type.  Scope errors (unbound variable, unknown
/// meta or definition) throw ScopeError.
CheckResult check(const Signature& sig, const DefEnv& defs, const Context& ctx, const Term& t,
                  const Term& type);

/// Infers the type of a neutral term.
InferResult infer(const Signature& sig, const DefEnv& defs, const Context& ctx, const Term& neutral);

/// Type-directed definitional equality.  Callers must ensure both sides check
/// against `type`.
CheckResult convert(const Signature& sig, const DefEnv& defs, const Context& ctx, const Term& lhs,
                    const Term& rhs, const Term& type);

/// Definitional equality of neutral terms: equal heads, spines compared
/// pointwise left to right; returns the inferred common type.
InferResult convert_neutral(const Signature& sig, const DefEnv& defs, const Context& ctx,
                            const Term& lhs, const Term& rhs);

/// Every context entry checks as Set in its prefix.
CheckResult check_context(const Signature& sig, const DefEnv& defs, const Context& ctx);

/// Every signature entry is closed and checks as Set in its prefix signature.
CheckResult check_signature(const Signature& sig, const DefEnv& defs);

/// theta instantiates every entry of sigma with a term that checks against
/// the (theta-instantiated) stored type, under signature xi.
CheckResult check_meta_subst(const Signature& xi, const DefEnv& defs, const MetaSubst& theta,
                             const Signature& sigma);

}  // namespace tog
