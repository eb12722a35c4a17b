#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "tog/elaborate.hpp"
#include "tog/term.hpp"
#include "tog/typecheck.hpp"

// Dynamic homogeneous pattern-unification solver.  Heterogeneous constraints
// are split into a type equation at Set plus a term equation guarded on it;
// the store runs a fair FIFO worklist with per-meta wake-up of postponed
// equations.  Solving never backtracks: Failed is only reported on stable
// mismatches (rigid-rigid head clash, occurs-check violation), everything
// undecidable is postponed.
//
// Guards propagate componentwise through decomposition: when a type equation
// splits at a pair type, its guarded term equation splits alongside it and
// each component is guarded on the matching component type equation.  (At
// function types the codomain depends on the domain, so the guarded equation
// just keeps waiting for the whole type equation.)  This is what lets the
// solver eta-expand a pair meta and finish the known component while the
// other component's type is still blocked.

namespace tog {

using EqId = std::uint32_t;

/// Homogeneous equation `ctx |- lhs = rhs : type`.  `guard` names another
/// store entry that must be solved before this one may be attempted.
struct HomogeneousEq {
  EqId id = 0;
  Context ctx;
  Term lhs;
  Term rhs;
  Term type;
  std::optional<EqId> guard;
};

/// Splits a heterogeneous constraint into the type equation and the guarded
/// term equation.  Ids are assigned from `first_id`.
std::pair<HomogeneousEq, HomogeneousEq> split(const Constraint& c, EqId first_id = 0);

struct SolveOptions {
  std::size_t max_steps = 10000;
  bool trace = false;
  std::ostream* trace_out = nullptr;  // defaults to stderr when tracing
};

struct SolveResult {
  enum class Outcome { Solved, Stuck, Failed };

  Outcome outcome = Outcome::Solved;
  Signature signature;                  // extension of the input signature
  MetaSubst solution;                   // idempotent; partial when Stuck
  std::vector<Constraint> residuals;    // Stuck: unsolved constraints, theta applied
  std::vector<std::set<MetaId>> residual_blockers;  // parallel to residuals
  std::set<MetaId> unsolved_metas;      // metas without an instantiation
  std::vector<Constraint> solved_constraints;  // original constraints fully discharged
  std::string diagnostic;               // Failed: first mismatch; Stuck: step exhaustion note
  std::size_t steps = 0;
};

/// Attempts to discharge all constraints by instantiating meta-variables.
SolveResult solve_all(const Signature& sig, const DefEnv& defs,
                      const std::vector<Constraint>& constraints, const SolveOptions& opts = {});

/// Post-hoc verification of a solver result with the declarative judgments:
/// the substitution (totalized with identity entries for uninstantiated
/// metas) is well-formed against the final signature, and every discharged
/// constraint is solved in the declarative sense.
CheckResult verify_solve_result(const SolveResult& result, const DefEnv& defs);

// ---------------------------------------------------------------------------
// Solver internals, exposed for unit tests of the individual operations.

struct TrySolveResult {
  enum class Kind { Instantiated, Blocked, Failed };
  Kind kind;
  MetaId meta = 0;             // Instantiated
  Term instantiation;          // Instantiated: closed lambda-abstraction
  std::set<MetaId> blockers;   // Blocked
  std::string diagnostic;      // Failed
};

struct SimplifyResult {
  enum class Kind {
    Solved,         // sides definitionally equal outright
    Failed,         // stable mismatch
    Eta,            // rewritten by the function eta law; see `eta`
    NeedsEtaExpand, // a meta must be eta-expanded to a pair first; see `expand`
    Children,       // decomposed; see `children` / `child_guards`
    Flex,           // a side is meta-headed; hand to try_solve
    Blocked,        // cannot make progress; see `blockers`
  };
  Kind kind;
  std::optional<HomogeneousEq> eta;
  MetaId expand = 0;
  std::vector<HomogeneousEq> children;
  std::vector<int> child_guards;  // index of the sibling guarding each child, -1 if none
  std::set<MetaId> blockers;
  std::string diagnostic;
};

/// Worklist of homogeneous equations indexed by blocking metas.
class ConstraintStore;

class Unifier {
 public:
  Unifier(Signature sig, const DefEnv& defs, SolveOptions opts = {});
  ~Unifier();

  /// Splits and enqueues one heterogeneous constraint.
  void add_constraint(const Constraint& c);

  /// Runs the fixpoint loop and assembles the result.
  SolveResult run();

  /// One simplification step on an equation whose guard is discharged.  Does
  /// not mutate the store; instantiations and decompositions are described in
  /// the result.
  SimplifyResult simplify(const HomogeneousEq& eq) const;

  /// Pattern-unification attempt on an equation with a meta-headed side.
  TrySolveResult try_solve(const HomogeneousEq& eq) const;

  /// Eta-expands a meta whose type telescope ends in a pair type (fresh metas
  /// for the components) or a function type (fresh meta under a lambda).
  /// Returns true when an instantiation was recorded.
  bool eta_expand_meta(MetaId id);

  const Signature& signature() const { return sig_; }
  const MetaSubst& solution() const { return theta_; }

  /// True when both store entries are solved; solve_all uses it to report
  /// which original constraints were discharged.
  bool solved_pair(EqId a, EqId b) const;
  /// Current substitution applied to every type of a context.
  Context theta_context(const Context& ctx) const;

 private:
  friend class ConstraintStore;

  Term apply_theta(const Term& t) const;
  Context apply_theta_ctx(const Context& ctx) const;
  HomogeneousEq apply_theta_eq(const HomogeneousEq& eq) const;

  void bind(MetaId id, Term instantiation);
  void process(EqId id);
  void fail(const std::string& diagnostic);
  bool try_lockstep(EqId waiter, EqId guard);
  void index_type_deps(MetaId entry);

  Signature sig_;
  const DefEnv& defs_;
  SolveOptions opts_;
  MetaSubst theta_;
  std::unique_ptr<ConstraintStore> store_;
  // meta -> signature entries whose stored type may mention it (append-only,
  // entries may go stale; bind re-checks before rewriting)
  std::map<MetaId, std::vector<MetaId>> type_deps_;
  bool failed_ = false;
  std::string diagnostic_;
  std::size_t steps_ = 0;
};

}  // namespace tog
