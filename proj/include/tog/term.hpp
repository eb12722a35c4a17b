#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Core syntax of the theory: beta-normal terms, contexts, signatures,
// meta-variable substitutions and the top-level definition environment.
//
// Terms are split into canonical forms and neutral forms (a head applied to a
// spine of eliminations).  The split makes beta-redexes unrepresentable: an
// abstraction can never sit in the head of an application, a boolean literal
// can never be scrutinised by `if`, and a pair can never sit under a
// projection.  Bound variables are de Bruijn indices; binder names are kept
// as printing hints only and are ignored by structural equality.

namespace tog {

using MetaId = std::uint32_t;

class Term;
class Elim;

/// Thrown when an operation is handed arguments that violate an internal
/// invariant (e.g. eliminating a canonical non-function).  Indicates a bug in
/// the caller, not a user-level type error.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown on out-of-scope variables, meta-variables or definition names.
class ScopeError : public std::runtime_error {
 public:
  explicit ScopeError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Heads

enum class HeadKind : std::uint8_t { Var, Meta, Def };

/// Head of a neutral term: a bound variable, a meta-variable, or a top-level
/// constant.
struct Head {
  HeadKind kind;
  std::uint32_t var = 0;  // de Bruijn index, Var only
  MetaId meta = 0;        // Meta only
  std::string def;        // Def only

  static Head mk_var(std::uint32_t index) { return Head{HeadKind::Var, index, 0, {}}; }
  static Head mk_meta(MetaId id) { return Head{HeadKind::Meta, 0, id, {}}; }
  static Head mk_def(std::string name) { return Head{HeadKind::Def, 0, 0, std::move(name)}; }

  bool operator==(const Head& other) const;
  bool operator!=(const Head& other) const { return !(*this == other); }
};

// ---------------------------------------------------------------------------
// Terms

/// Immutable term tree with cheap value copies (shared representation).
class Term {
 public:
  enum class Kind : std::uint8_t {
    Set,      // universe
    Bool,     // boolean type
    True,
    False,
    Nat,      // opaque naturals (extension)
    Zero,
    Suc,      // successor of a Nat term
    Pi,       // dependent function type, codomain binds one variable
    Lam,      // abstraction, body binds one variable (no annotation)
    Prod,     // non-dependent pair type (extension)
    Pair,     // pair introduction (extension)
    Neutral,  // head + spine of eliminations
  };

  Term() : Term(set()) {}

  static Term set();
  static Term boolean();
  static Term true_();
  static Term false_();
  static Term nat();
  static Term zero();
  static Term suc(Term t);
  static Term pi(Term domain, Term codomain, std::string hint = "x");
  static Term lam(Term body, std::string hint = "x");
  static Term prod(Term left, Term right);
  static Term pair(Term first, Term second);
  static Term neutral(Head head, std::vector<Elim> elims = {});
  static Term var(std::uint32_t index);   // bare Var neutral
  static Term meta(MetaId id);            // bare Meta neutral
  static Term def(std::string name);      // bare Def neutral

  Kind kind() const;
  bool is_neutral() const { return kind() == Kind::Neutral; }

  // Pi
  const Term& domain() const;
  const Term& codomain() const;
  // Lam / Suc
  const Term& body() const;
  const Term& suc_arg() const;
  // Prod / Pair
  const Term& left() const;
  const Term& right() const;
  const Term& first() const;
  const Term& second() const;
  // Neutral
  const Head& head() const;
  const std::vector<Elim>& elims() const;

  /// Binder display hint (Pi/Lam); purely cosmetic.
  const std::string& hint() const;

  /// Structural equality up to binder hints (alpha-equivalence under the de
  /// Bruijn representation).
  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }

 private:
  struct Rep;
  explicit Term(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const Rep> rep_;
};

/// Spine elimination applied to a neutral head.
class Elim {
 public:
  enum class Kind : std::uint8_t { App, If, Fst, Snd };

  static Elim app(Term argument);
  /// `if _ /x.motive then thenBranch else elseBranch`; the motive binds one
  /// variable (the scrutinee).
  static Elim if_then_else(Term motive, Term then_branch, Term else_branch,
                           std::string hint = "x");
  static Elim fst();
  static Elim snd();

  Kind kind() const;
  const Term& argument() const;     // App
  const Term& motive() const;       // If
  const Term& then_branch() const;  // If
  const Term& else_branch() const;  // If
  const std::string& hint() const;  // If motive binder

  bool operator==(const Elim& other) const;
  bool operator!=(const Elim& other) const { return !(*this == other); }

 private:
  struct Rep;
  explicit Elim(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const Rep> rep_;
};

// ---------------------------------------------------------------------------
// Contexts

/// Ordered typing context; entry 0 is the outermost binding.  Each entry's
/// type lives in the prefix before it.
class Context {
 public:
  struct Entry {
    std::string name;
    Term type;
  };

  Context() = default;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  void push(std::string name, Term type);
  /// Value-style extension, used where the rules write `Gamma, x : A`.
  Context extended(std::string name, Term type) const;

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

/// Type of the variable with de Bruijn index `index`, weakened so that it is
/// well-formed in the whole context.  Throws ScopeError when out of range.
Term lookup_var(const Context& ctx, std::uint32_t index);

// ---------------------------------------------------------------------------
// Signatures

/// Insertion-ordered store of meta-variable typings.  Entries are only ever
/// added, never removed or retyped; ids are dense and double as positions.
class Signature {
 public:
  Signature() = default;

  std::size_t size() const { return types_.size(); }
  bool contains(MetaId id) const { return id < types_.size(); }
  const Term& type_of(MetaId id) const;

  /// Adds a fresh meta-variable with the given closed type and returns its id.
  MetaId extend(Term closed_type);

  /// Replaces the stored type of `id`.  Only used by the solver to keep
  /// signature types up to date under the current substitution; the entry set
  /// itself stays extension-only.
  void update_type(MetaId id, Term type);

  /// Entries whose stored type mentions a meta-variable.  Lets the solver
  /// index type dependencies without scanning the whole store.
  const std::set<MetaId>& open_entries() const { return open_entries_; }

 private:
  void note_open(MetaId id, const Term& type);

  std::vector<Term> types_;
  std::set<MetaId> open_entries_;
};

/// Functional flavour of signature extension: returns the extended signature
/// together with the fresh id.
std::pair<Signature, MetaId> extend_signature(const Signature& sig, Term closed_type);

// ---------------------------------------------------------------------------
// Meta-variable substitutions

/// Map from meta-variable to closed instantiation term (the solver's theta).
class MetaSubst {
 public:
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  bool contains(MetaId id) const { return map_.count(id) != 0; }
  const Term* lookup(MetaId id) const;
  void bind(MetaId id, Term closed_term);

  const std::map<MetaId, Term>& entries() const { return map_; }

 private:
  std::map<MetaId, Term> map_;
};

// ---------------------------------------------------------------------------
// Top-level definitions

/// Top-level constant: a postulate (no body) or a definition.
struct Definition {
  Term type;                 // closed
  std::optional<Term> body;  // closed; absent for postulates
};

class DefEnv {
 public:
  bool contains(const std::string& name) const;
  const Definition& lookup(const std::string& name) const;
  void add(const std::string& name, Definition def);
  void replace(const std::string& name, Definition def);

  const std::vector<std::pair<std::string, Definition>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, Definition>> entries_;
};

// ---------------------------------------------------------------------------
// Structural queries and helpers

/// Number of syntax nodes; strictly decreasing into subterms.
std::size_t term_size(const Term& t);

/// Shifts free de Bruijn indices >= cutoff by `by` (weakening).
Term shift(const Term& t, std::uint32_t by, std::uint32_t cutoff = 0);

/// True when every free variable index is < depth; closed_term == scoped_under(t, 0).
bool scoped_under(const Term& t, std::uint32_t depth);
bool is_closed(const Term& t);

/// Collects the meta-variables occurring in `t`.
void collect_metas(const Term& t, std::vector<MetaId>& out);
bool mentions_meta(const Term& t, MetaId id);

/// Redex scanner: walks the whole tree and checks the beta-normality
/// invariants together with spine well-formedness.  The representation keeps
/// application-of-lambda, if-of-literal and projection-of-pair
/// unrepresentable, so the walk asserts scoping (indices below `depth` plus
/// binder crossings) and that every node is structurally sound.
bool is_beta_normal(const Term& t, std::uint32_t depth = 0);

/// `Gamma -> A`: closes A over the whole context as an iterated Pi.
Term telescope(const Context& ctx, const Term& target);

/// `t Gamma`: applies `head` to all variables of the context, outermost
/// first.  The result is a neutral term.
Term apply_to_context_vars(Head head, const Context& ctx);

}  // namespace tog
