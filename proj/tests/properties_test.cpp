#include <vector>

#include "doctest.h"
#include "support/generators.hpp"
#include "tog/elaborate.hpp"
#include "tog/normalize.hpp"
#include "tog/print.hpp"
#include "tog/typecheck.hpp"
#include "tog/unify.hpp"

using namespace tog;
using testgen::RandomGen;

namespace {

Term rename_metas(const Term& t, std::int64_t offset);

Elim rename_metas_elim(const Elim& e, std::int64_t offset) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return Elim::app(rename_metas(e.argument(), offset));
    case Elim::Kind::If:
      return Elim::if_then_else(rename_metas(e.motive(), offset),
                                rename_metas(e.then_branch(), offset),
                                rename_metas(e.else_branch(), offset), e.hint());
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return e;
  }
  throw InternalError("unreachable");
}

Term rename_metas(const Term& t, std::int64_t offset) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return t;
    case Term::Kind::Suc:
      return Term::suc(rename_metas(t.suc_arg(), offset));
    case Term::Kind::Pi:
      return Term::pi(rename_metas(t.domain(), offset), rename_metas(t.codomain(), offset),
                      t.hint());
    case Term::Kind::Lam:
      return Term::lam(rename_metas(t.body(), offset), t.hint());
    case Term::Kind::Prod:
      return Term::prod(rename_metas(t.left(), offset), rename_metas(t.right(), offset));
    case Term::Kind::Pair:
      return Term::pair(rename_metas(t.first(), offset), rename_metas(t.second(), offset));
    case Term::Kind::Neutral: {
      Head h = t.head();
      if (h.kind == HeadKind::Meta)
        h.meta = static_cast<MetaId>(static_cast<std::int64_t>(h.meta) + offset);
      std::vector<Elim> elims;
      for (const Elim& e : t.elims()) elims.push_back(rename_metas_elim(e, offset));
      return Term::neutral(std::move(h), std::move(elims));
    }
  }
  throw InternalError("unreachable");
}

}  // namespace

TEST_CASE("substitution preserves beta-normal forms on generated triples") {
  RandomGen gen(101);
  for (int i = 0; i < 200; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term a = gen.random_type(ctx, 2);
    Context inner = ctx.extended("x", a);
    Term target = gen.random_type(inner, 2);
    Term t = gen.random_term(inner, target, 3);
    Term u = gen.random_term(ctx, a, 3);

    Term result = subst_var(t, 0, u);
    CHECK(is_beta_normal(result, static_cast<std::uint32_t>(ctx.size())));
  }
}

TEST_CASE("variable and meta substitution agree on closed replacements") {
  RandomGen gen(102);
  for (int i = 0; i < 100; ++i) {
    Context empty;
    Term a = gen.random_type(empty, 2);
    Context inner;
    inner.push("x", a);
    Term target = gen.random_type(inner, 2);
    Term t = gen.random_term(inner, target, 3);
    Term u = gen.random_term(empty, a, 3);

    // Replace the variable by a meta, then instantiate the meta.
    Term with_meta = subst_var(t, 0, Term::meta(0));
    CHECK(subst_meta(with_meta, 0, u) == subst_var(t, 0, u));
    // apply_meta_subst takes the same path
    MetaSubst theta;
    theta.bind(0, u);
    CHECK(apply_meta_subst(theta, with_meta) == subst_var(t, 0, u));
  }
}

TEST_CASE("substitutions compose") {
  // t[x:=u][y:=v]  ==  t[y:=v][x := u[y:=v]]   (x inner, y outer, v closed
  // over x), checked against the direct de Bruijn computation.
  RandomGen gen(103);
  for (int i = 0; i < 150; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(2)), 2);
    Term b = gen.random_type(ctx, 2);
    Context ctx_y = ctx.extended("y", b);
    Term a = gen.random_type(ctx_y, 2);
    Context ctx_yx = ctx_y.extended("x", a);

    Term t = gen.random_term(ctx_yx, gen.random_type(ctx_yx, 2), 3);
    Term u = gen.random_term(ctx_y, a, 3);
    Term v = gen.random_term(ctx, b, 3);

    Term lhs = subst_var(subst_var(t, 0, u), 0, v);
    Term rhs = subst_var(subst_var(t, 1, shift(v, 1)), 0, subst_var(u, 0, v));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("whnf is stable on generated terms") {
  RandomGen gen(104);
  Signature sig;
  for (int i = 0; i < 150; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    Blocked once = whnf(sig, gen.defs(), t);
    Blocked twice = whnf(sig, gen.defs(), once.term);
    CHECK(once.term == twice.term);
    CHECK(once.blockers == twice.blockers);
  }
}

TEST_CASE("meta substitution commutes with weak-head normalisation") {
  // Elaboration gives realistic terms with metas plus a substitution that
  // solves them.
  RandomGen gen(105);
  for (int i = 0; i < 80; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(2)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    ElabOutput out = elaborate_check(Signature{}, gen.defs(), ctx, t, type);
    SolveResult r = solve_all(out.signature, gen.defs(), out.constraints);
    if (r.outcome != SolveResult::Outcome::Solved) continue;

    Term direct = whnf(r.signature, gen.defs(), apply_meta_subst(r.solution, out.term)).term;
    Term staged =
        whnf(r.signature, gen.defs(),
             apply_meta_subst(r.solution, whnf(out.signature, gen.defs(), out.term).term))
            .term;
    CHECK(direct == staged);
  }
}

TEST_CASE("conversion is reflexive on generated well-typed terms") {
  RandomGen gen(106);
  Signature sig;
  for (int i = 0; i < 150; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    REQUIRE(check(sig, gen.defs(), ctx, t, type).ok());
    CHECK(convert(sig, gen.defs(), ctx, t, t, type).ok());
  }
}

TEST_CASE("eta expansion law for generated functions") {
  RandomGen gen(107);
  Signature sig;
  for (int i = 0; i < 100; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term domain = gen.random_type(ctx, 1);
    Context inner = ctx.extended("x", domain);
    Term codomain = gen.random_type(inner, 1);
    Term fn_type = Term::pi(domain, codomain, "x");
    Term f = gen.random_term(ctx, fn_type, 3);

    Term expanded = Term::lam(elim_app(shift(f, 1), Term::var(0)), "x");
    CHECK(convert(sig, gen.defs(), ctx, expanded, f, fn_type).ok());
  }
}

TEST_CASE("subject reduction at the judgment level") {
  RandomGen gen(108);
  Signature sig;
  for (int i = 0; i < 150; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    REQUIRE(check(sig, gen.defs(), ctx, t, type).ok());
    Term reduced = whnf(sig, gen.defs(), t).term;
    CHECK(check(sig, gen.defs(), ctx, reduced, type).ok());
  }
}

TEST_CASE("checking a neutral agrees with inferring its type") {
  RandomGen gen(109);
  Signature sig;
  int seen = 0;
  for (int i = 0; i < 400 && seen < 120; ++i) {
    Context ctx = gen.random_context(1 + static_cast<int>(gen.pick(3)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    if (!t.is_neutral()) continue;
    ++seen;
    InferResult inferred = infer(sig, gen.defs(), ctx, t);
    REQUIRE(inferred.ok());
    CHECK(convert(sig, gen.defs(), ctx, inferred.type, type, Term::set()).verdict !=
          Verdict::No);
    CHECK(check(sig, gen.defs(), ctx, t, inferred.type).ok());
    // a definitely different type must be rejected
    Term wrong = Term::pi(type, shift(type, 1), "w");
    if (convert(sig, gen.defs(), ctx, inferred.type, wrong, Term::set()).verdict == Verdict::No)
      CHECK(check(sig, gen.defs(), ctx, t, wrong).verdict == Verdict::No);
  }
  CHECK(seen > 0);
}

TEST_CASE("elaboration extends the signature monotonically") {
  RandomGen gen(110);
  Signature sig;
  sig.extend(Term::boolean());
  sig.extend(Term::nat());
  for (int i = 0; i < 60; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(2)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    ElabOutput out = elaborate_check(sig, gen.defs(), ctx, t, type);
    REQUIRE(out.signature.size() >= sig.size());
    for (MetaId m = 0; m < sig.size(); ++m) CHECK(out.signature.type_of(m) == sig.type_of(m));
  }
}

TEST_CASE("elaboration is a function of its input modulo the meta counter") {
  RandomGen gen(111);
  for (int i = 0; i < 60; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(2)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);

    ElabOutput plain = elaborate_check(Signature{}, gen.defs(), ctx, t, type);
    Signature shifted;
    shifted.extend(Term::boolean());  // displaces the counter by one
    ElabOutput offset = elaborate_check(shifted, gen.defs(), ctx, t, type);

    CHECK(plain.fresh_metas == offset.fresh_metas);
    CHECK(rename_metas(offset.term, -1) == plain.term);
    REQUIRE(plain.constraints.size() == offset.constraints.size());
    for (std::size_t k = 0; k < plain.constraints.size(); ++k) {
      CHECK(rename_metas(offset.constraints[k].lhs_term, -1) == plain.constraints[k].lhs_term);
      CHECK(rename_metas(offset.constraints[k].rhs_term, -1) == plain.constraints[k].rhs_term);
      CHECK(rename_metas(offset.constraints[k].lhs_type, -1) == plain.constraints[k].lhs_type);
      CHECK(rename_metas(offset.constraints[k].rhs_type, -1) == plain.constraints[k].rhs_type);
    }
  }
}

TEST_CASE("elaboration pipeline on a random corpus: solved, sound, well-formed, linear") {
  RandomGen gen(112);
  Signature sig;
  int solved = 0;
  for (int i = 0; i < 60; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term type = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, type, 3);
    REQUIRE(check(sig, gen.defs(), ctx, t, type).ok());

    ElabOutput out = elaborate_check(sig, gen.defs(), ctx, t, type);

    // well-formedness of the output
    CHECK(check(out.signature, gen.defs(), ctx, out.term, type).ok());
    for (const Constraint& c : out.constraints) {
      CHECK(check(out.signature, gen.defs(), c.ctx, c.lhs_term, c.lhs_type).ok());
      CHECK(check(out.signature, gen.defs(), c.ctx, c.rhs_term, c.rhs_type).ok());
    }

    // linearity
    CHECK(out.fresh_metas + out.constraints.size() <= 4 * term_size(t));

    // completeness on well-typed inputs
    SolveOptions opts;
    opts.max_steps = 200000;
    SolveResult r = solve_all(out.signature, gen.defs(), out.constraints, opts);
    REQUIRE(r.outcome == SolveResult::Outcome::Solved);
    ++solved;

    // soundness: the substituted approximation is convertible to the input
    Term elaborated = apply_meta_subst(r.solution, out.term);
    CHECK(convert(r.signature, gen.defs(), ctx, t, elaborated, type).ok());

    // solution typedness
    CHECK(verify_solve_result(r, gen.defs()).ok());
  }
  CHECK(solved == 60);
}

TEST_CASE("on meta-free inputs the solver decides like the declarative checker") {
  // Pair generated terms with independently generated types; whether the
  // pipeline solves or fails must match the declarative verdict exactly.
  RandomGen gen(113);
  const Signature empty_sig;
  std::size_t agreed_yes = 0, agreed_no = 0;
  for (int i = 0; i < 250; ++i) {
    Context ctx = gen.random_context(static_cast<int>(gen.pick(3)), 2);
    Term generated_at = gen.random_type(ctx, 2);
    Term t = gen.random_term(ctx, generated_at, 3);
    Term against = gen.pick(2) == 0 ? generated_at : gen.random_type(ctx, 2);

    CheckResult verdict = check(empty_sig, gen.defs(), ctx, t, against);
    REQUIRE(verdict.verdict != Verdict::Blocked);  // no metas anywhere

    ElabOutput out = elaborate_check(empty_sig, gen.defs(), ctx, t, against);
    SolveOptions opts;
    opts.max_steps = 1000000;
    SolveResult r = solve_all(out.signature, gen.defs(), out.constraints, opts);

    CAPTURE(print_term(t, ctx));
    CAPTURE(print_term(against, ctx));
    if (verdict.ok()) {
      CHECK(r.outcome == SolveResult::Outcome::Solved);
      ++agreed_yes;
    } else {
      CHECK(r.outcome != SolveResult::Outcome::Solved);
      ++agreed_no;
    }
  }
  CHECK(agreed_yes > 0);
  CHECK(agreed_no > 0);
}

TEST_CASE("exhaustive enumeration agrees with the declarative checker") {
  // Everything the enumerator produces checks; spot boundary sizes.
  Context empty;
  for (const Term& type : testgen::enumerate_types(4)) {
    for (const Term& t : testgen::enumerate_checked(empty, type, 5)) {
      CAPTURE(print_term(type));
      CAPTURE(print_term(t));
      CHECK(check(Signature{}, DefEnv{}, empty, t, type).ok());
      CHECK(term_size(t) <= 5);
    }
  }
}
