#include "doctest.h"
#include "tog/print.hpp"
#include "tog/typecheck.hpp"

using namespace tog;

namespace {

DefEnv bool_or_nat_defs() {
  DefEnv defs;
  Term body = Term::lam(
      Term::neutral(Head::mk_var(0),
                    {Elim::if_then_else(Term::set(), Term::boolean(), Term::nat(), "y")}),
      "b");
  defs.add("BoolOrNat",
           Definition{Term::pi(Term::boolean(), Term::set(), "b"), std::move(body)});
  return defs;
}

const Signature kSig;
const DefEnv kDefs;
const Context kCtx;

}  // namespace

TEST_CASE("checking canonical constants") {
  CHECK(check(kSig, kDefs, kCtx, Term::true_(), Term::boolean()).ok());
  CHECK(check(kSig, kDefs, kCtx, Term::false_(), Term::boolean()).ok());
  CHECK(check(kSig, kDefs, kCtx, Term::boolean(), Term::set()).ok());
  CHECK(check(kSig, kDefs, kCtx, Term::set(), Term::set()).ok());
  CHECK(check(kSig, kDefs, kCtx, Term::zero(), Term::nat()).ok());
  CHECK(check(kSig, kDefs, kCtx, Term::suc(Term::zero()), Term::nat()).ok());

  CheckResult r = check(kSig, kDefs, kCtx, Term::true_(), Term::set());
  CHECK(r.verdict == Verdict::No);
}

TEST_CASE("checking functions and pairs") {
  CHECK(check(kSig, kDefs, kCtx, Term::lam(Term::var(0)),
              Term::pi(Term::boolean(), Term::boolean()))
            .ok());
  CHECK(check(kSig, kDefs, kCtx, Term::pi(Term::boolean(), Term::nat()), Term::set()).ok());
  CHECK(check(kSig, kDefs, kCtx, Term::pair(Term::true_(), Term::zero()),
              Term::prod(Term::boolean(), Term::nat()))
            .ok());
  // dependent: (A : Set) -> A -> A inhabited by \A -> \a -> a
  Term poly_id_type = Term::pi(Term::set(), Term::pi(Term::var(0), Term::var(1)), "A");
  CHECK(check(kSig, kDefs, kCtx, Term::lam(Term::lam(Term::var(0), "a"), "A"), poly_id_type).ok());
  // body out of scope of its annotation
  CHECK(check(kSig, kDefs, kCtx, Term::lam(Term::zero()),
              Term::pi(Term::boolean(), Term::boolean()))
            .verdict == Verdict::No);
}

TEST_CASE("checking against a blocked type is not a mismatch") {
  DefEnv defs = bool_or_nat_defs();
  Signature sig;
  sig.extend(Term::boolean());
  Term blocked_type = Term::neutral(Head::mk_def("BoolOrNat"), {Elim::app(Term::meta(0))});
  CheckResult r = check(sig, defs, kCtx, Term::true_(), blocked_type);
  CHECK(r.verdict == Verdict::Blocked);
  CHECK(r.blockers == std::set<MetaId>{0});
}

TEST_CASE("inference of heads") {
  Context ctx;
  ctx.push("x", Term::boolean());
  InferResult r = infer(kSig, kDefs, ctx, Term::var(0));
  REQUIRE(r.ok());
  CHECK(r.type == Term::boolean());

  Signature sig;
  sig.extend(Term::boolean());
  r = infer(sig, kDefs, kCtx, Term::meta(0));
  REQUIRE(r.ok());
  CHECK(r.type == Term::boolean());

  CHECK_THROWS_AS(infer(kSig, kDefs, kCtx, Term::var(0)), ScopeError);
}

TEST_CASE("inference through an application with a computing codomain") {
  // f : (x : Bool) -> if x / y. Set then Bool else Nat
  Context ctx;
  Term codomain = Term::neutral(
      Head::mk_var(0), {Elim::if_then_else(Term::set(), Term::boolean(), Term::nat(), "y")});
  ctx.push("f", Term::pi(Term::boolean(), codomain, "x"));

  Term f_true = Term::neutral(Head::mk_var(0), {Elim::app(Term::true_())});
  InferResult r = infer(kSig, kDefs, ctx, f_true);
  REQUIRE(r.ok());
  CHECK(r.type == Term::boolean());

  Term f_false = Term::neutral(Head::mk_var(0), {Elim::app(Term::false_())});
  r = infer(kSig, kDefs, ctx, f_false);
  REQUIRE(r.ok());
  CHECK(r.type == Term::nat());

  // applying a non-function
  Context ctx2;
  ctx2.push("b", Term::boolean());
  InferResult bad = infer(kSig, kDefs, ctx2,
                          Term::neutral(Head::mk_var(0), {Elim::app(Term::true_())}));
  CHECK(bad.verdict == Verdict::No);
}

TEST_CASE("inference of if-eliminations returns the instantiated motive") {
  Context ctx;
  ctx.push("b", Term::boolean());
  // if b / y. Set then Bool else Nat  :  Set
  Term t = Term::neutral(Head::mk_var(0),
                         {Elim::if_then_else(Term::set(), Term::boolean(), Term::nat(), "y")});
  InferResult r = infer(kSig, kDefs, ctx, t);
  REQUIRE(r.ok());
  CHECK(r.type == Term::set());

  // dependent motive: if b / y. (if y /_.Set then Bool else Nat) then true else zero
  Term motive = Term::neutral(
      Head::mk_var(0), {Elim::if_then_else(Term::set(), Term::boolean(), Term::nat(), "z")});
  Term dep = Term::neutral(
      Head::mk_var(0), {Elim::if_then_else(motive, Term::true_(), Term::zero(), "y")});
  InferResult rd = infer(kSig, kDefs, ctx, dep);
  REQUIRE(rd.ok());
  // type is the motive at the scrutinee b, still stuck on the variable
  CHECK(rd.type == Term::neutral(Head::mk_var(0), {Elim::if_then_else(Term::set(), Term::boolean(),
                                                                      Term::nat(), "z")}));
}

TEST_CASE("conversion is type-directed and respects function eta") {
  Context ctx;
  ctx.push("f", Term::pi(Term::boolean(), Term::boolean()));
  Term eta_expanded = Term::lam(Term::neutral(Head::mk_var(1), {Elim::app(Term::var(0))}));
  CHECK(convert(kSig, kDefs, ctx, eta_expanded, Term::var(0),
                Term::pi(Term::boolean(), Term::boolean()))
            .ok());
}

TEST_CASE("conversion respects pair eta") {
  Context ctx;
  ctx.push("p", Term::prod(Term::boolean(), Term::nat()));
  Term repacked = Term::pair(Term::neutral(Head::mk_var(0), {Elim::fst()}),
                             Term::neutral(Head::mk_var(0), {Elim::snd()}));
  CHECK(convert(kSig, kDefs, ctx, repacked, Term::var(0), Term::prod(Term::boolean(), Term::nat()))
            .ok());
}

TEST_CASE("conversion base cases") {
  CHECK(convert(kSig, kDefs, kCtx, Term::true_(), Term::true_(), Term::boolean()).ok());
  CHECK(convert(kSig, kDefs, kCtx, Term::true_(), Term::false_(), Term::boolean()).verdict ==
        Verdict::No);
  CHECK(convert(kSig, kDefs, kCtx, Term::suc(Term::zero()), Term::suc(Term::zero()), Term::nat())
            .ok());
  CHECK(convert(kSig, kDefs, kCtx, Term::pi(Term::boolean(), Term::nat()),
                Term::pi(Term::boolean(), Term::nat()), Term::set())
            .ok());
  CHECK(convert(kSig, kDefs, kCtx, Term::pi(Term::boolean(), Term::nat()),
                Term::pi(Term::nat(), Term::nat()), Term::set())
            .verdict == Verdict::No);
}

TEST_CASE("conversion against an uninstantiated meta blocks") {
  Signature sig;
  sig.extend(Term::boolean());
  CheckResult r = convert(sig, kDefs, kCtx, Term::true_(), Term::meta(0), Term::boolean());
  CHECK(r.verdict == Verdict::Blocked);
  CHECK(r.blockers == std::set<MetaId>{0});
  // identical meta spines are reflexively equal, not blocked
  CHECK(convert(sig, kDefs, kCtx, Term::meta(0), Term::meta(0), Term::boolean()).ok());
}

TEST_CASE("neutral conversion compares heads then spines") {
  Context ctx;
  ctx.push("x", Term::boolean());
  ctx.push("y", Term::boolean());
  InferResult same = convert_neutral(kSig, kDefs, ctx, Term::var(0), Term::var(0));
  REQUIRE(same.ok());
  CHECK(same.type == Term::boolean());

  CHECK(convert_neutral(kSig, kDefs, ctx, Term::var(0), Term::var(1)).verdict == Verdict::No);

  Context ctx2;
  ctx2.push("f", Term::pi(Term::boolean(), Term::nat(), "x"));
  Term app = Term::neutral(Head::mk_var(0), {Elim::app(Term::true_())});
  InferResult r = convert_neutral(kSig, kDefs, ctx2, app, app);
  REQUIRE(r.ok());
  CHECK(r.type == Term::nat());

  Term app2 = Term::neutral(Head::mk_var(0), {Elim::app(Term::false_())});
  CHECK(convert_neutral(kSig, kDefs, ctx2, app, app2).verdict == Verdict::No);
  CHECK(convert_neutral(kSig, kDefs, ctx2, Term::var(0), app).verdict == Verdict::No);
}

TEST_CASE("context validity") {
  Signature sig;
  Context good;
  good.push("A", Term::set());
  good.push("x", Term::var(0));
  CHECK(check_context(sig, kDefs, good).ok());

  Context bad;
  bad.push("x", Term::true_());
  CheckResult r = check_context(sig, kDefs, bad);
  CHECK(r.verdict == Verdict::No);
  CHECK(r.reason.find("x") != std::string::npos);
}

TEST_CASE("signature validity") {
  Signature empty;
  CHECK(check_signature(empty, kDefs).ok());

  Signature sig;
  sig.extend(Term::set());
  sig.extend(Term::meta(0));  // ?1 : ?0, well-formed in the prefix
  CHECK(check_signature(sig, kDefs).ok());

  Signature bad;
  bad.extend(Term::true_());
  CHECK(check_signature(bad, kDefs).verdict == Verdict::No);

  Signature open_type;
  open_type.extend(Term::var(0));
  CHECK(check_signature(open_type, kDefs).verdict == Verdict::No);
}

TEST_CASE("meta substitution validity") {
  Signature sigma;
  sigma.extend(Term::boolean());
  MetaSubst theta;
  theta.bind(0, Term::true_());
  CHECK(check_meta_subst(Signature{}, kDefs, theta, sigma).ok());

  MetaSubst missing;
  CHECK(check_meta_subst(Signature{}, kDefs, missing, sigma).verdict == Verdict::No);

  MetaSubst ill;
  ill.bind(0, Term::zero());
  CheckResult r = check_meta_subst(Signature{}, kDefs, ill, sigma);
  CHECK(r.verdict == Verdict::No);
  CHECK(r.reason.find("?0") != std::string::npos);

  // the stored type is instantiated before checking
  Signature sigma2;
  sigma2.extend(Term::set());
  sigma2.extend(Term::meta(0));  // ?1 : ?0
  MetaSubst theta2;
  theta2.bind(0, Term::boolean());
  theta2.bind(1, Term::false_());
  CHECK(check_meta_subst(Signature{}, kDefs, theta2, sigma2).ok());
}
