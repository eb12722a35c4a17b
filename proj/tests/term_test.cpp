#include "doctest.h"
#include "tog/term.hpp"

using namespace tog;

namespace {

Term add_x() {
  // add x  ==  (Def add) applied to (Var x)
  return Term::neutral(Head::mk_def("add"), {Elim::app(Term::var(0))});
}

}  // namespace

TEST_CASE("term_size counts syntax nodes") {
  CHECK(term_size(Term::true_()) == 1);
  CHECK(term_size(Term::pi(Term::boolean(), Term::boolean())) == 3);
  CHECK(term_size(add_x()) == 3);
  CHECK(term_size(Term::suc(Term::zero())) == 2);
  CHECK(term_size(Term::pair(Term::true_(), Term::zero())) == 3);
  Term if_term = Term::neutral(
      Head::mk_var(0), {Elim::if_then_else(Term::set(), Term::boolean(), Term::nat())});
  CHECK(term_size(if_term) == 5);
}

TEST_CASE("term_size decreases strictly into subterms") {
  Term t = Term::pi(Term::prod(Term::boolean(), Term::nat()), Term::lam(Term::var(0)));
  CHECK(term_size(t.domain()) < term_size(t));
  CHECK(term_size(t.codomain()) < term_size(t));
  CHECK(term_size(t.domain().left()) < term_size(t.domain()));
}

TEST_CASE("lookup_var returns the type weakened to the full context") {
  Context ctx;
  ctx.push("x", Term::boolean());
  CHECK(lookup_var(ctx, 0) == Term::boolean());

  Context ctx2;
  ctx2.push("A", Term::set());
  ctx2.push("y", Term::var(0));  // y : A
  CHECK(lookup_var(ctx2, 0) == Term::var(1));  // the type of y mentions A, shifted past y
  CHECK(lookup_var(ctx2, 1) == Term::set());

  Context empty;
  CHECK_THROWS_AS(lookup_var(empty, 0), ScopeError);
}

TEST_CASE("signature extension allocates fresh dense ids") {
  Signature sig;
  auto [sig1, a] = extend_signature(sig, Term::boolean());
  CHECK(a == 0);
  CHECK(sig1.type_of(a) == Term::boolean());

  auto [sig2, b] = extend_signature(sig1, Term::nat());
  CHECK(b == 1);
  CHECK(a != b);
  CHECK(sig2.type_of(a) == Term::boolean());  // prior entries unchanged
  CHECK(sig.size() == 0);                     // input untouched
}

TEST_CASE("telescope closes a type over the context") {
  Context ctx;
  ctx.push("x", Term::nat());
  CHECK(telescope(ctx, Term::boolean()) == Term::pi(Term::nat(), Term::boolean()));

  Context ctx2;
  ctx2.push("A", Term::set());
  ctx2.push("y", Term::var(0));
  // (A : Set) -> (y : A) -> A
  Term expected = Term::pi(Term::set(), Term::pi(Term::var(0), Term::var(1)));
  CHECK(telescope(ctx2, Term::var(1)) == expected);
  CHECK(is_closed(telescope(ctx2, Term::var(1))));
}

TEST_CASE("apply_to_context_vars applies outermost variable first") {
  Context ctx;
  ctx.push("x", Term::nat());
  ctx.push("y", Term::boolean());
  Term spine = apply_to_context_vars(Head::mk_meta(3), ctx);
  REQUIRE(spine.is_neutral());
  REQUIRE(spine.elims().size() == 2);
  CHECK(spine.elims()[0].argument() == Term::var(1));  // x
  CHECK(spine.elims()[1].argument() == Term::var(0));  // y
}

TEST_CASE("structural equality ignores binder hints") {
  Term a = Term::lam(Term::var(0), "x");
  Term b = Term::lam(Term::var(0), "y");
  CHECK(a == b);
  CHECK(Term::pi(Term::boolean(), Term::var(0), "p") == Term::pi(Term::boolean(), Term::var(0), "q"));
  CHECK(Term::lam(Term::var(0)) != Term::lam(Term::var(1)));
}

TEST_CASE("shift renumbers free variables only") {
  // \x -> x (y z)  with y = Var 0, z = Var 1 free
  Term t = Term::lam(Term::neutral(
      Head::mk_var(0), {Elim::app(Term::neutral(Head::mk_var(1), {Elim::app(Term::var(2))}))}));
  Term shifted = shift(t, 3);
  Term expected = Term::lam(Term::neutral(
      Head::mk_var(0), {Elim::app(Term::neutral(Head::mk_var(4), {Elim::app(Term::var(5))}))}));
  CHECK(shifted == expected);
  CHECK(shift(Term::true_(), 5) == Term::true_());
}

TEST_CASE("scoping predicates") {
  CHECK(is_closed(Term::lam(Term::var(0))));
  CHECK(!is_closed(Term::var(0)));
  CHECK(scoped_under(Term::var(0), 1));
  CHECK(!scoped_under(Term::var(1), 1));
  // The if motive binds one variable.
  Term t = Term::neutral(Head::mk_var(0),
                         {Elim::if_then_else(Term::var(1), Term::true_(), Term::false_())});
  CHECK(scoped_under(t, 1));
  CHECK(!scoped_under(t, 0));
}

TEST_CASE("redex scanner accepts representable terms") {
  CHECK(is_beta_normal(Term::lam(Term::var(0))));
  CHECK(is_beta_normal(add_x(), 1));
  CHECK(!is_beta_normal(Term::var(3)));  // out of scope
}

TEST_CASE("collect_metas walks every position") {
  Term t = Term::pi(Term::neutral(Head::mk_meta(1)),
                    Term::neutral(Head::mk_meta(2), {Elim::app(Term::neutral(Head::mk_meta(1)))}));
  std::vector<MetaId> metas;
  collect_metas(t, metas);
  CHECK(metas == std::vector<MetaId>{1, 2, 1});
  CHECK(mentions_meta(t, 2));
  CHECK(!mentions_meta(t, 0));
}

TEST_CASE("def environment") {
  DefEnv defs;
  defs.add("add", Definition{Term::pi(Term::nat(), Term::nat()), std::nullopt});
  CHECK(defs.contains("add"));
  CHECK(!defs.lookup("add").body.has_value());
  CHECK_THROWS_AS(defs.lookup("mul"), ScopeError);
  CHECK_THROWS_AS(defs.add("add", Definition{Term::nat(), std::nullopt}), InternalError);
}
