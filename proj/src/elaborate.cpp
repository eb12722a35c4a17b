#include "tog/elaborate.hpp"

#include "tog/normalize.hpp"

namespace tog {

namespace {

// Threads the signature through one traversal.  Every rule follows the same
// recipe: elaborate the subterms, construct the approximated term and its
// inferred type from the results, add a fresh meta standing for the
// elaborated term, and emit the constraint tying the two together.  Each
// call returns its constraints with its own result constraint first and the
// subterm constraints after it, left to right.
class Elaborator {
 public:
  Elaborator(Signature sig, const DefEnv& defs) : sig_(std::move(sig)), defs_(defs) {}

  Term fresh(const Context& ctx, const Term& type) {
    MetaId id = sig_.extend(telescope(ctx, type));
    return apply_to_context_vars(Head::mk_meta(id), ctx);
  }

  std::pair<Term, std::vector<Constraint>> check(const Context& ctx, const Term& t,
                                                 const Term& type) {
    switch (t.kind()) {
      case Term::Kind::Set:
        return wrap(ctx, t, Term::set(), type, {});
      case Term::Kind::Bool:
      case Term::Kind::Nat:
        return wrap(ctx, t, Term::set(), type, {});
      case Term::Kind::True:
      case Term::Kind::False:
        return wrap(ctx, t, Term::boolean(), type, {});
      case Term::Kind::Zero:
        return wrap(ctx, t, Term::nat(), type, {});
      case Term::Kind::Suc: {
        auto [arg, cs] = check(ctx, t.suc_arg(), Term::nat());
        return wrap(ctx, Term::suc(arg), Term::nat(), type, std::move(cs));
      }
      case Term::Kind::Pi: {
        auto [dom, cs_dom] = check(ctx, t.domain(), Term::set());
        auto [cod, cs_cod] = check(ctx.extended(t.hint(), dom), t.codomain(), Term::set());
        std::vector<Constraint> cs = concat(std::move(cs_dom), std::move(cs_cod));
        return wrap(ctx, Term::pi(dom, cod, t.hint()), Term::set(), type, std::move(cs));
      }
      case Term::Kind::Prod: {
        auto [l, cs_l] = check(ctx, t.left(), Term::set());
        auto [r, cs_r] = check(ctx, t.right(), Term::set());
        return wrap(ctx, Term::prod(l, r), Term::set(), type,
                    concat(std::move(cs_l), std::move(cs_r)));
      }
      case Term::Kind::Lam: {
        // Metas for the domain and the codomain family, then the body.
        Term dom = fresh(ctx, Term::set());
        Context ctx1 = ctx.extended(t.hint(), dom);
        Term cod = fresh(ctx1, Term::set());
        auto [body, cs] = check(ctx1, t.body(), cod);
        Term constructed = Term::lam(body, t.hint());
        Term ctype = Term::pi(dom, cod, t.hint());
        return wrap(ctx, constructed, ctype, type, std::move(cs));
      }
      case Term::Kind::Pair: {
        Term lty = fresh(ctx, Term::set());
        Term rty = fresh(ctx, Term::set());
        auto [a, cs_a] = check(ctx, t.first(), lty);
        auto [b, cs_b] = check(ctx, t.second(), rty);
        return wrap(ctx, Term::pair(a, b), Term::prod(lty, rty), type,
                    concat(std::move(cs_a), std::move(cs_b)));
      }
      case Term::Kind::Neutral: {
        auto [term, itype, cs] = infer(ctx, t);
        return wrap(ctx, term, itype, type, std::move(cs));
      }
    }
    throw InternalError("unreachable term kind in elaborate");
  }

  std::tuple<Term, Term, std::vector<Constraint>> infer(const Context& ctx, const Term& neutral) {
    if (!neutral.is_neutral()) throw InternalError("elaborate_infer on a canonical term");
    return infer_spine(ctx, neutral.head(), neutral.elims(), neutral.elims().size());
  }

  Signature take_signature() { return std::move(sig_); }

 private:
  std::tuple<Term, Term, std::vector<Constraint>> infer_spine(const Context& ctx, const Head& h,
                                                              const std::vector<Elim>& elims,
                                                              std::size_t count) {
    if (count == 0) {
      switch (h.kind) {
        case HeadKind::Var:
          return {Term::neutral(h), lookup_var(ctx, h.var), {}};
        case HeadKind::Meta:
          return {Term::neutral(h), sig_.type_of(h.meta), {}};
        case HeadKind::Def:
          return {Term::neutral(h), defs_.lookup(h.def).type, {}};
      }
      throw InternalError("unreachable head kind");
    }

    Term prefix = Term::neutral(h, std::vector<Elim>(elims.begin(), elims.begin() + (count - 1)));
    const Elim& last = elims[count - 1];
    switch (last.kind()) {
      case Elim::Kind::App: {
        // Domain and codomain-family metas first.  The argument is
        // elaborated before the function; its result meta lands earlier in
        // the signature, while the constraints list the function first.
        Term dom = fresh(ctx, Term::set());
        Context ctx1 = ctx.extended("y", dom);
        Term cod = fresh(ctx1, Term::set());
        auto [arg, cs_arg] = check(ctx, last.argument(), dom);
        auto [fn, cs_fn] = check(ctx, prefix, Term::pi(dom, cod, "y"));
        Term term = eliminate(fn, Elim::app(arg));
        Term type = subst_var(cod, 0, arg);
        return {term, type, concat(std::move(cs_fn), std::move(cs_arg))};
      }
      case Elim::Kind::If: {
        Context ctx_bool = ctx.extended(last.hint(), Term::boolean());
        auto [motive, cs_m] = check(ctx_bool, last.motive(), Term::set());
        auto [scrut, cs_s] = check(ctx, prefix, Term::boolean());
        auto [thn, cs_t] = check(ctx, last.then_branch(), subst_var(motive, 0, Term::true_()));
        auto [els, cs_e] = check(ctx, last.else_branch(), subst_var(motive, 0, Term::false_()));
        Term term = eliminate(scrut, Elim::if_then_else(motive, thn, els, last.hint()));
        Term type = subst_var(motive, 0, scrut);
        std::vector<Constraint> cs = concat(std::move(cs_m), std::move(cs_s));
        cs = concat(std::move(cs), std::move(cs_t));
        cs = concat(std::move(cs), std::move(cs_e));
        return {term, type, std::move(cs)};
      }
      case Elim::Kind::Fst:
      case Elim::Kind::Snd: {
        Term lty = fresh(ctx, Term::set());
        Term rty = fresh(ctx, Term::set());
        auto [p, cs] = check(ctx, prefix, Term::prod(lty, rty));
        Term term = eliminate(p, last);
        Term type = last.kind() == Elim::Kind::Fst ? lty : rty;
        return {term, type, std::move(cs)};
      }
    }
    throw InternalError("unreachable elim kind");
  }

  // Steps (b) and (c) of the recipe: fresh result meta plus the constraint
  // equating it to the constructed term.
  std::pair<Term, std::vector<Constraint>> wrap(const Context& ctx, Term constructed, Term ctype,
                                                const Term& target, std::vector<Constraint> subs) {
    Term result = fresh(ctx, target);
    std::vector<Constraint> cs;
    cs.reserve(subs.size() + 1);
    cs.push_back(Constraint{ctx, std::move(constructed), std::move(ctype), result, target});
    for (auto& c : subs) cs.push_back(std::move(c));
    return {result, std::move(cs)};
  }

  static std::vector<Constraint> concat(std::vector<Constraint> a, std::vector<Constraint> b) {
    a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    return a;
  }

  Signature sig_;
  const DefEnv& defs_;
};

}  // namespace

std::pair<Signature, Term> fresh_meta(const Signature& sig, const Context& ctx, const Term& type) {
  Signature out = sig;
  MetaId id = out.extend(telescope(ctx, type));
  return {std::move(out), apply_to_context_vars(Head::mk_meta(id), ctx)};
}

ElabOutput elaborate_check(const Signature& sig, const DefEnv& defs, const Context& ctx,
                           const Term& t, const Term& type) {
  std::size_t before = sig.size();
  Elaborator el(sig, defs);
  auto [term, cs] = el.check(ctx, t, type);
  ElabOutput out;
  out.signature = el.take_signature();
  out.term = std::move(term);
  out.constraints = std::move(cs);
  out.fresh_metas = out.signature.size() - before;
  return out;
}

ElabOutput elaborate_infer(const Signature& sig, const DefEnv& defs, const Context& ctx,
                           const Term& neutral) {
  std::size_t before = sig.size();
  Elaborator el(sig, defs);
  auto [term, itype, cs] = el.infer(ctx, neutral);
  ElabOutput out;
  out.signature = el.take_signature();
  out.term = std::move(term);
  out.constraints = std::move(cs);
  out.inferred_type = std::move(itype);
  out.fresh_metas = out.signature.size() - before;
  return out;
}

ElabOutput elaborate_type(const Signature& sig, const DefEnv& defs, const Context& ctx,
                          const Term& type_expr) {
  return elaborate_check(sig, defs, ctx, type_expr, Term::set());
}

ElabOutput elaborate_opaque(const Signature& sig, const DefEnv& defs, const Context& ctx,
                            const Term& t, const Term& type) {
  (void)defs;
  Signature out_sig = sig;
  MetaId alpha = out_sig.extend(telescope(ctx, type));
  Term alpha_spine = apply_to_context_vars(Head::mk_meta(alpha), ctx);
  MetaId beta = out_sig.extend(telescope(ctx, Term::set()));
  Term beta_spine = apply_to_context_vars(Head::mk_meta(beta), ctx);

  ElabOutput out;
  out.term = alpha_spine;
  out.constraints = {Constraint{ctx, alpha_spine, type, t, beta_spine}};
  out.signature = std::move(out_sig);
  out.fresh_metas = 2;
  return out;
}

}  // namespace tog
