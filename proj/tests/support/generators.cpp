#include "support/generators.hpp"

#include "tog/normalize.hpp"
#include "tog/typecheck.hpp"

namespace tog::testgen {

namespace {

DefEnv standard_defs() {
  DefEnv defs;
  defs.add("not", Definition{Term::pi(Term::boolean(), Term::boolean(), "b"), std::nullopt});
  defs.add("plus", Definition{Term::pi(Term::nat(), Term::pi(Term::nat(), Term::nat(), "n"), "m"),
                              std::nullopt});
  // when b then Bool else Nat: a type that computes on booleans.
  Term body = Term::lam(
      Term::neutral(Head::mk_var(0), {Elim::if_then_else(Term::set(), Term::boolean(),
                                                         Term::nat(), "y")}),
      "b");
  defs.add("PickType",
           Definition{Term::pi(Term::boolean(), Term::set(), "b"), std::move(body)});
  return defs;
}

}  // namespace

RandomGen::RandomGen(std::uint64_t seed, bool with_defs) : rng_(seed) {
  if (with_defs) defs_ = standard_defs();
}

std::uint64_t RandomGen::pick(std::uint64_t bound) {
  return bound == 0 ? 0 : rng_() % bound;
}

Context RandomGen::random_context(int entries, int depth) {
  Context ctx;
  for (int i = 0; i < entries; ++i) {
    std::string name(1, static_cast<char>('a' + (i % 26)));
    ctx.push(name, random_type(ctx, depth));
  }
  return ctx;
}

Term RandomGen::random_type(const Context& ctx, int depth) {
  const bool deeper = depth > 0;
  switch (pick(deeper ? 8 : 4)) {
    case 0:
    case 1:
      return Term::boolean();
    case 2:
      return Term::nat();
    case 3:
      return Term::set();
    case 4:
    case 5: {
      Term domain = random_type(ctx, depth - 1);
      Context inner = ctx.extended("x", domain);
      return Term::pi(domain, random_type(inner, depth - 1), "x");
    }
    case 6:
      return Term::prod(random_type(ctx, depth - 1), random_type(ctx, depth - 1));
    default: {
      // A type that computes: PickType applied to a boolean term.
      if (defs_.contains("PickType")) {
        Term scrutinee = random_term(ctx, Term::boolean(), 0);
        if (scrutinee.is_neutral())
          return Term::neutral(Head::mk_def("PickType"), {Elim::app(scrutinee)});
        return whnf(sig_, defs_,
                    Term::neutral(Head::mk_def("PickType"), {Elim::app(scrutinee)}))
            .term;
      }
      return Term::boolean();
    }
  }
}

// Tries to produce a neutral term of the requested type from the context and
// the standard definitions; falls back to the provided canonical form.
Term RandomGen::neutral_or(const Context& ctx, const Term& type, int depth, Term fallback) {
  struct Candidate {
    Head head;
    Term head_type;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    std::uint32_t index = static_cast<std::uint32_t>(ctx.size() - 1 - i);
    candidates.push_back({Head::mk_var(index), lookup_var(ctx, index)});
  }
  for (const auto& [name, def] : defs_.entries())
    candidates.push_back({Head::mk_def(name), def.type});

  // Random rotation, then first candidate whose (possibly applied) type
  // converts to the target.
  std::size_t offset = static_cast<std::size_t>(pick(candidates.size() + 1));
  for (std::size_t step = 0; step < candidates.size(); ++step) {
    const Candidate& c = candidates[(step + offset) % candidates.size()];
    Term term = Term::neutral(c.head);
    Term type_so_far = c.head_type;
    for (int k = 0; k < 4; ++k) {
      if (convert(sig_, defs_, ctx, type_so_far, type, Term::set()).ok()) return term;
      Blocked w = whnf(sig_, defs_, type_so_far);
      if (w.term.kind() != Term::Kind::Pi) break;
      Term arg = random_term(ctx, w.term.domain(), depth > 0 ? depth - 1 : 0);
      term = eliminate(term, Elim::app(arg));
      type_so_far = subst_var(w.term.codomain(), 0, arg);
    }
  }
  return fallback;
}

Term RandomGen::random_term(const Context& ctx, const Term& type, int depth) {
  Blocked w = whnf(sig_, defs_, type);
  const Term& ty = w.term;

  // Occasionally eliminate a neutral boolean with a constant motive.
  auto maybe_if_wrap = [&](Term plain) {
    if (depth <= 0 || pick(6) != 0) return plain;
    Term scrutinee = neutral_or(ctx, Term::boolean(), 0, Term::true_());
    if (!scrutinee.is_neutral()) return plain;
    Term other = random_term(ctx, ty, depth - 1);
    return eliminate(scrutinee,
                     Elim::if_then_else(shift(ty, 1), plain, std::move(other), "b"));
  };

  switch (ty.kind()) {
    case Term::Kind::Bool: {
      Term canonical = pick(2) == 0 ? Term::true_() : Term::false_();
      if (depth > 0 && pick(3) == 0) canonical = neutral_or(ctx, ty, depth, canonical);
      return maybe_if_wrap(canonical);
    }
    case Term::Kind::Nat: {
      Term canonical = Term::zero();
      std::uint64_t sucs = pick(3);
      for (std::uint64_t i = 0; i < sucs && depth > 0; ++i) canonical = Term::suc(canonical);
      if (depth > 0 && pick(3) == 0) canonical = neutral_or(ctx, ty, depth, canonical);
      return maybe_if_wrap(canonical);
    }
    case Term::Kind::Set: {
      Term canonical = depth > 0 ? random_type(ctx, depth - 1) : Term::boolean();
      if (depth > 0 && pick(4) == 0) canonical = neutral_or(ctx, ty, depth, canonical);
      return canonical;
    }
    case Term::Kind::Pi: {
      if (depth > 0 && pick(4) == 0) {
        Term neutral = neutral_or(ctx, ty, depth, Term::set());
        if (neutral != Term::set()) return neutral;
      }
      Context inner = ctx.extended(ty.hint(), ty.domain());
      return Term::lam(random_term(inner, ty.codomain(), depth - 1), ty.hint());
    }
    case Term::Kind::Prod: {
      if (depth > 0 && pick(4) == 0) {
        Term neutral = neutral_or(ctx, ty, depth, Term::set());
        if (neutral != Term::set()) return neutral;
      }
      return Term::pair(random_term(ctx, ty.left(), depth - 1),
                        random_term(ctx, ty.right(), depth - 1));
    }
    case Term::Kind::Neutral: {
      // A stuck type (e.g. PickType applied to a variable); only context
      // entries can inhabit it.
      Term found = neutral_or(ctx, ty, depth, Term::set());
      if (found != Term::set()) return found;
      // No inhabitant available; widen the type instead of failing.
      return random_term(ctx, Term::boolean(), depth);
    }
    default:
      throw InternalError("random_term: unexpected type shape");
  }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration (Set/Bool/Pi fragment)

namespace {

const Signature kEmptySig;
const DefEnv kEmptyDefs;

struct Enumerator {
  // Neutral spines with their inferred types.
  struct Neutral {
    Term term;
    Term type;
    int size;
  };

  std::vector<Neutral> neutrals(const Context& ctx, int budget) {
    std::vector<Neutral> out;
    if (budget < 1) return out;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      std::uint32_t index = static_cast<std::uint32_t>(i);
      out.push_back({Term::var(index), lookup_var(ctx, index), 1});
    }
    // Saturate with eliminations until the budget is spent.
    for (std::size_t at = 0; at < out.size(); ++at) {
      Neutral n = out[at];  // copy: out grows below
      Term ty = whnf(kEmptySig, kEmptyDefs, n.type).term;
      if (ty.kind() == Term::Kind::Pi) {
        int arg_budget = budget - n.size - 1;
        for (const Term& arg : checked(ctx, ty.domain(), arg_budget)) {
          int size = n.size + 1 + static_cast<int>(term_size(arg));
          if (size > budget) continue;
          out.push_back({eliminate(n.term, Elim::app(arg)), subst_var(ty.codomain(), 0, arg),
                         size});
        }
      }
      if (ty.kind() == Term::Kind::Bool) {
        // Constant-motive if-eliminations; dependent motives do not fit in
        // the sizes this enumerator is used with.
        int rest = budget - n.size - 1;
        for (const Term& motive : checked(ctx, Term::set(), rest - 2)) {
          int msize = static_cast<int>(term_size(motive));
          for (const Term& then_b : checked(ctx, motive, rest - msize - 1)) {
            int tsize = static_cast<int>(term_size(then_b));
            for (const Term& else_b : checked(ctx, motive, rest - msize - tsize)) {
              int size = n.size + 1 + msize + tsize + static_cast<int>(term_size(else_b));
              if (size > budget) continue;
              out.push_back({eliminate(n.term, Elim::if_then_else(shift(motive, 1), then_b,
                                                                  else_b, "b")),
                             motive, size});
            }
          }
        }
      }
    }
    return out;
  }

  std::vector<Term> checked(const Context& ctx, const Term& type, int budget) {
    std::vector<Term> out;
    if (budget < 1) return out;
    Term ty = whnf(kEmptySig, kEmptyDefs, type).term;
    switch (ty.kind()) {
      case Term::Kind::Set: {
        out.push_back(Term::set());
        out.push_back(Term::boolean());
        for (int da = 1; da <= budget - 2; ++da) {
          for (const Term& domain : checked(ctx, Term::set(), da)) {
            if (static_cast<int>(term_size(domain)) != da) continue;
            Context inner = ctx.extended("x", domain);
            for (const Term& codomain : checked(inner, Term::set(), budget - 1 - da))
              out.push_back(Term::pi(domain, codomain, "x"));
          }
        }
        break;
      }
      case Term::Kind::Bool:
        out.push_back(Term::true_());
        out.push_back(Term::false_());
        break;
      case Term::Kind::Pi: {
        Context inner = ctx.extended(ty.hint(), ty.domain());
        for (const Term& body : checked(inner, ty.codomain(), budget - 1))
          out.push_back(Term::lam(body, ty.hint()));
        break;
      }
      default:
        break;
    }
    for (const Neutral& n : neutrals(ctx, budget)) {
      if (convert(kEmptySig, kEmptyDefs, ctx, n.type, type, Term::set()).ok())
        out.push_back(n.term);
    }
    return out;
  }
};

}  // namespace

std::vector<Term> enumerate_types(int max_size) {
  Enumerator e;
  return e.checked(Context{}, Term::set(), max_size);
}

std::vector<Term> enumerate_checked(const Context& ctx, const Term& type, int max_size) {
  Enumerator e;
  return e.checked(ctx, type, max_size);
}

}  // namespace tog::testgen
