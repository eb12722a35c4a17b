#include "tog/print.hpp"

#include <algorithm>
#include <sstream>

namespace tog {

namespace {

// Precedence levels: 0 arrow/lambda/if, 1 product, 2 application, 3 atom.
constexpr int kArrow = 0;
constexpr int kProd = 1;
constexpr int kApp = 2;
constexpr int kAtom = 3;

bool occurs_var(const Term& t, std::uint32_t index);

bool occurs_var_elim(const Elim& e, std::uint32_t index) {
  switch (e.kind()) {
    case Elim::Kind::App:
      return occurs_var(e.argument(), index);
    case Elim::Kind::If:
      return occurs_var(e.motive(), index + 1) || occurs_var(e.then_branch(), index) ||
             occurs_var(e.else_branch(), index);
    case Elim::Kind::Fst:
    case Elim::Kind::Snd:
      return false;
  }
  return false;
}

bool occurs_var(const Term& t, std::uint32_t index) {
  switch (t.kind()) {
    case Term::Kind::Set:
    case Term::Kind::Bool:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::Nat:
    case Term::Kind::Zero:
      return false;
    case Term::Kind::Suc:
      return occurs_var(t.suc_arg(), index);
    case Term::Kind::Pi:
      return occurs_var(t.domain(), index) || occurs_var(t.codomain(), index + 1);
    case Term::Kind::Lam:
      return occurs_var(t.body(), index + 1);
    case Term::Kind::Prod:
      return occurs_var(t.left(), index) || occurs_var(t.right(), index);
    case Term::Kind::Pair:
      return occurs_var(t.first(), index) || occurs_var(t.second(), index);
    case Term::Kind::Neutral: {
      if (t.head().kind == HeadKind::Var && t.head().var == index) return true;
      for (const Elim& e : t.elims())
        if (occurs_var_elim(e, index)) return true;
      return false;
    }
  }
  return false;
}

std::string fresh_name(const std::string& hint, const std::vector<std::string>& names) {
  std::string base = hint.empty() ? "x" : hint;
  std::string candidate = base;
  while (std::find(names.begin(), names.end(), candidate) != names.end()) candidate += "'";
  return candidate;
}

class Printer {
 public:
  explicit Printer(std::vector<std::string> names) : names_(std::move(names)) {}

  void term(std::ostream& os, const Term& t, int prec) {
    switch (t.kind()) {
      case Term::Kind::Set: os << "Set"; return;
      case Term::Kind::Bool: os << "Bool"; return;
      case Term::Kind::True: os << "true"; return;
      case Term::Kind::False: os << "false"; return;
      case Term::Kind::Nat: os << "Nat"; return;
      case Term::Kind::Zero: os << "zero"; return;
      case Term::Kind::Suc: {
        open(os, prec, kApp);
        os << "suc ";
        term(os, t.suc_arg(), kAtom);
        close(os, prec, kApp);
        return;
      }
      case Term::Kind::Pi: {
        open(os, prec, kArrow);
        if (occurs_var(t.codomain(), 0)) {
          std::string name = fresh_name(t.hint(), names_);
          os << "(" << name << " : ";
          term(os, t.domain(), kArrow);
          os << ") -> ";
          names_.push_back(name);
          term(os, t.codomain(), kArrow);
          names_.pop_back();
        } else {
          term(os, t.domain(), kProd);
          os << " -> ";
          names_.push_back("_");
          term(os, t.codomain(), kArrow);
          names_.pop_back();
        }
        close(os, prec, kArrow);
        return;
      }
      case Term::Kind::Lam: {
        open(os, prec, kArrow);
        std::string name = fresh_name(t.hint(), names_);
        os << "\\" << name << " -> ";
        names_.push_back(name);
        term(os, t.body(), kArrow);
        names_.pop_back();
        close(os, prec, kArrow);
        return;
      }
      case Term::Kind::Prod: {
        open(os, prec, kProd);
        term(os, t.left(), kApp);
        os << " * ";
        term(os, t.right(), kProd);
        close(os, prec, kProd);
        return;
      }
      case Term::Kind::Pair: {
        os << "(";
        term(os, t.first(), kArrow);
        os << ", ";
        term(os, t.second(), kArrow);
        os << ")";
        return;
      }
      case Term::Kind::Neutral: {
        neutral(os, t, prec);
        return;
      }
    }
  }

 private:
  void head(std::ostream& os, const Head& h) {
    switch (h.kind) {
      case HeadKind::Var: {
        if (h.var < names_.size()) {
          os << names_[names_.size() - 1 - h.var];
        } else {
          os << "!" << h.var;  // out-of-scope index; only in debug dumps
        }
        return;
      }
      case HeadKind::Meta:
        os << meta_name(h.meta);
        return;
      case HeadKind::Def:
        os << h.def;
        return;
    }
  }

  // Renders head + spine.  Application and projections chain at application
  // precedence; an if-elimination renders the whole prefix as its scrutinee.
  void neutral(std::ostream& os, const Term& t, int prec) {
    neutral_spine(os, t.head(), t.elims(), t.elims().size(), prec);
  }

  void neutral_spine(std::ostream& os, const Head& h, const std::vector<Elim>& elims,
                     std::size_t count, int prec) {
    if (count == 0) {
      head(os, h);
      return;
    }
    const Elim& last = elims[count - 1];
    switch (last.kind()) {
      case Elim::Kind::App: {
        open(os, prec, kApp);
        neutral_spine(os, h, elims, count - 1, kApp);
        os << " ";
        term(os, last.argument(), kAtom);
        close(os, prec, kApp);
        return;
      }
      case Elim::Kind::Fst:
      case Elim::Kind::Snd: {
        open(os, prec, kApp);
        os << (last.kind() == Elim::Kind::Fst ? "fst " : "snd ");
        neutral_spine(os, h, elims, count - 1, kAtom);
        close(os, prec, kApp);
        return;
      }
      case Elim::Kind::If: {
        open(os, prec, kArrow);
        os << "if ";
        neutral_spine(os, h, elims, count - 1, kApp);
        std::string name = fresh_name(last.hint(), names_);
        os << " / " << name << ". ";
        names_.push_back(name);
        term(os, last.motive(), kArrow);
        names_.pop_back();
        os << " then ";
        term(os, last.then_branch(), kArrow);
        os << " else ";
        term(os, last.else_branch(), kArrow);
        close(os, prec, kArrow);
        return;
      }
    }
  }

  void open(std::ostream& os, int prec, int mine) {
    if (prec > mine) os << "(";
  }
  void close(std::ostream& os, int prec, int mine) {
    if (prec > mine) os << ")";
  }

  std::vector<std::string> names_;
};

std::vector<std::string> context_names(const Context& ctx) {
  std::vector<std::string> names;
  names.reserve(ctx.size());
  for (const auto& e : ctx.entries()) names.push_back(fresh_name(e.name, names));
  return names;
}

}  // namespace

std::string meta_name(MetaId id) { return "?" + std::to_string(id); }

std::string print_term(const Term& t, const std::vector<std::string>& names) {
  std::ostringstream os;
  Printer p(names);
  p.term(os, t, kArrow);
  return os.str();
}

std::string print_term(const Term& t, const Context& ctx) {
  return print_term(t, context_names(ctx));
}

std::string print_context(const Context& ctx) {
  if (ctx.empty()) return ".";
  std::ostringstream os;
  std::vector<std::string> names;
  bool first = true;
  for (const auto& e : ctx.entries()) {
    if (!first) os << ", ";
    first = false;
    std::string name = fresh_name(e.name, names);
    os << name << " : " << print_term(e.type, names);
    names.push_back(name);
  }
  return os.str();
}

std::string print_constraint(const Constraint& c) {
  std::ostringstream os;
  os << print_context(c.ctx) << " |- " << print_term(c.lhs_term, c.ctx) << " : "
     << print_term(c.lhs_type, c.ctx) << " = " << print_term(c.rhs_term, c.ctx) << " : "
     << print_term(c.rhs_type, c.ctx);
  return os.str();
}

std::string print_meta_subst(const MetaSubst& theta) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [id, term] : theta.entries()) {
    if (!first) os << "\n";
    first = false;
    os << meta_name(id) << " := " << print_term(term);
  }
  return os.str();
}

}  // namespace tog
