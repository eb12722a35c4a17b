#include "tog/driver.hpp"

#include <fstream>
#include <set>
#include <ostream>
#include <sstream>

#include "tog/elaborate.hpp"
#include "tog/normalize.hpp"
#include "tog/print.hpp"
#include "tog/syntax.hpp"
#include "tog/typecheck.hpp"
#include "tog/unify.hpp"

namespace tog {

namespace {

std::string meta_list(const std::set<MetaId>& metas) {
  std::string out;
  bool first = true;
  for (MetaId m : metas) {
    if (!first) out += ", ";
    first = false;
    out += meta_name(m);
  }
  return out;
}

class Driver {
 public:
  Driver(const RunOptions& opts, std::ostream& out, std::ostream& err)
      : opts_(opts), out_(out), err_(err) {}

  Report run(const std::string& text) {
    Report report;
    surface::SourceFile file;
    try {
      file = surface::parse(text);
    } catch (const surface::ParseError& e) {
      report.syntax_error = true;
      report.error_message = e.what();
      err_ << "error: " << e.what() << "\n";
      return report;
    }
    try {
      for (const auto& decl : file.decls) run_decl(decl, report);
    } catch (const surface::ParseError& e) {
      report.syntax_error = true;
      report.error_message = e.what();
      err_ << "error: " << e.what() << "\n";
    } catch (const ScopeError& e) {
      report.syntax_error = true;
      report.error_message = e.what();
      err_ << "error: " << e.what() << "\n";
    }
    return report;
  }

 private:
  void run_decl(const surface::Decl& decl, Report& report) {
    switch (decl.kind) {
      case surface::Decl::Kind::Postulate: {
        require_fresh_name(decl);
        auto type = scope_type(decl, "postulate " + decl.name, *decl.type, report);
        if (!type) return;
        defs_.add(decl.name, Definition{*type, std::nullopt});
        out_ << "postulate " << decl.name << " : " << print_term(*type) << "\n";
        return;
      }
      case surface::Decl::Kind::MetaDecl: {
        require_fresh_name(decl);
        auto type = scope_type(decl, "meta " + decl.name, *decl.type, report);
        if (!type) return;
        MetaId id = sig_.extend(*type);
        meta_names_[decl.name] = id;
        out_ << "meta " << decl.name << " = " << meta_name(id) << " : " << print_term(*type)
             << "\n";
        return;
      }
      case surface::Decl::Kind::Define: {
        require_fresh_name(decl);
        auto type = scope_type(decl, "define " + decl.name, *decl.type, report);
        if (!type) return;
        Term body = apply_meta_subst(theta_, scope(*decl.body));
        out_ << "define " << decl.name << " : " << print_term(*type) << "\n";
        Report::Item item = check_one("define " + decl.name, body, *type);
        if (item.kind == Report::Item::Kind::Ok) {
          defs_.add(decl.name, Definition{apply_meta_subst(theta_, *type),
                                          apply_meta_subst(theta_, body)});
        } else {
          // Keep the name resolvable for later declarations.
          defs_.add(decl.name, Definition{apply_meta_subst(theta_, *type), std::nullopt});
        }
        report.items.push_back(std::move(item));
        return;
      }
      case surface::Decl::Kind::Check: {
        auto type = scope_type(decl, "check", *decl.type, report);
        if (!type) return;
        Term term = apply_meta_subst(theta_, scope(*decl.body));
        out_ << "check " << print_term(term) << " : " << print_term(*type) << "\n";
        report.items.push_back(check_one("check", term, *type));
        return;
      }
    }
  }

  /// Elaborates `term` against `type` in the empty context, solves, prints
  /// the requested dumps and folds the result into the threaded state.
  Report::Item check_one(const std::string& what, const Term& term, const Term& type) {
    Report::Item item;
    item.declaration = what;

    ElabOutput elab = opts_.useless_elaboration
                          ? elaborate_opaque(sig_, defs_, Context{}, term, type)
                          : elaborate_check(sig_, defs_, Context{}, term, type);
    item.metas = elab.fresh_metas;
    item.constraints = elab.constraints.size();

    if (opts_.dump_elaboration) {
      out_ << "  elaborated " << print_term(elab.term) << "\n";
      out_ << "  metas:\n";
      for (MetaId id = static_cast<MetaId>(sig_.size());
           id < static_cast<MetaId>(elab.signature.size()); ++id)
        out_ << "    " << meta_name(id) << " : " << print_term(elab.signature.type_of(id)) << "\n";
      out_ << "  constraints:\n";
      for (const Constraint& c : elab.constraints) out_ << "    " << print_constraint(c) << "\n";
    }

    SolveOptions sopts;
    sopts.max_steps = opts_.max_steps;
    sopts.trace = opts_.trace_unify;
    sopts.trace_out = &out_;
    SolveResult result = solve_all(elab.signature, defs_, elab.constraints, sopts);

    if (opts_.dump_solution && !result.solution.empty()) {
      out_ << "  solution:\n";
      for (const auto& [id, t] : result.solution.entries())
        out_ << "    " << meta_name(id) << " := " << print_term(t) << "\n";
    }

    switch (result.outcome) {
      case SolveResult::Outcome::Solved: {
        verify(result);
        sig_ = result.signature;
        absorb(result.solution);
        item.kind = Report::Item::Kind::Ok;
        item.final_term = print_term(apply_meta_subst(theta_, elab.term));
        out_ << "ok " << item.final_term << "\n";
        return item;
      }
      case SolveResult::Outcome::Stuck: {
        verify(result);
        sig_ = result.signature;
        absorb(result.solution);
        item.kind = Report::Item::Kind::Stuck;
        item.final_term = print_term(apply_meta_subst(theta_, elab.term));
        out_ << "stuck " << item.final_term << " (" << result.residuals.size()
             << " residual constraint" << (result.residuals.size() == 1 ? "" : "s") << ")\n";
        for (const Constraint& c : result.residuals)
          out_ << "  residual " << print_constraint(c) << "\n";
        // Metas solved by earlier declarations are not open here.
        std::set<MetaId> unsolved;
        for (MetaId m : result.unsolved_metas)
          if (!theta_.contains(m)) unsolved.insert(m);
        out_ << "  unsolved " << meta_list(unsolved) << "\n";
        if (!result.diagnostic.empty()) out_ << "  note " << result.diagnostic << "\n";
        std::ostringstream detail;
        for (const Constraint& c : result.residuals) detail << print_constraint(c) << "\n";
        item.detail = detail.str();
        err_ << "stuck: " << what << "\n";
        return item;
      }
      case SolveResult::Outcome::Failed: {
        // A failed check leaves no trace: its fresh metas and the partial
        // instantiations are discarded together.
        item.kind = Report::Item::Kind::IllTyped;
        item.detail = result.diagnostic;
        out_ << "ill-typed: " << result.diagnostic << "\n";
        err_ << "error: " << what << ": " << result.diagnostic << "\n";
        return item;
      }
    }
    throw InternalError("unreachable solve outcome");
  }

  void verify(const SolveResult& result) {
    if (!opts_.verify) return;
    CheckResult r = verify_solve_result(result, defs_);
    if (!r.ok())
      throw InternalError("post-hoc verification failed: " + r.reason);
  }

  /// Extends the accumulated substitution with a solver result and pushes it
  /// through the stored definitions.  Accumulated entries can only mention
  /// metas that were still open when they were recorded, so the rewrite pass
  /// runs only when the new solution instantiates one of those.
  void absorb(const MetaSubst& solution) {
    if (solution.empty()) return;
    bool touches_open = false;
    for (MetaId m : open_metas_)
      if (solution.contains(m)) {
        touches_open = true;
        break;
      }

    if (touches_open) {
      MetaSubst merged;
      for (const auto& [id, t] : theta_.entries()) merged.bind(id, apply_meta_subst(solution, t));
      for (const auto& [id, t] : solution.entries())
        if (!merged.contains(id)) merged.bind(id, t);
      theta_ = std::move(merged);
      open_metas_.clear();
      for (const auto& [id, t] : theta_.entries()) note_open_metas(t);
    } else {
      for (const auto& [id, t] : solution.entries()) {
        theta_.bind(id, t);
        note_open_metas(t);
      }
    }

    for (const auto& [name, def] : defs_.entries()) {
      Definition updated{apply_meta_subst(solution, def.type), def.body};
      if (def.body) updated.body = apply_meta_subst(solution, *def.body);
      defs_.replace(name, updated);
    }
  }

  void note_open_metas(const Term& t) {
    std::vector<MetaId> metas;
    collect_metas(t, metas);
    for (MetaId m : metas)
      if (!theta_.contains(m)) open_metas_.insert(m);
  }

  Term scope(const surface::Expr& e) {
    return surface::scope_expr(std::make_shared<surface::Expr>(e), defs_, meta_names_);
  }

  /// Scope-checks a type annotation and validates it as a type with the
  /// declarative checker.  A definite mismatch records an ill-typed item for
  /// the declaration (the rest of the file still runs); a blocked verdict is
  /// allowed through, the type may depend on uninstantiated metas.
  std::optional<Term> scope_type(const surface::Decl& decl, const std::string& what,
                                 const surface::Expr& e, Report& report) {
    (void)decl;
    Term type = apply_meta_subst(theta_, scope(e));
    CheckResult r = check(sig_, defs_, Context{}, type, Term::set());
    if (r.verdict == Verdict::No) {
      Report::Item item;
      item.kind = Report::Item::Kind::IllTyped;
      item.declaration = what;
      item.detail = "invalid type annotation: " + r.reason;
      out_ << "ill-typed: " << item.detail << "\n";
      err_ << "error: " << what << ": " << item.detail << "\n";
      report.items.push_back(std::move(item));
      return std::nullopt;
    }
    return type;
  }

  void require_fresh_name(const surface::Decl& decl) {
    if (defs_.contains(decl.name) || meta_names_.count(decl.name))
      throw surface::ParseError(decl.pos, "duplicate name '" + decl.name + "'");
  }

  const RunOptions& opts_;
  std::ostream& out_;
  std::ostream& err_;
  Signature sig_;
  DefEnv defs_;
  MetaSubst theta_;
  std::map<std::string, MetaId> meta_names_;
  std::set<MetaId> open_metas_;  // metas mentioned by theta_ values, still unsolved
};

}  // namespace

int Report::exit_code() const {
  if (syntax_error) return 3;
  bool stuck = false;
  for (const auto& item : items) {
    if (item.kind == Item::Kind::IllTyped) return 1;
    if (item.kind == Item::Kind::Stuck) stuck = true;
  }
  return stuck ? 2 : 0;
}

Report run_source(const std::string& text, const RunOptions& opts, std::ostream& out,
                  std::ostream& err) {
  return Driver(opts, out, err).run(text);
}

Report run_file(const std::string& path, const RunOptions& opts, std::ostream& out,
                std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    Report report;
    report.syntax_error = true;
    report.error_message = "cannot open '" + path + "'";
    err << "error: " << report.error_message << "\n";
    return report;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return run_source(buffer.str(), opts, out, err);
}

}  // namespace tog
