#include <iostream>

#include "CLI11.hpp"
#include "tog/driver.hpp"
#include "tog/term.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tog - elaborating type checker for a small dependent type theory"};

  std::vector<std::string> files;
  tog::RunOptions opts;
  app.add_option("files", files, "input files (.tog)")->required()->expected(-1);
  app.add_flag("--dump-elaboration", opts.dump_elaboration,
               "print the fresh metas and constraints generated per check");
  app.add_flag("--dump-solution", opts.dump_solution, "print the meta instantiations found");
  app.add_flag("--trace-unify", opts.trace_unify, "trace the solver (POP/SOLVE/WAKE/POSTPONE/FAIL)");
  app.add_option("--max-steps", opts.max_steps, "solver step budget per check")
      ->default_val(std::size_t{10000});
  app.add_flag("--verify", opts.verify,
               "re-verify solutions and solved constraints with the declarative checker");
  app.add_flag("--useless-elaboration", opts.useless_elaboration,
               "debug baseline: wrap each check in a single opaque constraint");

  CLI11_PARSE(app, argc, argv);

  bool any_syntax = false, any_ill = false, any_stuck = false;
  try {
    for (const std::string& file : files) {
      tog::Report report = tog::run_file(file, opts, std::cout, std::cerr);
      switch (report.exit_code()) {
        case 3: any_syntax = true; break;
        case 1: any_ill = true; break;
        case 2: any_stuck = true; break;
        default: break;
      }
    }
  } catch (const tog::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  if (any_syntax) return 3;
  if (any_ill) return 1;
  return any_stuck ? 2 : 0;
}
