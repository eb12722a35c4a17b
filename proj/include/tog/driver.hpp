#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tog/term.hpp"

// Batch driver: runs the declarations of a `.tog` file in order, threading
// one signature (and the accumulated meta instantiations) through the whole
// file.  Dumps and reports go to `out`, diagnostics additionally to `err`.
//
// Exit codes: 0 all checks ok, 1 some check ill-typed, 2 some check stuck
// (and none ill-typed), 3 syntax/scope/IO error.

namespace tog {

struct RunOptions {
  bool dump_elaboration = false;
  bool dump_solution = false;
  bool trace_unify = false;
  std::size_t max_steps = 10000;
  bool verify = false;
  bool useless_elaboration = false;
};

struct Report {
  struct Item {
    enum class Kind { Ok, Stuck, IllTyped };
    Kind kind;
    std::string declaration;  // printed form of the declaration
    std::string detail;       // diagnostic / residual summary
    std::size_t metas = 0;    // fresh metas created by this item
    std::size_t constraints = 0;
    std::string final_term;   // solver-substituted elaborated term
  };

  std::vector<Item> items;
  bool syntax_error = false;
  std::string error_message;

  int exit_code() const;
};

Report run_source(const std::string& text, const RunOptions& opts, std::ostream& out,
                  std::ostream& err);

Report run_file(const std::string& path, const RunOptions& opts, std::ostream& out,
                std::ostream& err);

}  // namespace tog
