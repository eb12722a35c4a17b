#pragma once

#include <string>
#include <vector>

#include "tog/elaborate.hpp"
#include "tog/term.hpp"

// Pretty printer.  Output is valid surface syntax: binder hints are freshened
// against the enclosing scope, metas print as ?0, ?1, ... in creation order,
// and the empty context prints as ".".

namespace tog {

std::string print_term(const Term& t, const std::vector<std::string>& names = {});
std::string print_term(const Term& t, const Context& ctx);

std::string print_context(const Context& ctx);

/// `<ctx> |- <t> : <A> = <u> : <B>`
std::string print_constraint(const Constraint& c);

/// `?k := <term>` lines in id order.
std::string print_meta_subst(const MetaSubst& theta);

std::string meta_name(MetaId id);

}  // namespace tog
