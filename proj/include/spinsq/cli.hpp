#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spinsq/types.hpp"

namespace spinsq {

/// Budgets of the reference D_{10,5} comparison, chosen so that every scheme
/// uses about 22200 preparations for the correlation parameter.
Budget table2_budget(Scheme scheme);

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 2 validation error, 1 runtime or I/O error. Errors are written
/// to `err` as a single JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinsq
