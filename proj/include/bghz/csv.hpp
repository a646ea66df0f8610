#pragma once

#include <iosfwd>
#include <string>

#include "bghz/nonclassicality.hpp"
#include "bghz/state.hpp"

namespace bghz {

/// Shortest decimal text that reads back to the same double; "nan" for NaN.
std::string format_number(double value);

/// "# <label> <policy>" comment line that precedes every CSV header.
void write_policy_comment(std::ostream& out, const std::string& label, const NumericPolicy& policy);

/// Columns <axis_name>,value[,<extra_name>][,converged]. Failed points are
/// written as nan with converged = 0.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& axis_name,
                     const std::string& extra_name = "", bool with_converged = true);

}  // namespace bghz
