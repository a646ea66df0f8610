#include "bghz/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace bghz {

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_policy_comment(std::ostream& out, const std::string& label, const NumericPolicy& policy) {
  out << "# " << label << ' ' << policy.describe() << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& axis_name,
                     const std::string& extra_name, bool with_converged) {
  out << axis_name << ",value";
  if (!extra_name.empty()) {
    out << ',' << extra_name;
  }
  if (with_converged) {
    out << ",converged";
  }
  out << '\n';
  for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
    const SweepPoint& point = sweep.points[i];
    const bool failed = !point.error.empty();
    out << format_number(sweep.axis[i]) << ',' << format_number(failed ? std::nan("") : point.value);
    if (!extra_name.empty()) {
      out << ',' << format_number(point.extra && !failed ? *point.extra : std::nan(""));
    }
    if (with_converged) {
      out << ',' << (point.converged && !failed ? 1 : 0);
    }
    out << '\n';
  }
}

}  // namespace bghz
