#ifndef P2PSCHED_LP_EXPORT_HPP
#define P2PSCHED_LP_EXPORT_HPP

#include <iosfwd>
#include <string>

#include "p2psched/milp.hpp"

namespace p2psched::milp {

/// Writes the model in CPLEX LP format (Maximize / Subject To / Bounds /
/// Binary / End). Variable and constraint names are sanitized to the
/// [A-Za-z0-9_] alphabet; when sanitization changes or collides names, a
/// commented mapping table is appended after End so external tools can map
/// results back. A constant objective offset is emitted as a literal term
/// in the objective row.
void export_lp_format(const MilpModel& model, std::ostream& out);
std::string export_lp_string(const MilpModel& model);
void export_lp_file(const MilpModel& model, const std::string& path);

}  // namespace p2psched::milp

#endif  // P2PSCHED_LP_EXPORT_HPP
