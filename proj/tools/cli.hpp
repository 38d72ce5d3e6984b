#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace lbd::cli {

enum ExitCode : int { ok = 0, internal_error = 1, domain_error = 2, convergence_failure = 3 };

/// A job as an ordered JSON object. Numeric fields may hold lists; the
/// cartesian product of all lists is the query grid.
using Job = nlohmann::ordered_json;

/// Invalid job: unknown or misplaced fields, bad values, missing inputs.
class JobError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Invocation {
  Job job;
  std::string output = "json";  ///< json or csv
  bool timing = false;          ///< add wall time to every record
};

/// Reads a job file. A record written by `run` is accepted too (its "job" part).
Invocation load_job_file(const std::string& path);

/// Command line to invocation: --config / --preset first, flags on top.
Invocation parse_args(int argc, const char* const* argv);

/// Applies defaults and checks every field against the command.
Job normalize(const Job& job);

/// Expands list-valued fields into scalar jobs, first field outermost.
std::vector<Job> expand(const Job& job);

/// Runs every grid point, writing one record each. Returns the exit code.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Whole program: parse, run, map errors to exit codes.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Number formatting used in all output (17 significant digits).
std::string format_number(double v);

}  // namespace lbd::cli
