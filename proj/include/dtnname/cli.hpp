#ifndef DTNNAME_CLI_HPP
#define DTNNAME_CLI_HPP

#include <iosfwd>

namespace dtnname {

/// Entry point of the name_sim tool. Exit codes: 0 clean run, 1 usage or
/// scenario error, 2 runtime invariant violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dtnname

#endif  // DTNNAME_CLI_HPP
