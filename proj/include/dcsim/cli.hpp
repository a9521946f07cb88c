#ifndef DCSIM_CLI_HPP
#define DCSIM_CLI_HPP

#include <iostream>

namespace dcsim {

// Exit codes: 0 success, 1 validation mismatch, 2 config/IO error,
// 3 invariant breach (infeasible plan).
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace dcsim

#endif
