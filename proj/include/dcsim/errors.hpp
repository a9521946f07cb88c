#ifndef DCSIM_ERRORS_HPP
#define DCSIM_ERRORS_HPP

#include <stdexcept>

namespace dcsim {

// A scheduler tried to place a request that does not fit. Schedulers are
// required to check before allocating, so this indicates a scheduler bug.
struct CapacityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// release() was asked to remove a request that is not hosted on the PM.
struct NotHosted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file problems: unreadable, unparsable, or failing validation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A structurally invalid spec (generator spec, scheduler options, ...).
struct InvalidSpec : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace dcsim

#endif
