#ifndef DCSIM_VALIDATE_HPP
#define DCSIM_VALIDATE_HPP

#include <string>
#include <vector>

#include "dcsim/engine.hpp"

namespace dcsim {

// One checked index of a built-in validation scenario.
struct ValidationRow {
    std::string scenario;
    std::string index;
    double expected = 0.0;
    double got = 0.0;
    double tolerance = 1e-9;

    bool pass() const { return got >= expected - tolerance && got <= expected + tolerance; }
};

// Energy accounting is reported, not asserted: the same plan priced under
// three conventions, so the closest one can be recorded.
struct EnergyCalibration {
    double idle_power_half_open = 0.0;
    double marginal_only_half_open = 0.0;
    double idle_power_inclusive = 0.0;
    long rejected = 0;      // identical across conventions
    long turned_on_pms = 0; // identical across conventions

    std::string closest_to(double reference) const;
};

// The three built-in scenarios: least-loaded placement on a uniform fleet,
// longest-duration-first packing, and end-time-decreasing energy scheduling.
std::vector<ValidationRow> run_validation();
EnergyCalibration run_energy_calibration();

// Diffs a result against the expected rows of one scenario; returns the
// failing rows (empty == pass).
std::vector<ValidationRow> failing_rows(const std::vector<ValidationRow>& rows);

}  // namespace dcsim

#endif
