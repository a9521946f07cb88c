#ifndef DCSIM_SCHEDULE_HPP
#define DCSIM_SCHEDULE_HPP

#include <string>
#include <vector>

#include "dcsim/resources.hpp"

namespace dcsim {

// One hosting decision: vm occupies pm over [start, end). A request split
// into subintervals contributes several assignments whose union is its
// lifecycle.
struct Assignment {
    VmId vm_id;
    int pm_id;
    Slot start;
    Slot end;
};

struct Rejection {
    VmId vm_id;
    std::string reason;
};

// A VM moved off the PM it was first planned on.
struct Migration {
    VmId vm_id;
    int from_pm;
    int to_pm;
    Slot start;  // lifecycle/subinterval start of the moved piece
};

// What an algorithm decided: assignments, rejections, and how many extra
// placements beyond one per VM it took (planned migrations / handoffs).
struct SchedulePlan {
    std::vector<Assignment> assignments;
    std::vector<Rejection> rejections;
    std::vector<Migration> migrations;
    long migration_count = 0;

    // PM ids this plan powered on; meaningful for energy-family plans
    // (energy_aware == true). Load-balancing plans run an all-on fleet.
    std::vector<int> powered_on;
    bool energy_aware = false;

    std::size_t accepted_count() const;  // distinct vm ids with assignments
};

}  // namespace dcsim

#endif
