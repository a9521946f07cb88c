#include "dcsim/schedule.hpp"

#include <algorithm>

namespace dcsim {

std::size_t SchedulePlan::accepted_count() const {
    std::vector<VmId> ids;
    ids.reserve(assignments.size());
    for (const auto& a : assignments) ids.push_back(a.vm_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids.size();
}

}  // namespace dcsim
