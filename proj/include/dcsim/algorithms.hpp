#ifndef DCSIM_ALGORITHMS_HPP
#define DCSIM_ALGORITHMS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dcsim/resources.hpp"
#include "dcsim/schedule.hpp"

namespace dcsim {

enum class SchedulerFamily { OnlineLoadBalance, OfflineLoadBalance, OnlineEnergy, OfflineEnergy };

struct SchedulerKind {
    SchedulerFamily family;
    std::string name;
};

class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual SchedulerKind kind() const = 0;
};

// Sees one request at a time, in arrival order, against the live fleet
// state; returns the chosen PM id or nullopt for a rejection.
class OnlineScheduler : public Scheduler {
public:
    virtual std::optional<int> place(const VmRequest& req, const Datacenter& dc) = 0;
};

// Sees the whole batch up front and returns a complete plan. The fleet is
// taken as a pristine description (capacities and count); the planner
// keeps its own per-slot accounting.
class OfflineScheduler : public Scheduler {
public:
    virtual SchedulePlan schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) = 0;
};

struct SchedulerOptions {
    std::uint64_t seed = 0;        // random placement
    int prepartition_k = 4;        // partition value k >= 1
    double migration_factor = 0.1; // threshold factor around the mean load
};

// Registry keyed by the CLI algorithm names.
std::unique_ptr<Scheduler> make_scheduler(const std::string& name, const SchedulerOptions& opts = {});
const std::vector<std::string>& scheduler_names();

// Stateless placement cores, exposed for direct testing. The registry
// schedulers wrap these.
std::optional<int> random_place(const VmRequest& req, const Datacenter& dc, std::mt19937_64& rng);
std::optional<int> round_robin_place(const VmRequest& req, const Datacenter& dc, int& cursor);
std::optional<int> ls_place(const VmRequest& req, const Datacenter& dc);

SchedulePlan lpt_schedule(const std::vector<VmRequest>& requests, const Datacenter& dc);
SchedulePlan edf_energy_schedule(const std::vector<VmRequest>& requests, const Datacenter& dc);
SchedulePlan post_migration(const SchedulePlan& plan, const std::vector<VmRequest>& requests,
                            const Datacenter& dc, double factor = 0.1);
SchedulePlan prepartition_schedule(const std::vector<VmRequest>& requests, const Datacenter& dc,
                                   int k);

// Lower bound on the optimal capacity_makespan: the larger of the biggest
// single request load and the average load per PM.
double compute_p0(const std::vector<VmRequest>& requests, int pm_count);

// Per-request load: cpu demand times lifecycle length in slots.
inline double capacity_makespan_of(const VmRequest& req) {
    return req.demand.cpu * static_cast<double>(req.duration());
}

}  // namespace dcsim

#endif
