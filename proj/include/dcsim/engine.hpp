#ifndef DCSIM_ENGINE_HPP
#define DCSIM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcsim/algorithms.hpp"
#include "dcsim/metrics.hpp"
#include "dcsim/resources.hpp"
#include "dcsim/schedule.hpp"
#include "dcsim/workload.hpp"

namespace dcsim {

struct WorkloadSource {
    enum class Kind { Generator, Trace } kind = Kind::Generator;
    GeneratorSpec generator;
    std::string trace_path;
    TraceDemandMap trace_demand;
};

struct ExperimentConfig {
    std::string pm_config_path;  // datacenter XML
    WorkloadSource workload;
    std::vector<std::string> algorithms;
    std::vector<std::string> metrics;
    int repetitions = 1;
    std::uint64_t seed = 0;
    double slot_minutes = 5.0;
    std::optional<double> t_obs_override;
    int prepartition_k = 4;
    double migration_factor = 0.1;

    void validate() const;  // throws InvalidSpec
};

// Experiment config file: JSON mirroring the fields above.
ExperimentConfig load_experiment_config(const std::string& path);

struct ProfileOptions {
    std::optional<double> t_obs_override;
    bool inclusive_intervals = false;  // energy-accounting variant only
    bool enforce_capacity = true;
};

// Replays a plan slot by slot through a fresh clone of the fleet (releases
// before placements within a slot), verifying conservation, and builds the
// utilization profile. Throws CapacityViolation if the plan is infeasible.
LoadProfile build_profile(const SchedulePlan& plan, const std::vector<VmRequest>& requests,
                          const Datacenter& fleet, const ProfileOptions& opts = {});

struct RunResult {
    SchedulePlan plan;
    LoadProfile profile;
    MetricsReport report;
    std::string log;  // one line per placement/rejection/migration event
    // Input requests with their end-of-run status: released for accepted
    // lifecycles (the run replays to completion), rejected otherwise.
    std::vector<VmRequest> requests;
};

// Runs one algorithm over one workload against a clone of the fleet.
RunResult run(const std::string& algorithm, const std::vector<VmRequest>& requests,
              const Datacenter& fleet, const ExperimentConfig& cfg);

struct ComparisonCell {
    double value = 0.0;                  // mean over repetitions
    std::optional<ConfidenceInterval> ci;  // present when repetitions > 1
    std::vector<double> samples;         // per-repetition values
};

struct ComparisonTable {
    std::vector<std::string> metrics;     // rows
    std::vector<std::string> algorithms;  // columns
    std::vector<std::vector<ComparisonCell>> cells;  // [metric][algorithm]
    int repetitions = 1;

    const ComparisonCell& cell(const std::string& metric, const std::string& algorithm) const;
};

// Runs every selected algorithm against byte-identical workloads on cloned
// fleets; repetitions re-seed the generator via splitmix of the master seed.
using WorkloadProvider = std::function<std::vector<VmRequest>(std::uint64_t rep_seed, int rep)>;
using RunObserver = std::function<void(const std::string& algorithm, int rep, const RunResult&)>;
ComparisonTable compare(const ExperimentConfig& cfg, const Datacenter& fleet,
                        const WorkloadProvider& workload, const RunObserver& observer = {});
// Convenience overload: loads the fleet and workload from the config.
ComparisonTable compare(const ExperimentConfig& cfg, const RunObserver& observer = {});

// Builds the fleet described by the config's datacenter XML.
Datacenter build_fleet(const FleetConfig& fc, double slot_minutes);

}  // namespace dcsim

#endif
