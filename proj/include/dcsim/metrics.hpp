#ifndef DCSIM_METRICS_HPP
#define DCSIM_METRICS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dcsim/resources.hpp"
#include "dcsim/schedule.hpp"

namespace dcsim {

// Utilization of one PM over the run, as an exact step function plus the
// integrals the indices are computed from.
struct PmLoadStats {
    double cm_load = 0.0;          // sum of cpu_demand * slots over hosted pieces
    ResourceVector util_integral;  // per-resource fraction-of-capacity * slots
    double peak_cpu = 0.0;         // max instantaneous cpu fraction

    // Utilization fractions as (from_slot, value) steps covering [0, horizon).
    std::vector<std::pair<Slot, ResourceVector>> steps;

    bool ever_on = false;
    Slot on_from = 0;  // powered-on span [on_from, on_to)
    Slot on_to = 0;
};

struct LoadProfile {
    std::vector<PmLoadStats> pms;
    double t_obs = 0.0;      // averaging divisor, in slots
    Slot horizon = 0;        // last slot touched by any assignment
    double slot_minutes = 5.0;

    ResourceVector utilization_at(int pm, Slot slot) const;
};

// --- load-balancing indices ------------------------------------------------

// Datacenter average utilization: per PM the full-lifecycle utilization
// integral divided by t_obs (cpu component), averaged over PMs.
double avg_utilization(const LoadProfile& profile);
// Strict per-slot time average over [0, horizon), exposed separately
// because it disagrees with the t_obs convention on staggered workloads.
double avg_utilization_timeweighted(const LoadProfile& profile);
// Per-resource per-PM averages (t_obs convention), cpu/mem/storage.
std::vector<ResourceVector> per_pm_utilization(const LoadProfile& profile);

// Integrated load imbalance of one server against the datacenter averages.
double ilb(const ResourceVector& pm_utils, const ResourceVector& dc_averages);
// Mean ILB over all PMs.
double imbalance_degree(const LoadProfile& profile);

double capacity_makespan(const LoadProfile& profile);       // max load
double skew_capacity_makespan(const LoadProfile& profile);  // min/max load; 1 when all zero
double makespan(const LoadProfile& profile);                // peak instantaneous cpu fraction
double skew_makespan(const LoadProfile& profile);           // min/max load; 1 when all zero

// --- energy indices ---------------------------------------------------------

// Linear power model: p_min + (p_max - p_min) * u. Throws std::domain_error
// for u outside [0, 1] (beyond rounding slack).
double power(double u, const PmType& type);

enum class EnergyConvention {
    IdlePowerHalfOpen,  // P(u) over powered-on slots, p_min while on but idle
    MarginalOnly,       // (p_max - p_min) * u over powered-on slots
};

// Energy in watt-minutes over the PM's powered-on span.
double pm_energy(const PmLoadStats& pm, const PmType& type, double slot_minutes,
                 EnergyConvention convention = EnergyConvention::IdlePowerHalfOpen);
double total_energy(const LoadProfile& profile, const Datacenter& dc,
                    EnergyConvention convention = EnergyConvention::IdlePowerHalfOpen);

// --- repeated-run statistics ------------------------------------------------

struct ConfidenceInterval {
    double mean = 0.0;
    double stddev = 0.0;
    double low = 0.0;
    double high = 0.0;
    int n = 0;
};

// 95% confidence interval: mean +- 1.96 * s / sqrt(n), sample stddev with
// n-1 denominator. Requires n >= 2.
ConfidenceInterval confidence_interval(const std::vector<double>& samples);

// --- report -----------------------------------------------------------------

struct MetricsReport {
    double avg_util_cpu = 0.0;
    double avg_util_mem = 0.0;
    double avg_util_storage = 0.0;
    double avg_util_integrated = 0.0;  // mean of the three datacenter values
    double avg_util_timeweighted = 0.0;
    double imbalance = 0.0;
    double makespan = 0.0;
    double skew_makespan = 1.0;
    double capacity_makespan = 0.0;
    double skew_capacity_makespan = 1.0;
    double energy_wmin = 0.0;
    long turned_on_pms = 0;
    long migration_count = 0;
    long rejected = 0;
    long accepted = 0;
    long submitted = 0;

    double metric(const std::string& id) const;  // throws InvalidSpec on unknown id
};

// Metric identifiers selectable from the CLI.
const std::vector<std::string>& metric_names();

MetricsReport compute_report(const LoadProfile& profile, const SchedulePlan& plan,
                             const Datacenter& dc, std::size_t submitted);

}  // namespace dcsim

#endif
