#include "dcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcsim {

ResourceVector LoadProfile::utilization_at(int pm, Slot slot) const {
    const auto& steps = pms.at(static_cast<std::size_t>(pm)).steps;
    if (steps.empty() || slot < steps.front().first) return {};
    // last step with from_slot <= slot
    auto it = std::upper_bound(steps.begin(), steps.end(), slot,
                               [](Slot s, const auto& step) { return s < step.first; });
    return std::prev(it)->second;
}

// --- load balancing indices ---------------------------------------------------

std::vector<ResourceVector> per_pm_utilization(const LoadProfile& profile) {
    if (profile.t_obs <= 0.0) throw InvalidSpec("observation horizon must be positive");
    std::vector<ResourceVector> out;
    out.reserve(profile.pms.size());
    for (const auto& pm : profile.pms) out.push_back(pm.util_integral * (1.0 / profile.t_obs));
    return out;
}

double avg_utilization(const LoadProfile& profile) {
    if (profile.pms.empty()) return 0.0;
    if (profile.t_obs <= 0.0) throw InvalidSpec("observation horizon must be positive");
    double sum = 0.0;
    for (const auto& pm : profile.pms) sum += pm.util_integral.cpu / profile.t_obs;
    return sum / static_cast<double>(profile.pms.size());
}

double avg_utilization_timeweighted(const LoadProfile& profile) {
    if (profile.pms.empty() || profile.horizon <= 0) return 0.0;
    double sum = 0.0;
    for (const auto& pm : profile.pms) {
        double integral = 0.0;
        for (std::size_t i = 0; i < pm.steps.size(); ++i) {
            Slot from = pm.steps[i].first;
            Slot to = i + 1 < pm.steps.size() ? pm.steps[i + 1].first : profile.horizon;
            integral += pm.steps[i].second.cpu * static_cast<double>(to - from);
        }
        sum += integral / static_cast<double>(profile.horizon);
    }
    return sum / static_cast<double>(profile.pms.size());
}

double ilb(const ResourceVector& pm_utils, const ResourceVector& dc_averages) {
    double avg_i = pm_utils.mean();
    double a = avg_i - dc_averages.cpu;
    double b = avg_i - dc_averages.mem;
    double c = avg_i - dc_averages.storage;
    return (a * a + b * b + c * c) / 3.0;
}

double imbalance_degree(const LoadProfile& profile) {
    if (profile.pms.empty()) return 0.0;
    auto utils = per_pm_utilization(profile);
    ResourceVector dc_avg;
    for (const auto& u : utils) dc_avg += u;
    dc_avg = dc_avg * (1.0 / static_cast<double>(utils.size()));
    double sum = 0.0;
    for (const auto& u : utils) sum += ilb(u, dc_avg);
    return sum / static_cast<double>(utils.size());
}

namespace {

// min/max ratio of per-PM loads; 1 when every load is zero (an empty,
// perfectly balanced fleet).
double load_skew(const LoadProfile& profile) {
    if (profile.pms.empty()) return 1.0;
    double lo = profile.pms.front().cm_load, hi = lo;
    for (const auto& pm : profile.pms) {
        lo = std::min(lo, pm.cm_load);
        hi = std::max(hi, pm.cm_load);
    }
    if (hi == 0.0) return 1.0;
    return lo / hi;
}

}  // namespace

double capacity_makespan(const LoadProfile& profile) {
    double hi = 0.0;
    for (const auto& pm : profile.pms) hi = std::max(hi, pm.cm_load);
    return hi;
}

double skew_capacity_makespan(const LoadProfile& profile) { return load_skew(profile); }

double makespan(const LoadProfile& profile) {
    double peak = 0.0;
    for (const auto& pm : profile.pms) peak = std::max(peak, pm.peak_cpu);
    return peak;
}

double skew_makespan(const LoadProfile& profile) { return load_skew(profile); }

// --- energy --------------------------------------------------------------------

double power(double u, const PmType& type) {
    constexpr double kSlack = 1e-9;
    if (u < -kSlack || u > 1.0 + kSlack)
        throw std::domain_error("power: utilization must lie in [0, 1]");
    u = std::clamp(u, 0.0, 1.0);
    return type.p_min + (type.p_max - type.p_min) * u;
}

double pm_energy(const PmLoadStats& pm, const PmType& type, double slot_minutes,
                 EnergyConvention convention) {
    if (!pm.ever_on) return 0.0;
    double wslots = 0.0;
    for (std::size_t i = 0; i < pm.steps.size(); ++i) {
        Slot from = std::max(pm.steps[i].first, pm.on_from);
        Slot to = i + 1 < pm.steps.size() ? pm.steps[i + 1].first : pm.on_to;
        to = std::min(to, pm.on_to);
        if (to <= from) continue;
        double u = pm.steps[i].second.cpu;
        double p = convention == EnergyConvention::MarginalOnly
                       ? (type.p_max - type.p_min) * std::clamp(u, 0.0, 1.0)
                       : power(u, type);
        wslots += p * static_cast<double>(to - from);
    }
    return wslots * slot_minutes;
}

double total_energy(const LoadProfile& profile, const Datacenter& dc,
                    EnergyConvention convention) {
    double total = 0.0;
    for (std::size_t i = 0; i < profile.pms.size(); ++i)
        total += pm_energy(profile.pms[i], dc.type_of(dc.pm(static_cast<int>(i))),
                           profile.slot_minutes, convention);
    return total;
}

// --- repeated-run statistics ------------------------------------------------------

ConfidenceInterval confidence_interval(const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 2) throw InvalidSpec("confidence interval requires at least 2 samples");
    ConfidenceInterval ci;
    ci.n = n;
    double sum = 0.0;
    for (double x : samples) sum += x;
    ci.mean = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (ci.mean - x) * (ci.mean - x);
    ci.stddev = std::sqrt(ss / (n - 1));
    double half = 1.96 * ci.stddev / std::sqrt(static_cast<double>(n));
    ci.low = ci.mean - half;
    ci.high = ci.mean + half;
    return ci;
}

// --- report ------------------------------------------------------------------------

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"avg-util",      "imbalance", "makespan",
                                                "skew-makespan", "cm",        "skew-cm",
                                                "energy",        "on-pms",    "rejected"};
    return names;
}

double MetricsReport::metric(const std::string& id) const {
    if (id == "avg-util") return avg_util_cpu;
    if (id == "imbalance") return imbalance;
    if (id == "makespan") return makespan;
    if (id == "skew-makespan") return skew_makespan;
    if (id == "cm") return capacity_makespan;
    if (id == "skew-cm") return skew_capacity_makespan;
    if (id == "energy") return energy_wmin;
    if (id == "on-pms") return static_cast<double>(turned_on_pms);
    if (id == "rejected") return static_cast<double>(rejected);
    std::string known;
    for (const auto& n : metric_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidSpec("unknown metric '" + id + "'; known metrics: " + known);
}

MetricsReport compute_report(const LoadProfile& profile, const SchedulePlan& plan,
                             const Datacenter& dc, std::size_t submitted) {
    MetricsReport r;
    if (!profile.pms.empty() && profile.t_obs > 0.0) {
        auto utils = per_pm_utilization(profile);
        ResourceVector dc_avg;
        for (const auto& u : utils) dc_avg += u;
        dc_avg = dc_avg * (1.0 / static_cast<double>(utils.size()));
        r.avg_util_cpu = dc_avg.cpu;
        r.avg_util_mem = dc_avg.mem;
        r.avg_util_storage = dc_avg.storage;
        r.avg_util_integrated = dc_avg.mean();
        r.avg_util_timeweighted = avg_utilization_timeweighted(profile);
        r.imbalance = imbalance_degree(profile);
    }
    r.makespan = makespan(profile);
    r.skew_makespan = skew_makespan(profile);
    r.capacity_makespan = capacity_makespan(profile);
    r.skew_capacity_makespan = skew_capacity_makespan(profile);
    r.energy_wmin = total_energy(profile, dc);
    r.turned_on_pms = plan.energy_aware ? static_cast<long>(plan.powered_on.size())
                                        : static_cast<long>(dc.size());
    r.migration_count = plan.migration_count;
    r.rejected = static_cast<long>(plan.rejections.size());
    r.accepted = static_cast<long>(plan.accepted_count());
    r.submitted = static_cast<long>(submitted);
    return r;
}

}  // namespace dcsim
