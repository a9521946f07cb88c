#include "dcsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace dcsim {

void ExperimentConfig::validate() const {
    if (algorithms.empty()) throw InvalidSpec("experiment: select at least one algorithm");
    if (metrics.empty()) throw InvalidSpec("experiment: select at least one metric");
    if (repetitions < 1) throw InvalidSpec("experiment: repetitions must be >= 1");
    if (slot_minutes <= 0.0) throw InvalidSpec("experiment: slot length must be > 0");
    if (prepartition_k < 1) throw InvalidSpec("experiment: prepartition k must be >= 1");
    if (migration_factor < 0.0) throw InvalidSpec("experiment: migration factor must be >= 0");
}

Datacenter build_fleet(const FleetConfig& fc, double slot_minutes) {
    return Datacenter(fc.pm_types, fc.counts, TimeGrid{slot_minutes, 0}, true);
}

// --- plan replay and profile -----------------------------------------------------

LoadProfile build_profile(const SchedulePlan& plan, const std::vector<VmRequest>& requests,
                          const Datacenter& fleet, const ProfileOptions& opts) {
    const Slot stretch = opts.inclusive_intervals ? 1 : 0;

    std::unordered_map<VmId, const VmRequest*> by_id;
    by_id.reserve(requests.size());
    for (const auto& r : requests) by_id[r.vm_id] = &r;

    struct Piece {
        VmId vm_id;
        int pm_id;
        Slot start, end;
        ResourceVector demand;
    };
    std::vector<Piece> pieces;
    pieces.reserve(plan.assignments.size());
    Slot horizon = 0;
    for (const auto& a : plan.assignments) {
        auto it = by_id.find(a.vm_id);
        if (it == by_id.end()) throw InvalidSpec("plan references unknown vm id");
        pieces.push_back({a.vm_id, a.pm_id, a.start, a.end + stretch, it->second->demand});
        horizon = std::max(horizon, a.end + stretch);
    }

    // Verification replay: slot by slot through a fresh fleet, releasing
    // expiring pieces before placing arrivals of the same slot.
    if (opts.enforce_capacity) {
        Datacenter dc = fleet.pristine_clone(true);
        std::vector<const Piece*> order;
        order.reserve(pieces.size());
        for (const auto& p : pieces) order.push_back(&p);
        std::sort(order.begin(), order.end(), [](const Piece* a, const Piece* b) {
            if (a->start != b->start) return a->start < b->start;
            return a->vm_id < b->vm_id;
        });
        auto ends_first = [](const Piece* a, const Piece* b) {
            if (a->end != b->end) return a->end > b->end;
            return a->vm_id > b->vm_id;
        };
        std::priority_queue<const Piece*, std::vector<const Piece*>, decltype(ends_first)> active(
            ends_first);
        for (const Piece* p : order) {
            while (!active.empty() && active.top()->end <= p->start) {
                dc.pm(active.top()->pm_id).release(active.top()->vm_id, active.top()->start);
                active.pop();
            }
            VmRequest stub{p->vm_id, p->demand, p->start, p->end, VmStatus::Pending};
            dc.pm(p->pm_id).allocate(stub, p->start, p->end);  // throws CapacityViolation
            active.push(p);
        }
    }

    LoadProfile profile;
    profile.horizon = horizon;
    profile.slot_minutes = fleet.grid().slot_minutes;
    profile.pms.resize(fleet.size());

    // t_obs: override, else the longest accepted request lifecycle.
    if (opts.t_obs_override) {
        profile.t_obs = *opts.t_obs_override;
    } else {
        std::set<VmId> accepted;
        for (const auto& a : plan.assignments) accepted.insert(a.vm_id);
        Slot longest = 0;
        for (VmId id : accepted) longest = std::max(longest, by_id.at(id)->duration());
        profile.t_obs = static_cast<double>(std::max<Slot>(1, longest));
    }

    std::vector<std::map<Slot, ResourceVector>> deltas(fleet.size());
    for (const auto& p : pieces) {
        const ResourceVector frac =
            p.demand.fraction_of(fleet.pm(p.pm_id).capacity());
        auto& d = deltas[static_cast<std::size_t>(p.pm_id)];
        d[p.start] += frac;
        d[p.end] -= frac;
        auto& stats = profile.pms[static_cast<std::size_t>(p.pm_id)];
        const double len = static_cast<double>(p.end - p.start);
        stats.cm_load += p.demand.cpu * len;
        stats.util_integral += frac * len;
    }

    for (std::size_t i = 0; i < fleet.size(); ++i) {
        auto& stats = profile.pms[i];
        stats.steps.emplace_back(0, ResourceVector{});
        ResourceVector run;
        for (const auto& [slot, d] : deltas[i]) {
            if (slot >= horizon) break;
            run += d;
            if (slot == 0)
                stats.steps.back().second = run;
            else
                stats.steps.emplace_back(slot, run);
            stats.peak_cpu = std::max(stats.peak_cpu, run.cpu);
        }
        if (plan.energy_aware) {
            Slot from = 0, to = 0;
            bool any = false;
            for (const auto& p : pieces) {
                if (p.pm_id != static_cast<int>(i)) continue;
                from = any ? std::min(from, p.start) : p.start;
                to = any ? std::max(to, p.end) : p.end;
                any = true;
            }
            stats.ever_on = any;
            stats.on_from = from;
            stats.on_to = to;
        } else {
            stats.ever_on = true;
            stats.on_from = 0;
            stats.on_to = horizon;
        }
    }
    return profile;
}

// --- single run --------------------------------------------------------------------

namespace {

SchedulePlan run_online(OnlineScheduler& sched, const std::vector<VmRequest>& requests,
                        Datacenter dc) {
    SchedulePlan plan;
    for (const auto& pm : dc.pms()) plan.powered_on.push_back(pm.id());

    std::vector<const VmRequest*> order;
    order.reserve(requests.size());
    for (const auto& r : requests) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const VmRequest* a, const VmRequest* b) {
        if (a->start != b->start) return a->start < b->start;
        return a->vm_id < b->vm_id;
    });

    struct Active {
        Slot end;
        VmId vm_id;
        int pm_id;
        Slot start;
    };
    auto ends_first = [](const Active& a, const Active& b) {
        if (a.end != b.end) return a.end > b.end;
        return a.vm_id > b.vm_id;
    };
    std::priority_queue<Active, std::vector<Active>, decltype(ends_first)> active(ends_first);

    for (const VmRequest* req : order) {
        // Expired lifecycles free their capacity before same-slot arrivals.
        while (!active.empty() && active.top().end <= req->start) {
            dc.pm(active.top().pm_id).release(active.top().vm_id, active.top().start);
            active.pop();
        }
        std::optional<int> pm = sched.place(*req, dc);
        if (pm) {
            dc.pm(*pm).allocate(*req, req->start, req->end);
            plan.assignments.push_back({req->vm_id, *pm, req->start, req->end});
            active.push({req->end, req->vm_id, *pm, req->start});
        } else {
            plan.rejections.push_back({req->vm_id, "no-fit"});
        }
    }
    return plan;
}

std::string render_log(const SchedulePlan& plan, const std::vector<VmRequest>& requests) {
    std::unordered_map<VmId, Slot> start_of;
    start_of.reserve(requests.size());
    for (const auto& r : requests) start_of[r.vm_id] = r.start;

    struct Event {
        Slot slot;
        VmId vm_id;
        int kind;  // 0 place, 1 migrate, 2 reject
        std::string text;
    };
    std::vector<Event> events;
    events.reserve(plan.assignments.size() + plan.rejections.size() + plan.migrations.size());
    char buf[160];
    for (const auto& a : plan.assignments) {
        std::snprintf(buf, sizeof buf, "place slot=%lld vm=%lld pm=%d end=%lld",
                      static_cast<long long>(a.start), static_cast<long long>(a.vm_id), a.pm_id,
                      static_cast<long long>(a.end));
        events.push_back({a.start, a.vm_id, 0, buf});
    }
    for (const auto& m : plan.migrations) {
        std::snprintf(buf, sizeof buf, "migrate slot=%lld vm=%lld pm=%d->%d",
                      static_cast<long long>(m.start), static_cast<long long>(m.vm_id), m.from_pm,
                      m.to_pm);
        events.push_back({m.start, m.vm_id, 1, buf});
    }
    for (const auto& r : plan.rejections) {
        Slot slot = start_of.count(r.vm_id) ? start_of[r.vm_id] : 0;
        std::snprintf(buf, sizeof buf, "reject slot=%lld vm=%lld reason=%s",
                      static_cast<long long>(slot), static_cast<long long>(r.vm_id),
                      r.reason.c_str());
        events.push_back({slot, r.vm_id, 2, buf});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.slot != b.slot) return a.slot < b.slot;
        if (a.vm_id != b.vm_id) return a.vm_id < b.vm_id;
        return a.kind < b.kind;
    });
    std::string out;
    for (const auto& e : events) {
        out += e.text;
        out += '\n';
    }
    return out;
}

}  // namespace

namespace {

void validate_requests(const std::vector<VmRequest>& requests) {
    std::vector<VmId> ids;
    ids.reserve(requests.size());
    for (const auto& r : requests) {
        if (r.start < 0 || r.end <= r.start)
            throw InvalidSpec("request " + std::to_string(r.vm_id) +
                              ": lifecycle must satisfy 0 <= start < end");
        if (!r.demand.nonnegative())
            throw InvalidSpec("request " + std::to_string(r.vm_id) + ": negative demand");
        ids.push_back(r.vm_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw InvalidSpec("duplicate vm ids in the request list");
}

}  // namespace

RunResult run(const std::string& algorithm, const std::vector<VmRequest>& requests,
              const Datacenter& fleet, const ExperimentConfig& cfg) {
    validate_requests(requests);
    SchedulerOptions opts{cfg.seed, cfg.prepartition_k, cfg.migration_factor};
    auto sched = make_scheduler(algorithm, opts);

    RunResult result;
    if (auto* online = dynamic_cast<OnlineScheduler*>(sched.get())) {
        result.plan = run_online(*online, requests, fleet.pristine_clone(true));
    } else {
        auto* offline = dynamic_cast<OfflineScheduler*>(sched.get());
        const bool energy = sched->kind().family == SchedulerFamily::OfflineEnergy ||
                            sched->kind().family == SchedulerFamily::OnlineEnergy;
        result.plan = offline->schedule(requests, fleet.pristine_clone(!energy));
    }

    ProfileOptions popts;
    popts.t_obs_override = cfg.t_obs_override;
    result.profile = build_profile(result.plan, requests, fleet, popts);
    result.report = compute_report(result.profile, result.plan, fleet, requests.size());
    result.log = render_log(result.plan, requests);

    result.requests = requests;
    std::unordered_map<VmId, VmStatus> status;
    for (const auto& a : result.plan.assignments) status[a.vm_id] = VmStatus::Released;
    for (const auto& r : result.plan.rejections) status[r.vm_id] = VmStatus::Rejected;
    for (auto& r : result.requests) {
        auto it = status.find(r.vm_id);
        if (it != status.end()) r.status = it->second;
    }
    return result;
}

// --- comparison --------------------------------------------------------------------

const ComparisonCell& ComparisonTable::cell(const std::string& metric,
                                            const std::string& algorithm) const {
    for (std::size_t m = 0; m < metrics.size(); ++m)
        for (std::size_t a = 0; a < algorithms.size(); ++a)
            if (metrics[m] == metric && algorithms[a] == algorithm) return cells[m][a];
    throw InvalidSpec("no cell for (" + metric + ", " + algorithm + ")");
}

ComparisonTable compare(const ExperimentConfig& cfg, const Datacenter& fleet,
                        const WorkloadProvider& workload, const RunObserver& observer) {
    cfg.validate();
    for (const auto& name : cfg.algorithms) make_scheduler(name);  // throws on unknown
    for (const auto& m : cfg.metrics) {
        if (std::find(metric_names().begin(), metric_names().end(), m) == metric_names().end()) {
            std::string known;
            for (const auto& n : metric_names()) known += (known.empty() ? "" : ", ") + n;
            throw InvalidSpec("unknown metric '" + m + "'; known metrics: " + known);
        }
    }

    ComparisonTable table;
    table.metrics = cfg.metrics;
    table.algorithms = cfg.algorithms;
    table.repetitions = cfg.repetitions;
    table.cells.assign(cfg.metrics.size(),
                       std::vector<ComparisonCell>(cfg.algorithms.size()));

    std::uint64_t seed_state = cfg.seed;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rep_seed = splitmix64(seed_state);
        // One request list per repetition, shared by every algorithm.
        const std::vector<VmRequest> requests = workload(rep_seed, rep);
        ExperimentConfig rep_cfg = cfg;
        rep_cfg.seed = rep_seed;
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            RunResult res = run(cfg.algorithms[a], requests, fleet, rep_cfg);
            for (std::size_t m = 0; m < cfg.metrics.size(); ++m)
                table.cells[m][a].samples.push_back(res.report.metric(cfg.metrics[m]));
            if (observer) observer(cfg.algorithms[a], rep, res);
        }
    }
    for (auto& row : table.cells) {
        for (auto& cell : row) {
            double sum = 0.0;
            for (double v : cell.samples) sum += v;
            cell.value = cell.samples.empty() ? 0.0 : sum / static_cast<double>(cell.samples.size());
            if (cell.samples.size() > 1) cell.ci = confidence_interval(cell.samples);
        }
    }
    return table;
}

ComparisonTable compare(const ExperimentConfig& cfg, const RunObserver& observer) {
    FleetConfig fc = load_datacenter_config(cfg.pm_config_path);
    Datacenter fleet = build_fleet(fc, cfg.slot_minutes);

    if (cfg.workload.kind == WorkloadSource::Kind::Trace) {
        TraceParseResult parsed =
            parse_trace(cfg.workload.trace_path, cfg.slot_minutes, cfg.workload.trace_demand);
        return compare(cfg, fleet, [&parsed](std::uint64_t, int) { return parsed.requests; },
                       observer);
    }
    GeneratorSpec base = cfg.workload.generator;
    if (base.vm_type_mix.empty()) base.vm_type_mix.assign(fc.vm_types.size(), 1.0);
    return compare(cfg, fleet,
                   [&base, &fc](std::uint64_t rep_seed, int) {
                       GeneratorSpec spec = base;
                       spec.seed = rep_seed;
                       return generate(spec, fc.vm_types);
                   },
                   observer);
}

// --- experiment config file -----------------------------------------------------------

namespace {

// Relative paths inside a config file are taken relative to the file.
std::string resolve_near(const std::string& config_path, const std::string& target) {
    std::filesystem::path t(target);
    if (t.is_absolute()) return target;
    return (std::filesystem::path(config_path).parent_path() / t).string();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("experiment: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("experiment: " + std::string(e.what()));
    }

    try {
        ExperimentConfig cfg;
        cfg.pm_config_path = resolve_near(path, j.at("pm_config").get<std::string>());
        cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
        cfg.metrics = j.at("metrics").get<std::vector<std::string>>();
        cfg.repetitions = j.value("repetitions", 1);
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.slot_minutes = j.value("slot_minutes", 5.0);
        if (j.contains("t_obs") && !j.at("t_obs").is_null())
            cfg.t_obs_override = j.at("t_obs").get<double>();
        cfg.prepartition_k = j.value("prepartition_k", 4);
        cfg.migration_factor = j.value("migration_factor", 0.1);

        const auto& w = j.at("workload");
        const std::string source = w.value("source", "generator");
        if (source == "trace") {
            cfg.workload.kind = WorkloadSource::Kind::Trace;
            cfg.workload.trace_path = resolve_near(path, w.at("path").get<std::string>());
            cfg.workload.trace_demand.mem_per_cpu =
                w.value("mem_per_cpu", cfg.workload.trace_demand.mem_per_cpu);
            cfg.workload.trace_demand.storage_per_cpu =
                w.value("storage_per_cpu", cfg.workload.trace_demand.storage_per_cpu);
        } else if (source == "generator") {
            cfg.workload.kind = WorkloadSource::Kind::Generator;
            GeneratorSpec& g = cfg.workload.generator;
            g.count = w.value("count", std::int64_t{1});
            const std::string dist = w.value("distribution", "uniform");
            if (dist == "poisson")
                g.distribution = Distribution::Poisson;
            else if (dist == "normal")
                g.distribution = Distribution::Normal;
            else if (dist == "uniform")
                g.distribution = Distribution::Uniform;
            else
                throw ConfigError("experiment: unknown distribution '" + dist + "'");
            const std::string target = w.value("target", "start");
            if (target == "start")
                g.target = TargetField::StartTime;
            else if (target == "duration")
                g.target = TargetField::Duration;
            else
                throw ConfigError("experiment: unknown target field '" + target + "'");
            g.lambda = w.value("lambda", 1.0);
            g.mean = w.value("mean", 0.0);
            g.stddev = w.value("stddev", 0.0);
            g.min = w.value("min", 0.0);
            g.max = w.value("max", 0.0);
            g.fixed_start = w.value("fixed_start", std::int64_t{0});
            g.fixed_duration = w.value("fixed_duration", std::int64_t{1});
            if (w.contains("vm_type_mix"))
                g.vm_type_mix = w.at("vm_type_mix").get<std::vector<double>>();
        } else {
            throw ConfigError("experiment: unknown workload source '" + source + "'");
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("experiment: " + std::string(e.what()));
    }
}

}  // namespace dcsim
