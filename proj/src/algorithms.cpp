#include "dcsim/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dcsim {

// --- online placement cores --------------------------------------------------

std::optional<int> random_place(const VmRequest& req, const Datacenter& dc, std::mt19937_64& rng) {
    const auto& pms = dc.pms();
    if (pms.empty()) return std::nullopt;
    std::uniform_int_distribution<int> draw(0, static_cast<int>(pms.size()) - 1);
    for (std::size_t attempt = 0; attempt < pms.size(); ++attempt) {
        int idx = draw(rng);
        if (pms[static_cast<std::size_t>(idx)].fits(req.demand)) return idx;
    }
    // After M failed draws, one exhaustive scan so unsatisfiable requests
    // terminate as rejections instead of looping.
    for (const auto& pm : pms)
        if (pm.fits(req.demand)) return pm.id();
    return std::nullopt;
}

std::optional<int> round_robin_place(const VmRequest& req, const Datacenter& dc, int& cursor) {
    const auto& pms = dc.pms();
    const int m = static_cast<int>(pms.size());
    if (m == 0) return std::nullopt;
    for (int step = 0; step < m; ++step) {
        int idx = (cursor + step) % m;
        if (pms[static_cast<std::size_t>(idx)].fits(req.demand)) {
            cursor = (idx + 1) % m;
            return idx;
        }
    }
    return std::nullopt;  // full cycle without a fit; cursor stays put
}

std::optional<int> ls_place(const VmRequest& req, const Datacenter& dc) {
    std::optional<int> best;
    double best_load = 0.0;
    for (const auto& pm : dc.pms()) {
        if (!pm.fits(req.demand)) continue;
        double load = pm.utilization().mean();
        if (!best || load < best_load) {
            best = pm.id();
            best_load = load;
        }
    }
    return best;
}

// --- offline planning state ----------------------------------------------------

namespace {

// Per-PM accounting for planners that place whole intervals out of arrival
// order: a slot timeline for feasibility plus the running load L_i.
struct PlannerPm {
    int id = 0;
    ResourceVector capacity;
    UsageTimeline timeline;
    double load = 0.0;  // capacity_makespan
    bool powered_on = true;
};

struct Planner {
    std::vector<PlannerPm> pms;

    Planner(const Datacenter& dc, bool powered_on) {
        pms.reserve(dc.size());
        for (const auto& pm : dc.pms())
            pms.push_back(PlannerPm{pm.id(), pm.capacity(), {}, 0.0, powered_on});
    }

    bool fits(const PlannerPm& pm, const ResourceVector& demand, Slot start, Slot end) const {
        return pm.powered_on && pm.timeline.fits(demand, pm.capacity, start, end);
    }

    void place(PlannerPm& pm, const ResourceVector& demand, Slot start, Slot end) {
        pm.timeline.add(demand, start, end);
        pm.load += demand.cpu * static_cast<double>(end - start);
    }

    void remove(PlannerPm& pm, const ResourceVector& demand, Slot start, Slot end) {
        pm.timeline.remove(demand, start, end);
        pm.load -= demand.cpu * static_cast<double>(end - start);
    }

    // Fitting PM with the lowest load; ties broken by lowest pm id.
    PlannerPm* lowest_load_fit(const ResourceVector& demand, Slot start, Slot end) {
        PlannerPm* best = nullptr;
        for (auto& pm : pms) {
            if (!fits(pm, demand, start, end)) continue;
            if (!best || pm.load < best->load) best = &pm;
        }
        return best;
    }
};

std::vector<const VmRequest*> sorted_by(const std::vector<VmRequest>& requests,
                                        bool (*less)(const VmRequest&, const VmRequest&)) {
    std::vector<const VmRequest*> order;
    order.reserve(requests.size());
    for (const auto& r : requests) order.push_back(&r);
    std::sort(order.begin(), order.end(),
              [less](const VmRequest* a, const VmRequest* b) { return less(*a, *b); });
    return order;
}

}  // namespace

// --- offline load balancing ----------------------------------------------------

SchedulePlan lpt_schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) {
    SchedulePlan plan;
    Planner planner(dc, true);
    auto order = sorted_by(requests, [](const VmRequest& a, const VmRequest& b) {
        if (a.duration() != b.duration()) return a.duration() > b.duration();
        return a.vm_id < b.vm_id;
    });
    for (const VmRequest* req : order) {
        PlannerPm* pm = planner.lowest_load_fit(req->demand, req->start, req->end);
        if (!pm) {
            plan.rejections.push_back({req->vm_id, "no-fit"});
            continue;
        }
        planner.place(*pm, req->demand, req->start, req->end);
        plan.assignments.push_back({req->vm_id, pm->id, req->start, req->end});
    }
    for (const auto& pm : dc.pms()) plan.powered_on.push_back(pm.id());
    return plan;
}

// --- offline energy saving ------------------------------------------------------

SchedulePlan edf_energy_schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) {
    SchedulePlan plan;
    plan.energy_aware = true;
    Planner planner(dc, false);  // fleet starts powered off
    auto order = sorted_by(requests, [](const VmRequest& a, const VmRequest& b) {
        if (a.end != b.end) return a.end > b.end;
        return a.vm_id < b.vm_id;
    });
    for (const VmRequest* req : order) {
        PlannerPm* target = nullptr;
        for (auto& pm : planner.pms) {  // first fit over powered-on PMs
            if (planner.fits(pm, req->demand, req->start, req->end)) {
                target = &pm;
                break;
            }
        }
        if (!target) {  // turn on the first powered-off PM that can host it
            for (auto& pm : planner.pms) {
                if (pm.powered_on) continue;
                if (!req->demand.fits_within(pm.capacity)) continue;
                pm.powered_on = true;
                plan.powered_on.push_back(pm.id);
                target = &pm;
                break;
            }
        }
        if (!target) {
            plan.rejections.push_back({req->vm_id, "no-fit"});
            continue;
        }
        planner.place(*target, req->demand, req->start, req->end);
        plan.assignments.push_back({req->vm_id, target->id, req->start, req->end});
    }
    std::sort(plan.powered_on.begin(), plan.powered_on.end());
    return plan;
}

// --- post-migration rebalancing ---------------------------------------------------

namespace {

struct PlacedVm {
    VmId vm_id;
    ResourceVector demand;
    Slot start;
    Slot end;
    int original_pm;
    double cm;
};

}  // namespace

SchedulePlan post_migration(const SchedulePlan& plan, const std::vector<VmRequest>& requests,
                            const Datacenter& dc, double factor) {
    if (factor < 0.0) throw InvalidSpec("migration factor must be >= 0");

    std::unordered_map<VmId, const VmRequest*> by_id;
    for (const auto& r : requests) by_id[r.vm_id] = &r;

    Planner planner(dc, true);
    std::vector<PlacedVm> placed;
    placed.reserve(plan.assignments.size());
    for (const auto& a : plan.assignments) {
        auto it = by_id.find(a.vm_id);
        if (it == by_id.end()) throw InvalidSpec("plan references unknown vm id");
        const ResourceVector& d = it->second->demand;
        planner.place(planner.pms[static_cast<std::size_t>(a.pm_id)], d, a.start, a.end);
        placed.push_back({a.vm_id, d, a.start, a.end, a.pm_id,
                          d.cpu * static_cast<double>(a.end - a.start)});
    }

    double avg = 0.0;
    for (const auto& pm : planner.pms) avg += pm.load;
    avg /= planner.pms.empty() ? 1.0 : static_cast<double>(planner.pms.size());
    const double up = avg * (1.0 + factor);
    const double low = avg * (1.0 - factor);

    // Candidate order: donors by pm id, their VMs largest first. Each entry
    // is removed and re-placed atomically, so the origin stays a feasible
    // fallback and no VM can be stranded mid-rebalance.
    std::vector<PlacedVm*> order;
    for (auto& v : placed) order.push_back(&v);
    std::sort(order.begin(), order.end(), [](const PlacedVm* a, const PlacedVm* b) {
        if (a->original_pm != b->original_pm) return a->original_pm < b->original_pm;
        if (a->cm != b->cm) return a->cm > b->cm;
        return a->vm_id < b->vm_id;
    });

    SchedulePlan out;
    out.rejections = plan.rejections;
    out.powered_on = plan.powered_on;
    std::unordered_map<VmId, int> final_pm;
    for (PlacedVm* v : order) final_pm[v->vm_id] = v->original_pm;

    for (PlacedVm* v : order) {
        PlannerPm& donor = planner.pms[static_cast<std::size_t>(v->original_pm)];
        // Donors are PMs loaded above the low threshold; a VM is taken only
        // if its removal keeps the donor at or above it.
        if (!(donor.load > low)) continue;
        if (donor.load - v->cm < low) continue;
        planner.remove(donor, v->demand, v->start, v->end);

        // Recipients are PMs below the up threshold that stay within it.
        // Returning home is not a migration, so the origin is preferred
        // when it qualifies; otherwise the least-loaded recipient wins, and
        // with no qualifying recipient the least-loaded fitting PM takes it.
        PlannerPm* target = nullptr;
        if (donor.load < up && donor.load + v->cm <= up) target = &donor;
        if (!target) {
            for (auto& pm : planner.pms) {
                if (!(pm.load < up) || pm.load + v->cm > up) continue;
                if (!planner.fits(pm, v->demand, v->start, v->end)) continue;
                if (!target || pm.load < target->load) target = &pm;
            }
        }
        if (!target) target = planner.lowest_load_fit(v->demand, v->start, v->end);
        if (!target) target = &donor;  // just vacated, still feasible
        planner.place(*target, v->demand, v->start, v->end);
        final_pm[v->vm_id] = target->id;
        if (target->id != v->original_pm)
            out.migrations.push_back({v->vm_id, v->original_pm, target->id, v->start});
    }

    for (const auto& a : plan.assignments)
        out.assignments.push_back({a.vm_id, final_pm[a.vm_id], a.start, a.end});
    out.migration_count = static_cast<long>(out.migrations.size());
    return out;
}

// --- prepartition -----------------------------------------------------------------

double compute_p0(const std::vector<VmRequest>& requests, int pm_count) {
    if (pm_count < 1) throw InvalidSpec("pm count must be >= 1");
    if (requests.empty()) throw InvalidSpec("requests must be non-empty");
    double max_cm = 0.0, total = 0.0;
    for (const auto& r : requests) {
        double cm = capacity_makespan_of(r);
        max_cm = std::max(max_cm, cm);
        total += cm;
    }
    return std::max(max_cm, total / static_cast<double>(pm_count));
}

SchedulePlan prepartition_schedule(const std::vector<VmRequest>& requests, const Datacenter& dc,
                                   int k) {
    if (k < 1) throw InvalidSpec("prepartition: k must be >= 1");
    SchedulePlan plan;
    for (const auto& pm : dc.pms()) plan.powered_on.push_back(pm.id());
    if (requests.empty()) return plan;

    const double p0 = compute_p0(requests, static_cast<int>(dc.size()));
    const double bound = std::ceil(p0 / static_cast<double>(k));  // capacity_makespan units

    Planner planner(dc, true);
    // Offline preprocessing: longest processing time first, like the other
    // offline load balancers.
    auto order = sorted_by(requests, [](const VmRequest& a, const VmRequest& b) {
        if (a.duration() != b.duration()) return a.duration() > b.duration();
        return a.vm_id < b.vm_id;
    });
    for (const VmRequest* req_ptr : order) {
        const VmRequest& req = *req_ptr;
        // Equal-length split into pieces whose capacity_makespan stays
        // within the bound; the last piece may be shorter.
        std::vector<std::pair<Slot, Slot>> pieces;
        if (capacity_makespan_of(req) > bound) {
            Slot piece_len = static_cast<Slot>(std::floor(bound / req.demand.cpu));
            if (piece_len < 1) piece_len = 1;  // one slot already exceeds the bound
            for (Slot s = req.start; s < req.end; s += piece_len)
                pieces.emplace_back(s, std::min(s + piece_len, req.end));
        } else {
            pieces.emplace_back(req.start, req.end);
        }

        std::vector<std::pair<PlannerPm*, std::pair<Slot, Slot>>> placed;
        bool ok = true;
        for (const auto& piece : pieces) {
            PlannerPm* pm = planner.lowest_load_fit(req.demand, piece.first, piece.second);
            if (!pm) {
                ok = false;
                break;
            }
            planner.place(*pm, req.demand, piece.first, piece.second);
            placed.emplace_back(pm, piece);
        }
        if (!ok) {  // reject the whole request, unwinding placed pieces
            for (const auto& [pm, piece] : placed)
                planner.remove(*pm, req.demand, piece.first, piece.second);
            plan.rejections.push_back({req.vm_id, "no-fit"});
            continue;
        }
        for (std::size_t i = 0; i < placed.size(); ++i) {
            plan.assignments.push_back(
                {req.vm_id, placed[i].first->id, placed[i].second.first, placed[i].second.second});
            if (i > 0)
                plan.migrations.push_back({req.vm_id, placed[i - 1].first->id,
                                           placed[i].first->id, placed[i].second.first});
        }
        if (placed.size() > 1) plan.migration_count += static_cast<long>(placed.size()) - 1;
    }
    return plan;
}

// --- registry ----------------------------------------------------------------------

namespace {

class RandomScheduler final : public OnlineScheduler {
public:
    explicit RandomScheduler(std::uint64_t seed) : rng_(seed) {}
    SchedulerKind kind() const override { return {SchedulerFamily::OnlineLoadBalance, "random"}; }
    std::optional<int> place(const VmRequest& req, const Datacenter& dc) override {
        return random_place(req, dc, rng_);
    }

private:
    std::mt19937_64 rng_;
};

class RoundRobinScheduler final : public OnlineScheduler {
public:
    SchedulerKind kind() const override {
        return {SchedulerFamily::OnlineLoadBalance, "round-robin"};
    }
    std::optional<int> place(const VmRequest& req, const Datacenter& dc) override {
        return round_robin_place(req, dc, cursor_);
    }

private:
    int cursor_ = 0;
};

class LsScheduler final : public OnlineScheduler {
public:
    SchedulerKind kind() const override { return {SchedulerFamily::OnlineLoadBalance, "ls"}; }
    std::optional<int> place(const VmRequest& req, const Datacenter& dc) override {
        return ls_place(req, dc);
    }
};

class LptScheduler final : public OfflineScheduler {
public:
    SchedulerKind kind() const override { return {SchedulerFamily::OfflineLoadBalance, "lpt"}; }
    SchedulePlan schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) override {
        return lpt_schedule(requests, dc);
    }
};

class MigScheduler final : public OfflineScheduler {
public:
    explicit MigScheduler(double factor) : factor_(factor) {}
    SchedulerKind kind() const override { return {SchedulerFamily::OfflineLoadBalance, "mig"}; }
    SchedulePlan schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) override {
        return post_migration(lpt_schedule(requests, dc), requests, dc, factor_);
    }

private:
    double factor_;
};

class PrepartitionScheduler final : public OfflineScheduler {
public:
    explicit PrepartitionScheduler(int k) : k_(k) {}
    SchedulerKind kind() const override {
        return {SchedulerFamily::OfflineLoadBalance, "prepartition"};
    }
    SchedulePlan schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) override {
        return prepartition_schedule(requests, dc, k_);
    }

private:
    int k_;
};

class EdfScheduler final : public OfflineScheduler {
public:
    SchedulerKind kind() const override { return {SchedulerFamily::OfflineEnergy, "edf"}; }
    SchedulePlan schedule(const std::vector<VmRequest>& requests, const Datacenter& dc) override {
        return edf_energy_schedule(requests, dc);
    }
};

}  // namespace

const std::vector<std::string>& scheduler_names() {
    static const std::vector<std::string> names{"random", "round-robin", "ls",  "lpt",
                                                "mig",    "prepartition", "edf"};
    return names;
}

std::unique_ptr<Scheduler> make_scheduler(const std::string& name, const SchedulerOptions& opts) {
    if (name == "random") return std::make_unique<RandomScheduler>(opts.seed);
    if (name == "round-robin") return std::make_unique<RoundRobinScheduler>();
    if (name == "ls") return std::make_unique<LsScheduler>();
    if (name == "lpt") return std::make_unique<LptScheduler>();
    if (name == "mig") return std::make_unique<MigScheduler>(opts.migration_factor);
    if (name == "prepartition") return std::make_unique<PrepartitionScheduler>(opts.prepartition_k);
    if (name == "edf") return std::make_unique<EdfScheduler>();
    std::string known;
    for (const auto& n : scheduler_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidSpec("unknown algorithm '" + name + "'; known algorithms: " + known);
}

}  // namespace dcsim
