#include "doctest.h"

#include <random>
#include <set>

#include "dcsim/algorithms.hpp"
#include "dcsim/engine.hpp"
#include "oracles.hpp"

using namespace dcsim;

namespace {

Datacenter unit_fleet(int count, bool on = true) {
    PmType t{"unit", {1.0, 1.0, 1.0}, 300.0, 500.0};
    return Datacenter({t}, {count}, TimeGrid{1.0, 0}, on);
}

VmRequest req(VmId id, double cpu, Slot start, Slot end) {
    return VmRequest{id, {cpu, cpu, cpu}, start, end, VmStatus::Pending};
}

std::vector<double> plan_loads(const SchedulePlan& plan, const std::vector<VmRequest>& reqs,
                               int pm_count) {
    std::vector<double> load(static_cast<std::size_t>(pm_count), 0.0);
    for (const auto& a : plan.assignments)
        for (const auto& r : reqs)
            if (r.vm_id == a.vm_id)
                load[static_cast<std::size_t>(a.pm_id)] +=
                    r.demand.cpu * static_cast<double>(a.end - a.start);
    return load;
}

}  // namespace

TEST_CASE("every registry entry constructs and declares one family") {
    for (const auto& name : scheduler_names()) {
        auto sched = make_scheduler(name);
        REQUIRE(sched != nullptr);
        CHECK(sched->kind().name == name);
        bool online = dynamic_cast<OnlineScheduler*>(sched.get()) != nullptr;
        bool offline = dynamic_cast<OfflineScheduler*>(sched.get()) != nullptr;
        CHECK(online != offline);
        if (name == "edf") CHECK(sched->kind().family == SchedulerFamily::OfflineEnergy);
        if (name == "lpt" || name == "mig" || name == "prepartition")
            CHECK(sched->kind().family == SchedulerFamily::OfflineLoadBalance);
        if (name == "random" || name == "round-robin" || name == "ls")
            CHECK(sched->kind().family == SchedulerFamily::OnlineLoadBalance);
    }
    CHECK_THROWS_AS(make_scheduler("bogus"), InvalidSpec);
}

// --- random ------------------------------------------------------------------

TEST_CASE("random placement lands on the only candidate") {
    Datacenter dc = unit_fleet(1);
    std::mt19937_64 rng(123);
    for (int i = 0; i < 5; ++i) {
        auto pm = random_place(req(i, 0.1, 0, 5), dc, rng);
        REQUIRE(pm.has_value());
        CHECK(*pm == 0);
    }
}

TEST_CASE("random placement rejects on a saturated fleet after bounded retries") {
    Datacenter dc = unit_fleet(3);
    for (int i = 0; i < 3; ++i) dc.pm(i).allocate(req(i, 1.0, 0, 10), 0, 10);
    std::mt19937_64 rng(7);
    CHECK_FALSE(random_place(req(99, 0.5, 0, 10), dc, rng).has_value());
}

TEST_CASE("random placement scans exhaustively before rejecting") {
    // One narrow slot left on the last PM; unlucky draws must not reject it.
    Datacenter dc = unit_fleet(8);
    for (int i = 0; i < 7; ++i) dc.pm(i).allocate(req(i, 1.0, 0, 10), 0, 10);
    for (int trial = 0; trial < 50; ++trial) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(trial));
        auto pm = random_place(req(100 + trial, 0.9, 0, 10), dc, rng);
        REQUIRE(pm.has_value());
        CHECK(*pm == 7);
    }
}

TEST_CASE("seeded random placement replays identically") {
    PmType t{"1", {16.0, 30.0, 3380.0}, 300.0, 500.0};
    Datacenter fleet({t}, {10}, TimeGrid{1.0, 0}, true);
    std::vector<VmRequest> reqs;
    for (int j = 0; j < 20; ++j)
        reqs.push_back(VmRequest{j, {1.0, 1.7, 160.0}, 0, 10, VmStatus::Pending});

    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.slot_minutes = 1.0;
    RunResult a = run("random", reqs, fleet, cfg);
    RunResult b = run("random", reqs, fleet, cfg);
    CHECK(a.log == b.log);
    REQUIRE(a.plan.assignments.size() == b.plan.assignments.size());
    for (std::size_t i = 0; i < a.plan.assignments.size(); ++i)
        CHECK(a.plan.assignments[i].pm_id == b.plan.assignments[i].pm_id);
}

// --- round robin ----------------------------------------------------------------

TEST_CASE("round robin takes the cursor PM when it fits") {
    Datacenter dc = unit_fleet(4);
    int cursor = 2;
    auto pm = round_robin_place(req(1, 0.5, 0, 5), dc, cursor);
    REQUIRE(pm.has_value());
    CHECK(*pm == 2);
    CHECK(cursor == 3);
}

TEST_CASE("round robin wraps past full PMs") {
    Datacenter dc = unit_fleet(4);
    dc.pm(3).allocate(req(50, 1.0, 0, 10), 0, 10);
    int cursor = 3;
    auto pm = round_robin_place(req(1, 0.5, 0, 10), dc, cursor);
    REQUIRE(pm.has_value());
    CHECK(*pm == 0);
    CHECK(cursor == 1);
}

TEST_CASE("round robin leaves the cursor alone on rejection") {
    Datacenter dc = unit_fleet(4);
    for (int i = 0; i < 4; ++i) dc.pm(i).allocate(req(i, 1.0, 0, 10), 0, 10);
    int cursor = 2;
    CHECK_FALSE(round_robin_place(req(9, 0.5, 0, 10), dc, cursor).has_value());
    CHECK(cursor == 2);
}

// --- least loaded -----------------------------------------------------------------

TEST_CASE("least loaded picks the smallest mean utilization") {
    Datacenter dc = unit_fleet(3);
    dc.pm(0).allocate(req(10, 0.2, 0, 10), 0, 10);
    dc.pm(1).allocate(req(11, 0.1, 0, 10), 0, 10);
    dc.pm(2).allocate(req(12, 0.3, 0, 10), 0, 10);
    auto pm = ls_place(req(1, 0.1, 0, 10), dc);
    REQUIRE(pm.has_value());
    CHECK(*pm == 1);
}

TEST_CASE("least loaded breaks ties toward the lowest pm id") {
    Datacenter dc = unit_fleet(3);
    auto pm = ls_place(req(1, 0.5, 0, 10), dc);
    REQUIRE(pm.has_value());
    CHECK(*pm == 0);
}

TEST_CASE("least loaded skips the argmin when it lacks capacity") {
    Datacenter dc = unit_fleet(3);
    dc.pm(0).allocate(VmRequest{10, {0.3, 0.3, 0.3}, 0, 10, VmStatus::Pending}, 0, 10);
    // lowest mean utilization, but not enough cpu left for a 0.5 request
    dc.pm(1).allocate(VmRequest{11, {0.6, 0.0, 0.0}, 0, 10, VmStatus::Pending}, 0, 10);
    dc.pm(2).allocate(VmRequest{12, {0.4, 0.4, 0.4}, 0, 10, VmStatus::Pending}, 0, 10);
    auto pm = ls_place(VmRequest{1, {0.5, 0.1, 0.1}, 0, 10, VmStatus::Pending}, dc);
    REQUIRE(pm.has_value());
    CHECK(*pm == 0);  // next-lowest fitting PM
}

// --- longest duration first ---------------------------------------------------------

TEST_CASE("single request goes to the first PM") {
    Datacenter dc = unit_fleet(3);
    auto plan = lpt_schedule({req(1, 0.5, 0, 10)}, dc);
    REQUIRE(plan.assignments.size() == 1);
    CHECK(plan.assignments[0].pm_id == 0);
}

TEST_CASE("greedy balance of durations 4,3,2,1 over two PMs") {
    Datacenter dc = unit_fleet(2);
    std::vector<VmRequest> reqs{req(1, 0.1, 0, 4), req(2, 0.1, 0, 3), req(3, 0.1, 0, 2),
                                req(4, 0.1, 0, 1)};
    auto plan = lpt_schedule(reqs, dc);
    auto loads = plan_loads(plan, reqs, 2);
    CHECK(loads[0] == doctest::Approx(0.5));  // 4+1 tenths
    CHECK(loads[1] == doctest::Approx(0.5));  // 3+2 tenths
}

TEST_CASE("equal durations keep vm id order") {
    Datacenter dc = unit_fleet(4);
    std::vector<VmRequest> reqs{req(3, 0.1, 0, 5), req(1, 0.1, 0, 5), req(2, 0.1, 0, 5)};
    auto plan = lpt_schedule(reqs, dc);
    REQUIRE(plan.assignments.size() == 3);
    CHECK(plan.assignments[0].vm_id == 1);
    CHECK(plan.assignments[1].vm_id == 2);
    CHECK(plan.assignments[2].vm_id == 3);
}

TEST_CASE("lpt records rejections for unplaceable requests") {
    Datacenter dc = unit_fleet(1);
    std::vector<VmRequest> reqs{req(1, 1.0, 0, 10), req(2, 1.0, 0, 10)};
    auto plan = lpt_schedule(reqs, dc);
    CHECK(plan.assignments.size() == 1);
    REQUIRE(plan.rejections.size() == 1);
    CHECK(plan.rejections[0].vm_id == 2);
}

// --- end-time decreasing energy scheduling -------------------------------------------

TEST_CASE("one VM powers on one PM") {
    Datacenter dc = unit_fleet(3, false);
    auto plan = edf_energy_schedule({req(1, 0.5, 0, 10)}, dc);
    CHECK(plan.energy_aware);
    CHECK(plan.powered_on == std::vector<int>{0});
    CHECK(plan.rejections.empty());
}

TEST_CASE("full-PM demands overflow by pigeonhole") {
    Datacenter dc = unit_fleet(2, false);
    std::vector<VmRequest> reqs{req(1, 1.0, 0, 10), req(2, 1.0, 2, 8), req(3, 1.0, 4, 6)};
    auto plan = edf_energy_schedule(reqs, dc);
    CHECK(plan.assignments.size() == 2);
    CHECK(plan.rejections.size() == 1);
    CHECK(plan.powered_on.size() == 2);
}

TEST_CASE("end-time ordering packs pairs onto powered PMs") {
    // starts 1..50, ends 100..51 on 20 unit PMs: 10 rejections, all PMs on
    Datacenter dc = unit_fleet(20, false);
    std::vector<VmRequest> reqs;
    for (int j = 1; j <= 50; ++j) reqs.push_back(req(j, 0.5, j, 101 - j));
    auto plan = edf_energy_schedule(reqs, dc);
    CHECK(plan.rejections.size() == 10);
    CHECK(plan.powered_on.size() == 20);
    // the longest-lived pair shares PM 0
    std::set<VmId> on_pm0;
    for (const auto& a : plan.assignments)
        if (a.pm_id == 0) on_pm0.insert(a.vm_id);
    CHECK(on_pm0 == std::set<VmId>{1, 2});
}

// --- post migration --------------------------------------------------------------------

TEST_CASE("a balanced plan migrates nothing") {
    Datacenter dc = unit_fleet(4);
    std::vector<VmRequest> reqs;
    for (int j = 0; j < 8; ++j) reqs.push_back(req(j, 0.25, 0, 10));
    auto plan = lpt_schedule(reqs, dc);
    auto before = plan_loads(plan, reqs, 4);
    auto migrated = post_migration(plan, reqs, dc, 0.1);
    CHECK(migrated.migration_count == 0);
    CHECK(plan_loads(migrated, reqs, 4) == before);
    REQUIRE(migrated.assignments.size() == plan.assignments.size());
    for (std::size_t i = 0; i < plan.assignments.size(); ++i)
        CHECK(migrated.assignments[i].pm_id == plan.assignments[i].pm_id);
}

TEST_CASE("an overloaded donor sheds toward the idle PM until thresholds bind") {
    // loads {10, 2}: avg 6, up 6.6, low 5.4; exactly the 4-slot piece moves
    Datacenter dc = unit_fleet(2);
    std::vector<VmRequest> reqs{req(1, 0.1, 0, 40), req(2, 0.1, 0, 30), req(3, 0.1, 0, 20),
                                req(4, 0.1, 0, 10), req(5, 0.1, 0, 20)};
    SchedulePlan plan;
    plan.assignments = {{1, 0, 0, 40}, {2, 0, 0, 30}, {3, 0, 0, 20}, {4, 0, 0, 10}, {5, 1, 0, 20}};
    plan.powered_on = {0, 1};
    auto migrated = post_migration(plan, reqs, dc, 0.1);
    CHECK(migrated.migration_count == 1);
    REQUIRE(migrated.migrations.size() == 1);
    CHECK(migrated.migrations[0].vm_id == 1);  // the largest load piece
    CHECK(migrated.migrations[0].from_pm == 0);
    CHECK(migrated.migrations[0].to_pm == 1);
    auto loads = plan_loads(migrated, reqs, 2);
    CHECK(loads[0] == doctest::Approx(6.0));
    CHECK(loads[1] == doctest::Approx(6.0));
}

TEST_CASE("wider thresholds migrate no more than narrow ones") {
    Datacenter dc = unit_fleet(2);
    std::vector<VmRequest> reqs{req(1, 0.1, 0, 40), req(2, 0.1, 0, 30), req(3, 0.1, 0, 20),
                                req(4, 0.1, 0, 10), req(5, 0.1, 0, 20)};
    SchedulePlan plan;
    plan.assignments = {{1, 0, 0, 40}, {2, 0, 0, 30}, {3, 0, 0, 20}, {4, 0, 0, 10}, {5, 1, 0, 20}};
    plan.powered_on = {0, 1};
    long narrow = post_migration(plan, reqs, dc, 0.1).migration_count;
    long wide = post_migration(plan, reqs, dc, 1.0).migration_count;
    CHECK(wide <= narrow);
}

TEST_CASE("migration moves respect per-slot capacity") {
    // The donor's surplus VM overlaps the recipient's existing load, so the
    // only legal target is the third PM.
    Datacenter dc = unit_fleet(3);
    std::vector<VmRequest> reqs{req(1, 0.6, 0, 10), req(2, 0.6, 0, 10), req(3, 0.6, 0, 2)};
    SchedulePlan plan;
    plan.assignments = {{1, 0, 0, 10}, {2, 0, 0, 10}, {3, 1, 0, 2}};
    plan.powered_on = {0, 1, 2};
    auto migrated = post_migration(plan, reqs, dc, 0.1);
    for (const auto& a : migrated.assignments) {
        if (a.vm_id == 1 || a.vm_id == 2) {
            // whichever moved cannot share PM1 with vm 3's window... unless it fits
            if (a.pm_id == 1) CHECK(oracles::usage_at(migrated, reqs, 1, 0).cpu <= 1.0 + 1e-12);
        }
    }
    ProfileOptions opts;
    CHECK_NOTHROW(build_profile(migrated, reqs, dc, opts));
}

// --- lower bound -----------------------------------------------------------------------

TEST_CASE("the lower bound takes the larger of max and average load") {
    std::vector<VmRequest> reqs{req(1, 1.0, 0, 10), req(2, 1.0, 0, 6), req(3, 1.0, 0, 8)};
    CHECK(compute_p0(reqs, 2) == doctest::Approx(12.0));
    CHECK(compute_p0(reqs, 3) == doctest::Approx(10.0));
    CHECK(compute_p0({req(1, 1.0, 0, 5)}, 1) == doctest::Approx(5.0));
    CHECK_THROWS_AS(compute_p0(reqs, 0), InvalidSpec);
}

// --- prepartition ------------------------------------------------------------------------

TEST_CASE("k=1 never splits") {
    Datacenter dc = unit_fleet(3);
    std::vector<VmRequest> reqs{req(1, 0.5, 0, 12), req(2, 0.5, 3, 9), req(3, 0.5, 1, 4)};
    auto plan = prepartition_schedule(reqs, dc, 1);
    CHECK(plan.migration_count == 0);
    CHECK(plan.assignments.size() == reqs.size());
}

TEST_CASE("a 12-slot unit-demand request splits into four 3-slot pieces") {
    Datacenter dc = unit_fleet(2);
    std::vector<VmRequest> reqs{req(1, 1.0, 0, 12)};
    auto plan = prepartition_schedule(reqs, dc, 4);
    REQUIRE(plan.assignments.size() == 4);
    CHECK(plan.migration_count == 3);
    Slot expect_start = 0;
    for (const auto& a : plan.assignments) {
        CHECK(a.start == expect_start);
        CHECK(a.end - a.start == 3);
        expect_start = a.end;
    }
    CHECK(expect_start == 12);
}

TEST_CASE("subinterval unions rebuild each accepted lifecycle") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        Datacenter dc = unit_fleet(3);
        std::vector<VmRequest> reqs;
        int n = 2 + static_cast<int>(rng() % 7);
        for (int j = 0; j < n; ++j) {
            Slot s = static_cast<Slot>(rng() % 20);
            Slot d = 1 + static_cast<Slot>(rng() % 30);
            double cpu = 0.1 + 0.1 * static_cast<double>(rng() % 5);
            reqs.push_back(req(j, cpu, s, s + d));
        }
        auto plan = prepartition_schedule(reqs, dc, 1 + static_cast<int>(rng() % 8));

        std::set<VmId> rejected;
        for (const auto& r : plan.rejections) rejected.insert(r.vm_id);
        for (const auto& r : reqs) {
            std::vector<std::pair<Slot, Slot>> pieces;
            for (const auto& a : plan.assignments)
                if (a.vm_id == r.vm_id) pieces.emplace_back(a.start, a.end);
            if (rejected.count(r.vm_id)) {
                CHECK(pieces.empty());
                continue;
            }
            std::sort(pieces.begin(), pieces.end());
            REQUIRE_FALSE(pieces.empty());
            CHECK(pieces.front().first == r.start);
            CHECK(pieces.back().second == r.end);
            for (std::size_t i = 1; i < pieces.size(); ++i)
                CHECK(pieces[i].first == pieces[i - 1].second);  // disjoint, gapless
        }
        ProfileOptions opts;
        CHECK_NOTHROW(build_profile(plan, reqs, dc, opts));
    }
}

TEST_CASE("every algorithm emits plans that replay without violations") {
    std::mt19937_64 rng(4242);
    ExperimentConfig cfg;
    cfg.slot_minutes = 1.0;
    for (int trial = 0; trial < 40; ++trial) {
        Datacenter fleet = unit_fleet(2 + static_cast<int>(rng() % 3));
        std::vector<VmRequest> reqs;
        int n = 1 + static_cast<int>(rng() % 10);
        for (int j = 0; j < n; ++j) {
            Slot s = static_cast<Slot>(rng() % 12);
            Slot d = 1 + static_cast<Slot>(rng() % 10);
            reqs.push_back(req(j, 0.1 + 0.15 * static_cast<double>(rng() % 6), s, s + d));
        }
        cfg.seed = rng();
        for (const auto& name : scheduler_names()) CHECK_NOTHROW(run(name, reqs, fleet, cfg));
    }
}

TEST_CASE("the lower bound never exceeds the optimum or the greedy result") {
    std::mt19937_64 rng(31337);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Datacenter dc = unit_fleet(2);
        std::vector<VmRequest> reqs;
        int n = 1 + static_cast<int>(rng() % 6);
        for (int j = 0; j < n; ++j) {
            Slot s = static_cast<Slot>(rng() % 8);
            Slot d = 1 + static_cast<Slot>(rng() % (10 - s > 0 ? 10 - s : 1));
            double cpu = 0.1 + 0.1 * static_cast<double>(rng() % 4);
            reqs.push_back(req(j, cpu, s, std::min<Slot>(s + d, 10)));
        }
        auto plan = lpt_schedule(reqs, dc);
        if (!plan.rejections.empty()) continue;  // optimum undefined for partial service
        auto opt = oracles::brute_force_optimal_cm(reqs, dc);
        REQUIRE(opt.has_value());
        double p0 = compute_p0(reqs, 2);
        double greedy = oracles::plan_capacity_makespan(plan, reqs, 2);
        CHECK(p0 <= *opt + 1e-9);
        CHECK(greedy >= *opt - 1e-9);
        ++checked;
    }
    CHECK(checked > 100);
}
