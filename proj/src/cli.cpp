#include "dcsim/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dcsim/engine.hpp"
#include "dcsim/report.hpp"
#include "dcsim/validate.hpp"
#include "dcsim/workload.hpp"

namespace dcsim {

namespace {

constexpr double kEnergyReference = 250000.0;  // recorded calibration reference, watt-minutes

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<double> slot_minutes;
    std::optional<double> horizon;  // t_obs override, slots
    std::string format = "text";
    std::string out_path;
};

void add_global_flags(CLI::App* cmd, GlobalFlags& g) {
    cmd->add_option("--seed", g.seed, "Master seed");
    cmd->add_option("--slot-minutes", g.slot_minutes, "Minutes per time slot (default 5)");
    cmd->add_option("--horizon", g.horizon, "Observation horizon override, in slots");
    cmd->add_option("--format", g.format, "Report format: text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    cmd->add_option("--out", g.out_path, "Write the report to a file instead of stdout");
}

void apply_overrides(ExperimentConfig& cfg, const GlobalFlags& g) {
    if (g.seed) cfg.seed = *g.seed;
    if (g.slot_minutes) cfg.slot_minutes = *g.slot_minutes;
    if (g.horizon) cfg.t_obs_override = *g.horizon;
}

void emit(const std::string& content, const GlobalFlags& g, std::ostream& out) {
    if (g.out_path.empty()) {
        out << content;
        return;
    }
    std::ofstream f(g.out_path);
    if (!f) throw ConfigError("cannot write '" + g.out_path + "'");
    f << content;
}

int run_experiment(const std::string& config_path, const GlobalFlags& g,
                   const std::vector<std::string>& algo_override,
                   const std::vector<std::string>& metric_override,
                   const std::string& log_path, std::ostream& out) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    apply_overrides(cfg, g);
    if (!algo_override.empty()) cfg.algorithms = algo_override;
    if (!metric_override.empty()) cfg.metrics = metric_override;

    std::ofstream log;
    RunObserver observer;
    if (!log_path.empty()) {
        log.open(log_path);
        if (!log) throw ConfigError("cannot write '" + log_path + "'");
        observer = [&log](const std::string& algo, int rep, const RunResult& res) {
            log << "# algorithm=" << algo << " rep=" << rep << "\n" << res.log;
        };
    }

    ComparisonTable table = compare(cfg, observer);
    emit(render(table, g.format), g, out);
    return 0;
}

int run_validate(std::ostream& out) {
    auto rows = run_validation();
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-22s %-14s expected %-12.10g got %-12.10g %s\n",
                      r.scenario.c_str(), r.index.c_str(), r.expected, r.got,
                      r.pass() ? "PASS" : "FAIL");
        out << buf;
    }

    EnergyCalibration cal = run_energy_calibration();
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "energy-end-time        energy conventions (reference %.10g): "
                  "idle-power-half-open=%.10g marginal-only-half-open=%.10g "
                  "idle-power-inclusive=%.10g closest=%s\n",
                  kEnergyReference, cal.idle_power_half_open, cal.marginal_only_half_open,
                  cal.idle_power_inclusive, cal.closest_to(kEnergyReference).c_str());
    out << buf;

    auto failed = failing_rows(rows);
    std::snprintf(buf, sizeof buf, "RESULT: %s (%zu/%zu rows)\n", failed.empty() ? "PASS" : "FAIL",
                  rows.size() - failed.size(), rows.size());
    out << buf;
    return failed.empty() ? 0 : 1;
}

struct GenTraceArgs {
    std::int64_t count = 0;
    std::string distribution = "uniform";
    std::string target = "start";
    double lambda = 1.0;
    double mean = 0.0, stddev = 0.0;
    double min = 0.0, max = 0.0;
    std::int64_t fixed_start = 0;
    std::int64_t fixed_duration = 1;
    std::string vm_config;
};

int run_gen_trace(const GenTraceArgs& a, const GlobalFlags& g, std::ostream& out) {
    GeneratorSpec spec;
    spec.count = a.count;
    if (a.distribution == "poisson")
        spec.distribution = Distribution::Poisson;
    else if (a.distribution == "normal")
        spec.distribution = Distribution::Normal;
    else
        spec.distribution = Distribution::Uniform;
    spec.target = a.target == "duration" ? TargetField::Duration : TargetField::StartTime;
    spec.lambda = a.lambda;
    spec.mean = a.mean;
    spec.stddev = a.stddev;
    spec.min = a.min;
    spec.max = a.max;
    spec.fixed_start = a.fixed_start;
    spec.fixed_duration = a.fixed_duration;
    spec.seed = g.seed.value_or(0);

    std::vector<VmType> types =
        a.vm_config.empty() ? default_vm_types() : load_datacenter_config(a.vm_config).vm_types;
    spec.vm_type_mix.assign(types.size(), 1.0);

    double slot_minutes = g.slot_minutes.value_or(5.0);
    std::vector<VmRequest> requests = generate(spec, types);
    // Trace records carry only a processor count; memory/storage follow the
    // parse-side demand map so a generate/parse round trip is the identity.
    TraceDemandMap map;
    for (auto& r : requests) r.demand = map.demand(r.demand.cpu);

    if (g.out_path.empty()) throw ConfigError("gen-trace requires --out");
    write_trace(requests, g.out_path, slot_minutes);
    out << "wrote " << requests.size() << " requests to " << g.out_path << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"dcsim: discrete-time simulator for VM allocation in a datacenter"};
    app.require_subcommand(1);

    GlobalFlags run_flags, cmp_flags, gen_flags;
    std::string run_config, cmp_config, run_log, cmp_log;
    std::vector<std::string> run_algos, run_metrics, cmp_algos, cmp_metrics;

    CLI::App* cmd_run = app.add_subcommand("run", "Run the experiment described by a config file");
    cmd_run->add_option("--config", run_config, "Experiment config (JSON)")->required();
    cmd_run->add_option("--algo", run_algos, "Override the algorithm selection");
    cmd_run->add_option("--metric", run_metrics, "Override the metric selection");
    cmd_run->add_option("--log", run_log, "Write the placement/rejection/migration log here");
    add_global_flags(cmd_run, run_flags);

    CLI::App* cmd_compare =
        app.add_subcommand("compare", "Compare algorithms over an identical workload");
    cmd_compare->add_option("--config", cmp_config, "Experiment config (JSON)")->required();
    cmd_compare->add_option("--algos", cmp_algos, "Algorithms to compare")->delimiter(',');
    cmd_compare->add_option("--metrics", cmp_metrics, "Metrics to collect")->delimiter(',');
    cmd_compare->add_option("--log", cmp_log, "Write the placement/rejection/migration log here");
    add_global_flags(cmd_compare, cmp_flags);

    CLI::App* cmd_validate =
        app.add_subcommand("validate", "Check the built-in scenarios against expected indices");

    GenTraceArgs gen_args;
    CLI::App* cmd_gen = app.add_subcommand("gen-trace", "Generate a request trace file");
    cmd_gen->add_option("--count", gen_args.count, "Number of requests")->required();
    cmd_gen->add_option("--dist", gen_args.distribution, "poisson, normal or uniform")
        ->check(CLI::IsMember({"poisson", "normal", "uniform"}));
    cmd_gen->add_option("--target", gen_args.target, "Field following the distribution")
        ->check(CLI::IsMember({"start", "duration"}));
    cmd_gen->add_option("--lambda", gen_args.lambda, "Poisson rate per slot");
    cmd_gen->add_option("--mean", gen_args.mean, "Normal mean (slots)");
    cmd_gen->add_option("--stddev", gen_args.stddev, "Normal stddev (slots)");
    cmd_gen->add_option("--min", gen_args.min, "Uniform minimum (slots)");
    cmd_gen->add_option("--max", gen_args.max, "Uniform maximum (slots)");
    cmd_gen->add_option("--fixed-start", gen_args.fixed_start, "Start when --target duration");
    cmd_gen->add_option("--fixed-duration", gen_args.fixed_duration,
                        "Duration when --target start");
    cmd_gen->add_option("--vm-config", gen_args.vm_config, "Datacenter XML with vm types");
    add_global_flags(cmd_gen, gen_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (cmd_run->parsed())
            return run_experiment(run_config, run_flags, run_algos, run_metrics, run_log, out);
        if (cmd_compare->parsed())
            return run_experiment(cmp_config, cmp_flags, cmp_algos, cmp_metrics, cmp_log, out);
        if (cmd_validate->parsed()) return run_validate(out);
        if (cmd_gen->parsed()) return run_gen_trace(gen_args, gen_flags, out);
    } catch (const CapacityViolation& e) {
        err << "invariant breach: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidSpec& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace dcsim
