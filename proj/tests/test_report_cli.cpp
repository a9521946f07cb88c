#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dcsim/cli.hpp"
#include "dcsim/engine.hpp"
#include "dcsim/report.hpp"
#include "dcsim/workload.hpp"

using namespace dcsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "dcsim_test_XXXXXX").string();
        path = fs::path(mkdtemp(tmpl.data()));
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kDatacenterXml = R"(<?xml version="1.0"?>
<datacenter>
  <pmtype id="1" cpu="16" mem="30" storage="3380" pmin="300" pmax="500" count="10"/>
  <vmtype id="1-1" cpu="1" mem="1.7" storage="160"/>
  <vmtype id="1-2" cpu="4" mem="7.5" storage="850"/>
</datacenter>
)";

std::string experiment_json(const std::string& xml_path) {
    return std::string(R"({
  "pm_config": ")") + xml_path + R"(",
  "workload": {
    "source": "generator", "count": 40, "distribution": "uniform",
    "target": "start", "min": 0, "max": 20, "fixed_duration": 10
  },
  "algorithms": ["ls", "round-robin"],
  "metrics": ["avg-util", "cm", "rejected"],
  "repetitions": 2,
  "seed": 7,
  "slot_minutes": 5
})";
}

int cli(std::initializer_list<std::string> args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::vector<std::string> storage{"dcsim"};
    storage.insert(storage.end(), args);
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::ostringstream out, err;
    int rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

ComparisonTable sample_table() {
    Datacenter fleet({PmType{"1", {1.0, 1.0, 1.0}, 300.0, 500.0}}, {4}, TimeGrid{1.0, 0}, true);
    ExperimentConfig cfg;
    cfg.algorithms = {"ls", "lpt"};
    cfg.metrics = {"avg-util", "cm"};
    cfg.repetitions = 3;
    cfg.seed = 77;
    cfg.slot_minutes = 1.0;
    GeneratorSpec base;
    base.count = 30;
    base.min = 0;
    base.max = 15;
    base.fixed_duration = 5;
    base.vm_type_mix = {1.0};
    std::vector<VmType> types{{"t", {0.25, 0.25, 0.25}}};
    return compare(cfg, fleet, [&](std::uint64_t rep_seed, int) {
        GeneratorSpec s = base;
        s.seed = rep_seed;
        return generate(s, types);
    });
}

}  // namespace

TEST_CASE("csv reports use the documented header and one row per cell") {
    ComparisonTable table = sample_table();
    std::string csv = render_csv(table);
    CHECK(csv.rfind("metric,algorithm,value,ci_low,ci_high\n", 0) == 0);
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + 2 * 2);
}

TEST_CASE("all report formats encode the same values") {
    ComparisonTable table = sample_table();
    auto doc = nlohmann::json::parse(render_json(table));
    CHECK(doc.at("schema_version") == 1);

    std::istringstream csv(render_csv(table));
    std::string line;
    std::getline(csv, line);  // header
    std::size_t cell_idx = 0;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string metric, algo, value, lo, hi;
        std::getline(ss, metric, ',');
        std::getline(ss, algo, ',');
        std::getline(ss, value, ',');
        std::getline(ss, lo, ',');
        std::getline(ss, hi, ',');
        const auto& cell = doc.at("cells").at(cell_idx++);
        CHECK(cell.at("metric") == metric);
        CHECK(cell.at("algorithm") == algo);
        CHECK(cell.at("value").get<double>() == std::stod(value));
        REQUIRE_FALSE(cell.at("ci").is_null());
        CHECK(cell.at("ci").at("low").get<double>() == std::stod(lo));
        CHECK(cell.at("ci").at("high").get<double>() == std::stod(hi));
        CHECK(cell.at("samples").size() == 3);
    }
    CHECK(cell_idx == 4);

    std::string text = render_text(table);
    CHECK(text.find("avg-util") != std::string::npos);
    CHECK(text.find("lpt") != std::string::npos);
}

TEST_CASE("run command renders a text table from a config file") {
    TempDir tmp;
    write_file(tmp.file("dc.xml"), kDatacenterXml);
    write_file(tmp.file("exp.json"), experiment_json(tmp.file("dc.xml")));
    std::string out;
    int rc = cli({"run", "--config", tmp.file("exp.json")}, &out);
    CHECK(rc == 0);
    CHECK(out.find("metric") != std::string::npos);
    CHECK(out.find("avg-util") != std::string::npos);
    CHECK(out.find("round-robin") != std::string::npos);
}

TEST_CASE("unknown algorithms exit with a config error naming the registry") {
    TempDir tmp;
    write_file(tmp.file("dc.xml"), kDatacenterXml);
    write_file(tmp.file("exp.json"), experiment_json(tmp.file("dc.xml")));
    std::string err;
    int rc = cli({"run", "--config", tmp.file("exp.json"), "--algo", "fifo"}, nullptr, &err);
    CHECK(rc == 2);
    CHECK(err.find("prepartition") != std::string::npos);
}

TEST_CASE("missing config files exit with a config error") {
    std::string err;
    int rc = cli({"run", "--config", "/nonexistent/exp.json"}, nullptr, &err);
    CHECK(rc == 2);
    CHECK_FALSE(err.empty());
}

TEST_CASE("csv output lands in the requested file") {
    TempDir tmp;
    write_file(tmp.file("dc.xml"), kDatacenterXml);
    write_file(tmp.file("exp.json"), experiment_json(tmp.file("dc.xml")));
    int rc = cli({"run", "--config", tmp.file("exp.json"), "--format", "csv", "--out",
                  tmp.file("results.csv")});
    CHECK(rc == 0);
    std::string csv = read_file(tmp.file("results.csv"));
    CHECK(csv.rfind("metric,algorithm,value,ci_low,ci_high\n", 0) == 0);
}

TEST_CASE("compare honors algorithm overrides and writes logs") {
    TempDir tmp;
    write_file(tmp.file("dc.xml"), kDatacenterXml);
    write_file(tmp.file("exp.json"), experiment_json(tmp.file("dc.xml")));
    std::string out;
    int rc = cli({"compare", "--config", tmp.file("exp.json"), "--algos", "ls,lpt,prepartition",
                  "--log", tmp.file("run.log"), "--format", "json"},
                 &out);
    CHECK(rc == 0);
    auto doc = nlohmann::json::parse(out);
    CHECK(doc.at("algorithms").size() == 3);
    std::string log = read_file(tmp.file("run.log"));
    CHECK(log.find("# algorithm=ls rep=0") != std::string::npos);
    CHECK(log.find("place slot=") != std::string::npos);
}

TEST_CASE("validate exits cleanly and prints one line per row") {
    std::string out;
    int rc = cli({"validate"}, &out);
    CHECK(rc == 0);
    CHECK(out.find("online-least-loaded") != std::string::npos);
    CHECK(out.find("offline-longest-first") != std::string::npos);
    CHECK(out.find("energy-end-time") != std::string::npos);
    CHECK(out.find("energy conventions") != std::string::npos);
    CHECK(out.find("RESULT: PASS") != std::string::npos);
}

TEST_CASE("gen-trace rejects a zero count") {
    TempDir tmp;
    std::string err;
    int rc = cli({"gen-trace", "--count", "0", "--out", tmp.file("t.swf")}, nullptr, &err);
    CHECK(rc == 2);
    CHECK_FALSE(err.empty());
}

TEST_CASE("gen-trace output parses back to the identical request list") {
    TempDir tmp;
    int rc = cli({"gen-trace", "--count", "200", "--dist", "uniform", "--target", "start",
                  "--min", "0", "--max", "100", "--fixed-duration", "12", "--seed", "9",
                  "--slot-minutes", "5", "--out", tmp.file("t.swf")});
    REQUIRE(rc == 0);

    // reference list: same generator, demands mapped the trace way
    GeneratorSpec spec;
    spec.count = 200;
    spec.min = 0;
    spec.max = 100;
    spec.fixed_duration = 12;
    spec.seed = 9;
    spec.vm_type_mix.assign(default_vm_types().size(), 1.0);
    auto expect = generate(spec, default_vm_types());
    TraceDemandMap map;
    for (auto& r : expect) r.demand = map.demand(r.demand.cpu);

    auto parsed = parse_trace(tmp.file("t.swf"), 5.0);
    REQUIRE(parsed.requests.size() == expect.size());
    CHECK(parsed.skipped == 0);
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(parsed.requests[i].vm_id == expect[i].vm_id);
        CHECK(parsed.requests[i].start == expect[i].start);
        CHECK(parsed.requests[i].end == expect[i].end);
        CHECK(parsed.requests[i].demand == expect[i].demand);
    }
}

TEST_CASE("trace-driven experiments run end to end") {
    TempDir tmp;
    write_file(tmp.file("dc.xml"), kDatacenterXml);
    REQUIRE(cli({"gen-trace", "--count", "60", "--min", "0", "--max", "30", "--fixed-duration",
                 "6", "--seed", "4", "--out", tmp.file("t.swf")}) == 0);
    write_file(tmp.file("exp.json"), std::string(R"({
  "pm_config": ")") + tmp.file("dc.xml") + R"(",
  "workload": {"source": "trace", "path": ")" + tmp.file("t.swf") + R"("},
  "algorithms": ["lpt", "mig"],
  "metrics": ["avg-util", "cm", "rejected"],
  "seed": 3
})");
    std::string out;
    int rc = cli({"run", "--config", tmp.file("exp.json"), "--format", "csv"}, &out);
    CHECK(rc == 0);
    CHECK(out.find("cm,lpt,") != std::string::npos);
    CHECK(out.find("cm,mig,") != std::string::npos);
}

TEST_CASE("help is not an error") {
    std::string out;
    CHECK(cli({"--help"}, &out) == 0);
    CHECK(out.find("run") != std::string::npos);
    CHECK(out.find("gen-trace") != std::string::npos);
}

TEST_CASE("bad flags are config errors") {
    std::string err;
    CHECK(cli({"run"}, nullptr, &err) == 2);               // missing --config
    CHECK(cli({"frobnicate"}, nullptr, &err) == 2);        // unknown subcommand
    CHECK(cli({"run", "--config", "x", "--format", "yaml"}, nullptr, &err) == 2);
}
