#include "dcsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace dcsim {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void GeneratorSpec::validate(std::size_t n_vm_types) const {
    if (count < 1) throw InvalidSpec("generator: count must be >= 1");
    if (distribution == Distribution::Poisson && lambda <= 0.0)
        throw InvalidSpec("generator: poisson rate must be > 0");
    if (distribution == Distribution::Normal && stddev < 0.0)
        throw InvalidSpec("generator: stddev must be >= 0");
    if (distribution == Distribution::Uniform && min > max)
        throw InvalidSpec("generator: uniform range requires min <= max");
    if (fixed_duration < 1) throw InvalidSpec("generator: fixed duration must be >= 1 slot");
    if (fixed_start < 0) throw InvalidSpec("generator: fixed start must be >= 0");
    if (vm_type_mix.empty() || vm_type_mix.size() != n_vm_types)
        throw InvalidSpec("generator: vm type mix must carry one weight per vm type");
    double sum = 0.0;
    for (double w : vm_type_mix) {
        if (w < 0.0) throw InvalidSpec("generator: vm type weights must be >= 0");
        sum += w;
    }
    if (sum <= 0.0) throw InvalidSpec("generator: vm type weights must have a positive sum");
}

namespace {

// One sampled value for the targeted field, already clamped to its legal
// range (start >= 0, duration >= 1).
struct FieldSampler {
    const GeneratorSpec& spec;
    std::mt19937_64& rng;
    double poisson_clock = 0.0;  // running arrival time, slots

    Slot sample_start() {
        switch (spec.distribution) {
            case Distribution::Poisson: {
                std::exponential_distribution<double> gap(spec.lambda);
                poisson_clock += gap(rng);
                return static_cast<Slot>(std::floor(poisson_clock));
            }
            case Distribution::Normal:
                return std::max<Slot>(0, round_truncated_normal());
            case Distribution::Uniform:
                return std::max<Slot>(0, sample_uniform());
        }
        return 0;
    }

    Slot sample_duration() {
        switch (spec.distribution) {
            case Distribution::Poisson: {
                std::poisson_distribution<Slot> d(spec.lambda);
                return std::max<Slot>(1, d(rng));
            }
            case Distribution::Normal:
                return std::max<Slot>(1, round_truncated_normal());
            case Distribution::Uniform:
                return std::max<Slot>(1, sample_uniform());
        }
        return 1;
    }

    Slot round_truncated_normal() {
        std::normal_distribution<double> d(spec.mean, spec.stddev);
        double v = d(rng);
        while (v < 0.0) v = d(rng);
        return static_cast<Slot>(std::llround(v));
    }

    Slot sample_uniform() {
        std::uniform_int_distribution<Slot> d(static_cast<Slot>(std::llround(spec.min)),
                                              static_cast<Slot>(std::llround(spec.max)));
        return d(rng);
    }
};

}  // namespace

std::vector<VmRequest> generate(const GeneratorSpec& spec, const std::vector<VmType>& vm_types) {
    spec.validate(vm_types.size());

    std::mt19937_64 rng(spec.seed);
    std::discrete_distribution<std::size_t> pick_type(spec.vm_type_mix.begin(),
                                                      spec.vm_type_mix.end());
    FieldSampler sampler{spec, rng};

    std::vector<VmRequest> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (std::int64_t i = 0; i < spec.count; ++i) {
        const VmType& type = vm_types[pick_type(rng)];
        Slot start = spec.fixed_start;
        Slot duration = spec.fixed_duration;
        if (spec.target == TargetField::StartTime)
            start = sampler.sample_start();
        else
            duration = sampler.sample_duration();
        out.push_back(VmRequest{i, type.demand, start, start + duration, VmStatus::Pending});
    }
    return out;
}

// --- SWF-style traces --------------------------------------------------------

TraceParseResult parse_trace(std::istream& in, double slot_minutes, const TraceDemandMap& map) {
    if (slot_minutes <= 0.0) throw InvalidSpec("trace: slot length must be > 0");
    TraceParseResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;       // blank
        if (line[first] == ';') continue;               // comment
        ++result.data_lines;

        std::istringstream fields(line);
        double id = 0, submit = 0, wait = 0, run = 0, procs = 0;
        if (!(fields >> id >> submit >> wait >> run >> procs))
            throw ConfigError("trace line " + std::to_string(line_no) +
                              ": expected at least 5 numeric fields (id, submit, wait, run, processors)");

        if (submit < 0.0 || run < 0.0 || procs < 1.0) {
            ++result.skipped;
            continue;
        }
        Slot start = static_cast<Slot>(std::llround(submit / 60.0 / slot_minutes));
        Slot duration = std::max<Slot>(1, static_cast<Slot>(std::ceil(run / 60.0 / slot_minutes)));
        result.requests.push_back(VmRequest{static_cast<VmId>(std::llround(id)),
                                            map.demand(procs), start, start + duration,
                                            VmStatus::Pending});
    }
    return result;
}

TraceParseResult parse_trace(const std::string& path, double slot_minutes,
                             const TraceDemandMap& map) {
    std::ifstream in(path);
    if (!in) throw ConfigError("trace: cannot open '" + path + "'");
    return parse_trace(in, slot_minutes, map);
}

void write_trace(const std::vector<VmRequest>& requests, std::ostream& out, double slot_minutes) {
    out << "; job_id submit_sec wait_sec run_sec processors\n";
    char buf[160];
    for (const auto& r : requests) {
        double submit_sec = static_cast<double>(r.start) * slot_minutes * 60.0;
        double run_sec = static_cast<double>(r.duration()) * slot_minutes * 60.0;
        std::snprintf(buf, sizeof buf, "%lld %.17g 0 %.17g %.17g\n",
                      static_cast<long long>(r.vm_id), submit_sec, run_sec, r.demand.cpu);
        out << buf;
    }
}

void write_trace(const std::vector<VmRequest>& requests, const std::string& path,
                 double slot_minutes) {
    std::ofstream out(path);
    if (!out) throw ConfigError("trace: cannot write '" + path + "'");
    write_trace(requests, out, slot_minutes);
}

// --- datacenter XML config ---------------------------------------------------

namespace {

namespace pt = boost::property_tree;

double required_attr(const pt::ptree& attrs, const std::string& element, const std::string& name) {
    auto v = attrs.get_optional<double>(name);
    if (!v) throw ConfigError("config: <" + element + "> is missing attribute '" + name + "'");
    return *v;
}

FleetConfig from_ptree(const pt::ptree& doc) {
    FleetConfig fc;
    // Accept any root element name; scan its children.
    if (doc.empty()) throw ConfigError("config: empty document");
    const pt::ptree& root = doc.begin()->second;
    for (const auto& [tag, node] : root) {
        if (tag != "pmtype" && tag != "vmtype") continue;  // unknown elements ignored
        const pt::ptree attrs = node.get_child("<xmlattr>", pt::ptree{});
        if (tag == "pmtype") {
            PmType t;
            t.type_id = attrs.get<std::string>("id", "");
            t.capacity = {required_attr(attrs, tag, "cpu"), required_attr(attrs, tag, "mem"),
                          required_attr(attrs, tag, "storage")};
            t.p_min = required_attr(attrs, tag, "pmin");
            t.p_max = required_attr(attrs, tag, "pmax");
            t.validate();
            int count = attrs.get<int>("count", 0);
            if (count < 0) throw ConfigError("config: pm type '" + t.type_id + "': count must be >= 0");
            fc.pm_types.push_back(std::move(t));
            fc.counts.push_back(count);
        } else {
            VmType t;
            t.type_id = attrs.get<std::string>("id", "");
            t.demand = {required_attr(attrs, tag, "cpu"), required_attr(attrs, tag, "mem"),
                        required_attr(attrs, tag, "storage")};
            t.validate();
            fc.vm_types.push_back(std::move(t));
        }
    }
    if (fc.pm_types.empty()) throw ConfigError("config: no <pmtype> elements found");
    return fc;
}

}  // namespace

FleetConfig parse_datacenter_config(std::istream& in) {
    pt::ptree doc;
    try {
        pt::read_xml(in, doc, pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw ConfigError("config: XML parse error at line " + std::to_string(e.line()) + ": " +
                          e.message());
    }
    return from_ptree(doc);
}

FleetConfig load_datacenter_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_datacenter_config(in);
}

const std::vector<PmType>& default_pm_types() {
    static const std::vector<PmType> types{
        {"1", {16.0, 30.0, 3380.0}, 300.0, 500.0},
        {"2", {52.0, 136.0, 3380.0}, 300.0, 500.0},
        {"3", {40.0, 14.0, 3380.0}, 300.0, 500.0},
    };
    return types;
}

const std::vector<VmType>& default_vm_types() {
    static const std::vector<VmType> types{
        {"1-1", {1.0, 1.7, 160.0}},  {"1-2", {4.0, 7.5, 850.0}},
        {"1-3", {8.0, 15.0, 1690.0}}, {"2-1", {6.5, 17.1, 420.0}},
        {"2-2", {13.0, 34.2, 850.0}}, {"2-3", {26.0, 68.4, 1690.0}},
        {"3-1", {5.0, 1.7, 350.0}},   {"3-2", {20.0, 7.0, 1690.0}},
    };
    return types;
}

}  // namespace dcsim
