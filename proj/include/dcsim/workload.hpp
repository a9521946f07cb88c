#ifndef DCSIM_WORKLOAD_HPP
#define DCSIM_WORKLOAD_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dcsim/resources.hpp"

namespace dcsim {

// splitmix64 step; used to derive per-repetition seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t& state);

enum class Distribution { Poisson, Normal, Uniform };
enum class TargetField { StartTime, Duration };

// How to synthesize a request stream. Exactly one of start-time or
// duration follows the distribution; the other is fixed.
struct GeneratorSpec {
    std::int64_t count = 0;
    Distribution distribution = Distribution::Uniform;
    TargetField target = TargetField::StartTime;

    double lambda = 1.0;   // poisson: arrivals per slot (start) / mean (duration)
    double mean = 0.0;     // normal
    double stddev = 0.0;   // normal
    double min = 0.0;      // uniform, inclusive
    double max = 0.0;      // uniform, inclusive

    Slot fixed_start = 0;     // used when target == Duration
    Slot fixed_duration = 1;  // used when target == StartTime

    std::vector<double> vm_type_mix;  // weights over the VM type table
    std::uint64_t seed = 0;

    void validate(std::size_t n_vm_types) const;  // throws InvalidSpec
};

// Deterministic in (spec, seed): same spec and seed give the same list.
std::vector<VmRequest> generate(const GeneratorSpec& spec, const std::vector<VmType>& vm_types);

// Demand mapping for trace jobs: processors count maps to CPU demand
// directly; memory/storage default to proportional shares of a type-1 PM
// (30 GB / 3380 GB per 16 compute units) and can be overridden.
struct TraceDemandMap {
    double mem_per_cpu = 30.0 / 16.0;
    double storage_per_cpu = 3380.0 / 16.0;

    ResourceVector demand(double processors) const {
        return {processors, processors * mem_per_cpu, processors * storage_per_cpu};
    }
};

struct TraceParseResult {
    std::vector<VmRequest> requests;
    std::size_t skipped = 0;     // data lines with unusable values
    std::size_t data_lines = 0;  // non-comment, non-blank lines seen
};

// Parses an SWF-style trace: ';'-prefixed comments, whitespace-separated
// fields, field 1 = job id, 2 = submit seconds, 4 = run seconds,
// 5 = allocated processors. Times are quantized onto the slot grid.
TraceParseResult parse_trace(const std::string& path, double slot_minutes,
                             const TraceDemandMap& map = {});
TraceParseResult parse_trace(std::istream& in, double slot_minutes,
                             const TraceDemandMap& map = {});

// Writes requests in the line format parse_trace consumes, so that
// write_trace followed by parse_trace is the identity on the list.
void write_trace(const std::vector<VmRequest>& requests, std::ostream& out, double slot_minutes);
void write_trace(const std::vector<VmRequest>& requests, const std::string& path,
                 double slot_minutes);

// PM/VM specifications loaded from the datacenter XML config.
struct FleetConfig {
    std::vector<PmType> pm_types;
    std::vector<int> counts;  // fleet size per pm type
    std::vector<VmType> vm_types;

    int total_pms() const {
        int n = 0;
        for (int c : counts) n += c;
        return n;
    }
};

// Loads <pmtype .../> and <vmtype .../> elements; unknown elements and
// attributes are ignored. Throws ConfigError (with the line number for
// malformed XML) or on failed validation.
FleetConfig load_datacenter_config(const std::string& path);
FleetConfig parse_datacenter_config(std::istream& in);

// Built-in defaults matching docs/datacenter.xml: the three suggested PM
// classes and the eight EC2-style VM classes.
const std::vector<PmType>& default_pm_types();
const std::vector<VmType>& default_vm_types();

}  // namespace dcsim

#endif
