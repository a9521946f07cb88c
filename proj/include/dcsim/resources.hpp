#ifndef DCSIM_RESOURCES_HPP
#define DCSIM_RESOURCES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcsim/errors.hpp"

namespace dcsim {

using Slot = std::int64_t;
using VmId = std::int64_t;

// A (cpu, memory, storage) quantity. Used both for PM capacities and VM
// demands; "a fits in b" is component-wise <=.
struct ResourceVector {
    double cpu = 0.0;
    double mem = 0.0;
    double storage = 0.0;

    bool fits_within(const ResourceVector& cap) const {
        return cpu <= cap.cpu && mem <= cap.mem && storage <= cap.storage;
    }
    // Capacity comparisons tolerate summation-order noise: different code
    // paths fold the same demands in different orders, so an exact boundary
    // (e.g. 0.1+0.2+0.3+0.4 vs 1.0) can land on either side by an ulp.
    // `scale` is the capacity the slack is relative to.
    bool fits_within(const ResourceVector& cap, const ResourceVector& scale) const {
        constexpr double kRelSlack = 1e-9;
        return cpu <= cap.cpu + kRelSlack * scale.cpu && mem <= cap.mem + kRelSlack * scale.mem &&
               storage <= cap.storage + kRelSlack * scale.storage;
    }
    bool nonnegative() const { return cpu >= 0.0 && mem >= 0.0 && storage >= 0.0; }
    bool strictly_positive() const { return cpu > 0.0 && mem > 0.0 && storage > 0.0; }

    ResourceVector& operator+=(const ResourceVector& o) {
        cpu += o.cpu;
        mem += o.mem;
        storage += o.storage;
        return *this;
    }
    ResourceVector& operator-=(const ResourceVector& o) {
        cpu -= o.cpu;
        mem -= o.mem;
        storage -= o.storage;
        return *this;
    }
    friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
    friend ResourceVector operator-(ResourceVector a, const ResourceVector& b) { return a -= b; }
    friend bool operator==(const ResourceVector& a, const ResourceVector& b) {
        return a.cpu == b.cpu && a.mem == b.mem && a.storage == b.storage;
    }
    ResourceVector component_max(const ResourceVector& o) const {
        return {cpu > o.cpu ? cpu : o.cpu, mem > o.mem ? mem : o.mem,
                storage > o.storage ? storage : o.storage};
    }
    // Component-wise ratio against a capacity; capacity must be positive.
    ResourceVector fraction_of(const ResourceVector& cap) const {
        return {cpu / cap.cpu, mem / cap.mem, storage / cap.storage};
    }
    friend ResourceVector operator*(const ResourceVector& a, double s) {
        return {a.cpu * s, a.mem * s, a.storage * s};
    }
    double mean() const { return (cpu + mem + storage) / 3.0; }
};

// One of the server classes a datacenter is provisioned from.
struct PmType {
    std::string type_id;
    ResourceVector capacity;
    double p_min = 0.0;  // Watts when idle
    double p_max = 0.0;  // Watts at full CPU utilization

    void validate() const {
        if (!capacity.strictly_positive())
            throw ConfigError("pm type '" + type_id + "': capacity must be strictly positive");
        if (p_min < 0.0 || p_min > p_max)
            throw ConfigError("pm type '" + type_id + "': requires 0 <= pmin <= pmax");
    }
};

// One of the VM classes requests may be drawn from.
struct VmType {
    std::string type_id;
    ResourceVector demand;

    void validate() const {
        if (demand.cpu <= 0.0)
            throw ConfigError("vm type '" + type_id + "': cpu demand must be positive");
        if (demand.mem < 0.0 || demand.storage < 0.0)
            throw ConfigError("vm type '" + type_id + "': memory/storage must be >= 0");
    }
};

enum class VmStatus { Pending, Allocated, Rejected, Released };

// A demand with a lifecycle on the discrete slot grid. The lifecycle is
// half-open: the request occupies slots [start, end).
struct VmRequest {
    VmId vm_id = 0;
    ResourceVector demand;
    Slot start = 0;
    Slot end = 1;
    VmStatus status = VmStatus::Pending;

    Slot duration() const { return end - start; }
};

// The discrete time grid observations are measured on.
struct TimeGrid {
    double slot_minutes = 5.0;
    Slot horizon = 0;
};

// A server: full capacity from its type, a running account of what is
// hosted right now, and the remaining capacity derived from it.
//
// usage_ is kept as the left-to-right fold of hosted demands so that
// allocate followed by release restores remaining() exactly, and so that
// conservation (sum of hosted demands + remaining == capacity) holds
// bit-for-bit at all times.
class PhysicalMachine {
public:
    struct Hosted {
        VmId vm_id;
        ResourceVector demand;
        Slot start;
        Slot end;
    };

    PhysicalMachine(int id, int type_index, const PmType& type, bool powered_on = true)
        : id_(id), type_index_(type_index), capacity_(type.capacity), powered_on_(powered_on) {}

    int id() const { return id_; }
    int type_index() const { return type_index_; }
    const ResourceVector& capacity() const { return capacity_; }
    bool powered_on() const { return powered_on_; }
    void power_on() { powered_on_ = true; }
    void power_off() {
        if (!hosted_.empty()) throw CapacityViolation("cannot power off a PM hosting VMs");
        powered_on_ = false;
    }

    ResourceVector remaining() const { return capacity_ - usage_; }
    const ResourceVector& usage() const { return usage_; }
    const std::vector<Hosted>& hosted() const { return hosted_; }

    // True iff demand fits the remaining capacity in every component.
    // A powered-off PM hosts nothing.
    bool fits(const ResourceVector& demand) const {
        return powered_on_ && demand.fits_within(remaining(), capacity_);
    }

    void allocate(const VmRequest& req, Slot start, Slot end) {
        if (!fits(req.demand))
            throw CapacityViolation("pm " + std::to_string(id_) + ": vm " +
                                    std::to_string(req.vm_id) + " does not fit (scheduler bug)");
        hosted_.push_back({req.vm_id, req.demand, start, end});
        usage_ += req.demand;
    }

    void release(VmId vm_id, Slot start) {
        for (std::size_t i = 0; i < hosted_.size(); ++i) {
            if (hosted_[i].vm_id == vm_id && hosted_[i].start == start) {
                hosted_.erase(hosted_.begin() + static_cast<std::ptrdiff_t>(i));
                refold_usage();
                return;
            }
        }
        throw NotHosted("pm " + std::to_string(id_) + ": vm " + std::to_string(vm_id) +
                        " is not hosted here");
    }
    void release(const VmRequest& req) { release(req.vm_id, req.start); }

    // Instantaneous utilization fractions, component-wise in [0, 1].
    ResourceVector utilization() const { return usage_.fraction_of(capacity_); }

private:
    void refold_usage() {
        usage_ = {};
        for (const auto& h : hosted_) usage_ += h.demand;
    }

    int id_;
    int type_index_;
    ResourceVector capacity_;
    bool powered_on_;
    ResourceVector usage_;
    std::vector<Hosted> hosted_;
};

// Per-PM usage over time as a difference map, for offline planners that
// place requests out of arrival order and must check every slot of an
// interval.
class UsageTimeline {
public:
    void add(const ResourceVector& d, Slot start, Slot end) {
        deltas_[start] += d;
        deltas_[end] -= d;
    }
    void remove(const ResourceVector& d, Slot start, Slot end) {
        deltas_[start] -= d;
        deltas_[end] += d;
    }

    // Would adding `demand` over [start, end) stay within cap at every slot?
    bool fits(const ResourceVector& demand, const ResourceVector& cap, Slot start, Slot end) const {
        ResourceVector run;
        auto it = deltas_.begin();
        for (; it != deltas_.end() && it->first <= start; ++it) run += it->second;
        if (!(run + demand).fits_within(cap, cap)) return false;
        for (; it != deltas_.end() && it->first < end; ++it) {
            run += it->second;
            if (!(run + demand).fits_within(cap, cap)) return false;
        }
        return true;
    }

    ResourceVector usage_at(Slot slot) const {
        ResourceVector run;
        for (const auto& [t, d] : deltas_) {
            if (t > slot) break;
            run += d;
        }
        return run;
    }

private:
    std::map<Slot, ResourceVector> deltas_;
};

// A fleet of PMs plus the time grid of one simulation run. Value type:
// copying clones the whole datacenter state.
class Datacenter {
public:
    Datacenter() = default;
    Datacenter(std::vector<PmType> types, const std::vector<int>& counts, TimeGrid grid,
               bool all_powered_on = true)
        : types_(std::move(types)), grid_(grid) {
        if (types_.size() != counts.size())
            throw InvalidSpec("pm type/count lists must have equal length");
        int id = 0;
        for (std::size_t t = 0; t < types_.size(); ++t) {
            types_[t].validate();
            for (int i = 0; i < counts[t]; ++i)
                pms_.emplace_back(id++, static_cast<int>(t), types_[t], all_powered_on);
        }
    }

    std::vector<PhysicalMachine>& pms() { return pms_; }
    const std::vector<PhysicalMachine>& pms() const { return pms_; }
    PhysicalMachine& pm(int id) { return pms_.at(static_cast<std::size_t>(id)); }
    const PhysicalMachine& pm(int id) const { return pms_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return pms_.size(); }

    const std::vector<PmType>& pm_types() const { return types_; }
    const PmType& type_of(const PhysicalMachine& pm) const {
        return types_.at(static_cast<std::size_t>(pm.type_index()));
    }

    TimeGrid& grid() { return grid_; }
    const TimeGrid& grid() const { return grid_; }

    // Fresh copy with nothing hosted; `powered_on` sets the boot state of
    // every PM (load-balancing runs boot all-on, energy runs all-off).
    Datacenter pristine_clone(bool powered_on = true) const {
        Datacenter dc;
        dc.types_ = types_;
        dc.grid_ = grid_;
        dc.pms_.reserve(pms_.size());
        for (const auto& pm : pms_)
            dc.pms_.emplace_back(pm.id(), pm.type_index(),
                                 types_[static_cast<std::size_t>(pm.type_index())], powered_on);
        return dc;
    }

private:
    std::vector<PmType> types_;
    std::vector<PhysicalMachine> pms_;
    TimeGrid grid_;
};

}  // namespace dcsim

#endif
