#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace dcom {

/// Accelerator geometry and calibrated rate constants. The defaults describe
/// a 16x16 cluster array with 64 FP16 multipliers per cluster and one
/// streaming bank per cluster column. bank_bandwidth_bytes_per_cycle, the
/// broadcast latency and the clock are calibrated once (see
/// configs/hw_default.json) so that the expansion sweep balances at f = 8
/// for the 4096-wide workload and the model-vs-baseline ratio lands in the
/// intended band; they are model constants, not synthesized numbers.
struct HardwareConfig {
    std::uint64_t clusters_x = 16;
    std::uint64_t clusters_y = 16;
    std::uint64_t macs_per_cluster = 64; // 8x8 array
    double clock_hz = 2.0e9;
    double bank_bandwidth_bytes_per_cycle = 256.0; // per column bank
    double global_broadcast_latency_cycles = 2.0;  // one write+read round
    std::uint64_t bytes_per_element = 2;

    std::uint64_t clusters() const { return clusters_x * clusters_y; }
    std::uint64_t total_macs() const { return clusters() * macs_per_cluster; }
    double aggregate_bandwidth() const {
        return static_cast<double>(clusters_x) * bank_bandwidth_bytes_per_cycle;
    }
    void validate() const;
};

/// Placement of one length-n reduction workload at expansion factor f: the
/// reduction is split into f local segments of width ceil(n/f) and the
/// downstream elementwise stage is replicated f times.
struct MappingPlan {
    std::uint64_t expansion_factor = 1;
    std::uint64_t vector_len = 0;
    std::uint64_t basis_size = 0;
    std::uint64_t group_width = 0;  // per-group reduction width
    std::uint64_t groups = 0;       // == expansion_factor
    std::uint64_t clusters_per_group = 0;
    std::uint64_t active_clusters = 0;
    std::uint64_t replication = 1;
};

struct ActivityCounters {
    double mac_ops_base = 0;       // non-replicated multiply-accumulate work
    double mac_ops_replicated = 0; // the f-times duplicated stage
    double reduction_adds = 0;
    double bank_bytes = 0;
    double global_bytes = 0;

    ActivityCounters& operator+=(const ActivityCounters& o);
};

enum class BoundClass { memory_bound, compute_bound, balanced };

std::string to_string(BoundClass b);

/// Cycle breakdown of a simulated workload. For a single stage,
/// cycles_total = max(cycles_compute, cycles_memory) + cycles_reduction +
/// cycles_broadcast (memory streaming overlaps compute; reductions and
/// broadcasts serialize). Multi-stage reports are sums of per-stage reports,
/// so the identity holds per stage, additively.
struct LatencyReport {
    double cycles_compute = 0;
    double cycles_memory = 0;
    double cycles_reduction = 0;
    double cycles_broadcast = 0;
    double cycles_total = 0;
    double energy_est = 0; // activity counters x default per-op energies
    BoundClass bound_class = BoundClass::balanced;
    ActivityCounters activity;
    double clock_hz = 1.0;   // producer clock; 1.0 means cycles are seconds
    double seconds_total = 0;

    LatencyReport& operator+=(const LatencyReport& o);
};

void to_json(nlohmann::json& j, const LatencyReport& r);
void to_json(nlohmann::json& j, const HardwareConfig& c);
void from_json(const nlohmann::json& j, HardwareConfig& c);

/// Builds the placement for one reorthogonalization pass (basis_size dot
/// products plus corrections over a length-n vector). f must be a power of
/// two, at most n and at most the MAC count.
MappingPlan map_reorth(std::uint64_t n, std::uint64_t basis_size, std::uint64_t f,
                       const HardwareConfig& hw);

/// One orthogonalization pass under the plan:
///   compute   = ceil(j*n / macs) + ceil(j*f*n / macs)   (products, replicas)
///   memory    = (j+2)*n*bytes / aggregate bank bandwidth
///   reduction = j * ceil(log2(group_width))             (dots serialize)
///   broadcast = j * global_broadcast_latency            (one round per dot)
LatencyReport simulate_reorth(const MappingPlan& plan, const HardwareConfig& hw);

/// Full decomposition of one S x H prompt at rank k: start-up, k iterations
/// of (matvec, two V passes, normalize, matvec, two U passes, normalize),
/// the small-system SVD and the two recombination products. Matvecs and
/// normalizations use the same streaming model and are not affected by f.
LatencyReport simulate_lanczos(std::uint64_t s, std::uint64_t h, std::uint64_t k,
                               std::uint64_t f, const HardwareConfig& hw);

struct BaselineConfig {
    double peak_flops = 19.5e12;        // FP32 vector path
    double mem_bandwidth = 2.0e12;      // bytes/s
    double kernel_launch_overhead = 8e-6; // seconds, per kernel
};

void to_json(nlohmann::json& j, const BaselineConfig& c);
void from_json(const nlohmann::json& j, BaselineConfig& c);

struct KernelCost {
    std::string name;
    double flops = 0;
    double bytes = 0;
    double seconds = 0; // max(flops/peak, bytes/bw) + launch overhead
    BoundClass bound = BoundClass::balanced;
};

struct BaselineReport {
    LatencyReport report; // cycles fields carry seconds (clock_hz = 1)
    std::vector<KernelCost> kernels;
};

double roofline_seconds(double flops, double bytes, const BaselineConfig& cfg);

/// Roofline model of the same decomposition on a GPU-class device: 4k + 2
/// kernels (start-up matvec and normalize, then per iteration two matvecs
/// and two fused orthogonalize+normalize kernels), each costed as
/// max(flops/peak, bytes/bandwidth) plus a launch overhead.
BaselineReport baseline_model(std::uint64_t s, std::uint64_t h, std::uint64_t k,
                              const BaselineConfig& cfg);

/// First-order linear area/energy constants. Chosen so that local tree
/// reductions plus distributed bank traffic cost less per element than
/// global-bus traffic; not derived from synthesis.
struct AreaEnergyConfig {
    double energy_per_mac = 1.0;
    double energy_per_bank_byte = 2.0;
    double energy_per_global_byte = 20.0;
    double energy_per_reduce_add = 0.5;
    double area_per_mac = 1.0;
    double area_per_cluster_buffer = 50.0;
    double area_per_cluster_tree = 8.0;
    double area_per_bank_column = 400.0;
};

void to_json(nlohmann::json& j, const AreaEnergyConfig& c);
void from_json(const nlohmann::json& j, AreaEnergyConfig& c);

struct AreaPowerEstimate {
    double area_units = 0;
    double energy_units = 0;
};

double dynamic_energy(const ActivityCounters& activity, const AreaEnergyConfig& cfg);

AreaPowerEstimate estimate_area_power(const HardwareConfig& hw,
                                      const LatencyReport& activity,
                                      const AreaEnergyConfig& cfg = {});

/// Counters for the same pass with every partial routed over the global bus
/// instead of the local trees; comparison point for the interconnect-energy
/// argument.
ActivityCounters all_global_reduction_counters(const MappingPlan& plan,
                                               const HardwareConfig& hw);

} // namespace dcom
