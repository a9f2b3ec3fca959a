#include "dcom/dcomsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "dcom/errors.hpp"

namespace dcom {

namespace {

constexpr double kBalancedBand = 0.15;

double ceil_div(double a, double b) { return std::ceil(a / b); }

std::uint64_t ceil_log2(std::uint64_t x) {
    std::uint64_t d = 0;
    std::uint64_t v = 1;
    while (v < x) {
        v <<= 1;
        ++d;
    }
    return d;
}

BoundClass classify(double compute, double memory) {
    double hi = std::max(compute, memory);
    if (hi <= 0.0) return BoundClass::balanced;
    if (std::abs(compute - memory) <= kBalancedBand * hi) return BoundClass::balanced;
    return compute > memory ? BoundClass::compute_bound : BoundClass::memory_bound;
}

void finish(LatencyReport& r, const HardwareConfig& hw, const AreaEnergyConfig& ecfg = {}) {
    r.bound_class = classify(r.cycles_compute, r.cycles_memory);
    r.energy_est = dynamic_energy(r.activity, ecfg);
    r.clock_hz = hw.clock_hz;
    r.seconds_total = r.cycles_total / hw.clock_hz;
}

// shared max-overlap composition for one streamed stage
LatencyReport stage(double mac_ops, double bytes, double reduction_cycles,
                    double broadcast_cycles, const HardwareConfig& hw) {
    LatencyReport r;
    r.cycles_compute = ceil_div(mac_ops, static_cast<double>(hw.total_macs()));
    r.cycles_memory = bytes / hw.aggregate_bandwidth();
    r.cycles_reduction = reduction_cycles;
    r.cycles_broadcast = broadcast_cycles;
    r.cycles_total = std::max(r.cycles_compute, r.cycles_memory) + r.cycles_reduction +
                     r.cycles_broadcast;
    return r;
}

LatencyReport matvec_stage(std::uint64_t rows, std::uint64_t cols,
                           const HardwareConfig& hw) {
    const double be = static_cast<double>(hw.bytes_per_element);
    double macs = static_cast<double>(rows) * static_cast<double>(cols);
    double bytes = (macs + rows + cols) * be;
    LatencyReport r = stage(macs, bytes, static_cast<double>(ceil_log2(cols)),
                            hw.global_broadcast_latency_cycles, hw);
    r.activity.mac_ops_base = macs;
    r.activity.reduction_adds = static_cast<double>(rows) * (cols > 0 ? cols - 1 : 0);
    r.activity.bank_bytes = bytes;
    r.activity.global_bytes = 2.0 * rows * be;
    return r;
}

LatencyReport normalize_stage(std::uint64_t n, const HardwareConfig& hw) {
    const double be = static_cast<double>(hw.bytes_per_element);
    double macs = 2.0 * static_cast<double>(n); // squared-norm + scale
    double bytes = 2.0 * static_cast<double>(n) * be;
    LatencyReport r = stage(macs, bytes, static_cast<double>(ceil_log2(n)),
                            hw.global_broadcast_latency_cycles, hw);
    r.activity.mac_ops_base = macs;
    r.activity.reduction_adds = n > 0 ? static_cast<double>(n - 1) : 0.0;
    r.activity.bank_bytes = bytes;
    r.activity.global_bytes = 2.0 * be;
    return r;
}

LatencyReport gemm_stage(std::uint64_t m, std::uint64_t kk, std::uint64_t n,
                         const HardwareConfig& hw) {
    const double be = static_cast<double>(hw.bytes_per_element);
    double macs = static_cast<double>(m) * kk * n;
    double bytes = (static_cast<double>(m) * kk + static_cast<double>(kk) * n +
                    static_cast<double>(m) * n) *
                   be;
    LatencyReport r = stage(macs, bytes, static_cast<double>(ceil_log2(kk)),
                            hw.global_broadcast_latency_cycles, hw);
    r.activity.mac_ops_base = macs;
    r.activity.reduction_adds = static_cast<double>(m) * n * (kk > 0 ? kk - 1 : 0);
    r.activity.bank_bytes = bytes;
    r.activity.global_bytes = 2.0 * be;
    return r;
}

// small-system SVD charged to a single cluster, fixed work convention
LatencyReport small_svd_stage(std::uint64_t dim, const HardwareConfig& hw) {
    const double be = static_cast<double>(hw.bytes_per_element);
    double work = 12.0 * static_cast<double>(dim) * dim * dim;
    LatencyReport r;
    r.cycles_compute = ceil_div(work, static_cast<double>(hw.macs_per_cluster));
    r.cycles_memory = 3.0 * dim * dim * be / hw.aggregate_bandwidth();
    r.cycles_broadcast = hw.global_broadcast_latency_cycles;
    r.cycles_total = std::max(r.cycles_compute, r.cycles_memory) + r.cycles_broadcast;
    r.activity.mac_ops_base = work;
    r.activity.bank_bytes = 3.0 * dim * dim * be;
    r.activity.global_bytes = 2.0 * be;
    return r;
}

} // namespace

void HardwareConfig::validate() const {
    if (clusters_x == 0 || clusters_y == 0 || macs_per_cluster == 0 ||
        bytes_per_element == 0 || !(clock_hz > 0.0) ||
        !(bank_bandwidth_bytes_per_cycle > 0.0) ||
        !(global_broadcast_latency_cycles >= 0.0)) {
        throw validation_error("hardware config: all fields must be positive");
    }
}

ActivityCounters& ActivityCounters::operator+=(const ActivityCounters& o) {
    mac_ops_base += o.mac_ops_base;
    mac_ops_replicated += o.mac_ops_replicated;
    reduction_adds += o.reduction_adds;
    bank_bytes += o.bank_bytes;
    global_bytes += o.global_bytes;
    return *this;
}

LatencyReport& LatencyReport::operator+=(const LatencyReport& o) {
    cycles_compute += o.cycles_compute;
    cycles_memory += o.cycles_memory;
    cycles_reduction += o.cycles_reduction;
    cycles_broadcast += o.cycles_broadcast;
    cycles_total += o.cycles_total;
    activity += o.activity;
    return *this;
}

std::string to_string(BoundClass b) {
    switch (b) {
        case BoundClass::memory_bound: return "memory-bound";
        case BoundClass::compute_bound: return "compute-bound";
        case BoundClass::balanced: return "balanced";
    }
    return "balanced";
}

void to_json(nlohmann::json& j, const LatencyReport& r) {
    j = nlohmann::json{
        {"cycles_compute", r.cycles_compute},
        {"cycles_memory", r.cycles_memory},
        {"cycles_reduction", r.cycles_reduction},
        {"cycles_broadcast", r.cycles_broadcast},
        {"cycles_total", r.cycles_total},
        {"energy_est", r.energy_est},
        {"bound_class", to_string(r.bound_class)},
        {"clock_hz", r.clock_hz},
        {"seconds_total", r.seconds_total},
    };
}

void to_json(nlohmann::json& j, const HardwareConfig& c) {
    j = nlohmann::json{
        {"clusters_x", c.clusters_x},
        {"clusters_y", c.clusters_y},
        {"macs_per_cluster", c.macs_per_cluster},
        {"clock_hz", c.clock_hz},
        {"bank_bandwidth_bytes_per_cycle", c.bank_bandwidth_bytes_per_cycle},
        {"global_broadcast_latency_cycles", c.global_broadcast_latency_cycles},
        {"bytes_per_element", c.bytes_per_element},
    };
}

void from_json(const nlohmann::json& j, HardwareConfig& c) {
    c.clusters_x = j.value("clusters_x", c.clusters_x);
    c.clusters_y = j.value("clusters_y", c.clusters_y);
    c.macs_per_cluster = j.value("macs_per_cluster", c.macs_per_cluster);
    c.clock_hz = j.value("clock_hz", c.clock_hz);
    c.bank_bandwidth_bytes_per_cycle =
        j.value("bank_bandwidth_bytes_per_cycle", c.bank_bandwidth_bytes_per_cycle);
    c.global_broadcast_latency_cycles =
        j.value("global_broadcast_latency_cycles", c.global_broadcast_latency_cycles);
    c.bytes_per_element = j.value("bytes_per_element", c.bytes_per_element);
    c.validate();
}

void to_json(nlohmann::json& j, const BaselineConfig& c) {
    j = nlohmann::json{
        {"peak_flops", c.peak_flops},
        {"mem_bandwidth", c.mem_bandwidth},
        {"kernel_launch_overhead", c.kernel_launch_overhead},
    };
}

void from_json(const nlohmann::json& j, BaselineConfig& c) {
    c.peak_flops = j.value("peak_flops", c.peak_flops);
    c.mem_bandwidth = j.value("mem_bandwidth", c.mem_bandwidth);
    c.kernel_launch_overhead = j.value("kernel_launch_overhead", c.kernel_launch_overhead);
    if (!(c.peak_flops > 0.0) || !(c.mem_bandwidth > 0.0) ||
        !(c.kernel_launch_overhead >= 0.0)) {
        throw validation_error("baseline config: parameters must be positive");
    }
}

void to_json(nlohmann::json& j, const AreaEnergyConfig& c) {
    j = nlohmann::json{
        {"energy_per_mac", c.energy_per_mac},
        {"energy_per_bank_byte", c.energy_per_bank_byte},
        {"energy_per_global_byte", c.energy_per_global_byte},
        {"energy_per_reduce_add", c.energy_per_reduce_add},
        {"area_per_mac", c.area_per_mac},
        {"area_per_cluster_buffer", c.area_per_cluster_buffer},
        {"area_per_cluster_tree", c.area_per_cluster_tree},
        {"area_per_bank_column", c.area_per_bank_column},
    };
}

void from_json(const nlohmann::json& j, AreaEnergyConfig& c) {
    c.energy_per_mac = j.value("energy_per_mac", c.energy_per_mac);
    c.energy_per_bank_byte = j.value("energy_per_bank_byte", c.energy_per_bank_byte);
    c.energy_per_global_byte = j.value("energy_per_global_byte", c.energy_per_global_byte);
    c.energy_per_reduce_add = j.value("energy_per_reduce_add", c.energy_per_reduce_add);
    c.area_per_mac = j.value("area_per_mac", c.area_per_mac);
    c.area_per_cluster_buffer = j.value("area_per_cluster_buffer", c.area_per_cluster_buffer);
    c.area_per_cluster_tree = j.value("area_per_cluster_tree", c.area_per_cluster_tree);
    c.area_per_bank_column = j.value("area_per_bank_column", c.area_per_bank_column);
}

MappingPlan map_reorth(std::uint64_t n, std::uint64_t basis_size, std::uint64_t f,
                       const HardwareConfig& hw) {
    hw.validate();
    if (n == 0 || basis_size == 0) {
        throw parameter_error("map_reorth: vector length and basis size must be positive");
    }
    if (f == 0 || !std::has_single_bit(f)) {
        throw mapping_error("map_reorth: expansion factor must be a power of two");
    }
    if (f > n) {
        throw mapping_error("map_reorth: expansion factor exceeds the vector length");
    }
    if (f > hw.total_macs()) {
        throw mapping_error("map_reorth: expansion factor exceeds the available multipliers");
    }
    MappingPlan plan;
    plan.expansion_factor = f;
    plan.vector_len = n;
    plan.basis_size = basis_size;
    plan.group_width = (n + f - 1) / f;
    plan.groups = f;
    plan.replication = f;
    plan.clusters_per_group =
        (plan.group_width + hw.macs_per_cluster - 1) / hw.macs_per_cluster;
    plan.active_clusters = std::min<std::uint64_t>(
        hw.clusters(), plan.groups * plan.clusters_per_group);
    return plan;
}

LatencyReport simulate_reorth(const MappingPlan& plan, const HardwareConfig& hw) {
    hw.validate();
    if (plan.groups * plan.group_width < plan.vector_len) {
        throw mapping_error("simulate_reorth: plan does not cover the vector");
    }
    const double be = static_cast<double>(hw.bytes_per_element);
    const double n = static_cast<double>(plan.vector_len);
    const double j = static_cast<double>(plan.basis_size);
    const double f = static_cast<double>(plan.expansion_factor);
    const double macs = static_cast<double>(hw.total_macs());

    LatencyReport r;
    r.cycles_compute = ceil_div(j * n, macs) + ceil_div(j * f * n, macs);
    r.cycles_memory = (j + 2.0) * n * be / hw.aggregate_bandwidth();
    r.cycles_reduction = j * static_cast<double>(ceil_log2(plan.group_width));
    r.cycles_broadcast = j * hw.global_broadcast_latency_cycles;
    r.cycles_total = std::max(r.cycles_compute, r.cycles_memory) + r.cycles_reduction +
                     r.cycles_broadcast;

    r.activity.mac_ops_base = j * n;
    r.activity.mac_ops_replicated = j * f * n;
    r.activity.reduction_adds = j * f * (static_cast<double>(plan.group_width) - 1.0);
    r.activity.bank_bytes = (j + 2.0) * n * be;
    r.activity.global_bytes = 2.0 * j * f * be;
    finish(r, hw);
    return r;
}

LatencyReport simulate_lanczos(std::uint64_t s, std::uint64_t h, std::uint64_t k,
                               std::uint64_t f, const HardwareConfig& hw) {
    hw.validate();
    if (s == 0 || h == 0) throw parameter_error("simulate_lanczos: empty dims");

    LatencyReport total;
    // start-up: normalize the seed vector, first matvec, normalize the result
    total += normalize_stage(h, hw);
    total += matvec_stage(s, h, hw);
    total += normalize_stage(s, hw);

    for (std::uint64_t j = 1; j <= k; ++j) {
        total += matvec_stage(h, s, hw); // transposed product feeding the V side
        MappingPlan vplan = map_reorth(h, j, f, hw);
        LatencyReport vpass = simulate_reorth(vplan, hw);
        total += vpass;
        total += vpass; // second pass
        total += normalize_stage(h, hw);

        total += matvec_stage(s, h, hw);
        MappingPlan uplan = map_reorth(s, j, f, hw);
        LatencyReport upass = simulate_reorth(uplan, hw);
        total += upass;
        total += upass;
        total += normalize_stage(s, hw);
    }

    if (k >= 1) {
        total += small_svd_stage(k + 1, hw);
        total += gemm_stage(s, k + 1, k, hw);       // left recombination
        total += gemm_stage(k, k + 1, h, hw);       // right recombination
    }
    finish(total, hw);
    return total;
}

double roofline_seconds(double flops, double bytes, const BaselineConfig& cfg) {
    return std::max(flops / cfg.peak_flops, bytes / cfg.mem_bandwidth) +
           cfg.kernel_launch_overhead;
}

BaselineReport baseline_model(std::uint64_t s, std::uint64_t h, std::uint64_t k,
                              const BaselineConfig& cfg) {
    if (s == 0 || h == 0) throw parameter_error("baseline_model: empty dims");
    const double be = 2.0;
    BaselineReport out;
    auto add_kernel = [&](const std::string& name, double flops, double bytes) {
        KernelCost kc;
        kc.name = name;
        kc.flops = flops;
        kc.bytes = bytes;
        kc.seconds = roofline_seconds(flops, bytes, cfg);
        double tc = flops / cfg.peak_flops;
        double tm = bytes / cfg.mem_bandwidth;
        kc.bound = classify(tc, tm);
        out.kernels.push_back(kc);
        out.report.cycles_compute += tc;
        out.report.cycles_memory += tm;
        out.report.cycles_total += kc.seconds;
    };

    const double sd = static_cast<double>(s), hd = static_cast<double>(h);
    const double mv_flops = 2.0 * sd * hd;
    const double mv_bytes = (sd * hd + sd + hd) * be;

    add_kernel("init_matvec", mv_flops, mv_bytes);
    add_kernel("init_normalize", 3.0 * hd, 2.0 * hd * be);
    for (std::uint64_t j = 1; j <= k; ++j) {
        const double jd = static_cast<double>(j);
        add_kernel("matvec_t_" + std::to_string(j), mv_flops, mv_bytes);
        // two orthogonalization passes fused with the normalization
        add_kernel("reorth_v_" + std::to_string(j), 2.0 * 4.0 * hd * jd + 3.0 * hd,
                   (jd + 2.0) * hd * be);
        add_kernel("matvec_" + std::to_string(j), mv_flops, mv_bytes);
        add_kernel("reorth_u_" + std::to_string(j), 2.0 * 4.0 * sd * jd + 3.0 * sd,
                   (jd + 2.0) * sd * be);
    }
    out.report.bound_class = classify(out.report.cycles_compute, out.report.cycles_memory);
    out.report.clock_hz = 1.0; // cycle fields carry seconds
    out.report.seconds_total = out.report.cycles_total;
    return out;
}

double dynamic_energy(const ActivityCounters& a, const AreaEnergyConfig& cfg) {
    return (a.mac_ops_base + a.mac_ops_replicated) * cfg.energy_per_mac +
           a.reduction_adds * cfg.energy_per_reduce_add +
           a.bank_bytes * cfg.energy_per_bank_byte +
           a.global_bytes * cfg.energy_per_global_byte;
}

AreaPowerEstimate estimate_area_power(const HardwareConfig& hw,
                                      const LatencyReport& activity,
                                      const AreaEnergyConfig& cfg) {
    hw.validate();
    AreaPowerEstimate e;
    const double clusters = static_cast<double>(hw.clusters());
    e.area_units = clusters * (static_cast<double>(hw.macs_per_cluster) * cfg.area_per_mac +
                               cfg.area_per_cluster_buffer + cfg.area_per_cluster_tree) +
                   static_cast<double>(hw.clusters_x) * cfg.area_per_bank_column;
    e.energy_units = dynamic_energy(activity.activity, cfg);
    return e;
}

ActivityCounters all_global_reduction_counters(const MappingPlan& plan,
                                               const HardwareConfig& hw) {
    const double be = static_cast<double>(hw.bytes_per_element);
    const double n = static_cast<double>(plan.vector_len);
    const double j = static_cast<double>(plan.basis_size);
    ActivityCounters a;
    a.mac_ops_base = j * n;
    a.mac_ops_replicated = j * n; // no duplication without expansion
    a.reduction_adds = j * (n - 1.0);
    a.bank_bytes = (j + 2.0) * n * be;
    a.global_bytes = 2.0 * j * n * be; // every element crosses the global bus
    return a;
}

} // namespace dcom
