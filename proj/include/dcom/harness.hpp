#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dcom/decomp.hpp"
#include "dcom/dcomsim.hpp"
#include "dcom/matrix.hpp"

#include "json.hpp"

namespace dcom {

/// One linear layer product of the transformer block. `input_tensor` names
/// the activation it consumes; products sharing an input share one
/// decomposition point.
struct MatmulSpec {
    std::string name;
    std::string input_tensor;
    std::uint64_t in_dim = 0;
    std::uint64_t out_dim = 0;
    bool decomposable = false; // consumes the hidden-width stream
};

struct ModelPlan {
    std::uint64_t num_layers = 0;
    std::uint64_t seq_len = 0; // S
    std::uint64_t hidden = 0;  // H
    std::uint64_t batch = 0;   // B
    std::vector<MatmulSpec> layer_matmuls; // identical for every layer

    void validate() const;
    /// 32 layers, S = H = 4096, batch 64, 11008-wide MLP: the default
    /// desk-scale stand-in with familiar dimensions.
    static ModelPlan llama2_7b_like(std::uint64_t batch = 64);
};

void to_json(nlohmann::json& j, const ModelPlan& m);
void from_json(const nlohmann::json& j, ModelPlan& m);

struct OutlierOptions {
    bool enabled = false;
    double target_fraction = 0.03;
};

struct DecompPlan {
    std::vector<std::uint64_t> decomposed_layer_ids; // sorted, unique
    std::uint64_t rank = 10;
    Scheme scheme = Scheme::input_only;
    bool preserved = true;
    OutlierOptions outlier;

    void validate(const ModelPlan& model) const;
};

void to_json(nlohmann::json& j, const DecompPlan& p);
void from_json(const nlohmann::json& j, DecompPlan& p);

/// The four canonical decomposed-layer choices exercised by the experiment
/// tables, keyed by the number of layers (4, 6, 8, 10).
std::vector<std::uint64_t> canonical_layer_set(std::size_t count);

struct LayerEstimate {
    std::uint64_t layer = 0;
    bool decomposed = false;
    CostReport cost;                  // summed over the layer's products
    double gemm_seconds_dense = 0;    // all products dense
    double gemm_seconds_actual = 0;   // with the plan applied
    double decomp_accel_seconds = 0;  // decomposition work mapped on the array
    double decomp_exposed_seconds = 0; // part not hidden behind the prior layer
    std::uint64_t activation_bytes_dense = 0;
    std::uint64_t activation_bytes_actual = 0;
    std::uint64_t weight_bytes_dense = 0;
    std::uint64_t weight_bytes_actual = 0;
    std::uint64_t decomposition_events = 0;
    std::uint64_t redecomposition_events = 0;
};

struct ExperimentReport {
    std::vector<LayerEstimate> layers;
    // aggregates are exact sums of the per-layer entries
    std::uint64_t total_flops = 0;
    std::uint64_t activation_bytes_dense = 0;
    std::uint64_t activation_bytes_actual = 0;
    std::uint64_t weight_bytes_dense = 0;
    std::uint64_t weight_bytes_actual = 0;
    std::uint64_t decomposition_events = 0;
    std::uint64_t redecomposition_events = 0;
    double memory_reduction_pct = 0;
    double weight_memory_reduction_pct = 0;
    double baseline_runtime_seconds = 0;
    double total_runtime_seconds = 0;
    double runtime_reduction_pct = 0;
    double decomp_accel_seconds = 0;
    double decomp_gpu_seconds = 0; // the same work costed on the baseline device
    std::uint64_t expansion_factor = 1;
    std::string quality = "not-evaluated";
    std::string constants_provenance;
    nlohmann::json config_echo;
};

void to_json(nlohmann::json& j, const ExperimentReport& r);

/// Latency-optimal expansion factor for the given decomposition shape
/// (argmin over powers of two up to 32; first minimum wins).
std::uint64_t optimal_expansion_factor(std::uint64_t s, std::uint64_t h,
                                       std::uint64_t k, const HardwareConfig& hw);

/// End-to-end cost and latency estimate of a decomposition plan. Per
/// decomposed layer the decomposition runs on the modeled array (overlapped
/// with the previous layer's products), the products run factored, and every
/// other layer is costed dense on the baseline device.
ExperimentReport estimate_plan(const ModelPlan& model, const DecompPlan& plan,
                               const HardwareConfig& hw, const BaselineConfig& baseline);

enum class SweepVary { rank, expansion_factor, layers, outlier_fraction };

SweepVary parse_sweep_vary(const std::string& name);

struct SweepSpec {
    SweepVary vary = SweepVary::rank;
    std::vector<double> values;
};

struct SweepFixed {
    ModelPlan model = ModelPlan::llama2_7b_like();
    DecompPlan plan;
    HardwareConfig hw;
    BaselineConfig baseline;
    std::uint64_t synthetic_seed = 7;
};

/// One CSV row per swept value. rank/layers rows carry the plan metrics;
/// expansion-factor rows carry the simulated cycle breakdown;
/// outlier-fraction rows carry measured reconstruction errors on a planted
/// synthetic input.
std::string sweep(const SweepSpec& spec, const SweepFixed& fixed);

struct MatrixSource {
    std::optional<std::filesystem::path> file; // DCM1 or CSV
    // synthetic fallback when no file is given
    std::size_t rows = 512;
    std::size_t cols = 384;
    std::string spectrum = "pow2"; // pow2 | flat | planted
    std::size_t planted_rank = 8;
    std::uint64_t seed = 0;

    DenseMatrix load() const;
};

struct ConvergenceBenchResult {
    std::string table_csv;
    std::vector<std::pair<std::size_t, std::string>> trace_csvs; // rank -> csv
};

/// Error-vs-rank bench over a file or synthetic source; returns the study
/// table plus one iteration trace per rank.
ConvergenceBenchResult run_convergence_bench(const MatrixSource& source,
                                             const std::vector<std::size_t>& ranks);

} // namespace dcom
