#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcom/lanczos.hpp"
#include "dcom/matrix.hpp"

#include "json.hpp"

namespace dcom {

/// A batch of B prompts, each an S x H activation matrix.
struct BatchActivations {
    std::size_t batch = 0;
    std::size_t seq_len = 0;
    std::size_t hidden = 0;
    std::vector<DenseMatrix> prompts;

    void validate() const;
};

struct DecomposedBatch {
    std::vector<DecomposedMatrix> prompts;
    std::size_t r1 = 0;
    std::size_t r2 = 0;
};

/// Instrumented per-operation counters. flops counts 2*m*k*n per product;
/// peak_temp_elems tracks the largest matrix materialized inside the call
/// (temporaries and result), which the factored-form ops keep small.
struct OpStats {
    std::uint64_t flops = 0;
    std::uint64_t peak_temp_elems = 0;
    std::uint64_t matmul_count = 0;

    void on_product(std::size_t m, std::size_t k, std::size_t n) {
        flops += 2ull * m * k * n;
        matmul_count += 1;
        on_alloc(m, n);
    }
    void on_alloc(std::size_t rows, std::size_t cols) {
        std::uint64_t elems = static_cast<std::uint64_t>(rows) * cols;
        if (elems > peak_temp_elems) peak_temp_elems = elems;
    }
};

/// Decomposes each prompt independently with lanczos_svd(prompt, k, eps,
/// seed + i). Errors carry the offending prompt index.
DecomposedBatch decompose_batch(const BatchActivations& x, std::size_t k, double eps,
                                std::uint64_t seed);

/// Factored-input product: evaluates u * (sigma * (v * w)) right to left so
/// every intermediate stays rank-sized. Equals reconstruct(d) * w.
DenseMatrix matmul_input_decomposed(const DecomposedMatrix& d, const DenseMatrix& w,
                                    OpStats* stats = nullptr);

/// Form-preserving product: only v is replaced by v * w; u and sigma pass
/// through unchanged, so the output stays factored and nothing has to be
/// re-decomposed downstream.
DecomposedMatrix matmul_preserved_input(const DecomposedMatrix& d, const DenseMatrix& w,
                                        OpStats* stats = nullptr);

/// Both operands factored: pairs the small inner products first
/// ((v_i * u_w) * sigma_w, then sigma_i * ..., then * v_w, then u_i * ...).
DenseMatrix matmul_input_weight_decomposed(const DecomposedMatrix& dx,
                                           const DecomposedMatrix& dw,
                                           OpStats* stats = nullptr);

/// Both operands factored, form-preserving: sigma* = sigma_i * v_i * u_w *
/// sigma_w collapses the contraction into the core; the result keeps the
/// input's u and the weight's v. The new core is dense (r1 x p2).
DecomposedMatrix matmul_preserved_input_weight(const DecomposedMatrix& dx,
                                               const DecomposedMatrix& dw,
                                               OpStats* stats = nullptr);

enum class Scheme { input_only, input_weight };

struct CostDims {
    std::uint64_t batch = 1;
    std::uint64_t seq_len = 0;  // S
    std::uint64_t hidden = 0;   // H
    std::uint64_t w_cols = 0;   // output dim of the weight
};

struct CostRanks {
    std::uint64_t r1 = 0;
    std::uint64_t r2 = 0;
    std::optional<std::uint64_t> p1; // weight ranks, input_weight only
    std::optional<std::uint64_t> p2;
};

struct CostReport {
    std::uint64_t flops = 0;
    std::uint64_t input_bytes = 0;
    std::uint64_t weight_bytes = 0;
    std::uint64_t output_bytes = 0;
    // headline ratio counts only the weight-multiply chain; the true ratio
    // also charges the small factor applications
    double compute_reduction_ratio_paper = 1.0;
    double compute_reduction_ratio_true = 1.0;
    double input_compression_ratio = 1.0;
    double weight_compression_ratio = 1.0;
    double breakeven_rank = 0.0;
};

/// Closed-form cost model for one weight multiply under the given scheme.
/// flops/bytes match the instrumented counters of the corresponding op
/// exactly (2 bytes per element for the hardware-facing byte counts).
CostReport cost_report(const CostDims& dims, const CostRanks& ranks, Scheme scheme,
                       bool preserved);

/// Largest rank for which the factored weight is smaller than the dense one.
double breakeven_rank(std::uint64_t d, std::uint64_t w);

void to_json(nlohmann::json& j, const CostReport& r);
void from_json(const nlohmann::json& j, CostReport& r);

} // namespace dcom
