#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcom/linalg.hpp"
#include "dcom/matrix.hpp"

namespace dcom {

/// Factor triple u * sigma * v with u: n1 x r1, sigma: r1 x r2, v: r2 x n2.
/// sigma is diagonal when produced by lanczos_svd; preserved-form products
/// can make it dense, tracked by `sigma_diagonal`.
struct DecomposedMatrix {
    DenseMatrix u;
    DenseMatrix sigma;
    DenseMatrix v;
    bool sigma_diagonal = false;

    std::size_t r1() const { return sigma.rows(); }
    std::size_t r2() const { return sigma.cols(); }
    std::size_t n1() const { return u.rows(); }
    std::size_t n2() const { return v.cols(); }
};

DenseMatrix reconstruct(const DecomposedMatrix& d);

struct LanczosIterRecord {
    std::size_t iteration = 0; // 0 = start-up (first column pair)
    double alpha = 0.0;
    double beta = 0.0;
    double rel_error = 0.0; // residual of the accumulated bidiagonal factorization
    std::uint64_t flops_matvec = 0;
    std::uint64_t flops_reorth_u = 0;
    std::uint64_t flops_reorth_v = 0;
    std::uint64_t flops_normalize = 0;
};

struct LanczosTrace {
    std::vector<LanczosIterRecord> iterations;
    std::uint64_t flops_small_svd = 0;
    std::uint64_t flops_recombine = 0;
    std::size_t effective_rank = 0;
    std::size_t completed_iterations = 0;
    bool breakdown = false;

    std::uint64_t flops_matvec_total() const;
    std::uint64_t flops_reorth_u_total() const;
    std::uint64_t flops_reorth_v_total() const;
    std::uint64_t flops_normalize_total() const;
    std::uint64_t flops_total() const;

    /// Work of the two in-loop composite operations (each spans its feeding
    /// matrix-vector product, the orthogonalization passes and the
    /// normalization). This is the operation-level breakdown used when
    /// comparing against start-up, small-SVD and recombination cost.
    std::uint64_t flops_loop_operations() const;
};

/// Trace export, columns: iteration, alpha, beta, rel_error, flops_matvec,
/// flops_reorth_u, flops_reorth_v.
std::string trace_to_csv(const LanczosTrace& trace);

/// Default breakdown tolerance: 1e-8 * ||a||_F / sqrt(n1*n2), floored away
/// from zero so the all-zero matrix degenerates cleanly to rank 0.
double default_breakdown_eps(const DenseMatrix& a);

struct LanczosResult {
    DecomposedMatrix decomposition;
    LanczosTrace trace;
};

/// Iteration budget for a rank-k run: the leading triplets need a few spare
/// basis directions to converge, so the loop runs up to 2k steps (never past
/// the small dimension). The per-iteration cost formulas apply to each of
/// these steps.
std::size_t lanczos_step_budget(std::size_t k, std::size_t n1, std::size_t n2);

/// Truncated SVD by bidiagonalization with full two-pass reorthogonalization
/// against the accumulated bases. The start vector is seeded uniform(-1,1),
/// normalized. Iteration stops early when alpha or beta falls below eps; the
/// bidiagonal system is then truncated to the completed steps. The small
/// system is factored by svd_oracle and the leading k triplets are returned
/// (fewer after an early break). Bit-identical for identical
/// (a, k, eps, seed).
LanczosResult lanczos_svd(const DenseMatrix& a, std::size_t k, double eps,
                          std::uint64_t seed);

/// ||a - u sigma v||_F / ||a||_F; 0 when a is the zero matrix.
double reconstruction_error(const DenseMatrix& a, const DecomposedMatrix& d);

struct ConvergenceRow {
    std::size_t rank = 0;
    double lanczos_error = 0.0;
    double oracle_error = 0.0;
    std::uint64_t flops_matvec = 0;
    std::uint64_t flops_reorth_u = 0;
    std::uint64_t flops_reorth_v = 0;
    std::uint64_t flops_normalize = 0;
    std::uint64_t flops_small_svd = 0;
    std::uint64_t flops_recombine = 0;
    std::uint64_t flops_total = 0;
};

/// Error-vs-rank study with instrumented operation counts and the optimal
/// (oracle truncation) error per rank. Ranks are evaluated in ascending
/// order.
std::vector<ConvergenceRow> convergence_study(const DenseMatrix& a,
                                              std::vector<std::size_t> ranks,
                                              double eps = 0.0,
                                              std::uint64_t seed = 0);

std::string convergence_to_csv(const std::vector<ConvergenceRow>& rows);

} // namespace dcom
