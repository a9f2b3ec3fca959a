#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcom/matrix.hpp"

namespace dcom {

/// Exact triple-loop product. Products are accumulated per output element in
/// a 64-bit partial sum, then rounded once to 32-bit on store. Deterministic
/// for fixed inputs.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// sqrt of the sum of squared entries, accumulated in 64-bit.
double frobenius_norm(const DenseMatrix& a);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

struct OrthoResult {
    Vector v;        // unit residual direction (zero vector on breakdown)
    double beta = 0; // residual norm before the final normalization
    bool breakdown = false;
};

/// Projects z against an orthonormal basis `passes` times (two passes restore
/// orthogonality to working precision), then normalizes. beta is the residual
/// norm after the last pass; if beta < breakdown_eps the result is flagged as
/// a breakdown and v is left zero. The caller owns the breakdown policy.
OrthoResult orthogonalize_against(const Vector& z, std::span<const Vector> basis,
                                  int passes = 2, double breakdown_eps = 1e-12);

struct SvdResult {
    DenseMatrix u;        // rows x r, orthonormal columns
    std::vector<double> s; // r singular values, descending, non-negative
    DenseMatrix v;        // r x cols, orthonormal rows
    std::uint64_t flops = 0; // instrumented work, for operation accounting
};

/// Ground-truth full SVD for desk-scale matrices (min dim <= 1024), one-sided
/// Jacobi with 64-bit internal workspace. Factors satisfy a = u * diag(s) * v
/// with v stored row-wise (r x cols). Deterministic: singular values sorted
/// descending, and each column of u has its largest-magnitude entry (first on
/// ties) non-negative so repeated runs are bit-identical.
SvdResult svd_oracle(const DenseMatrix& a);

} // namespace dcom
