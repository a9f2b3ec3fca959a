#include "dcom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace dcom {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw shape_error("matmul: inner dimensions " + std::to_string(a.cols()) +
                          " and " + std::to_string(b.rows()) + " do not match");
    }
    DenseMatrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                acc += static_cast<double>(a(i, t)) * static_cast<double>(b(t, j));
            }
            out(i, j) = static_cast<float>(acc);
        }
    }
    return out;
}

double frobenius_norm(const DenseMatrix& a) {
    double acc = 0.0;
    for (float v : a.data()) acc += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(acc);
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw shape_error("dot: vector lengths differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double norm2(const Vector& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    }
    return std::sqrt(acc);
}

OrthoResult orthogonalize_against(const Vector& z, std::span<const Vector> basis,
                                  int passes, double breakdown_eps) {
    if (passes < 1) {
        throw parameter_error("orthogonalize_against: passes must be >= 1");
    }
    Vector w = z;
    for (int pass = 0; pass < passes; ++pass) {
        for (const Vector& q : basis) {
            double c = dot(w, q);
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = static_cast<float>(w[i] - c * q[i]);
            }
        }
    }
    OrthoResult r;
    r.beta = norm2(w);
    if (r.beta < breakdown_eps || r.beta == 0.0) {
        r.breakdown = true;
        r.v = Vector(z.size());
        return r;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = static_cast<float>(w[i] / r.beta);
    }
    r.v = std::move(w);
    return r;
}

namespace {

// Double-precision column-major workspace for the Jacobi sweeps.
struct Work {
    std::size_t m = 0, n = 0;
    std::vector<double> a; // m x n, column-major
    std::vector<double> v; // n x n, column-major, accumulated right rotations

    double& A(std::size_t i, std::size_t j) { return a[j * m + i]; }
    double& V(std::size_t i, std::size_t j) { return v[j * n + i]; }
};

// One-sided Jacobi on a tall matrix (m >= n): rotates column pairs of A until
// all pairs are numerically orthogonal, accumulating the rotations in V.
// Afterwards column norms of A are the singular values.
std::uint64_t jacobi_sweeps(Work& w) {
    const std::size_t m = w.m, n = w.n;
    std::uint64_t flops = 0;
    const double tol = 1e-14;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    double x = w.A(i, p), y = w.A(i, q);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                flops += 6 * m;
                if (std::abs(apq) <= tol * std::sqrt(app) * std::sqrt(aqq)) continue;
                rotated = true;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = std::copysign(1.0, zeta) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    double x = w.A(i, p), y = w.A(i, q);
                    w.A(i, p) = c * x - s * y;
                    w.A(i, q) = s * x + c * y;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double x = w.V(i, p), y = w.V(i, q);
                    w.V(i, p) = c * x - s * y;
                    w.V(i, q) = s * x + c * y;
                }
                flops += 6 * (m + n);
            }
        }
        if (!rotated) break;
    }
    return flops;
}

// Deterministic orthonormal completion for null columns of U: orthogonalize
// canonical basis vectors against the existing columns and take the first
// candidates with non-negligible residual.
void complete_null_columns(std::vector<std::vector<double>>& ucols, std::size_t m) {
    std::vector<std::size_t> missing;
    for (std::size_t j = 0; j < ucols.size(); ++j) {
        if (ucols[j].empty()) missing.push_back(j);
    }
    if (missing.empty()) return;
    std::size_t cand = 0;
    for (std::size_t idx : missing) {
        while (cand < m) {
            std::vector<double> e(m, 0.0);
            e[cand] = 1.0;
            ++cand;
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& col : ucols) {
                    if (col.empty()) continue;
                    double c = std::inner_product(e.begin(), e.end(), col.begin(), 0.0);
                    for (std::size_t i = 0; i < m; ++i) e[i] -= c * col[i];
                }
            }
            double nrm = std::sqrt(std::inner_product(e.begin(), e.end(), e.begin(), 0.0));
            if (nrm > 1e-6) {
                for (double& x : e) x /= nrm;
                ucols[idx] = std::move(e);
                break;
            }
        }
    }
}

// Tall-matrix SVD core, m >= n. Returns U (m x n), s (n), Vr (n x n, rows are
// right singular vectors).
void svd_tall(const DenseMatrix& in, bool transposed, SvdResult& out) {
    const std::size_t m = transposed ? in.cols() : in.rows();
    const std::size_t n = transposed ? in.rows() : in.cols();
    Work w;
    w.m = m;
    w.n = n;
    w.a.assign(m * n, 0.0);
    w.v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            w.A(i, j) = transposed ? in(j, i) : in(i, j);
        }
    }
    for (std::size_t j = 0; j < n; ++j) w.V(j, j) = 1.0;

    out.flops += jacobi_sweeps(w);

    std::vector<double> sv(n, 0.0);
    std::vector<std::vector<double>> ucols(n);
    double smax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += w.A(i, j) * w.A(i, j);
        sv[j] = std::sqrt(acc);
        smax = std::max(smax, sv[j]);
    }
    const double null_tol = smax * 1e-12;
    for (std::size_t j = 0; j < n; ++j) {
        if (sv[j] > null_tol && sv[j] > 0.0) {
            ucols[j].resize(m);
            for (std::size_t i = 0; i < m; ++i) ucols[j][i] = w.A(i, j) / sv[j];
        } else {
            sv[j] = 0.0;
        }
    }
    complete_null_columns(ucols, m);

    // sort descending; stable so equal values keep their sweep order
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sv[a] > sv[b]; });

    out.s.resize(n);
    out.u = DenseMatrix(m, n);
    out.v = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = order[k];
        out.s[k] = sv[j];
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = static_cast<float>(ucols[j][i]);
        for (std::size_t i = 0; i < n; ++i) out.v(k, i) = static_cast<float>(w.V(i, j));
    }
}

void apply_sign_convention(DenseMatrix& u, DenseMatrix& v) {
    for (std::size_t k = 0; k < u.cols(); ++k) {
        std::size_t arg = 0;
        float best = 0.0f;
        for (std::size_t i = 0; i < u.rows(); ++i) {
            float mag = std::abs(u(i, k));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (u(arg, k) < 0.0f) {
            for (std::size_t i = 0; i < u.rows(); ++i) u(i, k) = -u(i, k);
            for (std::size_t i = 0; i < v.cols(); ++i) v(k, i) = -v(k, i);
        }
    }
}

} // namespace

SvdResult svd_oracle(const DenseMatrix& a) {
    const std::size_t mind = std::min(a.rows(), a.cols());
    if (mind > 1024) {
        throw parameter_error("svd_oracle: min dimension exceeds the 1024 desk-scale guard");
    }
    SvdResult out;
    if (mind == 0) {
        out.u = DenseMatrix(a.rows(), 0);
        out.v = DenseMatrix(0, a.cols());
        return out;
    }
    if (a.rows() >= a.cols()) {
        svd_tall(a, /*transposed=*/false, out);
    } else {
        // a = (u' s v')^T of the transpose: swap the roles of the factors
        SvdResult t;
        svd_tall(a, /*transposed=*/true, t);
        out.flops = t.flops;
        out.s = std::move(t.s);
        const std::size_t r = out.s.size();
        out.u = DenseMatrix(a.rows(), r);
        for (std::size_t k = 0; k < r; ++k)
            for (std::size_t i = 0; i < a.rows(); ++i) out.u(i, k) = t.v(k, i);
        out.v = DenseMatrix(r, a.cols());
        for (std::size_t k = 0; k < r; ++k)
            for (std::size_t i = 0; i < a.cols(); ++i) out.v(k, i) = t.u(i, k);
    }
    apply_sign_convention(out.u, out.v);
    return out;
}

} // namespace dcom
