#include "dcom/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcom/io.hpp"
#include "dcom/rng.hpp"

namespace dcom {

DenseMatrix reconstruct(const DecomposedMatrix& d) {
    return matmul(matmul(d.u, d.sigma), d.v);
}

std::uint64_t LanczosTrace::flops_matvec_total() const {
    std::uint64_t t = 0;
    for (const auto& r : iterations) t += r.flops_matvec;
    return t;
}
std::uint64_t LanczosTrace::flops_reorth_u_total() const {
    std::uint64_t t = 0;
    for (const auto& r : iterations) t += r.flops_reorth_u;
    return t;
}
std::uint64_t LanczosTrace::flops_reorth_v_total() const {
    std::uint64_t t = 0;
    for (const auto& r : iterations) t += r.flops_reorth_v;
    return t;
}
std::uint64_t LanczosTrace::flops_normalize_total() const {
    std::uint64_t t = 0;
    for (const auto& r : iterations) t += r.flops_normalize;
    return t;
}
std::uint64_t LanczosTrace::flops_total() const {
    return flops_matvec_total() + flops_reorth_u_total() + flops_reorth_v_total() +
           flops_normalize_total() + flops_small_svd + flops_recombine;
}
std::uint64_t LanczosTrace::flops_loop_operations() const {
    std::uint64_t t = 0;
    for (const auto& r : iterations) {
        if (r.iteration == 0) continue;
        t += r.flops_matvec + r.flops_reorth_u + r.flops_reorth_v + r.flops_normalize;
    }
    return t;
}

std::string trace_to_csv(const LanczosTrace& trace) {
    std::ostringstream os;
    os << "iteration,alpha,beta,rel_error,flops_matvec,flops_reorth_u,flops_reorth_v\n";
    for (const auto& r : trace.iterations) {
        os << r.iteration << ',' << format_real(r.alpha) << ',' << format_real(r.beta)
           << ',' << format_real(r.rel_error) << ',' << r.flops_matvec << ','
           << r.flops_reorth_u << ',' << r.flops_reorth_v << '\n';
    }
    return os.str();
}

double default_breakdown_eps(const DenseMatrix& a) {
    double n = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
    double eps = 1e-8 * frobenius_norm(a) / std::sqrt(std::max(n, 1.0));
    return std::max(eps, 1e-30);
}

namespace {

// y = a * x (cost 2*rows*cols flops)
Vector matvec(const DenseMatrix& a, const Vector& x) {
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            acc += static_cast<double>(a(i, j)) * static_cast<double>(x[j]);
        }
        y[i] = static_cast<float>(acc);
    }
    return y;
}

// y = a^T * x
Vector matvec_t(const DenseMatrix& a, const Vector& x) {
    Vector y(a.cols());
    std::vector<double> acc(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double xi = x[i];
        for (std::size_t j = 0; j < a.cols(); ++j) {
            acc[j] += static_cast<double>(a(i, j)) * xi;
        }
    }
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] = static_cast<float>(acc[j]);
    return y;
}

DenseMatrix columns_to_matrix(const std::vector<Vector>& cols, std::size_t n) {
    DenseMatrix m(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = cols[j][i];
    return m;
}

DenseMatrix rows_from_vectors(const std::vector<Vector>& rows, std::size_t n) {
    DenseMatrix m(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
    return m;
}

constexpr int kReorthPasses = 2;

} // namespace

std::size_t lanczos_step_budget(std::size_t k, std::size_t n1, std::size_t n2) {
    // the random start vector is generally not inside the row space, so one
    // basis slot beyond the small dimension must stay available; basis
    // exhaustion then terminates through the breakdown checks
    const std::size_t cap = std::min(n1, n2);
    return std::min(k + std::max<std::size_t>(4, k), cap);
}

LanczosResult lanczos_svd(const DenseMatrix& a, std::size_t k, double eps,
                          std::uint64_t seed) {
    const std::size_t n1 = a.rows(), n2 = a.cols();
    if (n1 == 0 || n2 == 0) throw parameter_error("lanczos_svd: empty matrix");
    if (k < 1 || k > std::min(n1, n2)) {
        throw parameter_error("lanczos_svd: rank k out of range [1, min(rows, cols)]");
    }
    if (!(eps > 0.0)) throw parameter_error("lanczos_svd: eps must be positive");
    a.require_finite();

    LanczosResult res;
    LanczosTrace& trace = res.trace;
    const double a_norm = frobenius_norm(a);
    const double a_norm_sq = a_norm * a_norm;
    const std::uint64_t mv_flops = 2ull * n1 * n2;

    std::vector<Vector> vbasis; // right vectors, length n2
    std::vector<Vector> ubasis; // left vectors, length n1
    std::vector<double> alphas;
    std::vector<double> betas;
    double captured_sq = 0.0; // running ||B||_F^2 of the kept entries

    auto record_error = [&]() {
        if (a_norm == 0.0) return 0.0;
        return std::sqrt(std::max(0.0, a_norm_sq - captured_sq)) / a_norm;
    };

    // start-up: normalized seed vector, first left vector
    Vector z0 = random_uniform_vector(n2, seed);
    double z0n = norm2(z0);
    for (std::size_t i = 0; i < n2; ++i) z0[i] = static_cast<float>(z0[i] / z0n);

    Vector u0 = matvec(a, z0);
    double alpha0 = norm2(u0);

    LanczosIterRecord init;
    init.iteration = 0;
    init.flops_matvec = mv_flops;
    init.flops_normalize = 3ull * n2 + 3ull * n1;
    if (alpha0 < eps) {
        // degenerate input (for example the zero matrix): empty decomposition
        init.alpha = alpha0;
        init.rel_error = record_error();
        trace.iterations.push_back(init);
        trace.breakdown = true;
        res.decomposition.u = DenseMatrix(n1, 0);
        res.decomposition.sigma = DenseMatrix(0, 0);
        res.decomposition.v = DenseMatrix(0, n2);
        res.decomposition.sigma_diagonal = true;
        return res;
    }
    for (std::size_t i = 0; i < n1; ++i) u0[i] = static_cast<float>(u0[i] / alpha0);
    vbasis.push_back(std::move(z0));
    ubasis.push_back(std::move(u0));
    alphas.push_back(alpha0);
    captured_sq += alpha0 * alpha0;
    init.alpha = alpha0;
    init.rel_error = record_error();
    trace.iterations.push_back(init);

    const std::size_t max_steps = lanczos_step_budget(k, n1, n2);
    bool keep_trailing_beta = false;

    for (std::size_t j = 1; j <= max_steps; ++j) {
        LanczosIterRecord rec;
        rec.iteration = j;

        Vector z = matvec_t(a, ubasis.back());
        rec.flops_matvec += mv_flops;
        OrthoResult zo = orthogonalize_against(z, vbasis, kReorthPasses, eps);
        rec.flops_reorth_v = static_cast<std::uint64_t>(kReorthPasses) * 4ull * n2 * j;
        rec.flops_normalize += 3ull * n2;
        rec.beta = zo.beta;
        if (zo.breakdown) {
            trace.breakdown = true;
            rec.rel_error = record_error();
            trace.iterations.push_back(rec);
            break;
        }
        betas.push_back(zo.beta);
        captured_sq += zo.beta * zo.beta;
        vbasis.push_back(std::move(zo.v));

        Vector u = matvec(a, vbasis.back());
        rec.flops_matvec += mv_flops;
        OrthoResult uo = orthogonalize_against(u, ubasis, kReorthPasses, eps);
        rec.flops_reorth_u = static_cast<std::uint64_t>(kReorthPasses) * 4ull * n1 * j;
        rec.flops_normalize += 3ull * n1;
        rec.alpha = uo.beta;
        if (uo.breakdown) {
            // the new right vector still carries weight through beta_{j-1};
            // keep it as a trailing column of the bidiagonal system
            trace.breakdown = true;
            keep_trailing_beta = true;
            rec.rel_error = record_error();
            trace.iterations.push_back(rec);
            break;
        }
        alphas.push_back(uo.beta);
        captured_sq += uo.beta * uo.beta;
        ubasis.push_back(std::move(uo.v));
        rec.rel_error = record_error();
        trace.iterations.push_back(rec);
        trace.completed_iterations = j;
    }

    // Bidiagonal system over the kept entries: b[i][i] = alpha_i,
    // b[i][i+1] = beta_i. On a beta breakdown it is square; on an alpha
    // breakdown the last right vector survives as an extra column.
    const std::size_t t = alphas.size();
    const std::size_t vcount = keep_trailing_beta ? t + 1 : t;
    if (!keep_trailing_beta && vbasis.size() > t) vbasis.resize(t);
    DenseMatrix b(t, vcount);
    for (std::size_t i = 0; i < t; ++i) {
        b(i, i) = static_cast<float>(alphas[i]);
        if (i < betas.size() && i + 1 < vcount) b(i, i + 1) = static_cast<float>(betas[i]);
    }

    SvdResult bs = svd_oracle(b);
    trace.flops_small_svd = bs.flops;
    // singular values below the breakdown tolerance are converged-to-zero
    std::size_t significant = 0;
    while (significant < bs.s.size() && bs.s[significant] >= eps) ++significant;
    const std::size_t r = std::min(k, significant);
    trace.effective_rank = r;

    DenseMatrix uh(t, r);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t c = 0; c < r; ++c) uh(i, c) = bs.u(i, c);
    DenseMatrix vh(r, vcount);
    for (std::size_t c = 0; c < r; ++c)
        for (std::size_t i = 0; i < vcount; ++i) vh(c, i) = bs.v(c, i);

    DenseMatrix umat = columns_to_matrix(ubasis, n1);
    DenseMatrix vmat = rows_from_vectors(vbasis, n2);

    res.decomposition.u = matmul(umat, uh);
    res.decomposition.v = matmul(vh, vmat);
    res.decomposition.sigma = DenseMatrix(r, r);
    for (std::size_t i = 0; i < r; ++i)
        res.decomposition.sigma(i, i) = static_cast<float>(bs.s[i]);
    res.decomposition.sigma_diagonal = true;
    trace.flops_recombine = 2ull * n1 * t * r + 2ull * r * vcount * n2;
    return res;
}

double reconstruction_error(const DenseMatrix& a, const DecomposedMatrix& d) {
    if (d.n1() != a.rows() || d.n2() != a.cols()) {
        throw shape_error("reconstruction_error: decomposition shape does not match matrix");
    }
    double denom = frobenius_norm(a);
    if (denom == 0.0) return 0.0;
    DenseMatrix rec = reconstruct(d);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double diff = static_cast<double>(a(i, j)) - static_cast<double>(rec(i, j));
            acc += diff * diff;
        }
    }
    return std::sqrt(acc) / denom;
}

std::vector<ConvergenceRow> convergence_study(const DenseMatrix& a,
                                              std::vector<std::size_t> ranks,
                                              double eps, std::uint64_t seed) {
    std::sort(ranks.begin(), ranks.end());
    double use_eps = eps > 0.0 ? eps : default_breakdown_eps(a);
    SvdResult full = svd_oracle(a);
    double a_norm = frobenius_norm(a);

    std::vector<ConvergenceRow> rows;
    rows.reserve(ranks.size());
    for (std::size_t k : ranks) {
        LanczosResult lr = lanczos_svd(a, k, use_eps, seed);
        ConvergenceRow row;
        row.rank = k;
        row.lanczos_error = reconstruction_error(a, lr.decomposition);
        double tail = 0.0;
        for (std::size_t i = k; i < full.s.size(); ++i) tail += full.s[i] * full.s[i];
        row.oracle_error = a_norm == 0.0 ? 0.0 : std::sqrt(tail) / a_norm;
        row.flops_matvec = lr.trace.flops_matvec_total();
        row.flops_reorth_u = lr.trace.flops_reorth_u_total();
        row.flops_reorth_v = lr.trace.flops_reorth_v_total();
        row.flops_normalize = lr.trace.flops_normalize_total();
        row.flops_small_svd = lr.trace.flops_small_svd;
        row.flops_recombine = lr.trace.flops_recombine;
        row.flops_total = lr.trace.flops_total();
        rows.push_back(row);
    }
    return rows;
}

std::string convergence_to_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    os << "rank,lanczos_error,oracle_error,flops_matvec,flops_reorth_u,flops_reorth_v,"
          "flops_normalize,flops_small_svd,flops_recombine,flops_total\n";
    for (const auto& r : rows) {
        os << r.rank << ',' << format_real(r.lanczos_error) << ','
           << format_real(r.oracle_error) << ',' << r.flops_matvec << ','
           << r.flops_reorth_u << ',' << r.flops_reorth_v << ',' << r.flops_normalize
           << ',' << r.flops_small_svd << ',' << r.flops_recombine << ','
           << r.flops_total << '\n';
    }
    return os.str();
}

} // namespace dcom
