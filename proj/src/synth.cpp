#include "dcom/synth.hpp"

#include <algorithm>
#include <cmath>

#include "dcom/rng.hpp"

namespace dcom {

DenseMatrix random_orthonormal_columns(std::size_t n, std::size_t r, std::uint64_t seed) {
    if (r > n) throw parameter_error("random_orthonormal_columns: r exceeds n");
    Rng rng(seed);
    std::vector<std::vector<double>> cols(r, std::vector<double>(n));
    for (auto& c : cols)
        for (auto& x : c) x = rng.normal();
    for (std::size_t j = 0; j < r; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double d = 0.0;
                for (std::size_t i = 0; i < n; ++i) d += cols[j][i] * cols[p][i];
                for (std::size_t i = 0; i < n; ++i) cols[j][i] -= d * cols[p][i];
            }
        }
        double nrm = 0.0;
        for (double x : cols[j]) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw validation_error("random_orthonormal_columns: degenerate draw");
        for (double& x : cols[j]) x /= nrm;
    }
    DenseMatrix m(n, r);
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = static_cast<float>(cols[j][i]);
    return m;
}

DenseMatrix make_spectrum_matrix(std::size_t rows, std::size_t cols,
                                 const std::vector<double>& sigma, std::uint64_t seed) {
    const std::size_t mind = std::min(rows, cols);
    if (sigma.size() > mind) {
        throw parameter_error("make_spectrum_matrix: spectrum longer than min dimension");
    }
    const std::size_t r = sigma.size();
    DenseMatrix u = random_orthonormal_columns(rows, r, seed);
    DenseMatrix vt = random_orthonormal_columns(cols, r, seed + 0x9e3779b97f4a7c15ull);
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < r; ++t) {
                acc += sigma[t] * static_cast<double>(u(i, t)) *
                       static_cast<double>(vt(j, t));
            }
            m(i, j) = static_cast<float>(acc);
        }
    }
    return m;
}

std::vector<double> spectrum_pow2_decay(std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::pow(2.0, -static_cast<double>(i));
    return s;
}

std::vector<double> spectrum_flat(std::size_t n) {
    return std::vector<double>(n, 1.0);
}

std::vector<double> spectrum_planted_rank(std::size_t n, std::size_t rank) {
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < std::min(n, rank); ++i) {
        s[i] = std::pow(2.0, -static_cast<double>(i));
    }
    return s;
}

PlantedOutlierMatrix make_planted_outlier_matrix(std::size_t s, std::size_t h,
                                                 std::size_t outlier_channels,
                                                 double magnitude, std::uint64_t seed) {
    if (outlier_channels >= h) {
        throw parameter_error("make_planted_outlier_matrix: too many outlier channels");
    }
    // smooth decaying background plus mild elementwise noise
    std::size_t bg_rank = std::min<std::size_t>(std::min(s, h), 24);
    std::vector<double> sp(bg_rank);
    for (std::size_t i = 0; i < bg_rank; ++i) sp[i] = std::pow(2.0, -0.5 * static_cast<double>(i));
    PlantedOutlierMatrix out;
    out.x = make_spectrum_matrix(s, h, sp, seed);
    Rng rng(seed + 1);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < h; ++j)
            out.x(i, j) = static_cast<float>(out.x(i, j) + 0.01 * rng.normal());

    double unit = 0.0;
    for (float v : out.x.data()) unit = std::max(unit, std::abs(static_cast<double>(v)));

    Rng prng(seed + 2);
    for (std::size_t c = 0; c < outlier_channels; ++c) {
        std::size_t j = (c + 1) * h / (outlier_channels + 1);
        out.planted_idx.push_back(j);
        for (std::size_t i = 0; i < s; ++i) {
            double sign = prng.unit() < 0.5 ? -1.0 : 1.0;
            out.x(i, j) = static_cast<float>(sign * magnitude * unit * (0.8 + 0.4 * prng.unit()));
        }
    }
    std::sort(out.planted_idx.begin(), out.planted_idx.end());
    return out;
}

} // namespace dcom
