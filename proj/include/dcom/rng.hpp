#pragma once

#include <cstdint>
#include <random>

#include "dcom/matrix.hpp"

namespace dcom {

/// Seeded RNG with an explicit bit-to-real mapping so that a given seed
/// produces the same stream on every platform (std::uniform_real_distribution
/// is implementation-defined and would break golden files).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(static_cast<std::mt19937_64::result_type>(seed)) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [-1, 1).
    double uniform_pm1() { return 2.0 * unit() - 1.0; }

    /// Standard normal via Box-Muller; deterministic two-draws-per-pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit();
        double u2 = unit();
        // avoid log(0)
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline Vector random_uniform_vector(std::size_t len, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(len);
    for (std::size_t i = 0; i < len; ++i) v[i] = static_cast<float>(rng.uniform_pm1());
    return v;
}

inline DenseMatrix random_uniform_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = static_cast<float>(rng.uniform_pm1());
    return m;
}

} // namespace dcom
