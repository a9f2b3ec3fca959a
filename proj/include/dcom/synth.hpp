#pragma once

#include <cstdint>
#include <vector>

#include "dcom/matrix.hpp"

namespace dcom {

/// n x r with orthonormal columns (modified Gram-Schmidt over a seeded
/// Gaussian draw, done in 64-bit before rounding to storage precision).
DenseMatrix random_orthonormal_columns(std::size_t n, std::size_t r, std::uint64_t seed);

/// rows x cols matrix with the prescribed singular spectrum (length
/// min(rows, cols); trailing entries may be zero for planted-rank cases).
DenseMatrix make_spectrum_matrix(std::size_t rows, std::size_t cols,
                                 const std::vector<double>& sigma, std::uint64_t seed);

std::vector<double> spectrum_pow2_decay(std::size_t n);
std::vector<double> spectrum_flat(std::size_t n);
/// 2^-i decay for the leading `rank` values, exact zeros beyond.
std::vector<double> spectrum_planted_rank(std::size_t n, std::size_t rank);

struct PlantedOutlierMatrix {
    DenseMatrix x;
    std::vector<std::size_t> planted_idx; // strictly increasing channel ids
};

/// Low-rank-plus-noise background with `outlier_channels` evenly spread
/// channels overwritten by large-magnitude values (magnitude times the
/// background unit scale). The shape the channel-extraction path is designed
/// for.
PlantedOutlierMatrix make_planted_outlier_matrix(std::size_t s, std::size_t h,
                                                 std::size_t outlier_channels,
                                                 double magnitude, std::uint64_t seed);

} // namespace dcom
