#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dcom/decomp.hpp"
#include "dcom/lanczos.hpp"
#include "dcom/matrix.hpp"

#include "json.hpp"

namespace dcom {

struct ThresholdEntry {
    int layer = 0;
    double threshold = 0.0;      // absolute-value threshold T
    double count_fraction = 0.0; // c: fraction of tokens that must exceed T
};

struct ThresholdTable {
    std::vector<ThresholdEntry> entries;

    const ThresholdEntry* find(int layer) const;
    void validate() const; // unique layers, T > 0, c in (0,1)
};

void to_json(nlohmann::json& j, const ThresholdTable& t);
void from_json(const nlohmann::json& j, ThresholdTable& t);

/// Split of an activation matrix into flagged outlier columns (kept exactly)
/// and the compacted residual. Channel j is flagged when at least c * S of
/// its entries exceed T in magnitude.
struct ChannelSplit {
    DenseMatrix residual;     // S x (H - m), flagged columns removed
    DenseMatrix outlier_cols; // S x m, original values
    std::vector<std::size_t> outlier_idx; // strictly increasing, < H
    std::size_t hidden = 0;   // original H
};

ChannelSplit extract_outlier_channels(const DenseMatrix& x, double t, double c);

/// Residual kept factored, outlier columns carried exactly on the side.
struct MultiTrackDecomposition {
    DecomposedMatrix residual;
    DenseMatrix outlier_cols;
    std::vector<std::size_t> outlier_idx;
    std::size_t hidden = 0;

    std::size_t extracted_channels() const { return outlier_idx.size(); }
    double extraction_fraction() const {
        return hidden == 0 ? 0.0
                           : static_cast<double>(outlier_idx.size()) /
                                 static_cast<double>(hidden);
    }
};

/// Per-layer offline calibration: bisects the value threshold T (with the
/// channel-count fraction c fixed) until channel extraction over the
/// calibration samples selects at most, and as close as possible to,
/// target_fraction of channels.
ThresholdTable calibrate_thresholds(
    const std::map<int, std::vector<BatchActivations>>& samples,
    double target_fraction, double count_fraction = 0.01);

MultiTrackDecomposition multitrack_decompose(const DenseMatrix& x, std::size_t k,
                                             double t, double c, double eps,
                                             std::uint64_t seed);

/// Puts the factored residual and the exact outlier columns back into their
/// original channel positions; outlier columns are restored bit-exactly.
DenseMatrix reconstruct(const MultiTrackDecomposition& mt);

/// Residual path times the matching row subset of w plus the exact outlier
/// path; equals reconstruct(mt) * w.
DenseMatrix multitrack_matmul(const MultiTrackDecomposition& mt, const DenseMatrix& w,
                              OpStats* stats = nullptr);

} // namespace dcom
