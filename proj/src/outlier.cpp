#include "dcom/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace dcom {

const ThresholdEntry* ThresholdTable::find(int layer) const {
    for (const auto& e : entries) {
        if (e.layer == layer) return &e;
    }
    return nullptr;
}

void ThresholdTable::validate() const {
    std::set<int> seen;
    for (const auto& e : entries) {
        if (!(e.threshold > 0.0)) throw validation_error("threshold table: T must be > 0");
        if (!(e.count_fraction > 0.0 && e.count_fraction < 1.0)) {
            throw validation_error("threshold table: count fraction must be in (0,1)");
        }
        if (!seen.insert(e.layer).second) {
            throw validation_error("threshold table: duplicate layer " +
                                   std::to_string(e.layer));
        }
    }
}

void to_json(nlohmann::json& j, const ThresholdTable& t) {
    j = nlohmann::json::array();
    for (const auto& e : t.entries) {
        j.push_back({{"layer", e.layer},
                     {"threshold", e.threshold},
                     {"count_fraction", e.count_fraction}});
    }
}

void from_json(const nlohmann::json& j, ThresholdTable& t) {
    t.entries.clear();
    for (const auto& item : j) {
        ThresholdEntry e;
        item.at("layer").get_to(e.layer);
        item.at("threshold").get_to(e.threshold);
        item.at("count_fraction").get_to(e.count_fraction);
        t.entries.push_back(e);
    }
    t.validate();
}

namespace {

std::vector<bool> flag_channels(const DenseMatrix& x, double t, double c) {
    const std::size_t s = x.rows(), h = x.cols();
    const double need = c * static_cast<double>(s);
    std::vector<std::size_t> counts(h, 0);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            if (std::abs(static_cast<double>(x(i, j))) > t) ++counts[j];
        }
    }
    std::vector<bool> flagged(h, false);
    for (std::size_t j = 0; j < h; ++j) {
        flagged[j] = static_cast<double>(counts[j]) >= need;
    }
    return flagged;
}

// fraction of channels a threshold selects over a set of prompts (a channel
// counts once if flagged in any prompt)
double selected_fraction(const std::vector<const DenseMatrix*>& prompts, double t,
                         double c) {
    if (prompts.empty()) return 0.0;
    const std::size_t h = prompts.front()->cols();
    std::vector<bool> any(h, false);
    for (const DenseMatrix* p : prompts) {
        std::vector<bool> f = flag_channels(*p, t, c);
        for (std::size_t j = 0; j < h; ++j) any[j] = any[j] || f[j];
    }
    std::size_t m = 0;
    for (bool b : any) m += b ? 1 : 0;
    return static_cast<double>(m) / static_cast<double>(h);
}

} // namespace

ChannelSplit extract_outlier_channels(const DenseMatrix& x, double t, double c) {
    if (!(t > 0.0)) throw parameter_error("extract_outlier_channels: T must be > 0");
    if (!(c > 0.0 && c < 1.0)) {
        throw parameter_error("extract_outlier_channels: c must be in (0,1)");
    }
    const std::size_t s = x.rows(), h = x.cols();
    std::vector<bool> flagged = flag_channels(x, t, c);

    ChannelSplit out;
    out.hidden = h;
    for (std::size_t j = 0; j < h; ++j) {
        if (flagged[j]) out.outlier_idx.push_back(j);
    }
    const std::size_t m = out.outlier_idx.size();
    out.outlier_cols = DenseMatrix(s, m);
    out.residual = DenseMatrix(s, h - m);
    std::size_t oc = 0, rc = 0;
    for (std::size_t j = 0; j < h; ++j) {
        if (flagged[j]) {
            for (std::size_t i = 0; i < s; ++i) out.outlier_cols(i, oc) = x(i, j);
            ++oc;
        } else {
            for (std::size_t i = 0; i < s; ++i) out.residual(i, rc) = x(i, j);
            ++rc;
        }
    }
    return out;
}

ThresholdTable calibrate_thresholds(
    const std::map<int, std::vector<BatchActivations>>& samples,
    double target_fraction, double count_fraction) {
    if (!(target_fraction > 0.0 && target_fraction <= 0.1)) {
        throw parameter_error("calibrate_thresholds: target fraction must be in (0, 0.1]");
    }
    if (samples.empty()) throw calibration_error("calibrate_thresholds: no layers given");

    ThresholdTable table;
    for (const auto& [layer, batches] : samples) {
        std::vector<const DenseMatrix*> prompts;
        for (const auto& b : batches) {
            b.validate();
            for (const auto& p : b.prompts) prompts.push_back(&p);
        }
        if (prompts.empty()) {
            throw calibration_error("calibrate_thresholds: layer " +
                                    std::to_string(layer) + " has no samples");
        }
        double max_abs = 0.0;
        for (const DenseMatrix* p : prompts) {
            for (float v : p->data()) max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
        }
        if (max_abs == 0.0) {
            throw calibration_error("calibrate_thresholds: layer " +
                                    std::to_string(layer) + " is identically zero");
        }
        // selected_fraction is non-increasing in T; keep hi on the feasible
        // (<= target) side and converge on the lowest such threshold
        double lo = 0.0, hi = max_abs;
        for (int it = 0; it < 64; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (selected_fraction(prompts, mid, count_fraction) <= target_fraction) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        table.entries.push_back(ThresholdEntry{layer, hi, count_fraction});
    }
    table.validate();
    return table;
}

MultiTrackDecomposition multitrack_decompose(const DenseMatrix& x, std::size_t k,
                                             double t, double c, double eps,
                                             std::uint64_t seed) {
    ChannelSplit split = extract_outlier_channels(x, t, c);
    const std::size_t res_cols = split.residual.cols();
    if (k > std::min(x.rows(), res_cols)) {
        throw parameter_error("multitrack_decompose: rank exceeds residual dimensions");
    }
    MultiTrackDecomposition mt;
    mt.outlier_cols = std::move(split.outlier_cols);
    mt.outlier_idx = std::move(split.outlier_idx);
    mt.hidden = split.hidden;
    mt.residual = lanczos_svd(split.residual, k, eps, seed).decomposition;
    return mt;
}

DenseMatrix reconstruct(const MultiTrackDecomposition& mt) {
    const std::size_t s = mt.residual.n1();
    DenseMatrix out(s, mt.hidden);
    DenseMatrix res = reconstruct(mt.residual);
    std::vector<bool> is_outlier(mt.hidden, false);
    for (std::size_t idx : mt.outlier_idx) is_outlier[idx] = true;
    std::size_t oc = 0, rc = 0;
    for (std::size_t j = 0; j < mt.hidden; ++j) {
        if (is_outlier[j]) {
            for (std::size_t i = 0; i < s; ++i) out(i, j) = mt.outlier_cols(i, oc);
            ++oc;
        } else {
            for (std::size_t i = 0; i < s; ++i) out(i, j) = res(i, rc);
            ++rc;
        }
    }
    return out;
}

DenseMatrix multitrack_matmul(const MultiTrackDecomposition& mt, const DenseMatrix& w,
                              OpStats* stats) {
    if (mt.hidden != w.rows()) {
        throw shape_error("multitrack_matmul: hidden dim does not match weight rows");
    }
    const std::size_t s = mt.residual.n1();
    const std::size_t m = mt.outlier_idx.size();
    std::vector<bool> is_outlier(mt.hidden, false);
    for (std::size_t idx : mt.outlier_idx) is_outlier[idx] = true;

    // row subsets of w for the two tracks
    DenseMatrix w_res(mt.hidden - m, w.cols());
    DenseMatrix w_out(m, w.cols());
    std::size_t oc = 0, rc = 0;
    for (std::size_t j = 0; j < mt.hidden; ++j) {
        if (is_outlier[j]) {
            for (std::size_t q = 0; q < w.cols(); ++q) w_out(oc, q) = w(j, q);
            ++oc;
        } else {
            for (std::size_t q = 0; q < w.cols(); ++q) w_res(rc, q) = w(j, q);
            ++rc;
        }
    }
    if (stats) {
        stats->on_alloc(w_res.rows(), w_res.cols());
        stats->on_alloc(w_out.rows(), w_out.cols());
    }

    DenseMatrix acc = matmul_input_decomposed(mt.residual, w_res, stats);
    if (m > 0) {
        DenseMatrix side = stats ? (stats->on_product(s, m, w.cols()), matmul(mt.outlier_cols, w_out))
                                 : matmul(mt.outlier_cols, w_out);
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t q = 0; q < w.cols(); ++q) {
                acc(i, q) = static_cast<float>(static_cast<double>(acc(i, q)) +
                                               static_cast<double>(side(i, q)));
            }
        }
    }
    return acc;
}

} // namespace dcom
