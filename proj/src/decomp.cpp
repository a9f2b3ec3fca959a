#include "dcom/decomp.hpp"

#include <cmath>
#include <string>

namespace dcom {

namespace {

constexpr std::uint64_t kBytesPerElem = 2; // FP16 hardware intent

DenseMatrix tracked_matmul(const DenseMatrix& a, const DenseMatrix& b, OpStats* stats) {
    if (stats) stats->on_product(a.rows(), a.cols(), b.cols());
    return matmul(a, b);
}

void check_inner(std::size_t lhs_cols, std::size_t rhs_rows, const char* what) {
    if (lhs_cols != rhs_rows) {
        throw shape_error(std::string(what) + ": inner dimensions " +
                          std::to_string(lhs_cols) + " and " + std::to_string(rhs_rows) +
                          " do not match");
    }
}

} // namespace

void BatchActivations::validate() const {
    if (prompts.size() != batch) {
        throw shape_error("batch: prompt list length does not match batch count");
    }
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (prompts[i].rows() != seq_len || prompts[i].cols() != hidden) {
            throw shape_error("batch: prompt " + std::to_string(i) +
                              " shape differs from (seq_len, hidden)");
        }
    }
}

DecomposedBatch decompose_batch(const BatchActivations& x, std::size_t k, double eps,
                                std::uint64_t seed) {
    x.validate();
    if (k > std::min(x.seq_len, x.hidden)) {
        throw parameter_error("decompose_batch: rank exceeds min(seq_len, hidden)");
    }
    DecomposedBatch out;
    out.prompts.reserve(x.prompts.size());
    for (std::size_t i = 0; i < x.prompts.size(); ++i) {
        try {
            out.prompts.push_back(
                lanczos_svd(x.prompts[i], k, eps, seed + i).decomposition);
        } catch (const error& e) {
            throw error(e.kind(), "prompt " + std::to_string(i) + ": " + e.what());
        }
    }
    out.r1 = k;
    out.r2 = k;
    return out;
}

DenseMatrix matmul_input_decomposed(const DecomposedMatrix& d, const DenseMatrix& w,
                                    OpStats* stats) {
    check_inner(d.v.cols(), w.rows(), "matmul_input_decomposed");
    DenseMatrix t1 = tracked_matmul(d.v, w, stats);      // r2 x w_cols
    DenseMatrix t2 = tracked_matmul(d.sigma, t1, stats); // r1 x w_cols
    return tracked_matmul(d.u, t2, stats);               // n1 x w_cols
}

DecomposedMatrix matmul_preserved_input(const DecomposedMatrix& d, const DenseMatrix& w,
                                        OpStats* stats) {
    check_inner(d.v.cols(), w.rows(), "matmul_preserved_input");
    DecomposedMatrix out;
    out.u = d.u;
    out.sigma = d.sigma;
    out.sigma_diagonal = d.sigma_diagonal;
    out.v = tracked_matmul(d.v, w, stats); // the only full-width product
    return out;
}

DenseMatrix matmul_input_weight_decomposed(const DecomposedMatrix& dx,
                                           const DecomposedMatrix& dw,
                                           OpStats* stats) {
    check_inner(dx.v.cols(), dw.u.rows(), "matmul_input_weight_decomposed");
    DenseMatrix t1 = tracked_matmul(dx.v, dw.u, stats);     // r2 x p1
    DenseMatrix t2 = tracked_matmul(t1, dw.sigma, stats);   // r2 x p2
    DenseMatrix t3 = tracked_matmul(dx.sigma, t2, stats);   // r1 x p2
    DenseMatrix t4 = tracked_matmul(t3, dw.v, stats);       // r1 x w_cols
    return tracked_matmul(dx.u, t4, stats);                 // n1 x w_cols
}

DecomposedMatrix matmul_preserved_input_weight(const DecomposedMatrix& dx,
                                               const DecomposedMatrix& dw,
                                               OpStats* stats) {
    check_inner(dx.v.cols(), dw.u.rows(), "matmul_preserved_input_weight");
    DenseMatrix t1 = tracked_matmul(dx.v, dw.u, stats);   // r2 x p1
    DenseMatrix t2 = tracked_matmul(t1, dw.sigma, stats); // r2 x p2
    DecomposedMatrix out;
    out.u = dx.u;
    out.sigma = tracked_matmul(dx.sigma, t2, stats); // r1 x p2, dense core
    out.sigma_diagonal = false;
    out.v = dw.v;
    return out;
}

double breakeven_rank(std::uint64_t d, std::uint64_t w) {
    double dd = static_cast<double>(d), ww = static_cast<double>(w);
    double sum = dd + ww;
    return (std::sqrt(sum * sum + 4.0 * dd * ww) - sum) / 2.0;
}

CostReport cost_report(const CostDims& dims, const CostRanks& ranks, Scheme scheme,
                       bool preserved) {
    const std::uint64_t B = dims.batch, S = dims.seq_len, H = dims.hidden,
                        W = dims.w_cols;
    const std::uint64_t r1 = ranks.r1, r2 = ranks.r2;
    if (B == 0 || S == 0 || H == 0 || W == 0) {
        throw parameter_error("cost_report: dims must be positive");
    }
    if (r1 == 0 || r2 == 0 || r1 > S || r2 > H) {
        throw parameter_error("cost_report: input ranks must be positive and within dims");
    }
    std::uint64_t p1 = 0, p2 = 0;
    if (scheme == Scheme::input_weight) {
        if (!ranks.p1 || !ranks.p2) {
            throw parameter_error("cost_report: weight ranks required for the input+weight scheme");
        }
        p1 = *ranks.p1;
        p2 = *ranks.p2;
        if (p1 == 0 || p2 == 0 || p1 > H || p2 > W) {
            throw parameter_error("cost_report: weight ranks must be positive and within dims");
        }
    }

    CostReport rep;
    const double dense_mults = static_cast<double>(S) * H * W;
    const std::uint64_t factored_input_elems = S * r1 + r1 * r2 + r2 * H;

    if (scheme == Scheme::input_only) {
        const std::uint64_t chain = preserved
            ? r2 * H * W
            : r2 * H * W + r1 * r2 * W + S * r1 * W;
        rep.flops = 2ull * B * chain;
        rep.compute_reduction_ratio_paper =
            (static_cast<double>(S) * H * W) / (static_cast<double>(r2) * H * W);
        rep.compute_reduction_ratio_true = dense_mults / static_cast<double>(chain);
        rep.weight_bytes = H * W * kBytesPerElem;
        rep.weight_compression_ratio = 1.0;
        rep.output_bytes = preserved
            ? B * (S * r1 + r1 * r2 + r2 * W) * kBytesPerElem
            : B * S * W * kBytesPerElem;
    } else {
        const std::uint64_t core = r2 * H * p1 + r2 * p1 * p2 + r1 * r2 * p2;
        const std::uint64_t chain = preserved ? core : core + r1 * p2 * W + S * r1 * W;
        rep.flops = 2ull * B * chain;
        rep.compute_reduction_ratio_paper = dense_mults / static_cast<double>(core);
        rep.compute_reduction_ratio_true = dense_mults / static_cast<double>(chain);
        rep.weight_bytes = (H * p1 + p1 * p2 + p2 * W) * kBytesPerElem;
        rep.weight_compression_ratio =
            (static_cast<double>(H) * W) /
            static_cast<double>(H * p1 + p1 * p2 + p2 * W);
        rep.output_bytes = preserved
            ? B * (S * r1 + r1 * p2 + p2 * W) * kBytesPerElem
            : B * S * W * kBytesPerElem;
    }

    rep.input_bytes = B * factored_input_elems * kBytesPerElem;
    rep.input_compression_ratio =
        (static_cast<double>(S) * H) / static_cast<double>(factored_input_elems);
    rep.breakeven_rank = breakeven_rank(H, W);
    return rep;
}

void to_json(nlohmann::json& j, const CostReport& r) {
    j = nlohmann::json{
        {"flops", r.flops},
        {"input_bytes", r.input_bytes},
        {"weight_bytes", r.weight_bytes},
        {"output_bytes", r.output_bytes},
        {"compute_reduction_ratio_paper", r.compute_reduction_ratio_paper},
        {"compute_reduction_ratio_true", r.compute_reduction_ratio_true},
        {"input_compression_ratio", r.input_compression_ratio},
        {"weight_compression_ratio", r.weight_compression_ratio},
        {"breakeven_rank", r.breakeven_rank},
    };
}

void from_json(const nlohmann::json& j, CostReport& r) {
    j.at("flops").get_to(r.flops);
    j.at("input_bytes").get_to(r.input_bytes);
    j.at("weight_bytes").get_to(r.weight_bytes);
    j.at("output_bytes").get_to(r.output_bytes);
    j.at("compute_reduction_ratio_paper").get_to(r.compute_reduction_ratio_paper);
    j.at("compute_reduction_ratio_true").get_to(r.compute_reduction_ratio_true);
    j.at("input_compression_ratio").get_to(r.input_compression_ratio);
    j.at("weight_compression_ratio").get_to(r.weight_compression_ratio);
    j.at("breakeven_rank").get_to(r.breakeven_rank);
}

} // namespace dcom
