#include "dcom/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dcom/io.hpp"
#include "dcom/lanczos.hpp"
#include "dcom/outlier.hpp"
#include "dcom/synth.hpp"

namespace dcom {

namespace {

constexpr std::uint64_t kBytesPerElem = 2;
constexpr std::uint64_t kIndexBytes = 4;
const char* kProvenance = "calibrated-model-defaults-v1";

} // namespace

void ModelPlan::validate() const {
    if (num_layers == 0 || seq_len == 0 || hidden == 0 || batch == 0) {
        throw validation_error("model plan: dims must be positive");
    }
    if (layer_matmuls.empty()) throw validation_error("model plan: empty matmul inventory");
    for (const auto& m : layer_matmuls) {
        if (m.in_dim == 0 || m.out_dim == 0) {
            throw validation_error("model plan: product " + m.name + " has zero dims");
        }
        if (m.decomposable && m.in_dim != hidden) {
            throw validation_error("model plan: decomposable product " + m.name +
                                   " must consume the hidden-width stream");
        }
    }
}

ModelPlan ModelPlan::llama2_7b_like(std::uint64_t batch) {
    ModelPlan p;
    p.num_layers = 32;
    p.seq_len = 4096;
    p.hidden = 4096;
    p.batch = batch;
    const std::uint64_t h = p.hidden, inter = 11008;
    p.layer_matmuls = {
        {"q_proj", "x", h, h, true},
        {"k_proj", "x", h, h, true},
        {"v_proj", "x", h, h, true},
        {"o_proj", "attn", h, h, true},
        {"gate_proj", "mlp_in", h, inter, true},
        {"up_proj", "mlp_in", h, inter, true},
        {"down_proj", "mlp_mid", inter, h, false},
    };
    return p;
}

void to_json(nlohmann::json& j, const ModelPlan& m) {
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& s : m.layer_matmuls) {
        mats.push_back({{"name", s.name},
                        {"input_tensor", s.input_tensor},
                        {"in_dim", s.in_dim},
                        {"out_dim", s.out_dim},
                        {"decomposable", s.decomposable}});
    }
    j = nlohmann::json{{"num_layers", m.num_layers},
                       {"seq_len", m.seq_len},
                       {"hidden", m.hidden},
                       {"batch", m.batch},
                       {"layer_matmuls", mats}};
}

void from_json(const nlohmann::json& j, ModelPlan& m) {
    m = ModelPlan{};
    j.at("num_layers").get_to(m.num_layers);
    j.at("seq_len").get_to(m.seq_len);
    j.at("hidden").get_to(m.hidden);
    j.at("batch").get_to(m.batch);
    if (j.contains("layer_matmuls")) {
        for (const auto& item : j.at("layer_matmuls")) {
            MatmulSpec s;
            item.at("name").get_to(s.name);
            item.at("input_tensor").get_to(s.input_tensor);
            item.at("in_dim").get_to(s.in_dim);
            item.at("out_dim").get_to(s.out_dim);
            item.at("decomposable").get_to(s.decomposable);
            m.layer_matmuls.push_back(s);
        }
    } else {
        m.layer_matmuls = ModelPlan::llama2_7b_like(m.batch).layer_matmuls;
    }
    m.validate();
}

void DecompPlan::validate(const ModelPlan& model) const {
    std::set<std::uint64_t> seen;
    std::vector<std::uint64_t> bad;
    for (std::uint64_t id : decomposed_layer_ids) {
        if (id >= model.num_layers || !seen.insert(id).second) bad.push_back(id);
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "decomposition plan: invalid layer ids:";
        for (auto id : bad) os << ' ' << id;
        throw validation_error(os.str());
    }
    if (!std::is_sorted(decomposed_layer_ids.begin(), decomposed_layer_ids.end())) {
        throw validation_error("decomposition plan: layer ids must be sorted");
    }
    if (rank == 0 || rank > std::min(model.seq_len, model.hidden)) {
        throw validation_error("decomposition plan: rank out of range");
    }
    if (outlier.enabled &&
        !(outlier.target_fraction > 0.0 && outlier.target_fraction <= 0.1)) {
        throw validation_error("decomposition plan: outlier fraction must be in (0, 0.1]");
    }
}

void to_json(nlohmann::json& j, const DecompPlan& p) {
    j = nlohmann::json{
        {"decomposed_layer_ids", p.decomposed_layer_ids},
        {"rank", p.rank},
        {"scheme", p.scheme == Scheme::input_only ? "input-only" : "input+weight"},
        {"preserved", p.preserved},
        {"outlier",
         {{"enabled", p.outlier.enabled}, {"target_fraction", p.outlier.target_fraction}}},
    };
}

void from_json(const nlohmann::json& j, DecompPlan& p) {
    p = DecompPlan{};
    j.at("decomposed_layer_ids").get_to(p.decomposed_layer_ids);
    j.at("rank").get_to(p.rank);
    std::string scheme = j.value("scheme", "input-only");
    if (scheme == "input-only") {
        p.scheme = Scheme::input_only;
    } else if (scheme == "input+weight") {
        p.scheme = Scheme::input_weight;
    } else {
        throw validation_error("decomposition plan: unknown scheme '" + scheme + "'");
    }
    p.preserved = j.value("preserved", true);
    if (j.contains("outlier")) {
        p.outlier.enabled = j.at("outlier").value("enabled", false);
        p.outlier.target_fraction = j.at("outlier").value("target_fraction", 0.03);
    }
}

std::vector<std::uint64_t> canonical_layer_set(std::size_t count) {
    switch (count) {
        case 4: return {10, 15, 20, 25};
        case 6: return {6, 10, 14, 18, 22, 26};
        case 8: return {7, 10, 13, 16, 19, 22, 25, 28};
        case 10: return {9, 10, 13, 14, 17, 18, 21, 22, 26, 27};
        default:
            throw parameter_error("canonical_layer_set: supported sizes are 4, 6, 8, 10");
    }
}

std::uint64_t optimal_expansion_factor(std::uint64_t s, std::uint64_t h,
                                       std::uint64_t k, const HardwareConfig& hw) {
    std::uint64_t best_f = 1;
    double best = -1.0;
    for (std::uint64_t f = 1; f <= 32; f <<= 1) {
        if (f > std::min(s, h) || f > hw.total_macs()) break;
        double t = simulate_lanczos(s, h, k, f, hw).cycles_total;
        if (best < 0.0 || t < best) {
            best = t;
            best_f = f;
        }
    }
    return best_f;
}

namespace {

struct TensorShape {
    std::string name;
    std::uint64_t rows, cols;
    bool factorable; // becomes rank-sized when its producer keeps the form
};

// distinct activation tensors of one layer: the layer input plus every
// product output (shared inputs counted once)
std::vector<TensorShape> layer_tensors(const ModelPlan& model) {
    std::vector<TensorShape> ts;
    ts.push_back({"x", model.seq_len, model.hidden, true});
    ts.push_back({"attn", model.seq_len, model.hidden, true});
    ts.push_back({"mlp_in", model.seq_len, model.hidden, true});
    for (const auto& m : model.layer_matmuls) {
        ts.push_back({m.name + "_out", model.seq_len, m.out_dim, m.decomposable});
    }
    return ts;
}

std::uint64_t factored_bytes(std::uint64_t s, std::uint64_t n, std::uint64_t r) {
    return (s * r + r * r + r * n) * kBytesPerElem;
}

std::size_t decomposition_points(const ModelPlan& model) {
    std::set<std::string> inputs;
    for (const auto& m : model.layer_matmuls) {
        if (m.decomposable) inputs.insert(m.input_tensor);
    }
    return inputs.size();
}

} // namespace

ExperimentReport estimate_plan(const ModelPlan& model, const DecompPlan& plan,
                               const HardwareConfig& hw, const BaselineConfig& baseline) {
    model.validate();
    hw.validate();
    plan.validate(model);

    ExperimentReport rep;
    rep.constants_provenance = kProvenance;
    {
        nlohmann::json echo;
        to_json(echo["model"], model);
        to_json(echo["plan"], plan);
        to_json(echo["hw"], hw);
        to_json(echo["baseline"], baseline);
        rep.config_echo = echo;
    }

    const std::uint64_t S = model.seq_len, H = model.hidden, B = model.batch,
                        k = plan.rank;
    rep.expansion_factor = optimal_expansion_factor(S, H, k, hw);
    const double decomp_prompt_seconds =
        simulate_lanczos(S, H, k, rep.expansion_factor, hw).seconds_total;
    const double decomp_gpu_prompt_seconds =
        baseline_model(S, H, k, baseline).report.seconds_total;

    const std::size_t points = decomposition_points(model);
    std::set<std::uint64_t> decomposed(plan.decomposed_layer_ids.begin(),
                                       plan.decomposed_layer_ids.end());
    const std::uint64_t outlier_m = plan.outlier.enabled
        ? static_cast<std::uint64_t>(std::llround(plan.outlier.target_fraction *
                                                  static_cast<double>(H)))
        : 0;

    double prev_layer_gemm_seconds = 0.0;
    for (std::uint64_t layer = 0; layer < model.num_layers; ++layer) {
        LayerEstimate le;
        le.layer = layer;
        le.decomposed = decomposed.count(layer) > 0;
        const bool entry = le.decomposed && (layer == 0 || !decomposed.count(layer - 1));

        for (const auto& m : model.layer_matmuls) {
            const double flops_dense = 2.0 * static_cast<double>(B) * S * m.in_dim * m.out_dim;
            const double bytes_dense =
                static_cast<double>(B * S * m.in_dim + m.in_dim * m.out_dim +
                                    B * S * m.out_dim) *
                kBytesPerElem;
            const double t_dense = roofline_seconds(flops_dense, bytes_dense, baseline);
            le.gemm_seconds_dense += t_dense;
            le.weight_bytes_dense += m.in_dim * m.out_dim * kBytesPerElem;

            if (le.decomposed && m.decomposable) {
                CostDims dims{B, S, m.in_dim, m.out_dim};
                CostRanks ranks;
                ranks.r1 = k;
                ranks.r2 = k;
                if (plan.scheme == Scheme::input_weight) {
                    ranks.p1 = k;
                    ranks.p2 = k;
                }
                CostReport cr = cost_report(dims, ranks, plan.scheme, plan.preserved);
                le.cost.flops += cr.flops;
                le.cost.input_bytes += cr.input_bytes;
                le.cost.weight_bytes += cr.weight_bytes;
                le.cost.output_bytes += cr.output_bytes;
                le.weight_bytes_actual += cr.weight_bytes;
                const double bytes_fact =
                    static_cast<double>(cr.input_bytes + cr.weight_bytes + cr.output_bytes);
                le.gemm_seconds_actual +=
                    roofline_seconds(static_cast<double>(cr.flops), bytes_fact, baseline);
            } else {
                le.cost.flops += static_cast<std::uint64_t>(flops_dense);
                le.gemm_seconds_actual += t_dense;
                le.weight_bytes_actual += m.in_dim * m.out_dim * kBytesPerElem;
            }
        }

        // activation footprint over the layer's distinct tensors
        for (const auto& t : layer_tensors(model)) {
            const std::uint64_t dense = B * t.rows * t.cols * kBytesPerElem;
            le.activation_bytes_dense += dense;
            const bool factored = le.decomposed && t.factorable &&
                                  (plan.preserved || t.name == "x" || t.name == "attn" ||
                                   t.name == "mlp_in");
            if (factored) {
                std::uint64_t bytes = B * factored_bytes(t.rows, t.cols, k);
                if (outlier_m > 0 && t.cols == H) {
                    bytes += B * (t.rows * outlier_m * kBytesPerElem + outlier_m * kIndexBytes);
                }
                le.activation_bytes_actual += bytes;
            } else {
                le.activation_bytes_actual += dense;
            }
        }

        if (le.decomposed) {
            le.decomposition_events = plan.preserved ? (entry ? 1 : 0) : points;
            le.redecomposition_events =
                plan.preserved ? 0 : le.decomposition_events - (entry ? 1 : 0);
            le.decomp_accel_seconds =
                static_cast<double>(le.decomposition_events) * B * decomp_prompt_seconds;
            // the array works ahead while the previous layer's products run
            le.decomp_exposed_seconds =
                std::max(0.0, le.decomp_accel_seconds - prev_layer_gemm_seconds);
        }

        prev_layer_gemm_seconds = le.gemm_seconds_actual;
        rep.layers.push_back(le);
    }

    for (const auto& le : rep.layers) {
        rep.total_flops += le.cost.flops;
        rep.activation_bytes_dense += le.activation_bytes_dense;
        rep.activation_bytes_actual += le.activation_bytes_actual;
        rep.weight_bytes_dense += le.weight_bytes_dense;
        rep.weight_bytes_actual += le.weight_bytes_actual;
        rep.decomposition_events += le.decomposition_events;
        rep.redecomposition_events += le.redecomposition_events;
        rep.baseline_runtime_seconds += le.gemm_seconds_dense;
        rep.total_runtime_seconds += le.gemm_seconds_actual + le.decomp_exposed_seconds;
        rep.decomp_accel_seconds += le.decomp_accel_seconds;
        rep.decomp_gpu_seconds += static_cast<double>(le.decomposition_events) * B *
                                  decomp_gpu_prompt_seconds;
    }
    rep.memory_reduction_pct =
        100.0 *
        (1.0 - static_cast<double>(rep.activation_bytes_actual) /
                   static_cast<double>(rep.activation_bytes_dense));
    rep.weight_memory_reduction_pct =
        100.0 * (1.0 - static_cast<double>(rep.weight_bytes_actual) /
                           static_cast<double>(rep.weight_bytes_dense));
    rep.runtime_reduction_pct =
        100.0 * (1.0 - rep.total_runtime_seconds / rep.baseline_runtime_seconds);
    return rep;
}

void to_json(nlohmann::json& j, const ExperimentReport& r) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& le : r.layers) {
        nlohmann::json cost;
        to_json(cost, le.cost);
        layers.push_back({{"layer", le.layer},
                          {"decomposed", le.decomposed},
                          {"cost", cost},
                          {"gemm_seconds_dense", le.gemm_seconds_dense},
                          {"gemm_seconds_actual", le.gemm_seconds_actual},
                          {"decomp_accel_seconds", le.decomp_accel_seconds},
                          {"decomp_exposed_seconds", le.decomp_exposed_seconds},
                          {"activation_bytes_dense", le.activation_bytes_dense},
                          {"activation_bytes_actual", le.activation_bytes_actual},
                          {"weight_bytes_dense", le.weight_bytes_dense},
                          {"weight_bytes_actual", le.weight_bytes_actual},
                          {"decomposition_events", le.decomposition_events},
                          {"redecomposition_events", le.redecomposition_events}});
    }
    j = nlohmann::json{{"layers", layers},
                       {"total_flops", r.total_flops},
                       {"activation_bytes_dense", r.activation_bytes_dense},
                       {"activation_bytes_actual", r.activation_bytes_actual},
                       {"weight_bytes_dense", r.weight_bytes_dense},
                       {"weight_bytes_actual", r.weight_bytes_actual},
                       {"decomposition_events", r.decomposition_events},
                       {"redecomposition_events", r.redecomposition_events},
                       {"memory_reduction_pct", r.memory_reduction_pct},
                       {"weight_memory_reduction_pct", r.weight_memory_reduction_pct},
                       {"baseline_runtime_seconds", r.baseline_runtime_seconds},
                       {"total_runtime_seconds", r.total_runtime_seconds},
                       {"runtime_reduction_pct", r.runtime_reduction_pct},
                       {"decomp_accel_seconds", r.decomp_accel_seconds},
                       {"decomp_gpu_seconds", r.decomp_gpu_seconds},
                       {"expansion_factor", r.expansion_factor},
                       {"quality", r.quality},
                       {"constants_provenance", r.constants_provenance},
                       {"config_echo", r.config_echo}};
}

SweepVary parse_sweep_vary(const std::string& name) {
    if (name == "rank") return SweepVary::rank;
    if (name == "f") return SweepVary::expansion_factor;
    if (name == "layers") return SweepVary::layers;
    if (name == "outlier") return SweepVary::outlier_fraction;
    throw parameter_error("sweep: unknown vary key '" + name +
                          "' (expected rank|f|layers|outlier)");
}

namespace {

std::string plan_sweep_row_header() {
    return "value,expansion_factor,memory_reduction_pct,weight_memory_reduction_pct,"
           "runtime_reduction_pct,decomp_accel_seconds,decomp_gpu_seconds,"
           "decomposition_events,redecomposition_events\n";
}

void append_plan_row(std::ostringstream& os, double value, const ExperimentReport& rep) {
    os << format_real(value) << ',' << rep.expansion_factor << ','
       << format_real(rep.memory_reduction_pct) << ','
       << format_real(rep.weight_memory_reduction_pct) << ','
       << format_real(rep.runtime_reduction_pct) << ','
       << format_real(rep.decomp_accel_seconds) << ','
       << format_real(rep.decomp_gpu_seconds) << ',' << rep.decomposition_events << ','
       << rep.redecomposition_events << '\n';
}

} // namespace

std::string sweep(const SweepSpec& spec, const SweepFixed& fixed) {
    if (spec.values.empty()) throw parameter_error("sweep: no values given");
    std::ostringstream os;
    switch (spec.vary) {
        case SweepVary::rank: {
            os << plan_sweep_row_header();
            for (double v : spec.values) {
                DecompPlan p = fixed.plan;
                p.rank = static_cast<std::uint64_t>(v);
                append_plan_row(os, v, estimate_plan(fixed.model, p, fixed.hw, fixed.baseline));
            }
            break;
        }
        case SweepVary::layers: {
            os << plan_sweep_row_header();
            for (double v : spec.values) {
                DecompPlan p = fixed.plan;
                p.decomposed_layer_ids = canonical_layer_set(static_cast<std::size_t>(v));
                append_plan_row(os, v, estimate_plan(fixed.model, p, fixed.hw, fixed.baseline));
            }
            break;
        }
        case SweepVary::expansion_factor: {
            os << "f,cycles_compute,cycles_memory,cycles_reduction,cycles_broadcast,"
                  "cycles_total,bound_class\n";
            for (double v : spec.values) {
                std::uint64_t f = static_cast<std::uint64_t>(v);
                LatencyReport r = simulate_lanczos(fixed.model.seq_len, fixed.model.hidden,
                                                   fixed.plan.rank, f, fixed.hw);
                os << f << ',' << format_real(r.cycles_compute) << ','
                   << format_real(r.cycles_memory) << ',' << format_real(r.cycles_reduction)
                   << ',' << format_real(r.cycles_broadcast) << ','
                   << format_real(r.cycles_total) << ',' << to_string(r.bound_class) << '\n';
            }
            break;
        }
        case SweepVary::outlier_fraction: {
            os << "outlier_fraction,threshold,extracted_channels,extraction_fraction,"
                  "rel_error\n";
            // planted synthetic input with hot channels on exactly 5% of the
            // width; the probe rank is kept below the hot-channel count so
            // un-extracted channels visibly consume decomposition capacity
            const std::size_t s = 96, h = 160;
            PlantedOutlierMatrix planted =
                make_planted_outlier_matrix(s, h, 8, 40.0, fixed.synthetic_seed);
            const std::size_t k = std::min<std::size_t>(fixed.plan.rank, 6);
            const double eps = default_breakdown_eps(planted.x);
            for (double frac : spec.values) {
                double rel = 0.0, thr = 0.0, got_frac = 0.0;
                std::size_t got = 0;
                if (frac <= 0.0) {
                    rel = reconstruction_error(
                        planted.x, lanczos_svd(planted.x, k, eps, 1).decomposition);
                } else {
                    std::map<int, std::vector<BatchActivations>> samples;
                    BatchActivations ba;
                    ba.batch = 1;
                    ba.seq_len = s;
                    ba.hidden = h;
                    ba.prompts = {planted.x};
                    samples[0] = {ba};
                    ThresholdTable tt = calibrate_thresholds(samples, frac);
                    thr = tt.entries.front().threshold;
                    MultiTrackDecomposition mt = multitrack_decompose(
                        planted.x, k, thr, tt.entries.front().count_fraction, eps, 1);
                    got = mt.extracted_channels();
                    got_frac = mt.extraction_fraction();
                    DenseMatrix rec = reconstruct(mt);
                    double num = 0.0;
                    for (std::size_t i = 0; i < s; ++i)
                        for (std::size_t jx = 0; jx < h; ++jx) {
                            double d = static_cast<double>(planted.x(i, jx)) -
                                       static_cast<double>(rec(i, jx));
                            num += d * d;
                        }
                    rel = std::sqrt(num) / frobenius_norm(planted.x);
                }
                os << format_real(frac) << ',' << format_real(thr) << ',' << got << ','
                   << format_real(got_frac) << ',' << format_real(rel) << '\n';
            }
            break;
        }
    }
    return os.str();
}

DenseMatrix MatrixSource::load() const {
    if (file) return read_matrix_auto(*file);
    std::vector<double> sp;
    if (spectrum == "pow2") {
        sp = spectrum_pow2_decay(std::min(rows, cols));
    } else if (spectrum == "flat") {
        sp = spectrum_flat(std::min(rows, cols));
    } else if (spectrum == "planted") {
        sp = spectrum_planted_rank(std::min(rows, cols), planted_rank);
    } else {
        throw parameter_error("matrix source: unknown spectrum '" + spectrum + "'");
    }
    return make_spectrum_matrix(rows, cols, sp, seed);
}

ConvergenceBenchResult run_convergence_bench(const MatrixSource& source,
                                             const std::vector<std::size_t>& ranks) {
    if (ranks.empty()) throw parameter_error("bench: no ranks given");
    DenseMatrix a = source.load();
    ConvergenceBenchResult out;
    out.table_csv = convergence_to_csv(convergence_study(a, ranks));
    double eps = default_breakdown_eps(a);
    std::vector<std::size_t> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k : sorted) {
        LanczosResult lr = lanczos_svd(a, k, eps, source.seed);
        out.trace_csvs.emplace_back(k, trace_to_csv(lr.trace));
    }
    return out;
}

} // namespace dcom
