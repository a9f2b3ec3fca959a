#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcom/harness.hpp"
#include "dcom/io.hpp"
#include "dcom/lanczos.hpp"
#include "dcom/outlier.hpp"
#include "dcom/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw dcom::io_error("cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw dcom::io_error(path.string() + ": " + e.what());
    }
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw dcom::io_error("cannot open " + path.string() + " for writing");
    os << text;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
    }
}

dcom::HardwareConfig load_hw(const std::string& path) {
    dcom::HardwareConfig hw;
    if (!path.empty()) from_json(load_json(path), hw);
    return hw;
}

dcom::BaselineConfig load_baseline(const std::string& path) {
    dcom::BaselineConfig cfg;
    if (!path.empty()) from_json(load_json(path), cfg);
    return cfg;
}

std::vector<std::size_t> parse_rank_list(const std::vector<std::uint64_t>& in) {
    return std::vector<std::size_t>(in.begin(), in.end());
}

// sample files are grouped by the integer after the "layer" prefix
int layer_id_from_name(const fs::path& p) {
    std::string stem = p.stem().string();
    if (stem.rfind("layer", 0) != 0) return -1;
    std::size_t pos = 5, end = pos;
    while (end < stem.size() && std::isdigit(static_cast<unsigned char>(stem[end]))) ++end;
    if (end == pos) return -1;
    return std::stoi(stem.substr(pos, end - pos));
}

int run_decompose(const std::string& matrix_path, std::uint64_t rank, double eps,
                  std::uint64_t seed, bool outliers, const std::string& thresholds_path,
                  int layer, double target_fraction, std::string out_prefix) {
    dcom::DenseMatrix x = dcom::read_matrix_auto(matrix_path);
    if (out_prefix.empty()) out_prefix = fs::path(matrix_path).stem().string();
    if (eps <= 0.0) eps = dcom::default_breakdown_eps(x);

    json report;
    report["input"] = {{"rows", x.rows()}, {"cols", x.cols()}, {"path", matrix_path}};
    report["rank_requested"] = rank;

    dcom::DecomposedMatrix d;
    if (outliers) {
        double threshold = 0.0, count_fraction = 0.0;
        if (!thresholds_path.empty()) {
            dcom::ThresholdTable table;
            from_json(load_json(thresholds_path), table);
            const dcom::ThresholdEntry* e = table.find(layer);
            if (!e) {
                throw dcom::parameter_error("threshold table has no entry for layer " +
                                            std::to_string(layer));
            }
            threshold = e->threshold;
            count_fraction = e->count_fraction;
        } else {
            // single-input calibration at the requested target fraction
            dcom::BatchActivations b;
            b.batch = 1;
            b.seq_len = x.rows();
            b.hidden = x.cols();
            b.prompts = {x};
            std::map<int, std::vector<dcom::BatchActivations>> samples{{layer, {b}}};
            dcom::ThresholdTable table =
                dcom::calibrate_thresholds(samples, target_fraction);
            threshold = table.entries.front().threshold;
            count_fraction = table.entries.front().count_fraction;
        }
        dcom::MultiTrackDecomposition mt =
            dcom::multitrack_decompose(x, rank, threshold, count_fraction, eps, seed);
        d = mt.residual;
        dcom::write_matrix_dcm1(out_prefix + ".outliers.dcm1", mt.outlier_cols);
        dcom::DenseMatrix rec = dcom::reconstruct(mt);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                double diff = static_cast<double>(x(i, j)) - static_cast<double>(rec(i, j));
                num += diff * diff;
                den += static_cast<double>(x(i, j)) * static_cast<double>(x(i, j));
            }
        }
        report["rel_error"] = den == 0.0 ? 0.0 : std::sqrt(num / den);
        report["outliers"] = {{"extracted_channels", mt.extracted_channels()},
                              {"fraction", mt.extraction_fraction()},
                              {"threshold", threshold},
                              {"count_fraction", count_fraction},
                              {"channel_idx", mt.outlier_idx}};
    } else {
        dcom::LanczosResult lr = dcom::lanczos_svd(x, rank, eps, seed);
        d = lr.decomposition;
        report["rel_error"] = dcom::reconstruction_error(x, d);
        report["iterations"] = lr.trace.iterations.size();
        report["breakdown"] = lr.trace.breakdown;
    }
    dcom::write_matrix_dcm1(out_prefix + ".u.dcm1", d.u);
    dcom::write_matrix_dcm1(out_prefix + ".sigma.dcm1", d.sigma);
    dcom::write_matrix_dcm1(out_prefix + ".v.dcm1", d.v);
    report["effective_rank"] = d.r1();
    report["files"] = {out_prefix + ".u.dcm1", out_prefix + ".sigma.dcm1",
                       out_prefix + ".v.dcm1"};
    std::cout << report.dump(2) << '\n';
    return 0;
}

int run_calibrate(const std::string& samples_dir, double target_fraction,
                  double count_fraction, const std::string& out_path) {
    std::map<int, std::vector<dcom::BatchActivations>> samples;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(samples_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        int layer = layer_id_from_name(p);
        if (layer < 0) continue;
        dcom::DenseMatrix m = dcom::read_matrix_auto(p);
        dcom::BatchActivations b;
        b.batch = 1;
        b.seq_len = m.rows();
        b.hidden = m.cols();
        b.prompts = {std::move(m)};
        samples[layer].push_back(std::move(b));
    }
    if (samples.empty()) {
        throw dcom::calibration_error(
            "no calibration files found (expected layer<ID>*.dcm1 or .csv under " +
            samples_dir + ")");
    }
    dcom::ThresholdTable table =
        dcom::calibrate_thresholds(samples, target_fraction, count_fraction);
    json j;
    to_json(j, table);
    emit(j.dump(2) + "\n", out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"activation low-rank decomposition toolkit and accelerator model"};
    app.require_subcommand(1);

    // decompose
    auto* dec = app.add_subcommand("decompose", "factor a matrix file (DCM1 or CSV)");
    std::string matrix_path, thresholds_path, out_prefix;
    std::uint64_t rank = 10, seed = 0;
    double eps = 0.0, target_fraction = 0.03;
    int layer = 0;
    bool outliers = false;
    dec->add_option("matrix", matrix_path, "input matrix file")->required();
    dec->add_option("--rank", rank, "decomposition rank")->required();
    dec->add_flag("--outliers", outliers, "extract outlier channels first");
    dec->add_option("--thresholds", thresholds_path, "threshold table JSON");
    dec->add_option("--layer", layer, "layer id for the threshold lookup");
    dec->add_option("--target-fraction", target_fraction,
                    "calibration target when no table is given");
    dec->add_option("--eps", eps, "breakdown tolerance (default: scaled norm)");
    dec->add_option("--seed", seed, "start-vector seed");
    dec->add_option("--out", out_prefix, "output file prefix");

    // bench-convergence
    auto* bench = app.add_subcommand("bench-convergence", "error-vs-rank study");
    std::string bench_source, bench_out_dir = ".", bench_spectrum = "pow2";
    std::vector<std::uint64_t> bench_ranks{1, 10, 20};
    std::uint64_t bench_rows = 512, bench_cols = 384, bench_seed = 0, bench_planted = 8;
    bench->add_option("--source", bench_source, "matrix file (omit for synthetic)");
    bench->add_option("--rows", bench_rows, "synthetic rows");
    bench->add_option("--cols", bench_cols, "synthetic cols");
    bench->add_option("--spectrum", bench_spectrum, "pow2 | flat | planted");
    bench->add_option("--planted-rank", bench_planted, "rank for the planted spectrum");
    bench->add_option("--seed", bench_seed, "synthetic seed");
    bench->add_option("--ranks", bench_ranks, "ranks to evaluate")->delimiter(',');
    bench->add_option("--out", bench_out_dir, "output directory");

    // sweep
    auto* sw = app.add_subcommand("sweep", "one CSV row per swept value");
    std::string vary_key, sweep_out, sweep_hw, sweep_baseline, sweep_model, sweep_plan;
    std::vector<double> sweep_values;
    sw->add_option("--vary", vary_key, "rank | f | layers | outlier")->required();
    sw->add_option("--values", sweep_values, "comma separated values")
        ->required()
        ->delimiter(',');
    sw->add_option("--model", sweep_model, "model plan JSON");
    sw->add_option("--plan", sweep_plan, "decomposition plan JSON");
    sw->add_option("--hw", sweep_hw, "hardware config JSON");
    sw->add_option("--baseline", sweep_baseline, "baseline config JSON");
    sw->add_option("--out", sweep_out, "output CSV (default stdout)");

    // estimate
    auto* est = app.add_subcommand("estimate", "end-to-end plan estimate");
    std::string est_model, est_plan, est_hw, est_baseline, est_out;
    est->add_option("--model", est_model, "model plan JSON")->required();
    est->add_option("--plan", est_plan, "decomposition plan JSON")->required();
    est->add_option("--hw", est_hw, "hardware config JSON");
    est->add_option("--baseline", est_baseline, "baseline config JSON");
    est->add_option("--out", est_out, "output JSON (default stdout)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "offline threshold calibration");
    std::string cal_dir, cal_out;
    double cal_target = 0.03, cal_count = 0.01;
    cal->add_option("--samples", cal_dir, "directory of layer<ID>* matrix files")
        ->required();
    cal->add_option("--target-fraction", cal_target, "channel fraction to extract")
        ->required();
    cal->add_option("--count-fraction", cal_count, "per-channel token count fraction");
    cal->add_option("--out", cal_out, "output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // help text on stdout, exit 0
    } catch (const CLI::ParseError& e) {
        json err{{"error", {{"kind", "usage"}, {"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (app.got_subcommand(dec)) {
            return run_decompose(matrix_path, rank, eps, seed, outliers, thresholds_path,
                                 layer, target_fraction, out_prefix);
        }
        if (app.got_subcommand(bench)) {
            dcom::MatrixSource src;
            if (!bench_source.empty()) src.file = bench_source;
            src.rows = bench_rows;
            src.cols = bench_cols;
            src.spectrum = bench_spectrum;
            src.planted_rank = bench_planted;
            src.seed = bench_seed;
            dcom::ConvergenceBenchResult r =
                dcom::run_convergence_bench(src, parse_rank_list(bench_ranks));
            fs::create_directories(bench_out_dir);
            write_text(fs::path(bench_out_dir) / "convergence.csv", r.table_csv);
            for (const auto& [k, csv] : r.trace_csvs) {
                write_text(fs::path(bench_out_dir) / ("trace_rank" + std::to_string(k) +
                                                      ".csv"),
                           csv);
            }
            std::cout << r.table_csv;
            return 0;
        }
        if (app.got_subcommand(sw)) {
            dcom::SweepFixed fixed;
            if (!sweep_model.empty()) from_json(load_json(sweep_model), fixed.model);
            if (!sweep_plan.empty()) {
                from_json(load_json(sweep_plan), fixed.plan);
            } else {
                fixed.plan.decomposed_layer_ids = dcom::canonical_layer_set(4);
                fixed.plan.rank = 10;
            }
            fixed.hw = load_hw(sweep_hw);
            fixed.baseline = load_baseline(sweep_baseline);
            fixed.plan.validate(fixed.model);
            dcom::SweepSpec spec;
            spec.vary = dcom::parse_sweep_vary(vary_key);
            spec.values = sweep_values;
            emit(dcom::sweep(spec, fixed), sweep_out);
            return 0;
        }
        if (app.got_subcommand(est)) {
            dcom::ModelPlan model;
            from_json(load_json(est_model), model);
            dcom::DecompPlan plan;
            from_json(load_json(est_plan), plan);
            dcom::ExperimentReport rep =
                dcom::estimate_plan(model, plan, load_hw(est_hw), load_baseline(est_baseline));
            json j;
            to_json(j, rep);
            emit(j.dump(2) + "\n", est_out);
            return 0;
        }
        if (app.got_subcommand(cal)) {
            return run_calibrate(cal_dir, cal_target, cal_count, cal_out);
        }
    } catch (const dcom::error& e) {
        json err{{"error", {{"kind", e.kind()}, {"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", {{"kind", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
    return 0;
}
