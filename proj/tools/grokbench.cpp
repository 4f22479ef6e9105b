// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// grokbench: train, sweep, prune and inspect modular-arithmetic MLPs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grokbench/error.hpp"
#include "grokbench/labctl.hpp"
#include "grokbench/reports.hpp"
#include "grokbench/spectral.hpp"
#include "grokbench/textio.hpp"

namespace fs = std::filesystem;
using namespace grokbench;

namespace {

// Flags shared by `train` and `sweep`. Unset flags leave the config file value alone.
struct ConfigFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> op;
    std::optional<unsigned> p;
    std::optional<double> alpha;
    std::optional<double> xi;
    std::optional<std::size_t> width;
    std::optional<std::string> activation;
    std::optional<std::string> loss;
    std::optional<std::string> norm;
    std::optional<double> dropout;
    std::optional<double> init_std;
    std::optional<double> lr;
    std::optional<double> wd;
    std::optional<std::string> batch;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> eval_every;
    std::optional<double> inversion_offset;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* cmd, bool with_grid_point) {
        cmd->add_option("--config", config_file, "key=value config file");
        cmd->add_option("--op", op, "add | mul");
        cmd->add_option("--p", p, "modulus");
        if (with_grid_point) {
            cmd->add_option("--alpha", alpha, "training data fraction");
            cmd->add_option("--xi", xi, "label corruption fraction");
        }
        cmd->add_option("--width", width, "hidden width N");
        cmd->add_option("--activation", activation, "quadratic | relu");
        cmd->add_option("--loss", loss, "mse | crossentropy");
        cmd->add_option("--norm", norm, "none | batchnorm | layernorm");
        cmd->add_option("--dropout", dropout, "dropout probability");
        cmd->add_option("--init-std", init_std, "init standard deviation (default (16N)^(-1/3))");
        cmd->add_option("--lr", lr, "AdamW learning rate");
        cmd->add_option("--wd", wd, "AdamW weight decay");
        cmd->add_option("--batch", batch, "minibatch size or 'full'");
        cmd->add_option("--steps", steps, "optimizer steps");
        cmd->add_option("--eval-every", eval_every, "steps between history rows");
        cmd->add_option("--inversion-offset", inversion_offset, "constant in the inversion threshold");
        cmd->add_option("--seed", seed, "derive all five run seeds from this integer");
    }

    RunConfig resolve() const {
        RunConfig c = config_file ? load_config(*config_file) : RunConfig{};
        KeyValues kv;
        if (op) kv["op"] = *op;
        if (p) kv["p"] = std::to_string(*p);
        if (width) kv["width"] = std::to_string(*width);
        if (activation) kv["activation"] = *activation;
        if (loss) kv["loss"] = *loss;
        if (norm) kv["norm"] = *norm;
        if (batch) kv["batch"] = *batch;
        c = config_from_kv(kv, c);
        if (alpha) c.alpha = *alpha;
        if (xi) c.xi = *xi;
        if (dropout) c.dropout_p = *dropout;
        if (init_std) c.init_std = *init_std;
        if (lr) c.optim.lr = *lr;
        if (wd) c.optim.weight_decay = *wd;
        if (steps) c.optim.steps = *steps;
        if (eval_every) c.optim.eval_every = *eval_every;
        if (inversion_offset) c.inversion_offset = *inversion_offset;
        if (seed) c.seeds = derive_seeds(*seed);
        return c;
    }
};

// --out wins, then GROKBENCH_OUT, then the config file, then `fallback`.
fs::path output_dir(const std::optional<std::string>& flag, const RunConfig& config, const std::string& fallback) {
    if (flag) return fs::path(*flag);
    return resolve_out_dir(config.out_dir.empty() ? fallback : config.out_dir);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(item));
    return out;
}

void emit(const std::optional<std::string>& path, const std::string& content) {
    if (!path || *path == "-") {
        std::cout << content;
    } else {
        write_file_atomic(*path, content);
    }
}

std::string fmt(double x) { return format_double(x); }

void print_record(const RunRecord& r) {
    std::cout << "status " << to_string(r.status);
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << "\ntrain_acc " << fmt(r.final_metrics.train_acc) << "\ntest_acc " << fmt(r.final_metrics.test_acc)
              << "\ncorrupted_train_acc " << fmt(r.final_metrics.train_acc_corrupted) << "\nmax_test_acc "
              << fmt(r.max_test_acc) << "\nphase " << (r.label ? to_string(*r.label) : "none")
              << (r.degenerate_band ? " (degenerate band)" : "") << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"grokbench: grokking, memorization and label noise in modular-arithmetic MLPs"};
    app.require_subcommand(1);

    // train
    ConfigFlags train_flags;
    std::optional<std::string> train_out;
    bool train_force = false;
    bool train_quiet = false;
    auto* train = app.add_subcommand("train", "train one network and write its run record");
    train_flags.attach(train, true);
    train->add_option("--out", train_out, "run directory");
    train->add_flag("--force", train_force, "overwrite an existing run record");
    train->add_flag("--quiet", train_quiet, "no progress lines");

    // sweep
    ConfigFlags sweep_flags;
    std::optional<std::string> sweep_out, sweep_alphas, sweep_xis;
    std::size_t seeds_per_cell = 1, workers = 0;
    std::uint64_t base_seed = 0;
    auto* sweep = app.add_subcommand("sweep", "run an (alpha, xi) grid and assemble the phase diagram");
    sweep_flags.attach(sweep, false);
    sweep->add_option("--out", sweep_out, "sweep directory");
    sweep->add_option("--alphas", sweep_alphas, "comma-separated alphas (default: 17 on [0.1, 0.9])");
    sweep->add_option("--xis", sweep_xis, "comma-separated xis (default: 19 on [0.0, 0.9])");
    sweep->add_option("--seeds-per-cell", seeds_per_cell, "runs per grid cell");
    sweep->add_option("--base-seed", base_seed, "root of the per-cell seed derivation");
    sweep->add_option("--workers", workers, "parallel runs (default: cores - 1)");

    // prune
    std::string prune_run, prune_order = "low";
    std::optional<std::string> prune_ckpt, prune_csv;
    std::size_t prune_stride = 1;
    double prune_floor = 0.99;
    auto* prune = app.add_subcommand("prune", "IPR-ordered pruning trace of a trained run");
    prune->add_option("--run", prune_run, "run directory")->required();
    prune->add_option("--order", prune_order, "low | high");
    prune->add_option("--stride", prune_stride, "evaluate every k-th pruned count");
    prune->add_option("--floor", prune_floor, "test accuracy floor for the max-prunable search");
    prune->add_option("--checkpoint", prune_ckpt, "checkpoint (default: the run's own)");
    prune->add_option("--csv", prune_csv, "trace CSV path (default: <run>/prune_<order>.csv, '-' for stdout)");

    // ipr
    std::string ipr_ckpt;
    std::optional<std::string> ipr_csv;
    std::size_t ipr_bins = kDefaultHistogramBins;
    int ipr_r = 2;
    auto* ipr = app.add_subcommand("ipr", "per-neuron IPR report of a checkpoint");
    ipr->add_option("--checkpoint", ipr_ckpt, "checkpoint file")->required();
    ipr->add_option("--bins", ipr_bins, "histogram bins");
    ipr->add_option("--r", ipr_r, "participation exponent");
    ipr->add_option("--csv", ipr_csv, "per-neuron CSV path ('-' for stdout)");

    // verify-analytic
    std::size_t va_p = 97, va_width = 500;
    std::uint64_t va_seed = 0;
    std::string va_variant = "permutation";
    auto* va = app.add_subcommand("verify-analytic", "build the closed-form periodic solution and evaluate it");
    va->add_option("--p", va_p, "modulus");
    va->add_option("--width", va_width, "hidden width N");
    va->add_option("--seed", va_seed, "seed for frequencies and phases");
    va->add_option("--variant", va_variant, "permutation | balanced");

    // classify
    double cl_train = 0.0, cl_test = 0.0, cl_xi = 0.0, cl_offset = 1.05;
    std::optional<std::string> cl_history;
    auto* cl = app.add_subcommand("classify", "phase label from final accuracies");
    cl->add_option("--train", cl_train, "final train accuracy")->required();
    cl->add_option("--test", cl_test, "final test accuracy")->required();
    cl->add_option("--xi", cl_xi, "label corruption fraction")->required();
    cl->add_option("--history", cl_history, "history CSV for the historical maximum test accuracy");
    cl->add_option("--inversion-offset", cl_offset, "constant in the inversion threshold");

    // logits
    std::string lg_run;
    std::size_t lg_k = kDefaultLogitExamples;
    std::optional<std::string> lg_csv;
    bool lg_json = false;
    auto* lg = app.add_subcommand("logits", "logits of sampled corrupted training examples");
    lg->add_option("--run", lg_run, "run directory")->required();
    lg->add_option("--k", lg_k, "examples to sample");
    lg->add_option("--csv", lg_csv, "CSV path ('-' for stdout)");
    lg->add_flag("--json", lg_json, "print JSON instead of CSV");

    // report
    std::string rp_run;
    auto* rp = app.add_subcommand("report", "norm and IPR time series of a run");
    rp->add_option("--run", rp_run, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (*train) {
        const RunConfig config = train_flags.resolve();
        const fs::path dir = output_dir(train_out, config, "grokbench-out/run");
        HistoryCallback progress;
        if (!train_quiet) {
            progress = [](const HistoryRow& r) {
                if (r.step % 100 != 0) return;
                std::fprintf(stderr, "step %6zu  train %.4f  test %.4f  corrupted %.4f  loss %.3e  ipr %.3f\n", r.step,
                             r.train_acc, r.test_acc, r.train_acc_corrupted, r.train_loss, r.mean_ipr);
            };
        }
        const RunOutcome out = cmd_train(config, dir, train_force, progress);
        std::cout << "run " << dir.string() << '\n';
        print_record(out.record);
        return out.record.status == RunStatus::Ok ? 0 : 2;
    }

    if (*sweep) {
        SweepSpec spec = default_sweep_spec();
        spec.base = sweep_flags.resolve();
        if (sweep_alphas) spec.alphas = parse_list(*sweep_alphas);
        if (sweep_xis) spec.xis = parse_list(*sweep_xis);
        spec.seeds_per_cell = seeds_per_cell;
        spec.base_seed = base_seed;
        spec.workers = workers;
        const fs::path dir = output_dir(sweep_out, spec.base, "grokbench-out/sweep");
        const std::size_t total = spec.alphas.size() * spec.xis.size() * spec.seeds_per_cell;
        std::size_t seen = 0;
        const SweepResult res = cmd_sweep(spec, dir, [&](const SweepEvent& e) {
            ++seen;
            std::fprintf(stderr, "[%zu/%zu] %s %s %s\n", seen, total,
                         cell_dir_name(e.alpha_index, e.xi_index, e.seed_index).c_str(),
                         e.resumed ? "resumed" : to_string(e.record->status).c_str(),
                         e.record->label ? to_string(*e.record->label).c_str() : "-");
        });
        std::cout << "sweep " << dir.string() << ": " << res.computed << " computed, " << res.resumed
                  << " resumed\n";
        write_diagram_text(std::cout, res.diagram);
        return 0;
    }

    if (*prune) {
        const PruneOrder order = parse_prune_order(prune_order);
        const auto ckpt = prune_ckpt ? std::optional<fs::path>(*prune_ckpt) : std::nullopt;
        const PruneOutcome out = cmd_prune(prune_run, order, prune_stride, prune_floor, ckpt);
        std::ostringstream csv;
        write_prune_csv(csv, out.trace);
        const std::string path =
            prune_csv ? *prune_csv : (fs::path(prune_run) / ("prune_" + to_string(order) + ".csv")).string();
        emit(path, csv.str());
        std::cerr << "max_prunable floor " << fmt(out.floor) << ": prunable " << out.summary.prunable
                  << ", survivors " << out.summary.survivors
                  << (out.summary.unpruned_below_floor ? " (unpruned model already below floor)" : "") << '\n';
        return 0;
    }

    if (*ipr) {
        const Checkpoint ckpt = load_checkpoint(ipr_ckpt);
        const IprReport report = per_neuron_ipr(ckpt.params, ipr_r);
        if (ipr_csv) {
            std::ostringstream csv;
            write_ipr_csv(csv, report);
            emit(ipr_csv, csv.str());
        }
        std::cerr << "mean_ipr " << fmt(report.mean_ipr) << "  live " << report.live_count() << '/'
                  << report.per_neuron.size() << '\n';
        const auto hist = ipr_histogram(report, ipr_bins);
        for (std::size_t b = 0; b < hist.size(); ++b) {
            if (hist[b] == 0) continue;
            std::cerr << '[' << fmt(static_cast<double>(b) / hist.size()) << ", "
                      << fmt(static_cast<double>(b + 1) / hist.size()) << ") " << hist[b] << '\n';
        }
        return 0;
    }

    if (*va) {
        const AnalyticOutcome out =
            cmd_verify_analytic(va_p, va_width, va_seed, parse_frequency_assignment(va_variant));
        std::cout << "p " << out.p << "\nwidth " << out.width << "\nvariant " << to_string(out.assignment)
                  << "\naccuracy " << fmt(out.report.accuracy) << "\nmean_target_logit "
                  << fmt(out.report.mean_target_logit) << "\nmax_offtarget_logit "
                  << fmt(out.report.max_offtarget_logit) << '\n';
        return out.exit_code;
    }

    if (*cl) {
        const auto history = cl_history ? std::optional<fs::path>(*cl_history) : std::nullopt;
        const Classification c = cmd_classify(cl_train, cl_test, cl_xi, history, {0.90, cl_offset});
        std::cout << to_string(c.label) << (c.degenerate_band ? " (degenerate band)" : "") << '\n';
        return 0;
    }

    if (*lg) {
        const fs::path dir = lg_run;
        const RunRecord record = load_record(dir / kRecordFile);
        if (record.status != RunStatus::Ok) throw ConfigError("run did not finish successfully");
        const ExampleTable table = build_table(record.config);
        const Checkpoint ckpt = load_checkpoint(dir / record.checkpoint_path);
        Rng rng = Rng(record.config.seeds.phases).fork("logits");
        const LogitReport report = logit_report(ckpt.params, table, record.config.hyper(), lg_k, rng);
        if (report.empty) std::cerr << "no corrupted training examples\n";
        if (lg_json) {
            emit(lg_csv, to_json(report).dump(2) + "\n");
        } else {
            std::ostringstream csv;
            write_logit_csv(csv, report);
            emit(lg_csv, csv.str());
        }
        return 0;
    }

    if (*rp) {
        const fs::path dir = rp_run;
        const RunRecord record = load_record(dir / kRecordFile);
        std::istringstream hs(read_file(dir / record.history_path));
        const TrainHistory history = read_history_csv(hs);
        const NormSeries norms = norm_series(history);
        const IprSeries iprs = ipr_series(history);
        std::ostringstream norms_csv, ipr_csv_out;
        write_norm_csv(norms_csv, norms);
        write_ipr_series_csv(ipr_csv_out, iprs);
        write_file_atomic(dir / "norms.csv", norms_csv.str());
        write_file_atomic(dir / "ipr_series.csv", ipr_csv_out.str());
        nlohmann::json j = {{"phase", record.label ? to_string(*record.label) : "none"},
                            {"norms", to_json(norms)},
                            {"ipr", to_json(iprs)}};
        write_file_atomic(dir / "report.json", j.dump(2) + "\n");
        const NormPoint peak = norms.peak(), last = norms.final();
        std::cout << "phase " << (record.label ? to_string(*record.label) : "none") << "\nmean_ipr "
                  << fmt(iprs.points.front().mean_ipr) << " -> " << fmt(iprs.points.back().mean_ipr)
                  << " (decreasing fraction " << fmt(iprs.fraction_decreasing) << ")\nfrob_u peak "
                  << fmt(peak.frob_u) << " final " << fmt(last.frob_u) << "\nfrob_w peak " << fmt(peak.frob_w)
                  << " final " << fmt(last.frob_w) << '\n';
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
