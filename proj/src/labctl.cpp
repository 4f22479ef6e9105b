// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/labctl.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "grokbench/error.hpp"
#include "grokbench/spectral.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

namespace fs = std::filesystem;

Seeds derive_seeds(std::uint64_t seed) {
    return {hash64({seed, 1}), hash64({seed, 2}), hash64({seed, 3}), hash64({seed, 4}), hash64({seed, 5})};
}

double RunConfig::effective_init_std() const { return init_std > 0.0 ? init_std : default_init_std(width); }

void RunConfig::validate() const {
    if (task.p < 2) throw ConfigError("p must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("xi must lie in [0, 1]");
    if (width == 0) throw ConfigError("width must be >= 1");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(init_std >= 0.0) || !std::isfinite(init_std)) throw ConfigError("init_std must be finite and >= 0");
    if (!std::isfinite(inversion_offset)) throw ConfigError("inversion_offset must be finite");
    optim.validate();
}

bool RunConfig::operator==(const RunConfig& other) const { return config_to_kv(*this) == config_to_kv(other); }

// ---------------------------------------------------------------------------
// key=value files

KeyValues read_key_values(std::istream& is) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw DataError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key(trim(t.substr(0, eq)));
        if (key.empty()) throw DataError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, std::string(trim(t.substr(eq + 1)))).second)
            throw DataError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return kv;
}

void write_key_values(std::ostream& os, const KeyValues& kv) {
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t v = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw DataError("expected an unsigned integer, got '" + std::string(text) + "'");
    return v;
}

std::size_t parse_count(std::string_view text) { return static_cast<std::size_t>(parse_u64(text)); }

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

}  // namespace

KeyValues config_to_kv(const RunConfig& c) {
    return {
        {"op", to_string(c.task.op)},
        {"p", std::to_string(c.task.p)},
        {"alpha", format_double(c.alpha)},
        {"xi", format_double(c.xi)},
        {"width", std::to_string(c.width)},
        {"activation", to_string(c.activation)},
        {"loss", to_string(c.loss)},
        {"norm", to_string(c.norm)},
        {"dropout", format_double(c.dropout_p)},
        {"init_std", format_double(c.init_std)},
        {"lr", format_double(c.optim.lr)},
        {"beta1", format_double(c.optim.beta1)},
        {"beta2", format_double(c.optim.beta2)},
        {"epsilon", format_double(c.optim.epsilon)},
        {"weight_decay", format_double(c.optim.weight_decay)},
        {"batch", c.optim.batch_size ? std::to_string(*c.optim.batch_size) : "full"},
        {"steps", std::to_string(c.optim.steps)},
        {"eval_every", std::to_string(c.optim.eval_every)},
        {"decay_norm_params", c.optim.decay_norm_params ? "true" : "false"},
        {"inversion_offset", format_double(c.inversion_offset)},
        {"seed.data", std::to_string(c.seeds.data)},
        {"seed.init", std::to_string(c.seeds.init)},
        {"seed.shuffle", std::to_string(c.seeds.shuffle)},
        {"seed.corruption", std::to_string(c.seeds.corruption)},
        {"seed.phases", std::to_string(c.seeds.phases)},
        {"out_dir", c.out_dir},
    };
}

RunConfig config_from_kv(const KeyValues& kv, RunConfig c) {
    for (const auto& [key, value] : kv) {
        try {
            if (key == "op") c.task.op = parse_task_op(value);
            else if (key == "p") c.task.p = static_cast<std::uint32_t>(parse_u64(value));
            else if (key == "alpha") c.alpha = parse_double(value);
            else if (key == "xi") c.xi = parse_double(value);
            else if (key == "width") c.width = parse_count(value);
            else if (key == "activation") c.activation = parse_activation(value);
            else if (key == "loss") c.loss = parse_loss(value);
            else if (key == "norm") c.norm = parse_norm(value);
            else if (key == "dropout") c.dropout_p = parse_double(value);
            else if (key == "init_std") c.init_std = parse_double(value);
            else if (key == "lr") c.optim.lr = parse_double(value);
            else if (key == "beta1") c.optim.beta1 = parse_double(value);
            else if (key == "beta2") c.optim.beta2 = parse_double(value);
            else if (key == "epsilon") c.optim.epsilon = parse_double(value);
            else if (key == "weight_decay") c.optim.weight_decay = parse_double(value);
            else if (key == "batch") c.optim.batch_size = value == "full" ? std::nullopt : std::optional(parse_count(value));
            else if (key == "steps") c.optim.steps = parse_count(value);
            else if (key == "eval_every") c.optim.eval_every = parse_count(value);
            else if (key == "decay_norm_params") c.optim.decay_norm_params = parse_bool(value);
            else if (key == "inversion_offset") c.inversion_offset = parse_double(value);
            else if (key == "seed.data") c.seeds.data = parse_u64(value);
            else if (key == "seed.init") c.seeds.init = parse_u64(value);
            else if (key == "seed.shuffle") c.seeds.shuffle = parse_u64(value);
            else if (key == "seed.corruption") c.seeds.corruption = parse_u64(value);
            else if (key == "seed.phases") c.seeds.phases = parse_u64(value);
            else if (key == "out_dir") c.out_dir = value;
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
    return c;
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream os;
    write_key_values(os, config_to_kv(config));
    return os.str();
}

RunConfig parse_config(const std::string& text) {
    std::istringstream is(text);
    return config_from_kv(read_key_values(is));
}

RunConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

ExampleTable build_table(const RunConfig& config) {
    Rng data_rng(config.seeds.data);
    Rng corrupt_rng(config.seeds.corruption);
    const ExampleTable split_table = split(generate_table(config.task), config.alpha, data_rng);
    return corrupt(split_table, config.xi, corrupt_rng);
}

// ---------------------------------------------------------------------------
// run records

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::NonFinite: return "nonfinite";
        case RunStatus::Error: return "error";
    }
    return "error";
}

RunStatus parse_run_status(const std::string& text) {
    if (text == "ok") return RunStatus::Ok;
    if (text == "nonfinite") return RunStatus::NonFinite;
    if (text == "error") return RunStatus::Error;
    throw DataError("unknown run status '" + text + "'");
}

std::string serialize_record(const RunRecord& r) {
    KeyValues kv;
    for (const auto& [k, v] : config_to_kv(r.config)) kv["config." + k] = v;
    kv["status"] = to_string(r.status);
    kv["message"] = one_line(r.message);
    kv["table_hash"] = std::to_string(r.table_hash);
    kv["checkpoint_hash"] = std::to_string(r.checkpoint_hash);
    kv["final.train_acc"] = format_double(r.final_metrics.train_acc);
    kv["final.test_acc"] = format_double(r.final_metrics.test_acc);
    kv["final.train_acc_clean"] = format_double(r.final_metrics.train_acc_clean);
    kv["final.train_acc_corrupted"] = format_double(r.final_metrics.train_acc_corrupted);
    kv["final.train_loss"] = format_double(r.final_metrics.train_loss);
    kv["final.test_loss"] = format_double(r.final_metrics.test_loss);
    kv["max_test_acc"] = format_double(r.max_test_acc);
    kv["label"] = r.label ? to_string(*r.label) : "none";
    kv["degenerate_band"] = r.degenerate_band ? "true" : "false";
    kv["history_path"] = r.history_path;
    kv["checkpoint_path"] = r.checkpoint_path;
    kv["ipr_path"] = r.ipr_path;
    kv["wall_seconds"] = format_double(r.wall_seconds);
    kv["artifact_version"] = r.artifact_version;
    std::ostringstream os;
    os << "# grokbench run record\n";
    write_key_values(os, kv);
    return os.str();
}

RunRecord parse_record(const std::string& text) {
    std::istringstream is(text);
    const KeyValues kv = read_key_values(is);
    KeyValues config_kv;
    RunRecord r;
    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw DataError("run record: missing key '" + key + "'");
        return it->second;
    };
    for (const auto& [k, v] : kv)
        if (k.rfind("config.", 0) == 0) config_kv[k.substr(7)] = v;
    r.config = config_from_kv(config_kv);
    r.status = parse_run_status(get("status"));
    r.message = get("message");
    r.table_hash = parse_u64(get("table_hash"));
    r.checkpoint_hash = parse_u64(get("checkpoint_hash"));
    r.final_metrics.train_acc = parse_double(get("final.train_acc"));
    r.final_metrics.test_acc = parse_double(get("final.test_acc"));
    r.final_metrics.train_acc_clean = parse_double(get("final.train_acc_clean"));
    r.final_metrics.train_acc_corrupted = parse_double(get("final.train_acc_corrupted"));
    r.final_metrics.train_loss = parse_double(get("final.train_loss"));
    r.final_metrics.test_loss = parse_double(get("final.test_loss"));
    r.max_test_acc = parse_double(get("max_test_acc"));
    if (get("label") != "none") r.label = parse_phase_label(get("label"));
    r.degenerate_band = parse_bool(get("degenerate_band"));
    r.history_path = get("history_path");
    r.checkpoint_path = get("checkpoint_path");
    r.ipr_path = get("ipr_path");
    r.wall_seconds = parse_double(get("wall_seconds"));
    r.artifact_version = get("artifact_version");
    return r;
}

RunRecord load_record(const fs::path& path) { return parse_record(read_file(path)); }

// ---------------------------------------------------------------------------

RunOutcome run_experiment(const RunConfig& config, const HistoryCallback& on_record) {
    config.validate();
    RunOutcome out;
    out.record.config = config;
    out.table = build_table(config);
    out.record.table_hash = table_hash(out.table);

    Rng init_rng(config.seeds.init);
    ModelParams params = init_params(config.task.p, config.width, config.effective_init_std(), config.norm, init_rng);
    try {
        TrainResult result = train_run(out.table, std::move(params), config.hyper(), config.optim,
                                       Rng(config.seeds.shuffle), on_record);
        out.params = std::move(result.params);
        out.history = std::move(result.history);
    } catch (const NonFiniteLoss& e) {
        out.record.status = RunStatus::NonFinite;
        out.record.message = e.what();
        out.history = e.partial;
    }

    if (!out.history.rows.empty()) {
        const HistoryRow& last = out.history.final_row();
        out.record.final_metrics = {last.train_acc,       last.test_acc,   last.train_acc_clean,
                                    last.train_acc_corrupted, last.train_loss, last.test_loss};
        out.record.max_test_acc = out.history.max_test_acc();
    }
    if (out.record.status == RunStatus::Ok) {
        const auto c = classify(out.history, config.xi, {0.90, config.inversion_offset});
        out.record.label = c.label;
        out.record.degenerate_band = c.degenerate_band;
    }
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open '" + tmp.string() + "' for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        os.flush();
        if (!os) throw Error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path resolve_out_dir(const std::string& fallback) {
    if (const char* env = std::getenv(kOutEnvVar); env && *env) return fs::path(env);
    return fs::path(fallback);
}

RunOutcome cmd_train(const RunConfig& config, const fs::path& dir, bool force, const HistoryCallback& on_record) {
    const fs::path record_path = dir / kRecordFile;
    if (fs::exists(record_path)) {
        if (!force) throw ConfigError("'" + record_path.string() + "' exists; pass --force to overwrite");
        fs::remove(record_path);  // a crash below must not leave a stale record next to new artifacts
    }
    fs::create_directories(dir);

    const auto start = std::chrono::steady_clock::now();
    RunConfig cfg = config;
    cfg.out_dir = dir.string();
    RunOutcome out = run_experiment(cfg, on_record);

    std::ostringstream history;
    write_history_csv(history, out.history);
    write_file_atomic(dir / kHistoryFile, history.str());
    out.record.history_path = kHistoryFile;

    if (out.params) {
        std::ostringstream ckpt;
        write_checkpoint(ckpt, *out.params, cfg.activation);
        const std::string bytes = ckpt.str();
        write_file_atomic(dir / kCheckpointFile, bytes);
        out.record.checkpoint_path = kCheckpointFile;
        out.record.checkpoint_hash = hash64(bytes);

        std::ostringstream ipr;
        write_ipr_csv(ipr, per_neuron_ipr(*out.params));
        write_file_atomic(dir / kIprFile, ipr.str());
        out.record.ipr_path = kIprFile;
    }
    out.record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file_atomic(record_path, serialize_record(out.record));
    return out;
}

// ---------------------------------------------------------------------------
// sweeps

void SweepSpec::validate() const {
    if (alphas.empty() || xis.empty()) throw ConfigError("sweep grid must have at least one alpha and one xi");
    if (seeds_per_cell == 0) throw ConfigError("seeds_per_cell must be >= 1");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("sweep alpha " + format_double(a) + " outside (0, 1)");
    for (double x : xis)
        if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("sweep xi " + format_double(x) + " outside [0, 1]");
    base.optim.validate();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

SweepSpec default_sweep_spec() {
    SweepSpec s;
    s.alphas = linspace(0.1, 0.9, 17);
    s.xis = linspace(0.0, 0.9, 19);
    return s;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t ai, std::size_t xi, std::size_t si) {
    return hash64({base_seed, ai, xi, si});
}

std::string cell_dir_name(std::size_t ai, std::size_t xi, std::size_t si) {
    return "a" + std::to_string(ai) + "_x" + std::to_string(xi) + "_s" + std::to_string(si);
}

namespace {

struct Cell {
    std::size_t ai, xi, si;
    std::uint64_t seed;
    fs::path dir;
};

RunRecord run_cell(const SweepSpec& spec, const Cell& cell) {
    RunConfig cfg = spec.base;
    cfg.alpha = spec.alphas[cell.ai];
    cfg.xi = spec.xis[cell.xi];
    cfg.seeds = derive_seeds(cell.seed);
    try {
        return cmd_train(cfg, cell.dir, false).record;
    } catch (const std::exception& e) {
        RunRecord r;
        r.config = cfg;
        r.config.out_dir = cell.dir.string();
        r.status = RunStatus::Error;
        r.message = e.what();
        fs::create_directories(cell.dir);
        write_file_atomic(cell.dir / kRecordFile, serialize_record(r));
        return r;
    }
}

void write_sweep_summary(const SweepSpec& spec, const std::vector<Cell>& cells, const SweepResult& result,
                         const fs::path& dir) {
    std::ostringstream csv;
    csv << "alpha_index,xi_index,seed_index,alpha,xi,seed,status,label,final_train_acc,final_test_acc,max_test_acc\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        const RunRecord& r = result.records[i];
        csv << c.ai << ',' << c.xi << ',' << c.si << ',' << format_double(spec.alphas[c.ai]) << ','
            << format_double(spec.xis[c.xi]) << ',' << c.seed << ',' << to_string(r.status) << ','
            << (r.label ? to_string(*r.label) : "none") << ',' << format_double(r.final_metrics.train_acc) << ','
            << format_double(r.final_metrics.test_acc) << ',' << format_double(r.max_test_acc) << '\n';
    }
    write_file_atomic(dir / "records.csv", csv.str());

    std::ostringstream diagram_csv, diagram_txt;
    write_diagram_csv(diagram_csv, result.diagram);
    write_diagram_text(diagram_txt, result.diagram);
    write_file_atomic(dir / "diagram.csv", diagram_csv.str());
    write_file_atomic(dir / "diagram.txt", diagram_txt.str());
}

}  // namespace

SweepResult cmd_sweep(const SweepSpec& spec, const fs::path& dir,
                      const std::function<void(const SweepEvent&)>& on_cell) {
    spec.validate();
    fs::create_directories(dir);

    std::vector<Cell> cells;
    for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai)
        for (std::size_t xi = 0; xi < spec.xis.size(); ++xi)
            for (std::size_t si = 0; si < spec.seeds_per_cell; ++si)
                cells.push_back({ai, xi, si, cell_seed(spec.base_seed, ai, xi, si), dir / cell_dir_name(ai, xi, si)});

    SweepResult result;
    result.records.resize(cells.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const fs::path record_path = cells[i].dir / kRecordFile;
        if (!fs::exists(record_path)) {
            pending.push_back(i);
            continue;
        }
        result.records[i] = load_record(record_path);
        ++result.resumed;
        if (on_cell) on_cell({cells[i].ai, cells[i].xi, cells[i].si, true, &result.records[i]});
    }

    std::size_t workers = spec.workers;
    if (workers == 0) {
        const std::size_t hw = std::thread::hardware_concurrency();
        workers = hw > 1 ? hw - 1 : 1;
    }
    workers = std::min(workers, pending.size());

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::pair<std::size_t, RunRecord>> finished;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < pending.size(); k = next++) {
                    RunRecord r = run_cell(spec, cells[pending[k]]);
                    {
                        std::lock_guard lock(mu);
                        finished.emplace_back(pending[k], std::move(r));
                    }
                    cv.notify_one();
                }
            });
        }
        // The coordinating thread is the only writer of `result`.
        for (std::size_t done = 0; done < pending.size(); ++done) {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return !finished.empty(); });
            auto [i, record] = std::move(finished.front());
            finished.pop_front();
            lock.unlock();
            result.records[i] = std::move(record);
            ++result.computed;
            if (on_cell) on_cell({cells[i].ai, cells[i].xi, cells[i].si, false, &result.records[i]});
        }
    }

    std::vector<PhasePoint> points;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const RunRecord& r = result.records[i];
        if (!r.label) continue;  // failed cells leave a gap
        points.push_back({spec.alphas[cells[i].ai], spec.xis[cells[i].xi], r.final_metrics.train_acc,
                          r.final_metrics.test_acc, r.max_test_acc, *r.label, cells[i].seed});
    }
    result.diagram = assemble_diagram(points, spec.alphas, spec.xis);
    write_sweep_summary(spec, cells, result, dir);
    return result;
}

// ---------------------------------------------------------------------------

PruneOutcome cmd_prune(const fs::path& run_dir, PruneOrder order, std::size_t stride, double floor,
                       const std::optional<fs::path>& checkpoint) {
    const RunRecord record = load_record(run_dir / kRecordFile);
    if (record.status != RunStatus::Ok) throw ConfigError("run did not finish successfully; nothing to prune");

    const ExampleTable table = build_table(record.config);
    if (table_hash(table) != record.table_hash)
        throw DataError("regenerated table does not match the recorded training table; refusing to prune");

    const fs::path ckpt_path = checkpoint ? *checkpoint : run_dir / record.checkpoint_path;
    const std::string bytes = read_file(ckpt_path);
    if (hash64(bytes) != record.checkpoint_hash)
        throw DataError("checkpoint '" + ckpt_path.string() + "' is not the one recorded for this run; refusing");
    std::istringstream is(bytes);
    const Checkpoint ckpt = read_checkpoint(is);

    PruneOutcome out;
    out.floor = floor;
    out.trace = prune_sweep(ckpt.params, table, record.config.hyper(), order, stride);
    out.summary = max_prunable(ckpt.params, table, record.config.hyper(), floor);
    return out;
}

AnalyticOutcome cmd_verify_analytic(std::size_t p, std::size_t width, std::uint64_t seed,
                                    FrequencyAssignment assignment) {
    Rng rng(seed);
    const AnalyticSpec spec = make_analytic_spec(p, width, assignment, rng);
    AnalyticOutcome out;
    out.p = p;
    out.width = width;
    out.assignment = assignment;
    out.report = verify_analytic(build_analytic_params(spec));
    out.exit_code = out.report.accuracy == 1.0 ? 0 : 2;
    return out;
}

Classification cmd_classify(double train_acc, double test_acc, double xi, const std::optional<fs::path>& history_csv,
                            const PhaseThresholds& thresholds) {
    for (double a : {train_acc, test_acc})
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("accuracies must lie in [0, 1]");
    if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("xi must lie in [0, 1]");
    double max_hist = test_acc;
    if (history_csv) {
        std::istringstream is(read_file(*history_csv));
        max_hist = std::max(max_hist, read_history_csv(is).max_test_acc());
    }
    return classify(train_acc, test_acc, xi, max_hist, thresholds);
}

}  // namespace grokbench
