// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration, run records, the experiment driver and the (alpha, xi)
// sweep orchestrator behind the `grokbench` command line tool.
//
// Config and record files share one flat grammar:
//
//   file  := { line '\n' }
//   line  := blank | '#' comment | key ws? '=' ws? value
//
// Keys are unique; unknown keys are an error. Doubles are written in their
// shortest round-trip form, so parse(serialize(c)) == c exactly.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grokbench/analytic.hpp"
#include "grokbench/dataset.hpp"
#include "grokbench/model.hpp"
#include "grokbench/optim.hpp"
#include "grokbench/phases.hpp"
#include "grokbench/pruning.hpp"

namespace grokbench {

inline constexpr const char* kArtifactVersion = "grokbench-1";
inline constexpr const char* kOutEnvVar = "GROKBENCH_OUT";

/// Independent RNG roots. `phases` drives analytic phase draws and the
/// sampling done by post-hoc reports.
struct Seeds {
    std::uint64_t data = 0;        // train/test split
    std::uint64_t init = 0;        // weight init
    std::uint64_t shuffle = 0;     // minibatch order and dropout masks
    std::uint64_t corruption = 0;  // corrupted subset and its labels
    std::uint64_t phases = 0;

    bool operator==(const Seeds&) const = default;
};

/// All five seeds from one integer: hash64({seed, lane}) with lanes 1..5.
Seeds derive_seeds(std::uint64_t seed);

struct RunConfig {
    TaskSpec task;
    double alpha = 0.5;
    double xi = 0.0;
    std::size_t width = 500;
    Activation activation = Activation::Quadratic;
    LossKind loss = LossKind::MSE;
    NormKind norm = NormKind::None;
    double dropout_p = 0.0;
    double init_std = 0.0;  // 0 selects default_init_std(width)
    OptimConfig optim;
    double inversion_offset = 1.05;
    Seeds seeds = derive_seeds(0);
    std::string out_dir;

    HyperKinds hyper() const { return {activation, loss, dropout_p}; }
    double effective_init_std() const;
    void validate() const;
    bool operator==(const RunConfig&) const;
};

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(std::istream& is);
void write_key_values(std::ostream& os, const KeyValues& kv);

KeyValues config_to_kv(const RunConfig& config);
/// Starts from `base` and applies every key in `kv`; unknown keys throw.
RunConfig config_from_kv(const KeyValues& kv, RunConfig base = {});

std::string serialize_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Split with seeds.data, then corrupt with seeds.corruption.
ExampleTable build_table(const RunConfig& config);

enum class RunStatus { Ok, NonFinite, Error };
std::string to_string(RunStatus s);
RunStatus parse_run_status(const std::string& text);

struct RunRecord {
    RunConfig config;
    RunStatus status = RunStatus::Ok;
    std::string message;
    std::uint64_t table_hash = 0;
    std::uint64_t checkpoint_hash = 0;  // hash64 of the checkpoint bytes, 0 when none was written
    Metrics final_metrics;
    double max_test_acc = 0.0;
    std::optional<PhaseLabel> label;
    bool degenerate_band = false;
    std::string history_path;
    std::string checkpoint_path;
    std::string ipr_path;
    double wall_seconds = 0.0;
    std::string artifact_version = kArtifactVersion;
};

std::string serialize_record(const RunRecord& record);
RunRecord parse_record(const std::string& text);
RunRecord load_record(const std::filesystem::path& path);

/// In-memory result of one run; `params` is empty when training failed.
struct RunOutcome {
    RunRecord record;
    ExampleTable table;
    std::optional<ModelParams> params;
    TrainHistory history;
};

/// Builds the table, initializes and trains, classifies. Never touches the
/// filesystem. Non-finite losses end in status NonFinite with the partial
/// history kept.
RunOutcome run_experiment(const RunConfig& config, const HistoryCallback& on_record = {});

/// Writes `content` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Output root: GROKBENCH_OUT when set, else `fallback`.
std::filesystem::path resolve_out_dir(const std::string& fallback);

inline constexpr const char* kRecordFile = "record.txt";
inline constexpr const char* kHistoryFile = "history.csv";
inline constexpr const char* kCheckpointFile = "model.grkb";
inline constexpr const char* kIprFile = "ipr.csv";

/// Runs the experiment and writes history.csv, model.grkb, ipr.csv and
/// finally record.txt into `dir`. An existing record.txt is an error unless
/// `force` is set.
RunOutcome cmd_train(const RunConfig& config, const std::filesystem::path& dir, bool force,
                     const HistoryCallback& on_record = {});

struct SweepSpec {
    std::vector<double> alphas;
    std::vector<double> xis;
    std::size_t seeds_per_cell = 1;
    RunConfig base;
    std::uint64_t base_seed = 0;
    std::size_t workers = 0;  // 0: max(1, hardware threads - 1)

    void validate() const;
};

/// n values evenly spaced on [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t n);
/// 17 alphas on [0.1, 0.9] by 19 xis on [0.0, 0.9].
SweepSpec default_sweep_spec();

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t alpha_index, std::size_t xi_index,
                        std::size_t seed_index);
std::string cell_dir_name(std::size_t alpha_index, std::size_t xi_index, std::size_t seed_index);

struct SweepEvent {
    std::size_t alpha_index = 0;
    std::size_t xi_index = 0;
    std::size_t seed_index = 0;
    bool resumed = false;  // record already on disk, cell skipped
    const RunRecord* record = nullptr;
};

struct SweepResult {
    std::vector<RunRecord> records;  // alpha-major, then xi, then seed
    PhaseDiagram diagram;
    std::size_t computed = 0;
    std::size_t resumed = 0;
};

/// Runs every missing cell on a worker pool, then writes diagram.csv,
/// diagram.txt and records.csv into `dir`. `on_cell` is called from the
/// coordinating thread only.
SweepResult cmd_sweep(const SweepSpec& spec, const std::filesystem::path& dir,
                      const std::function<void(const SweepEvent&)>& on_cell = {});

struct PruneOutcome {
    PruneTrace trace;
    MaxPrunable summary;
    double floor = 0.99;
};

/// Regenerates the training table from the run's recorded config and refuses
/// to continue when its hash or the checkpoint shape disagrees with the record.
PruneOutcome cmd_prune(const std::filesystem::path& run_dir, PruneOrder order, std::size_t stride, double floor,
                       const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

struct AnalyticOutcome {
    std::size_t p = 0;
    std::size_t width = 0;
    FrequencyAssignment assignment = FrequencyAssignment::Permutation;
    AnalyticReport report;
    int exit_code = 0;  // 2 unless accuracy is exactly 1
};

AnalyticOutcome cmd_verify_analytic(std::size_t p, std::size_t width, std::uint64_t seed,
                                    FrequencyAssignment assignment);

/// `history_csv` supplies the historical maximum test accuracy; without it
/// the final test accuracy stands in.
Classification cmd_classify(double train_acc, double test_acc, double xi,
                            const std::optional<std::filesystem::path>& history_csv,
                            const PhaseThresholds& thresholds = {});

}  // namespace grokbench
