// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "grokbench/dataset.hpp"
#include "grokbench/error.hpp"
#include "grokbench/model.hpp"

namespace grokbench {

struct OptimConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    std::optional<std::size_t> batch_size;  // nullopt: full batch
    std::size_t steps = 2000;
    std::size_t eval_every = 10;
    bool decay_norm_params = false;

    void validate() const;
};

/// Bias-corrected AdamW moments, shaped like the parameters.
struct OptState {
    Gradients m;
    Gradients v;
    std::uint64_t t = 0;
};

/// One decoupled-decay AdamW update:
///   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
/// Norm-layer gamma/beta skip the decay term unless decay_norm_params is set.
void adamw_step(ModelParams& params, const Gradients& grads, OptState& state, const OptimConfig& config);

/// 0.01 * sqrt(batch / 256).
double lr_for_batch(std::size_t batch_size);
/// round(base_steps * base_batch / batch_size): keeps the number of examples seen fixed.
std::size_t steps_for_batch(std::size_t batch_size, std::size_t base_steps, std::size_t base_batch);

struct Metrics {
    double train_acc = 0.0;
    double test_acc = 0.0;
    double train_acc_clean = 0.0;
    double train_acc_corrupted = 0.0;  // NaN when the training set has no corrupted example
    double train_loss = 0.0;
    double test_loss = 0.0;
};

/// Eval-mode metrics over the whole table. Train accuracy and loss use the
/// assigned (possibly corrupted) labels; accuracy on an empty subset is NaN.
Metrics evaluate(const ModelParams& params, const ExampleTable& table, const Subsets& subsets,
                 const HyperKinds& hyper);

struct HistoryRow {
    std::size_t step = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double train_acc_clean = 0.0;
    double train_acc_corrupted = 0.0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double frob_u = 0.0;
    double frob_v = 0.0;
    double frob_w = 0.0;
    double mean_ipr = 0.0;

    bool operator==(const HistoryRow&) const = default;
};

struct TrainHistory {
    std::vector<HistoryRow> rows;

    double max_test_acc() const;
    const HistoryRow& final_row() const;
};

inline constexpr const char* kHistoryCsvHeader =
    "step,train_acc,test_acc,train_acc_clean,train_acc_corrupted,train_loss,test_loss,frob_u,frob_v,frob_w,mean_ipr";

void write_history_csv(std::ostream& os, const TrainHistory& history);
TrainHistory read_history_csv(std::istream& is);

struct TrainResult {
    ModelParams params;
    TrainHistory history;
};

/// Thrown when the training loss or an evaluation loss stops being finite.
struct NonFiniteLoss : Error {
    NonFiniteLoss(std::size_t step, double frob_u, double frob_v, double frob_w, TrainHistory partial);

    std::size_t step;
    double frob_u;
    double frob_v;
    double frob_w;
    TrainHistory partial;
};

using HistoryCallback = std::function<void(const HistoryRow&)>;

/// Runs `config.steps` AdamW steps on the training split, recording a history
/// row at step 0, every `eval_every` steps and at the last step. Minibatches
/// come from a full reshuffle of the training indices each epoch (the last
/// partial batch is kept). Shuffling and dropout use forks "shuffle" and
/// "dropout" of `rng`.
TrainResult train_run(const ExampleTable& table, ModelParams params, const HyperKinds& hyper,
                      const OptimConfig& config, const Rng& rng, const HistoryCallback& on_record = {});

}  // namespace grokbench
