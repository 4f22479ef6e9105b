// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/optim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>

#include "grokbench/spectral.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

void OptimConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("AdamW betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("AdamW epsilon must be > 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
    if (batch_size && *batch_size == 0) throw ConfigError("batch size must be >= 1");
    if (eval_every == 0) throw ConfigError("eval_every must be >= 1");
}

namespace {

void adam_update(std::span<double> theta, std::span<const double> g, std::span<double> m, std::span<double> v,
                 const OptimConfig& c, double bc1, double bc2, double decay) {
    if (theta.size() != g.size() || m.size() != theta.size() || v.size() != theta.size())
        throw InternalError("adamw_step: gradient or moment shape differs from parameter");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= c.lr * (m_hat / (std::sqrt(v_hat) + c.epsilon) + decay * theta[i]);
    }
}

void ensure_shape(Matrix& moment, const Matrix& like) {
    if (moment.rows() != like.rows() || moment.cols() != like.cols()) moment = Matrix(like.rows(), like.cols());
}

void ensure_shape(std::vector<double>& moment, const std::vector<double>& like) {
    if (moment.size() != like.size()) moment.assign(like.size(), 0.0);
}

}  // namespace

void adamw_step(ModelParams& params, const Gradients& grads, OptState& state, const OptimConfig& config) {
    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    const double wd = config.weight_decay;

    auto step_matrix = [&](Matrix& theta, const Matrix& g, Matrix& m, Matrix& v) {
        ensure_shape(m, theta);
        ensure_shape(v, theta);
        adam_update(theta.values(), g.values(), m.values(), v.values(), config, bc1, bc2, wd);
    };
    step_matrix(params.U, grads.U, state.m.U, state.v.U);
    step_matrix(params.V, grads.V, state.m.V, state.v.V);
    step_matrix(params.W, grads.W, state.m.W, state.v.W);
    if (params.norm) {
        const double norm_wd = config.decay_norm_params ? wd : 0.0;
        for (auto* moments : {&state.m, &state.v}) {
            ensure_shape(moments->gamma, params.norm->gamma);
            ensure_shape(moments->beta, params.norm->beta);
        }
        adam_update(params.norm->gamma, grads.gamma, state.m.gamma, state.v.gamma, config, bc1, bc2, norm_wd);
        adam_update(params.norm->beta, grads.beta, state.m.beta, state.v.beta, config, bc1, bc2, norm_wd);
    }
}

double lr_for_batch(std::size_t batch_size) {
    if (batch_size == 0) throw ConfigError("lr_for_batch: batch size must be >= 1");
    return 0.01 * std::sqrt(static_cast<double>(batch_size) / 256.0);
}

std::size_t steps_for_batch(std::size_t batch_size, std::size_t base_steps, std::size_t base_batch) {
    if (batch_size == 0 || base_batch == 0) throw ConfigError("steps_for_batch: sizes must be >= 1");
    const double exact = static_cast<double>(base_steps) * static_cast<double>(base_batch) / static_cast<double>(batch_size);
    return static_cast<std::size_t>(round_half_even(exact));
}

// ---------------------------------------------------------------------------

namespace {

double subset_accuracy(const std::vector<std::uint32_t>& pred, const ExampleTable& table,
                       const std::vector<std::uint32_t>& idx) {
    if (idx.empty()) return std::nan("");
    std::size_t hits = 0;
    for (auto i : idx) hits += pred[i] == table.assigned_labels[i];
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

double subset_loss(const Matrix& logits, const ExampleTable& table, const std::vector<std::uint32_t>& idx,
                   LossKind kind) {
    if (idx.empty()) return std::nan("");
    Matrix sub(idx.size(), logits.cols());
    std::vector<std::uint32_t> labels(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto row = logits.row(idx[r]);
        std::copy(row.begin(), row.end(), sub.row(r).begin());
        labels[r] = table.assigned_labels[idx[r]];
    }
    return loss(sub, labels, kind);
}

}  // namespace

Metrics evaluate(const ModelParams& params, const ExampleTable& table, const Subsets& subsets,
                 const HyperKinds& hyper) {
    // Eval mode treats every example independently, so one pass over the
    // full table serves all subsets.
    ForwardCache cache;
    forward(params, table.pairs, Mode::Eval, hyper, nullptr, cache);
    const auto pred = predictions(cache.logits);
    Metrics m;
    m.train_acc = subset_accuracy(pred, table, subsets.train);
    m.test_acc = subset_accuracy(pred, table, subsets.test);
    m.train_acc_clean = subset_accuracy(pred, table, subsets.train_clean);
    m.train_acc_corrupted = subset_accuracy(pred, table, subsets.train_corrupted);
    m.train_loss = subset_loss(cache.logits, table, subsets.train, hyper.loss);
    m.test_loss = subset_loss(cache.logits, table, subsets.test, hyper.loss);
    return m;
}

double TrainHistory::max_test_acc() const {
    double best = 0.0;
    for (const auto& r : rows)
        if (r.test_acc > best) best = r.test_acc;
    return best;
}

const HistoryRow& TrainHistory::final_row() const {
    if (rows.empty()) throw DataError("history is empty");
    return rows.back();
}

void write_history_csv(std::ostream& os, const TrainHistory& history) {
    os << kHistoryCsvHeader << '\n';
    for (const auto& r : history.rows) {
        os << r.step << ',' << format_double(r.train_acc) << ',' << format_double(r.test_acc) << ','
           << format_double(r.train_acc_clean) << ',' << format_double(r.train_acc_corrupted) << ','
           << format_double(r.train_loss) << ',' << format_double(r.test_loss) << ',' << format_double(r.frob_u)
           << ',' << format_double(r.frob_v) << ',' << format_double(r.frob_w) << ','
           << format_double(r.mean_ipr) << '\n';
    }
}

TrainHistory read_history_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kHistoryCsvHeader)
        throw DataError("history CSV: unexpected header");
    TrainHistory h;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto c = split(line, ',');
        if (c.size() != 11) throw DataError("history CSV: expected 11 columns: '" + line + "'");
        HistoryRow r;
        const auto step = parse_int(c[0]);
        if (step < 0) throw DataError("history CSV: negative step");
        r.step = static_cast<std::size_t>(step);
        r.train_acc = parse_double(c[1]);
        r.test_acc = parse_double(c[2]);
        r.train_acc_clean = parse_double(c[3]);
        r.train_acc_corrupted = parse_double(c[4]);
        r.train_loss = parse_double(c[5]);
        r.test_loss = parse_double(c[6]);
        r.frob_u = parse_double(c[7]);
        r.frob_v = parse_double(c[8]);
        r.frob_w = parse_double(c[9]);
        r.mean_ipr = parse_double(c[10]);
        if (!h.rows.empty() && r.step <= h.rows.back().step)
            throw DataError("history CSV: steps must be strictly increasing");
        h.rows.push_back(r);
    }
    return h;
}

NonFiniteLoss::NonFiniteLoss(std::size_t step_, double fu, double fv, double fw, TrainHistory partial_)
    : Error("non-finite loss at step " + std::to_string(step_) + " (|U|=" + format_double(fu) +
            ", |V|=" + format_double(fv) + ", |W|=" + format_double(fw) + ")"),
      step(step_), frob_u(fu), frob_v(fv), frob_w(fw), partial(std::move(partial_)) {}

TrainResult train_run(const ExampleTable& table, ModelParams params, const HyperKinds& hyper,
                      const OptimConfig& config, const Rng& rng, const HistoryCallback& on_record) {
    config.validate();
    params.validate();
    if (!table.is_split) throw ConfigError("train_run: table must be split");
    if (params.p != table.task.p) throw ConfigError("train_run: model modulus differs from the task");
    const Subsets sets = subsets(table);
    if (sets.train.empty()) throw ConfigError("train_run: empty training set");

    Rng shuffle_rng = rng.fork("shuffle");
    Rng dropout_rng = rng.fork("dropout");

    TrainResult result;
    auto record = [&](std::size_t step) {
        const Metrics m = evaluate(params, table, sets, hyper);
        HistoryRow row{step,
                       m.train_acc,
                       m.test_acc,
                       m.train_acc_clean,
                       m.train_acc_corrupted,
                       m.train_loss,
                       m.test_loss,
                       frobenius_norm(params.U),
                       frobenius_norm(params.V),
                       frobenius_norm(params.W),
                       per_neuron_ipr(params).mean_ipr};
        if (!std::isfinite(m.train_loss) || (!sets.test.empty() && !std::isfinite(m.test_loss)))
            throw NonFiniteLoss(step, row.frob_u, row.frob_v, row.frob_w, result.history);
        result.history.rows.push_back(row);
        if (on_record) on_record(row);
    };

    const bool full_batch = !config.batch_size || *config.batch_size >= sets.train.size();
    std::vector<std::uint32_t> order = sets.train;
    std::size_t cursor = order.size();  // forces a shuffle before the first minibatch
    std::vector<Example> batch_pairs;
    std::vector<std::uint32_t> batch_labels;
    if (full_batch) {
        batch_pairs = gather_pairs(table, sets.train);
        batch_labels = gather_assigned(table, sets.train);
    }

    ForwardCache cache;
    Gradients grads;
    OptState state;

    record(0);
    for (std::size_t step = 1; step <= config.steps; ++step) {
        if (!full_batch) {
            if (cursor >= order.size()) {
                for (std::size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
                cursor = 0;
            }
            const std::size_t end = std::min(order.size(), cursor + *config.batch_size);
            const std::span<const std::uint32_t> idx(order.data() + cursor, end - cursor);
            batch_pairs = gather_pairs(table, idx);
            batch_labels = gather_assigned(table, idx);
            cursor = end;
        }
        forward(params, batch_pairs, Mode::Train, hyper, &dropout_rng, cache);
        const double step_loss = loss(cache.logits, batch_labels, hyper.loss);
        if (!std::isfinite(step_loss)) {
            throw NonFiniteLoss(step, frobenius_norm(params.U), frobenius_norm(params.V), frobenius_norm(params.W),
                                result.history);
        }
        update_running_stats(params, cache);
        backward(params, cache, batch_labels, hyper, grads);
        adamw_step(params, grads, state, config);
        if (step % config.eval_every == 0 || step == config.steps) record(step);
    }
    result.params = std::move(params);
    return result;
}

}  // namespace grokbench
