// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Two-layer MLP on one-hot pairs:
//
//   f(m, n) = W . Drop(Norm(phi(U e_m + V e_n)))
//
// with U, V in R^{N x p} and W in R^{p x N}. The one-hot products are column
// selections. Activations are stored batch-major (one row per example) and
// logits are |batch| x p.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grokbench/dataset.hpp"
#include "grokbench/numkit.hpp"

namespace grokbench {

enum class Activation : std::uint32_t { Quadratic = 0, ReLU = 1 };
enum class LossKind { MSE, CrossEntropy };
enum class NormKind : std::uint32_t { None = 0, BatchNorm = 1, LayerNorm = 2 };
enum class Mode { Train, Eval };

std::string to_string(Activation a);
std::string to_string(LossKind l);
std::string to_string(NormKind n);
Activation parse_activation(const std::string& text);
LossKind parse_loss(const std::string& text);
NormKind parse_norm(const std::string& text);

struct HyperKinds {
    Activation activation = Activation::Quadratic;
    LossKind loss = LossKind::MSE;
    double dropout_p = 0.0;
};

/// Post-activation normalization over the N hidden units. BatchNorm
/// normalizes each unit over the batch (running statistics in eval mode);
/// LayerNorm normalizes each example over the units.
struct NormParams {
    NormKind kind = NormKind::BatchNorm;
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.1;
    double epsilon = 1e-5;

    static NormParams make(NormKind kind, std::size_t width);
    bool operator==(const NormParams&) const = default;
};

struct ModelParams {
    std::size_t p = 0;
    std::size_t width = 0;
    Matrix U;  // N x p
    Matrix V;  // N x p
    Matrix W;  // p x N
    std::optional<NormParams> norm;

    NormKind norm_kind() const { return norm ? norm->kind : NormKind::None; }
    void validate() const;
    bool operator==(const ModelParams&) const = default;
};

/// Default init scale (16N)^(-1/3), i.e. variance (16N)^(-2/3).
double default_init_std(std::size_t width);

/// Gaussian init of U, V, W from forks "U", "V", "W" of `rng`; norm gamma = 1, beta = 0.
ModelParams init_params(std::size_t p, std::size_t width, double std, NormKind norm, Rng& rng);

struct ForwardCache {
    Mode mode = Mode::Eval;
    std::size_t p = 0;
    std::size_t width = 0;
    NormKind norm = NormKind::None;
    std::vector<Example> batch;
    Matrix pre;         // h = U e_m + V e_n              (B x N)
    Matrix normalized;  // (phi(h) - mean) * inv_std, only with a norm layer
    std::vector<double> norm_mean;     // per unit (BN) or per example (LN)
    std::vector<double> norm_inv_std;
    std::vector<double> norm_batch_var;  // biased batch variance, BN train mode only
    Matrix mask;        // dropout multipliers in {0, 1/(1-dp)}, empty when unused
    Matrix hidden;      // Drop(Norm(phi(h))), the input to W (B x N)
    Matrix logits;      // B x p
};

struct Gradients {
    Matrix U;
    Matrix V;
    Matrix W;
    std::vector<double> gamma;
    std::vector<double> beta;
};

/// `dropout_rng` is required when mode is Train and dropout_p > 0.
void forward(const ModelParams& params, std::span<const Example> batch, Mode mode,
             const HyperKinds& hyper, Rng* dropout_rng, ForwardCache& cache);
ForwardCache forward(const ModelParams& params, std::span<const Example> batch, Mode mode,
                     const HyperKinds& hyper, Rng* dropout_rng = nullptr);

/// Folds the batch statistics of a train-mode BatchNorm forward into the
/// running estimates (unbiased variance, momentum from NormParams).
void update_running_stats(ModelParams& params, const ForwardCache& cache);

/// MSE = sum (f - y)^2 / (|D| p); CrossEntropy = mean -log softmax(f)[label].
double loss(const Matrix& logits, const Matrix& targets_one_hot, LossKind kind);
double loss(const Matrix& logits, std::span<const std::uint32_t> labels, LossKind kind);
Matrix loss_gradient(const Matrix& logits, std::span<const std::uint32_t> labels, LossKind kind);

void backward(const ModelParams& params, const ForwardCache& cache, std::span<const std::uint32_t> labels,
              const HyperKinds& hyper, Gradients& grads);
Gradients backward(const ModelParams& params, const ForwardCache& cache, std::span<const std::uint32_t> labels,
                   const HyperKinds& hyper);

/// Ties resolve to the lowest index.
std::vector<std::uint32_t> predictions(const Matrix& logits);
double accuracy(const Matrix& logits, std::span<const std::uint32_t> labels);

// Checkpoint layout, all little-endian:
//   "GRKB1" | u32 p | u32 N | u32 activation | u32 norm
//   | U, V, W as f64 row-major
//   | if norm != 0: gamma, beta, running_mean, running_var (f64, N each)
struct Checkpoint {
    ModelParams params;
    Activation activation = Activation::Quadratic;
};

void write_checkpoint(std::ostream& os, const ModelParams& params, Activation activation);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const std::string& path, const ModelParams& params, Activation activation);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace grokbench
