// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "grokbench/error.hpp"

namespace grokbench {

std::string to_string(Activation a) { return a == Activation::Quadratic ? "quadratic" : "relu"; }
std::string to_string(LossKind l) { return l == LossKind::MSE ? "mse" : "crossentropy"; }
std::string to_string(NormKind n) {
    switch (n) {
        case NormKind::None: return "none";
        case NormKind::BatchNorm: return "batchnorm";
        case NormKind::LayerNorm: return "layernorm";
    }
    return "none";
}

Activation parse_activation(const std::string& text) {
    if (text == "quadratic") return Activation::Quadratic;
    if (text == "relu") return Activation::ReLU;
    throw ConfigError("unknown activation '" + text + "' (expected quadratic|relu)");
}

LossKind parse_loss(const std::string& text) {
    if (text == "mse") return LossKind::MSE;
    if (text == "crossentropy" || text == "ce") return LossKind::CrossEntropy;
    throw ConfigError("unknown loss '" + text + "' (expected mse|crossentropy)");
}

NormKind parse_norm(const std::string& text) {
    if (text == "none") return NormKind::None;
    if (text == "batchnorm" || text == "bn") return NormKind::BatchNorm;
    if (text == "layernorm" || text == "ln") return NormKind::LayerNorm;
    throw ConfigError("unknown norm '" + text + "' (expected none|batchnorm|layernorm)");
}

NormParams NormParams::make(NormKind kind, std::size_t width) {
    if (kind == NormKind::None) throw ConfigError("NormParams::make: kind must not be None");
    NormParams n;
    n.kind = kind;
    n.gamma.assign(width, 1.0);
    n.beta.assign(width, 0.0);
    n.running_mean.assign(width, 0.0);
    n.running_var.assign(width, 1.0);
    return n;
}

void ModelParams::validate() const {
    if (width < 1 || p < 2) throw ConfigError("model needs width >= 1 and p >= 2");
    if (U.rows() != width || U.cols() != p || V.rows() != width || V.cols() != p || W.rows() != p ||
        W.cols() != width)
        throw ShapeError("model parameter shapes inconsistent with p=" + std::to_string(p) +
                         ", N=" + std::to_string(width));
    if (norm) {
        if (norm->kind == NormKind::None) throw ShapeError("norm params present with kind None");
        if (norm->gamma.size() != width || norm->beta.size() != width ||
            norm->running_mean.size() != width || norm->running_var.size() != width)
            throw ShapeError("norm parameter length differs from width");
    }
}

double default_init_std(std::size_t width) { return std::cbrt(1.0 / (16.0 * static_cast<double>(width))); }

ModelParams init_params(std::size_t p, std::size_t width, double std, NormKind norm, Rng& rng) {
    ModelParams m;
    m.p = p;
    m.width = width;
    Rng ru = rng.fork("U"), rv = rng.fork("V"), rw = rng.fork("W");
    m.U = gaussian_matrix(ru, width, p, std);
    m.V = gaussian_matrix(rv, width, p, std);
    m.W = gaussian_matrix(rw, p, width, std);
    if (norm != NormKind::None) m.norm = NormParams::make(norm, width);
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// forward

void forward(const ModelParams& params, std::span<const Example> batch, Mode mode, const HyperKinds& hyper,
             Rng* dropout_rng, ForwardCache& cache) {
    params.validate();
    const std::size_t B = batch.size(), N = params.width, p = params.p;
    if (B == 0) throw ConfigError("forward: empty batch");
    if (!(hyper.dropout_p >= 0.0 && hyper.dropout_p < 1.0)) throw ConfigError("dropout_p must lie in [0, 1)");
    const NormKind norm = params.norm_kind();
    if (norm == NormKind::BatchNorm && mode == Mode::Train && B < 2)
        throw ConfigError("BatchNorm in train mode needs a batch of at least 2");
    for (const auto& e : batch)
        if (e.m >= p || e.n >= p) throw DataError("forward: input index out of range");

    cache.mode = mode;
    cache.p = p;
    cache.width = N;
    cache.norm = norm;
    cache.batch.assign(batch.begin(), batch.end());

    const Matrix Ut = transpose(params.U);
    const Matrix Vt = transpose(params.V);
    if (cache.pre.rows() != B || cache.pre.cols() != N) cache.pre = Matrix(B, N);
    if (cache.hidden.rows() != B || cache.hidden.cols() != N) cache.hidden = Matrix(B, N);
    for (std::size_t b = 0; b < B; ++b) {
        const auto u = Ut.row(batch[b].m);
        const auto v = Vt.row(batch[b].n);
        auto h = cache.pre.row(b);
        auto a = cache.hidden.row(b);
        if (hyper.activation == Activation::Quadratic) {
            for (std::size_t k = 0; k < N; ++k) {
                h[k] = u[k] + v[k];
                a[k] = h[k] * h[k];
            }
        } else {
            for (std::size_t k = 0; k < N; ++k) {
                h[k] = u[k] + v[k];
                a[k] = h[k] > 0.0 ? h[k] : 0.0;
            }
        }
    }

    // `hidden` holds phi(h) here and is normalized / masked in place.
    cache.norm_mean.clear();
    cache.norm_inv_std.clear();
    cache.norm_batch_var.clear();
    if (norm != NormKind::None) {
        const NormParams& np = *params.norm;
        cache.normalized = Matrix(B, N);
        Matrix& x = cache.hidden;
        if (norm == NormKind::BatchNorm) {
            cache.norm_mean.assign(N, 0.0);
            cache.norm_inv_std.assign(N, 0.0);
            if (mode == Mode::Train) {
                std::vector<double> var(N, 0.0);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t k = 0; k < N; ++k) cache.norm_mean[k] += x(b, k);
                for (double& m : cache.norm_mean) m /= static_cast<double>(B);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t k = 0; k < N; ++k) {
                        const double d = x(b, k) - cache.norm_mean[k];
                        var[k] += d * d;
                    }
                for (std::size_t k = 0; k < N; ++k) {
                    var[k] /= static_cast<double>(B);
                    cache.norm_inv_std[k] = 1.0 / std::sqrt(var[k] + np.epsilon);
                }
                cache.norm_batch_var = std::move(var);
            } else {
                for (std::size_t k = 0; k < N; ++k) {
                    cache.norm_mean[k] = np.running_mean[k];
                    cache.norm_inv_std[k] = 1.0 / std::sqrt(np.running_var[k] + np.epsilon);
                }
            }
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t k = 0; k < N; ++k) {
                    const double xh = (x(b, k) - cache.norm_mean[k]) * cache.norm_inv_std[k];
                    cache.normalized(b, k) = xh;
                    x(b, k) = np.gamma[k] * xh + np.beta[k];
                }
        } else {
            cache.norm_mean.assign(B, 0.0);
            cache.norm_inv_std.assign(B, 0.0);
            for (std::size_t b = 0; b < B; ++b) {
                auto row = x.row(b);
                double mean = 0.0;
                for (double v : row) mean += v;
                mean /= static_cast<double>(N);
                double var = 0.0;
                for (double v : row) var += (v - mean) * (v - mean);
                var /= static_cast<double>(N);
                const double inv = 1.0 / std::sqrt(var + np.epsilon);
                cache.norm_mean[b] = mean;
                cache.norm_inv_std[b] = inv;
                for (std::size_t k = 0; k < N; ++k) {
                    const double xh = (row[k] - mean) * inv;
                    cache.normalized(b, k) = xh;
                    row[k] = np.gamma[k] * xh + np.beta[k];
                }
            }
        }
    } else {
        cache.normalized = Matrix();
    }

    if (mode == Mode::Train && hyper.dropout_p > 0.0) {
        if (!dropout_rng) throw ConfigError("forward: dropout in train mode needs an Rng");
        const double keep_scale = 1.0 / (1.0 - hyper.dropout_p);
        cache.mask = Matrix(B, N);
        for (std::size_t i = 0; i < cache.mask.size(); ++i) {
            const double m = dropout_rng->uniform() < hyper.dropout_p ? 0.0 : keep_scale;
            cache.mask.values()[i] = m;
            cache.hidden.values()[i] *= m;
        }
    } else {
        cache.mask = Matrix();
    }

    matmul_into(cache.hidden, transpose(params.W), cache.logits);
}

ForwardCache forward(const ModelParams& params, std::span<const Example> batch, Mode mode,
                     const HyperKinds& hyper, Rng* dropout_rng) {
    ForwardCache cache;
    forward(params, batch, mode, hyper, dropout_rng, cache);
    return cache;
}

void update_running_stats(ModelParams& params, const ForwardCache& cache) {
    if (!params.norm || params.norm->kind != NormKind::BatchNorm) return;
    if (cache.mode != Mode::Train || cache.norm_batch_var.size() != params.width)
        throw InternalError("update_running_stats: needs a train-mode BatchNorm cache");
    NormParams& np = *params.norm;
    const double B = static_cast<double>(cache.batch.size());
    for (std::size_t k = 0; k < params.width; ++k) {
        const double unbiased = cache.norm_batch_var[k] * B / (B - 1.0);
        np.running_mean[k] = (1.0 - np.momentum) * np.running_mean[k] + np.momentum * cache.norm_mean[k];
        np.running_var[k] = (1.0 - np.momentum) * np.running_var[k] + np.momentum * unbiased;
    }
}

// ---------------------------------------------------------------------------
// loss

namespace {

double log_sum_exp(std::span<const double> row) {
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    return mx + std::log(s);
}

void check_labels(const Matrix& logits, std::span<const std::uint32_t> labels) {
    if (logits.rows() != labels.size()) throw ShapeError("loss: logits rows differ from label count");
    for (auto l : labels)
        if (l >= logits.cols()) throw DataError("loss: label out of range");
}

}  // namespace

double loss(const Matrix& logits, const Matrix& targets, LossKind kind) {
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
        throw ShapeError("loss: logits and targets differ in shape");
    const std::size_t B = logits.rows(), p = logits.cols();
    double total = 0.0;
    if (kind == LossKind::MSE) {
        for (std::size_t i = 0; i < logits.size(); ++i) {
            const double d = logits.values()[i] - targets.values()[i];
            total += d * d;
        }
        return total / (static_cast<double>(B) * static_cast<double>(p));
    }
    for (std::size_t b = 0; b < B; ++b) {
        const double lse = log_sum_exp(logits.row(b));
        for (std::size_t q = 0; q < p; ++q) total -= targets(b, q) * (logits(b, q) - lse);
    }
    return total / static_cast<double>(B);
}

double loss(const Matrix& logits, std::span<const std::uint32_t> labels, LossKind kind) {
    check_labels(logits, labels);
    const std::size_t B = logits.rows(), p = logits.cols();
    double total = 0.0;
    if (kind == LossKind::MSE) {
        for (std::size_t b = 0; b < B; ++b) {
            const auto row = logits.row(b);
            for (std::size_t q = 0; q < p; ++q) {
                const double d = row[q] - (q == labels[b] ? 1.0 : 0.0);
                total += d * d;
            }
        }
        return total / (static_cast<double>(B) * static_cast<double>(p));
    }
    for (std::size_t b = 0; b < B; ++b) total += log_sum_exp(logits.row(b)) - logits(b, labels[b]);
    return total / static_cast<double>(B);
}

Matrix loss_gradient(const Matrix& logits, std::span<const std::uint32_t> labels, LossKind kind) {
    check_labels(logits, labels);
    const std::size_t B = logits.rows(), p = logits.cols();
    Matrix g(B, p);
    if (kind == LossKind::MSE) {
        const double scale = 2.0 / (static_cast<double>(B) * static_cast<double>(p));
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t q = 0; q < p; ++q)
                g(b, q) = scale * (logits(b, q) - (q == labels[b] ? 1.0 : 0.0));
        return g;
    }
    const double inv_b = 1.0 / static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b) {
        const double lse = log_sum_exp(logits.row(b));
        for (std::size_t q = 0; q < p; ++q)
            g(b, q) = inv_b * (std::exp(logits(b, q) - lse) - (q == labels[b] ? 1.0 : 0.0));
    }
    return g;
}

// ---------------------------------------------------------------------------
// backward

void backward(const ModelParams& params, const ForwardCache& cache, std::span<const std::uint32_t> labels,
              const HyperKinds& hyper, Gradients& grads) {
    const std::size_t B = cache.batch.size(), N = params.width, p = params.p;
    if (cache.mode != Mode::Train) throw InternalError("backward: cache must come from a train-mode forward");
    if (cache.p != p || cache.width != N || cache.norm != params.norm_kind() || cache.logits.rows() != B ||
        cache.logits.cols() != p || cache.hidden.rows() != B || cache.hidden.cols() != N)
        throw InternalError("backward: cache does not match parameters");

    const Matrix dlogits = loss_gradient(cache.logits, labels, hyper.loss);
    matmul_into(transpose(dlogits), cache.hidden, grads.W);

    Matrix dx = matmul(dlogits, params.W);  // dL/d(hidden), B x N
    if (cache.mask.size() != 0) {
        for (std::size_t i = 0; i < dx.size(); ++i) dx.values()[i] *= cache.mask.values()[i];
    }

    grads.gamma.clear();
    grads.beta.clear();
    if (params.norm) {
        const NormParams& np = *params.norm;
        const Matrix& xh = cache.normalized;
        grads.gamma.assign(N, 0.0);
        grads.beta.assign(N, 0.0);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = 0; k < N; ++k) {
                grads.gamma[k] += dx(b, k) * xh(b, k);
                grads.beta[k] += dx(b, k);
            }
        // dx <- dL/d(normalized)
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = 0; k < N; ++k) dx(b, k) *= np.gamma[k];
        if (np.kind == NormKind::BatchNorm) {
            std::vector<double> sum(N, 0.0), sum_x(N, 0.0);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t k = 0; k < N; ++k) {
                    sum[k] += dx(b, k);
                    sum_x[k] += dx(b, k) * xh(b, k);
                }
            const double nb = static_cast<double>(B);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t k = 0; k < N; ++k)
                    dx(b, k) = cache.norm_inv_std[k] / nb * (nb * dx(b, k) - sum[k] - xh(b, k) * sum_x[k]);
        } else {
            const double nn = static_cast<double>(N);
            for (std::size_t b = 0; b < B; ++b) {
                double sum = 0.0, sum_x = 0.0;
                for (std::size_t k = 0; k < N; ++k) {
                    sum += dx(b, k);
                    sum_x += dx(b, k) * xh(b, k);
                }
                const double inv = cache.norm_inv_std[b];
                for (std::size_t k = 0; k < N; ++k) dx(b, k) = inv / nn * (nn * dx(b, k) - sum - xh(b, k) * sum_x);
            }
        }
    }

    // dx <- dL/dh, then scattered into the selected columns of U and V.
    Matrix dUt(p, N), dVt(p, N);
    for (std::size_t b = 0; b < B; ++b) {
        const auto h = cache.pre.row(b);
        auto d = dx.row(b);
        if (hyper.activation == Activation::Quadratic) {
            for (std::size_t k = 0; k < N; ++k) d[k] *= 2.0 * h[k];
        } else {
            for (std::size_t k = 0; k < N; ++k) d[k] = h[k] > 0.0 ? d[k] : 0.0;
        }
        auto du = dUt.row(cache.batch[b].m);
        auto dv = dVt.row(cache.batch[b].n);
        for (std::size_t k = 0; k < N; ++k) {
            du[k] += d[k];
            dv[k] += d[k];
        }
    }
    transpose_into(dUt, grads.U);
    transpose_into(dVt, grads.V);
}

Gradients backward(const ModelParams& params, const ForwardCache& cache, std::span<const std::uint32_t> labels,
                   const HyperKinds& hyper) {
    Gradients g;
    backward(params, cache, labels, hyper, g);
    return g;
}

// ---------------------------------------------------------------------------
// accuracy

std::vector<std::uint32_t> predictions(const Matrix& logits) {
    std::vector<std::uint32_t> out(logits.rows());
    for (std::size_t b = 0; b < logits.rows(); ++b) {
        const auto row = logits.row(b);
        out[b] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

double accuracy(const Matrix& logits, std::span<const std::uint32_t> labels) {
    if (logits.rows() != labels.size()) throw ShapeError("accuracy: logits rows differ from label count");
    if (labels.empty()) return 0.0;
    const auto pred = predictions(logits);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

// ---------------------------------------------------------------------------
// checkpoint

namespace {

constexpr char kMagic[5] = {'G', 'R', 'K', 'B', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    os.write(bytes, 4);
}

void put_f64s(std::ostream& os, std::span<const double> values) {
    for (double x : values) {
        const auto bits = std::bit_cast<std::uint64_t>(x);
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
        os.write(bytes, 8);
    }
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char bytes[4];
    if (!is.read(reinterpret_cast<char*>(bytes), 4)) throw DataError("checkpoint: truncated header");
    return std::uint32_t{bytes[0]} | std::uint32_t{bytes[1]} << 8 | std::uint32_t{bytes[2]} << 16 |
           std::uint32_t{bytes[3]} << 24;
}

void get_f64s(std::istream& is, std::span<double> values) {
    for (double& x : values) {
        unsigned char bytes[8];
        if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("checkpoint: truncated payload");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
        x = std::bit_cast<double>(bits);
    }
}

}  // namespace

void write_checkpoint(std::ostream& os, const ModelParams& params, Activation activation) {
    params.validate();
    os.write(kMagic, sizeof kMagic);
    put_u32(os, static_cast<std::uint32_t>(params.p));
    put_u32(os, static_cast<std::uint32_t>(params.width));
    put_u32(os, static_cast<std::uint32_t>(activation));
    put_u32(os, static_cast<std::uint32_t>(params.norm_kind()));
    put_f64s(os, params.U.values());
    put_f64s(os, params.V.values());
    put_f64s(os, params.W.values());
    if (params.norm) {
        put_f64s(os, params.norm->gamma);
        put_f64s(os, params.norm->beta);
        put_f64s(os, params.norm->running_mean);
        put_f64s(os, params.norm->running_var);
    }
    if (!os) throw DataError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
    char magic[5];
    if (!is.read(magic, 5) || !std::equal(magic, magic + 5, kMagic)) throw DataError("checkpoint: bad magic");
    Checkpoint ck;
    ModelParams& m = ck.params;
    m.p = get_u32(is);
    m.width = get_u32(is);
    const std::uint32_t act = get_u32(is);
    const std::uint32_t norm = get_u32(is);
    if (m.width < 1) throw DataError("checkpoint: network has no hidden neurons");
    if (m.p < 2) throw DataError("checkpoint: modulus must be >= 2");
    if (act > 1) throw DataError("checkpoint: unknown activation code " + std::to_string(act));
    if (norm > 2) throw DataError("checkpoint: unknown norm code " + std::to_string(norm));
    ck.activation = static_cast<Activation>(act);
    m.U = Matrix(m.width, m.p);
    m.V = Matrix(m.width, m.p);
    m.W = Matrix(m.p, m.width);
    get_f64s(is, m.U.values());
    get_f64s(is, m.V.values());
    get_f64s(is, m.W.values());
    if (norm != 0) {
        m.norm = NormParams::make(static_cast<NormKind>(norm), m.width);
        get_f64s(is, m.norm->gamma);
        get_f64s(is, m.norm->beta);
        get_f64s(is, m.norm->running_mean);
        get_f64s(is, m.norm->running_var);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint: trailing bytes");
    return ck;
}

void save_checkpoint(const std::string& path, const ModelParams& params, Activation activation) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    write_checkpoint(os, params, activation);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint '" + path + "'");
    return read_checkpoint(is);
}

}  // namespace grokbench
