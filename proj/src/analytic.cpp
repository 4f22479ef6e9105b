// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "grokbench/error.hpp"

namespace grokbench {

std::string to_string(FrequencyAssignment f) {
    return f == FrequencyAssignment::Permutation ? "permutation" : "balanced";
}

FrequencyAssignment parse_frequency_assignment(const std::string& text) {
    if (text == "permutation") return FrequencyAssignment::Permutation;
    if (text == "balanced") return FrequencyAssignment::Balanced;
    throw ConfigError("unknown frequency assignment '" + text + "' (expected permutation|balanced)");
}

void AnalyticSpec::validate() const {
    if (p < 2 || width < 1) throw ConfigError("analytic spec needs p >= 2 and N >= 1");
    if (sigma.size() != width || phases_u.size() != width || phases_v.size() != width)
        throw ShapeError("analytic spec vectors must have length N");
    if (assignment == FrequencyAssignment::Permutation) {
        std::vector<bool> seen(width, false);
        for (auto s : sigma) {
            if (s >= width || seen[s]) throw ConfigError("sigma is not a permutation of {0, ..., N-1}");
            seen[s] = true;
        }
    }
    if (!(amplitude > 0.0)) throw ConfigError("analytic amplitude must be > 0");
}

double default_analytic_amplitude(std::size_t width) { return std::cbrt(2.0 / static_cast<double>(width)); }

int modular_delta(std::int64_t x, std::int64_t p) {
    if (p < 1) throw ConfigError("modular_delta: p must be >= 1");
    return x % p == 0 ? 1 : 0;
}

AnalyticSpec make_analytic_spec(std::size_t p, std::size_t width, FrequencyAssignment assignment, Rng& rng) {
    AnalyticSpec spec;
    spec.p = p;
    spec.width = width;
    spec.assignment = assignment;
    spec.amplitude = default_analytic_amplitude(width);
    spec.sigma.resize(width);
    if (assignment == FrequencyAssignment::Permutation) {
        std::iota(spec.sigma.begin(), spec.sigma.end(), std::uint64_t{0});
        Rng perm = rng.fork("sigma");
        for (std::size_t i = width; i > 1; --i) std::swap(spec.sigma[i - 1], spec.sigma[perm.uniform_index(i)]);
    } else {
        if (p < 2) throw ConfigError("balanced assignment needs p >= 2");
        for (std::size_t k = 0; k < width; ++k) spec.sigma[k] = 1 + k % (p - 1);
    }
    Rng ph = rng.fork("phases");
    spec.phases_u.resize(width);
    spec.phases_v.resize(width);
    // pi - 2 pi u with u in [0, 1) covers (-pi, pi].
    for (std::size_t k = 0; k < width; ++k) {
        spec.phases_u[k] = std::numbers::pi - 2.0 * std::numbers::pi * ph.uniform();
        spec.phases_v[k] = std::numbers::pi - 2.0 * std::numbers::pi * ph.uniform();
    }
    spec.validate();
    return spec;
}

namespace {

// 2 pi (t mod p) / p; reducing first keeps the argument small.
double angle(std::uint64_t t, std::size_t p) {
    return 2.0 * std::numbers::pi * static_cast<double>(t % p) / static_cast<double>(p);
}

}  // namespace

ModelParams build_analytic_params(const AnalyticSpec& spec) {
    spec.validate();
    ModelParams m;
    m.p = spec.p;
    m.width = spec.width;
    m.U = Matrix(spec.width, spec.p);
    m.V = Matrix(spec.width, spec.p);
    m.W = Matrix(spec.p, spec.width);
    const double A = spec.amplitude;
    for (std::size_t k = 0; k < spec.width; ++k) {
        const std::uint64_t s = spec.sigma[k] % spec.p;
        const double a = spec.phases_u[k], b = spec.phases_v[k];
        for (std::size_t i = 0; i < spec.p; ++i) {
            const double base = angle(s * i, spec.p);
            m.U(k, i) = A * std::cos(base + a);
            m.V(k, i) = A * std::cos(base + b);
            m.W(i, k) = A * std::cos(-base - a - b);
        }
    }
    return m;
}

double boxed_term(const AnalyticSpec& spec, std::int64_t x) {
    const auto p = static_cast<std::int64_t>(spec.p);
    const auto r = static_cast<std::uint64_t>(((x % p) + p) % p);
    double s = 0.0;
    for (auto sigma : spec.sigma) s += std::cos(angle((sigma % spec.p) * r, spec.p));
    return s / static_cast<double>(spec.width);
}

AnalyticReport verify_analytic(const ModelParams& params, Activation activation) {
    if (activation != Activation::Quadratic)
        throw ConfigError("verify_analytic: the closed form holds only for the quadratic activation");
    const ExampleTable table = generate_table({TaskOp::Add, static_cast<std::uint32_t>(params.p)});
    HyperKinds hyper;
    hyper.activation = activation;
    const ForwardCache cache = forward(params, table.pairs, Mode::Eval, hyper);
    const auto pred = predictions(cache.logits);
    AnalyticReport r;
    r.max_offtarget_logit = -INFINITY;
    std::size_t hits = 0;
    double target_sum = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto target = table.true_labels[i];
        hits += pred[i] == target;
        const auto row = cache.logits.row(i);
        target_sum += row[target];
        for (std::size_t q = 0; q < params.p; ++q)
            if (q != target) r.max_offtarget_logit = std::max(r.max_offtarget_logit, row[q]);
    }
    r.accuracy = static_cast<double>(hits) / static_cast<double>(table.size());
    r.mean_target_logit = target_sum / static_cast<double>(table.size());
    return r;
}

}  // namespace grokbench
