// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "grokbench/error.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

std::optional<double> ipr_of_vector(const DftTable& table, std::span<const double> v, int r) {
    if (r < 1) throw ConfigError("ipr_of_vector: r must be >= 1");
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) return std::nullopt;
    std::vector<double> mag(v.size());
    table.magnitudes(v, mag);
    double num = 0.0, den = 0.0;
    for (double w : mag) {
        const double w2 = w * w;
        den += w2;
        num += std::pow(w2, r);
    }
    if (den == 0.0) return std::nullopt;
    return num / std::pow(den, r);
}

std::optional<double> ipr_of_vector(std::span<const double> v, int r) {
    if (v.empty()) throw ConfigError("ipr_of_vector: empty input");
    return ipr_of_vector(DftTable(v.size()), v, r);
}

std::size_t IprReport::live_count() const {
    return static_cast<std::size_t>(
        std::count_if(per_neuron.begin(), per_neuron.end(), [](const NeuronIpr& n) { return !n.dead; }));
}

IprReport per_neuron_ipr(const ModelParams& params, int r) {
    params.validate();
    const DftTable table(params.p);
    IprReport report;
    report.r = r;
    report.per_neuron.resize(params.width);
    const double nan = std::nan("");
    double total = 0.0;
    std::size_t live = 0;
    std::vector<double> w_col(params.p);
    for (std::size_t k = 0; k < params.width; ++k) {
        for (std::size_t q = 0; q < params.p; ++q) w_col[q] = params.W(q, k);
        const auto u = ipr_of_vector(table, params.U.row(k), r);
        const auto v = ipr_of_vector(table, params.V.row(k), r);
        const auto w = ipr_of_vector(table, w_col, r);
        NeuronIpr& n = report.per_neuron[k];
        if (!u || !v || !w) {
            n = {nan, nan, nan, nan, true};
            continue;
        }
        n = {*u, *v, *w, (*u + *v + *w) / 3.0, false};
        total += n.ipr_combined;
        ++live;
    }
    report.mean_ipr = live ? total / static_cast<double>(live) : nan;
    return report;
}

std::vector<std::size_t> ipr_histogram(const IprReport& report, std::size_t bins) {
    if (bins < 1) throw ConfigError("ipr_histogram: bins must be >= 1");
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& n : report.per_neuron) {
        if (n.dead) continue;
        const double x = std::clamp(n.ipr_combined, 0.0, 1.0);
        const auto bin = std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
        ++counts[bin];
    }
    return counts;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j);
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

Correlation pearson_spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("correlation: length mismatch");
    if (x.size() < 3) throw ConfigError("correlation: needs at least 3 samples");
    const auto p = pearson(x, y);
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const auto s = pearson(rx, ry);
    if (!p || !s) return {std::nan(""), std::nan(""), true};
    return {*p, *s, false};
}

Correlation bn_ipr_correlation(std::span<const double> gamma, const IprReport& report) {
    if (gamma.size() != report.per_neuron.size()) throw ShapeError("bn_ipr_correlation: gamma length != width");
    std::vector<double> g, ipr;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        if (report.per_neuron[k].dead) continue;
        g.push_back(std::abs(gamma[k]));
        ipr.push_back(report.per_neuron[k].ipr_combined);
    }
    if (g.size() < 3) throw ConfigError("bn_ipr_correlation: fewer than 3 live neurons");
    return pearson_spearman(g, ipr);
}

void write_ipr_csv(std::ostream& os, const IprReport& report) {
    os << "neuron,ipr_u,ipr_v,ipr_w,ipr_combined,dead\n";
    for (std::size_t k = 0; k < report.per_neuron.size(); ++k) {
        const auto& n = report.per_neuron[k];
        os << k << ',' << format_double(n.ipr_u) << ',' << format_double(n.ipr_v) << ','
           << format_double(n.ipr_w) << ',' << format_double(n.ipr_combined) << ',' << (n.dead ? 1 : 0) << '\n';
    }
}

}  // namespace grokbench
