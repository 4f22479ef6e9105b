// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Inverse participation ratio of weight vectors in the Fourier domain.
//
//   IPR_r(v) = sum_k |v~_k|^{2r} / (sum_k |v~_k|^2)^r
//
// which lies in [1/p, 1]: 1/p for a flat spectrum, 1/2 for a single real
// cosine (two mirror peaks), 1 for a constant vector. A neuron k is scored
// by the mean over row k of U, row k of V and column k of W.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "grokbench/model.hpp"
#include "grokbench/numkit.hpp"

namespace grokbench {

/// Neurons below this combined IPR are treated as memorizing when a single
/// cut is needed; random vectors sit near 2/p, pure cosines at 0.5.
inline constexpr double kMemorizingIprThreshold = 0.3;
inline constexpr std::size_t kDefaultHistogramBins = 50;

/// nullopt for an all-zero vector (no spectrum).
std::optional<double> ipr_of_vector(std::span<const double> v, int r = 2);
std::optional<double> ipr_of_vector(const DftTable& table, std::span<const double> v, int r = 2);

struct NeuronIpr {
    double ipr_u = 0.0;
    double ipr_v = 0.0;
    double ipr_w = 0.0;
    double ipr_combined = 0.0;
    bool dead = false;  // some attached vector is all zero; the ipr fields are NaN
};

struct IprReport {
    std::vector<NeuronIpr> per_neuron;
    double mean_ipr = 0.0;  // over live neurons; NaN if none
    int r = 2;

    std::size_t live_count() const;
};

IprReport per_neuron_ipr(const ModelParams& params, int r = 2);

/// Counts of live-neuron combined IPR in `bins` equal bins on [0, 1].
std::vector<std::size_t> ipr_histogram(const IprReport& report, std::size_t bins = kDefaultHistogramBins);

struct Correlation {
    double pearson = 0.0;
    double spearman = 0.0;
    bool degenerate = false;  // a zero-variance input; both values NaN
};

Correlation pearson_spearman(std::span<const double> x, std::span<const double> y);

/// Correlation of |gamma_k| with the combined IPR over live neurons.
Correlation bn_ipr_correlation(std::span<const double> gamma, const IprReport& report);

// neuron,ipr_u,ipr_v,ipr_w,ipr_combined,dead
void write_ipr_csv(std::ostream& os, const IprReport& report);

}  // namespace grokbench
