// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form periodic weights for modular addition with phi(x) = x^2:
//
//   U_ki = A cos(2 pi i s_k / p + a_k)
//   V_kj = A cos(2 pi j s_k / p + b_k)
//   W_qk = A cos(-2 pi q s_k / p - a_k - b_k)
//
// Expanding W (U e_m + V e_n)^2 leaves (A^3 / 2) sum_k cos(2 pi s_k (m+n-q) / p)
// plus terms carrying random phases, which average out as N grows. With
// A^3 = 2/N the surviving term is the modular Kronecker delta of m+n-q.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "grokbench/model.hpp"
#include "grokbench/numkit.hpp"

namespace grokbench {

enum class FrequencyAssignment {
    Permutation,  // s_k = sigma(k), a random permutation of {0, ..., N-1}
    Balanced,     // nonzero residues 1..p-1 in turn, counts differ by at most one
};

std::string to_string(FrequencyAssignment f);
FrequencyAssignment parse_frequency_assignment(const std::string& text);

struct AnalyticSpec {
    std::size_t p = 97;
    std::size_t width = 500;
    FrequencyAssignment assignment = FrequencyAssignment::Permutation;
    std::vector<std::uint64_t> sigma;
    std::vector<double> phases_u;  // in (-pi, pi]
    std::vector<double> phases_v;
    double amplitude = 0.0;

    void validate() const;
};

/// (2/N)^(1/3), so the product of the three layer amplitudes is 2/N.
double default_analytic_amplitude(std::size_t width);

/// 1 iff x is an integer multiple of p (negative x included).
int modular_delta(std::int64_t x, std::int64_t p);

/// Draws sigma (Permutation only, fork "sigma") and the phases (fork "phases").
AnalyticSpec make_analytic_spec(std::size_t p, std::size_t width, FrequencyAssignment assignment, Rng& rng);

ModelParams build_analytic_params(const AnalyticSpec& spec);

/// (1/N) sum_k cos(2 pi s_k x / p), the phase-free part of every logit.
double boxed_term(const AnalyticSpec& spec, std::int64_t x);

struct AnalyticReport {
    double accuracy = 0.0;
    double max_offtarget_logit = 0.0;
    double mean_target_logit = 0.0;
};

/// Evaluates the network on all p^2 pairs against (m + n) mod p.
/// Throws ConfigError unless the activation is quadratic.
AnalyticReport verify_analytic(const ModelParams& params, Activation activation = Activation::Quadratic);

}  // namespace grokbench
