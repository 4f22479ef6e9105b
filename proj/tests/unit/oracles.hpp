// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations used as test oracles. They are written for
// clarity, share no code with the library beyond the Matrix container, and
// are deliberately slow.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "grokbench/model.hpp"

namespace oracle {

using grokbench::Matrix;

// Textbook SplitMix64, stateful form.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// c_ij = fma chain over k = 0, 1, ... starting from +0.
inline Matrix matmul_fma_chain(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc = std::fma(a(i, k), b(k, j), acc);
            c(i, j) = acc;
        }
    return c;
}

inline std::vector<double> dft_abs(const std::vector<double>& v) {
    const std::size_t p = v.size();
    std::vector<double> out(p);
    for (std::size_t k = 0; k < p; ++k) {
        std::complex<long double> s = 0;
        for (std::size_t j = 0; j < p; ++j) {
            const long double th = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((j * k) % p) /
                                   static_cast<long double>(p);
            s += static_cast<long double>(v[j]) * std::polar(1.0L, th);
        }
        out[k] = static_cast<double>(std::abs(s));
    }
    return out;
}

inline double ipr(const std::vector<double>& v, int r = 2) {
    const auto w = dft_abs(v);
    long double num = 0, den = 0;
    for (double x : w) {
        num += std::pow(static_cast<long double>(x), 2 * r);
        den += static_cast<long double>(x) * x;
    }
    return static_cast<double>(num / std::pow(den, r));
}

// Logits of the plain network (no norm, no dropout) evaluated one example
// at a time straight from the formula.
inline std::vector<double> logits(const grokbench::ModelParams& p, grokbench::Activation act, std::uint32_t m,
                                  std::uint32_t n) {
    std::vector<double> f(p.p, 0.0);
    for (std::size_t k = 0; k < p.width; ++k) {
        const double h = p.U(k, m) + p.V(k, n);
        const double a = act == grokbench::Activation::Quadratic ? h * h : (h > 0 ? h : 0.0);
        for (std::size_t q = 0; q < p.p; ++q) f[q] += p.W(q, k) * a;
    }
    return f;
}

}  // namespace oracle
