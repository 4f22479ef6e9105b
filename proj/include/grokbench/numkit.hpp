// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major matrices, a counter-based RNG, a deterministic matrix
// product and a direct-summation DFT. Everything is 64-bit floating point.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace grokbench {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::vector<double> column(std::size_t c) const;

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    void fill(double v);
    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// SplitMix64 run as a counter-based generator: output i is
/// mix64(key + i * 0x9E3779B97F4A7C15). The integer stream is identical on
/// every platform; fork() derives a child key from (key, counter, label).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : key_(seed) {}

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n), unbiased (Lemire's multiply-shift with rejection).
    std::uint64_t uniform_index(std::uint64_t n);
    /// Standard normal via the cosine branch of Box-Muller (two uniforms per sample).
    double normal();

    Rng fork(std::string_view label) const;

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
/// Order-sensitive 64-bit hash of a word sequence (SplitMix64 finalizer chain).
std::uint64_t hash64(std::initializer_list<std::uint64_t> words);
std::uint64_t hash64(std::string_view text);

/// c = a * b. Every output element is the fused-multiply-add chain over k in
/// ascending order starting from 0, regardless of blocking or SIMD path, so
/// results are reproducible bit for bit.
Matrix matmul(const Matrix& a, const Matrix& b);
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);

Matrix transpose(const Matrix& a);
void transpose_into(const Matrix& a, Matrix& out);

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double std);

double frobenius_norm(const Matrix& a);
double frobenius_norm(std::span<const double> v);

/// Twiddle tables for length-p direct DFT evaluation.
class DftTable {
public:
    explicit DftTable(std::size_t p);

    std::size_t length() const { return p_; }
    /// |sum_j v_j exp(-2 pi i j k / p)| for k = 0..p-1.
    void magnitudes(std::span<const double> v, std::span<double> out) const;

private:
    std::size_t p_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

std::vector<double> dft_magnitudes(std::span<const double> v);

}  // namespace grokbench
