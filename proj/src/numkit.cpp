// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "grokbench/error.hpp"

namespace grokbench {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
        std::copy(row.begin(), row.end(), m.values_.begin() + static_cast<std::ptrdiff_t>(i * c));
        ++i;
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Matrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Rng

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t hash64(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (std::uint64_t w : words) h = mix64(h + kGolden + w);
    return h;
}

std::uint64_t hash64(std::string_view text) {
    // FNV-1a, then finalized.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return mix64(h);
}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw ConfigError("Rng::uniform_index: empty range");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::fork(std::string_view label) const {
    return Rng(hash64({key_, counter_, hash64(label)}), 0);
}

// ---------------------------------------------------------------------------
// matmul

namespace {

// Rows [i0, i1) x cols [j0, j1) of c += a[:, k0:k1] * b[k0:k1, :], scalar.
void gemm_scalar_tile(const double* a, const double* b, double* c, std::size_t K, std::size_t N,
                      std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1,
                      std::size_t k0, std::size_t k1) {
    for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) {
            double s = c[i * N + j];
            for (std::size_t k = k0; k < k1; ++k) s = std::fma(a[i * K + k], b[k * N + j], s);
            c[i * N + j] = s;
        }
    }
}

#if defined(__AVX512F__)
constexpr std::size_t kRowBlock = 6;

void gemm_block_avx512(const double* a, const double* b, double* c, std::size_t M, std::size_t K,
                       std::size_t N, std::size_t k0, std::size_t k1) {
    std::size_t i = 0;
    for (; i + kRowBlock <= M; i += kRowBlock) {
        std::size_t j = 0;
        for (; j + 16 <= N; j += 16) {
            __m512d lo[kRowBlock];
            __m512d hi[kRowBlock];
            for (std::size_t r = 0; r < kRowBlock; ++r) {
                lo[r] = _mm512_loadu_pd(c + (i + r) * N + j);
                hi[r] = _mm512_loadu_pd(c + (i + r) * N + j + 8);
            }
            const double* ap = a + i * K;
            for (std::size_t k = k0; k < k1; ++k) {
                const double* bp = b + k * N + j;
                const __m512d b0 = _mm512_loadu_pd(bp);
                const __m512d b1 = _mm512_loadu_pd(bp + 8);
                for (std::size_t r = 0; r < kRowBlock; ++r) {
                    const __m512d av = _mm512_set1_pd(ap[r * K + k]);
                    lo[r] = _mm512_fmadd_pd(av, b0, lo[r]);
                    hi[r] = _mm512_fmadd_pd(av, b1, hi[r]);
                }
            }
            for (std::size_t r = 0; r < kRowBlock; ++r) {
                _mm512_storeu_pd(c + (i + r) * N + j, lo[r]);
                _mm512_storeu_pd(c + (i + r) * N + j + 8, hi[r]);
            }
        }
        gemm_scalar_tile(a, b, c, K, N, i, i + kRowBlock, j, N, k0, k1);
    }
    gemm_scalar_tile(a, b, c, K, N, i, M, 0, N, k0, k1);
}
#else
void gemm_block_portable(const double* a, const double* b, double* c, std::size_t M, std::size_t K,
                         std::size_t N, std::size_t k0, std::size_t k1) {
    for (std::size_t i = 0; i < M; ++i) {
        double* cr = c + i * N;
        for (std::size_t k = k0; k < k1; ++k) {
            const double av = a[i * K + k];
            const double* br = b + k * N;
            for (std::size_t j = 0; j < N; ++j) cr[j] = std::fma(av, br[j], cr[j]);
        }
    }
}
#endif

}  // namespace

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    if (&out == &a || &out == &b) throw ShapeError("matmul_into: output aliases an operand");
    const std::size_t M = a.rows(), K = a.cols(), N = b.cols();
    if (out.rows() != M || out.cols() != N) out = Matrix(M, N);
    out.fill(0.0);
    // K is blocked so the active panel of b stays cache resident; each block
    // continues the per-element chain, which leaves the k order intact.
    constexpr std::size_t kDepthBlock = 128;
    for (std::size_t k0 = 0; k0 < K; k0 += kDepthBlock) {
        const std::size_t k1 = std::min(K, k0 + kDepthBlock);
#if defined(__AVX512F__)
        gemm_block_avx512(a.data(), b.data(), out.data(), M, K, N, k0, k1);
#else
        gemm_block_portable(a.data(), b.data(), out.data(), M, K, N, k0, k1);
#endif
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_into(a, b, out);
    return out;
}

void transpose_into(const Matrix& a, Matrix& out) {
    if (out.rows() != a.cols() || out.cols() != a.rows()) out = Matrix(a.cols(), a.rows());
    constexpr std::size_t kTile = 32;
    for (std::size_t r0 = 0; r0 < a.rows(); r0 += kTile) {
        for (std::size_t c0 = 0; c0 < a.cols(); c0 += kTile) {
            const std::size_t r1 = std::min(a.rows(), r0 + kTile);
            const std::size_t c1 = std::min(a.cols(), c0 + kTile);
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) out(c, r) = a(r, c);
        }
    }
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    transpose_into(a, out);
    return out;
}

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double std) {
    if (!(std > 0.0) || !std::isfinite(std)) throw ConfigError("gaussian_matrix: std must be > 0");
    Matrix m(rows, cols);
    for (double& x : m.values()) x = std * rng.normal();
    return m;
}

double frobenius_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double frobenius_norm(const Matrix& a) { return frobenius_norm(a.values()); }

// ---------------------------------------------------------------------------
// DFT

DftTable::DftTable(std::size_t p) : p_(p), cos_(p), sin_(p) {
    if (p == 0) throw ConfigError("DftTable: length must be >= 1");
    for (std::size_t t = 0; t < p; ++t) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(p);
        cos_[t] = std::cos(angle);
        sin_[t] = std::sin(angle);
    }
}

void DftTable::magnitudes(std::span<const double> v, std::span<double> out) const {
    if (v.size() != p_ || out.size() != p_) throw ShapeError("DftTable::magnitudes: length mismatch");
    for (std::size_t k = 0; k < p_; ++k) {
        double re = 0.0, im = 0.0;
        std::size_t t = 0;  // (j * k) mod p
        for (std::size_t j = 0; j < p_; ++j) {
            re += v[j] * cos_[t];
            im -= v[j] * sin_[t];
            t += k;
            if (t >= p_) t -= p_;
        }
        out[k] = std::hypot(re, im);
    }
}

std::vector<double> dft_magnitudes(std::span<const double> v) {
    if (v.empty()) throw ConfigError("dft_magnitudes: empty input");
    DftTable table(v.size());
    std::vector<double> out(v.size());
    table.magnitudes(v, out);
    return out;
}

}  // namespace grokbench
