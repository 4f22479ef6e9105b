// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "grokbench/dataset.hpp"
#include "grokbench/error.hpp"

using namespace grokbench;

namespace {

ExampleTable make(double alpha, double xi, std::uint64_t seed, std::uint32_t p = 97) {
    Rng data(seed), noise(seed + 1000);
    return corrupt(split(generate_table({TaskOp::Add, p}), alpha, data), xi, noise);
}

}  // namespace

TEST_CASE("generate_table enumerates every pair with its label") {
    const auto add = generate_table({TaskOp::Add, 97});
    CHECK(add.size() == 9409);
    CHECK(add.true_labels[95 * 97 + 7] == 5);
    CHECK(add.pairs[95 * 97 + 7].m == 95);
    CHECK(add.pairs[95 * 97 + 7].n == 7);
    const auto mul = generate_table({TaskOp::Mul, 97});
    CHECK(mul.true_labels[3 * 97 + 5] == 15);

    std::vector<int> seen(97 * 97, 0);
    for (std::size_t i = 0; i < add.size(); ++i) {
        ++seen[add.pairs[i].m * 97 + add.pairs[i].n];
        CHECK(add.true_labels[i] == (add.pairs[i].m + add.pairs[i].n) % 97);
        CHECK(add.assigned_labels[i] == add.true_labels[i]);
        CHECK_FALSE(add.in_train[i]);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK_THROWS_AS(generate_table({TaskOp::Add, 1}), ConfigError);
}

TEST_CASE("round_half_even") {
    CHECK(round_half_even(4704.5) == 4704);
    CHECK(round_half_even(4705.5) == 4706);
    CHECK(round_half_even(2.4999) == 2);
    CHECK(round_half_even(2.5001) == 3);
    CHECK(round_half_even(0.0) == 0);
}

TEST_CASE("split sizes, partition and determinism") {
    Rng r1(1), r2(1);
    const auto base = generate_table({TaskOp::Add, 97});
    const auto a = split(base, 0.5, r1);
    const auto b = split(base, 0.5, r2);
    CHECK(a.train_size() == 4704);
    CHECK(a.in_train == b.in_train);
    const auto s = subsets(a);
    CHECK(s.train.size() + s.test.size() == 9409);
    std::vector<int> hit(9409, 0);
    for (auto i : s.train) ++hit[i];
    for (auto i : s.test) ++hit[i];
    CHECK(std::all_of(hit.begin(), hit.end(), [](int c) { return c == 1; }));

    Rng r3(2);
    CHECK(split(base, 0.5, r3).in_train != a.in_train);
    CHECK_THROWS_AS(split(base, 0.0, r1), ConfigError);
    CHECK_THROWS_AS(split(base, 1.0, r1), ConfigError);
}

TEST_CASE("corrupt with xi = 0 changes nothing") {
    const auto t = make(0.5, 0.0, 3);
    const auto s = subsets(t);
    CHECK(s.train_corrupted.empty());
    CHECK(t.assigned_labels == t.true_labels);
}

TEST_CASE("corruption rate follows the binomial law") {
    // Each selected label coincides with the truth with probability 1/p.
    const auto t = make(0.5, 1.0, 4);
    const double n = 4704.0, q = 1.0 - 1.0 / 97.0;
    const double got = static_cast<double>(subsets(t).train_corrupted.size());
    CHECK(std::abs(got - n * q) <= 3.0 * std::sqrt(n * q * (1.0 - q)));

    const auto u = make(0.5, 0.35, 5);
    const double sel = static_cast<double>(round_half_even(0.35 * 4704));
    const double got35 = static_cast<double>(subsets(u).train_corrupted.size());
    CHECK(std::abs(got35 - sel * q) <= 3.0 * std::sqrt(sel * q * (1.0 - q)));
}

TEST_CASE("corruption invariants hold across seeds") {
    std::size_t mismatched = 0, selected = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto t = make(0.3, 0.4, seed, 31);
        const auto s = subsets(t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t.in_train[i]) CHECK(t.assigned_labels[i] == t.true_labels[i]);
            if (t.corrupted[i]) CHECK(t.in_train[i]);
            CHECK(t.corrupted[i] == (t.assigned_labels[i] != t.true_labels[i]));
        }
        CHECK(s.train_clean.size() + s.train_corrupted.size() == s.train.size());
        mismatched += s.train_corrupted.size();
        selected += static_cast<std::size_t>(round_half_even(0.4 * static_cast<double>(s.train.size())));
    }
    const double q = 1.0 - 1.0 / 31.0;
    const double n = static_cast<double>(selected);
    CHECK(std::abs(static_cast<double>(mismatched) - n * q) <= 3.0 * std::sqrt(n * q * (1.0 - q)));
}

TEST_CASE("corrupt preconditions and determinism") {
    const auto base = generate_table({TaskOp::Add, 11});
    Rng rng(0);
    CHECK_THROWS_AS(corrupt(base, 0.2, rng), ConfigError);
    const auto s = split(base, 0.5, rng);
    CHECK_THROWS_AS(corrupt(s, 1.5, rng), ConfigError);
    CHECK_THROWS_AS(corrupt(s, -0.1, rng), ConfigError);
    CHECK(table_hash(make(0.5, 0.35, 9)) == table_hash(make(0.5, 0.35, 9)));
    CHECK(table_hash(make(0.5, 0.35, 9)) != table_hash(make(0.5, 0.35, 10)));
}

TEST_CASE("one_hot") {
    const std::vector<std::uint32_t> labels{0, 2, 1};
    const Matrix m = one_hot(labels, 3);
    CHECK(m == Matrix::from_rows({{1, 0, 0}, {0, 0, 1}, {0, 1, 0}}));
    const std::vector<std::uint32_t> bad{3};
    CHECK_THROWS_AS(one_hot(bad, 3), DataError);
}

TEST_CASE("table text round trip") {
    const auto t = make(0.4, 0.3, 12, 13);
    std::stringstream ss;
    write_table(ss, t);
    const auto back = read_table(ss);
    CHECK(table_hash(back) == table_hash(t));
    CHECK(back.alpha == t.alpha);
    CHECK(back.xi == t.xi);
    CHECK(back.is_split);

    std::istringstream truncated("# grokbench-table op=add p=3 alpha=0.5 xi=0 split=1\n"
                                 "m,n,true,assigned,corrupted,in_train\n0,0,0,0,0,1\n");
    CHECK_THROWS_AS(read_table(truncated), DataError);
    std::istringstream no_header("m,n,true\n");
    CHECK_THROWS_AS(read_table(no_header), DataError);
}
