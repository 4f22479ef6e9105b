// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grokbench/numkit.hpp"

namespace grokbench {

enum class TaskOp { Add, Mul };

std::string to_string(TaskOp op);
TaskOp parse_task_op(const std::string& text);

struct TaskSpec {
    TaskOp op = TaskOp::Add;
    std::uint32_t p = 97;

    std::uint32_t apply(std::uint32_t m, std::uint32_t n) const;
    bool operator==(const TaskSpec&) const = default;
};

struct Example {
    std::uint32_t m = 0;
    std::uint32_t n = 0;
};

/// All p^2 ordered pairs of a modular task with their labels. Columns are
/// parallel arrays indexed by example; example i is the pair (i / p, i % p).
struct ExampleTable {
    TaskSpec task;
    std::vector<Example> pairs;
    std::vector<std::uint32_t> true_labels;
    std::vector<std::uint32_t> assigned_labels;
    std::vector<bool> corrupted;
    std::vector<bool> in_train;
    double alpha = 0.0;
    double xi = 0.0;
    bool is_split = false;

    std::size_t size() const { return pairs.size(); }
    std::size_t train_size() const;
};

struct Subsets {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> test;
    std::vector<std::uint32_t> train_corrupted;
    std::vector<std::uint32_t> train_clean;
};

/// Round half to even, independent of the floating-point environment.
std::int64_t round_half_even(double x);

ExampleTable generate_table(const TaskSpec& task);
/// Marks round_half_even(alpha * p^2) uniformly chosen examples as training data.
ExampleTable split(const ExampleTable& table, double alpha, Rng& rng);
/// Picks round_half_even(xi * |train|) training examples without replacement
/// and draws each a label uniformly from [0, p). The draw may coincide with
/// the true label; `corrupted` is set only when it differs.
ExampleTable corrupt(const ExampleTable& table, double xi, Rng& rng);

Matrix one_hot(std::span<const std::uint32_t> labels, std::uint32_t p);
Subsets subsets(const ExampleTable& table);

/// Gathers pairs / assigned labels / true labels for an index list.
std::vector<Example> gather_pairs(const ExampleTable& table, std::span<const std::uint32_t> idx);
std::vector<std::uint32_t> gather_assigned(const ExampleTable& table, std::span<const std::uint32_t> idx);
std::vector<std::uint32_t> gather_true(const ExampleTable& table, std::span<const std::uint32_t> idx);

/// Fingerprint over every column; used to check a regenerated table matches.
std::uint64_t table_hash(const ExampleTable& table);

// Text format:
//   # grokbench-table op=<add|mul> p=<p> alpha=<a> xi=<x> split=<0|1>
//   m,n,true,assigned,corrupted,in_train
//   <one record per example>
void write_table(std::ostream& os, const ExampleTable& table);
ExampleTable read_table(std::istream& is);

}  // namespace grokbench
