// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string_view>

#include "grokbench/error.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

std::string to_string(TaskOp op) { return op == TaskOp::Add ? "add" : "mul"; }

TaskOp parse_task_op(const std::string& text) {
    if (text == "add") return TaskOp::Add;
    if (text == "mul") return TaskOp::Mul;
    throw ConfigError("unknown task op '" + text + "' (expected add|mul)");
}

std::uint32_t TaskSpec::apply(std::uint32_t m, std::uint32_t n) const {
    const std::uint64_t r = op == TaskOp::Add ? std::uint64_t{m} + n : std::uint64_t{m} * n;
    return static_cast<std::uint32_t>(r % p);
}

std::size_t ExampleTable::train_size() const {
    return static_cast<std::size_t>(std::count(in_train.begin(), in_train.end(), true));
}

std::int64_t round_half_even(double x) {
    const double lower = std::floor(x);
    const double frac = x - lower;
    auto r = static_cast<std::int64_t>(lower);
    if (frac > 0.5) return r + 1;
    if (frac < 0.5) return r;
    return (r % 2 == 0) ? r : r + 1;
}

ExampleTable generate_table(const TaskSpec& task) {
    if (task.p < 2) throw ConfigError("task modulus p must be >= 2");
    ExampleTable t;
    t.task = task;
    const std::size_t count = std::size_t{task.p} * task.p;
    t.pairs.reserve(count);
    t.true_labels.reserve(count);
    for (std::uint32_t m = 0; m < task.p; ++m) {
        for (std::uint32_t n = 0; n < task.p; ++n) {
            t.pairs.push_back({m, n});
            t.true_labels.push_back(task.apply(m, n));
        }
    }
    t.assigned_labels = t.true_labels;
    t.corrupted.assign(count, false);
    t.in_train.assign(count, false);
    return t;
}

namespace {

// First `count` entries of `pool` become a uniform random sample without
// replacement (partial Fisher-Yates).
void partial_shuffle(std::vector<std::uint32_t>& pool, std::size_t count, Rng& rng) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
}

}  // namespace

ExampleTable split(const ExampleTable& table, double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    ExampleTable t = table;
    const auto train_count = static_cast<std::size_t>(round_half_even(alpha * static_cast<double>(t.size())));
    std::vector<std::uint32_t> pool(t.size());
    std::iota(pool.begin(), pool.end(), 0u);
    partial_shuffle(pool, train_count, rng);
    t.in_train.assign(t.size(), false);
    for (std::size_t i = 0; i < train_count; ++i) t.in_train[pool[i]] = true;
    t.assigned_labels = t.true_labels;
    t.corrupted.assign(t.size(), false);
    t.alpha = alpha;
    t.xi = 0.0;
    t.is_split = true;
    return t;
}

ExampleTable corrupt(const ExampleTable& table, double xi, Rng& rng) {
    if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("xi must lie in [0, 1]");
    if (!table.is_split) throw ConfigError("corrupt: table must be split first");
    ExampleTable t = table;
    std::vector<std::uint32_t> train;
    for (std::uint32_t i = 0; i < t.size(); ++i)
        if (t.in_train[i]) train.push_back(i);
    const auto count = static_cast<std::size_t>(round_half_even(xi * static_cast<double>(train.size())));
    partial_shuffle(train, count, rng);
    t.assigned_labels = t.true_labels;
    t.corrupted.assign(t.size(), false);
    for (std::size_t s = 0; s < count; ++s) {
        const std::uint32_t i = train[s];
        const auto label = static_cast<std::uint32_t>(rng.uniform_index(t.task.p));
        t.assigned_labels[i] = label;
        t.corrupted[i] = label != t.true_labels[i];
    }
    t.xi = xi;
    return t;
}

Matrix one_hot(std::span<const std::uint32_t> labels, std::uint32_t p) {
    Matrix out(labels.size(), p);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= p) throw DataError("one_hot: label " + std::to_string(labels[i]) + " >= p");
        out(i, labels[i]) = 1.0;
    }
    return out;
}

Subsets subsets(const ExampleTable& table) {
    Subsets s;
    for (std::uint32_t i = 0; i < table.size(); ++i) {
        if (table.in_train[i]) {
            s.train.push_back(i);
            (table.corrupted[i] ? s.train_corrupted : s.train_clean).push_back(i);
        } else {
            s.test.push_back(i);
        }
    }
    return s;
}

std::vector<Example> gather_pairs(const ExampleTable& table, std::span<const std::uint32_t> idx) {
    std::vector<Example> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(table.pairs[i]);
    return out;
}

std::vector<std::uint32_t> gather_assigned(const ExampleTable& table, std::span<const std::uint32_t> idx) {
    std::vector<std::uint32_t> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(table.assigned_labels[i]);
    return out;
}

std::vector<std::uint32_t> gather_true(const ExampleTable& table, std::span<const std::uint32_t> idx) {
    std::vector<std::uint32_t> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(table.true_labels[i]);
    return out;
}

std::uint64_t table_hash(const ExampleTable& table) {
    std::uint64_t h = hash64({static_cast<std::uint64_t>(table.task.op), table.task.p, table.size()});
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::uint64_t flags = (table.corrupted[i] ? 1u : 0u) | (table.in_train[i] ? 2u : 0u);
        h = hash64({h, table.pairs[i].m, table.pairs[i].n, table.true_labels[i], table.assigned_labels[i], flags});
    }
    return h;
}

void write_table(std::ostream& os, const ExampleTable& table) {
    os << "# grokbench-table op=" << to_string(table.task.op) << " p=" << table.task.p
       << " alpha=" << format_double(table.alpha) << " xi=" << format_double(table.xi)
       << " split=" << (table.is_split ? 1 : 0) << "\n";
    os << "m,n,true,assigned,corrupted,in_train\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        os << table.pairs[i].m << ',' << table.pairs[i].n << ',' << table.true_labels[i] << ','
           << table.assigned_labels[i] << ',' << (table.corrupted[i] ? 1 : 0) << ','
           << (table.in_train[i] ? 1 : 0) << '\n';
    }
}

ExampleTable read_table(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# grokbench-table", 0) != 0)
        throw DataError("read_table: missing '# grokbench-table' header");
    ExampleTable t;
    for (const auto& field : split(line.substr(17), ' ')) {
        if (field.empty()) continue;
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw DataError("read_table: bad header field '" + field + "'");
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "op") t.task.op = parse_task_op(value);
        else if (key == "p") t.task.p = static_cast<std::uint32_t>(parse_int(value));
        else if (key == "alpha") t.alpha = parse_double(value);
        else if (key == "xi") t.xi = parse_double(value);
        else if (key == "split") t.is_split = parse_bool(value);
        else throw DataError("read_table: unknown header key '" + key + "'");
    }
    if (!std::getline(is, line) || trim(line) != "m,n,true,assigned,corrupted,in_train")
        throw DataError("read_table: missing column header");
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 6) throw DataError("read_table: expected 6 columns: '" + line + "'");
        const auto m = static_cast<std::uint32_t>(parse_int(cols[0]));
        const auto n = static_cast<std::uint32_t>(parse_int(cols[1]));
        const auto tr = static_cast<std::uint32_t>(parse_int(cols[2]));
        const auto as = static_cast<std::uint32_t>(parse_int(cols[3]));
        if (m >= t.task.p || n >= t.task.p || tr >= t.task.p || as >= t.task.p)
            throw DataError("read_table: value out of range in '" + line + "'");
        t.pairs.push_back({m, n});
        t.true_labels.push_back(tr);
        t.assigned_labels.push_back(as);
        t.corrupted.push_back(parse_bool(cols[4]));
        t.in_train.push_back(parse_bool(cols[5]));
    }
    if (t.size() != std::size_t{t.task.p} * t.task.p)
        throw DataError("read_table: expected p^2 records, got " + std::to_string(t.size()));
    return t;
}

}  // namespace grokbench
