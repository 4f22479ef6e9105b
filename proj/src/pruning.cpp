// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/pruning.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "grokbench/error.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

std::string to_string(PruneOrder order) { return order == PruneOrder::LowFirst ? "low" : "high"; }

PruneOrder parse_prune_order(const std::string& text) {
    if (text == "low") return PruneOrder::LowFirst;
    if (text == "high") return PruneOrder::HighFirst;
    throw ConfigError("unknown prune order '" + text + "' (expected low|high)");
}

void prune_neuron(ModelParams& params, std::size_t k) {
    if (k >= params.width) throw ConfigError("prune_neuron: neuron index out of range");
    for (std::size_t i = 0; i < params.p; ++i) {
        params.U(k, i) = 0.0;
        params.V(k, i) = 0.0;
        params.W(i, k) = 0.0;
    }
    if (params.norm) {
        params.norm->gamma[k] = 0.0;
        params.norm->beta[k] = 0.0;
    }
}

std::vector<std::size_t> prune_order(const IprReport& report, PruneOrder order) {
    const auto& n = report.per_neuron;
    std::vector<std::size_t> idx(n.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (n[a].dead != n[b].dead) return n[a].dead;
        if (n[a].dead) return false;
        return order == PruneOrder::LowFirst ? n[a].ipr_combined < n[b].ipr_combined
                                             : n[a].ipr_combined > n[b].ipr_combined;
    });
    return idx;
}

PruneTrace prune_sweep(const ModelParams& params, const ExampleTable& table, const HyperKinds& hyper,
                       PruneOrder order, std::size_t stride) {
    if (stride == 0) throw ConfigError("prune_sweep: stride must be >= 1");
    const Subsets sets = subsets(table);
    PruneTrace trace;
    trace.order = order;
    trace.neuron_order = prune_order(per_neuron_ipr(params), order);
    ModelParams pruned = params;
    trace.rows.push_back({0, evaluate(pruned, table, sets, hyper)});
    for (std::size_t c = 1; c <= params.width; ++c) {
        prune_neuron(pruned, trace.neuron_order[c - 1]);
        if (c % stride == 0 || c == params.width) trace.rows.push_back({c, evaluate(pruned, table, sets, hyper)});
    }
    return trace;
}

namespace {

double test_accuracy(const ModelParams& params, const std::vector<Example>& pairs,
                     const std::vector<std::uint32_t>& labels, const HyperKinds& hyper) {
    const ForwardCache cache = forward(params, pairs, Mode::Eval, hyper);
    return accuracy(cache.logits, labels);
}

}  // namespace

MaxPrunable max_prunable(const ModelParams& params, const ExampleTable& table, const HyperKinds& hyper,
                         double floor) {
    if (!(floor >= 0.0 && floor <= 1.0)) throw ConfigError("max_prunable: floor must lie in [0, 1]");
    const Subsets sets = subsets(table);
    if (sets.test.empty()) throw ConfigError("max_prunable: table has no test examples");
    const auto pairs = gather_pairs(table, sets.test);
    const auto labels = gather_true(table, sets.test);
    const auto order = prune_order(per_neuron_ipr(params), PruneOrder::LowFirst);

    MaxPrunable out;
    out.survivors = params.width;
    if (test_accuracy(params, pairs, labels, hyper) < floor) {
        out.unpruned_below_floor = true;
        return out;
    }
    ModelParams pruned = params;
    for (std::size_t c = 1; c <= params.width; ++c) {
        prune_neuron(pruned, order[c - 1]);
        if (test_accuracy(pruned, pairs, labels, hyper) < floor) break;
        out.prunable = c;
    }
    out.survivors = params.width - out.prunable;
    return out;
}

void write_prune_csv(std::ostream& os, const PruneTrace& trace) {
    os << "pruned_count,test_acc,train_acc,clean_train_acc,corrupted_train_acc,train_loss,test_loss\n";
    for (const auto& r : trace.rows) {
        const Metrics& m = r.metrics;
        os << r.pruned_count << ',' << format_double(m.test_acc) << ',' << format_double(m.train_acc) << ','
           << format_double(m.train_acc_clean) << ',' << format_double(m.train_acc_corrupted) << ','
           << format_double(m.train_loss) << ',' << format_double(m.test_loss) << '\n';
    }
}

}  // namespace grokbench
