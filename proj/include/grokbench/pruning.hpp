// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "grokbench/dataset.hpp"
#include "grokbench/model.hpp"
#include "grokbench/optim.hpp"
#include "grokbench/spectral.hpp"

namespace grokbench {

enum class PruneOrder { LowFirst, HighFirst };

std::string to_string(PruneOrder order);
PruneOrder parse_prune_order(const std::string& text);

/// Zeroes row k of U and V, column k of W and (if present) gamma_k, beta_k.
void prune_neuron(ModelParams& params, std::size_t k);

/// Neuron order for pruning, fixed from one IPR report. Dead neurons come
/// first (removing them is a no-op); IPR ties go to the lower index.
std::vector<std::size_t> prune_order(const IprReport& report, PruneOrder order);

struct PruneRow {
    std::size_t pruned_count = 0;
    Metrics metrics;
};

struct PruneTrace {
    PruneOrder order = PruneOrder::LowFirst;
    std::vector<std::size_t> neuron_order;
    std::vector<PruneRow> rows;
};

/// Prunes one neuron at a time in IPR order (computed once on the unpruned
/// model) and evaluates every `stride`-th count plus the final count N.
/// BatchNorm running statistics stay frozen.
PruneTrace prune_sweep(const ModelParams& params, const ExampleTable& table, const HyperKinds& hyper,
                       PruneOrder order, std::size_t stride = 1);

struct MaxPrunable {
    std::size_t prunable = 0;
    std::size_t survivors = 0;
    bool unpruned_below_floor = false;
};

/// Largest c such that pruning the 1, ..., c lowest-IPR neurons keeps test
/// accuracy >= floor at every intermediate count.
MaxPrunable max_prunable(const ModelParams& params, const ExampleTable& table, const HyperKinds& hyper,
                         double floor);

// pruned_count,test_acc,train_acc,clean_train_acc,corrupted_train_acc,train_loss,test_loss
void write_prune_csv(std::ostream& os, const PruneTrace& trace);

}  // namespace grokbench
