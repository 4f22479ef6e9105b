// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Phase labels from final accuracies:
//
//                      test >= 0.90                       test < 0.90
//   train >= 0.90      Coexistence                        Memorization
//   train in band      PartialInversion (>= 1.05 - xi)    Forgetting if test ever reached 0.90,
//   train below band   FullInversion    (<  1.05 - xi)    otherwise Confusion
//
// When 1.05 - xi >= 0.90 the partial band is empty and the whole
// test >= 0.90, train < 0.90 region is FullInversion (flagged degenerate).

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grokbench/optim.hpp"

namespace grokbench {

/// Declaration order doubles as the majority-vote tie-break: the later
/// (more inverted) label wins a tie.
enum class PhaseLabel { Confusion, Forgetting, Memorization, Coexistence, PartialInversion, FullInversion };

std::string to_string(PhaseLabel label);
PhaseLabel parse_phase_label(const std::string& text);
char phase_code(PhaseLabel label);

struct PhaseThresholds {
    double accuracy = 0.90;
    double inversion_offset = 1.05;
};

struct Classification {
    PhaseLabel label = PhaseLabel::Confusion;
    bool degenerate_band = false;
};

Classification classify(double final_train_acc, double final_test_acc, double xi, double max_hist_test_acc,
                        const PhaseThresholds& thresholds = {});
/// Final accuracies and the historical maximum test accuracy come from `history`.
Classification classify(const TrainHistory& history, double xi, const PhaseThresholds& thresholds = {});

struct PhasePoint {
    double alpha = 0.0;
    double xi = 0.0;
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
    double max_hist_test_acc = 0.0;
    PhaseLabel label = PhaseLabel::Confusion;
    std::uint64_t seed = 0;
};

struct DiagramCell {
    double alpha = 0.0;
    double xi = 0.0;
    std::optional<PhaseLabel> label;  // nullopt: no point landed in this cell
    std::map<PhaseLabel, std::size_t> votes;
};

struct PhaseDiagram {
    std::vector<double> alphas;
    std::vector<double> xis;
    std::vector<DiagramCell> cells;  // alpha-major: cells[a * xis.size() + x]

    const DiagramCell& at(std::size_t alpha_index, std::size_t xi_index) const;
};

/// Majority vote per (alpha, xi) cell. Points match a grid value within 1e-9.
PhaseDiagram assemble_diagram(const std::vector<PhasePoint>& points, const std::vector<double>& alphas,
                              const std::vector<double>& xis);

// alpha,xi,label,votes   (votes as Label:count;Label:count, label "gap" when empty)
void write_diagram_csv(std::ostream& os, const PhaseDiagram& diagram);
/// One row per alpha, one character per xi: C P F M G(forgetting) X(confusion), '.' for gaps.
void write_diagram_text(std::ostream& os, const PhaseDiagram& diagram);

}  // namespace grokbench
