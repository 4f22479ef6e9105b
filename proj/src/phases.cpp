// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/phases.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "grokbench/error.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

std::string to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::Confusion: return "Confusion";
        case PhaseLabel::Forgetting: return "Forgetting";
        case PhaseLabel::Memorization: return "Memorization";
        case PhaseLabel::Coexistence: return "Coexistence";
        case PhaseLabel::PartialInversion: return "PartialInversion";
        case PhaseLabel::FullInversion: return "FullInversion";
    }
    return "Confusion";
}

PhaseLabel parse_phase_label(const std::string& text) {
    for (auto l : {PhaseLabel::Confusion, PhaseLabel::Forgetting, PhaseLabel::Memorization, PhaseLabel::Coexistence,
                   PhaseLabel::PartialInversion, PhaseLabel::FullInversion})
        if (to_string(l) == text) return l;
    throw DataError("unknown phase label '" + text + "'");
}

char phase_code(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::Confusion: return 'X';
        case PhaseLabel::Forgetting: return 'G';
        case PhaseLabel::Memorization: return 'M';
        case PhaseLabel::Coexistence: return 'C';
        case PhaseLabel::PartialInversion: return 'P';
        case PhaseLabel::FullInversion: return 'F';
    }
    return '?';
}

namespace {

// Thresholds are decimal constants and 1.05 - xi is rarely exact in binary;
// accuracies are multiples of 1/|D|, far coarser than this slack.
constexpr double kSlack = 1e-9;

bool at_least(double value, double threshold) { return value >= threshold - kSlack; }

}  // namespace

Classification classify(double train, double test, double xi, double max_hist_test, const PhaseThresholds& t) {
    if (at_least(test, t.accuracy)) {
        if (at_least(train, t.accuracy)) return {PhaseLabel::Coexistence, false};
        const double line = t.inversion_offset - xi;
        if (at_least(line, t.accuracy)) return {PhaseLabel::FullInversion, true};
        return {at_least(train, line) ? PhaseLabel::PartialInversion : PhaseLabel::FullInversion, false};
    }
    if (at_least(train, t.accuracy)) return {PhaseLabel::Memorization, false};
    return {at_least(max_hist_test, t.accuracy) ? PhaseLabel::Forgetting : PhaseLabel::Confusion, false};
}

Classification classify(const TrainHistory& history, double xi, const PhaseThresholds& thresholds) {
    const HistoryRow& last = history.final_row();
    return classify(last.train_acc, last.test_acc, xi, history.max_test_acc(), thresholds);
}

const DiagramCell& PhaseDiagram::at(std::size_t a, std::size_t x) const { return cells.at(a * xis.size() + x); }

namespace {

std::optional<std::size_t> grid_index(const std::vector<double>& grid, double value) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - value) <= 1e-9) return i;
    return std::nullopt;
}

}  // namespace

PhaseDiagram assemble_diagram(const std::vector<PhasePoint>& points, const std::vector<double>& alphas,
                              const std::vector<double>& xis) {
    PhaseDiagram d;
    d.alphas = alphas;
    d.xis = xis;
    d.cells.resize(alphas.size() * xis.size());
    for (std::size_t a = 0; a < alphas.size(); ++a)
        for (std::size_t x = 0; x < xis.size(); ++x) {
            d.cells[a * xis.size() + x].alpha = alphas[a];
            d.cells[a * xis.size() + x].xi = xis[x];
        }
    for (const auto& pt : points) {
        const auto a = grid_index(alphas, pt.alpha);
        const auto x = grid_index(xis, pt.xi);
        if (!a || !x) throw DataError("assemble_diagram: point off the grid");
        ++d.cells[*a * xis.size() + *x].votes[pt.label];
    }
    for (auto& cell : d.cells) {
        std::size_t best = 0;
        for (const auto& [label, count] : cell.votes) {
            // map iterates in severity order, so >= hands ties to the later label
            if (count >= best) {
                best = count;
                cell.label = label;
            }
        }
    }
    return d;
}

void write_diagram_csv(std::ostream& os, const PhaseDiagram& d) {
    os << "alpha,xi,label,votes\n";
    for (const auto& cell : d.cells) {
        os << format_double(cell.alpha) << ',' << format_double(cell.xi) << ','
           << (cell.label ? to_string(*cell.label) : "gap") << ',';
        bool first = true;
        for (const auto& [label, count] : cell.votes) {
            os << (first ? "" : ";") << to_string(label) << ':' << count;
            first = false;
        }
        os << '\n';
    }
}

void write_diagram_text(std::ostream& os, const PhaseDiagram& d) {
    os << "alpha \\ xi";
    for (double xi : d.xis) os << ' ' << std::setw(4) << format_double(xi);
    os << '\n';
    for (std::size_t a = 0; a < d.alphas.size(); ++a) {
        os << std::setw(10) << format_double(d.alphas[a]);
        for (std::size_t x = 0; x < d.xis.size(); ++x) {
            const auto& cell = d.at(a, x);
            os << ' ' << std::setw(4) << (cell.label ? phase_code(*cell.label) : '.');
        }
        os << '\n';
    }
    os << "C=Coexistence P=PartialInversion F=FullInversion M=Memorization G=Forgetting X=Confusion .=gap\n";
}

}  // namespace grokbench
