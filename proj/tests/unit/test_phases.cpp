// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "grokbench/error.hpp"
#include "grokbench/phases.hpp"

using namespace grokbench;

namespace {

// Straight transcription of the decision table, kept apart from the library.
PhaseLabel oracle_label(double tr, double te, double xi, double hist) {
    const bool train_ok = tr >= 0.9, test_ok = te >= 0.9;
    if (train_ok && test_ok) return PhaseLabel::Coexistence;
    if (train_ok) return PhaseLabel::Memorization;
    if (test_ok) {
        const double line = 1.05 - xi;
        if (line < 0.9 && tr >= line) return PhaseLabel::PartialInversion;
        return PhaseLabel::FullInversion;
    }
    return hist >= 0.9 ? PhaseLabel::Forgetting : PhaseLabel::Confusion;
}

PhasePoint pt(double a, double x, PhaseLabel l) {
    PhasePoint p;
    p.alpha = a;
    p.xi = x;
    p.label = l;
    return p;
}

}  // namespace

TEST_CASE("classification examples") {
    CHECK(classify(0.98, 0.97, 0.2, 0.97).label == PhaseLabel::Coexistence);
    CHECK(classify(0.99, 0.10, 0.2, 0.12).label == PhaseLabel::Memorization);
    CHECK(classify(0.80, 0.95, 0.35, 0.95).label == PhaseLabel::PartialInversion);
    CHECK(classify(0.66, 0.95, 0.35, 0.95).label == PhaseLabel::FullInversion);
    CHECK(classify(0.95, 0.95, 0.35, 0.95).label == PhaseLabel::Coexistence);
    CHECK(classify(0.95, 0.40, 0.70, 0.40).label == PhaseLabel::Memorization);
    CHECK(classify(0.02, 0.02, 0.35, 0.99).label == PhaseLabel::Forgetting);
    CHECK(classify(0.02, 0.02, 0.35, 0.05).label == PhaseLabel::Confusion);
    CHECK(classify(0.30, 0.20, 0.30, 0.99).label == PhaseLabel::Forgetting);
    CHECK(classify(0.30, 0.20, 0.30, 0.50).label == PhaseLabel::Confusion);
}

TEST_CASE("boundaries are inclusive") {
    CHECK(classify(0.90, 0.90, 0.0, 0.9).label == PhaseLabel::Coexistence);
    CHECK(classify(0.8999999, 0.90, 0.5, 0.9).label == PhaseLabel::PartialInversion);
    CHECK(classify(0.55, 0.95, 0.5, 0.95).label == PhaseLabel::PartialInversion);
    CHECK(classify(0.5499, 0.95, 0.5, 0.95).label == PhaseLabel::FullInversion);
    CHECK(classify(0.1, 0.1, 0.5, 0.90).label == PhaseLabel::Forgetting);
    // 1.05 - 0.35 is 0.7000000000000001 in binary; the edge stays inclusive.
    CHECK(classify(0.70, 0.95, 0.35, 0.95).label == PhaseLabel::PartialInversion);
    CHECK(classify(0.6999, 0.95, 0.35, 0.95).label == PhaseLabel::FullInversion);
    CHECK(classify(0.5, 0.95, 0.15, 0.95).degenerate_band);
}

TEST_CASE("degenerate partial band at small xi") {
    const auto c = classify(0.5, 0.95, 0.1, 0.95);
    CHECK(c.label == PhaseLabel::FullInversion);
    CHECK(c.degenerate_band);
    CHECK_FALSE(classify(0.5, 0.95, 0.2, 0.95).degenerate_band);
    PhaseThresholds t;
    t.inversion_offset = 1.2;
    CHECK(classify(0.5, 0.95, 0.2, 0.95, t).degenerate_band);
}

TEST_CASE("classify matches the oracle on a dense grid") {
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
        const double tr = rng.uniform(), te = rng.uniform(), xi = rng.uniform() * 0.9;
        const double hist = std::max(te, rng.uniform());
        REQUIRE(classify(tr, te, xi, hist).label == oracle_label(tr, te, xi, hist));
    }
}

TEST_CASE("classify from a history uses its maximum") {
    TrainHistory h;
    h.rows.push_back({0, 0.1, 0.1});
    h.rows.push_back({10, 0.4, 0.95});
    h.rows.push_back({20, 0.3, 0.2});
    CHECK(classify(h, 0.3).label == PhaseLabel::Forgetting);
    h.rows[1].test_acc = 0.5;
    CHECK(classify(h, 0.3).label == PhaseLabel::Confusion);
}

TEST_CASE("label names and codes") {
    for (auto l : {PhaseLabel::Confusion, PhaseLabel::Forgetting, PhaseLabel::Memorization, PhaseLabel::Coexistence,
                   PhaseLabel::PartialInversion, PhaseLabel::FullInversion})
        CHECK(parse_phase_label(to_string(l)) == l);
    CHECK(phase_code(PhaseLabel::Forgetting) == 'G');
    CHECK_THROWS_AS(parse_phase_label("Grokking"), DataError);
}

TEST_CASE("diagram majority vote, ties and gaps") {
    const std::vector<double> alphas{0.3, 0.5}, xis{0.0, 0.2};
    std::vector<PhasePoint> pts{pt(0.3, 0.0, PhaseLabel::Memorization), pt(0.3, 0.0, PhaseLabel::Memorization),
                                pt(0.3, 0.0, PhaseLabel::Coexistence),
                                // tie: the more severe label wins
                                pt(0.5, 0.0, PhaseLabel::Memorization), pt(0.5, 0.0, PhaseLabel::FullInversion),
                                pt(0.5 + 1e-12, 0.2, PhaseLabel::Confusion)};
    const auto d = assemble_diagram(pts, alphas, xis);
    REQUIRE(d.cells.size() == 4);
    CHECK(d.at(0, 0).label == PhaseLabel::Memorization);
    CHECK(d.at(0, 0).votes.at(PhaseLabel::Coexistence) == 1);
    CHECK_FALSE(d.at(0, 1).label.has_value());
    CHECK(d.at(1, 0).label == PhaseLabel::FullInversion);
    CHECK(d.at(1, 1).label == PhaseLabel::Confusion);
    CHECK(d.at(1, 1).alpha == 0.5);

    std::ostringstream csv, txt;
    write_diagram_csv(csv, d);
    CHECK(csv.str().rfind("alpha,xi,label,votes\n", 0) == 0);
    CHECK(csv.str().find("gap") != std::string::npos);
    CHECK(csv.str().find("Memorization:2;") != std::string::npos);
    write_diagram_text(txt, d);
    CHECK(txt.str().find('.') != std::string::npos);

    CHECK_THROWS_AS(assemble_diagram({pt(0.4, 0.0, PhaseLabel::Confusion)}, alphas, xis), DataError);
}

TEST_CASE("full default grid has one cell per pair") {
    std::vector<double> alphas, xis;
    for (int i = 0; i < 17; ++i) alphas.push_back(0.1 + 0.05 * i);
    for (int i = 0; i < 19; ++i) xis.push_back(0.05 * i);
    std::vector<PhasePoint> pts;
    for (double a : alphas)
        for (double x : xis) pts.push_back(pt(a, x, PhaseLabel::Coexistence));
    const auto d = assemble_diagram(pts, alphas, xis);
    CHECK(d.cells.size() == 323);
    CHECK(std::all_of(d.cells.begin(), d.cells.end(), [](const DiagramCell& c) { return c.label.has_value(); }));
}
