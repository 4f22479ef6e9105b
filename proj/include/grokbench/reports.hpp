// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "grokbench/dataset.hpp"
#include "grokbench/model.hpp"
#include "grokbench/optim.hpp"

namespace grokbench {

inline constexpr std::size_t kDefaultLogitExamples = 4;

struct LogitRow {
    std::uint32_t index = 0;  // row in the example table
    std::uint32_t m = 0;
    std::uint32_t n = 0;
    std::uint32_t true_label = 0;
    std::uint32_t corrupted_label = 0;
    double logit_at_true = 0.0;
    double logit_at_corrupted = 0.0;
    double max_other_logit = 0.0;  // largest logit excluding both labels
};

struct LogitReport {
    bool empty = true;  // the table has no corrupted training example
    std::vector<LogitRow> rows;

    /// Fraction of rows whose true-label logit beats the corrupted-label logit.
    double fraction_true_wins() const;
};

/// Samples min(k, |corrupted train|) corrupted training examples without
/// replacement and reads their eval-mode logits.
LogitReport logit_report(const ModelParams& params, const ExampleTable& table, const HyperKinds& hyper,
                         std::size_t k, Rng& rng);

struct NormPoint {
    std::size_t step = 0;
    double frob_u = 0.0;
    double frob_v = 0.0;
    double frob_w = 0.0;
};

struct NormSeries {
    std::vector<NormPoint> points;

    NormPoint peak() const;   // component-wise maxima (step field unused)
    NormPoint final() const;
};

NormSeries norm_series(const TrainHistory& history);

struct IprPoint {
    std::size_t step = 0;
    double mean_ipr = 0.0;
};

struct IprSeries {
    std::vector<IprPoint> points;
    /// Share of consecutive checkpoint pairs where mean IPR went down; 0 for
    /// a single point.
    double fraction_decreasing = 0.0;
};

IprSeries ipr_series(const TrainHistory& history);

// m,n,true_label,corrupted_label,logit_at_true,logit_at_corrupted,max_other_logit
void write_logit_csv(std::ostream& os, const LogitReport& report);
// step,frob_u,frob_v,frob_w
void write_norm_csv(std::ostream& os, const NormSeries& series);
// step,mean_ipr
void write_ipr_series_csv(std::ostream& os, const IprSeries& series);

nlohmann::json to_json(const LogitReport& report);
nlohmann::json to_json(const NormSeries& series);
nlohmann::json to_json(const IprSeries& series);

}  // namespace grokbench
