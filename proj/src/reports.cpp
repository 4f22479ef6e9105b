// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0

#include "grokbench/reports.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "grokbench/error.hpp"
#include "grokbench/textio.hpp"

namespace grokbench {

namespace {

void require_rows(const TrainHistory& history, const char* who) {
    if (history.rows.empty()) throw DataError(std::string(who) + ": history is empty");
    for (std::size_t i = 1; i < history.rows.size(); ++i)
        if (history.rows[i].step <= history.rows[i - 1].step)
            throw DataError(std::string(who) + ": history steps are not increasing");
}

// JSON has no NaN; emit null instead.
nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

double LogitReport::fraction_true_wins() const {
    if (rows.empty()) return std::nan("");
    std::size_t wins = 0;
    for (const auto& r : rows) wins += r.logit_at_true > r.logit_at_corrupted;
    return static_cast<double>(wins) / static_cast<double>(rows.size());
}

LogitReport logit_report(const ModelParams& params, const ExampleTable& table, const HyperKinds& hyper,
                         std::size_t k, Rng& rng) {
    if (k == 0) throw ConfigError("logit_report: k must be >= 1");
    std::vector<std::uint32_t> pool = subsets(table).train_corrupted;
    LogitReport report;
    if (pool.empty()) return report;
    report.empty = false;

    const std::size_t take = std::min(k, pool.size());
    for (std::size_t i = 0; i < take; ++i)
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
    pool.resize(take);

    const auto logits = forward(params, gather_pairs(table, pool), Mode::Eval, hyper).logits;
    for (std::size_t r = 0; r < take; ++r) {
        const std::uint32_t i = pool[r];
        LogitRow row;
        row.index = i;
        row.m = table.pairs[i].m;
        row.n = table.pairs[i].n;
        row.true_label = table.true_labels[i];
        row.corrupted_label = table.assigned_labels[i];
        row.logit_at_true = logits(r, row.true_label);
        row.logit_at_corrupted = logits(r, row.corrupted_label);
        row.max_other_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < logits.cols(); ++q)
            if (q != row.true_label && q != row.corrupted_label)
                row.max_other_logit = std::max(row.max_other_logit, logits(r, q));
        report.rows.push_back(row);
    }
    return report;
}

NormPoint NormSeries::peak() const {
    NormPoint best;
    for (const auto& pt : points) {
        best.frob_u = std::max(best.frob_u, pt.frob_u);
        best.frob_v = std::max(best.frob_v, pt.frob_v);
        best.frob_w = std::max(best.frob_w, pt.frob_w);
    }
    return best;
}

NormPoint NormSeries::final() const {
    if (points.empty()) throw DataError("norm series is empty");
    return points.back();
}

NormSeries norm_series(const TrainHistory& history) {
    require_rows(history, "norm_series");
    NormSeries s;
    for (const auto& r : history.rows) s.points.push_back({r.step, r.frob_u, r.frob_v, r.frob_w});
    return s;
}

IprSeries ipr_series(const TrainHistory& history) {
    require_rows(history, "ipr_series");
    IprSeries s;
    std::size_t drops = 0;
    for (const auto& r : history.rows) {
        if (!s.points.empty() && r.mean_ipr < s.points.back().mean_ipr) ++drops;
        s.points.push_back({r.step, r.mean_ipr});
    }
    if (s.points.size() > 1)
        s.fraction_decreasing = static_cast<double>(drops) / static_cast<double>(s.points.size() - 1);
    return s;
}

void write_logit_csv(std::ostream& os, const LogitReport& report) {
    os << "m,n,true_label,corrupted_label,logit_at_true,logit_at_corrupted,max_other_logit\n";
    for (const auto& r : report.rows)
        os << r.m << ',' << r.n << ',' << r.true_label << ',' << r.corrupted_label << ','
           << format_double(r.logit_at_true) << ',' << format_double(r.logit_at_corrupted) << ','
           << format_double(r.max_other_logit) << '\n';
}

void write_norm_csv(std::ostream& os, const NormSeries& series) {
    os << "step,frob_u,frob_v,frob_w\n";
    for (const auto& p : series.points)
        os << p.step << ',' << format_double(p.frob_u) << ',' << format_double(p.frob_v) << ','
           << format_double(p.frob_w) << '\n';
}

void write_ipr_series_csv(std::ostream& os, const IprSeries& series) {
    os << "step,mean_ipr\n";
    for (const auto& p : series.points) os << p.step << ',' << format_double(p.mean_ipr) << '\n';
}

nlohmann::json to_json(const LogitReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"m", r.m},
                        {"n", r.n},
                        {"true_label", r.true_label},
                        {"corrupted_label", r.corrupted_label},
                        {"logit_at_true", number(r.logit_at_true)},
                        {"logit_at_corrupted", number(r.logit_at_corrupted)},
                        {"max_other_logit", number(r.max_other_logit)}});
    }
    return {{"empty", report.empty}, {"fraction_true_wins", number(report.fraction_true_wins())}, {"rows", rows}};
}

nlohmann::json to_json(const NormSeries& series) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : series.points)
        pts.push_back({{"step", p.step}, {"frob_u", p.frob_u}, {"frob_v", p.frob_v}, {"frob_w", p.frob_w}});
    return {{"points", pts}};
}

nlohmann::json to_json(const IprSeries& series) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : series.points) pts.push_back({{"step", p.step}, {"mean_ipr", number(p.mean_ipr)}});
    return {{"points", pts}, {"fraction_decreasing", series.fraction_decreasing}};
}

}  // namespace grokbench
