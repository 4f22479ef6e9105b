// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails. Trained networks are shared in
// memory between criteria; the full suite is hours of single-core compute.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "grokbench/analytic.hpp"
#include "grokbench/labctl.hpp"
#include "grokbench/phases.hpp"
#include "grokbench/pruning.hpp"
#include "grokbench/spectral.hpp"

using namespace grokbench;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;
const Clock::time_point g_start = Clock::now();
std::mutex g_log_mutex;

template <typename... Args>
void logf(const char* fmt, Args... args) {
    std::lock_guard lock(g_log_mutex);
    const double t = std::chrono::duration<double>(Clock::now() - g_start).count();
    std::fprintf(stderr, "[%7.0fs] ", t);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string history_bytes(const TrainHistory& h) {
    std::ostringstream os;
    write_history_csv(os, h);
    return os.str();
}

// ---------------------------------------------------------------------------
// Shared training runs

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4};

RunConfig desk_config(double alpha, double xi, double wd, std::uint64_t seed) {
    RunConfig c;
    c.alpha = alpha;
    c.xi = xi;
    c.optim.weight_decay = wd;
    c.seeds = derive_seeds(seed);
    return c;
}

class RunCache {
  public:
    explicit RunCache(std::size_t workers) : workers_(std::max<std::size_t>(1, workers)) {}

    /// Trains every config that is not cached yet, in parallel.
    std::vector<const RunOutcome*> get(const std::vector<RunConfig>& configs) {
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < configs.size(); ++i)
            if (!cache_.contains(serialize_config(configs[i]))) todo.push_back(i);
        std::vector<RunOutcome> fresh(todo.size());
        train_all(configs, todo, fresh);
        for (std::size_t j = 0; j < todo.size(); ++j)
            cache_.emplace(serialize_config(configs[todo[j]]), std::move(fresh[j]));
        std::vector<const RunOutcome*> out;
        for (const auto& c : configs) out.push_back(&cache_.at(serialize_config(c)));
        return out;
    }

    /// Trains without consulting or filling the cache.
    std::vector<RunOutcome> train_fresh(const std::vector<RunConfig>& configs) {
        std::vector<std::size_t> all(configs.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        std::vector<RunOutcome> out(configs.size());
        train_all(configs, all, out);
        return out;
    }

    std::size_t workers() const { return workers_; }

  private:
    void train_all(const std::vector<RunConfig>& configs, const std::vector<std::size_t>& which,
                   std::vector<RunOutcome>& out) {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t j; (j = next.fetch_add(1)) < which.size();) {
                const RunConfig& c = configs[which[j]];
                logf("train alpha=%.2f xi=%.2f wd=%g norm=%s steps=%zu seed.data=%016llx", c.alpha, c.xi,
                     c.optim.weight_decay, to_string(c.norm).c_str(), c.optim.steps,
                     static_cast<unsigned long long>(c.seeds.data));
                out[j] = run_experiment(c);
                const auto& m = out[j].record.final_metrics;
                logf("  done: train %.3f test %.3f corrupted %.3f label %s", m.train_acc, m.test_acc,
                     m.train_acc_corrupted,
                     out[j].record.label ? to_string(*out[j].record.label).c_str() : "none");
            }
        };
        const std::size_t n = std::min(workers_, which.size());
        if (n <= 1) {
            work();
            return;
        }
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(work);
    }

    std::size_t workers_;
    std::map<std::string, RunOutcome> cache_;
};

std::vector<RunConfig> seeded(double alpha, double xi, double wd) {
    std::vector<RunConfig> out;
    for (auto s : kSeeds) out.push_back(desk_config(alpha, xi, wd, s));
    return out;
}

std::vector<RunConfig> grokking_configs() { return seeded(0.5, 0.0, 5.0); }
std::vector<RunConfig> coexistence_configs() { return seeded(0.5, 0.35, 0.0); }
std::vector<RunConfig> inversion_configs() { return seeded(0.5, 0.35, 15.0); }
std::vector<RunConfig> forgetting_configs() { return seeded(0.5, 0.35, 20.0); }

bool is_coexistence(const RunOutcome& r) {
    const auto& m = r.record.final_metrics;
    return r.record.status == RunStatus::Ok && m.train_acc >= 0.90 && m.test_acc >= 0.90;
}

bool is_full_inversion(const RunOutcome& r) {
    const auto& m = r.record.final_metrics;
    return r.record.status == RunStatus::Ok && m.test_acc >= 0.99 && m.train_acc >= 0.60 && m.train_acc <= 0.72;
}

/// First run satisfying `pred`, else the first run.
const RunOutcome& pick(const std::vector<const RunOutcome*>& runs, const std::function<bool(const RunOutcome&)>& pred) {
    for (const auto* r : runs)
        if (pred(*r)) return *r;
    return *runs.front();
}

// ---------------------------------------------------------------------------
// Criteria

Verdict analytic_exactness() {
    std::size_t perfect = 0;
    double worst = 1.0;
    for (std::uint64_t draw = 0; draw < 50; ++draw) {
        const auto out = cmd_verify_analytic(97, 500, draw, FrequencyAssignment::Permutation);
        perfect += out.exit_code == 0;
        worst = std::min(worst, out.report.accuracy);
    }
    return {perfect >= 49, std::to_string(perfect) + "/50 phase draws at accuracy 1 (worst " +
                               fmt("%.5f", worst) + ")"};
}

double fd_max_rel_error(Activation act, LossKind lk, NormKind nk, std::uint64_t seed) {
    const std::size_t p = 5, n = 4;
    Rng rng(seed);
    ModelParams m = init_params(p, n, 0.8, nk, rng);
    if (m.norm) {
        for (auto& g : m.norm->gamma) g = 0.5 + rng.uniform();
        for (auto& b : m.norm->beta) b = rng.uniform() - 0.5;
    }
    std::vector<Example> batch;
    std::vector<std::uint32_t> labels;
    for (int i = 0; i < 3; ++i) {
        const auto a = static_cast<std::uint32_t>(rng.uniform_index(p));
        const auto b = static_cast<std::uint32_t>(rng.uniform_index(p));
        batch.push_back({a, b});
        labels.push_back(static_cast<std::uint32_t>(rng.uniform_index(p)));
    }
    const HyperKinds hyper{act, lk, 0.0};
    auto objective = [&](const ModelParams& q) {
        return loss(forward(q, batch, Mode::Train, hyper).logits, labels, lk);
    };
    const Gradients g = backward(m, forward(m, batch, Mode::Train, hyper), labels, hyper);

    const double h = 1e-5;
    double worst = 0.0;
    auto probe = [&](double& slot, double analytic) {
        const double keep = slot;
        slot = keep + h;
        const double up = objective(m);
        slot = keep - h;
        const double down = objective(m);
        slot = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
    };
    for (std::size_t i = 0; i < m.U.size(); ++i) probe(m.U.values()[i], g.U.values()[i]);
    for (std::size_t i = 0; i < m.V.size(); ++i) probe(m.V.values()[i], g.V.values()[i]);
    for (std::size_t i = 0; i < m.W.size(); ++i) probe(m.W.values()[i], g.W.values()[i]);
    if (m.norm) {
        for (std::size_t k = 0; k < n; ++k) probe(m.norm->gamma[k], g.gamma[k]);
        for (std::size_t k = 0; k < n; ++k) probe(m.norm->beta[k], g.beta[k]);
    }
    return worst;
}

Verdict gradient_oracle() {
    bool ok = true;
    double worst_strict = 0.0, worst_other = 0.0;
    for (auto act : {Activation::Quadratic, Activation::ReLU})
        for (auto lk : {LossKind::MSE, LossKind::CrossEntropy})
            for (auto nk : {NormKind::None, NormKind::BatchNorm, NormKind::LayerNorm})
                for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                    const double err = fd_max_rel_error(act, lk, nk, seed);
                    const bool strict =
                        act == Activation::Quadratic && lk == LossKind::MSE && nk == NormKind::None;
                    (strict ? worst_strict : worst_other) = std::max(strict ? worst_strict : worst_other, err);
                    ok = ok && err < (strict ? 1e-6 : 1e-5);
                }
    return {ok, "max rel error " + fmt("%.2e", worst_strict) + " (quadratic/mse/none), " + fmt("%.2e", worst_other) +
                    " (other 11 combinations)"};
}

Verdict ipr_closed_forms() {
    const std::size_t p = 97;
    const std::vector<double> constant(p, 1.7);
    std::vector<double> one_hot_vec(p, 0.0), cosine(p);
    one_hot_vec[11] = 1.0;
    for (std::size_t j = 0; j < p; ++j) cosine[j] = std::cos(2.0 * std::numbers::pi * 5.0 * j / p + 0.3);
    const double c = *ipr_of_vector(constant), o = *ipr_of_vector(one_hot_vec), w = *ipr_of_vector(cosine);
    bool ok = std::abs(c - 1.0) < 1e-12 && std::abs(o - 1.0 / p) < 1e-12 && std::abs(w - 0.5) < 1e-12;

    Rng rng(7);
    const auto spec = make_analytic_spec(97, 500, FrequencyAssignment::Balanced, rng);
    double dev = 0.0;
    for (const auto& nrn : per_neuron_ipr(build_analytic_params(spec)).per_neuron)
        dev = std::max(dev, std::abs(nrn.ipr_combined - 0.5));
    ok = ok && dev <= 1e-9;
    return {ok, "constant " + fmt("%.15g", c) + ", one-hot " + fmt("%.15g", o) + ", cosine " + fmt("%.15g", w) +
                    ", analytic max |IPR-0.5| " + fmt("%.1e", dev)};
}

Verdict grokking(RunCache& cache) {
    const auto runs = cache.get(grokking_configs());
    std::size_t hit = 0;
    std::string accs;
    for (const auto* r : runs) {
        const double best = r->history.rows.empty() ? 0.0 : r->history.max_test_acc();
        hit += best >= 0.99;
        accs += (accs.empty() ? "" : " ") + fmt("%.3f", best);
    }
    return {hit >= 3, std::to_string(hit) + "/4 seeds reach test >= 0.99 (max test " + accs + ")"};
}

Verdict coexistence(RunCache& cache) {
    const auto runs = cache.get(coexistence_configs());
    std::size_t hit = 0;
    std::string accs;
    for (const auto* r : runs) {
        hit += is_coexistence(*r);
        accs += (accs.empty() ? "" : " ") + fmt("%.3f", r->record.final_metrics.train_acc) + "/" +
                fmt("%.3f", r->record.final_metrics.test_acc);
    }
    return {hit >= 3, std::to_string(hit) + "/4 seeds with train, test >= 0.90 (train/test " + accs + ")"};
}

Verdict full_inversion(RunCache& cache) {
    const auto runs = cache.get(inversion_configs());
    std::size_t hit = 0;
    std::string accs;
    for (const auto* r : runs) {
        hit += is_full_inversion(*r);
        accs += (accs.empty() ? "" : " ") + fmt("%.3f", r->record.final_metrics.train_acc) + "/" +
                fmt("%.3f", r->record.final_metrics.test_acc);
    }
    return {hit >= 3, std::to_string(hit) + "/4 seeds with test >= 0.99, train in [0.60, 0.72] (train/test " + accs +
                          ")"};
}

Verdict two_stage(RunCache& cache) {
    const auto runs = cache.get(inversion_configs());
    std::size_t hit = 0;
    for (const auto* r : runs) {
        const auto& rows = r->history.rows;
        if (rows.empty() || rows.back().train_acc >= 0.72) continue;
        const bool peaked = std::any_of(rows.begin(), rows.end() - 1, [](const HistoryRow& h) { return h.train_acc > 0.95; });
        hit += peaked;
    }
    return {hit >= 3, std::to_string(hit) + "/4 full-inversion runs exceed train 0.95 before ending below 0.72"};
}

std::pair<double, double> ipr_tail_fractions(const ModelParams& params) {
    const auto report = per_neuron_ipr(params);
    double below = 0, above = 0, live = 0;
    for (const auto& n : report.per_neuron) {
        if (n.dead) continue;
        ++live;
        below += n.ipr_combined < 0.3;
        above += n.ipr_combined > 0.4;
    }
    return {live > 0 ? below / live : 0.0, live > 0 ? above / live : 0.0};
}

Verdict ipr_shift(RunCache& cache) {
    const auto& coex = pick(cache.get(coexistence_configs()), is_coexistence);
    const auto& inv = pick(cache.get(inversion_configs()), is_full_inversion);
    if (!coex.params || !inv.params) return {false, "training failed"};
    const auto [cb, ca] = ipr_tail_fractions(*coex.params);
    const auto [ib, ia] = ipr_tail_fractions(*inv.params);
    const bool ok = cb >= 0.10 && ca >= 0.10 && ib < 0.05;
    return {ok, "coexistence: " + fmt("%.1f%%", 100 * cb) + " below 0.3, " + fmt("%.1f%%", 100 * ca) +
                    " above 0.4; full inversion: " + fmt("%.1f%%", 100 * ib) + " below 0.3"};
}

Verdict pruning_causality(RunCache& cache) {
    const auto& coex = pick(cache.get(coexistence_configs()), is_coexistence);
    if (!coex.params) return {false, "training failed"};
    const HyperKinds hyper = coex.record.config.hyper();
    const auto low = prune_sweep(*coex.params, coex.table, hyper, PruneOrder::LowFirst, 5);
    const auto high = prune_sweep(*coex.params, coex.table, hyper, PruneOrder::HighFirst, 5);
    std::optional<std::size_t> low_hit, high_hit;
    for (const auto& r : low.rows)
        if (!low_hit && r.metrics.train_acc_corrupted < 0.3 && r.metrics.test_acc >= 0.90) low_hit = r.pruned_count;
    for (const auto& r : high.rows)
        if (!high_hit && r.metrics.test_acc < 0.5 && r.metrics.train_acc_corrupted >= 0.90) high_hit = r.pruned_count;
    auto show = [](const std::optional<std::size_t>& c) { return c ? std::to_string(*c) : std::string("none"); };
    return {low_hit && high_hit,
            "low-first count " + show(low_hit) + " (corrupted < 0.3, test >= 0.9); high-first count " +
                show(high_hit) + " (test < 0.5, corrupted >= 0.9)"};
}

Verdict max_prunable_band(RunCache& cache) {
    const auto runs = cache.get(inversion_configs());
    const auto& r = pick(runs, [](const RunOutcome& o) { return o.params && o.record.final_metrics.test_acc >= 0.99; });
    if (!r.params) return {false, "training failed"};
    const auto m = max_prunable(*r.params, r.table, r.record.config.hyper(), 0.99);
    const bool ok = !m.unpruned_below_floor && m.survivors >= 49 && m.survivors <= 120;
    return {ok, std::to_string(m.survivors) + " survivors (" + std::to_string(m.prunable) + " pruned) at floor 0.99"};
}

Verdict classifier_table() {
    struct Case {
        double train, test, xi, hist;
        PhaseLabel want;
    };
    const Case cases[] = {
        {0.95, 0.95, 0.35, 0.95, PhaseLabel::Coexistence},
        {0.80, 0.95, 0.35, 0.95, PhaseLabel::PartialInversion},
        {0.66, 0.95, 0.35, 0.95, PhaseLabel::FullInversion},
        {0.95, 0.40, 0.35, 0.40, PhaseLabel::Memorization},
        {0.02, 0.02, 0.35, 0.99, PhaseLabel::Forgetting},
        {0.02, 0.02, 0.35, 0.05, PhaseLabel::Confusion},
        // inclusive edges
        {0.90, 0.90, 0.35, 0.90, PhaseLabel::Coexistence},
        {0.70, 0.90, 0.35, 0.90, PhaseLabel::PartialInversion},
        {0.89, 0.89, 0.35, 0.90, PhaseLabel::Forgetting},
    };
    std::size_t ok = 0;
    for (const auto& c : cases) ok += classify(c.train, c.test, c.xi, c.hist).label == c.want;
    return {ok == std::size(cases), std::to_string(ok) + "/" + std::to_string(std::size(cases)) + " table cases"};
}

Verdict forgetting(RunCache& cache) {
    const auto runs = cache.get(forgetting_configs());
    std::size_t hit = 0;
    std::string detail;
    for (const auto* r : runs) {
        const auto& rows = r->history.rows;
        if (rows.empty()) continue;
        double pu = 0, pv = 0, pw = 0;
        for (const auto& h : rows) {
            pu = std::max(pu, h.frob_u);
            pv = std::max(pv, h.frob_v);
            pw = std::max(pw, h.frob_w);
        }
        const auto& f = rows.back();
        const double ratio = std::max({f.frob_u / pu, f.frob_v / pv, f.frob_w / pw});
        const bool ok = f.train_acc < 0.90 && f.test_acc < 0.90 && r->history.max_test_acc() >= 0.90 && ratio < 0.10;
        hit += ok;
        detail += (detail.empty() ? "" : "; ") + fmt("max test %.3f", r->history.max_test_acc()) +
                  fmt(" final %.3f", f.test_acc) + fmt(" norm ratio %.3f", ratio);
    }
    return {hit >= 2, std::to_string(hit) + "/4 seeds (" + detail + ")"};
}

Verdict batchnorm_correlation(RunCache& cache) {
    RunConfig c = desk_config(0.65, 0.2, 0.0, 1);
    c.norm = NormKind::BatchNorm;
    c.optim.batch_size = 64;
    c.optim.lr = 0.005;
    c.optim.steps = 8000;
    c.optim.eval_every = 100;
    const auto& r = *cache.get({c}).front();
    if (!r.params) return {false, "training failed"};
    const auto corr = bn_ipr_correlation(r.params->norm->gamma, per_neuron_ipr(*r.params));
    return {corr.spearman > 0.3, "spearman " + fmt("%.3f", corr.spearman) + ", pearson " + fmt("%.3f", corr.pearson) +
                                     fmt(" (final test %.3f)", r.record.final_metrics.test_acc)};
}

struct OrderStats {
    std::size_t concordant = 0;
    std::size_t violations = 0;
};

/// Counts alpha-ordered pairs within each xi > 0 column: a pair is a
/// violation when the target label sits at the smaller alpha and a
/// Memorization/Confusion/Forgetting label at the larger one.
OrderStats ordering(const PhaseDiagram& d, const std::function<bool(PhaseLabel)>& target) {
    auto low = [](PhaseLabel l) {
        return l == PhaseLabel::Memorization || l == PhaseLabel::Confusion || l == PhaseLabel::Forgetting;
    };
    OrderStats s;
    for (std::size_t x = 0; x < d.xis.size(); ++x) {
        if (d.xis[x] <= 0.0) continue;
        for (std::size_t i = 0; i < d.alphas.size(); ++i)
            for (std::size_t j = i + 1; j < d.alphas.size(); ++j) {
                const auto& a = d.at(i, x).label;
                const auto& b = d.at(j, x).label;
                if (!a || !b) continue;
                if (low(*a) && target(*b)) ++s.concordant;
                if (target(*a) && low(*b)) ++s.violations;
            }
    }
    return s;
}

std::string diagram_text(const PhaseDiagram& d) {
    std::ostringstream os;
    write_diagram_text(os, d);
    return os.str();
}

Verdict mini_phase_diagram(RunCache& cache, const fs::path& scratch) {
    std::map<double, PhaseDiagram> diagrams;
    for (double wd : {0.0, 15.0}) {
        SweepSpec s;
        s.alphas = {0.2, 0.35, 0.5, 0.65, 0.8};
        s.xis = {0.0, 0.15, 0.3, 0.45, 0.6};
        s.base = desk_config(0.5, 0.0, wd, 0);
        s.base_seed = 1;
        s.workers = cache.workers();
        const auto dir = scratch / ("mini_wd" + std::to_string(static_cast<int>(wd)));
        std::size_t done = 0;
        const auto res = cmd_sweep(s, dir, [&](const SweepEvent& e) {
            ++done;
            logf("mini diagram wd=%g cell %zu/25 alpha=%.2f xi=%.2f %s%s", wd, done, s.alphas[e.alpha_index],
                 s.xis[e.xi_index],
                 e.record && e.record->label ? to_string(*e.record->label).c_str() : "gap",
                 e.resumed ? " (resumed)" : "");
        });
        diagrams[wd] = res.diagram;
        logf("wd=%g diagram:\n%s", wd, diagram_text(res.diagram).c_str());
    }
    const auto coex = ordering(diagrams[0.0], [](PhaseLabel l) { return l == PhaseLabel::Coexistence; });
    const auto inv = ordering(diagrams[15.0], [](PhaseLabel l) {
        return l == PhaseLabel::PartialInversion || l == PhaseLabel::FullInversion;
    });
    bool has_full = false;
    for (const auto& c : diagrams[15.0].cells) has_full = has_full || c.label == PhaseLabel::FullInversion;
    auto tolerable = [](const OrderStats& s) { return s.concordant > 0 && s.violations * 10 <= s.concordant; };
    const bool ok = tolerable(coex) && tolerable(inv) && has_full;
    return {ok, "wd=0 ordered pairs " + std::to_string(coex.concordant) + " vs " + std::to_string(coex.violations) +
                    " reversed; wd=15 " + std::to_string(inv.concordant) + " vs " + std::to_string(inv.violations) +
                    " reversed; FullInversion cell " + (has_full ? "present" : "absent")};
}

Verdict determinism(RunCache& cache) {
    std::vector<RunConfig> configs;
    for (auto set : {grokking_configs(), coexistence_configs(), inversion_configs()})
        configs.insert(configs.end(), set.begin(), set.end());
    const auto first = cache.get(configs);
    const auto again = cache.train_fresh(configs);
    std::size_t same = 0;
    for (std::size_t i = 0; i < configs.size(); ++i)
        same += history_bytes(first[i]->history) == history_bytes(again[i].history);
    return {same == configs.size(),
            std::to_string(same) + "/" + std::to_string(configs.size()) + " reruns with byte-identical history CSV"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grokbench acceptance suite"};
    std::vector<int> only;
    std::string scratch = "acceptance-scratch";
    std::size_t workers = std::thread::hardware_concurrency();
    app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
    app.add_option("--scratch", scratch, "directory for sweep artifacts");
    app.add_option("--workers", workers, "parallel training runs");
    CLI11_PARSE(app, argc, argv);

    RunCache cache(workers);
    const fs::path scratch_dir = scratch;
    using Fn = std::function<Verdict()>;
    const std::vector<std::pair<std::string, Fn>> criteria = {
        {"analytic solution exactness", analytic_exactness},
        {"gradient oracle", gradient_oracle},
        {"IPR closed forms", ipr_closed_forms},
        {"grokking reproduction", [&] { return grokking(cache); }},
        {"coexistence reproduction", [&] { return coexistence(cache); }},
        {"full inversion reproduction", [&] { return full_inversion(cache); }},
        {"two-stage dynamics", [&] { return two_stage(cache); }},
        {"IPR bimodality and shift", [&] { return ipr_shift(cache); }},
        {"pruning causality", [&] { return pruning_causality(cache); }},
        {"max prunable", [&] { return max_prunable_band(cache); }},
        {"phase classifier table", classifier_table},
        {"forgetting reproduction", [&] { return forgetting(cache); }},
        {"batchnorm gamma/IPR correlation", [&] { return batchnorm_correlation(cache); }},
        {"mini phase diagram", [&] { return mini_phase_diagram(cache, scratch_dir); }},
        {"determinism", [&] { return determinism(cache); }},
    };
    const std::set<int> selected(only.begin(), only.end());

    std::vector<std::string> lines;
    bool all_ok = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.contains(id)) continue;
        logf("criterion %d: %s", id, criteria[i].first.c_str());
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        all_ok = all_ok && v.pass;
        char head[96];
        std::snprintf(head, sizeof head, "%s %2d  %-32s ", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str());
        lines.push_back(head + v.detail);
        std::printf("%s\n", lines.back().c_str());
        std::fflush(stdout);
    }
    std::printf("\nsummary\n");
    for (const auto& l : lines) std::printf("%s\n", l.c_str());
    return all_ok ? 0 : 1;
}
