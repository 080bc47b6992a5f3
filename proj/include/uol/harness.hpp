#pragma once
// Experiment driver: runs seeded experiments over the module stack, writes
// CSV artifacts, and turns each enabled check into one PASS/FAIL row.
//
// Artifacts under the output directory:
//   run_<seed>.csv       per-step run records
//   excess_<seed>.csv    excess-loss prefix averages
//   envelope_<seed>.csv  regret envelope trace (corollary32 check)
//   sequence_<seed>.csv  raw (x, y) stream (output.sequences = true)
//   density.csv          density profile (density check)
//   condition.csv        condition profile (condition1 check)
//   hedge_bench.csv      per-trial Hedge results (lemma31 check)
//   summary.csv          one row per verdict
// Wall-clock time goes to stdout only, so reruns reproduce every file.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "uol/config.hpp"
#include "uol/csv.hpp"
#include "uol/epoch_hedge.hpp"
#include "uol/errors.hpp"
#include "uol/expert_family.hpp"
#include "uol/hedge.hpp"
#include "uol/process_lab.hpp"
#include "uol/rng.hpp"

namespace uol {

struct SummaryRow {
    std::string check;
    bool pass{false};
    double statistic{0.0};
    double threshold{0.0};
    std::size_t seeds{0};
    std::string note;
};

struct SummaryReport {
    std::vector<SummaryRow> rows;
    double wall_seconds{0.0};

    bool all_pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.pass; });
    }
    const SummaryRow* find(std::string_view check) const {
        for (const auto& r : rows) {
            if (r.check == check) return &r;
        }
        return nullptr;
    }
};

inline void write_summary(const SummaryReport& report, const std::filesystem::path& path) {
    CsvWriter csv(path, schema_header(CsvSchema::summary));
    for (const auto& r : report.rows) csv.row(r.check, r.pass ? "PASS" : "FAIL", r.statistic, r.threshold, r.seeds);
    csv.close();
}

/// Runs fn(0..count-1) on up to `workers` threads (0: hardware concurrency).
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    }
}

// ---------------------------------------------------------------------------
// Comparators

using Comparator = std::function<Outcome(std::span<const double>)>;

/// Materializes f0. best-member needs the run's samples to pick the member
/// with the smallest empirical loss against y.
inline Comparator make_comparator(const ExperimentConfig& config, std::span<const Sample> samples = {}) {
    const auto& spec = config.comparator;
    switch (spec.kind) {
    case ComparatorSpec::Kind::member: {
        Expert e = enumerate_expert(spec.index, config.expert);
        return [e](std::span<const double> x) { return e.evaluate(x); };
    }
    case ComparatorSpec::Kind::threshold: {
        const double cut = spec.cut;
        return [cut](std::span<const double> x) { return Outcome{x[0] > cut ? 1.0 : 0.0}; };
    }
    case ComparatorSpec::Kind::custom_table: {
        const int m = *table_resolution(spec.table.size(), config.expert.dimension);
        Expert e{0, m, config.expert.dimension, spec.table};
        return [e](std::span<const double> x) { return e.evaluate(x); };
    }
    case ComparatorSpec::Kind::best_member: {
        if (samples.empty()) throw contract_error("best-member comparator needs the run's samples");
        const auto xs = points_of(samples);
        std::vector<Outcome> ys;
        for (const auto& s : samples) ys.push_back(s.y);
        const std::size_t m = spec.index;
        const auto best = cell_loss_profile(config.expert, xs, ys, std::span<const std::size_t>(&m, 1));
        Expert e = enumerate_expert(best.best_index, config.expert);
        return [e](std::span<const double> x) { return e.evaluate(x); };
    }
    }
    throw contract_error("unhandled comparator kind");
}

// ---------------------------------------------------------------------------
// Hedge bound bench

struct HedgeBenchReport {
    std::size_t horizon{0};
    std::size_t experts{0};
    double delta{0.0};
    std::size_t trials{0};
    std::size_t violations{0};
    double bound{0.0};
    double frequency{0.0};
    double threshold{0.0};  // delta + 3 sqrt(delta (1 - delta) / trials)
    bool pass{false};
    std::vector<HedgeTrial> per_trial;
};

enum class LossTable { iid_uniform, identical_experts };

/// Fraction of trials where the sampled learner's cumulative loss exceeds the
/// best expert's by more than hedge_regret_bound(n, N, delta). Trial k draws
/// its loss table and its sampling uniforms from derive_seed(seed, k).
inline HedgeBenchReport hedge_bench(std::size_t horizon, std::size_t experts, double delta, std::size_t trials,
                                    std::uint64_t seed, LossTable table = LossTable::iid_uniform,
                                    std::size_t workers = 0) {
    if (trials < 100) throw domain_error("hedge bench needs at least 100 trials");
    HedgeBenchReport r;
    r.horizon = horizon;
    r.experts = experts;
    r.delta = delta;
    r.trials = trials;
    r.bound = hedge_regret_bound(horizon, experts, delta);
    r.threshold = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
    r.per_trial.resize(trials);
    const HedgeConfig config = HedgeConfig::make(horizon, experts);

    parallel_for(trials, workers, [&](std::size_t k) {
        Rng rng(derive_seed(seed, k), Stream::bench);
        std::vector<double> losses(horizon * experts);
        for (std::size_t t = 0; t < horizon; ++t) {
            for (std::size_t i = 0; i < experts; ++i) {
                const bool shared = table == LossTable::identical_experts && i > 0;
                losses[t * experts + i] = shared ? losses[t * experts] : rng.uniform();
            }
        }
        r.per_trial[k] = run_hedge(losses, config, rng);
    });
    for (const auto& trial : r.per_trial) {
        if (trial.learner_loss > trial.best_expert_loss + r.bound) ++r.violations;
    }
    r.frequency = static_cast<double>(r.violations) / static_cast<double>(trials);
    r.pass = r.frequency <= r.threshold;
    return r;
}

inline void emit_hedge_bench(const HedgeBenchReport& r, const std::filesystem::path& path) {
    CsvWriter csv(path, schema_header(CsvSchema::hedge_bench));
    for (std::size_t k = 0; k < r.per_trial.size(); ++k) {
        const auto& t = r.per_trial[k];
        csv.row(k, t.learner_loss, t.best_expert_loss, r.bound, t.learner_loss > t.best_expert_loss + r.bound);
    }
    csv.close();
}

// ---------------------------------------------------------------------------
// Schedule oracle

struct ScheduleReport {
    std::size_t horizon{0};
    std::size_t mismatches{0};
    std::size_t first_mismatch{0};
    bool partition_ok{true};
    bool pass() const { return mismatches == 0 && partition_ok; }
};

/// Compares block_index against the unrolled recurrence t_{j+1} = t_j + j for
/// every n <= horizon and checks that blocks tile [1, horizon] with |T_j| = j.
inline ScheduleReport schedule_oracle(std::size_t horizon) {
    ScheduleReport r;
    r.horizon = horizon;
    std::size_t j = 1;
    std::size_t start = 1;
    std::size_t in_block = 0;
    for (std::size_t n = 1; n <= horizon; ++n) {
        if (n == start + j) {
            if (in_block != j) r.partition_ok = false;
            start += j;
            ++j;
            in_block = 0;
        }
        ++in_block;
        if (block_index(n) != j) {
            if (r.mismatches++ == 0) r.first_mismatch = n;
        }
        if (block_start(block_index(n)) != start) r.partition_ok = false;
    }
    if (in_block > j) r.partition_ok = false;
    return r;
}

// ---------------------------------------------------------------------------
// Condition and density checks

inline std::vector<SetPredicate> condition_sets(const ExperimentConfig& config) {
    if (config.condition1_sets == "tails") return tail_sets(config.condition1_count);
    if (config.condition1_sets == "empty") return empty_sets(config.condition1_count);
    return shrinking_intervals(config.condition1_count);
}

inline SummaryRow condition1_row(const ConditionReport& report, std::size_t seeds) {
    return {"condition1", report.pass, report.profile.back(), report.threshold, seeds, ConditionReport::kNote};
}

inline ConditionReport run_condition_check(const ExperimentConfig& config) {
    return condition_check(config.process, config.outcome, condition_sets(config), config.horizon, config.seeds,
                           config.condition1_threshold);
}

inline void emit_condition(const ConditionReport& r, const std::filesystem::path& path) {
    CsvWriter csv(path, schema_header(CsvSchema::condition));
    for (std::size_t k = 0; k < r.profile.size(); ++k) csv.row(k + 1, r.profile[k]);
    csv.close();
}

struct DensityReport {
    std::vector<DensityPoint> profile;
    bool monotone{true};
    double final_loss{0.0};
    double threshold{0.0};
    bool pass{false};
};

/// Default M grid: every tier boundary up to the cap, clipped to 2^16.
inline std::vector<std::size_t> default_m_grid(const ExpertSpaceConfig& expert) {
    ExpertEnumerator e(expert);
    std::vector<std::size_t> grid;
    for (int r = 0; r <= expert.max_tier; ++r) {
        const auto count = e.cumulative_count(r);
        if (!count || *count > (std::uint64_t{1} << 16)) break;
        grid.push_back(*count);
    }
    return grid;
}

/// Density profile of the configured comparator on the first seed's stream.
inline DensityReport run_density_check(const ExperimentConfig& config) {
    if (config.process.domain() != Domain::cube) {
        throw config_error("process", "density profiles need a unit-cube process");
    }
    const auto samples = generate(config.process, config.outcome, config.horizon, config.seeds.front());
    const Comparator f0 = make_comparator(config, samples);
    const auto grid = config.density_m_grid.empty() ? default_m_grid(config.expert) : config.density_m_grid;
    if (grid.empty()) throw config_error("density.m_grid", "no materializable tier");
    const auto xs = points_of(samples);

    DensityReport r;
    r.profile = density_profile(config.expert, f0, xs, grid);
    for (std::size_t i = 1; i < r.profile.size(); ++i) {
        if (r.profile[i].loss > r.profile[i - 1].loss) r.monotone = false;
    }
    r.final_loss = r.profile.back().loss;
    r.threshold = config.density_threshold;
    r.pass = r.monotone && r.final_loss <= r.threshold;
    return r;
}

inline void emit_density(const DensityReport& r, const std::filesystem::path& path) {
    CsvWriter csv(path, schema_header(CsvSchema::density));
    for (const auto& p : r.profile) csv.row(p.experts, p.loss);
    csv.close();
}

// ---------------------------------------------------------------------------
// Full experiment

struct SeedOutcome {
    std::uint64_t seed{0};
    bool ok{false};
    std::string error;
    bool truncated{false};
    double tail_excess{0.0};
    double envelope_margin{-std::numeric_limits<double>::infinity()};  // max of cum - best - envelope
};

/// Envelope trace for n in [from, N]: learner loss minus the best of the first
/// max(1, floor(n^(1/4))) experts must stay below the envelope.
template <ExpertSource Source>
double envelope_margin(const Source& source, const OutcomeSpace& space, std::span<const RunRecord> records,
                       std::size_t from, std::size_t n_hat, const std::filesystem::path* csv_path) {
    const auto best = prefix_comparator_curve(source, space, records);
    std::optional<CsvWriter> csv;
    if (csv_path) csv.emplace(*csv_path, schema_header(CsvSchema::envelope));
    double margin = -std::numeric_limits<double>::infinity();
    from = std::max<std::size_t>(from, 2);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::size_t n = records[i].t;
        if (n < from) continue;
        const double env = epoch_regret_envelope(n, n_hat);
        margin = std::max(margin, records[i].cum_loss - best[i] - env);
        if (csv) csv->row(n, records[i].cum_loss, best[i], comparator_class_size(n), env);
    }
    if (csv) csv->close();
    return margin;
}

inline SeedOutcome run_seed(const ExperimentConfig& config, const ExpertFamily& family, std::uint64_t seed) {
    SeedOutcome out;
    out.seed = seed;
    const auto& dir = config.out_dir;
    const std::string tag = std::to_string(seed);

    const bool pregenerate = config.comparator.kind == ComparatorSpec::Kind::best_member || config.write_sequences;
    RunResult run;
    if (pregenerate) {
        if (config.process.closed_loop()) {
            throw config_error("comparator", "closed-loop processes cannot be pregenerated");
        }
        const auto samples = generate(config.process, config.outcome, config.horizon, seed);
        if (config.write_sequences) emit_sequence(samples, dir / ("sequence_" + tag + ".csv"));
        const Comparator f0 = make_comparator(config, samples);
        SampleStream stream(samples);
        run = run_learner(family, config.outcome, stream, config.horizon, seed, f0);
    } else {
        const Comparator f0 = make_comparator(config);
        ProcessStream stream(config.process, config.outcome, seed);
        run = run_learner(family, config.outcome, stream, config.horizon, seed, f0);
    }
    out.truncated = run.truncated;
    emit_run_records(run.records, dir / ("run_" + tag + ".csv"));
    const auto curve = excess_loss_curve(run.records);
    emit_excess_curve(curve, dir / ("excess_" + tag + ".csv"));
    out.tail_excess = tail_excess(curve);

    if (config.checks.corollary32) {
        const auto path = dir / ("envelope_" + tag + ".csv");
        out.envelope_margin =
            envelope_margin(family, config.outcome, run.records, config.corollary32_from, config.corollary32_n_hat, &path);
    }
    out.ok = true;
    return out;
}

/// Runs every seed (in parallel), then every enabled check. Per-seed failures
/// are caught and reported as `seed-error` rows; other seeds still run.
inline SummaryReport run_experiment(const ExperimentConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + config.out_dir.string() + ": " + ec.message());

    SummaryReport report;
    const std::size_t k = config.seeds.size();
    const bool learner_checks = config.checks.consistency || config.checks.corollary32;

    if (learner_checks) {
        if (config.process.domain() != Domain::cube) {
            throw config_error("process", "the learner needs a unit-cube process; use condition-check for drift");
        }
        std::optional<ExpertFamily> family;
        try {
            family.emplace(config.expert, block_index(config.horizon));
        } catch (const domain_error& e) {
            throw config_error("expert.max_tier", e.what());
        }

        std::vector<SeedOutcome> seeds(k);
        parallel_for(k, config.workers, [&](std::size_t i) {
            try {
                seeds[i] = run_seed(config, *family, config.seeds[i]);
            } catch (const std::exception& e) {
                seeds[i].seed = config.seeds[i];
                seeds[i].ok = false;
                seeds[i].error = e.what();
            }
        });

        std::size_t ok = 0;
        for (const auto& s : seeds) {
            if (s.ok) {
                ++ok;
                continue;
            }
            report.rows.push_back({"seed-error:" + std::to_string(s.seed), false, 0.0, 0.0, 1, s.error});
        }
        if (config.checks.consistency) {
            std::size_t below = 0;
            for (const auto& s : seeds) {
                if (s.ok && s.tail_excess < config.consistency_threshold) ++below;
            }
            const double fraction = static_cast<double>(below) / static_cast<double>(k);
            report.rows.push_back({"consistency", fraction >= config.consistency_quorum, fraction,
                                   config.consistency_quorum, k,
                                   "fraction of seeds with tail excess below " +
                                       std::to_string(config.consistency_threshold)});
        }
        if (config.checks.corollary32) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& s : seeds) {
                if (s.ok) worst = std::max(worst, s.envelope_margin);
            }
            report.rows.push_back({"corollary32", ok == k && worst <= 0.0, worst, 0.0, k,
                                   "max over seeds and n of loss - best prefix expert - envelope"});
        }
    }

    if (config.checks.condition1) {
        const auto r = run_condition_check(config);
        emit_condition(r, config.out_dir / "condition.csv");
        report.rows.push_back(condition1_row(r, k));
    }
    if (config.checks.density) {
        const auto r = run_density_check(config);
        emit_density(r, config.out_dir / "density.csv");
        report.rows.push_back({"density", r.pass, r.final_loss, r.threshold, 1, "final profile value"});
    }
    if (config.checks.lemma31) {
        const auto r = hedge_bench(config.hedge_n, config.hedge_experts, config.hedge_delta, config.hedge_trials,
                                   config.seeds.front(), LossTable::iid_uniform, config.workers);
        emit_hedge_bench(r, config.out_dir / "hedge_bench.csv");
        report.rows.push_back({"lemma31", r.pass, r.frequency, r.threshold, r.trials, "bound violation frequency"});
    }

    write_summary(report, config.out_dir / "summary.csv");
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace uol
