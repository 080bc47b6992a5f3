// uol: command-line driver for the blockwise Hedge experiments.
//
//   uol run --config exp.cfg [--seed S] [--seeds K] [--horizon N] [--out DIR]
//   uol hedge-bench [--n 100] [--experts 10] [--delta 0.1] [--trials 2000]
//   uol condition-check --config exp.cfg
//   uol density-check --config exp.cfg
//   uol schedule-oracle [--horizon 100000]
//
// Exit status is 0 iff every verdict printed is PASS; 2 on usage or
// configuration errors.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uol/uol.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> seeds;
    std::optional<std::size_t> horizon;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Experiment config (key = value)");
    cmd->add_option("--seed", f.seed, "Base seed");
    cmd->add_option("--seeds", f.seeds, "Number of consecutive seeds starting at --seed");
    cmd->add_option("--horizon", f.horizon, "Horizon n");
    cmd->add_option("--out", f.out, "Output directory");
}

uol::ExperimentConfig resolve(const CommonFlags& f, uol::KeyValues defaults = {}) {
    uol::ConfigOverrides over;
    over.seed = f.seed;
    over.seeds = f.seeds;
    over.horizon = f.horizon;
    if (f.out) over.out_dir = *f.out;
    if (f.config.empty()) return uol::make_config(defaults, over);
    auto kv = uol::load_key_values(f.config);
    for (auto& [k, v] : defaults) kv.try_emplace(k, v);
    return uol::make_config(kv, over, std::filesystem::path(f.config).parent_path());
}

// Console output is for people; the CSVs carry full precision.
std::string brief(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void print_row(const uol::SummaryRow& r) {
    std::printf("%-16s %s  statistic=%s  threshold=%s  seeds=%zu  %s\n", r.check.c_str(), r.pass ? "PASS" : "FAIL",
                brief(r.statistic).c_str(), brief(r.threshold).c_str(), r.seeds, r.note.c_str());
}

int finish(const uol::SummaryReport& report) {
    for (const auto& r : report.rows) print_row(r);
    std::printf("wall-clock %.3f s\n", report.wall_seconds);
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blockwise Hedge online learner: experiments and bound checks"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "Full experiment from a config");
    add_common(run, run_flags);
    run->get_option("--config")->required();

    CommonFlags bench_flags;
    std::size_t bench_n = 100, bench_experts = 10, bench_trials = 2000;
    double bench_delta = 0.1;
    bool identical = false;
    auto* bench = app.add_subcommand("hedge-bench", "High-probability Hedge regret bound suite");
    add_common(bench, bench_flags);
    bench->add_option("--n", bench_n, "Hedge horizon");
    bench->add_option("--experts", bench_experts, "Expert count N");
    bench->add_option("--delta", bench_delta, "Failure probability");
    bench->add_option("--trials", bench_trials, "Independent trials (>= 100)");
    bench->add_flag("--identical", identical, "All experts share one loss sequence");

    CommonFlags cond_flags;
    auto* cond = app.add_subcommand("condition-check", "Finite-horizon continuous-submeasure profile");
    add_common(cond, cond_flags);

    CommonFlags dens_flags;
    auto* dens = app.add_subcommand("density-check", "Density profile of the expert family against f0");
    add_common(dens, dens_flags);

    CommonFlags sched_flags;
    auto* sched = app.add_subcommand("schedule-oracle", "block_index against the unrolled recurrence");
    add_common(sched, sched_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto config = resolve(run_flags);
            return finish(uol::run_experiment(config));
        }
        if (bench->parsed()) {
            const auto config = resolve(bench_flags);
            const auto started = std::chrono::steady_clock::now();
            const auto r = uol::hedge_bench(bench_n, bench_experts, bench_delta, bench_trials, config.seeds.front(),
                                            identical ? uol::LossTable::identical_experts
                                                      : uol::LossTable::iid_uniform,
                                            config.workers);
            if (bench_flags.out) {
                std::filesystem::create_directories(*bench_flags.out);
                uol::emit_hedge_bench(r, std::filesystem::path(*bench_flags.out) / "hedge_bench.csv");
            }
            uol::SummaryReport report;
            report.rows.push_back({"lemma31", r.pass, r.frequency, r.threshold, r.trials,
                                   "violations=" + std::to_string(r.violations) + " bound=" + brief(r.bound)});
            report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            return finish(report);
        }
        if (cond->parsed()) {
            const auto config = resolve(cond_flags);
            const auto started = std::chrono::steady_clock::now();
            const auto r = uol::run_condition_check(config);
            for (std::size_t k = 0; k < r.profile.size(); ++k) {
                std::printf("k=%zu profile=%s\n", k + 1, brief(r.profile[k]).c_str());
            }
            if (cond_flags.out) {
                std::filesystem::create_directories(*cond_flags.out);
                uol::emit_condition(r, std::filesystem::path(*cond_flags.out) / "condition.csv");
            }
            uol::SummaryReport report;
            report.rows.push_back(uol::condition1_row(r, config.seeds.size()));
            report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            return finish(report);
        }
        if (dens->parsed()) {
            const auto config = resolve(dens_flags);
            const auto started = std::chrono::steady_clock::now();
            const auto r = uol::run_density_check(config);
            for (const auto& p : r.profile) {
                std::printf("M=%zu loss=%s\n", p.experts, brief(p.loss).c_str());
            }
            if (dens_flags.out) {
                std::filesystem::create_directories(*dens_flags.out);
                uol::emit_density(r, std::filesystem::path(*dens_flags.out) / "density.csv");
            }
            uol::SummaryReport report;
            report.rows.push_back({"density", r.pass, r.final_loss, r.threshold, 1,
                                   r.monotone ? "nonincreasing" : "NOT nonincreasing"});
            report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            return finish(report);
        }
        if (sched->parsed()) {
            const std::size_t horizon = sched_flags.horizon.value_or(100000);
            const auto started = std::chrono::steady_clock::now();
            const auto r = uol::schedule_oracle(horizon);
            uol::SummaryReport report;
            report.rows.push_back({"schedule", r.pass(), static_cast<double>(r.mismatches), 0.0, 1,
                                   r.partition_ok ? "blocks partition [1, n]" : "partition broken"});
            report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            return finish(report);
        }
    } catch (const uol::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
