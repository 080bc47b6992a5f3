#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "uol/harness.hpp"

using namespace uol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("uol_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KeyValues parse(const std::string& text) {
    std::istringstream in(text);
    return parse_key_values(in);
}

std::string config_error_key(const KeyValues& kv) {
    try {
        make_config(kv);
    } catch (const config_error& e) {
        return e.key();
    }
    return "";
}

}  // namespace

TEST(Config, SectionsAndComments) {
    const auto kv = parse(
        "process = coin-mixture:0.1,0.9  # two coins\n"
        "horizon = 500\n"
        "[expert]\n"
        "max_tier = 3\n"
        "[checks]\n"
        "density = true\n");
    EXPECT_EQ(kv.at("expert.max_tier"), "3");
    const auto c = make_config(kv);
    EXPECT_EQ(c.horizon, 500u);
    EXPECT_EQ(c.expert.max_tier, 3);
    EXPECT_TRUE(c.checks.density);
    EXPECT_TRUE(c.checks.consistency);
    EXPECT_TRUE(std::holds_alternative<MixtureSpec>(c.process.kind));
}

TEST(Config, Defaults) {
    const auto c = make_config({});
    EXPECT_EQ(c.outcome.kind(), OutcomeKind::binary);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1}));
    EXPECT_EQ(c.consistency_threshold, 0.05);
    EXPECT_EQ(c.consistency_quorum, 0.9);
    EXPECT_EQ(c.comparator.kind, ComparatorSpec::Kind::member);
}

TEST(Config, OverridesWin) {
    ConfigOverrides over;
    over.seed = 7;
    over.seeds = 3;
    over.horizon = 42;
    over.out_dir = "elsewhere";
    const auto c = make_config(parse("seed = 1\nseeds = 10\nhorizon = 9\n"), over);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7, 8, 9}));
    EXPECT_EQ(c.horizon, 42u);
    EXPECT_EQ(c.out_dir, fs::path("elsewhere"));
}

TEST(Config, ErrorsNameTheKey) {
    EXPECT_EQ(config_error_key(parse("process = brownian\n")), "process");
    EXPECT_EQ(config_error_key(parse("horizon = -3\n")), "horizon");
    EXPECT_EQ(config_error_key(parse("horizon = 0\n")), "horizon");
    EXPECT_EQ(config_error_key(parse("colour = blue\n")), "colour");
    EXPECT_EQ(config_error_key(parse("outcome = squared\n")), "outcome");
    EXPECT_EQ(config_error_key(parse("comparator = oracle\n")), "comparator");
    EXPECT_EQ(config_error_key(parse("comparator = custom-table:0,1,1\n")), "comparator");
    EXPECT_EQ(config_error_key(parse("process = drift\nprocess.noise = 0.1\n")), "process");
    EXPECT_EQ(config_error_key(parse("[checks]\ndensity = maybe\n")), "checks.density");
    EXPECT_EQ(config_error_key(parse("density.m_grid = 4,2\n")), "density.m_grid");
    EXPECT_EQ(config_error_key(parse("process = markov:/nonexistent/matrix.txt\n")), "process");
    EXPECT_THROW(parse("[broken\n"), config_error);
    EXPECT_THROW(parse("no equals sign\n"), config_error);
    EXPECT_THROW(load_config("/nonexistent/uol.cfg"), io_error);
}

TEST(Config, MatrixFileRelativeToConfig) {
    const auto dir = scratch("matrix");
    std::ofstream(dir / "chain.txt") << "# two states\n0.9 0.1\n0.3 0.7\n";
    std::ofstream(dir / "run.cfg") << "process = markov:chain.txt\n";
    const auto c = load_config(dir / "run.cfg");
    const auto* m = std::get_if<MarkovSpec>(&c.process.kind);
    ASSERT_NE(m, nullptr);
    EXPECT_EQ(m->transition[1][0], 0.3);
}

TEST(Csv, HeaderOnlyAndRows) {
    const auto dir = scratch("csv");
    emit_csv(std::vector<double>{}, CsvSchema::excess_curve, dir / "empty.csv");
    EXPECT_EQ(slurp(dir / "empty.csv"), "t,excess\n");
    emit_csv(std::vector<double>{0.5, 0.25}, CsvSchema::excess_curve, dir / "two.csv");
    EXPECT_EQ(slurp(dir / "two.csv"), "t,excess\n1,0.5\n2,0.25\n");
    EXPECT_THROW(emit_csv(std::vector<double>{}, CsvSchema::run_record, dir / "x.csv"), contract_error);
}

TEST(Csv, RunRecordSchema) {
    const auto dir = scratch("records");
    RunRecord r;
    r.t = 1;
    r.block = 1;
    r.x = {0.1, 0.2};
    r.expert_index = 1;
    r.y_hat = {1};
    r.y = {0};
    r.step_loss = 1;
    r.cum_loss = 1;
    emit_run_records(std::vector<RunRecord>{r}, dir / "run.csv");
    EXPECT_EQ(slurp(dir / "run.csv"),
              "t,block,x,expert_index,y_hat,y,step_loss,comparator_loss,cum_loss,cum_comparator_loss\n"
              "1,1,0.10000000000000001;0.20000000000000001,1,1,0,1,0,1,0\n");
}

TEST(Csv, RealsRoundTrip) {
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) {
        const double v = std::ldexp(rng.uniform(), static_cast<int>(rng.below(200)) - 100);
        EXPECT_EQ(std::strtod(format_real(v).c_str(), nullptr), v);
    }
}

TEST(Csv, UnwritablePathIsIoError) {
    EXPECT_THROW(emit_csv(std::vector<double>{1.0}, CsvSchema::excess_curve, "/nonexistent/dir/out.csv"), io_error);
}

TEST(Csv, SequenceHeaders) {
    const auto dir = scratch("sequence");
    emit_sequence(std::vector<Sample>{{{0.5}, {1}}}, dir / "one.csv");
    EXPECT_EQ(slurp(dir / "one.csv"), "t,x,y\n1,0.5,1\n");
    emit_sequence(std::vector<Sample>{{{0.5, 0.25}, {0}}}, dir / "two.csv");
    EXPECT_EQ(slurp(dir / "two.csv"), "t,x1,x2,y\n1,0.5,0.25,0\n");
}

namespace {

ExperimentConfig small_config(const fs::path& out, std::size_t horizon, std::size_t seeds) {
    ConfigOverrides over;
    over.out_dir = out;
    over.horizon = horizon;
    over.seeds = seeds;
    return make_config(parse("process = coin-mixture:0.1,0.9\ncomparator = best-member:16\n"
                             "output.sequences = true\n[checks]\ncorollary32 = true\n"),
                       over);
}

}  // namespace

TEST(RunExperiment, HorizonOneWritesOneRow) {
    const auto dir = scratch("h1");
    const auto report = run_experiment(small_config(dir, 1, 1));
    const std::string run = slurp(dir / "run_1.csv");
    EXPECT_EQ(std::count(run.begin(), run.end(), '\n'), 2);
    EXPECT_NE(report.find("consistency"), nullptr);
    EXPECT_TRUE(fs::exists(dir / "summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "sequence_1.csv"));
}

TEST(RunExperiment, RerunsAreByteIdentical) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    run_experiment(small_config(a, 2000, 3));
    run_experiment(small_config(b, 2000, 3));
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        ASSERT_TRUE(fs::exists(b / name)) << name;
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
        ++compared;
    }
    EXPECT_EQ(compared, 3u * 4u + 1u);  // run, excess, envelope, sequence per seed + summary
}

TEST(RunExperiment, FailingSeedIsIsolated) {
    const auto dir = scratch("isolate");
    fs::create_directories(dir / "run_2.csv");  // makes seed 2 unwritable
    const auto report = run_experiment(small_config(dir, 200, 3));
    const auto* err = report.find("seed-error:2");
    ASSERT_NE(err, nullptr);
    EXPECT_FALSE(err->pass);
    EXPECT_TRUE(fs::exists(dir / "run_1.csv"));
    EXPECT_TRUE(fs::exists(dir / "run_3.csv"));
    EXPECT_FALSE(report.all_pass());
}

TEST(RunExperiment, DriftNeedsConditionCheck) {
    const auto dir = scratch("drift");
    ConfigOverrides over;
    over.out_dir = dir;
    EXPECT_THROW(run_experiment(make_config(parse("process = drift\n"), over)), config_error);
    const auto report = run_experiment(make_config(
        parse("process = drift\nhorizon = 5000\n[checks]\nconsistency = false\ncondition1 = true\n"
              "[condition1]\nsets = tails\ncount = 5\n"),
        over));
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_FALSE(report.rows[0].pass);
}

TEST(HedgeBench, DegenerateCasesNeverViolate) {
    const auto single = hedge_bench(50, 1, 0.5, 100, 1);
    EXPECT_EQ(single.violations, 0u);
    EXPECT_TRUE(single.pass);
    const auto same = hedge_bench(50, 5, 0.1, 100, 1, LossTable::identical_experts);
    EXPECT_EQ(same.violations, 0u);
    for (const auto& t : same.per_trial) EXPECT_EQ(t.learner_loss, t.best_expert_loss);
    EXPECT_THROW(hedge_bench(50, 5, 0.1, 99, 1), domain_error);
}

TEST(HedgeBench, DeterministicAcrossWorkerCounts) {
    const auto a = hedge_bench(100, 10, 0.1, 200, 5, LossTable::iid_uniform, 1);
    const auto b = hedge_bench(100, 10, 0.1, 200, 5, LossTable::iid_uniform, 4);
    ASSERT_EQ(a.per_trial.size(), b.per_trial.size());
    for (std::size_t k = 0; k < a.per_trial.size(); ++k) {
        EXPECT_EQ(a.per_trial[k].learner_loss, b.per_trial[k].learner_loss);
    }
}

TEST(ScheduleOracle, Clean) {
    const auto r = schedule_oracle(20000);
    EXPECT_EQ(r.mismatches, 0u);
    EXPECT_TRUE(r.partition_ok);
}

TEST(DensityCheck, ThresholdComparatorOnUniform) {
    const auto dir = scratch("density");
    ConfigOverrides over;
    over.out_dir = dir;
    over.horizon = 20000;
    const auto c = make_config(parse("comparator = threshold:0.3333333333333333\n"), over);
    const auto r = run_density_check(c);
    EXPECT_TRUE(r.monotone);
    // tier boundaries 2, 4, 16, 256, 65536 -> resolutions 0..4
    ASSERT_EQ(r.profile.size(), 5u);
    for (std::size_t m = 1; m < r.profile.size(); ++m) {
        EXPECT_LE(r.profile[m].loss, std::ldexp(1.0, -static_cast<int>(m)) + 0.01);
    }
}
