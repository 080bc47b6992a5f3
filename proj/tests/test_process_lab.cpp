#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "uol/process_lab.hpp"

using namespace uol;

namespace {

ProcessSpec iid(ResponseRule rule = ThresholdRule{}, std::size_t d = 1) {
    ProcessSpec s;
    s.kind = IidSpec{UniformCube{}, rule};
    s.dimension = d;
    return s;
}

std::vector<std::uint64_t> seed_range(std::uint64_t from, std::size_t count) {
    std::vector<std::uint64_t> out(count);
    std::iota(out.begin(), out.end(), from);
    return out;
}

}  // namespace

TEST(Generate, PointMassWithConstantRule) {
    ProcessSpec s;
    s.kind = IidSpec{PointMass{{0.25}}, ConstantRule{{1}}};
    for (const auto& smp : generate(s, OutcomeSpace::binary(), 50, 3)) {
        EXPECT_EQ(smp.x, std::vector<double>{0.25});
        EXPECT_EQ(smp.y.value, 1.0);
    }
}

TEST(Generate, DriftCountsUp) {
    ProcessSpec s;
    s.kind = DriftSpec{};
    EXPECT_EQ(s.domain(), Domain::naturals);
    EXPECT_FALSE(s.stationary());
    const auto out = generate(s, OutcomeSpace::binary(), 10, 1);
    for (std::size_t t = 0; t < out.size(); ++t) EXPECT_EQ(out[t].x[0], static_cast<double>(t + 1));
}

TEST(Generate, ThresholdRuleAndDimensions) {
    const auto out = generate(iid(ThresholdRule{0.3}, 3), OutcomeSpace::binary(), 500, 2);
    for (const auto& smp : out) {
        ASSERT_EQ(smp.x.size(), 3u);
        for (double c : smp.x) {
            ASSERT_GE(c, 0.0);
            ASSERT_LT(c, 1.0);
        }
        ASSERT_EQ(smp.y.value, smp.x[0] > 0.3 ? 1.0 : 0.0);
    }
}

TEST(Generate, DeterministicPerSeed) {
    const auto a = generate(iid(CoinRule{0.4}), OutcomeSpace::binary(), 200, 9);
    const auto b = generate(iid(CoinRule{0.4}), OutcomeSpace::binary(), 200, 9);
    const auto c = generate(iid(CoinRule{0.4}), OutcomeSpace::binary(), 200, 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].x, b[i].x);
        ASSERT_EQ(a[i].y, b[i].y);
    }
    EXPECT_NE(a[0].x, c[0].x);
}

TEST(Generate, MixtureIsBimodalAcrossSeeds) {
    ProcessSpec s;
    s.kind = MixtureSpec{{iid(CoinRule{0.1}), iid(CoinRule{0.9})}, {0.5, 0.5}};
    EXPECT_TRUE(s.stationary());
    std::vector<double> rates;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const auto out = generate(s, OutcomeSpace::binary(), 1000, seed);
        double ones = 0.0;
        for (const auto& smp : out) ones += smp.y.value;
        rates.push_back(ones / 1000.0);
    }
    std::vector<double> low, high;
    for (double r : rates) (r < 0.5 ? low : high).push_back(r);
    ASSERT_FALSE(low.empty());
    ASSERT_FALSE(high.empty());
    const double mean_low = std::accumulate(low.begin(), low.end(), 0.0) / static_cast<double>(low.size());
    const double mean_high = std::accumulate(high.begin(), high.end(), 0.0) / static_cast<double>(high.size());
    EXPECT_GE(mean_high - mean_low, 0.6);
    const double overall = std::accumulate(rates.begin(), rates.end(), 0.0) / 1000.0;
    EXPECT_NEAR(overall, 0.5, 0.02);
    // No seed sits between the two components.
    for (double r : rates) EXPECT_TRUE(r < 0.2 || r > 0.8) << r;
}

TEST(Generate, NoiseFlipsBinaryLabels) {
    auto s = iid(ConstantRule{{0}});
    s.noise = 0.25;
    const auto out = generate(s, OutcomeSpace::binary(), 20000, 5);
    double ones = 0.0;
    for (const auto& smp : out) ones += smp.y.value;
    EXPECT_NEAR(ones / 20000.0, 0.25, 0.015);

    auto d = iid(ConstantRule{{2}});
    d.noise = 1.0;
    for (const auto& smp : generate(d, OutcomeSpace::discrete(4), 500, 1)) EXPECT_NE(smp.y.value, 2.0);
}

TEST(Generate, RejectsBadSpecs) {
    ProcessSpec drift;
    drift.kind = DriftSpec{};
    drift.noise = 0.1;
    EXPECT_THROW(generate(drift, OutcomeSpace::binary(), 5, 1), domain_error);

    ProcessSpec adv;
    adv.kind = AdversarialSpec{UniformCube{}, AdversarialRule::flip_last};
    EXPECT_TRUE(adv.closed_loop());
    EXPECT_THROW(generate(adv, OutcomeSpace::binary(), 5, 1), contract_error);

    ProcessSpec mix;
    mix.kind = MixtureSpec{{iid()}, {0.5, 0.5}};
    EXPECT_THROW(generate(mix, OutcomeSpace::binary(), 5, 1), domain_error);

    EXPECT_THROW(generate(iid(), OutcomeSpace::binary(), 0, 1), domain_error);
}

TEST(Generate, AdversarialOpenLoop) {
    ProcessSpec alt;
    alt.kind = AdversarialSpec{UniformCube{}, AdversarialRule::alternate};
    const auto a = generate(alt, OutcomeSpace::binary(), 6, 1);
    for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(a[t].y.value, static_cast<double>((t + 1) % 2));

    ProcessSpec anti;
    anti.kind = AdversarialSpec{UniformCube{}, AdversarialRule::anti_majority};
    const auto b = generate(anti, OutcomeSpace::binary(), 6, 1);
    // tie at t=1 gives 1; then zeros are the minority, and so on.
    const std::vector<double> expect = {1, 0, 1, 0, 1, 0};
    for (std::size_t t = 0; t < b.size(); ++t) EXPECT_EQ(b[t].y.value, expect[t]);
}

TEST(StationaryDistribution, TwoStateChain) {
    const auto pi = stationary_distribution({{0.9, 0.1}, {0.3, 0.7}});
    EXPECT_NEAR(pi[0], 0.75, 1e-12);
    EXPECT_NEAR(pi[1], 0.25, 1e-12);
    EXPECT_THROW(stationary_distribution({{0.5, 0.4}, {0.3, 0.7}}), domain_error);
    EXPECT_THROW(stationary_distribution({{1.0, 0.0}, {0.0, 1.0}}), domain_error);
}

TEST(Generate, MarkovVisitsStationaryMass) {
    // Stationary from t = 1: the slab occupancy matches pi within 3 sqrt(ln n / n).
    ProcessSpec s;
    s.kind = MarkovSpec{{{0.9, 0.1}, {0.3, 0.7}}, ThresholdRule{0.5}};
    const std::size_t n = 20000;
    const double tol = 3.0 * std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
    double first = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        first += generate(s, OutcomeSpace::binary(), 1, seed)[0].x[0] < 0.5 ? 1.0 : 0.0;
    }
    EXPECT_NEAR(first / 200.0, 0.75, 0.1);
    const auto out = generate(s, OutcomeSpace::binary(), n, 4);
    double slab0 = 0.0;
    for (const auto& smp : out) slab0 += smp.x[0] < 0.5 ? 1.0 : 0.0;
    EXPECT_NEAR(slab0 / static_cast<double>(n), 0.75, tol);
}

TEST(Generate, RyabkoLabelsMatchSlabs) {
    ProcessSpec s;
    s.kind = RyabkoSpec{{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}};
    const auto out = generate(s, OutcomeSpace::discrete(3), 300, 2);
    for (std::size_t t = 0; t < out.size(); ++t) {
        const auto k = static_cast<std::size_t>(out[t].y.value);
        ASSERT_GE(out[t].x[0], static_cast<double>(k) / 3.0);
        ASSERT_LT(out[t].x[0], static_cast<double>(k + 1) / 3.0);
        if (t > 0) {
            ASSERT_EQ(k, (static_cast<std::size_t>(out[t - 1].y.value) + 1) % 3);
        }
    }
    EXPECT_THROW(generate(s, OutcomeSpace::binary(), 5, 1), domain_error);
}

// Empirical x-distributions of the two halves of a stationary run agree in
// total variation on ten slabs of coordinate 0.
TEST(Generate, StationaryHalvesAgree) {
    ProcessSpec markov;
    markov.kind = MarkovSpec{{{0.9, 0.1}, {0.3, 0.7}}, ThresholdRule{0.5}};
    ProcessSpec mixture;
    mixture.kind = MixtureSpec{{iid(CoinRule{0.1}), iid(CoinRule{0.9})}, {0.5, 0.5}};
    ProcessSpec ryabko;
    ryabko.kind = RyabkoSpec{{{0.8, 0.2}, {0.4, 0.6}}};
    const std::size_t n = 100000;
    const double tol = 3.0 * std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
    for (const auto& spec : {iid(), markov, mixture, ryabko}) {
        ASSERT_TRUE(spec.stationary());
        const auto out = generate(spec, OutcomeSpace::binary(), n, 13);
        std::vector<double> first(10, 0.0), second(10, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const auto bin = std::min<std::size_t>(static_cast<std::size_t>(out[t].x[0] * 10.0), 9);
            (t < n / 2 ? first : second)[bin] += 2.0 / static_cast<double>(n);
        }
        double tv = 0.0;
        for (std::size_t b = 0; b < 10; ++b) tv += std::fabs(first[b] - second[b]);
        EXPECT_LE(tv / 2.0, tol);
    }
}

TEST(EmpiricalMu, WholeAndEmptySets) {
    const auto xs = points_of(generate(iid(), OutcomeSpace::binary(), 1000, 1));
    const auto whole = empirical_mu(xs, [](std::span<const double>) { return true; });
    EXPECT_EQ(whole.running_mean, 1.0);
    EXPECT_EQ(whole.tail_max, 1.0);
    const auto none = empirical_mu(xs, [](std::span<const double>) { return false; });
    EXPECT_EQ(none.running_mean, 0.0);
    EXPECT_EQ(none.tail_max, 0.0);
    const std::vector<std::vector<double>> one = {{0.5}};
    EXPECT_THROW(empirical_mu(one, [](std::span<const double>) { return true; }), domain_error);
}

TEST(EmpiricalMu, ShrinkingIntervalsUnderUniform) {
    const auto xs = points_of(generate(iid(), OutcomeSpace::binary(), 100000, 7));
    const auto sets = shrinking_intervals(20);
    double prev = 2.0;
    for (std::size_t k = 1; k <= sets.size(); ++k) {
        const auto est = empirical_mu(xs, sets[k - 1]);
        EXPECT_NEAR(est.running_mean, 1.0 / static_cast<double>(k), 0.02) << "k=" << k;
        EXPECT_LE(est.running_mean, prev);
        EXPECT_GE(est.tail_max, est.running_mean);
        prev = est.running_mean;
    }
}

TEST(TailMax, HalfWindow) {
    const std::vector<double> means = {0.9, 0.1, 0.2, 0.3, 0.25};
    EXPECT_EQ(tail_max_of_means(means), 0.3);  // window m = 3..5
    const std::vector<double> single = {0.4};
    EXPECT_EQ(tail_max_of_means(single), 0.4);
}

TEST(ConditionCheck, IidPasses) {
    const auto seeds = seed_range(1, 5);
    const auto r = condition_check(iid(), OutcomeSpace::binary(), shrinking_intervals(10), 20000, seeds, 0.15);
    EXPECT_TRUE(r.pass);
    for (std::size_t k = 1; k <= 10; ++k) EXPECT_NEAR(r.profile[k - 1], 1.0 / static_cast<double>(k), 0.02);
}

TEST(ConditionCheck, DriftFailsOnTailSets) {
    ProcessSpec drift;
    drift.kind = DriftSpec{};
    const auto seeds = seed_range(1, 3);
    const auto r = condition_check(drift, OutcomeSpace::binary(), tail_sets(20), 100000, seeds, 0.15);
    EXPECT_FALSE(r.pass);
    for (double v : r.profile) EXPECT_GE(v, 0.98);
}

TEST(ConditionCheck, EmptySetsPassTrivially) {
    const auto seeds = seed_range(1, 2);
    const auto r = condition_check(iid(), OutcomeSpace::binary(), empty_sets(5), 100, seeds, 0.15);
    EXPECT_TRUE(r.pass);
    for (double v : r.profile) EXPECT_EQ(v, 0.0);
}

TEST(ConditionCheck, NonNestedSetsAreRejected) {
    std::vector<SetPredicate> sets = {[](std::span<const double> x) { return x[0] < 0.5; },
                                      [](std::span<const double> x) { return x[0] > 0.5; }};
    const auto seeds = seed_range(1, 1);
    EXPECT_THROW(condition_check(iid(), OutcomeSpace::binary(), sets, 100, seeds, 0.15), contract_error);
}

TEST(ExcessCurve, TrivialCases) {
    std::vector<RunRecord> recs(4);
    for (auto& r : recs) {
        r.step_loss = 1.0;
        r.comparator_loss = 1.0;
    }
    for (double v : excess_loss_curve(recs)) EXPECT_EQ(v, 0.0);
    recs[0].comparator_loss = 0.0;
    const auto c = excess_loss_curve(recs);
    EXPECT_EQ(c, (std::vector<double>{1.0, 0.5, 1.0 / 3.0, 0.25}));
    EXPECT_EQ(tail_excess(c), 0.5);
    EXPECT_TRUE(excess_loss_curve({}).empty());
}
