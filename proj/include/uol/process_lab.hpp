#pragma once
// Input/response process generators and finite-horizon estimators of
// upper empirical frequencies.
//
// Every generator is a pure function of (spec, seed). Stationary kinds:
// iid, markov (started from its stationary law), mixture (component drawn once
// at t = 0 and held, so stationary but not ergodic) and ryabko (labels form a
// stationary chain, x drawn i.i.d. given the label). drift emits x_t = t on
// the naturals and violates the continuous-submeasure condition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "uol/errors.hpp"
#include "uol/hedge.hpp"
#include "uol/loss_space.hpp"
#include "uol/rng.hpp"
#include "uol/run_record.hpp"

namespace uol {

using Matrix = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// Specs

struct UniformCube {};
struct PointMass {
    std::vector<double> at;
};
using Marginal = std::variant<UniformCube, PointMass>;

/// y as a function of the current x (or a fresh coin).
struct ConstantRule {
    Outcome value;
};
struct ThresholdRule {
    double cut{0.5};  // y = 1[x_0 > cut]
};
struct CoinRule {
    double p{0.5};  // y ~ Bernoulli(p), independent of x
};
using ResponseRule = std::variant<ConstantRule, ThresholdRule, CoinRule>;

struct IidSpec {
    Marginal marginal{UniformCube{}};
    ResponseRule rule{ThresholdRule{}};
};

/// Hidden state s_t follows the chain; x_t is uniform on the s_t-th of K equal
/// slabs of coordinate 0, other coordinates uniform.
struct MarkovSpec {
    Matrix transition;
    ResponseRule rule{ThresholdRule{}};
};

struct ProcessSpec;

struct MixtureSpec {
    std::vector<ProcessSpec> components;
    std::vector<double> weights;
};

struct DriftSpec {};

/// Labels follow a stationary chain; given y_t = k, x_t is uniform on the k-th
/// of K equal slabs of coordinate 0.
struct RyabkoSpec {
    Matrix transition;
};

enum class AdversarialRule {
    alternate,      // y_t = t mod 2
    anti_majority,  // y_t = the minority label of y_1..y_{t-1} (ties give 1)
    flip_last,      // y_t = 1 - yhat_{t-1}; closed loop
};

struct AdversarialSpec {
    Marginal marginal{UniformCube{}};
    AdversarialRule rule{AdversarialRule::alternate};
};

struct ProcessSpec {
    std::variant<IidSpec, MarkovSpec, MixtureSpec, DriftSpec, RyabkoSpec, AdversarialSpec> kind{IidSpec{}};
    std::size_t dimension{1};
    double noise{0.0};  // probability of corrupting y

    Domain domain() const { return std::holds_alternative<DriftSpec>(kind) ? Domain::naturals : Domain::cube; }
    bool stationary() const;
    bool closed_loop() const {
        const auto* adv = std::get_if<AdversarialSpec>(&kind);
        return adv && adv->rule == AdversarialRule::flip_last;
    }
};

inline bool ProcessSpec::stationary() const {
    if (std::holds_alternative<DriftSpec>(kind) || std::holds_alternative<AdversarialSpec>(kind)) return false;
    if (const auto* mix = std::get_if<MixtureSpec>(&kind)) {
        return std::all_of(mix->components.begin(), mix->components.end(),
                           [](const ProcessSpec& c) { return c.stationary(); });
    }
    return true;
}

/// Stationary distribution of a row-stochastic matrix: solves pi (P - I) = 0
/// with the normalization sum(pi) = 1 replacing the last equation.
inline std::vector<double> stationary_distribution(const Matrix& p) {
    const std::size_t k = p.size();
    if (k == 0) throw domain_error("transition matrix is empty");
    for (const auto& row : p) {
        if (row.size() != k) throw domain_error("transition matrix is not square");
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) throw domain_error("transition probabilities must be nonnegative");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw domain_error("transition rows must sum to 1");
    }
    // a x = b with a = (P - I)^T, last row replaced by ones.
    Matrix a(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) a[r][c] = p[c][r] - (r == c ? 1.0 : 0.0);
    }
    for (std::size_t c = 0; c < k; ++c) a[k - 1][c] = 1.0;
    a[k - 1][k] = 1.0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        if (std::fabs(a[pivot][col]) < 1e-14) throw domain_error("chain has no unique stationary distribution");
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> pi(k);
    for (std::size_t r = 0; r < k; ++r) pi[r] = std::max(0.0, a[r][k] / a[r][r]);
    return pi;
}

inline void validate(const ProcessSpec& spec, const OutcomeSpace& space) {
    if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) throw domain_error("noise rate must lie in [0, 1]");
    if (spec.dimension < 1) throw domain_error("process dimension must be at least 1");
    const bool deterministic =
        std::holds_alternative<DriftSpec>(spec.kind) || std::holds_alternative<AdversarialSpec>(spec.kind);
    if (deterministic && spec.noise > 0.0) throw domain_error("non-stochastic process kinds take no noise");
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, MarkovSpec>) {
                stationary_distribution(k.transition);
            } else if constexpr (std::is_same_v<K, RyabkoSpec>) {
                stationary_distribution(k.transition);
                if (space.finite() && k.transition.size() > space.label_count()) {
                    throw domain_error("ryabko chain has more labels than the outcome space");
                }
            } else if constexpr (std::is_same_v<K, MixtureSpec>) {
                if (k.components.empty() || k.components.size() != k.weights.size()) {
                    throw domain_error("mixture needs one weight per component");
                }
                double total = 0.0;
                for (double w : k.weights) {
                    if (!(w >= 0.0)) throw domain_error("mixture weights must be nonnegative");
                    total += w;
                }
                if (std::fabs(total - 1.0) > 1e-9) throw domain_error("mixture weights must sum to 1");
                for (const auto& c : k.components) {
                    if (c.dimension != spec.dimension) throw domain_error("mixture component dimension mismatch");
                    validate(c, space);
                }
            } else if constexpr (std::is_same_v<K, IidSpec> || std::is_same_v<K, AdversarialSpec>) {
                if (const auto* pm = std::get_if<PointMass>(&k.marginal)) {
                    if (pm->at.size() != spec.dimension) throw domain_error("point mass dimension mismatch");
                }
            }
        },
        spec.kind);
}

// ---------------------------------------------------------------------------
// Generation

namespace detail {

inline std::size_t categorical(std::span<const double> probs, double u) { return hedge_sample(probs, u); }

}  // namespace detail

/// Stateful sampler for one (spec, seed). next() yields (x_t, y_t); the
/// closed-loop adversary reads the learner's past predictions.
class ProcessStream {
public:
    ProcessStream(ProcessSpec spec, OutcomeSpace space, std::uint64_t seed)
        : spec_(std::move(spec)), space_(std::move(space)), rng_(seed, Stream::process),
          noise_rng_(seed, Stream::noise) {
        validate(spec_, space_);
        if (const auto* mix = std::get_if<MixtureSpec>(&spec_.kind)) {
            Rng pick(seed, Stream::mixture);
            component_ = detail::categorical(mix->weights, pick.uniform());
            // The component shares this stream's generators.
            inner_.reset(new ProcessStream(mix->components[component_], space_,
                                           derive_seed(seed, 100 + component_), rng_));
        }
    }

    const ProcessSpec& spec() const { return spec_; }
    /// Mixture component drawn at t = 0 (0 for non-mixtures).
    std::size_t component() const { return component_; }

    std::optional<Sample> next(std::span<const Outcome> past_predictions) {
        ++t_;
        Sample s = inner_ ? *inner_->next(past_predictions) : draw(past_predictions);
        if (spec_.noise > 0.0 && noise_rng_.bernoulli(spec_.noise)) s.y = corrupt(s.y);
        return s;
    }

private:
    ProcessStream(const ProcessSpec& spec, const OutcomeSpace& space, std::uint64_t noise_seed, const Rng& shared)
        : spec_(spec), space_(space), rng_(shared), noise_rng_(noise_seed, Stream::noise) {}

    Sample draw(std::span<const Outcome> past) {
        return std::visit([&](const auto& k) { return draw_kind(k, past); }, spec_.kind);
    }

    std::vector<double> draw_x(const Marginal& m) {
        if (const auto* pm = std::get_if<PointMass>(&m)) return pm->at;
        std::vector<double> x(spec_.dimension);
        for (double& c : x) c = rng_.uniform();
        return x;
    }

    // Coordinate 0 uniform on slab `k` of `slabs`, the rest uniform.
    std::vector<double> slab_x(std::size_t k, std::size_t slabs) {
        std::vector<double> x(spec_.dimension);
        x[0] = (static_cast<double>(k) + rng_.uniform()) / static_cast<double>(slabs);
        for (std::size_t c = 1; c < x.size(); ++c) x[c] = rng_.uniform();
        return x;
    }

    Outcome respond(const ResponseRule& rule, std::span<const double> x) {
        if (const auto* c = std::get_if<ConstantRule>(&rule)) return c->value;
        if (const auto* th = std::get_if<ThresholdRule>(&rule)) return {x[0] > th->cut ? 1.0 : 0.0};
        return {rng_.bernoulli(std::get<CoinRule>(rule).p) ? 1.0 : 0.0};
    }

    Sample draw_kind(const IidSpec& k, std::span<const Outcome>) {
        auto x = draw_x(k.marginal);
        const Outcome y = respond(k.rule, x);
        return {std::move(x), y};
    }

    std::size_t chain_step(const Matrix& transition) {
        if (!pi_) {
            pi_ = stationary_distribution(transition);
            state_ = detail::categorical(*pi_, rng_.uniform());
        } else {
            state_ = detail::categorical(transition[state_], rng_.uniform());
        }
        return state_;
    }

    Sample draw_kind(const MarkovSpec& k, std::span<const Outcome>) {
        const std::size_t s = chain_step(k.transition);
        auto x = slab_x(s, k.transition.size());
        const Outcome y = respond(k.rule, x);
        return {std::move(x), y};
    }

    Sample draw_kind(const RyabkoSpec& k, std::span<const Outcome>) {
        const std::size_t label = chain_step(k.transition);
        return {slab_x(label, k.transition.size()), {static_cast<double>(label)}};
    }

    Sample draw_kind(const MixtureSpec&, std::span<const Outcome>) { return {}; }  // handled by inner_

    Sample draw_kind(const DriftSpec&, std::span<const Outcome>) {
        return {{static_cast<double>(t_)}, {0.0}};
    }

    Sample draw_kind(const AdversarialSpec& k, std::span<const Outcome> past) {
        auto x = draw_x(k.marginal);
        double y = 0.0;
        switch (k.rule) {
        case AdversarialRule::alternate: y = static_cast<double>(t_ % 2); break;
        case AdversarialRule::anti_majority: y = 2 * ones_ > t_ - 1 ? 0.0 : 1.0; break;
        case AdversarialRule::flip_last:
            if (past.size() + 1 < t_) throw contract_error("closed-loop adversary needs the learner's predictions");
            y = past.empty() ? 0.0 : 1.0 - past.back().value;
            break;
        }
        if (y == 1.0) ++ones_;
        return {std::move(x), {y}};
    }

    Outcome corrupt(Outcome y) {
        if (!space_.finite()) return {noise_rng_.uniform()};
        const std::uint64_t labels = space_.label_count();
        if (labels < 2) return y;
        // Uniform over the other labels.
        auto other = noise_rng_.below(labels - 1);
        if (static_cast<double>(other) >= y.value) ++other;
        return {static_cast<double>(other)};
    }

    ProcessSpec spec_;
    OutcomeSpace space_;
    Rng rng_;
    Rng noise_rng_;
    std::size_t t_{0};
    std::size_t component_{0};
    std::unique_ptr<ProcessStream> inner_;
    std::optional<std::vector<double>> pi_;
    std::size_t state_{0};
    std::size_t ones_{0};
};

/// n open-loop samples. Closed-loop specs need a learner; see run_learner.
inline std::vector<Sample> generate(const ProcessSpec& spec, const OutcomeSpace& space, std::size_t n,
                                    std::uint64_t seed) {
    if (n < 1) throw domain_error("horizon must be positive");
    if (spec.closed_loop()) throw contract_error("closed-loop process cannot be generated without a learner");
    ProcessStream stream(spec, space, seed);
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        auto s = stream.next({});
        space.require(s->y);
        out.push_back(std::move(*s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Estimators

using SetPredicate = std::function<bool(std::span<const double>)>;

struct EmpiricalMeasureEstimate {
    double running_mean{0.0};  // (1/n) sum_t 1_A(x_t)
    double tail_max{0.0};      // max over m in [ceil(n/2), n] of the running mean at m
    std::size_t horizon{0};
};

/// Max over m in [ceil(n/2), n] of prefix averages; the finite-horizon
/// stand-in for a limsup.
inline double tail_max_of_means(std::span<const double> prefix_means) {
    const std::size_t n = prefix_means.size();
    if (n == 0) return 0.0;
    const std::size_t from = (n + 1) / 2;  // 1-based ceil(n/2)
    return *std::max_element(prefix_means.begin() + static_cast<std::ptrdiff_t>(from - 1), prefix_means.end());
}

template <typename Points>
EmpiricalMeasureEstimate empirical_mu(const Points& xs, const SetPredicate& in_set) {
    const std::size_t n = std::size(xs);
    if (n < 2) throw domain_error("empirical_mu needs n >= 2");
    std::vector<double> means;
    means.reserve(n);
    std::size_t hits = 0;
    std::size_t m = 0;
    for (const auto& x : xs) {
        ++m;
        if (in_set(std::span<const double>(x))) ++hits;
        means.push_back(static_cast<double>(hits) / static_cast<double>(m));
    }
    return {means.back(), tail_max_of_means(means), n};
}

inline std::vector<std::vector<double>> points_of(std::span<const Sample> samples) {
    std::vector<std::vector<double>> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s.x);
    return xs;
}

/// A_k = {x : 0 < x_0 < 1/k}, k = 1..count.
inline std::vector<SetPredicate> shrinking_intervals(std::size_t count) {
    std::vector<SetPredicate> sets;
    for (std::size_t k = 1; k <= count; ++k) {
        const double right = 1.0 / static_cast<double>(k);
        sets.push_back([right](std::span<const double> x) { return x[0] > 0.0 && x[0] < right; });
    }
    return sets;
}

/// A_k = {x : x_0 >= k}, k = 1..count.
inline std::vector<SetPredicate> tail_sets(std::size_t count) {
    std::vector<SetPredicate> sets;
    for (std::size_t k = 1; k <= count; ++k) {
        const double from = static_cast<double>(k);
        sets.push_back([from](std::span<const double> x) { return x[0] >= from; });
    }
    return sets;
}

inline std::vector<SetPredicate> empty_sets(std::size_t count) {
    return std::vector<SetPredicate>(count, [](std::span<const double>) { return false; });
}

struct ConditionReport {
    std::vector<double> profile;  // k -> mean over seeds of tail_max(A_k)
    double threshold{0.0};
    bool pass{false};
    static constexpr const char* kNote = "heuristic: finite-horizon proxy, not a proof";
};

/// Estimates k -> E[upper frequency of A_k] by averaging the half-window
/// maximum over seeds. PASS iff the value at the largest k is below
/// `threshold`.
inline ConditionReport condition_check(const ProcessSpec& spec, const OutcomeSpace& space,
                                       const std::vector<SetPredicate>& sets, std::size_t n,
                                       std::span<const std::uint64_t> seeds, double threshold) {
    if (sets.empty()) throw contract_error("condition_check needs at least one set");
    if (seeds.empty()) throw contract_error("condition_check needs at least one seed");
    ConditionReport report;
    report.threshold = threshold;
    report.profile.assign(sets.size(), 0.0);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto xs = points_of(generate(spec, space, n, seeds[s]));
        if (s == 0) {
            for (const auto& x : xs) {
                for (std::size_t k = 1; k < sets.size(); ++k) {
                    if (sets[k](x) && !sets[k - 1](x)) {
                        throw contract_error("sets are not nested: A_" + std::to_string(k + 1) + " not inside A_" +
                                             std::to_string(k));
                    }
                }
            }
        }
        for (std::size_t k = 0; k < sets.size(); ++k) report.profile[k] += empirical_mu(xs, sets[k]).tail_max;
    }
    for (double& v : report.profile) v /= static_cast<double>(seeds.size());
    report.pass = report.profile.back() < threshold;
    return report;
}

/// Prefix averages (1/T) sum_{t<=T} (learner loss - comparator loss).
inline std::vector<double> excess_loss_curve(std::span<const RunRecord> records) {
    std::vector<double> curve;
    curve.reserve(records.size());
    double total = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        total += records[i].step_loss - records[i].comparator_loss;
        curve.push_back(total / static_cast<double>(i + 1));
    }
    return curve;
}

/// Consistency statistic: max of the excess-loss curve over [ceil(n/2), n].
inline double tail_excess(std::span<const double> curve) { return tail_max_of_means(curve); }

}  // namespace uol
