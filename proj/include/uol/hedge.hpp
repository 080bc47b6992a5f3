#pragma once
// Fixed-horizon exponentially weighted forecaster over N experts.
//
// Cumulative losses are stored unnormalized (t times the running average), so
// the exponent at step t is simply eta * cum_loss[i]. Weights are derived on
// demand in the log domain after subtracting the smallest cumulative loss,
// which keeps every exponent in (-inf, 0] and the leader's weight at exactly 1
// before normalization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "uol/errors.hpp"
#include "uol/rng.hpp"

namespace uol {

/// sqrt((8 / n) ln N); zero exactly when N == 1.
inline double hedge_learning_rate(std::size_t horizon, std::size_t experts) {
    if (horizon == 0) throw domain_error("hedge horizon must be positive");
    if (experts == 0) throw domain_error("hedge expert count must be positive");
    if (experts == 1) return 0.0;
    return std::sqrt(8.0 / static_cast<double>(horizon) * std::log(static_cast<double>(experts)));
}

/// Slack above the best expert's cumulative loss that holds with probability
/// at least 1 - delta: sqrt(n ln N / 2) + sqrt(n ln(1/delta) / 2).
inline double hedge_regret_bound(std::size_t horizon, std::size_t experts, double delta) {
    if (horizon == 0 || experts == 0) throw domain_error("hedge bound needs positive n and N");
    if (!(delta > 0.0 && delta < 1.0)) throw domain_error("delta must lie in (0, 1)");
    const double n = static_cast<double>(horizon);
    return std::sqrt(0.5 * n * std::log(static_cast<double>(experts))) +
           std::sqrt(0.5 * n * std::log(1.0 / delta));
}

/// Normalized weights proportional to exp(-eta * cum_loss[i]).
inline void hedge_weights(std::span<const double> cum_loss, double eta, std::span<double> out) {
    if (cum_loss.size() != out.size()) throw contract_error("weight buffer length mismatch");
    if (cum_loss.empty()) throw contract_error("no experts to weight");
    const double best = *std::min_element(cum_loss.begin(), cum_loss.end());
    double total = 0.0;
    for (std::size_t i = 0; i < cum_loss.size(); ++i) {
        out[i] = std::exp(-eta * (cum_loss[i] - best));
        total += out[i];
    }
    for (double& w : out) w /= total;
}

inline std::vector<double> hedge_weights(std::span<const double> cum_loss, double eta) {
    std::vector<double> out(cum_loss.size());
    hedge_weights(cum_loss, eta, out);
    return out;
}

/// Inverse-CDF draw: the smallest 0-based position whose cumulative weight
/// exceeds u. Rounding shortfalls at u near 1 fall back to the last expert
/// with positive weight.
inline std::size_t hedge_sample(std::span<const double> weights, double u) {
    if (weights.empty()) throw contract_error("cannot sample from an empty weight vector");
    double cdf = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cdf += weights[i];
        if (weights[i] > 0.0) last_positive = i;
        if (cdf > u) return i;
    }
    return last_positive;
}

struct HedgeConfig {
    std::size_t horizon{1};
    std::size_t experts{1};
    double eta{0.0};

    static HedgeConfig make(std::size_t horizon, std::size_t experts) {
        return {horizon, experts, hedge_learning_rate(horizon, experts)};
    }
};

struct HedgeState {
    std::size_t t{1};
    std::vector<double> cum_loss;

    explicit HedgeState(std::size_t experts = 1) : cum_loss(experts, 0.0) {}
};

/// One Hedge instance: weights() and sample() read the state, observe()
/// advances it by one step.
class Hedge {
public:
    explicit Hedge(HedgeConfig config) : config_(config), state_(config.experts), weights_(config.experts) {
        if (config.experts == 0) throw domain_error("hedge expert count must be positive");
    }

    const HedgeConfig& config() const { return config_; }
    const HedgeState& state() const { return state_; }

    std::span<const double> weights() {
        hedge_weights(state_.cum_loss, config_.eta, weights_);
        return weights_;
    }

    std::size_t sample(double u) { return hedge_sample(weights(), u); }

    void observe(std::span<const double> losses) {
        if (losses.size() != state_.cum_loss.size()) throw contract_error("loss vector length mismatch");
        for (std::size_t i = 0; i < losses.size(); ++i) state_.cum_loss[i] += losses[i];
        ++state_.t;
    }

private:
    HedgeConfig config_;
    HedgeState state_;
    std::vector<double> weights_;
};

struct HedgeTrial {
    double learner_loss{0.0};
    double best_expert_loss{0.0};

    double regret() const { return learner_loss - best_expert_loss; }
};

/// Runs Hedge over a row-major loss table (horizon rows, experts columns),
/// drawing one fresh uniform per step.
inline HedgeTrial run_hedge(std::span<const double> loss_table, HedgeConfig config, Rng& rng) {
    if (loss_table.size() != config.horizon * config.experts) {
        throw contract_error("loss table does not match horizon x experts");
    }
    Hedge hedge(config);
    HedgeTrial trial;
    for (std::size_t t = 0; t < config.horizon; ++t) {
        const auto row = loss_table.subspan(t * config.experts, config.experts);
        trial.learner_loss += row[hedge.sample(rng.uniform())];
        hedge.observe(row);
    }
    const auto& cum = hedge.state().cum_loss;
    trial.best_expert_loss = *std::min_element(cum.begin(), cum.end());
    return trial;
}

}  // namespace uol
