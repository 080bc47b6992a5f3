#pragma once
// Blockwise Hedge over a countable expert family.
//
// Time is cut into blocks T_j = {t_j, ..., t_j + j - 1} with t_1 = 1 and
// t_{j+1} = t_j + j. Block j runs a fresh Hedge over experts 1..j with rate
// eta_j = sqrt((8/j) ln j); losses from earlier blocks are discarded at every
// block start. Each prediction samples one active expert with a fresh draw.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uol/errors.hpp"
#include "uol/hedge.hpp"
#include "uol/loss_space.hpp"
#include "uol/rng.hpp"
#include "uol/run_record.hpp"

namespace uol {

/// First step of block j: 1 + j(j-1)/2.
inline std::size_t block_start(std::size_t j) {
    if (j == 0) throw domain_error("block indices start at 1");
    return 1 + j * (j - 1) / 2;
}

/// The j with n in T_j, from ceil(sqrt(8n+1)/2 - 1/2); an integer correction
/// absorbs rounding in the square root for large n.
inline std::size_t block_index(std::size_t n) {
    if (n == 0) throw domain_error("time steps start at 1");
    auto j = static_cast<std::size_t>(std::ceil(0.5 * std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 0.5));
    if (j == 0) j = 1;
    while (j > 1 && block_start(j) > n) --j;
    while (block_start(j + 1) <= n) ++j;
    return j;
}

inline double epoch_learning_rate(std::size_t j) {
    if (j == 0) throw domain_error("block indices start at 1");
    return hedge_learning_rate(j, j);
}

/// 19 n^(3/4) sqrt(ln n) + n_hat.
inline double epoch_regret_envelope(std::size_t n, std::size_t n_hat) {
    if (n < 2) throw domain_error("regret envelope needs n >= 2");
    const double nd = static_cast<double>(n);
    return 19.0 * std::pow(nd, 0.75) * std::sqrt(std::log(nd)) + static_cast<double>(n_hat);
}

/// max(1, floor(n^(1/4))), computed in integers.
inline std::size_t comparator_class_size(std::size_t n) {
    std::size_t k = 1;
    while ((k + 1) * (k + 1) * (k + 1) * (k + 1) <= n) ++k;
    return k;
}

struct BlockSchedule {
    std::size_t j{1};
    std::size_t start{1};
    std::size_t length{1};
    double eta{0.0};

    static BlockSchedule for_block(std::size_t j) { return {j, block_start(j), j, epoch_learning_rate(j)}; }
    std::size_t last() const { return start + length - 1; }
};

struct EpochHedgeState {
    BlockSchedule schedule{BlockSchedule::for_block(1)};
    std::size_t t{1};
    std::vector<double> block_cum_loss = std::vector<double>(1, 0.0);
};

struct Prediction {
    Outcome y_hat;
    std::size_t index{1};  // 1-based expert index
    double u{0.0};
};

class EpochHedge {
public:
    EpochHedge(OutcomeSpace space, std::uint64_t seed) : space_(std::move(space)), rng_(seed, Stream::learner) {}

    const EpochHedgeState& state() const { return state_; }
    std::size_t active_experts() const { return state_.schedule.j; }

    /// Sampling distribution over the active experts.
    std::span<const double> weights() {
        weights_.resize(state_.block_cum_loss.size());
        hedge_weights(state_.block_cum_loss, state_.schedule.eta, weights_);
        return weights_;
    }

    Prediction predict(std::span<const Outcome> expert_predictions) {
        return predict_with_draw(expert_predictions, rng_.uniform());
    }

    /// Same as predict() but with a caller-supplied uniform; used for replay.
    Prediction predict_with_draw(std::span<const Outcome> expert_predictions, double u) {
        check_width(expert_predictions);
        const std::size_t pos = hedge_sample(weights(), u);
        pending_ = true;
        return {expert_predictions[pos], pos + 1, u};
    }

    void update(std::span<const Outcome> expert_predictions, Outcome y) {
        if (!pending_) throw contract_error("update without a preceding predict at t=" + std::to_string(state_.t));
        check_width(expert_predictions);
        space_.require(y);
        for (std::size_t i = 0; i < expert_predictions.size(); ++i) {
            state_.block_cum_loss[i] += loss(space_, expert_predictions[i], y);
        }
        pending_ = false;
        ++state_.t;
        if (state_.t > state_.schedule.last()) {
            state_.schedule = BlockSchedule::for_block(state_.schedule.j + 1);
            state_.block_cum_loss.assign(state_.schedule.j, 0.0);
        }
    }

private:
    void check_width(std::span<const Outcome> expert_predictions) const {
        if (expert_predictions.size() != state_.schedule.j) {
            throw contract_error("expected " + std::to_string(state_.schedule.j) + " expert predictions at t=" +
                                 std::to_string(state_.t) + ", got " + std::to_string(expert_predictions.size()));
        }
    }

    OutcomeSpace space_;
    Rng rng_;
    EpochHedgeState state_;
    std::vector<double> weights_;
    bool pending_{false};
};

/// Anything mapping (1-based index, point) to an outcome.
template <typename S>
concept ExpertSource = requires(const S& s, std::size_t i, std::span<const double> x) {
    { s.predict(i, x) } -> std::convertible_to<Outcome>;
};

/// Per-step stream; may look at the learner's earlier predictions.
template <typename S>
concept OnlineStream = requires(S& s, std::span<const Outcome> past) {
    { s.next(past) } -> std::convertible_to<std::optional<Sample>>;
};

struct RunResult {
    std::vector<RunRecord> records;
    bool truncated{false};  // stream ended before the horizon
};

/// Drives the learner for `horizon` steps. At step t only the active experts
/// 1..j are evaluated. `f0` is the comparator whose loss is logged alongside.
template <ExpertSource Source, OnlineStream Stream_, typename Comparator>
RunResult run_learner(const Source& source, const OutcomeSpace& space, Stream_& stream, std::size_t horizon,
                      std::uint64_t seed, const Comparator& f0) {
    EpochHedge learner(space, seed);
    RunResult result;
    result.records.reserve(horizon);
    std::vector<Outcome> preds;
    std::vector<Outcome> history;
    history.reserve(horizon);
    double cum = 0.0;
    double cum_cmp = 0.0;

    for (std::size_t t = 1; t <= horizon; ++t) {
        auto sample = stream.next(history);
        if (!sample) {
            result.truncated = true;
            break;
        }
        const std::size_t j = learner.active_experts();
        preds.resize(j);
        for (std::size_t i = 0; i < j; ++i) preds[i] = source.predict(i + 1, sample->x);

        const Prediction p = learner.predict(preds);
        const double step = loss(space, p.y_hat, sample->y);
        const double cmp = loss(space, f0(std::span<const double>(sample->x)), sample->y);
        cum += step;
        cum_cmp += cmp;
        learner.update(preds, sample->y);
        history.push_back(p.y_hat);

        result.records.push_back(
            {t, j, std::move(sample->x), p.index, p.y_hat, sample->y, step, cmp, cum, cum_cmp, p.u});
    }
    return result;
}

template <ExpertSource Source>
RunResult run_learner(const Source& source, const OutcomeSpace& space, std::span<const Sample> samples,
                      std::size_t horizon, std::uint64_t seed) {
    SampleStream stream(samples);
    // Without a comparator, the logged comparator is the constant 0.
    auto zero = [](std::span<const double>) { return Outcome{}; };
    return run_learner(source, space, stream, horizon, seed, zero);
}

/// For each n = 1..records.size(), the best cumulative loss among experts
/// 1..max(1, floor(n^(1/4))): the comparator class of the regret envelope.
template <ExpertSource Source>
std::vector<double> prefix_comparator_curve(const Source& source, const OutcomeSpace& space,
                                            std::span<const RunRecord> records) {
    std::vector<double> out;
    out.reserve(records.size());
    std::vector<double> cum;
    for (const auto& r : records) {
        const std::size_t k = comparator_class_size(r.t);
        while (cum.size() < k) {
            // Late joiners need their loss over all earlier steps.
            const std::size_t i = cum.size() + 1;
            double total = 0.0;
            for (std::size_t s = 0; s + 1 < r.t; ++s) {
                total += loss(space, source.predict(i, records[s].x), records[s].y);
            }
            cum.push_back(total);
        }
        double best = 0.0;
        for (std::size_t i = 0; i < cum.size(); ++i) {
            cum[i] += loss(space, source.predict(i + 1, r.x), r.y);
            best = i == 0 ? cum[i] : std::min(best, cum[i]);
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace uol
