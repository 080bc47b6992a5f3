#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "uol/loss_space.hpp"

namespace uol {

/// Where a process's x values live. Only cube processes pair with the dyadic
/// expert family.
enum class Domain { cube, naturals };

struct Sample {
    std::vector<double> x;
    Outcome y;
};

/// One learner step. `u` is the uniform draw that selected the expert, kept
/// so a run can be audited or replayed without the generator.
struct RunRecord {
    std::size_t t{0};
    std::size_t block{0};
    std::vector<double> x;
    std::size_t expert_index{0};  // 1-based
    Outcome y_hat;
    Outcome y;
    double step_loss{0.0};
    double comparator_loss{0.0};
    double cum_loss{0.0};
    double cum_comparator_loss{0.0};
    double u{0.0};
};

/// Replays a fixed sample sequence; ignores learner feedback.
class SampleStream {
public:
    explicit SampleStream(std::span<const Sample> samples) : samples_(samples) {}

    std::optional<Sample> next(std::span<const Outcome> /*past_predictions*/) {
        if (pos_ >= samples_.size()) return std::nullopt;
        return samples_[pos_++];
    }

private:
    std::span<const Sample> samples_;
    std::size_t pos_{0};
};

}  // namespace uol
