#pragma once
// A countable family of dyadic histogram experts on the unit cube [0,1]^d.
//
// Tier r holds every function that is constant on the 2^(r d) dyadic cells of
// side 2^-r and takes values in the tier-r grid (all labels for finite
// spaces; {k 2^-r : 0 <= k <= 2^r} for the unit interval). Tiers are nested,
// so tier r contributes exactly |tier r| - |tier r-1| new experts. Within a
// tier, candidates are visited by mixed-radix counting over cells (cell 0 is
// the least significant digit) and members of earlier tiers are skipped.
// Indices are 1-based.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uol/errors.hpp"
#include "uol/loss_space.hpp"

namespace uol {

struct ExpertSpaceConfig {
    std::size_t dimension{1};
    int max_tier{4};
    OutcomeSpace space{OutcomeSpace::binary()};
};

/// Values of tier `tier`'s grid, in enumeration (digit) order.
inline std::vector<Outcome> outcome_grid(const OutcomeSpace& space, int tier) {
    if (space.finite()) return space.labels();
    std::vector<Outcome> grid;
    const std::uint64_t steps = std::uint64_t{1} << tier;
    for (std::uint64_t k = 0; k <= steps; ++k) {
        grid.push_back({std::ldexp(static_cast<double>(k), -tier)});
    }
    return grid;
}

/// Index of `x`'s dyadic cell at `resolution`; coordinate 0 varies fastest.
/// The right boundary 1.0 belongs to the last cell.
inline std::size_t dyadic_cell(std::span<const double> x, int resolution) {
    const std::size_t side = std::size_t{1} << resolution;
    std::size_t cell = 0;
    std::size_t stride = 1;
    for (double coord : x) {
        if (!(coord >= 0.0 && coord <= 1.0)) {
            throw domain_error("point coordinate " + std::to_string(coord) + " outside the unit cube");
        }
        const auto k = std::min(static_cast<std::size_t>(std::ldexp(coord, resolution)), side - 1);
        cell += k * stride;
        stride *= side;
    }
    return cell;
}

/// Maps a cell at resolution `fine` to its ancestor at resolution `coarse`.
inline std::size_t ancestor_cell(std::size_t cell, int fine, int coarse, std::size_t dimension) {
    const std::size_t fine_side = std::size_t{1} << fine;
    const std::size_t coarse_side = std::size_t{1} << coarse;
    std::size_t out = 0;
    std::size_t stride = 1;
    for (std::size_t c = 0; c < dimension; ++c) {
        const std::size_t k = cell % fine_side;
        cell /= fine_side;
        out += (k >> (fine - coarse)) * stride;
        stride *= coarse_side;
    }
    return out;
}

struct Expert {
    std::size_t index{1};
    int resolution{0};
    std::size_t dimension{1};
    std::vector<Outcome> cell_values;

    Outcome operator()(std::span<const double> x) const { return evaluate(x); }

    Outcome evaluate(std::span<const double> x) const {
        if (x.size() != dimension) throw domain_error("point dimension does not match expert");
        return cell_values[dyadic_cell(x, resolution)];
    }
};

inline Outcome evaluate(const Expert& e, std::span<const double> x) { return e.evaluate(x); }

/// Stateful cursor over the enumeration; experts are materialized in index
/// order and cached. Not thread-safe; share the immutable ExpertFamily instead.
class ExpertEnumerator {
public:
    explicit ExpertEnumerator(ExpertSpaceConfig config) : config_(std::move(config)) {
        if (config_.dimension < 1) throw config_error("expert.dimension", "must be at least 1");
        if (config_.max_tier < 0) throw config_error("expert.max_tier", "must be nonnegative");
    }

    const ExpertSpaceConfig& config() const { return config_; }

    /// |tier r| = G_r^(C_r): every expert with index at most this lies in
    /// tiers 0..r. Empty when the count does not fit in 62 bits.
    std::optional<std::uint64_t> cumulative_count(int tier) const {
        const std::uint64_t grid = outcome_grid(config_.space, tier).size();
        const std::uint64_t cells = cell_count(tier);
        if (cells == 0) return std::nullopt;
        std::uint64_t total = 1;
        for (std::uint64_t c = 0; c < cells; ++c) {
            if (total > (std::uint64_t{1} << 62) / grid) return std::nullopt;
            total *= grid;
        }
        return total;
    }

    /// Tier holding expert `index`; throws past the configured cap.
    int tier_of(std::size_t index) const {
        if (index < 1) throw domain_error("expert indices start at 1");
        for (int r = 0; r <= config_.max_tier; ++r) {
            const auto count = cumulative_count(r);
            if (!count) break;
            if (index <= *count) return r;
        }
        throw domain_error("expert index " + std::to_string(index) + " lies beyond the materializable tier cap " +
                           std::to_string(config_.max_tier));
    }

    const Expert& at(std::size_t index) {
        tier_of(index);  // throws past the cap
        while (cache_.size() < index) advance();
        return cache_[index - 1];
    }

private:
    std::uint64_t cell_count(int tier) const {
        const int bits = tier * static_cast<int>(config_.dimension);
        if (bits >= 62) return 0;
        return std::uint64_t{1} << bits;
    }

    void start_tier(int tier) {
        tier_ = tier;
        grid_ = outcome_grid(config_.space, tier);
        digits_.assign(cell_count(tier), 0);
        fresh_tier_ = true;
    }

    // Steps the mixed-radix counter; false once the tier is exhausted.
    bool increment() {
        for (auto& d : digits_) {
            if (++d < grid_.size()) return true;
            d = 0;
        }
        return false;
    }

    // Whether the current candidate already appeared in tier_ - 1.
    bool in_previous_tier() const {
        if (tier_ == 0) return false;
        if (!config_.space.finite()) {
            // Tier r-1 grid points are the even multiples of 2^-r.
            for (auto d : digits_) {
                if (d % 2 != 0) return false;
            }
        }
        return constant_on_parents(digits_, tier_);
    }

    bool constant_on_parents(const std::vector<std::size_t>& digits, int resolution) const {
        std::vector<std::size_t> parent_digit(digits.size() >> config_.dimension, grid_.size());
        for (std::size_t cell = 0; cell < digits.size(); ++cell) {
            auto& slot = parent_digit[ancestor_cell(cell, resolution, resolution - 1, config_.dimension)];
            if (slot == grid_.size()) {
                slot = digits[cell];
            } else if (slot != digits[cell]) {
                return false;
            }
        }
        return true;
    }

    void advance() {
        while (true) {
            if (tier_ < 0) {
                start_tier(0);
            } else if (!fresh_tier_ && !increment()) {
                if (tier_ + 1 > config_.max_tier || !cumulative_count(tier_ + 1)) {
                    throw domain_error("expert enumeration exhausted the tier cap");
                }
                start_tier(tier_ + 1);
            }
            fresh_tier_ = false;
            if (!in_previous_tier()) break;
        }
        cache_.push_back(make_expert(cache_.size() + 1));
    }

    // Stores the candidate at the coarsest resolution that represents it.
    Expert make_expert(std::size_t index) const {
        std::vector<std::size_t> digits = digits_;
        int resolution = tier_;
        while (resolution > 0 && constant_on_parents(digits, resolution)) {
            std::vector<std::size_t> coarse(digits.size() >> config_.dimension);
            for (std::size_t cell = 0; cell < digits.size(); ++cell) {
                coarse[ancestor_cell(cell, resolution, resolution - 1, config_.dimension)] = digits[cell];
            }
            digits = std::move(coarse);
            --resolution;
        }
        Expert e{index, resolution, config_.dimension, {}};
        e.cell_values.reserve(digits.size());
        for (auto d : digits) e.cell_values.push_back(grid_[d]);
        return e;
    }

    ExpertSpaceConfig config_;
    int tier_{-1};
    bool fresh_tier_{false};
    std::vector<Outcome> grid_;
    std::vector<std::size_t> digits_;
    std::vector<Expert> cache_;
};

inline Expert enumerate_expert(std::size_t index, const ExpertSpaceConfig& config) {
    ExpertEnumerator enumerator(config);
    return enumerator.at(index);
}

/// Immutable prefix {f_1, ..., f_M} of the family; safe to share across runs.
class ExpertFamily {
public:
    ExpertFamily(const ExpertSpaceConfig& config, std::size_t count) : space_(config.space) {
        ExpertEnumerator enumerator(config);
        experts_.reserve(count);
        for (std::size_t i = 1; i <= count; ++i) experts_.push_back(enumerator.at(i));
    }

    std::size_t size() const { return experts_.size(); }
    const OutcomeSpace& space() const { return space_; }

    const Expert& expert(std::size_t index) const {
        if (index < 1 || index > experts_.size()) {
            throw contract_error("expert " + std::to_string(index) + " was not materialized (have " +
                                 std::to_string(experts_.size()) + ")");
        }
        return experts_[index - 1];
    }

    Outcome predict(std::size_t index, std::span<const double> x) const { return expert(index).evaluate(x); }

private:
    OutcomeSpace space_;
    std::vector<Expert> experts_;
};

struct DensityPoint {
    std::size_t experts;  // M
    double loss;          // min over i <= M of the average loss
};

struct CellProfile {
    std::vector<DensityPoint> profile;
    std::size_t best_index{1};  // argmin over i <= max(M), smallest index on ties
    double best_loss{0.0};
};

/// For each M in `m_grid` (ascending), min over the first M experts of
/// (1/n) sum_t loss(f_i(x_t), target_t). Sums are assembled from per-cell
/// sufficient statistics at the finest tier involved, so each expert costs
/// one pass over cells rather than over the sample.
inline CellProfile cell_loss_profile(const ExpertSpaceConfig& config, std::span<const std::vector<double>> xs,
                                     std::span<const Outcome> targets, std::span<const std::size_t> m_grid) {
    if (xs.empty()) throw domain_error("density profile needs at least one point");
    if (xs.size() != targets.size()) throw contract_error("points and targets differ in length");
    if (m_grid.empty()) return {};
    if (!std::is_sorted(m_grid.begin(), m_grid.end()) || m_grid.front() < 1) {
        throw contract_error("M grid must be ascending and positive");
    }

    ExpertEnumerator enumerator(config);
    const std::size_t max_m = m_grid.back();
    const int fine = enumerator.tier_of(max_m);
    const auto grid = outcome_grid(config.space, fine);
    const std::size_t cells = std::size_t{1} << (fine * config.dimension);

    std::vector<double> stats(cells * grid.size(), 0.0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const std::size_t cell = dyadic_cell(xs[t], fine);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            stats[cell * grid.size() + g] += loss_unchecked(config.space, grid[g], targets[t]);
        }
    }

    auto grid_index = [&](Outcome v) -> std::size_t {
        if (config.space.finite()) return static_cast<std::size_t>(v.value);
        return static_cast<std::size_t>(std::ldexp(v.value, fine));
    };

    CellProfile out;
    double best = std::numeric_limits<double>::infinity();
    std::size_t next = 0;
    for (std::size_t i = 1; i <= max_m; ++i) {
        const Expert& e = enumerator.at(i);
        double total = 0.0;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            const Outcome v = e.cell_values[ancestor_cell(cell, fine, e.resolution, config.dimension)];
            total += stats[cell * grid.size() + grid_index(v)];
        }
        if (total < best) {
            best = total;
            out.best_index = i;
        }
        while (next < m_grid.size() && m_grid[next] == i) {
            out.profile.push_back({i, best / static_cast<double>(xs.size())});
            ++next;
        }
    }
    out.best_loss = best / static_cast<double>(xs.size());
    return out;
}

template <typename Comparator>
std::vector<DensityPoint> density_profile(const ExpertSpaceConfig& config, const Comparator& f0,
                                          std::span<const std::vector<double>> xs,
                                          std::span<const std::size_t> m_grid) {
    std::vector<Outcome> targets;
    targets.reserve(xs.size());
    for (const auto& x : xs) targets.push_back(f0(std::span<const double>(x)));
    return cell_loss_profile(config, xs, targets, m_grid).profile;
}

}  // namespace uol
