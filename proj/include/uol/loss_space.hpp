#pragma once
// Response spaces and their bounded metric losses.
//
// Every loss returned here lies in [0, 1]. Outcomes are carried as a double:
// a bit for binary spaces, a real in [0, 1] for the unit interval, and a label
// index (an integral double) for discrete and table-defined spaces.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uol/errors.hpp"

namespace uol {

struct Outcome {
    double value{0.0};

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

enum class OutcomeKind { binary, interval, discrete, custom_table };

class OutcomeSpace {
public:
    static OutcomeSpace binary() { return OutcomeSpace(OutcomeKind::binary, 2, {}); }
    static OutcomeSpace interval() { return OutcomeSpace(OutcomeKind::interval, 0, {}); }

    static OutcomeSpace discrete(std::size_t labels) {
        if (labels < 1) throw domain_error("discrete outcome space needs at least one label");
        return OutcomeSpace(OutcomeKind::discrete, labels, {});
    }

    /// Square metric matrix over a finite point set. The matrix is stored as
    /// given; call validate_metric to audit it.
    static OutcomeSpace custom_table(std::vector<std::vector<double>> table) {
        const std::size_t k = table.size();
        if (k < 1) throw domain_error("custom metric table is empty");
        for (const auto& row : table) {
            if (row.size() != k) throw domain_error("custom metric table is not square");
        }
        return OutcomeSpace(OutcomeKind::custom_table, k, std::move(table));
    }

    OutcomeKind kind() const { return kind_; }

    /// Number of labels for finite carriers, 0 for the unit interval.
    std::size_t label_count() const { return labels_; }
    bool finite() const { return kind_ != OutcomeKind::interval; }
    static constexpr double diameter_bound() { return 1.0; }

    const std::vector<std::vector<double>>& table() const { return table_; }

    bool contains(Outcome y) const {
        const double v = y.value;
        if (!std::isfinite(v)) return false;
        if (kind_ == OutcomeKind::interval) return v >= 0.0 && v <= 1.0;
        return v >= 0.0 && v < static_cast<double>(labels_) && v == std::floor(v);
    }

    void require(Outcome y) const {
        if (!contains(y)) {
            throw domain_error("outcome " + std::to_string(y.value) + " outside the " + name() +
                               " carrier");
        }
    }

    /// Config spelling: binary | interval | discrete:<k> | custom-table.
    std::string name() const {
        switch (kind_) {
        case OutcomeKind::binary: return "binary";
        case OutcomeKind::interval: return "interval";
        case OutcomeKind::discrete: return "discrete:" + std::to_string(labels_);
        case OutcomeKind::custom_table: return "custom-table";
        }
        return "?";
    }

    /// Enumerates the carrier of a finite space in label order.
    std::vector<Outcome> labels() const {
        std::vector<Outcome> out;
        if (!finite()) return out;
        out.reserve(labels_);
        for (std::size_t i = 0; i < labels_; ++i) out.push_back({static_cast<double>(i)});
        return out;
    }

private:
    OutcomeSpace(OutcomeKind kind, std::size_t labels, std::vector<std::vector<double>> table)
        : kind_(kind), labels_(labels), table_(std::move(table)) {}

    OutcomeKind kind_;
    std::size_t labels_;
    std::vector<std::vector<double>> table_;
};

/// Loss without carrier checks, for hot loops where both arguments are known
/// to be valid.
inline double loss_unchecked(const OutcomeSpace& space, Outcome a, Outcome b) {
    switch (space.kind()) {
    case OutcomeKind::binary:
    case OutcomeKind::discrete: return a.value == b.value ? 0.0 : 1.0;
    case OutcomeKind::interval: return std::fabs(a.value - b.value);
    case OutcomeKind::custom_table:
        return space.table()[static_cast<std::size_t>(a.value)][static_cast<std::size_t>(b.value)];
    }
    return 0.0;
}

inline double loss(const OutcomeSpace& space, Outcome a, Outcome b) {
    space.require(a);
    space.require(b);
    return loss_unchecked(space, a, b);
}

enum class MetricAxiom { identity, symmetry, triangle, bound };

inline std::string_view to_string(MetricAxiom axiom) {
    switch (axiom) {
    case MetricAxiom::identity: return "identity";
    case MetricAxiom::symmetry: return "symmetry";
    case MetricAxiom::triangle: return "triangle";
    case MetricAxiom::bound: return "bound";
    }
    return "?";
}

struct MetricViolation {
    MetricAxiom axiom;
    // Witness; unused trailing slots repeat the last used outcome.
    Outcome a, b, c;
    double observed;
};

struct MetricReport {
    std::vector<MetricViolation> violations;

    bool ok() const { return violations.empty(); }
    bool flags(MetricAxiom axiom) const {
        for (const auto& v : violations) {
            if (v.axiom == axiom) return true;
        }
        return false;
    }
};

/// Checks identity, symmetry, the triangle inequality and sup-bound over all
/// pairs and triples drawn from `sample`. Violations are reported, not thrown.
inline MetricReport validate_metric(const OutcomeSpace& space, const std::vector<Outcome>& sample) {
    if (sample.empty()) throw domain_error("validate_metric needs a nonempty sample");
    for (const auto& y : sample) space.require(y);

    MetricReport report;
    auto d = [&](Outcome x, Outcome y) { return loss_unchecked(space, x, y); };
    for (const auto& a : sample) {
        if (d(a, a) != 0.0) report.violations.push_back({MetricAxiom::identity, a, a, a, d(a, a)});
        for (const auto& b : sample) {
            const double ab = d(a, b);
            if (ab > space.diameter_bound() || ab < 0.0) {
                report.violations.push_back({MetricAxiom::bound, a, b, b, ab});
            }
            if (ab != d(b, a)) report.violations.push_back({MetricAxiom::symmetry, a, b, b, ab});
            for (const auto& c : sample) {
                // a -> b -> c detour must not be shorter than a -> c.
                const double direct = d(a, c);
                if (direct > ab + d(b, c)) {
                    report.violations.push_back({MetricAxiom::triangle, a, b, c, direct});
                }
            }
        }
    }
    return report;
}

/// Parses `binary | interval | discrete:<k>`.
inline OutcomeSpace parse_outcome_space(std::string_view text) {
    if (text == "binary") return OutcomeSpace::binary();
    if (text == "interval") return OutcomeSpace::interval();
    constexpr std::string_view prefix = "discrete:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string rest(text.substr(prefix.size()));
        std::size_t used = 0;
        long long k = 0;
        try {
            k = std::stoll(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != rest.size() || k < 1) throw config_error("outcome", "bad label count '" + rest + "'");
        return OutcomeSpace::discrete(static_cast<std::size_t>(k));
    }
    throw config_error("outcome", "unknown outcome space '" + std::string(text) + "'");
}

}  // namespace uol
