#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Domain types and evaluation primitives for three-phase feeder load
// balancing: load sets, per-load phase assignments, their switch-matrix
// encoding, the feeder current recursion, and branch power loss.

namespace phasebal {

inline constexpr int kPhaseCount = 3;

namespace detail {

inline bool is_finite_nonnegative(double v) {
    return std::isfinite(v) && v >= 0.0;
}

inline std::string bad_length_msg(std::size_t got, std::size_t want) {
    return "expected length " + std::to_string(want) + ", got " + std::to_string(got);
}

}  // namespace detail

/// N nonnegative load-current magnitudes (amperes), N >= 3 and divisible by 3.
class LoadSet {
public:
    explicit LoadSet(std::vector<double> currents) : currents_(std::move(currents)) {
        if (currents_.size() < 3 || currents_.size() % 3 != 0) {
            throw std::invalid_argument("LoadSet: load count must be >= 3 and divisible by 3, got " +
                                        std::to_string(currents_.size()));
        }
        for (std::size_t i = 0; i < currents_.size(); ++i) {
            if (!detail::is_finite_nonnegative(currents_[i])) {
                throw std::invalid_argument("LoadSet: current " + std::to_string(i) +
                                            " must be finite and nonnegative");
            }
        }
    }

    const std::vector<double>& currents() const noexcept { return currents_; }
    std::size_t size() const noexcept { return currents_.size(); }
    double operator[](std::size_t i) const noexcept { return currents_[i]; }

    /// Sum of all load currents, accumulated in index order.
    double total() const noexcept {
        double t = 0.0;
        for (double c : currents_) t += c;
        return t;
    }

    bool operator==(const LoadSet&) const = default;

private:
    std::vector<double> currents_;
};

/// Per-load phase labels in {1,2,3}. Deliberately a plain value type: raw
/// predictor output may carry an unbalanced (or, before clamping, even
/// out-of-range) label sequence, and validate_assignment turns that into a
/// verdict instead of a constructor failure.
struct PhaseAssignment {
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    bool operator==(const PhaseAssignment&) const = default;
};

enum class AssignmentStatus {
    kValid,
    kLengthMismatch,
    kLabelOutOfRange,
    kUnequalCounts,
};

struct AssignmentValidity {
    AssignmentStatus status = AssignmentStatus::kValid;
    /// Loads per phase; meaningful unless a label was out of range.
    std::array<std::size_t, 3> phase_counts{};
    /// First offending label position for kLabelOutOfRange.
    std::size_t offending_index = 0;

    bool ok() const noexcept { return status == AssignmentStatus::kValid; }
    explicit operator bool() const noexcept { return ok(); }
};

/// Checks an assignment against both switch constraints: one phase per load
/// (labels in range) and equal per-phase counts (n_loads/3 each).
inline AssignmentValidity validate_assignment(const PhaseAssignment& assignment, std::size_t n_loads) {
    AssignmentValidity v;
    if (assignment.size() != n_loads) {
        v.status = AssignmentStatus::kLengthMismatch;
        return v;
    }
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        const int label = assignment.labels[i];
        if (label < 1 || label > kPhaseCount) {
            v.status = AssignmentStatus::kLabelOutOfRange;
            v.offending_index = i;
            return v;
        }
        ++v.phase_counts[static_cast<std::size_t>(label - 1)];
    }
    const std::size_t per_phase = n_loads / 3;
    if (n_loads % 3 != 0 || v.phase_counts[0] != per_phase || v.phase_counts[1] != per_phase ||
        v.phase_counts[2] != per_phase) {
        v.status = AssignmentStatus::kUnequalCounts;
        return v;
    }
    return v;
}

inline const char* to_string(AssignmentStatus s) {
    switch (s) {
        case AssignmentStatus::kValid: return "valid";
        case AssignmentStatus::kLengthMismatch: return "length mismatch";
        case AssignmentStatus::kLabelOutOfRange: return "label out of range";
        case AssignmentStatus::kUnequalCounts: return "unequal per-phase counts";
    }
    return "unknown";
}

/// One-third of the total load current: the per-phase target.
inline double ideal_current(const LoadSet& loads) {
    return loads.total() / 3.0;
}

/// Per-phase current sums of an assignment, accumulated in load index order.
inline std::array<double, 3> phase_sums(const LoadSet& loads, const PhaseAssignment& assignment) {
    if (assignment.size() != loads.size()) {
        throw std::invalid_argument("phase_sums: assignment " +
                                    detail::bad_length_msg(assignment.size(), loads.size()));
    }
    std::array<double, 3> sums{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const int label = assignment.labels[i];
        if (label < 1 || label > kPhaseCount) {
            throw std::invalid_argument("phase_sums: label out of range at index " + std::to_string(i));
        }
        sums[static_cast<std::size_t>(label - 1)] += loads[i];
    }
    return sums;
}

/// (|s1-s2|, |s2-s3|, |s3-s1|)
inline std::array<double, 3> pairwise_diffs(const std::array<double, 3>& sums) {
    return {std::abs(sums[0] - sums[1]), std::abs(sums[1] - sums[2]), std::abs(sums[2] - sums[0])};
}

/// N x 3 binary switch states, one closed switch per load. Column c carries
/// phase label c+1.
class SwitchMatrix {
public:
    using Row = std::array<std::uint8_t, 3>;

    explicit SwitchMatrix(std::vector<Row> rows) : rows_(std::move(rows)) {
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const int sum = rows_[r][0] + rows_[r][1] + rows_[r][2];
            const bool binary = rows_[r][0] <= 1 && rows_[r][1] <= 1 && rows_[r][2] <= 1;
            if (!binary || sum != 1) {
                throw std::invalid_argument("SwitchMatrix: row " + std::to_string(r) +
                                            " must have exactly one closed switch");
            }
        }
    }

    static SwitchMatrix from_assignment(const PhaseAssignment& assignment) {
        std::vector<Row> rows(assignment.size(), Row{0, 0, 0});
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            const int label = assignment.labels[i];
            if (label < 1 || label > kPhaseCount) {
                throw std::invalid_argument("SwitchMatrix: label out of range at index " + std::to_string(i));
            }
            rows[i][static_cast<std::size_t>(label - 1)] = 1;
        }
        return SwitchMatrix(std::move(rows));
    }

    PhaseAssignment to_assignment() const {
        PhaseAssignment a;
        a.labels.reserve(rows_.size());
        for (const Row& row : rows_) {
            for (int c = 0; c < kPhaseCount; ++c) {
                if (row[static_cast<std::size_t>(c)]) {
                    a.labels.push_back(c + 1);
                    break;
                }
            }
        }
        return a;
    }

    const std::vector<Row>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }

private:
    std::vector<Row> rows_;
};

inline SwitchMatrix assignment_to_switch_matrix(const PhaseAssignment& assignment) {
    return SwitchMatrix::from_assignment(assignment);
}

/// One feeder branch: resistance plus the power flow and voltage that set its
/// loss term. The branch quantities are independent inputs; nothing here
/// derives them from load currents.
struct Branch {
    double resistance = 0.0;         // ohms
    double active_power = 0.0;       // watts
    double reactive_power = 0.0;     // volt-amperes-reactive
    double voltage_magnitude = 0.0;  // volts
};

/// Total real power loss over a branch list: sum of r*(P^2+Q^2)/|V|^2.
inline double total_power_loss(std::span<const Branch> branches) {
    double loss = 0.0;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const Branch& b = branches[i];
        if (!(b.resistance >= 0.0) || !std::isfinite(b.resistance)) {
            throw std::invalid_argument("total_power_loss: branch " + std::to_string(i) +
                                        " has negative or non-finite resistance");
        }
        if (!(b.voltage_magnitude > 0.0)) {
            throw std::domain_error("total_power_loss: branch " + std::to_string(i) +
                                    " has zero or negative voltage magnitude");
        }
        loss += b.resistance * (b.active_power * b.active_power + b.reactive_power * b.reactive_power) /
                (b.voltage_magnitude * b.voltage_magnitude);
    }
    return loss;
}

/// One connection point of a radial feeder: up to three local loads, each
/// with its own 3-way switch row (columns = phases, exactly one closed).
struct ConnectionPoint {
    std::vector<double> load_currents;
    std::vector<std::array<std::uint8_t, 3>> switch_rows;
};

/// Ordered connection points from feeder head to tail.
struct FeederChain {
    std::vector<ConnectionPoint> points;
};

namespace detail {

inline void check_point(const ConnectionPoint& p, std::size_t k) {
    if (p.load_currents.size() > 3) {
        throw std::invalid_argument("FeederChain: point " + std::to_string(k) + " holds more than 3 loads");
    }
    if (p.switch_rows.size() != p.load_currents.size()) {
        throw std::invalid_argument("FeederChain: point " + std::to_string(k) +
                                    " needs one switch row per load");
    }
    for (std::size_t i = 0; i < p.load_currents.size(); ++i) {
        if (!is_finite_nonnegative(p.load_currents[i])) {
            throw std::invalid_argument("FeederChain: point " + std::to_string(k) + " load " +
                                        std::to_string(i) + " must be finite and nonnegative");
        }
        const auto& row = p.switch_rows[i];
        if (row[0] > 1 || row[1] > 1 || row[2] > 1 || row[0] + row[1] + row[2] != 1) {
            throw std::invalid_argument("FeederChain: point " + std::to_string(k) + " switch row " +
                                        std::to_string(i) + " must close exactly one switch");
        }
    }
}

}  // namespace detail

/// Per-phase currents flowing through the section just upstream of each
/// connection point, by the backward recursion
///   I_phase(k) = sum_i sw_k[i][phase] * I_k[i] + I_phase(k+1),
/// with zero current past the last point. Entry 0 is the feeder head.
inline std::vector<std::array<double, 3>> feeder_phase_currents(const FeederChain& chain) {
    for (std::size_t k = 0; k < chain.points.size(); ++k) {
        detail::check_point(chain.points[k], k);
    }
    std::vector<std::array<double, 3>> currents(chain.points.size());
    std::array<double, 3> downstream{0.0, 0.0, 0.0};
    for (std::size_t k = chain.points.size(); k-- > 0;) {
        const ConnectionPoint& p = chain.points[k];
        std::array<double, 3> here = downstream;
        for (std::size_t i = 0; i < p.load_currents.size(); ++i) {
            for (int phase = 0; phase < kPhaseCount; ++phase) {
                if (p.switch_rows[i][static_cast<std::size_t>(phase)]) {
                    here[static_cast<std::size_t>(phase)] += p.load_currents[i];
                }
            }
        }
        currents[k] = here;
        downstream = here;
    }
    return currents;
}

/// Packs a flat load set onto a chain, loads_per_point at a time (1..3).
inline FeederChain make_chain(const LoadSet& loads, const PhaseAssignment& assignment,
                              std::size_t loads_per_point = 3) {
    if (loads_per_point < 1 || loads_per_point > 3) {
        throw std::invalid_argument("make_chain: loads_per_point must be 1..3");
    }
    if (assignment.size() != loads.size()) {
        throw std::invalid_argument("make_chain: assignment " +
                                    detail::bad_length_msg(assignment.size(), loads.size()));
    }
    FeederChain chain;
    for (std::size_t i = 0; i < loads.size(); i += loads_per_point) {
        ConnectionPoint p;
        for (std::size_t j = i; j < std::min(i + loads_per_point, loads.size()); ++j) {
            const int label = assignment.labels[j];
            if (label < 1 || label > kPhaseCount) {
                throw std::invalid_argument("make_chain: label out of range at index " + std::to_string(j));
            }
            p.load_currents.push_back(loads[j]);
            std::array<std::uint8_t, 3> row{0, 0, 0};
            row[static_cast<std::size_t>(label - 1)] = 1;
            p.switch_rows.push_back(row);
        }
        chain.points.push_back(std::move(p));
    }
    return chain;
}

/// Recovers the flat loads and implied per-load phase labels of a chain.
inline std::pair<std::vector<double>, PhaseAssignment> flatten(const FeederChain& chain) {
    std::vector<double> loads;
    PhaseAssignment assignment;
    for (std::size_t k = 0; k < chain.points.size(); ++k) {
        detail::check_point(chain.points[k], k);
        const ConnectionPoint& p = chain.points[k];
        for (std::size_t i = 0; i < p.load_currents.size(); ++i) {
            loads.push_back(p.load_currents[i]);
            for (int phase = 0; phase < kPhaseCount; ++phase) {
                if (p.switch_rows[i][static_cast<std::size_t>(phase)]) {
                    assignment.labels.push_back(phase + 1);
                    break;
                }
            }
        }
    }
    return {std::move(loads), std::move(assignment)};
}

/// Balance quality of one assignment: phase sums, their pairwise absolute
/// differences, the largest difference, and the total absolute deviation
/// from the ideal per-phase current.
struct BalanceReport {
    std::array<double, 3> phase_sums{};
    std::array<double, 3> pairwise_diffs{};
    double max_diff = 0.0;
    double total_abs_deviation = 0.0;
};

inline BalanceReport balance_report(const LoadSet& loads, const PhaseAssignment& assignment) {
    BalanceReport r;
    r.phase_sums = phase_sums(loads, assignment);
    r.pairwise_diffs = pairwise_diffs(r.phase_sums);
    r.max_diff = std::max({r.pairwise_diffs[0], r.pairwise_diffs[1], r.pairwise_diffs[2]});
    const double ideal = ideal_current(loads);
    r.total_abs_deviation = std::abs(r.phase_sums[0] - ideal) + std::abs(r.phase_sums[1] - ideal) +
                            std::abs(r.phase_sums[2] - ideal);
    return r;
}

}  // namespace phasebal
