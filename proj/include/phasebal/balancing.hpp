#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasebal/core.hpp"

// Assignment producers: an exhaustive oracle over all balanced assignments
// and the greedy best-group-first heuristic, both with deterministic
// lexicographic tie-breaking.

namespace phasebal {

/// Loads beyond this count are refused by the exhaustive oracle; the
/// balanced-assignment count N!/((N/3)!)^3 passes 756756 at N=15 and stops
/// being desk-scale soon after.
inline constexpr std::size_t kExactEnumerationLimit = 15;

/// Lexicographic balance objective: largest pairwise phase-sum difference
/// first, total absolute deviation from the ideal current second.
struct BalanceObjective {
    double max_diff = 0.0;
    double total_abs_deviation = 0.0;

    friend constexpr bool operator<(const BalanceObjective& a, const BalanceObjective& b) {
        if (a.max_diff != b.max_diff) return a.max_diff < b.max_diff;
        return a.total_abs_deviation < b.total_abs_deviation;
    }
    friend constexpr bool operator==(const BalanceObjective& a, const BalanceObjective& b) {
        return a.max_diff == b.max_diff && a.total_abs_deviation == b.total_abs_deviation;
    }
    friend constexpr bool operator<=(const BalanceObjective& a, const BalanceObjective& b) {
        return a < b || a == b;
    }
};

namespace detail {

inline BalanceObjective objective_from_sums(const std::array<double, 3>& sums, double ideal) {
    const std::array<double, 3> diffs = pairwise_diffs(sums);
    return BalanceObjective{
        std::max({diffs[0], diffs[1], diffs[2]}),
        std::abs(sums[0] - ideal) + std::abs(sums[1] - ideal) + std::abs(sums[2] - ideal),
    };
}

/// Advances c (strictly increasing positions into [0, m)) to the next
/// combination in lexicographic order; false once exhausted.
inline bool next_combination(std::vector<std::size_t>& c, std::size_t m) {
    const std::size_t g = c.size();
    for (std::size_t i = g; i-- > 0;) {
        if (c[i] != i + m - g) {
            ++c[i];
            for (std::size_t j = i + 1; j < g; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Scores a balanced-valid assignment; rejects anything else.
inline BalanceObjective objective_value(const LoadSet& loads, const PhaseAssignment& assignment) {
    const AssignmentValidity v = validate_assignment(assignment, loads.size());
    if (!v.ok()) {
        throw std::invalid_argument(std::string("objective_value: assignment is not balanced-valid: ") +
                                    to_string(v.status));
    }
    return detail::objective_from_sums(phase_sums(loads, assignment), ideal_current(loads));
}

/// Exhaustive oracle: enumerates every assignment with exactly N/3 loads per
/// phase and returns the lexicographically smallest label sequence among the
/// objective minimizers. Deterministic; refuses N above
/// kExactEnumerationLimit.
inline PhaseAssignment exact_balance(const LoadSet& loads) {
    const std::size_t n = loads.size();
    if (n > kExactEnumerationLimit) {
        throw std::length_error("exact_balance: exhaustive enumeration capped at " +
                                std::to_string(kExactEnumerationLimit) + " loads, got " + std::to_string(n));
    }
    const std::size_t group = n / 3;
    const double ideal = ideal_current(loads);

    std::vector<int> labels(n, 0);
    std::vector<int> best_labels;
    BalanceObjective best{std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};

    // Depth-first over labels in 1,2,3 order: leaves appear in lexicographic
    // label-sequence order, so keeping the first strict improvement yields
    // the lexicographically smallest minimizer. Partial sums travel by
    // value; no mutate-and-undo on doubles.
    auto descend = [&](auto&& self, std::size_t i, std::array<double, 3> sums,
                       std::array<std::size_t, 3> counts) -> void {
        if (i == n) {
            const BalanceObjective obj = detail::objective_from_sums(sums, ideal);
            if (obj < best) {
                best = obj;
                best_labels = labels;
            }
            return;
        }
        for (int label = 1; label <= kPhaseCount; ++label) {
            auto& count = counts[static_cast<std::size_t>(label - 1)];
            if (count == group) continue;
            labels[i] = label;
            auto next_sums = sums;
            next_sums[static_cast<std::size_t>(label - 1)] += loads[i];
            ++count;
            self(self, i + 1, next_sums, counts);
            --count;
        }
    };
    descend(descend, 0, {0.0, 0.0, 0.0}, {0, 0, 0});
    return PhaseAssignment{std::move(best_labels)};
}

/// Greedy best-group-first heuristic: repeatedly picks, among the unassigned
/// loads, the group of N/3 whose sum is closest to the ideal current, gives
/// it the lowest unused phase label, and leaves the remainder as the last
/// phase. Ties go to the lexicographically smallest index set.
inline PhaseAssignment greedy_balance(const LoadSet& loads) {
    const std::size_t n = loads.size();
    const std::size_t group = n / 3;
    const double ideal = ideal_current(loads);

    std::vector<std::size_t> unassigned(n);
    std::iota(unassigned.begin(), unassigned.end(), std::size_t{0});
    std::vector<int> labels(n, 0);

    for (int phase = 1; phase < kPhaseCount; ++phase) {
        std::vector<std::size_t> positions(group);
        std::iota(positions.begin(), positions.end(), std::size_t{0});
        std::vector<std::size_t> best_positions;
        double best_dist = std::numeric_limits<double>::infinity();
        do {
            double sum = 0.0;
            for (std::size_t p : positions) sum += loads[unassigned[p]];
            const double dist = std::abs(sum - ideal);
            if (dist < best_dist) {
                best_dist = dist;
                best_positions = positions;
            }
        } while (detail::next_combination(positions, unassigned.size()));

        for (std::size_t p : best_positions) labels[unassigned[p]] = phase;
        std::vector<std::size_t> rest;
        rest.reserve(unassigned.size() - group);
        std::size_t cursor = 0;
        for (std::size_t p = 0; p < unassigned.size(); ++p) {
            if (cursor < best_positions.size() && best_positions[cursor] == p) {
                ++cursor;
            } else {
                rest.push_back(unassigned[p]);
            }
        }
        unassigned = std::move(rest);
    }
    for (std::size_t i : unassigned) labels[i] = kPhaseCount;
    return PhaseAssignment{std::move(labels)};
}

}  // namespace phasebal
