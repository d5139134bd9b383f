#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phasebal/balancing.hpp"
#include "phasebal/core.hpp"

// Generalized regression network mapping a load vector to a switching
// sequence. One-pass memory-based learner: training stores the solved
// instances verbatim, prediction is the normalized Gaussian-kernel weighted
// average of the stored target sequences,
//
//   y_hat = sum_i y_i * w_i / sum_i w_i,   w_i = exp(-|x - x_i|^2 / (2 s^2)),
//
// decoded per load by rounding to the nearest phase label.

namespace phasebal {

/// Kernel width fallback when none is given. Matches the widely used
/// toolbox default for this estimator; at ampere scale it makes the nearest
/// stored instance dominate, so predictions stay near-interpolating.
inline constexpr double kDefaultSpread = 1.0;

/// Immutable store of training instances plus the kernel width.
class GrnnModel {
public:
    GrnnModel(std::vector<std::vector<double>> inputs, std::vector<std::vector<double>> targets,
              double spread)
        : inputs_(std::move(inputs)), targets_(std::move(targets)), spread_(spread) {
        if (inputs_.empty() || inputs_.size() != targets_.size()) {
            throw std::invalid_argument("GrnnModel: need >= 1 instance and one target per input");
        }
        if (!(spread_ > 0.0) || !std::isfinite(spread_)) {
            throw std::invalid_argument("GrnnModel: spread must be positive and finite");
        }
        const std::size_t n = inputs_.front().size();
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            if (inputs_[i].size() != n || targets_[i].size() != n) {
                throw std::invalid_argument("GrnnModel: instance " + std::to_string(i) +
                                            " has inconsistent length");
            }
            for (double t : targets_[i]) {
                if (t != 1.0 && t != 2.0 && t != 3.0) {
                    throw std::invalid_argument("GrnnModel: target entries must be phase labels 1, 2 or 3");
                }
            }
        }
    }

    std::size_t instance_count() const noexcept { return inputs_.size(); }
    std::size_t input_length() const noexcept { return inputs_.front().size(); }
    double spread() const noexcept { return spread_; }
    const std::vector<std::vector<double>>& inputs() const noexcept { return inputs_; }
    const std::vector<std::vector<double>>& targets() const noexcept { return targets_; }

private:
    std::vector<std::vector<double>> inputs_;
    std::vector<std::vector<double>> targets_;
    double spread_;
};

/// Stores solved instances verbatim. No iterative optimization happens here;
/// the instances _are_ the model. Every target assignment must be
/// balanced-valid. Omitting spread selects kDefaultSpread.
inline GrnnModel train(const std::vector<std::pair<LoadSet, PhaseAssignment>>& instances,
                       std::optional<double> spread = std::nullopt) {
    if (instances.empty()) {
        throw std::invalid_argument("train: no training instances");
    }
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
    inputs.reserve(instances.size());
    targets.reserve(instances.size());
    const std::size_t n = instances.front().first.size();
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& [loads, assignment] = instances[i];
        if (loads.size() != n) {
            throw std::invalid_argument("train: instance " + std::to_string(i) +
                                        " has inconsistent load count");
        }
        const AssignmentValidity v = validate_assignment(assignment, loads.size());
        if (!v.ok()) {
            throw std::invalid_argument(std::string("train: instance ") + std::to_string(i) +
                                        " target is not balanced-valid: " + to_string(v.status));
        }
        inputs.push_back(loads.currents());
        std::vector<double> target(assignment.labels.begin(), assignment.labels.end());
        targets.push_back(std::move(target));
    }
    return GrnnModel(std::move(inputs), std::move(targets), spread.value_or(kDefaultSpread));
}

/// Kernel-regression estimate of the switching sequence; each output
/// dimension is a convex combination of stored labels, so it lies in [1,3].
/// If every kernel weight underflows to zero the estimate falls back to the
/// nearest stored instance's target (first one on ties).
inline std::vector<double> predict_raw(const GrnnModel& model, const LoadSet& loads) {
    if (loads.size() != model.input_length()) {
        throw std::invalid_argument("predict_raw: query has " + std::to_string(loads.size()) +
                                    " loads but the model expects " +
                                    std::to_string(model.input_length()));
    }
    const std::size_t m = model.instance_count();
    const std::size_t n = model.input_length();
    const double denom = 2.0 * model.spread() * model.spread();

    std::vector<double> weights(m);
    double weight_sum = 0.0;
    std::size_t nearest = 0;
    double nearest_dist2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double dist2 = 0.0;
        const std::vector<double>& x = model.inputs()[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double d = loads[j] - x[j];
            dist2 += d * d;
        }
        weights[i] = std::exp(-dist2 / denom);
        weight_sum += weights[i];
        if (dist2 < nearest_dist2) {
            nearest_dist2 = dist2;
            nearest = i;
        }
    }
    if (weight_sum == 0.0) {
        return model.targets()[nearest];
    }
    std::vector<double> estimate(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::vector<double>& y = model.targets()[i];
        for (std::size_t j = 0; j < n; ++j) {
            estimate[j] += y[j] * weights[i];
        }
    }
    for (double& v : estimate) {
        // clamp guards one-ulp excursions of the normalized sum
        v = std::clamp(v / weight_sum, 1.0, 3.0);
    }
    return estimate;
}

/// Per-load decoding: round half away from zero, clamp into the label range.
inline PhaseAssignment decode_assignment(std::span<const double> raw) {
    PhaseAssignment a;
    a.labels.reserve(raw.size());
    for (double v : raw) {
        const double rounded = std::round(v);
        a.labels.push_back(static_cast<int>(std::clamp(rounded, 1.0, 3.0)));
    }
    return a;
}

/// Raw estimate decoded to labels. No validity repair: the result can carry
/// unequal per-phase counts, and validate_assignment is the caller's check.
inline PhaseAssignment predict_assignment(const GrnnModel& model, const LoadSet& loads) {
    const std::vector<double> raw = predict_raw(model, loads);
    return decode_assignment(raw);
}

namespace detail {

/// Key for picking the canonical repair: objective first, then the label
/// sequence itself, so equal objectives resolve lexicographically.
struct RepairChoice {
    BalanceObjective objective;
    std::vector<int> labels;

    bool better_than(const RepairChoice& other) const {
        if (objective < other.objective) return true;
        if (other.objective < objective) return false;
        return labels < other.labels;
    }
};

}  // namespace detail

/// Projects an assignment onto the balanced-valid set: minimum number of
/// label changes first, then minimum balance objective, then the
/// lexicographically smallest label sequence. Only loads on over-full phases
/// ever move, which is what makes the change count minimal.
inline PhaseAssignment repair_assignment(const PhaseAssignment& assignment, const LoadSet& loads) {
    const std::size_t n = loads.size();
    if (assignment.size() != n) {
        throw std::invalid_argument("repair_assignment: assignment " +
                                    detail::bad_length_msg(assignment.size(), n));
    }
    std::array<std::vector<std::size_t>, 3> members;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = assignment.labels[i];
        if (label < 1 || label > kPhaseCount) {
            throw std::invalid_argument("repair_assignment: label out of range at index " +
                                        std::to_string(i));
        }
        members[static_cast<std::size_t>(label - 1)].push_back(i);
    }
    const std::size_t group = n / 3;
    std::vector<std::size_t> surplus_phases;
    std::vector<int> deficit_labels;  // target labels, one per missing slot, ascending
    for (std::size_t p = 0; p < 3; ++p) {
        if (members[p].size() > group) surplus_phases.push_back(p);
        for (std::size_t d = members[p].size(); d < group; ++d) deficit_labels.push_back(static_cast<int>(p) + 1);
    }
    if (surplus_phases.empty()) {
        return assignment;  // already balanced-valid
    }

    const double ideal = ideal_current(loads);
    std::optional<detail::RepairChoice> best;

    // Per surplus phase, every choice of which excess members leave; across
    // phases, the cartesian product of those choices.
    std::vector<std::vector<std::size_t>> leaving(surplus_phases.size());
    auto consider = [&](const std::vector<std::size_t>& moved_sorted) {
        std::vector<int> relabels(deficit_labels);
        std::sort(relabels.begin(), relabels.end());
        do {
            std::vector<int> labels = assignment.labels;
            for (std::size_t k = 0; k < moved_sorted.size(); ++k) {
                labels[moved_sorted[k]] = relabels[k];
            }
            std::array<double, 3> sums{0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                sums[static_cast<std::size_t>(labels[i] - 1)] += loads[i];
            }
            detail::RepairChoice choice{detail::objective_from_sums(sums, ideal), std::move(labels)};
            if (!best || choice.better_than(*best)) {
                best = std::move(choice);
            }
        } while (std::next_permutation(relabels.begin(), relabels.end()));
    };

    auto pick_leavers = [&](auto&& self, std::size_t which) -> void {
        if (which == surplus_phases.size()) {
            std::vector<std::size_t> moved;
            for (const auto& part : leaving) moved.insert(moved.end(), part.begin(), part.end());
            std::sort(moved.begin(), moved.end());
            consider(moved);
            return;
        }
        const std::size_t phase = surplus_phases[which];
        const std::vector<std::size_t>& own = members[phase];
        const std::size_t excess = own.size() - group;
        std::vector<std::size_t> positions(excess);
        std::iota(positions.begin(), positions.end(), std::size_t{0});
        do {
            leaving[which].clear();
            for (std::size_t p : positions) leaving[which].push_back(own[p]);
            self(self, which + 1);
        } while (detail::next_combination(positions, own.size()));
    };
    pick_leavers(pick_leavers, 0);
    return PhaseAssignment{std::move(best->labels)};
}

/// Network-vs-heuristic outcome on one instance.
enum class Outcome { kBetter, kSame, kWorse, kFail };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::kBetter: return "BETTER";
        case Outcome::kSame: return "SAME";
        case Outcome::kWorse: return "WORSE";
        case Outcome::kFail: return "FAIL";
    }
    return "unknown";
}

/// FAIL when the network result is invalid; otherwise compares the largest
/// phase-current differences. The tolerance only matters for non-integer
/// loads; integer instances compare exactly.
inline Outcome classify_outcome(const BalanceReport& nn_report, const BalanceReport& heuristic_report,
                                bool nn_valid) {
    if (!nn_valid) return Outcome::kFail;
    const double delta = nn_report.max_diff - heuristic_report.max_diff;
    if (std::abs(delta) <= 1e-9) return Outcome::kSame;
    return delta < 0.0 ? Outcome::kBetter : Outcome::kWorse;
}

}  // namespace phasebal
