#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "phasebal/balancing.hpp"
#include "phasebal/grnn.hpp"

using namespace phasebal;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<double> kData1{89, 85, 74, 38, 56, 45};

std::vector<double> random_loads(std::mt19937& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = static_cast<double>(rng() % 121);
    return v;
}

std::vector<std::pair<LoadSet, PhaseAssignment>> random_training(std::mt19937& rng,
                                                                 std::size_t count,
                                                                 std::size_t n) {
    std::vector<std::pair<LoadSet, PhaseAssignment>> training;
    while (training.size() < count) {
        LoadSet loads(random_loads(rng, n));
        const bool duplicate =
            std::any_of(training.begin(), training.end(),
                        [&](const auto& t) { return t.first.currents() == loads.currents(); });
        if (duplicate) continue;
        PhaseAssignment a = greedy_balance(loads);
        training.emplace_back(std::move(loads), std::move(a));
    }
    return training;
}

double min_pairwise_distance(const std::vector<std::pair<LoadSet, PhaseAssignment>>& training) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < training.size(); ++i) {
        for (std::size_t j = i + 1; j < training.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < training[i].first.size(); ++k) {
                const double d = training[i].first[k] - training[j].first[k];
                d2 += d * d;
            }
            best = std::min(best, std::sqrt(d2));
        }
    }
    return best;
}

// Brute-force repair oracle over every balanced label sequence: smallest
// Hamming distance to the input first, then smallest (max diff, total
// deviation), then the lexicographically smallest sequence.
struct RepairOracle {
    std::vector<int> labels;
    std::size_t distance = 0;
};

RepairOracle repair_oracle(const PhaseAssignment& input, const LoadSet& loads) {
    const std::size_t group = loads.size() / 3;
    std::vector<int> perm;
    for (int p = 1; p <= 3; ++p) perm.insert(perm.end(), group, p);
    const double ideal = loads.total() / 3.0;

    RepairOracle best;
    best.distance = loads.size() + 1;
    double best_md = std::numeric_limits<double>::infinity();
    double best_tad = std::numeric_limits<double>::infinity();
    do {
        std::size_t distance = 0;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            if (perm[i] != input.labels[i]) ++distance;
        }
        const auto sums = phase_sums(loads, PhaseAssignment{perm});
        const auto diffs = pairwise_diffs(sums);
        const double md = std::max({diffs[0], diffs[1], diffs[2]});
        const double tad =
            std::abs(sums[0] - ideal) + std::abs(sums[1] - ideal) + std::abs(sums[2] - ideal);
        const bool better = distance < best.distance ||
                            (distance == best.distance &&
                             (md < best_md || (md == best_md && tad < best_tad)));
        if (better) {
            best.labels = perm;
            best.distance = distance;
            best_md = md;
            best_tad = tad;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("train stores solved instances verbatim", "[grnn]") {
    std::mt19937 rng(11);
    const auto training = random_training(rng, 5, 6);
    const GrnnModel model = train(training);
    REQUIRE(model.instance_count() == 5);
    REQUIRE(model.input_length() == 6);
    REQUIRE(model.spread() == kDefaultSpread);
    for (std::size_t i = 0; i < training.size(); ++i) {
        REQUIRE(model.inputs()[i] == training[i].first.currents());
        for (std::size_t j = 0; j < 6; ++j) {
            REQUIRE(model.targets()[i][j] == static_cast<double>(training[i].second.labels[j]));
        }
    }
    REQUIRE(train(training, 2.5).spread() == 2.5);
}

TEST_CASE("train rejects malformed training sets", "[grnn]") {
    REQUIRE_THROWS_AS(train({}), std::invalid_argument);

    std::vector<std::pair<LoadSet, PhaseAssignment>> unbalanced{
        {LoadSet(kData1), PhaseAssignment{{1, 1, 1, 2, 2, 3}}}};
    REQUIRE_THROWS_AS(train(unbalanced), std::invalid_argument);

    std::vector<std::pair<LoadSet, PhaseAssignment>> mixed{
        {LoadSet(kData1), PhaseAssignment{{1, 2, 3, 1, 3, 2}}},
        {LoadSet({1, 2, 3}), PhaseAssignment{{1, 2, 3}}}};
    REQUIRE_THROWS_AS(train(mixed), std::invalid_argument);

    std::vector<std::pair<LoadSet, PhaseAssignment>> good{
        {LoadSet(kData1), PhaseAssignment{{1, 2, 3, 1, 3, 2}}}};
    REQUIRE_THROWS_AS(train(good, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(train(good, -1.0), std::invalid_argument);
}

TEST_CASE("model constructor rejects non-label targets", "[grnn]") {
    REQUIRE_THROWS_AS(GrnnModel({{1, 2, 3}}, {{1, 2, 4}}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(GrnnModel({{1, 2, 3}}, {{1, 2.5, 3}}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(GrnnModel({}, {}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(GrnnModel({{1, 2, 3}}, {{1, 2, 3}, {1, 2, 3}}, 1.0), std::invalid_argument);
}

TEST_CASE("tiny spreads make the network interpolate its training set", "[grnn]") {
    std::mt19937 rng(2);
    const auto training = random_training(rng, 10, 6);
    const double spread = 1e-3 * min_pairwise_distance(training);
    const GrnnModel model = train(training, spread);
    for (const auto& [loads, assignment] : training) {
        REQUIRE(predict_assignment(model, loads) == assignment);
    }
}

TEST_CASE("raw estimates stay inside the label range", "[grnn]") {
    std::mt19937 rng(3);
    for (double spread : {0.5, 5.0, 50.0}) {
        const auto training = random_training(rng, 4, 6);
        const GrnnModel model = train(training, spread);
        for (int trial = 0; trial < 25; ++trial) {
            const LoadSet query(random_loads(rng, 6));
            for (double v : predict_raw(model, query)) {
                REQUIRE(v >= 1.0);
                REQUIRE(v <= 3.0);
            }
        }
    }
}

TEST_CASE("huge spreads average all stored targets", "[grnn]") {
    std::vector<std::pair<LoadSet, PhaseAssignment>> training{
        {LoadSet({10, 20, 30}), PhaseAssignment{{1, 2, 3}}},
        {LoadSet({90, 40, 70}), PhaseAssignment{{3, 2, 1}}}};
    const GrnnModel model = train(training, 1e8);
    const auto raw = predict_raw(model, LoadSet({50, 50, 50}));
    for (double v : raw) {
        REQUIRE_THAT(v, WithinAbs(2.0, 1e-9));
    }
    REQUIRE(decode_assignment(raw) == PhaseAssignment{{2, 2, 2}});
}

TEST_CASE("total kernel underflow falls back to the nearest stored target", "[grnn]") {
    std::vector<std::pair<LoadSet, PhaseAssignment>> training{
        {LoadSet({0, 0, 0}), PhaseAssignment{{1, 2, 3}}},
        {LoadSet({100, 100, 100}), PhaseAssignment{{3, 2, 1}}}};
    const GrnnModel model = train(training, 1e-150);
    REQUIRE(predict_raw(model, LoadSet({99, 99, 99})) == std::vector<double>{3, 2, 1});
    REQUIRE(predict_raw(model, LoadSet({1, 2, 1})) == std::vector<double>{1, 2, 3});
}

TEST_CASE("decode rounds to the nearest phase label and clamps", "[grnn]") {
    const std::vector<double> raw{1.4, 1.6, 2.5, 0.2, 3.9, 2.49};
    REQUIRE(decode_assignment(raw) == PhaseAssignment{{1, 2, 3, 1, 3, 2}});
}

TEST_CASE("prediction rejects mismatched query lengths", "[grnn]") {
    std::mt19937 rng(5);
    const GrnnModel model = train(random_training(rng, 3, 6));
    REQUIRE_THROWS_AS(predict_assignment(model, LoadSet({1, 2, 3})), std::invalid_argument);
}

TEST_CASE("repair keeps valid assignments untouched", "[grnn]") {
    const LoadSet loads(kData1);
    const PhaseAssignment valid{{1, 2, 3, 1, 3, 2}};
    REQUIRE(repair_assignment(valid, loads) == valid);
}

TEST_CASE("repair moves only surplus loads", "[grnn]") {
    // One load too many on phase 1, one missing on phase 3; the cheapest
    // single move that also balances best shifts the first load.
    const LoadSet loads(kData1);
    const PhaseAssignment fixed = repair_assignment(PhaseAssignment{{1, 1, 1, 2, 2, 3}}, loads);
    REQUIRE(fixed == PhaseAssignment{{3, 1, 1, 2, 2, 3}});
}

TEST_CASE("repairing a constant assignment equals solving from scratch", "[grnn]") {
    // Every balanced sequence is equally far from all-2s, so the repair
    // tie-breaks exactly like the exhaustive solver.
    const LoadSet loads(kData1);
    REQUIRE(repair_assignment(PhaseAssignment{{2, 2, 2, 2, 2, 2}}, loads) == exact_balance(loads));
}

TEST_CASE("repair matches the brute-force projection oracle", "[grnn]") {
    std::mt19937 rng(606);
    for (int trial = 0; trial < 60; ++trial) {
        const LoadSet loads(random_loads(rng, 6));
        std::vector<int> raw(6);
        for (int& label : raw) label = 1 + static_cast<int>(rng() % 3);
        const PhaseAssignment input{raw};

        const PhaseAssignment repaired = repair_assignment(input, loads);
        const RepairOracle oracle = repair_oracle(input, loads);
        REQUIRE(repaired.labels == oracle.labels);

        std::size_t moved = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (repaired.labels[i] != raw[i]) ++moved;
        }
        REQUIRE(moved == oracle.distance);
        REQUIRE(validate_assignment(repaired, loads.size()).ok());
    }
}

TEST_CASE("repair rejects malformed input", "[grnn]") {
    const LoadSet loads(kData1);
    REQUIRE_THROWS_AS(repair_assignment(PhaseAssignment{{1, 2, 3}}, loads), std::invalid_argument);
    REQUIRE_THROWS_AS(repair_assignment(PhaseAssignment{{1, 2, 3, 1, 3, 4}}, loads),
                      std::invalid_argument);
}

TEST_CASE("outcome classification compares largest differences", "[grnn]") {
    const BalanceReport tight{{}, {}, 3.0, 4.0};
    const BalanceReport loose{{}, {}, 11.0, 14.0};
    REQUIRE(classify_outcome(tight, loose, true) == Outcome::kBetter);
    REQUIRE(classify_outcome(loose, tight, true) == Outcome::kWorse);
    REQUIRE(classify_outcome(tight, tight, true) == Outcome::kSame);
    REQUIRE(classify_outcome(tight, loose, false) == Outcome::kFail);

    BalanceReport nudged = tight;
    nudged.max_diff += 5e-10;  // inside the comparison tolerance
    REQUIRE(classify_outcome(nudged, tight, true) == Outcome::kSame);
    nudged.max_diff = tight.max_diff + 2e-9;
    REQUIRE(classify_outcome(nudged, tight, true) == Outcome::kWorse);
}

TEST_CASE("outcome names", "[grnn]") {
    REQUIRE(std::string(to_string(Outcome::kBetter)) == "BETTER");
    REQUIRE(std::string(to_string(Outcome::kSame)) == "SAME");
    REQUIRE(std::string(to_string(Outcome::kWorse)) == "WORSE");
    REQUIRE(std::string(to_string(Outcome::kFail)) == "FAIL");
}
