#include <algorithm>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "phasebal/harness.hpp"
#include "phasebal/io.hpp"

using namespace phasebal;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.train_count = 40;
    config.test_count = 12;
    config.seed = 7;
    return config;
}

}  // namespace

TEST_CASE("config validation", "[harness]") {
    REQUIRE_NOTHROW(ExperimentConfig{}.validate());

    ExperimentConfig bad = small_config();
    bad.n_loads = 4;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = small_config();
    bad.train_count = 0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = small_config();
    bad.current_min = 120;
    bad.current_max = 120;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = small_config();
    bad.spread = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("instances depend only on seed and index", "[harness]") {
    ExperimentConfig a = small_config();
    ExperimentConfig b = small_config();
    b.train_count = 999;   // stream shape must not matter
    b.test_count = 1;
    b.spread = 3.0;
    b.repair = true;
    b.label_source = LabelSource::kExact;
    for (std::size_t i : {std::size_t{0}, std::size_t{5}, std::size_t{51}}) {
        REQUIRE(generate_instance(a, i) == generate_instance(b, i));
        REQUIRE(generate_instance(a, i) == generate_instance(a, i));
    }

    ExperimentConfig other_seed = small_config();
    other_seed.seed = 8;
    bool any_difference = false;
    for (std::size_t i = 0; i < 10; ++i) {
        if (!(generate_instance(a, i) == generate_instance(other_seed, i))) any_difference = true;
    }
    REQUIRE(any_difference);
}

TEST_CASE("generated currents are integers inside the configured range", "[harness]") {
    ExperimentConfig config = small_config();
    config.current_min = 5;
    config.current_max = 7;
    std::set<double> seen;
    for (std::size_t i = 0; i < 200; ++i) {
        const LoadSet instance = generate_instance(config, i);
        for (double c : instance.currents()) {
            REQUIRE(c >= 5.0);
            REQUIRE(c <= 7.0);
            REQUIRE(c == std::floor(c));
            seen.insert(c);
        }
    }
    REQUIRE(seen == std::set<double>{5.0, 6.0, 7.0});
}

TEST_CASE("generate_instances lays out train then test", "[harness]") {
    const ExperimentConfig config = small_config();
    const auto instances = generate_instances(config);
    REQUIRE(instances.size() == config.train_count + config.test_count);
    for (std::size_t i : {std::size_t{0}, std::size_t{39}, std::size_t{40}, std::size_t{51}}) {
        REQUIRE(instances[i] == generate_instance(config, i));
    }
}

TEST_CASE("experiment runs are deterministic", "[harness]") {
    const ExperimentConfig config = small_config();
    const ExperimentSummary first = run_experiment(config);
    const ExperimentSummary second = run_experiment(config);
    REQUIRE(to_text(experiment_summary_json(first)) == to_text(experiment_summary_json(second)));
    REQUIRE(experiment_table_csv(first) == experiment_table_csv(second));
}

TEST_CASE("experiment summary is internally consistent", "[harness]") {
    const ExperimentConfig config = small_config();
    const ExperimentSummary summary = run_experiment(config);

    REQUIRE(summary.spread_used == kDefaultSpread);
    REQUIRE(summary.counts.total() == config.test_count);
    REQUIRE(summary.records.size() == config.test_count);
    REQUIRE(summary.percent_better + summary.percent_same + summary.percent_worse +
                summary.percent_fail ==
            Catch::Approx(100.0));

    double greedy_sum = 0.0;
    for (std::size_t t = 0; t < summary.records.size(); ++t) {
        const InstanceResult& r = summary.records[t];
        REQUIRE(r.index == config.train_count + t);
        REQUIRE(r.nn_valid == r.nn_max_diff.has_value());
        REQUIRE(r.exact_max_diff.has_value());  // six loads: the oracle is feasible
        REQUIRE(*r.exact_max_diff <= r.greedy_max_diff);
        greedy_sum += r.greedy_max_diff;

        // Category must agree with the stored figures.
        switch (r.category) {
            case Outcome::kFail:
                REQUIRE_FALSE(r.nn_valid);
                break;
            case Outcome::kBetter:
                REQUIRE(*r.nn_max_diff < r.greedy_max_diff);
                break;
            case Outcome::kWorse:
                REQUIRE(*r.nn_max_diff > r.greedy_max_diff);
                break;
            case Outcome::kSame:
                REQUIRE(*r.nn_max_diff == r.greedy_max_diff);
                break;
        }
    }
    REQUIRE(summary.mean_greedy_max_diff ==
            Catch::Approx(greedy_sum / static_cast<double>(config.test_count)));
    REQUIRE(summary.mean_exact_max_diff.has_value());
}

TEST_CASE("repair mode eliminates invalid predictions", "[harness]") {
    ExperimentConfig config = small_config();
    config.spread = 200.0;  // wide kernel: raw predictions average toward 2
    config.repair = true;
    const ExperimentSummary summary = run_experiment(config);
    REQUIRE(summary.counts.fail == 0);
    for (const InstanceResult& r : summary.records) {
        REQUIRE(r.nn_valid);
    }
}

TEST_CASE("exact labels are accepted as the training source", "[harness]") {
    ExperimentConfig config = small_config();
    config.label_source = LabelSource::kExact;
    config.test_count = 5;
    const ExperimentSummary summary = run_experiment(config);
    REQUIRE(summary.counts.total() == 5);
}

TEST_CASE("reference datasets are bundled with valid solutions", "[harness]") {
    const auto& datasets = reference_datasets();
    REQUIRE(datasets.size() == 3);
    for (const ReferenceDataset& d : datasets) {
        const std::vector<int> nn(d.nn_labels.begin(), d.nn_labels.end());
        const std::vector<int> heu(d.heu_labels.begin(), d.heu_labels.end());
        REQUIRE(validate_assignment(PhaseAssignment{nn}, 6).ok());
        REQUIRE(validate_assignment(PhaseAssignment{heu}, 6).ok());
    }
}

TEST_CASE("reference tables reproduce exactly", "[harness]") {
    const ReferenceReproduction result = reproduce_tables();
    REQUIRE(result.rows.size() == 6);
    for (const ReferenceRow& row : result.rows) {
        REQUIRE(row.computed_sums == row.expected_sums);
        REQUIRE(row.computed_diffs == row.expected_diffs);
    }

    REQUIRE(result.solver_rows.size() == 3);
    REQUIRE(result.solver_rows[0].greedy_matches_reference);
    REQUIRE_FALSE(result.solver_rows[1].greedy_matches_reference);
    REQUIRE(result.solver_rows[2].greedy_matches_reference);

    // Only the second dataset's bundled heuristic is beatable.
    REQUIRE_FALSE(result.solver_rows[0].exact_improves_on_reference);
    REQUIRE(result.solver_rows[1].exact_improves_on_reference);
    REQUIRE(result.solver_rows[1].greedy_max_diff == 11.0);
    REQUIRE(result.solver_rows[1].exact_max_diff == 11.0);
    REQUIRE_FALSE(result.solver_rows[2].exact_improves_on_reference);
}
