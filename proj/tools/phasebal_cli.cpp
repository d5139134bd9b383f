// phasebal — three-phase feeder load balancing toolkit.
//
// Subcommands: balance, train, predict, experiment, loss, reproduce-tables.
// Every run either writes the requested artifact completely and exits 0, or
// prints a diagnostic to stderr and exits nonzero.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "phasebal/phasebal.hpp"

namespace {

phasebal::PhaseAssignment solve(const phasebal::LoadSet& loads, const std::string& method) {
    return method == "exact" ? phasebal::exact_balance(loads) : phasebal::greedy_balance(loads);
}

std::string join_numbers(const std::array<double, 3>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += phasebal::format_number(values[i]);
    }
    return out;
}

/// Derives the plot-table path from the summary path when --table is absent:
/// `summary.json` -> `summary.csv`, anything else gets `.csv` appended.
std::string default_table_path(const std::string& output) {
    const std::string suffix = ".json";
    if (output.size() > suffix.size() &&
        output.compare(output.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return output.substr(0, output.size() - suffix.size()) + ".csv";
    }
    return output + ".csv";
}

void run_balance(const std::string& input, const std::string& output, const std::string& method) {
    const auto instances = phasebal::parse_instances(phasebal::read_text_file(input));
    std::vector<phasebal::PhaseAssignment> assignments;
    assignments.reserve(instances.size());
    for (const phasebal::LoadSet& loads : instances) {
        assignments.push_back(solve(loads, method));
    }
    const auto report = phasebal::balance_report_json(instances, method, assignments);
    phasebal::write_text_file(output, phasebal::to_text(report));
    std::cout << "wrote balance report (" << instances.size() << " instances, method " << method
              << ") to " << output << '\n';
}

void run_train(const std::string& input, const std::string& model_path, const std::string& labels,
               std::optional<double> spread) {
    const auto instances = phasebal::parse_instances(phasebal::read_text_file(input));
    std::vector<std::pair<phasebal::LoadSet, phasebal::PhaseAssignment>> training;
    training.reserve(instances.size());
    for (const phasebal::LoadSet& loads : instances) {
        training.emplace_back(loads, solve(loads, labels));
    }
    const phasebal::GrnnModel model = phasebal::train(training, spread);
    phasebal::write_text_file(model_path, phasebal::save_model(model));
    std::cout << "wrote model (" << model.instance_count() << " instances, spread "
              << phasebal::format_number(model.spread()) << ") to " << model_path << '\n';
}

void run_predict(const std::string& input, const std::string& model_path, const std::string& output,
                 bool repair) {
    const phasebal::GrnnModel model = phasebal::load_model(phasebal::read_text_file(model_path));
    const auto instances = phasebal::parse_instances(phasebal::read_text_file(input));
    std::vector<phasebal::PhaseAssignment> baseline;
    std::vector<phasebal::PhaseAssignment> predicted;
    baseline.reserve(instances.size());
    predicted.reserve(instances.size());
    for (const phasebal::LoadSet& loads : instances) {
        baseline.push_back(phasebal::greedy_balance(loads));
        phasebal::PhaseAssignment nn = phasebal::predict_assignment(model, loads);
        if (repair) {
            nn = phasebal::repair_assignment(nn, loads);
        }
        predicted.push_back(std::move(nn));
    }
    const auto report =
        phasebal::predict_report_json(instances, baseline, predicted, model.spread(), repair);
    phasebal::write_text_file(output, phasebal::to_text(report));
    std::cout << "wrote prediction report (" << instances.size() << " instances) to " << output
              << '\n';
}

void run_experiment(const phasebal::ExperimentConfig& config, const std::string& output,
                    std::string table_path) {
    const phasebal::ExperimentSummary summary = phasebal::run_experiment(config);
    if (table_path.empty()) {
        table_path = default_table_path(output);
    }
    phasebal::write_text_file(output, phasebal::to_text(phasebal::experiment_summary_json(summary)));
    phasebal::write_text_file(table_path, phasebal::experiment_table_csv(summary));
    std::cout << "better " << summary.counts.better << " / same " << summary.counts.same
              << " / worse " << summary.counts.worse << " / fail " << summary.counts.fail << " (of "
              << summary.config.test_count << " test instances)\n";
    std::cout << "wrote experiment summary to " << output << " and table to " << table_path << '\n';
}

void run_loss(const std::string& input, const std::string& output) {
    const auto branches = phasebal::parse_branches(phasebal::read_text_file(input));
    const double watts = phasebal::total_power_loss(branches);
    const std::string text = phasebal::format_number(watts);
    std::cout << text << '\n';
    if (!output.empty()) {
        phasebal::write_text_file(output, text + "\n");
    }
}

void run_reproduce_tables(const std::string& output) {
    const phasebal::ReferenceReproduction result = phasebal::reproduce_tables();
    std::string text;
    for (const phasebal::ReferenceRow& row : result.rows) {
        text += row.dataset + " " + row.method + ": phase sums " + join_numbers(row.computed_sums) +
                ", diffs " + join_numbers(row.computed_diffs) + " — match\n";
    }
    for (const phasebal::SolverComparison& cmp : result.solver_rows) {
        text += cmp.dataset + " solvers: greedy sums " + join_numbers(cmp.greedy_sums) +
                " (max diff " + phasebal::format_number(cmp.greedy_max_diff) + ", " +
                (cmp.greedy_matches_reference ? "matches reference HEU" : "differs from reference HEU") +
                "); exact max diff " + phasebal::format_number(cmp.exact_max_diff) +
                (cmp.exact_improves_on_reference ? " (improves on reference HEU)" : "") + "\n";
    }
    text += "all reference values reproduced\n";
    std::cout << text;
    if (!output.empty()) {
        phasebal::write_text_file(output, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-phase feeder load balancing toolkit"};
    app.require_subcommand(1);

    std::string input;
    std::string output;
    std::string model_path;
    std::string method = "greedy";
    std::string labels = "greedy";
    std::string table_path;
    double spread_value = 0.0;
    bool repair = false;
    phasebal::ExperimentConfig config;

    auto* balance = app.add_subcommand("balance", "Balance an instance file with one solver");
    balance->add_option("--input", input, "instance file (CSV, one instance per row)")->required();
    balance->add_option("--output", output, "report file to write")->required();
    balance->add_option("--method", method, "solver")
        ->transform(CLI::IsMember({"greedy", "exact"}));

    auto* train = app.add_subcommand("train", "Label instances with a solver and store them as a model");
    train->add_option("--input", input, "training instance file")->required();
    train->add_option("--model", model_path, "model file to write")->required();
    train->add_option("--labels", labels, "labeling solver")
        ->transform(CLI::IsMember({"greedy", "exact"}));
    auto* train_spread = train->add_option("--spread", spread_value, "kernel width (default 1)");

    auto* predict = app.add_subcommand("predict", "Predict assignments with a stored model");
    predict->add_option("--input", input, "instance file")->required();
    predict->add_option("--model", model_path, "model file to read")->required();
    predict->add_option("--output", output, "report file to write")->required();
    predict->add_flag("--repair", repair, "project invalid predictions to the nearest valid assignment");

    auto* experiment = app.add_subcommand("experiment", "Train/test comparison on generated instances");
    experiment->add_option("--output", output, "summary file to write")->required();
    experiment->add_option("--table", table_path, "plot-ready per-instance table (default: summary path with .csv)");
    experiment->add_option("--loads", config.n_loads, "loads per instance (multiple of 3)");
    experiment->add_option("--train-count", config.train_count, "training instances");
    experiment->add_option("--test-count", config.test_count, "test instances");
    experiment->add_option("--min-a", config.current_min, "minimum load current, amperes");
    experiment->add_option("--max-a", config.current_max, "maximum load current, amperes");
    experiment->add_option("--seed", config.seed, "generator seed");
    experiment->add_option("--labels", labels, "training label solver")
        ->transform(CLI::IsMember({"greedy", "exact"}));
    auto* experiment_spread = experiment->add_option("--spread", spread_value, "kernel width (default 1)");
    experiment->add_flag("--repair", repair, "repair invalid predictions before scoring");

    auto* loss = app.add_subcommand("loss", "Total feeder power loss from a branch table");
    loss->add_option("--input", input, "branch file (r_ohm,p_watt,q_var,v_mag)")->required();
    loss->add_option("--output", output, "optional file for the printed value");

    auto* reproduce = app.add_subcommand("reproduce-tables", "Recompute the bundled reference tables");
    reproduce->add_option("--output", output, "optional file for the printed table");

    try {
        app.parse(argc, argv);

        if (balance->parsed()) {
            run_balance(input, output, method);
        } else if (train->parsed()) {
            std::optional<double> spread;
            if (train_spread->count() > 0) spread = spread_value;
            run_train(input, model_path, labels, spread);
        } else if (predict->parsed()) {
            run_predict(input, model_path, output, repair);
        } else if (experiment->parsed()) {
            if (experiment_spread->count() > 0) config.spread = spread_value;
            config.label_source = labels == "exact" ? phasebal::LabelSource::kExact
                                                    : phasebal::LabelSource::kGreedy;
            config.repair = repair;
            run_experiment(config, output, table_path);
        } else if (loss->parsed()) {
            run_loss(input, output);
        } else if (reproduce->parsed()) {
            run_reproduce_tables(output);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
