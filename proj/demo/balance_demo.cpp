// Minimal tour of the library: balance one instance with both solvers,
// then train a model on solved instances and predict a held-out one.

#include <iostream>
#include <utility>
#include <vector>

#include "phasebal/phasebal.hpp"

using namespace phasebal;

namespace {

void print_solution(const char* name, const LoadSet& loads, const PhaseAssignment& assignment) {
    const BalanceReport report = balance_report(loads, assignment);
    std::cout << name << ": labels [";
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        std::cout << (i > 0 ? "," : "") << assignment.labels[i];
    }
    std::cout << "]  phase sums " << format_number(report.phase_sums[0]) << "/"
              << format_number(report.phase_sums[1]) << "/" << format_number(report.phase_sums[2])
              << "  max diff " << format_number(report.max_diff) << '\n';
}

}  // namespace

int main() {
    // Six loads (amperes) to spread over three phases, two per phase.
    const LoadSet loads({35, 0, 90, 21, 87, 112});

    std::cout << "solve 35,0,90,21,87,112 with both solvers:\n";
    print_solution("greedy", loads, greedy_balance(loads));
    print_solution("exact ", loads, exact_balance(loads));

    // A model is just solved instances; here we reuse the bundled reference
    // datasets as training data and query a nearby instance.
    std::vector<std::pair<LoadSet, PhaseAssignment>> training;
    for (const ReferenceDataset& d : reference_datasets()) {
        const LoadSet train_loads(std::vector<double>(d.loads.begin(), d.loads.end()));
        training.emplace_back(train_loads, greedy_balance(train_loads));
    }
    const GrnnModel model = train(training, 5.0);

    const LoadSet query({88, 84, 75, 39, 55, 46});  // close to the first training instance
    std::cout << "predict 88,84,75,39,55,46 from a model over the bundled datasets:\n";
    PhaseAssignment predicted = predict_assignment(model, query);
    if (!validate_assignment(predicted, query.size()).ok()) {
        predicted = repair_assignment(predicted, query);
    }
    print_solution("nn    ", query, predicted);
    return 0;
}
