#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phasebal/core.hpp"
#include "phasebal/grnn.hpp"
#include "phasebal/harness.hpp"

// File formats (instance tables, branch tables, model persistence) and the
// structured report builders shared by the command-line tool and the tests.

namespace phasebal {

/// Parse failure; when the failure is tied to a line, `row()` is its
/// 1-based physical line number (blank lines and headers count).
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& message) : std::runtime_error(message), row_(0) {}

    ParseError(std::size_t row, const std::string& message)
        : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}

    std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

/// Locale-independent numeric text: integral values print without a decimal
/// point, everything else prints with the shortest digits that round-trip.
inline std::string format_number(double value) {
    std::array<char, 64> buffer{};
    if (std::isfinite(value) && value == std::floor(value) && std::abs(value) < 9.0e15) {
        const auto as_int = static_cast<std::int64_t>(value);
        const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), as_int);
        return std::string(buffer.data(), result.ptr);
    }
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Non-blank lines of `text` paired with their 1-based physical line numbers.
inline std::vector<std::pair<std::size_t, std::string_view>> numbered_rows(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> rows;
    std::size_t line_number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_number;
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!trim(line).empty()) {
            rows.emplace_back(line_number, line);
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return rows;
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

inline bool try_parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto result = std::from_chars(first, last, out);
    return result.ec == std::errc{} && result.ptr == last && std::isfinite(out);
}

inline double parse_cell(std::string_view cell, std::size_t row) {
    double value = 0.0;
    if (!try_parse_number(cell, value)) {
        throw ParseError(row, "invalid number '" + std::string(cell) + "'");
    }
    return value;
}

/// Header heuristic: a row where not a single cell parses as a number.
/// A data row with one bad cell still parses as data, so the bad cell gets
/// reported by row number instead of silently vanishing as a "header".
inline bool is_header_row(const std::vector<std::string_view>& cells) {
    double ignored = 0.0;
    for (std::string_view cell : cells) {
        if (try_parse_number(cell, ignored)) return false;
    }
    return true;
}

}  // namespace detail

/// Reads an instance table: one instance per row, comma-separated
/// nonnegative ampere values, optional header row, blank lines ignored.
/// All rows must share one column count divisible by 3.
inline std::vector<LoadSet> parse_instances(std::string_view text) {
    auto rows = detail::numbered_rows(text);
    if (!rows.empty() && detail::is_header_row(detail::split_cells(rows.front().second))) {
        rows.erase(rows.begin());  // header
    }
    if (rows.empty()) {
        throw ParseError("no instances");
    }

    std::vector<LoadSet> instances;
    instances.reserve(rows.size());
    std::size_t expected_columns = 0;
    for (const auto& [row_number, line] : rows) {
        const auto cells = detail::split_cells(line);
        if (expected_columns == 0) {
            if (cells.size() < 3 || cells.size() % 3 != 0) {
                throw ParseError(row_number, "column count must be a positive multiple of 3, found " +
                                                 std::to_string(cells.size()));
            }
            expected_columns = cells.size();
        } else if (cells.size() != expected_columns) {
            throw ParseError(row_number, "expected " + std::to_string(expected_columns) +
                                             " columns, found " + std::to_string(cells.size()));
        }
        std::vector<double> currents;
        currents.reserve(cells.size());
        for (std::string_view cell : cells) {
            const double value = detail::parse_cell(cell, row_number);
            if (value < 0.0) {
                throw ParseError(row_number, "negative current " + format_number(value));
            }
            currents.push_back(value);
        }
        instances.emplace_back(std::move(currents));
    }
    return instances;
}

/// Inverse of parse_instances (no header); parse(emit(x)) reproduces x exactly.
inline std::string emit_instances(const std::vector<LoadSet>& instances) {
    std::string out;
    for (const LoadSet& loads : instances) {
        for (std::size_t i = 0; i < loads.size(); ++i) {
            if (i > 0) out += ',';
            out += format_number(loads[i]);
        }
        out += '\n';
    }
    return out;
}

/// Reads a branch table with columns r_ohm, p_watt, q_var, v_mag
/// (optional header row). Zero or negative voltage magnitudes are rejected
/// with the offending row named.
inline std::vector<Branch> parse_branches(std::string_view text) {
    auto rows = detail::numbered_rows(text);
    if (!rows.empty() && detail::is_header_row(detail::split_cells(rows.front().second))) {
        rows.erase(rows.begin());  // header
    }
    if (rows.empty()) {
        throw ParseError("no branches");
    }

    std::vector<Branch> branches;
    branches.reserve(rows.size());
    for (const auto& [row_number, line] : rows) {
        const auto cells = detail::split_cells(line);
        if (cells.size() != 4) {
            throw ParseError(row_number, "expected 4 columns (r_ohm,p_watt,q_var,v_mag), found " +
                                             std::to_string(cells.size()));
        }
        Branch branch;
        branch.resistance = detail::parse_cell(cells[0], row_number);
        branch.active_power = detail::parse_cell(cells[1], row_number);
        branch.reactive_power = detail::parse_cell(cells[2], row_number);
        branch.voltage_magnitude = detail::parse_cell(cells[3], row_number);
        if (branch.resistance < 0.0) {
            throw ParseError(row_number, "negative resistance");
        }
        if (!(branch.voltage_magnitude > 0.0)) {
            throw ParseError(row_number, "v_mag must be positive");
        }
        branches.push_back(branch);
    }
    return branches;
}

// ---------------------------------------------------------------------------
// Model persistence: self-describing JSON with spread, inputs, and targets.

inline constexpr std::string_view kModelFormat = "phasebal-grnn";
inline constexpr int kModelVersion = 1;

inline std::string save_model(const GrnnModel& model) {
    nlohmann::json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    doc["spread"] = model.spread();
    doc["n_loads"] = model.input_length();
    doc["inputs"] = model.inputs();
    nlohmann::json targets = nlohmann::json::array();
    for (const std::vector<double>& t : model.targets()) {
        // Targets are exact phase labels; persist them as integers.
        std::vector<int> labels(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) labels[i] = static_cast<int>(t[i]);
        targets.push_back(std::move(labels));
    }
    doc["targets"] = std::move(targets);
    return doc.dump(2) + "\n";
}

inline GrnnModel load_model(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kModelFormat ||
            doc.at("version").get<int>() != kModelVersion) {
            throw ParseError("unsupported model format");
        }
        auto inputs = doc.at("inputs").get<std::vector<std::vector<double>>>();
        auto targets = doc.at("targets").get<std::vector<std::vector<double>>>();
        return GrnnModel(std::move(inputs), std::move(targets), doc.at("spread").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Report builders. Reports are JSON documents; per instance they carry the
// loads, each method's assignment with its balance figures, and (when a
// network method is present) the comparison category.

namespace detail {

inline nlohmann::json method_entry_json(const LoadSet& loads, const PhaseAssignment& assignment) {
    nlohmann::json entry;
    entry["assignment"] = assignment.labels;
    const bool valid = validate_assignment(assignment, loads.size()).ok();
    entry["valid"] = valid;
    if (!valid) {
        entry["raw_invalid"] = true;  // emitted despite failing validation
    }
    const BalanceReport report = balance_report(loads, assignment);
    entry["phase_sums"] = report.phase_sums;
    entry["pairwise_diffs"] = report.pairwise_diffs;
    entry["max_diff"] = report.max_diff;
    entry["total_abs_deviation"] = report.total_abs_deviation;
    return entry;
}

}  // namespace detail

/// Report for a single-method balancing run over an instance file.
inline nlohmann::json balance_report_json(const std::vector<LoadSet>& instances,
                                          std::string_view method,
                                          const std::vector<PhaseAssignment>& assignments) {
    if (instances.size() != assignments.size()) {
        throw std::invalid_argument("balance_report_json: instance/assignment count mismatch");
    }
    if (instances.empty()) {
        throw std::invalid_argument("balance_report_json: no instances");
    }
    nlohmann::json doc;
    doc["report"] = "balance";
    doc["method"] = std::string(method);
    nlohmann::json rows = nlohmann::json::array();
    double max_diff_sum = 0.0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        nlohmann::json row;
        row["index"] = i;
        row["loads"] = instances[i].currents();
        nlohmann::json entry = detail::method_entry_json(instances[i], assignments[i]);
        max_diff_sum += entry["max_diff"].get<double>();
        row["methods"][std::string(method)] = std::move(entry);
        rows.push_back(std::move(row));
    }
    doc["instances"] = std::move(rows);
    doc["summary"] = {
        {"instance_count", instances.size()},
        {"mean_max_diff", max_diff_sum / static_cast<double>(instances.size())},
    };
    return doc;
}

/// Report for a prediction run: network column next to the greedy baseline,
/// per-instance comparison category, and outcome totals in the summary.
inline nlohmann::json predict_report_json(const std::vector<LoadSet>& instances,
                                          const std::vector<PhaseAssignment>& greedy,
                                          const std::vector<PhaseAssignment>& nn,
                                          double spread, bool repair) {
    if (instances.size() != greedy.size() || instances.size() != nn.size()) {
        throw std::invalid_argument("predict_report_json: instance/assignment count mismatch");
    }
    if (instances.empty()) {
        throw std::invalid_argument("predict_report_json: no instances");
    }
    nlohmann::json doc;
    doc["report"] = "predict";
    doc["spread"] = spread;
    doc["repair"] = repair;
    nlohmann::json rows = nlohmann::json::array();
    OutcomeCounts counts;
    double greedy_sum = 0.0;
    double nn_sum = 0.0;
    std::size_t nn_valid_count = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const LoadSet& loads = instances[i];
        const BalanceReport greedy_report = balance_report(loads, greedy[i]);
        const BalanceReport nn_report = balance_report(loads, nn[i]);
        const bool nn_valid = validate_assignment(nn[i], loads.size()).ok();
        const Outcome category = classify_outcome(nn_report, greedy_report, nn_valid);

        nlohmann::json row;
        row["index"] = i;
        row["loads"] = loads.currents();
        row["methods"]["greedy"] = detail::method_entry_json(loads, greedy[i]);
        row["methods"]["nn"] = detail::method_entry_json(loads, nn[i]);
        row["category"] = to_string(category);
        rows.push_back(std::move(row));

        greedy_sum += greedy_report.max_diff;
        if (nn_valid) {
            nn_sum += nn_report.max_diff;
            ++nn_valid_count;
        }
        switch (category) {
            case Outcome::kBetter: ++counts.better; break;
            case Outcome::kSame: ++counts.same; break;
            case Outcome::kWorse: ++counts.worse; break;
            case Outcome::kFail: ++counts.fail; break;
        }
    }
    doc["instances"] = std::move(rows);
    nlohmann::json summary;
    summary["instance_count"] = instances.size();
    summary["counts"] = {
        {"better", counts.better},
        {"same", counts.same},
        {"worse", counts.worse},
        {"fail", counts.fail},
    };
    summary["mean_greedy_max_diff"] = greedy_sum / static_cast<double>(instances.size());
    summary["mean_nn_max_diff"] =
        nn_valid_count > 0 ? nlohmann::json(nn_sum / static_cast<double>(nn_valid_count))
                           : nlohmann::json(nullptr);
    doc["summary"] = std::move(summary);
    return doc;
}

/// Canonical experiment summary document; the golden-file test compares its
/// serialized bytes, so the layout must stay stable.
inline nlohmann::json experiment_summary_json(const ExperimentSummary& summary) {
    const ExperimentConfig& config = summary.config;
    nlohmann::json doc;
    doc["report"] = "experiment";
    doc["config"] = {
        {"n_loads", config.n_loads},
        {"train_count", config.train_count},
        {"test_count", config.test_count},
        {"current_min", config.current_min},
        {"current_max", config.current_max},
        {"seed", config.seed},
        {"spread", config.spread ? nlohmann::json(*config.spread) : nlohmann::json(nullptr)},
        {"labels", to_string(config.label_source)},
        {"repair", config.repair},
    };
    doc["spread_used"] = summary.spread_used;
    doc["counts"] = {
        {"better", summary.counts.better},
        {"same", summary.counts.same},
        {"worse", summary.counts.worse},
        {"fail", summary.counts.fail},
    };
    doc["percent"] = {
        {"better", summary.percent_better},
        {"same", summary.percent_same},
        {"worse", summary.percent_worse},
        {"fail", summary.percent_fail},
    };
    doc["mean_max_diff"] = {
        {"greedy", summary.mean_greedy_max_diff},
        {"nn", summary.mean_nn_max_diff ? nlohmann::json(*summary.mean_nn_max_diff)
                                        : nlohmann::json(nullptr)},
        {"exact", summary.mean_exact_max_diff ? nlohmann::json(*summary.mean_exact_max_diff)
                                              : nlohmann::json(nullptr)},
    };
    nlohmann::json records = nlohmann::json::array();
    for (const InstanceResult& r : summary.records) {
        records.push_back({
            {"index", r.index},
            {"category", to_string(r.category)},
            {"nn_valid", r.nn_valid},
            {"greedy_max_diff", r.greedy_max_diff},
            {"nn_max_diff", r.nn_max_diff ? nlohmann::json(*r.nn_max_diff) : nlohmann::json(nullptr)},
            {"exact_max_diff",
             r.exact_max_diff ? nlohmann::json(*r.exact_max_diff) : nlohmann::json(nullptr)},
        });
    }
    doc["records"] = std::move(records);
    return doc;
}

/// Plot-ready companion table: one row per test instance, `nan` where a
/// method has no figure (invalid prediction, oracle out of range).
inline std::string experiment_table_csv(const ExperimentSummary& summary) {
    std::string out = "index,category,greedy_max_diff,nn_max_diff,exact_max_diff\n";
    for (const InstanceResult& r : summary.records) {
        out += std::to_string(r.index);
        out += ',';
        out += to_string(r.category);
        out += ',';
        out += format_number(r.greedy_max_diff);
        out += ',';
        out += r.nn_max_diff ? format_number(*r.nn_max_diff) : "nan";
        out += ',';
        out += r.exact_max_diff ? format_number(*r.exact_max_diff) : "nan";
        out += '\n';
    }
    return out;
}

/// Fixed serialization used for every JSON artifact the tool writes.
inline std::string to_text(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Whole-file helpers.

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing file: " + path);
    }
}

}  // namespace phasebal
