#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "transco/dataset.hpp"
#include "transco/simgen.hpp"

namespace transco {

enum class Method { IPOD, TransCO, PTL, OLS };

std::string to_string(Method m);
/// Accepts ipod, transco, ptl, ols (case-insensitive).
Method parse_method(const std::string& name);

struct ResultRecord {
    Method method = Method::IPOD;
    int trial = 0;
    std::string config_digest;
    double mse = 0.0;
    double log_mse = 0.0;
    std::optional<double> f1;
    std::optional<double> huber;
    std::optional<double> r2;
    long runtime_ms = 0;
    std::uint64_t seed = 0;
};

enum class ResultFormat { CSV, JSON };

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Loads numeric columns, dropping rows with an empty or non-numeric cell.
/// With `standardize`, every column (response included) is centred and scaled to unit sample standard deviation.
Dataset load_dataset_csv(const std::filesystem::path& path, const std::string& response_column,
                         bool standardize = false);

/// Flat `key = value` file; `#` starts a comment. Unknown or repeated keys are errors.
SimulationConfig parse_experiment_config(const std::string& text);
SimulationConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering; parsing it yields the same configuration.
std::string canonical_config(const SimulationConfig& config);
/// 16 hex digits identifying the canonical rendering.
std::string config_digest(const SimulationConfig& config);

/// 17 significant digits; empty for non-finite values.
std::string format_number(double x);

/// Writes the records and a sibling `<stem>_summary.<ext>` with per-method means and sample standard deviations.
void write_results(const std::filesystem::path& path, const std::vector<ResultRecord>& records, ResultFormat format);
std::vector<ResultRecord> read_results(const std::filesystem::path& path, ResultFormat format);
std::filesystem::path summary_path(const std::filesystem::path& path);

struct MetricSummary {
    std::string name;
    long count = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample (n - 1) convention; NaN for fewer than two values
};

struct MethodSummary {
    Method method = Method::IPOD;
    long trials = 0;
    std::vector<MetricSummary> metrics;

    const MetricSummary* find(const std::string& name) const;
};

std::vector<MethodSummary> summarize(const std::vector<ResultRecord>& records);

/// Rows of (method, n, trial, log_mse) for box plots.
void write_plot_data(const std::filesystem::path& path, const std::vector<ResultRecord>& records, long n);

}  // namespace transco
