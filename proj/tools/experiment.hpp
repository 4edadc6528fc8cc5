#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttts/data.hpp"
#include "ttts/solver.hpp"

namespace ttts::cli {

/// Invalid experiment configuration; `field` is a path such as "runs[0].sketch_size".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class DataKind { synthetic, function, file };

struct DataSpec {
    DataKind kind = DataKind::synthetic;
    Dims dims;
    Dims ranks;  ///< synthetic truth
    double noise_std = 0.0;
    FunctionKind function = FunctionKind::sinc;
    Index count = 0;
    std::filesystem::path path;
};

struct RunSpec {
    std::string label;
    SolverConfig solver;  ///< seed filled per repetition
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<std::uint64_t> seeds{0};
    DataSpec data;
    std::vector<RunSpec> runs;
    bool psnr = false;
    std::filesystem::path output_dir = ".";  ///< relative paths resolve against the config file's directory
    nlohmann::json source;  ///< the parsed document, echoed into summaries
};

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunSummary {
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    nlohmann::json summary;
};

Tensor make_data(const DataSpec& spec, std::uint64_t seed);

/// Runs every (seed, run) pair; writes one CSV and one summary JSON per pair into cfg.output_dir.
std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg);

/// Per-sweep CSV: sweep,rel_change,recon_rel_err,objective,wall_ms.
std::string sweep_csv(const SweepReport& report);

struct ComparisonRow {
    std::string label;
    std::string algorithm;
    Index sketch_size = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> final_error;
    std::optional<double> psnr;
    double mean_sweep_ms = 0.0;
};

ComparisonRow comparison_row(const nlohmann::json& summary);
std::string comparison_table(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace ttts::cli
