#pragma once

#include "dsaeem/pipeline.hpp"

#include <functional>
#include <string>

#include "json.hpp"

namespace dsaeem {

enum class CvMode { kfold, holdout };

struct ExperimentConfig {
    std::string name;
    std::string dataset_path; // resolved against the config file's directory
    std::string schema_path;
    CvMode cv_mode = CvMode::kfold;
    int folds = 5;
    double holdout_ratio = 0.2;
    std::uint64_t fold_seed = 1; // seeds the fold plan
    PipelineConfig pipeline;     // pipeline.seed seeds every fitted stage
    int threads = 1;             // concurrent folds or grid points
    std::string output_dir;
};

/// Strict parse: unknown keys and out-of-range values raise ConfigError whose
/// message starts with the dotted field path. Relative paths are resolved
/// against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir);
ExperimentConfig load_config(const std::string& path);

/// Every setting, defaults included, with the automatic policies spelled out.
nlohmann::json config_echo(const ExperimentConfig& cfg);

struct Experiment {
    ExperimentConfig cfg;
    Schema schema;
    Dataset data;
    FoldPlan plan;
};

/// Loads the data and builds the fold plan.
Experiment prepare(const ExperimentConfig& cfg);

struct PipelineRun {
    PipelineKind kind = PipelineKind::full;
    CvResult cv;
};

nlohmann::json report_json(const Experiment& ex, const std::vector<PipelineRun>& runs);
/// Aligned plain-text table: per-fold rows, mean, std and best fold for each
/// run, followed by the published reference figures for the CV mode.
std::string metrics_table(const Experiment& ex, const std::vector<PipelineRun>& runs);

using LogSink = std::function<void(const std::string&)>;

/// Full pipeline under the config; writes report.json, metrics.txt,
/// config_echo.json, fold_plan.json, models/fold_<k>.json and run.log.
PipelineRun run_experiment(const ExperimentConfig& cfg, const LogSink& log = {});

/// Runs the full pipeline and each named baseline on the same fold plan and
/// writes one merged comparison (comparison.txt, comparison.json).
std::vector<PipelineRun> run_baselines(const ExperimentConfig& cfg,
                                       const std::vector<PipelineKind>& baselines,
                                       const LogSink& log = {});

/// A sweep axis: "rho=0.02,0.04" or a grid "lambda=1e-5,1e-4;beta=1,2".
struct SweepAxis {
    std::string name;
    std::vector<double> values;
};
std::vector<SweepAxis> parse_sweep_spec(const std::string& spec);

/// Applies one named parameter (rho, lambda, beta, gamma, c) to a config.
void set_sweep_parameter(PipelineConfig& cfg, const std::string& name, double value);

struct SweepPoint {
    std::vector<double> values;
    MetricsReport report;
};

/// Runs the full pipeline for every grid point on a shared fold plan and
/// writes sweep_<axes>.csv into the output directory.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, const std::vector<SweepAxis>& axes,
                                  const LogSink& log = {});

std::string sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepPoint>& points);

} // namespace dsaeem
