#ifndef SETATOM_EXPERIMENT_HPP
#define SETATOM_EXPERIMENT_HPP

#include "setatom/cone.hpp"
#include "setatom/data.hpp"
#include "setatom/gauss.hpp"
#include "setatom/metrics.hpp"
#include "setatom/radii.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace setatom {

enum class Algorithm {
  aksvd_omp,
  gauss_l1,
  dl_gauss_l1,
  dlg_l1_adapt_0,
  dlg_l1_adapt_1,
  cone_dl,
  cone_dl_d,
  dlc_adapt_0,
  dlc_adapt_1,
  dlc_d_adapt_0,
  dlc_d_adapt_1,
};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);
bool is_gaussian(Algorithm a);
bool is_cone(Algorithm a);
bool is_adaptive(Algorithm a);
/// Non-adaptive counterpart of an adaptive algorithm (identity otherwise).
Algorithm non_adaptive_counterpart(Algorithm a);

struct ExperimentConfig {
  std::string dataset = "synthetic(8,542,28)";  // CSV path or synthetic(m,n_normal,n_anomaly)
  std::string dataset_name;                     // competitor lookup key; defaults to `dataset`
  std::string label_column = "label";
  Algorithm algorithm = Algorithm::dlg_l1_adapt_1;
  double overcompleteness = 2.0;
  double rho_min = 0.04;
  double rho_max = 0.12;
  RadiiDistribution distribution = RadiiDistribution::linear;
  int s = 2;
  double lambda = 1.0;
  double gamma = 1.0;
  int n_it = 100;
  int nu = 10;
  double delta0 = 0.01;
  RotationMode rotation_mode = RotationMode::symmetric;
  int runs = 5;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
  int aksvd_iters = 50;
  int inner_iters = 10;
  double tol = 1e-6;
  int support_cap = 8;
  int max_separation_passes = 50;
  std::string competitors;  // optional (dataset, method, auc) CSV

  /// Throws std::invalid_argument for inconsistent settings.
  void validate() const;
  std::string name_for_lookup() const { return dataset_name.empty() ? dataset : dataset_name; }
};

nlohmann::json config_to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// Applies one "key=value" override; value is read as JSON when it parses.
void apply_override(ExperimentConfig& c, const std::string& assignment);

struct SyntheticSpec {
  int m = 8;
  int n_normal = 542;
  int n_anomaly = 28;
};
std::optional<SyntheticSpec> parse_synthetic(const std::string& dataset);

/// Loads the configured dataset; synthetic data is generated from `seed`.
Dataset load_dataset(const ExperimentConfig& c, std::uint64_t seed);

GaussParams gauss_params(const ExperimentConfig& c);
ConeParams cone_params(const ExperimentConfig& c);
Index atom_count(const ExperimentConfig& c, Index m);

struct TrainedModel {
  Dictionary<double> dict;
  ScoringParams scoring;
  int non_convergence_flags = 0;
  std::vector<double> train_error;
};

/// Builds the initial dictionary the algorithm calls for and trains it on
/// `train_signals` (labels never reach this function).
TrainedModel train_model(const ExperimentConfig& c, const Eigen::MatrixXd& train_signals, std::uint64_t seed);

struct RunRecord {
  std::uint64_t seed = 0;
  double roc_auc = 0.0;
  double mean_per_element_error = 0.0;
  double wall_time_seconds = 0.0;
  int non_convergence_flags = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::optional<int> rank;  // against competitors, when supplied
};

nlohmann::json result_to_json(const ExperimentResult& r);

/// Runs `runs` independent repetitions with seeds seed+1 .. seed+runs: split,
/// standardize, train on the train side, score the test side.
ExperimentResult run_experiment(const ExperimentConfig& c);

/// Expands a grid document: an array of configs, or an object with optional
/// "base", "axes" (key -> list, cartesian product) and "configs" (overrides).
std::vector<ExperimentConfig> expand_grid(const nlohmann::json& grid);

struct SweepSummary {
  std::vector<ExperimentResult> results;
  std::string table_csv;
};

/// Grid table: one row per (algorithm, n/m),
/// one column per (distribution, radii interval); cells are mean AUCs
/// averaged over datasets.
std::string summary_table_csv(const std::vector<ExperimentResult>& results);

/// Rows pairing each adaptive result with its non-adaptive counterpart on
/// the same dataset and radii setup. Empty string when there are none.
std::string improvements_csv(const std::vector<ExperimentResult>& results);

/// Runs every config, writing result_NNN.json per config and summary.csv
/// (plus improvements.csv when adaptive/non-adaptive pairs exist).
SweepSummary run_sweep(const std::vector<ExperimentConfig>& grid, const std::string& out_dir);

}  // namespace setatom

#endif  // SETATOM_EXPERIMENT_HPP
