#ifndef SETATOM_DATA_HPP
#define SETATOM_DATA_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace setatom {

/// Signals are stored one per column: m features x N samples.
struct Dataset {
  Eigen::MatrixXd signals;
  std::optional<std::vector<int>> labels;  // 1 = anomaly
  std::vector<std::string> feature_names;

  Eigen::Index dim() const { return signals.rows(); }
  Eigen::Index size() const { return signals.cols(); }
  bool has_labels() const { return labels.has_value(); }

  /// Columns `idx` as a new dataset (labels and names carried along).
  Dataset subset(const std::vector<Eigen::Index>& idx) const;
  /// Throws std::invalid_argument on non-finite entries or malformed labels.
  void validate() const;
};

struct StandardizeStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

inline constexpr double kStddevFloor = 1e-8;

/// Reads a headered CSV with one sample per row. When `label_column` names a
/// column it becomes the 0/1 label vector and is dropped from the features.
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column = std::nullopt);

/// Dataset written back in the same row-per-sample layout.
void save_csv(const Dataset& d, const std::string& path, const std::string& label_column = "label");

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Eigen::Index> train_index;
  std::vector<Eigen::Index> test_index;
};

/// Uniform random split; the train side gets floor(train_fraction * N) samples.
Split split_train_test(const Dataset& d, double train_fraction, std::uint64_t seed);

StandardizeStats fit_standardize(const Dataset& train);
Dataset apply_standardize(const Dataset& d, const StandardizeStats& stats);

struct Standardized {
  Dataset train;
  Dataset test;
  StandardizeStats stats;
};

/// Per-feature z-score with train statistics (population stddev, floored).
Standardized standardize(const Dataset& train, const Dataset& test);

/// Normal samples follow a low-rank linear model with small noise; anomalies
/// come from the same model but every feature is permuted independently
/// across them, keeping marginals and breaking cross-feature dependency.
/// Samples are ordered normals first, then anomalies.
Dataset synth_dependency(int m, int n_normal, int n_anomaly, std::uint64_t seed);

/// Mean absolute off-diagonal Pearson correlation between features.
double mean_abs_correlation(const Eigen::MatrixXd& signals);

}  // namespace setatom

#endif  // SETATOM_DATA_HPP
