#ifndef SETATOM_METRICS_HPP
#define SETATOM_METRICS_HPP

#include "setatom/cone.hpp"
#include "setatom/data.hpp"
#include "setatom/gauss.hpp"
#include "setatom/types.hpp"

#include <variant>
#include <vector>

namespace setatom {

/// ||y - sum_j x_j a_j||_2 / m.
template <typename Derived>
typename Derived::Scalar per_element_error(const Eigen::MatrixBase<Derived>& y,
                                           const SparseCode<typename Derived::Scalar>& code) {
  using Scalar = typename Derived::Scalar;
  return residual(y, code).norm() / static_cast<Scalar>(y.size());
}

struct ScoredTestSet {
  std::vector<double> scores;  // higher = more anomalous
  std::vector<int> labels;
};

enum class ScoreMethod { omp, gauss, cone };

struct OmpScoring {
  int s = 2;
};

using ScoringParams = std::variant<OmpScoring, GaussParams, ConeParams>;

ScoreMethod method_of(const ScoringParams& params);

/// Per-element representation error of every test signal, in test order.
std::vector<double> score_signals(const Eigen::MatrixXd& signals, const Dictionary<double>& dict,
                                  const ScoringParams& params);

/// Scores a labelled test set; throws if the labels are missing.
ScoredTestSet score_test_set(const Dataset& test, const Dictionary<double>& dict, const ScoringParams& params);

/// Mann-Whitney ROC AUC with average ranks for ties.
double roc_auc(const ScoredTestSet& s);
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// 1 + number of competitors with a strictly larger AUC.
int rank_against(double our_auc, const std::vector<double>& competitor_aucs);

struct ImprovementRatio {
  double value = 0.0;
  bool degenerate = false;  // alpha0 == 1 and alpha1 < 1
};

/// (alpha1 - alpha0) / (1 - alpha0); when alpha0 == 1 the ratio is 1 if
/// alpha1 == 1 as well, otherwise 0 and flagged.
ImprovementRatio improvement_ratio(double alpha1, double alpha0);

}  // namespace setatom

#endif  // SETATOM_METRICS_HPP
