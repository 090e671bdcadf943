#include "setatom/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace setatom {

ScoreMethod method_of(const ScoringParams& params) {
  if (std::holds_alternative<OmpScoring>(params)) return ScoreMethod::omp;
  if (std::holds_alternative<GaussParams>(params)) return ScoreMethod::gauss;
  return ScoreMethod::cone;
}

std::vector<double> score_signals(const Eigen::MatrixXd& signals, const Dictionary<double>& dict,
                                  const ScoringParams& params) {
  if (signals.rows() != dict.dim()) throw std::invalid_argument("score: feature count != atom length");
  std::vector<double> scores(static_cast<std::size_t>(signals.cols()));
  detail::parallel_for(signals.cols(), [&](std::int64_t l) {
    const Eigen::VectorXd y = signals.col(l);
    SparseCode<double> code = std::visit(
        [&](const auto& p) -> SparseCode<double> {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, OmpScoring>) {
            return omp(y, dict, static_cast<int>(std::min<Index>(p.s, std::min(dict.dim(), dict.size()))));
          } else if constexpr (std::is_same_v<P, GaussParams>) {
            return gauss_l1(y, dict, p);
          } else {
            ConeParams q = p;
            q.s = static_cast<int>(std::min<Index>(q.s, std::min(dict.dim(), dict.size())));
            return cone_omp(y, dict, q);
          }
        },
        params);
    scores[static_cast<std::size_t>(l)] = per_element_error(y, code);
  });
  return scores;
}

ScoredTestSet score_test_set(const Dataset& test, const Dictionary<double>& dict, const ScoringParams& params) {
  if (!test.has_labels()) throw std::invalid_argument("score_test_set: test set has no labels");
  ScoredTestSet out;
  out.scores = score_signals(test.signals, dict, params);
  out.labels = *test.labels;
  return out;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const std::size_t T = scores.size();
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < T;) {
    std::size_t j = i;
    while (j < T && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      const int l = labels[order[t]];
      if (l != 0 && l != 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
      if (l == 1) {
        rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = T - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("roc_auc: need both classes");
  const auto P = static_cast<double>(positives);
  const auto Q = static_cast<double>(negatives);
  return (rank_sum / P - (P + 1.0) / 2.0) / Q;
}

double roc_auc(const ScoredTestSet& s) { return roc_auc(s.scores, s.labels); }

int rank_against(double our_auc, const std::vector<double>& competitor_aucs) {
  return 1 + static_cast<int>(std::count_if(competitor_aucs.begin(), competitor_aucs.end(),
                                            [&](double a) { return a > our_auc; }));
}

ImprovementRatio improvement_ratio(double alpha1, double alpha0) {
  if (alpha0 >= 1.0) {
    if (alpha1 >= 1.0) return {1.0, false};
    return {0.0, true};
  }
  return {(alpha1 - alpha0) / (1.0 - alpha0), false};
}

}  // namespace setatom
