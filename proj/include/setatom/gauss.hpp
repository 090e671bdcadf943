#ifndef SETATOM_GAUSS_HPP
#define SETATOM_GAUSS_HPP

#include "setatom/baseline.hpp"
#include "setatom/radii.hpp"
#include "setatom/types.hpp"

#include <algorithm>
#include <vector>

namespace setatom {

struct GaussParams {
  double lambda = 1.0;
  double gamma = 1.0;
  int inner_iters = 10;
  double tol = 1e-6;
  int support_cap = 8;

  void validate() const {
    if (!(lambda > 0.0) || !(gamma > 0.0))
      throw std::invalid_argument("gauss: lambda and gamma must be positive");
    if (inner_iters < 1) throw std::invalid_argument("gauss: inner_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("gauss: tol must be positive");
    if (support_cap < 1) throw std::invalid_argument("gauss: support_cap must be >= 1");
  }
};

/// Per-iteration diagnostics from the set-atom trainers.
struct TrainStats {
  std::vector<double> train_error;  // mean per-element error of each iteration's codes
  int decorrelation_runs = 0;
  int decorrelation_failures = 0;
};

template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return Scalar(0);
}

/// Gaussian set-atom objective for one signal with dense coefficients `x`
/// and per-atom actual atoms `actual` (m x n). Atoms whose radius is below
/// the floor are pinned to their centre and contribute no likelihood term.
template <typename DerivedY, typename DerivedX, typename DerivedA>
typename DerivedY::Scalar gauss_objective(const Eigen::MatrixBase<DerivedY>& y,
                                          const Dictionary<typename DerivedY::Scalar>& dict,
                                          const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedA>& actual,
                                          const GaussParams& params) {
  using Scalar = typename DerivedY::Scalar;
  Scalar prior = Scalar(0);
  for (Index j = 0; j < dict.size(); ++j) {
    const Scalar rho = dict.radii[j];
    if (rho < static_cast<Scalar>(kRadiusFloor)) continue;
    prior += (actual.col(j) - dict.atoms.col(j)).squaredNorm() / (rho * rho);
  }
  const Scalar fit = (y - actual * x).squaredNorm();
  return prior + static_cast<Scalar>(params.lambda) * fit +
         static_cast<Scalar>(params.gamma) * x.template lpNorm<1>();
}

/// Gauss-L1 representation by block coordinate descent: a coefficient pass
/// (exact soft-threshold minimizer per coordinate) followed by an actual-atom
/// pass (exact minimizer over the unit sphere per atom), repeated until the
/// coefficients settle. At most `support_cap` largest coefficients are kept.
///
/// If `trace` is given it receives the objective after every block.
template <typename Derived>
SparseCode<typename Derived::Scalar> gauss_l1(const Eigen::MatrixBase<Derived>& y,
                                              const Dictionary<typename Derived::Scalar>& dict,
                                              const GaussParams& params,
                                              std::vector<typename Derived::Scalar>* trace = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (y.size() != dict.dim()) throw std::invalid_argument("gauss_l1: signal length != atom length");
  const Index m = dict.dim();
  const Index n = dict.size();
  const Vector<Scalar> signal = y;
  const auto lambda = static_cast<Scalar>(params.lambda);
  const auto threshold = static_cast<Scalar>(params.gamma / (2.0 * params.lambda));
  const auto floor = static_cast<Scalar>(kRadiusFloor);

  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  Matrix<Scalar> actual = dict.atoms;
  Vector<Scalar> r(m);
  if (trace) trace->clear();

  for (int pass = 0; pass < params.inner_iters; ++pass) {
    r = signal - actual * x;
    Scalar max_change = Scalar(0);
    for (Index j = 0; j < n; ++j) {
      const Scalar old = x[j];
      if (old != Scalar(0)) r += actual.col(j) * old;
      const Scalar fresh = soft_threshold(actual.col(j).dot(r), threshold);
      if (fresh != Scalar(0)) r -= actual.col(j) * fresh;
      x[j] = fresh;
      max_change = std::max(max_change, std::abs(fresh - old));
    }
    if (trace) trace->push_back(gauss_objective(signal, dict, x, actual, params));

    for (Index j = 0; j < n; ++j) {
      const Scalar rho = dict.radii[j];
      if (x[j] == Scalar(0) || rho < floor) {
        actual.col(j) = dict.atoms.col(j);
        continue;
      }
      r += actual.col(j) * x[j];
      Vector<Scalar> pull = dict.atoms.col(j) / (rho * rho) + (lambda * x[j]) * r;
      const Scalar nrm = pull.norm();
      if (nrm > Scalar(0)) actual.col(j) = pull / nrm;
      r -= actual.col(j) * x[j];
    }
    if (trace) trace->push_back(gauss_objective(signal, dict, x, actual, params));
    if (max_change < static_cast<Scalar>(params.tol)) break;
  }

  std::vector<Index> support;
  for (Index j = 0; j < n; ++j)
    if (x[j] != Scalar(0)) support.push_back(j);
  if (static_cast<int>(support.size()) > params.support_cap) {
    std::stable_sort(support.begin(), support.end(),
                     [&](Index a, Index b) { return std::abs(x[a]) > std::abs(x[b]); });
    support.resize(static_cast<std::size_t>(params.support_cap));
    std::sort(support.begin(), support.end());
  }

  SparseCode<Scalar> code;
  code.support = support;
  const auto k = static_cast<Index>(support.size());
  code.coeffs.resize(k);
  code.actual_atoms.resize(m, k);
  for (Index t = 0; t < k; ++t) {
    const Index j = support[static_cast<std::size_t>(t)];
    code.coeffs[t] = x[j];
    code.actual_atoms.col(t) = actual.col(j);
  }
  code.residual_norm = residual(signal, code).norm();
  return code;
}

namespace detail {

template <typename Scalar>
std::vector<Scalar> residual_norms(const std::vector<SparseCode<Scalar>>& codes) {
  std::vector<Scalar> e;
  e.reserve(codes.size());
  for (const auto& c : codes) e.push_back(c.residual_norm);
  return e;
}

}  // namespace detail

/// Each used central atom becomes the normalized sum of its actual atoms.
/// Atoms nobody used, or whose sum vanishes, are replaced by the worst
/// represented training signals. Radii and perm are untouched.
template <typename Derived>
Dictionary<typename Derived::Scalar> update_central_atoms(
    const std::vector<SparseCode<typename Derived::Scalar>>& codes,
    Dictionary<typename Derived::Scalar> dict, const Eigen::MatrixBase<Derived>& signals) {
  using Scalar = typename Derived::Scalar;
  const Index m = dict.dim();
  const Index n = dict.size();
  Matrix<Scalar> sums = Matrix<Scalar>::Zero(m, n);
  std::vector<int> users(static_cast<std::size_t>(n), 0);
  for (const auto& code : codes) {
    for (Index t = 0; t < code.nnz(); ++t) {
      if (code.coeffs[t] == Scalar(0)) continue;
      const Index j = code.support[static_cast<std::size_t>(t)];
      sums.col(j) += code.actual_atoms.col(t);
      ++users[static_cast<std::size_t>(j)];
    }
  }
  std::vector<Index> dead;
  for (Index j = 0; j < n; ++j) {
    const Scalar nrm = sums.col(j).norm();
    if (users[static_cast<std::size_t>(j)] == 0 || nrm < static_cast<Scalar>(1e-10)) {
      dead.push_back(j);
      continue;
    }
    dict.atoms.col(j) = sums.col(j) / nrm;
  }
  detail::replace_with_worst(dict.atoms, dead, signals, detail::residual_norms(codes));
  return dict;
}

namespace detail {

// The outer loop common to every set-atom trainer: code all signals, refresh
// the central atoms, then let `after_update(k, codes, dict)` adjust radii.
template <typename Derived, typename Coder, typename AfterUpdate>
Dictionary<typename Derived::Scalar> train_loop(const Eigen::MatrixBase<Derived>& signals,
                                                Dictionary<typename Derived::Scalar> dict, int n_it,
                                                Coder&& coder, AfterUpdate&& after_update,
                                                TrainStats* stats) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> Y = signals;
  for (int k = 1; k <= n_it; ++k) {
    auto codes = code_all<Scalar>(Y, [&](const Vector<Scalar>& y) { return coder(y, dict); });
    if (stats) stats->train_error.push_back(mean_per_element_error(codes, dict.dim()));
    dict = update_central_atoms(codes, std::move(dict), Y);
    after_update(k, codes, dict);
  }
  return dict;
}

}  // namespace detail

/// DL-Gauss-L1: Gauss-L1 coding plus central-atom averaging with the radii
/// of `dict0` held fixed.
template <typename Derived>
Dictionary<typename Derived::Scalar> dl_gauss_l1(const Eigen::MatrixBase<Derived>& signals,
                                                 Dictionary<typename Derived::Scalar> dict0,
                                                 const GaussParams& params, int n_it,
                                                 TrainStats* stats = nullptr) {
  using Scalar = typename Derived::Scalar;
  params.validate();
  if (n_it < 0) throw std::invalid_argument("dl_gauss_l1: n_it must be >= 0");
  return detail::train_loop(
      signals, std::move(dict0), n_it,
      [&](const Vector<Scalar>& y, const Dictionary<Scalar>& d) { return gauss_l1(y, d, params); },
      [](int, const std::vector<SparseCode<Scalar>>&, Dictionary<Scalar>&) {}, stats);
}

/// DL-G-L1-adapt. Radii start at the mean of `rho_bar` and, every `nu`
/// iterations, the scheduled radii are handed out by decreasing atom use.
template <typename Derived, typename DerivedR>
Dictionary<typename Derived::Scalar> dl_g_l1_adapt(const Eigen::MatrixBase<Derived>& signals,
                                                   Dictionary<typename Derived::Scalar> dict0,
                                                   const Eigen::MatrixBase<DerivedR>& rho_bar,
                                                   const GaussParams& params, int n_it, int nu,
                                                   UseNorm use_norm, TrainStats* stats = nullptr) {
  using Scalar = typename Derived::Scalar;
  params.validate();
  if (rho_bar.size() != dict0.size()) throw std::invalid_argument("dl_g_l1_adapt: radii length != n");
  const auto sched = make_schedule(rho_bar, n_it, nu);
  dict0.radii = schedule_at(sched, 0);
  std::iota(dict0.perm.begin(), dict0.perm.end(), Index{0});
  return detail::train_loop(
      signals, std::move(dict0), n_it,
      [&](const Vector<Scalar>& y, const Dictionary<Scalar>& d) { return gauss_l1(y, d, params); },
      [&](int k, const std::vector<SparseCode<Scalar>>& codes, Dictionary<Scalar>& d) {
        if (k % nu != 0) return;
        auto assignment = assign_radii(atom_use(codes, d.size(), use_norm), schedule_at(sched, k));
        d.perm = std::move(assignment.perm);
        d.radii = std::move(assignment.radii);
      },
      stats);
}

}  // namespace setatom

#endif  // SETATOM_GAUSS_HPP
