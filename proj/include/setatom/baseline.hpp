#ifndef SETATOM_BASELINE_HPP
#define SETATOM_BASELINE_HPP

#include "setatom/detail/parallel.hpp"
#include "setatom/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace setatom {

enum class InitMethod { data_columns, random_gaussian };

inline constexpr double kPursuitStopNorm = 1e-12;

/// n unit-norm atoms drawn from the columns of `signals` (distinct when
/// possible) or from an i.i.d. standard normal matrix. Radii are zero and
/// perm is the identity.
template <typename Derived>
Dictionary<typename Derived::Scalar> init_dictionary(const Eigen::MatrixBase<Derived>& signals,
                                                     Index n, InitMethod method,
                                                     std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  if (n < 1) throw std::invalid_argument("init_dictionary: n must be >= 1");
  const Index m = signals.rows();
  const Index N = signals.cols();
  if (m < 1) throw std::invalid_argument("init_dictionary: empty signal dimension");
  std::mt19937_64 rng(seed);
  Matrix<Scalar> atoms(m, n);

  if (method == InitMethod::random_gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index j = 0; j < n; ++j) {
      for (int attempt = 0;; ++attempt) {
        for (Index i = 0; i < m; ++i) atoms(i, j) = static_cast<Scalar>(normal(rng));
        const Scalar nrm = atoms.col(j).norm();
        if (nrm > Scalar(0)) {
          atoms.col(j) /= nrm;
          break;
        }
        if (attempt >= 100) throw std::runtime_error("init_dictionary: zero-norm random atom");
      }
    }
    return Dictionary<Scalar>(std::move(atoms));
  }

  if (N < 1) throw std::invalid_argument("init_dictionary: no training signals");
  std::vector<Index> picks(static_cast<std::size_t>(N));
  std::iota(picks.begin(), picks.end(), Index{0});
  std::shuffle(picks.begin(), picks.end(), rng);
  std::uniform_int_distribution<Index> any(0, N - 1);
  for (Index j = 0; j < n; ++j) {
    Index idx = j < N ? picks[static_cast<std::size_t>(j)] : any(rng);
    int attempts = 0;
    while (signals.col(idx).norm() == Scalar(0)) {
      if (++attempts > 100) throw std::runtime_error("init_dictionary: zero-norm sampled signal");
      idx = any(rng);
    }
    atoms.col(j) = signals.col(idx) / signals.col(idx).norm();
  }
  return Dictionary<Scalar>(std::move(atoms));
}

namespace detail {

// Coefficients of y on the columns of `frozen`, or nullopt if they are
// numerically dependent.
template <typename Scalar>
std::optional<Vector<Scalar>> least_squares(const Matrix<Scalar>& frozen, const Vector<Scalar>& y) {
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(frozen);
  qr.setThreshold(static_cast<Scalar>(1e-10));
  if (qr.rank() < frozen.cols()) return std::nullopt;
  return Vector<Scalar>(qr.solve(y));
}

template <typename Scalar>
struct Selection {
  Index atom = -1;
  Vector<Scalar> actual;
};

// Greedy pursuit skeleton shared by OMP and Cone-OMP. `select(r, taken)`
// returns the next atom and the vector to freeze for it; coefficients of all
// frozen vectors are refit by least squares after every selection.
template <typename Scalar, typename Selector>
SparseCode<Scalar> greedy_pursuit(const Vector<Scalar>& y, Index n, int s, Selector&& select) {
  const Index m = y.size();
  SparseCode<Scalar> code;
  code.coeffs.resize(0);
  code.actual_atoms.resize(m, 0);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Vector<Scalar> r = y;
  Matrix<Scalar> frozen(m, 0);
  for (int step = 0; step < s; ++step) {
    if (r.norm() < static_cast<Scalar>(kPursuitStopNorm)) break;
    Selection<Scalar> pick = select(r, taken);
    if (pick.atom < 0) break;
    const Index k = frozen.cols();
    frozen.conservativeResize(m, k + 1);
    frozen.col(k) = pick.actual;
    auto coeffs = least_squares(frozen, y);
    if (!coeffs) {
      frozen.conservativeResize(m, k);
      break;
    }
    taken[static_cast<std::size_t>(pick.atom)] = true;
    code.support.push_back(pick.atom);
    code.coeffs = std::move(*coeffs);
    r = y - frozen * code.coeffs;
  }
  code.actual_atoms = std::move(frozen);
  code.residual_norm = r.norm();
  return code;
}

// Encodes every column of `signals` independently; result order = column order.
template <typename Scalar, typename Derived, typename Coder>
std::vector<SparseCode<Scalar>> code_all(const Eigen::MatrixBase<Derived>& signals, Coder&& coder) {
  std::vector<SparseCode<Scalar>> codes(static_cast<std::size_t>(signals.cols()));
  parallel_for(signals.cols(), [&](std::int64_t l) {
    const Vector<Scalar> y = signals.col(l);
    codes[static_cast<std::size_t>(l)] = coder(y);
  });
  return codes;
}

// Overwrites atoms listed in `targets` with normalized training signals,
// worst represented first (largest `errors`, ties by lower index). Signals
// with zero norm are skipped; an atom is left as is if none remain.
template <typename Scalar, typename Derived>
void replace_with_worst(Matrix<Scalar>& atoms, const std::vector<Index>& targets,
                        const Eigen::MatrixBase<Derived>& signals, const std::vector<Scalar>& errors) {
  if (targets.empty()) return;
  std::vector<Index> order(errors.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return errors[static_cast<std::size_t>(a)] > errors[static_cast<std::size_t>(b)];
  });
  std::size_t cursor = 0;
  for (Index j : targets) {
    while (cursor < order.size() && signals.col(order[cursor]).norm() == Scalar(0)) ++cursor;
    if (cursor == order.size()) return;
    const Index l = order[cursor++];
    atoms.col(j) = signals.col(l) / signals.col(l).norm();
  }
}

}  // namespace detail

/// Orthogonal matching pursuit with at most `s` atoms.
template <typename Derived>
SparseCode<typename Derived::Scalar> omp(const Eigen::MatrixBase<Derived>& y,
                                         const Dictionary<typename Derived::Scalar>& dict, int s) {
  using Scalar = typename Derived::Scalar;
  const Index n = dict.size();
  if (y.size() != dict.dim()) throw std::invalid_argument("omp: signal length != atom length");
  if (s < 1 || s > std::min(dict.dim(), n)) throw std::invalid_argument("omp: need 1 <= s <= min(m, n)");
  const Vector<Scalar> signal = y;
  return detail::greedy_pursuit<Scalar>(
      signal, n, s, [&](const Vector<Scalar>& r, const std::vector<bool>& taken) {
        detail::Selection<Scalar> best;
        Scalar best_corr = Scalar(-1);
        for (Index j = 0; j < n; ++j) {
          if (taken[static_cast<std::size_t>(j)]) continue;
          const Scalar corr = std::abs(dict.atoms.col(j).dot(r));
          if (corr > best_corr) {
            best_corr = corr;
            best.atom = j;
          }
        }
        if (best.atom >= 0) best.actual = dict.atoms.col(best.atom);
        return best;
      });
}

/// Mean over columns of ||residual|| / m.
template <typename Scalar>
double mean_per_element_error(const std::vector<SparseCode<Scalar>>& codes, Index m) {
  if (codes.empty()) return 0.0;
  double total = 0.0;
  for (const auto& c : codes) total += static_cast<double>(c.residual_norm);
  return total / static_cast<double>(codes.size()) / static_cast<double>(m);
}

/// Approximate K-SVD starting from `dict0`. Each iteration codes all signals
/// with OMP, then refreshes each atom with one power-method step on its
/// restricted residual. Unused or degenerate atoms are replaced by the worst
/// represented signal. A signal keeps its previous code when OMP does not
/// improve on it, so the training error never increases.
///
/// `history`, if given, receives the root-mean-square train error
/// ||Y - DX||_F / sqrt(mN) after each iteration.
template <typename Derived>
Dictionary<typename Derived::Scalar> aksvd_train(const Eigen::MatrixBase<Derived>& signals,
                                                 Dictionary<typename Derived::Scalar> dict, int s,
                                                 int n_it, std::vector<double>* history = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (n_it < 1) throw std::invalid_argument("aksvd_train: n_it >= 1 required");
  if (s < 1) throw std::invalid_argument("aksvd_train: s >= 1 required");
  const Index m = signals.rows();
  const Index N = signals.cols();
  const Index n = dict.size();
  if (dict.dim() != m) throw std::invalid_argument("aksvd_train: dictionary/signal size mismatch");
  s = static_cast<int>(std::min<Index>(s, std::min(m, n)));

  const Matrix<Scalar> Y = signals;
  Matrix<Scalar> X = Matrix<Scalar>::Zero(n, N);
  Matrix<Scalar> R = Y;
  if (history) history->clear();

  for (int it = 0; it < n_it; ++it) {
    R = Y - dict.atoms * X;
    auto codes = detail::code_all<Scalar>(Y, [&](const Vector<Scalar>& y) { return omp(y, dict, s); });
    for (Index l = 0; l < N; ++l) {
      const auto& code = codes[static_cast<std::size_t>(l)];
      if (code.residual_norm <= R.col(l).norm()) {
        X.col(l).setZero();
        for (Index t = 0; t < code.nnz(); ++t) X(code.support[static_cast<std::size_t>(t)], l) = code.coeffs[t];
      }
    }
    R = Y - dict.atoms * X;

    std::vector<bool> replaced_signal(static_cast<std::size_t>(N), false);
    auto replace_atom = [&](Index j) {
      Index worst = -1;
      Scalar worst_err = Scalar(-1);
      for (Index l = 0; l < N; ++l) {
        if (replaced_signal[static_cast<std::size_t>(l)] || Y.col(l).norm() == Scalar(0)) continue;
        const Scalar e = R.col(l).norm();
        if (e > worst_err) {
          worst_err = e;
          worst = l;
        }
      }
      if (worst < 0) return;
      replaced_signal[static_cast<std::size_t>(worst)] = true;
      dict.atoms.col(j) = Y.col(worst) / Y.col(worst).norm();
    };

    for (Index j = 0; j < n; ++j) {
      std::vector<Index> users;
      for (Index l = 0; l < N; ++l)
        if (X(j, l) != Scalar(0)) users.push_back(l);
      if (users.empty()) {
        replace_atom(j);
        continue;
      }
      const auto k = static_cast<Index>(users.size());
      Matrix<Scalar> E(m, k);
      Vector<Scalar> x(k);
      for (Index t = 0; t < k; ++t) {
        const Index l = users[static_cast<std::size_t>(t)];
        x[t] = X(j, l);
        E.col(t) = R.col(l) + dict.atoms.col(j) * x[t];
      }
      const Vector<Scalar> g = E * x;
      const Scalar gnorm = g.norm();
      if (gnorm < static_cast<Scalar>(1e-12)) {
        for (Index t = 0; t < k; ++t) {
          const Index l = users[static_cast<std::size_t>(t)];
          X(j, l) = Scalar(0);
          R.col(l) = E.col(t);
        }
        replace_atom(j);
        continue;
      }
      dict.atoms.col(j) = g / gnorm;
      x.noalias() = E.transpose() * dict.atoms.col(j);
      for (Index t = 0; t < k; ++t) {
        const Index l = users[static_cast<std::size_t>(t)];
        X(j, l) = x[t];
        R.col(l) = E.col(t) - dict.atoms.col(j) * x[t];
      }
    }

    if (history) {
      R = Y - dict.atoms * X;
      const double mn = static_cast<double>(m) * static_cast<double>(N);
      history->push_back(N > 0 ? static_cast<double>(R.norm()) / std::sqrt(mn) : 0.0);
    }
  }
  dict.radii.setZero();
  std::iota(dict.perm.begin(), dict.perm.end(), Index{0});
  return dict;
}

/// AK-SVD from a data-column initialization drawn with `seed`.
template <typename Derived>
Dictionary<typename Derived::Scalar> aksvd_train(const Eigen::MatrixBase<Derived>& signals, Index n,
                                                 int s, int n_it, std::uint64_t seed,
                                                 std::vector<double>* history = nullptr) {
  if (n_it < 1) throw std::invalid_argument("aksvd_train: n_it >= 1 required");
  return aksvd_train(signals, init_dictionary(signals, n, InitMethod::data_columns, seed), s, n_it,
                     history);
}

}  // namespace setatom

#endif  // SETATOM_BASELINE_HPP
