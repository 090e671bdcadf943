#ifndef SETATOM_CONE_HPP
#define SETATOM_CONE_HPP

#include "setatom/baseline.hpp"
#include "setatom/gauss.hpp"
#include "setatom/radii.hpp"
#include "setatom/types.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

namespace setatom {

struct ConeParams {
  int s = 2;
  double delta0 = 0.01;
  RotationMode rotation_mode = RotationMode::symmetric;
  int max_separation_passes = 50;

  void validate() const {
    if (s < 1) throw std::invalid_argument("cone: s must be >= 1");
    if (!(delta0 > 0.0)) throw std::invalid_argument("cone: delta0 must be positive");
    if (max_separation_passes < 1) throw std::invalid_argument("cone: max_separation_passes must be >= 1");
  }
};

/// Best achievable correlation of a residual with the spherical cap
/// {a : ||a - d|| <= rho, ||a|| = 1}.
template <typename Scalar>
struct CapQuery {
  Scalar psi = Scalar(0);  // angle between d and r
  Scalar phi = Scalar(0);  // cap half-angle
  Scalar best_corr = Scalar(0);
  Vector<Scalar> best_atom;
};

/// Half-angle subtended by chord `rho` on the unit sphere.
template <typename Scalar>
Scalar cap_half_angle(Scalar rho) {
  return Scalar(2) * std::asin(std::min(Scalar(1), rho / Scalar(2)));
}

namespace detail {

// Unit vector orthogonal to unit vector d, built from the first coordinate
// axis that is not nearly parallel to it.
template <typename Scalar>
Vector<Scalar> any_orthogonal(const Vector<Scalar>& d) {
  const Index m = d.size();
  if (m < 2) throw std::invalid_argument("no orthogonal direction exists in one dimension");
  Index axis = 0;
  for (Index i = 1; i < m; ++i)
    if (std::abs(d[i]) < std::abs(d[axis])) axis = i;
  Vector<Scalar> u = -d[axis] * d;
  u[axis] += Scalar(1);
  return u / u.norm();
}

}  // namespace detail

/// Maximizes |a^T r| over the cap around d. Inside the cap the optimum is
/// +-r/||r|| itself; otherwise it is d rotated by the cap half-angle towards
/// +-r in the plane of d and r. Both signs are tried and the larger kept.
template <typename DerivedD, typename DerivedR>
CapQuery<typename DerivedR::Scalar> cap_max_correlation(const Eigen::MatrixBase<DerivedD>& d,
                                                        typename DerivedR::Scalar rho,
                                                        const Eigen::MatrixBase<DerivedR>& r) {
  using Scalar = typename DerivedR::Scalar;
  if (!(rho >= Scalar(0)) || !(rho < Scalar(2)))
    throw std::invalid_argument("cap_max_correlation: need 0 <= rho < 2");
  const Scalar rnorm = r.norm();
  if (rnorm == Scalar(0)) throw std::invalid_argument("cap_max_correlation: zero residual");

  CapQuery<Scalar> q;
  const Vector<Scalar> dir = r / rnorm;
  const Scalar c = std::clamp(d.dot(dir), Scalar(-1), Scalar(1));
  Vector<Scalar> u = dir - c * Vector<Scalar>(d);
  const Scalar unorm = u.norm();
  q.psi = std::atan2(unorm, c);
  q.phi = cap_half_angle(rho);
  if (rho == Scalar(0)) {
    q.best_atom = d;
    q.best_corr = std::abs(d.dot(r));
    return q;
  }

  const Scalar pos_gap = q.psi - q.phi;                              // towards +r
  const Scalar neg_gap = (std::numbers::pi_v<Scalar> - q.psi) - q.phi;  // towards -r
  const bool positive = pos_gap <= neg_gap;
  const Scalar gap = positive ? pos_gap : neg_gap;
  q.best_corr = gap <= Scalar(0) ? rnorm : rnorm * std::cos(gap);
  if (gap <= Scalar(0)) {
    q.best_atom = positive ? dir : Vector<Scalar>(-dir);
    return q;
  }
  if (unorm < static_cast<Scalar>(1e-14)) {
    u = detail::any_orthogonal<Scalar>(Vector<Scalar>(d));
  } else {
    u /= unorm;
  }
  if (!positive) u = -u;
  q.best_atom = std::cos(q.phi) * d + std::sin(q.phi) * u;
  q.best_atom.normalize();
  return q;
}

/// Cone-OMP: greedy pursuit where each step picks the cone with the best
/// achievable correlation and freezes the maximizing actual atom.
template <typename Derived>
SparseCode<typename Derived::Scalar> cone_omp(const Eigen::MatrixBase<Derived>& y,
                                              const Dictionary<typename Derived::Scalar>& dict,
                                              const ConeParams& params) {
  using Scalar = typename Derived::Scalar;
  const Index n = dict.size();
  if (y.size() != dict.dim()) throw std::invalid_argument("cone_omp: signal length != atom length");
  if (params.s < 1 || params.s > std::min(dict.dim(), n))
    throw std::invalid_argument("cone_omp: need 1 <= s <= min(m, n)");
  const Vector<Scalar> signal = y;
  return detail::greedy_pursuit<Scalar>(
      signal, n, params.s, [&](const Vector<Scalar>& r, const std::vector<bool>& taken) {
        detail::Selection<Scalar> best;
        Scalar best_corr = Scalar(-1);
        for (Index j = 0; j < n; ++j) {
          if (taken[static_cast<std::size_t>(j)]) continue;
          auto q = cap_max_correlation(dict.atoms.col(j), dict.radii[j], r);
          if (q.best_corr > best_corr) {
            best_corr = q.best_corr;
            best.atom = j;
            best.actual = std::move(q.best_atom);
          }
        }
        return best;
      });
}

template <typename Scalar>
struct Overlap {
  bool overlaps = false;
  Scalar delta_min = Scalar(0);
};

/// Minimum admissible distance between two cone centres and whether the
/// pair is closer than it.
template <typename Derived1, typename Derived2>
Overlap<typename Derived1::Scalar> cone_overlap(const Eigen::MatrixBase<Derived1>& d1,
                                                const Eigen::MatrixBase<Derived2>& d2,
                                                typename Derived1::Scalar rho1,
                                                typename Derived1::Scalar rho2,
                                                typename Derived1::Scalar delta0) {
  using Scalar = typename Derived1::Scalar;
  Overlap<Scalar> o;
  o.delta_min = rho1 * std::sqrt(Scalar(1) - rho2 * rho2 / Scalar(4)) +
                rho2 * std::sqrt(Scalar(1) - rho1 * rho1 / Scalar(4)) + delta0;
  o.overlaps = (d1 - d2).norm() < o.delta_min;
  return o;
}

/// Rotation angle (per atom, symmetric case) that brings two unit vectors at
/// chord distance `delta` to chord distance `delta_min`.
template <typename Scalar>
Scalar separation_angle(Scalar delta, Scalar delta_min) {
  const Scalar s = delta_min / Scalar(2) * std::sqrt(Scalar(1) - delta * delta / Scalar(4)) -
                   delta / Scalar(2) * std::sqrt(Scalar(1) - delta_min * delta_min / Scalar(4));
  return std::asin(std::clamp(s, Scalar(-1), Scalar(1)));
}

/// Rotates d1 and d2 apart in their common plane until their distance is
/// `delta_min`. In radius_weighted mode the total rotation is split in
/// inverse proportion to the radii. Collinear inputs use a plane through d1
/// and a random direction orthogonal to it drawn from `rng`.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> separate_pair(const Vector<Scalar>& d1, const Vector<Scalar>& d2,
                                                        Scalar delta_min, RotationMode mode, Scalar rho1,
                                                        Scalar rho2, std::mt19937_64& rng) {
  if (!(delta_min < Scalar(2))) throw std::invalid_argument("separate_pair: delta_min must be < 2");
  const Scalar delta = (d1 - d2).norm();
  if (!(delta < delta_min)) return {d1, d2};

  const Scalar theta = separation_angle(delta, delta_min);
  Scalar theta1 = theta;
  Scalar theta2 = theta;
  if (mode == RotationMode::radius_weighted) {
    const auto floor = static_cast<Scalar>(kRadiusFloor);
    const Scalar w1 = Scalar(1) / std::max(rho1, floor);
    const Scalar w2 = Scalar(1) / std::max(rho2, floor);
    theta1 = Scalar(2) * theta * w1 / (w1 + w2);
    theta2 = Scalar(2) * theta - theta1;
  }

  // Bisector frame: d1 = cos(h) c + sin(h) w, d2 = cos(h) c - sin(h) w.
  Vector<Scalar> c;
  Vector<Scalar> w;
  Scalar half = std::asin(std::min(Scalar(1), delta / Scalar(2)));
  if (delta < static_cast<Scalar>(1e-12)) {
    const Index m = d1.size();
    if (m < 2) throw std::invalid_argument("separate_pair: cannot rotate in one dimension");
    c = d1;
    std::normal_distribution<double> normal(0.0, 1.0);
    do {
      w.resize(m);
      for (Index i = 0; i < m; ++i) w[i] = static_cast<Scalar>(normal(rng));
      w -= w.dot(c) * c;
    } while (w.norm() < static_cast<Scalar>(1e-6));
    w.normalize();
    half = Scalar(0);
  } else {
    c = (d1 + d2).normalized();
    w = d1 - d2;
    w -= w.dot(c) * c;
    w.normalize();
  }
  Vector<Scalar> out1 = std::cos(half + theta1) * c + std::sin(half + theta1) * w;
  Vector<Scalar> out2 = std::cos(half + theta2) * c - std::sin(half + theta2) * w;
  return {out1.normalized(), out2.normalized()};
}

template <typename Scalar>
struct DecorrelateResult {
  Dictionary<Scalar> dict;
  bool converged = true;
  int passes = 0;
  int separations = 0;
};

/// Separates overlapping cone pairs, scanning pairs in ascending (i, j)
/// order, until a full pass finds no overlap or the pass budget runs out.
template <typename Scalar>
DecorrelateResult<Scalar> decorrelate(Dictionary<Scalar> dict, const ConeParams& params,
                                      std::uint64_t seed = 0) {
  params.validate();
  std::mt19937_64 rng(seed);
  DecorrelateResult<Scalar> out;
  const Index n = dict.size();
  const auto delta0 = static_cast<Scalar>(params.delta0);
  out.converged = false;
  for (int pass = 0; pass < params.max_separation_passes; ++pass) {
    bool clean = true;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const auto ov = cone_overlap(dict.atoms.col(i), dict.atoms.col(j), dict.radii[i], dict.radii[j], delta0);
        if (!ov.overlaps) continue;
        clean = false;
        if (!(ov.delta_min < Scalar(2))) continue;  // cannot be separated on the sphere
        auto [a, b] = separate_pair<Scalar>(dict.atoms.col(i), dict.atoms.col(j), ov.delta_min,
                                            params.rotation_mode, dict.radii[i], dict.radii[j], rng);
        dict.atoms.col(i) = a;
        dict.atoms.col(j) = b;
        ++out.separations;
      }
    }
    ++out.passes;
    if (clean) {
      out.converged = true;
      break;
    }
  }
  out.dict = std::move(dict);
  return out;
}

/// Cone-DL: Cone-OMP coding with averaging of the actual atoms, radii fixed.
/// Actual atoms always lie in the cap around their centre, with the
/// coefficient sign already folded into the rotation, so their plain sum is
/// the sign-corrected average.
template <typename Derived>
Dictionary<typename Derived::Scalar> cone_dl(const Eigen::MatrixBase<Derived>& signals,
                                             Dictionary<typename Derived::Scalar> dict0,
                                             const ConeParams& params, int n_it,
                                             TrainStats* stats = nullptr) {
  using Scalar = typename Derived::Scalar;
  params.validate();
  if (n_it < 0) throw std::invalid_argument("cone_dl: n_it must be >= 0");
  return detail::train_loop(
      signals, std::move(dict0), n_it,
      [&](const Vector<Scalar>& y, const Dictionary<Scalar>& d) { return cone_omp(y, d, params); },
      [](int, const std::vector<SparseCode<Scalar>>&, Dictionary<Scalar>&) {}, stats);
}

/// DLC-adapt: the adaptive radii schedule with cone atoms, followed by cone
/// separation after every radii reassignment.
template <typename Derived, typename DerivedR>
Dictionary<typename Derived::Scalar> dlc_adapt(const Eigen::MatrixBase<Derived>& signals,
                                               Dictionary<typename Derived::Scalar> dict0,
                                               const Eigen::MatrixBase<DerivedR>& rho_bar,
                                               const ConeParams& params, int n_it, int nu,
                                               UseNorm use_norm, std::uint64_t seed = 0,
                                               TrainStats* stats = nullptr) {
  using Scalar = typename Derived::Scalar;
  params.validate();
  if (rho_bar.size() != dict0.size()) throw std::invalid_argument("dlc_adapt: radii length != n");
  if (!(rho_bar.maxCoeff() < Scalar(2))) throw std::invalid_argument("dlc_adapt: cone radii must be < 2");
  const auto sched = make_schedule(rho_bar, n_it, nu);
  dict0.radii = schedule_at(sched, 0);
  std::iota(dict0.perm.begin(), dict0.perm.end(), Index{0});
  return detail::train_loop(
      signals, std::move(dict0), n_it,
      [&](const Vector<Scalar>& y, const Dictionary<Scalar>& d) { return cone_omp(y, d, params); },
      [&](int k, const std::vector<SparseCode<Scalar>>& codes, Dictionary<Scalar>& d) {
        if (k % nu != 0) return;
        auto assignment = assign_radii(atom_use(codes, d.size(), use_norm), schedule_at(sched, k));
        d.perm = std::move(assignment.perm);
        d.radii = std::move(assignment.radii);
        auto sep = decorrelate(std::move(d), params, detail::mix_seed(seed, static_cast<std::uint64_t>(k)));
        d = std::move(sep.dict);
        if (stats) {
          ++stats->decorrelation_runs;
          if (!sep.converged) ++stats->decorrelation_failures;
        }
      },
      stats);
}

}  // namespace setatom

#endif  // SETATOM_CONE_HPP
