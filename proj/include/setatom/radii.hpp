#ifndef SETATOM_RADII_HPP
#define SETATOM_RADII_HPP

#include "setatom/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace setatom {

enum class RadiiDistribution { linear, minmax_50_50, minmax_80_20 };

struct RadiiSpec {
  double rho_min = 0.04;
  double rho_max = 0.12;
  RadiiDistribution distribution = RadiiDistribution::linear;

  // Cone radii are chords on the unit sphere and must stay below 2.
  void validate(bool for_cones = false) const {
    if (!(rho_min > 0.0) || !(rho_min <= rho_max))
      throw std::invalid_argument("radii: need 0 < rho_min <= rho_max");
    if (for_cones && !(rho_max < 2.0))
      throw std::invalid_argument("radii: cone radius must be < 2");
  }
};

inline constexpr double kRadiusFloor = 1e-8;

/// The radii multiset for `n` atoms, in ascending order.
template <typename Scalar = double>
Vector<Scalar> make_radii(const RadiiSpec& spec, Index n) {
  if (n < 2) throw std::invalid_argument("make_radii: n must be >= 2");
  spec.validate();
  const auto lo = static_cast<Scalar>(spec.rho_min);
  const auto hi = static_cast<Scalar>(spec.rho_max);
  Vector<Scalar> radii(n);
  switch (spec.distribution) {
    case RadiiDistribution::linear:
      for (Index i = 0; i < n; ++i)
        radii[i] = lo + (hi - lo) * static_cast<Scalar>(i) / static_cast<Scalar>(n - 1);
      radii[n - 1] = hi;
      break;
    case RadiiDistribution::minmax_50_50: {
      const Index small = (n + 1) / 2;
      radii.head(small).setConstant(lo);
      radii.tail(n - small).setConstant(hi);
      break;
    }
    case RadiiDistribution::minmax_80_20: {
      const auto small = static_cast<Index>(std::lround(0.8 * static_cast<double>(n)));
      radii.head(small).setConstant(lo);
      radii.tail(n - small).setConstant(hi);
      break;
    }
  }
  return radii;
}

/// Iteration-indexed radii schedule. Radii start equal to their mean and move
/// linearly towards the target, reaching it after floor(n_it / nu) updates.
template <typename Scalar = double>
struct AdaptSchedule {
  Vector<Scalar> rho_bar;  // sorted descending
  Scalar mu = Scalar(0);
  Vector<Scalar> delta;
  int nu = 10;
  int n_it = 100;

  int steps() const { return nu > 0 ? n_it / nu : 0; }
};

template <typename Derived>
AdaptSchedule<typename Derived::Scalar> make_schedule(const Eigen::MatrixBase<Derived>& rho_bar,
                                                      int n_it, int nu) {
  using Scalar = typename Derived::Scalar;
  if (rho_bar.size() < 1) throw std::invalid_argument("make_schedule: empty radii");
  if (n_it < 1) throw std::invalid_argument("make_schedule: n_it must be >= 1");
  if (nu < 1) throw std::invalid_argument("make_schedule: nu must be >= 1");
  AdaptSchedule<Scalar> sched;
  sched.rho_bar = rho_bar;
  std::sort(sched.rho_bar.data(), sched.rho_bar.data() + sched.rho_bar.size(),
            std::greater<Scalar>());
  sched.mu = sched.rho_bar.mean();
  sched.nu = nu;
  sched.n_it = n_it;
  const int steps = sched.steps();
  // With nu > n_it no update ever happens and the radii stay at mu.
  if (steps > 0)
    sched.delta = (sched.rho_bar.array() - sched.mu) / static_cast<Scalar>(steps);
  else
    sched.delta = Vector<Scalar>::Zero(sched.rho_bar.size());
  return sched;
}

/// Radii in effect from iteration k, for k a multiple of nu with 0 <= k <= n_it.
template <typename Scalar>
Vector<Scalar> schedule_at(const AdaptSchedule<Scalar>& sched, int k) {
  if (k < 0 || k > sched.n_it) throw std::invalid_argument("schedule_at: k out of range");
  if (k % sched.nu != 0) throw std::invalid_argument("schedule_at: k is not a multiple of nu");
  const int step = k / sched.nu;
  Vector<Scalar> radii;
  if (step == sched.steps() && step > 0)
    radii = sched.rho_bar;  // endpoint, exact
  else
    radii = (sched.mu + static_cast<Scalar>(step) * sched.delta.array()).matrix();
  return radii.cwiseMax(static_cast<Scalar>(kRadiusFloor));
}

/// Per-atom use over a batch of codes: zero counts nonzero coefficients,
/// one sums their magnitudes.
template <typename Scalar>
Vector<Scalar> atom_use(const std::vector<SparseCode<Scalar>>& codes, Index n, UseNorm norm) {
  Vector<Scalar> use = Vector<Scalar>::Zero(n);
  for (const auto& code : codes) {
    for (Index t = 0; t < code.nnz(); ++t) {
      const Index j = code.support[static_cast<std::size_t>(t)];
      if (j < 0 || j >= n) throw std::invalid_argument("atom_use: support index out of range");
      const Scalar x = code.coeffs[t];
      if (x == Scalar(0)) continue;
      use[j] += norm == UseNorm::zero ? Scalar(1) : std::abs(x);
    }
  }
  return use;
}

template <typename Scalar>
struct RadiiAssignment {
  std::vector<Index> perm;  // perm[t] = atom receiving the t-th largest radius
  Vector<Scalar> radii;     // per-atom radii
};

/// Gives the largest radius to the most used atom, the second largest to the
/// next, and so on. Equal uses keep ascending atom order.
template <typename DerivedU, typename DerivedR>
RadiiAssignment<typename DerivedR::Scalar> assign_radii(const Eigen::MatrixBase<DerivedU>& use,
                                                        const Eigen::MatrixBase<DerivedR>& radii_k) {
  using Scalar = typename DerivedR::Scalar;
  const Index n = radii_k.size();
  if (use.size() != n) throw std::invalid_argument("assign_radii: length mismatch");
  Vector<Scalar> sorted = radii_k;
  std::sort(sorted.data(), sorted.data() + n, std::greater<Scalar>());

  RadiiAssignment<Scalar> out;
  out.perm.resize(static_cast<std::size_t>(n));
  std::iota(out.perm.begin(), out.perm.end(), Index{0});
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](Index a, Index b) { return use[a] > use[b]; });
  out.radii.resize(n);
  for (Index t = 0; t < n; ++t) out.radii[out.perm[static_cast<std::size_t>(t)]] = sorted[t];
  return out;
}

/// Random one-to-one radii allocation for the non-adaptive trainers. The
/// returned perm follows the same convention as assign_radii.
template <typename Derived>
RadiiAssignment<typename Derived::Scalar> shuffle_radii(const Eigen::MatrixBase<Derived>& radii,
                                                        std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  const Index n = radii.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Vector<Scalar> per_atom(n);
  for (Index j = 0; j < n; ++j) per_atom[j] = radii[order[static_cast<std::size_t>(j)]];
  // Recover the sorted-position permutation implied by the shuffle.
  return assign_radii(per_atom, per_atom);
}

inline std::string to_string(RadiiDistribution d) {
  switch (d) {
    case RadiiDistribution::linear: return "linear";
    case RadiiDistribution::minmax_50_50: return "minmax_50_50";
    case RadiiDistribution::minmax_80_20: return "minmax_80_20";
  }
  return "linear";
}

inline RadiiDistribution parse_distribution(const std::string& s) {
  if (s == "linear") return RadiiDistribution::linear;
  if (s == "minmax_50_50" || s == "50-50") return RadiiDistribution::minmax_50_50;
  if (s == "minmax_80_20" || s == "80-20") return RadiiDistribution::minmax_80_20;
  throw std::invalid_argument("unknown radii distribution: " + s);
}

}  // namespace setatom

#endif  // SETATOM_RADII_HPP
