#ifndef SETATOM_TYPES_HPP
#define SETATOM_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace setatom {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// How atom usage is measured when ranking atoms for radii assignment.
enum class UseNorm { zero, one };

/// Rotation split used when pushing two overlapping cones apart.
enum class RotationMode { symmetric, radius_weighted };

/// A dictionary of set-atoms: unit-norm central atoms (columns), the radius
/// bound to each atom and the permutation that produced the assignment.
///
/// `perm[t]` is the atom holding the t-th largest radius (0-based). For a
/// freshly initialized dictionary it is the identity.
template <typename Scalar = double>
struct Dictionary {
  Matrix<Scalar> atoms;
  Vector<Scalar> radii;
  std::vector<Index> perm;

  Dictionary() = default;

  explicit Dictionary(Matrix<Scalar> central)
      : atoms(std::move(central)),
        radii(Vector<Scalar>::Zero(atoms.cols())),
        perm(static_cast<std::size_t>(atoms.cols())) {
    std::iota(perm.begin(), perm.end(), Index{0});
  }

  Index dim() const { return atoms.rows(); }
  Index size() const { return atoms.cols(); }
};

/// Sparse representation of one signal. Column t of `actual_atoms` is the
/// atom actually used for `support[t]`, scaled by `coeffs[t]`.
template <typename Scalar = double>
struct SparseCode {
  std::vector<Index> support;
  Vector<Scalar> coeffs;
  Matrix<Scalar> actual_atoms;
  Scalar residual_norm = Scalar(0);

  Index nnz() const { return static_cast<Index>(support.size()); }
};

/// y - sum_t coeffs[t] * actual_atoms.col(t).
template <typename Derived>
Vector<typename Derived::Scalar> residual(const Eigen::MatrixBase<Derived>& y,
                                          const SparseCode<typename Derived::Scalar>& code) {
  Vector<typename Derived::Scalar> r = y;
  if (code.nnz() > 0) r.noalias() -= code.actual_atoms * code.coeffs;
  return r;
}

/// Throws std::invalid_argument if `dict` breaks a Dictionary invariant.
template <typename Scalar>
void validate(const Dictionary<Scalar>& dict, Scalar norm_tol = Scalar(1e-10)) {
  const Index n = dict.size();
  if (dict.radii.size() != n) throw std::invalid_argument("dictionary: radii length != n");
  if (static_cast<Index>(dict.perm.size()) != n)
    throw std::invalid_argument("dictionary: perm length != n");
  for (Index j = 0; j < n; ++j) {
    if (std::abs(dict.atoms.col(j).norm() - Scalar(1)) > norm_tol)
      throw std::invalid_argument("dictionary: atom " + std::to_string(j) + " is not unit norm");
    if (!(dict.radii[j] >= Scalar(0)))
      throw std::invalid_argument("dictionary: negative radius");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index p : dict.perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)])
      throw std::invalid_argument("dictionary: perm is not a bijection");
    seen[static_cast<std::size_t>(p)] = true;
  }
}

}  // namespace setatom

#endif  // SETATOM_TYPES_HPP
