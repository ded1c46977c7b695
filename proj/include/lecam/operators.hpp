#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "lecam/error.hpp"

namespace lecam {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Eigenvalues below this magnitude (and negative) are treated as zero by
/// every spectral function in the library.
inline constexpr double kClipTolerance = 1e-10;

struct SpectralDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

/// A d x d complex Hermitian matrix. The constructor replaces the input with
/// (M + M^dagger) / 2, so the stored entries are exactly Hermitian.
class HermitianOperator {
 public:
  explicit HermitianOperator(const CMatrix& m);

  static HermitianOperator zero(Eigen::Index d);
  static HermitianOperator identity(Eigen::Index d);
  static HermitianOperator diagonal(const std::vector<double>& diag);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  double trace() const { return m_.trace().real(); }
  SpectralDecomposition eigen() const;
  RVector eigenvalues() const;

  HermitianOperator operator+(const HermitianOperator& o) const;
  HermitianOperator operator-(const HermitianOperator& o) const;
  HermitianOperator operator*(double s) const;

 private:
  CMatrix m_;
};

inline HermitianOperator operator*(double s, const HermitianOperator& a) { return a * s; }

/// Positive semidefinite, unit-trace Hermitian operator.
class DensityOperator {
 public:
  /// Throws NotPSD if an eigenvalue is below -1e-10 and NotNormalized if
  /// |tr - 1| > 1e-10.
  explicit DensityOperator(const HermitianOperator& op);
  explicit DensityOperator(const CMatrix& m) : DensityOperator(HermitianOperator(m)) {}

  /// Clips eigenvalues in [-clip, 0) to zero and renormalizes. Throws NotPSD
  /// when an eigenvalue is below -clip. The clipped mass is written to
  /// `clipped` when non-null.
  static DensityOperator project(const HermitianOperator& op, double clip, double* clipped = nullptr);

  static DensityOperator pure(const CVector& psi);
  static DensityOperator basis_projector(Eigen::Index d, Eigen::Index k);
  static DensityOperator diagonal(const std::vector<double>& probabilities);
  static DensityOperator maximally_mixed(Eigen::Index d);
  /// Qubit state (I + x X + y Y + z Z) / 2; requires |r| <= 1.
  static DensityOperator from_bloch(double x, double y, double z);

  Eigen::Index dim() const noexcept { return op_.dim(); }
  const HermitianOperator& op() const noexcept { return op_; }
  const CMatrix& matrix() const noexcept { return op_.matrix(); }
  operator const HermitianOperator&() const noexcept { return op_; }

  /// Bloch vector (x, y, z) of a qubit state.
  Eigen::Vector3d bloch() const;

 private:
  HermitianOperator op_;
};

double trace_norm(const HermitianOperator& a);
double operator_norm(const HermitianOperator& a);
/// Re tr(A B).
double hs_inner(const HermitianOperator& a, const HermitianOperator& b);
double min_eigenvalue(const HermitianOperator& a);

/// A^alpha for PSD A and alpha in (0, 1].
HermitianOperator matrix_power(const HermitianOperator& a, double alpha);
HermitianOperator psd_sqrt(const HermitianOperator& a);

/// d^2 Hermitian operators spanning Herm(d) over the reals, together with the
/// biorthogonal dual family: tr(elements[i] dual[j]) = delta_ij.
class OperatorBasis {
 public:
  static constexpr double kMaxCondition = 1e8;

  /// Builds the dual through Gram-matrix inversion. Throws IllConditioned when
  /// the Gram condition number exceeds kMaxCondition.
  static OperatorBasis from_elements(std::vector<HermitianOperator> elements);

  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<HermitianOperator>& elements() const noexcept { return elements_; }
  const std::vector<HermitianOperator>& dual_elements() const noexcept { return duals_; }
  double gram_condition() const noexcept { return condition_; }

  /// Elements as density operators; throws NotPSD / NotNormalized otherwise.
  std::vector<DensityOperator> as_states() const;

 private:
  OperatorBasis(Eigen::Index d, std::vector<HermitianOperator> e, std::vector<HermitianOperator> dual, double cond)
      : dim_(d), elements_(std::move(e)), duals_(std::move(dual)), condition_(cond) {}

  Eigen::Index dim_;
  std::vector<HermitianOperator> elements_;
  std::vector<HermitianOperator> duals_;
  double condition_;
};

/// Basis of pure states: the d computational projectors, then for every pair
/// i < j the projectors onto (|i> + |j>)/sqrt2 and (|i> + i|j>)/sqrt2.
OperatorBasis state_basis(Eigen::Index d);

/// Coefficients alpha with op = sum_k alpha_k elements[k], alpha_k = tr(op dual[k]).
RVector expand(const HermitianOperator& op, const OperatorBasis& basis);
HermitianOperator reconstruct(const RVector& coefficients, const OperatorBasis& basis);

}  // namespace lecam
