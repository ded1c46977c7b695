#include "lecam/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lecam {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NumericalTP: return "NumericalTP";
    case ErrorCode::NotTracePreserving: return "NotTracePreserving";
    case ErrorCode::NotCompletelyPositive: return "NotCompletelyPositive";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// HermitianOperator

HermitianOperator::HermitianOperator(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "Hermitian operator needs a nonempty square matrix, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::zero(Eigen::Index d) { return HermitianOperator(CMatrix::Zero(d, d)); }

HermitianOperator HermitianOperator::identity(Eigen::Index d) { return HermitianOperator(CMatrix::Identity(d, d)); }

HermitianOperator HermitianOperator::diagonal(const std::vector<double>& diag) {
  const auto d = static_cast<Eigen::Index>(diag.size());
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
  return HermitianOperator(m);
}

SpectralDecomposition HermitianOperator::eigen() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_);
  return {es.eigenvalues(), es.eigenvectors()};
}

RVector HermitianOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
  if (o.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "operator sum");
  return HermitianOperator(m_ + o.m_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
  if (o.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "operator difference");
  return HermitianOperator(m_ - o.m_);
}

HermitianOperator HermitianOperator::operator*(double s) const { return HermitianOperator(m_ * s); }

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(const HermitianOperator& op) : op_(op) {
  const double lo = op_.eigenvalues().minCoeff();
  if (lo < -kClipTolerance) {
    throw Error(ErrorCode::NotPSD, "density operator has eigenvalue " + std::to_string(lo));
  }
  const double tr = op_.trace();
  if (std::abs(tr - 1.0) > kClipTolerance) {
    throw Error(ErrorCode::NotNormalized, "density operator has trace " + std::to_string(tr));
  }
}

DensityOperator DensityOperator::project(const HermitianOperator& op, double clip, double* clipped) {
  auto [values, vectors] = op.eigen();
  double removed = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) < -clip) {
      throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(values(k)) + " below clip tolerance");
    }
    if (values(k) < 0.0) {
      removed += -values(k);
      values(k) = 0.0;
    }
  }
  if (clipped != nullptr) *clipped = removed;
  const double total = values.sum();
  if (total <= 0.0) throw Error(ErrorCode::NotNormalized, "operator has no positive part");
  CMatrix m = vectors * (values / total).cast<Complex>().asDiagonal() * vectors.adjoint();
  return DensityOperator(HermitianOperator(m));
}

DensityOperator DensityOperator::pure(const CVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw Error(ErrorCode::NotNormalized, "zero state vector");
  const CVector v = psi / n;
  return DensityOperator(HermitianOperator(v * v.adjoint()));
}

DensityOperator DensityOperator::basis_projector(Eigen::Index d, Eigen::Index k) {
  if (k < 0 || k >= d) throw Error(ErrorCode::ParameterOutOfRange, "basis index out of range");
  CVector v = CVector::Zero(d);
  v(k) = 1.0;
  return pure(v);
}

DensityOperator DensityOperator::diagonal(const std::vector<double>& probabilities) {
  return DensityOperator(HermitianOperator::diagonal(probabilities));
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index d) {
  return DensityOperator(HermitianOperator(CMatrix::Identity(d, d) / static_cast<double>(d)));
}

DensityOperator DensityOperator::from_bloch(double x, double y, double z) {
  CMatrix m(2, 2);
  m << Complex(1.0 + z, 0.0), Complex(x, -y), Complex(x, y), Complex(1.0 - z, 0.0);
  return DensityOperator(HermitianOperator(0.5 * m));
}

Eigen::Vector3d DensityOperator::bloch() const {
  if (dim() != 2) throw Error(ErrorCode::DimensionMismatch, "Bloch vector needs a qubit state");
  const CMatrix& m = matrix();
  return {2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

// ---------------------------------------------------------------------------
// spectral functions

double trace_norm(const HermitianOperator& a) { return a.eigenvalues().cwiseAbs().sum(); }

double operator_norm(const HermitianOperator& a) { return a.eigenvalues().cwiseAbs().maxCoeff(); }

double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "Hilbert-Schmidt inner product");
  // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().array().conjugate()).sum().real();
}

double min_eigenvalue(const HermitianOperator& a) { return a.eigenvalues().minCoeff(); }

HermitianOperator matrix_power(const HermitianOperator& a, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "matrix_power exponent must lie in (0, 1]");
  }
  auto [values, vectors] = a.eigen();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) < -kClipTolerance) {
      throw Error(ErrorCode::NotPSD, "matrix_power of operator with eigenvalue " + std::to_string(values(k)));
    }
    values(k) = values(k) <= kClipTolerance ? 0.0 : std::pow(values(k), alpha);
  }
  return HermitianOperator(vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint());
}

HermitianOperator psd_sqrt(const HermitianOperator& a) { return matrix_power(a, 0.5); }

// ---------------------------------------------------------------------------
// bases

OperatorBasis OperatorBasis::from_elements(std::vector<HermitianOperator> elements) {
  if (elements.empty()) throw Error(ErrorCode::DimensionMismatch, "empty operator basis");
  const Eigen::Index d = elements.front().dim();
  const auto n = static_cast<Eigen::Index>(elements.size());
  if (n != d * d) {
    throw Error(ErrorCode::DimensionMismatch,
                "a basis of Herm(" + std::to_string(d) + ") needs exactly " + std::to_string(d * d) + " elements");
  }
  for (const auto& e : elements) {
    if (e.dim() != d) throw Error(ErrorCode::DimensionMismatch, "basis elements differ in dimension");
  }
  RMatrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      gram(i, j) = gram(j, i) = hs_inner(elements[static_cast<std::size_t>(i)], elements[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::JacobiSVD<RMatrix> svd(gram);
  const RVector& sv = svd.singularValues();
  const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw Error(ErrorCode::IllConditioned, "Gram matrix condition number " + std::to_string(cond));
  }
  const RMatrix inv = gram.inverse();
  std::vector<HermitianOperator> duals;
  duals.reserve(elements.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    CMatrix acc = CMatrix::Zero(d, d);
    for (Eigen::Index k = 0; k < n; ++k) acc += inv(j, k) * elements[static_cast<std::size_t>(k)].matrix();
    duals.emplace_back(acc);
  }
  return OperatorBasis(d, std::move(elements), std::move(duals), cond);
}

std::vector<DensityOperator> OperatorBasis::as_states() const {
  std::vector<DensityOperator> out;
  out.reserve(elements_.size());
  for (const auto& e : elements_) out.emplace_back(e);
  return out;
}

OperatorBasis state_basis(Eigen::Index d) {
  if (d < 2) throw Error(ErrorCode::ParameterOutOfRange, "state_basis needs d >= 2");
  std::vector<HermitianOperator> elems;
  elems.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) elems.push_back(DensityOperator::basis_projector(d, i).op());
  const Complex im(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      CVector plus = CVector::Zero(d);
      plus(i) = 1.0;
      plus(j) = 1.0;
      CVector plus_i = CVector::Zero(d);
      plus_i(i) = 1.0;
      plus_i(j) = im;
      elems.push_back(DensityOperator::pure(plus).op());
      elems.push_back(DensityOperator::pure(plus_i).op());
    }
  }
  return OperatorBasis::from_elements(std::move(elems));
}

RVector expand(const HermitianOperator& op, const OperatorBasis& basis) {
  if (op.dim() != basis.dim()) throw Error(ErrorCode::DimensionMismatch, "expand: operator and basis dims differ");
  RVector coeffs(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    coeffs(static_cast<Eigen::Index>(k)) = hs_inner(op, basis.dual_elements()[k]);
  }
  return coeffs;
}

HermitianOperator reconstruct(const RVector& coefficients, const OperatorBasis& basis) {
  if (coefficients.size() != static_cast<Eigen::Index>(basis.size())) {
    throw Error(ErrorCode::DimensionMismatch, "reconstruct: coefficient count differs from basis size");
  }
  CMatrix acc = CMatrix::Zero(basis.dim(), basis.dim());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    acc += coefficients(static_cast<Eigen::Index>(k)) * basis.elements()[k].matrix();
  }
  return HermitianOperator(acc);
}

}  // namespace lecam
