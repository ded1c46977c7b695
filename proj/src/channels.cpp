#include "lecam/channels.hpp"

#include <cmath>
#include <string>

#include "lecam/random.hpp"

namespace lecam {

namespace {

void check_square_choi(const CMatrix& choi, Eigen::Index din, Eigen::Index dout) {
  if (choi.rows() != din * dout || choi.cols() != din * dout) {
    throw Error(ErrorCode::DimensionMismatch, "Choi matrix side must be dim_in * dim_out");
  }
}

Eigen::Index integer_sqrt(Eigen::Index n) {
  auto r = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n) throw Error(ErrorCode::DimensionMismatch, "Choi side " + std::to_string(n) + " is not a square");
  return r;
}

void check_probability_parameter(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

CptpReport validate_cptp(const CMatrix& choi, Eigen::Index dim_in, Eigen::Index dim_out, double tol) {
  check_square_choi(choi, dim_in, dim_out);
  CptpReport report;
  const CMatrix herm = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  double tp = 0.0;
  for (Eigen::Index i = 0; i < dim_in; ++i) {
    for (Eigen::Index j = 0; j < dim_in; ++j) {
      Complex s = 0.0;
      for (Eigen::Index a = 0; a < dim_out; ++a) s += choi(i * dim_out + a, j * dim_out + a);
      if (i == j) s -= 1.0;
      tp = std::max(tp, std::abs(s));
    }
  }
  report.tp_residual = tp;
  report.pass = report.min_eigenvalue >= -tol && report.tp_residual <= tol;
  return report;
}

CptpReport validate_cptp(const CMatrix& choi, double tol) {
  const Eigen::Index d = integer_sqrt(choi.rows());
  return validate_cptp(choi, d, d, tol);
}

CMatrix choi_to_superoperator(const CMatrix& choi, Eigen::Index din, Eigen::Index dout) {
  check_square_choi(choi, din, dout);
  CMatrix s(dout * dout, din * din);
  for (Eigen::Index i = 0; i < din; ++i)
    for (Eigen::Index j = 0; j < din; ++j)
      for (Eigen::Index a = 0; a < dout; ++a)
        for (Eigen::Index b = 0; b < dout; ++b) s(a * dout + b, i * din + j) = choi(i * dout + a, j * dout + b);
  return s;
}

CMatrix superoperator_to_choi(const CMatrix& superop, Eigen::Index din, Eigen::Index dout) {
  if (superop.rows() != dout * dout || superop.cols() != din * din) {
    throw Error(ErrorCode::DimensionMismatch, "superoperator shape must be d_out^2 x d_in^2");
  }
  CMatrix j(din * dout, din * dout);
  for (Eigen::Index i = 0; i < din; ++i)
    for (Eigen::Index k = 0; k < din; ++k)
      for (Eigen::Index a = 0; a < dout; ++a)
        for (Eigen::Index b = 0; b < dout; ++b) j(i * dout + a, k * dout + b) = superop(a * dout + b, i * din + k);
  return j;
}

// ---------------------------------------------------------------------------

Channel::Channel(CMatrix choi, Eigen::Index din, Eigen::Index dout)
    : dim_in_(din), dim_out_(dout), choi_(std::move(choi)), superop_(choi_to_superoperator(choi_, din, dout)) {}

Channel Channel::from_choi(const CMatrix& choi, Eigen::Index dim_in, Eigen::Index dim_out, double tol) {
  const CptpReport r = validate_cptp(choi, dim_in, dim_out, tol);
  if (r.min_eigenvalue < -tol) {
    throw Error(ErrorCode::NotCompletelyPositive, "Choi eigenvalue " + std::to_string(r.min_eigenvalue));
  }
  if (r.tp_residual > tol) {
    throw Error(ErrorCode::NotTracePreserving, "partial-trace residual " + std::to_string(r.tp_residual));
  }
  return Channel(0.5 * (choi + choi.adjoint()), dim_in, dim_out);
}

Channel Channel::from_superoperator(const CMatrix& superop, Eigen::Index dim_in, Eigen::Index dim_out, double tol) {
  return from_choi(superoperator_to_choi(superop, dim_in, dim_out), dim_in, dim_out, tol);
}

Channel Channel::from_kraus(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) throw Error(ErrorCode::NotTracePreserving, "empty Kraus list");
  const Eigen::Index dout = kraus.front().rows();
  const Eigen::Index din = kraus.front().cols();
  CMatrix completeness = CMatrix::Zero(din, din);
  CMatrix choi = CMatrix::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din) throw Error(ErrorCode::DimensionMismatch, "Kraus operators differ in shape");
    completeness += k.adjoint() * k;
    CVector v(din * dout);
    for (Eigen::Index i = 0; i < din; ++i)
      for (Eigen::Index a = 0; a < dout; ++a) v(i * dout + a) = k(a, i);
    choi += v * v.adjoint();
  }
  const double residual = (completeness - CMatrix::Identity(din, din)).cwiseAbs().maxCoeff();
  if (residual > kTolerance) {
    throw Error(ErrorCode::NotTracePreserving, "sum K^dagger K deviates from identity by " + std::to_string(residual));
  }
  return from_choi(choi, din, dout);
}

std::vector<CMatrix> Channel::kraus() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(choi_);
  const RVector& vals = es.eigenvalues();
  const double cutoff = 1e-14 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::vector<CMatrix> out;
  for (Eigen::Index k = vals.size() - 1; k >= 0; --k) {
    if (vals(k) <= cutoff) continue;
    const CVector v = std::sqrt(vals(k)) * es.eigenvectors().col(k);
    CMatrix op(dim_out_, dim_in_);
    for (Eigen::Index i = 0; i < dim_in_; ++i)
      for (Eigen::Index a = 0; a < dim_out_; ++a) op(a, i) = v(i * dim_out_ + a);
    out.push_back(std::move(op));
  }
  return out;
}

// ---------------------------------------------------------------------------

HermitianOperator apply_linear(const Channel& channel, const HermitianOperator& x) {
  if (x.dim() != channel.dim_in()) throw Error(ErrorCode::DimensionMismatch, "channel input dimension");
  const Eigen::Index din = channel.dim_in();
  const Eigen::Index dout = channel.dim_out();
  CVector v(din * din);
  for (Eigen::Index a = 0; a < din; ++a)
    for (Eigen::Index b = 0; b < din; ++b) v(a * din + b) = x(a, b);
  const CVector w = channel.superoperator() * v;
  CMatrix out(dout, dout);
  for (Eigen::Index a = 0; a < dout; ++a)
    for (Eigen::Index b = 0; b < dout; ++b) out(a, b) = w(a * dout + b);
  return HermitianOperator(out);
}

DensityOperator apply(const Channel& channel, const DensityOperator& rho) {
  const HermitianOperator out = apply_linear(channel, rho.op());
  const double tr = out.trace();
  if (std::abs(tr - 1.0) > Channel::kTolerance) {
    throw Error(ErrorCode::NumericalTP, "channel output has trace " + std::to_string(tr));
  }
  return DensityOperator(out * (1.0 / tr));
}

Channel compose(const Channel& second, const Channel& first) {
  if (first.dim_out() != second.dim_in()) throw Error(ErrorCode::DimensionMismatch, "compose: inner dims differ");
  return Channel::from_superoperator(second.superoperator() * first.superoperator(), first.dim_in(), second.dim_out());
}

// ---------------------------------------------------------------------------
// standard constructors

Channel identity_channel(Eigen::Index d) { return depolarizing(0.0, d); }

Channel depolarizing(double p, Eigen::Index d) {
  check_probability_parameter(p, "depolarizing p");
  CMatrix j = CMatrix::Identity(d * d, d * d) * (p / static_cast<double>(d));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) j(i * d + i, k * d + k) += 1.0 - p;
  return Channel::from_choi(j, d, d);
}

Channel dephasing(double lambda, Eigen::Index d) {
  check_probability_parameter(lambda, "dephasing lambda");
  CMatrix j = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) j(i * d + i, k * d + k) = (i == k) ? 1.0 : 1.0 - lambda;
  }
  return Channel::from_choi(j, d, d);
}

Channel amplitude_damping(double gamma) {
  check_probability_parameter(gamma, "amplitude damping gamma");
  CMatrix k0 = CMatrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  CMatrix k1 = CMatrix::Zero(2, 2);
  k1(0, 1) = std::sqrt(gamma);
  return Channel::from_kraus({k0, k1});
}

Channel unitary_channel(const CMatrix& u) {
  if (u.rows() != u.cols()) throw Error(ErrorCode::DimensionMismatch, "unitary must be square");
  const double dev = (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (dev > Channel::kTolerance) {
    throw Error(ErrorCode::ParameterOutOfRange, "matrix is not unitary (deviation " + std::to_string(dev) + ")");
  }
  return Channel::from_kraus({u});
}

Channel constant_channel(const DensityOperator& sigma, Eigen::Index dim_in) {
  const Eigen::Index dout = sigma.dim();
  CMatrix j = CMatrix::Zero(dim_in * dout, dim_in * dout);
  for (Eigen::Index i = 0; i < dim_in; ++i) j.block(i * dout, i * dout, dout, dout) = sigma.matrix();
  return Channel::from_choi(j, dim_in, dout);
}

Channel classical_embedding(const RMatrix& m) {
  const Eigen::Index nout = m.rows();
  const Eigen::Index nin = m.cols();
  if (nout == 0 || nin == 0) throw Error(ErrorCode::DimensionMismatch, "empty stochastic matrix");
  if (m.minCoeff() < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "stochastic matrix has a negative entry");
  for (Eigen::Index x = 0; x < nin; ++x) {
    if (std::abs(m.col(x).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::ParameterOutOfRange, "column " + std::to_string(x) + " does not sum to 1");
    }
  }
  CMatrix j = CMatrix::Zero(nin * nout, nin * nout);
  for (Eigen::Index x = 0; x < nin; ++x)
    for (Eigen::Index y = 0; y < nout; ++y) j(x * nout + y, x * nout + y) = m(y, x);
  return Channel::from_choi(j, nin, nout);
}

Channel random_channel(Eigen::Index d, std::uint64_t seed) {
  if (d < 2) throw Error(ErrorCode::ParameterOutOfRange, "random_channel needs d >= 2");
  Rng rng(seed);
  const CMatrix v = haar_isometry(d * d, d, rng);
  std::vector<CMatrix> kraus;
  kraus.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index e = 0; e < d; ++e) {
    CMatrix k(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index i = 0; i < d; ++i) k(a, i) = v(a * d + e, i);
    kraus.push_back(std::move(k));
  }
  return Channel::from_kraus(kraus);
}

CMatrix transpose_map_choi(Eigen::Index d) {
  // L(E_ij) = E_ji, so J = sum E_ij (x) E_ji is the swap operator.
  CMatrix j = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) j(i * d + k, k * d + i) = 1.0;
  return j;
}

}  // namespace lecam
