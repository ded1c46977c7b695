#pragma once

#include <cstdint>
#include <vector>

#include "lecam/operators.hpp"

namespace lecam {

/// Outcome of a complete-positivity / trace-preservation check on a Choi matrix.
struct CptpReport {
  double min_eigenvalue = 0.0;
  double tp_residual = 0.0;  // max |(Tr_out J - I)_ij|
  bool pass = false;
};

/// Choi index convention, fixed: J = sum_{i,j} E_ij (x) L(E_ij) with the input
/// factor first, i.e. J(i * d_out + a, j * d_out + b) = L(E_ij)(a, b). Then
/// L(rho) = Tr_in[(rho^T (x) I) J].
///
/// The superoperator acts on row-major vectorizations, vec(rho)[a * d + b] = rho(a, b),
/// so vec(L(rho)) = S vec(rho) and S(a * d_out + b, i * d_in + j) = J(i * d_out + a, j * d_out + b).
CptpReport validate_cptp(const CMatrix& choi, Eigen::Index dim_in, Eigen::Index dim_out, double tol);
/// Square-channel overload; dim_in = dim_out = sqrt(side).
CptpReport validate_cptp(const CMatrix& choi, double tol);

CMatrix choi_to_superoperator(const CMatrix& choi, Eigen::Index dim_in, Eigen::Index dim_out);
CMatrix superoperator_to_choi(const CMatrix& superop, Eigen::Index dim_in, Eigen::Index dim_out);

/// A validated CPTP map. Immutable; the superoperator is derived once at
/// construction.
class Channel {
 public:
  static constexpr double kTolerance = 1e-9;

  /// Throws NotCompletelyPositive / NotTracePreserving when validation at `tol` fails.
  static Channel from_choi(const CMatrix& choi, Eigen::Index dim_in, Eigen::Index dim_out, double tol = kTolerance);
  static Channel from_superoperator(const CMatrix& superop, Eigen::Index dim_in, Eigen::Index dim_out,
                                    double tol = kTolerance);
  /// Kraus operators are d_out x d_in. Throws NotTracePreserving unless
  /// sum K^dagger K = I within 1e-9.
  static Channel from_kraus(const std::vector<CMatrix>& kraus);

  Eigen::Index dim_in() const noexcept { return dim_in_; }
  Eigen::Index dim_out() const noexcept { return dim_out_; }
  const CMatrix& choi() const noexcept { return choi_; }
  const CMatrix& superoperator() const noexcept { return superop_; }
  /// Canonical Kraus operators from the Choi eigendecomposition.
  std::vector<CMatrix> kraus() const;

 private:
  Channel(CMatrix choi, Eigen::Index din, Eigen::Index dout);

  Eigen::Index dim_in_;
  Eigen::Index dim_out_;
  CMatrix choi_;
  CMatrix superop_;
};

/// Channel output renormalized to unit trace. Throws NumericalTP when the raw
/// trace is off by more than 1e-9.
DensityOperator apply(const Channel& channel, const DensityOperator& rho);
/// The linear extension on Hermitian operators, no normalization.
HermitianOperator apply_linear(const Channel& channel, const HermitianOperator& x);

/// second o first.
Channel compose(const Channel& second, const Channel& first);

Channel identity_channel(Eigen::Index d);
/// rho -> (1 - p) rho + p tr(rho) I / d.
Channel depolarizing(double p, Eigen::Index d);
/// rho -> (1 - lambda) rho + lambda diag(rho).
Channel dephasing(double lambda, Eigen::Index d);
/// Qubit amplitude damping toward |0><0|.
Channel amplitude_damping(double gamma);
Channel unitary_channel(const CMatrix& u);
/// rho -> tr(rho) sigma on inputs of dimension dim_in.
Channel constant_channel(const DensityOperator& sigma, Eigen::Index dim_in);
/// Measure-and-prepare in the computational basis with column-stochastic M:
/// rho -> sum_{x,y} M(y, x) <x|rho|x> |y><y|.
Channel classical_embedding(const RMatrix& column_stochastic);
/// Stinespring channel from a Haar isometry C^d -> C^d (x) C^d, environment
/// traced out. Deterministic in `seed`.
Channel random_channel(Eigen::Index d, std::uint64_t seed);

/// Choi matrix of the transpose map (not CP); validation counterexample.
CMatrix transpose_map_choi(Eigen::Index d);

}  // namespace lecam
