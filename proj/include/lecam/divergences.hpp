#pragma once

#include <memory>
#include <span>
#include <string>

#include "lecam/conic_solver.hpp"
#include "lecam/operators.hpp"

namespace lecam {

enum class DivergenceKind { TraceDistance, OneMinusFidelity, Alpha, WeightedSum, Chebyshev };

/// A k-point information quantity that is monotone under simultaneous CPTP maps.
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::TraceDistance;
  double alpha = 0.0;  // Alpha only, strictly inside (-1, 1)
  RMatrix weights;     // WeightedSum only, k x k, nonnegative
  std::shared_ptr<const DivergenceSpec> base;  // WeightedSum and Chebyshev

  static DivergenceSpec trace_distance();
  static DivergenceSpec one_minus_fidelity();
  static DivergenceSpec alpha_divergence(double alpha);
  static DivergenceSpec weighted_sum(RMatrix weights, DivergenceSpec base);
  static DivergenceSpec chebyshev(DivergenceSpec base);

  /// Number of states the quantity takes; 0 means any positive number (Chebyshev).
  int arity() const;
  /// Throws ParameterOutOfRange / NegativeWeight / UnsupportedSpec.
  void validate() const;
  std::string name() const;
};

double trace_distance(const DensityOperator& a, const DensityOperator& b);
/// tr sqrt(sqrt(a) b sqrt(a)).
double fidelity(const DensityOperator& a, const DensityOperator& b);
double one_minus_fidelity(const DensityOperator& a, const DensityOperator& b);
/// 4 / (1 - alpha^2) * (1 - tr a^{(1-alpha)/2} b^{(1+alpha)/2}).
double alpha_divergence(double alpha, const DensityOperator& a, const DensityOperator& b);
/// sum_ij w_ij D(states_i, states_j) for a two-point base D.
double weighted_sum(const RMatrix& weights, const DivergenceSpec& base, std::span<const DensityOperator> states);

struct ChebyshevResult {
  double value;
  DensityOperator center;
  /// True for the trace-distance base (certified SDP optimum); false for the
  /// multistart estimate used with other bases.
  bool exact;
  conic::Residuals residuals;
  /// Dual value of the center program (exact) or 0 (estimate); never above the true value.
  double lower_bound = 0.0;
};

/// inf over centers c of max_j D(states_j, c).
ChebyshevResult chebyshev_divergence(const DivergenceSpec& base, std::span<const DensityOperator> states,
                                     const conic::SolverOptions& options = {});

/// Dispatches on spec.kind. Chebyshev with a non-trace-distance base returns the
/// approximate estimate.
double evaluate(const DivergenceSpec& spec, std::span<const DensityOperator> states,
                const conic::SolverOptions& options = {});

/// Continuity modulus f(x_1, ..., x_k) with |D(rho) - D(rho')| <= f(||rho_1 - rho_1'||_1, ...).
/// `dim` enters only the alpha-divergence constant 4 d / (1 - alpha^2).
double modulus(const DivergenceSpec& spec, std::span<const double> distances, Eigen::Index dim);

struct ModulusCheck {
  double lhs;  // |D(rho...) - D(rho'...)|
  double rhs;  // f(||rho_j - rho_j'||_1 ...)
  bool holds;  // lhs <= rhs + 1e-9
};

ModulusCheck modulus_bound(const DivergenceSpec& spec, std::span<const DensityOperator> states,
                           std::span<const DensityOperator> perturbed, const conic::SolverOptions& options = {});

}  // namespace lecam
