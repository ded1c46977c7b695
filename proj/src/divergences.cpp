#include "lecam/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "lecam/random.hpp"
#include "trace_program.hpp"

namespace lecam {

DivergenceSpec DivergenceSpec::trace_distance() { return {}; }

DivergenceSpec DivergenceSpec::one_minus_fidelity() {
  DivergenceSpec s;
  s.kind = DivergenceKind::OneMinusFidelity;
  return s;
}

DivergenceSpec DivergenceSpec::alpha_divergence(double alpha) {
  DivergenceSpec s;
  s.kind = DivergenceKind::Alpha;
  s.alpha = alpha;
  s.validate();
  return s;
}

DivergenceSpec DivergenceSpec::weighted_sum(RMatrix weights, DivergenceSpec base) {
  DivergenceSpec s;
  s.kind = DivergenceKind::WeightedSum;
  s.weights = std::move(weights);
  s.base = std::make_shared<const DivergenceSpec>(std::move(base));
  s.validate();
  return s;
}

DivergenceSpec DivergenceSpec::chebyshev(DivergenceSpec base) {
  DivergenceSpec s;
  s.kind = DivergenceKind::Chebyshev;
  s.base = std::make_shared<const DivergenceSpec>(std::move(base));
  s.validate();
  return s;
}

int DivergenceSpec::arity() const {
  switch (kind) {
    case DivergenceKind::WeightedSum: return static_cast<int>(weights.rows());
    case DivergenceKind::Chebyshev: return 0;
    default: return 2;
  }
}

void DivergenceSpec::validate() const {
  switch (kind) {
    case DivergenceKind::TraceDistance:
    case DivergenceKind::OneMinusFidelity:
      return;
    case DivergenceKind::Alpha:
      if (!(alpha > -1.0 && alpha < 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "alpha must lie strictly inside (-1, 1)");
      }
      return;
    case DivergenceKind::WeightedSum:
      if (weights.rows() != weights.cols() || weights.rows() == 0) {
        throw Error(ErrorCode::UnsupportedSpec, "weighted sum needs a square nonempty weight matrix");
      }
      if (weights.minCoeff() < 0.0) throw Error(ErrorCode::NegativeWeight, "weights must be nonnegative");
      [[fallthrough]];
    case DivergenceKind::Chebyshev:
      if (!base || base->arity() != 2) throw Error(ErrorCode::UnsupportedSpec, "base must be a two-point divergence");
      base->validate();
      return;
  }
}

std::string DivergenceSpec::name() const {
  switch (kind) {
    case DivergenceKind::TraceDistance: return "trace_distance";
    case DivergenceKind::OneMinusFidelity: return "one_minus_fidelity";
    case DivergenceKind::Alpha: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "alpha(%g)", alpha);
      return buf;
    }
    case DivergenceKind::WeightedSum: return "weighted_sum[" + base->name() + "]";
    case DivergenceKind::Chebyshev: return "chebyshev[" + base->name() + "]";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// two-point quantities

namespace {

void require_same_dim(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "states differ in dimension");
}

double two_point(const DivergenceSpec& spec, const DensityOperator& a, const DensityOperator& b) {
  switch (spec.kind) {
    case DivergenceKind::TraceDistance: return trace_distance(a, b);
    case DivergenceKind::OneMinusFidelity: return one_minus_fidelity(a, b);
    case DivergenceKind::Alpha: return alpha_divergence(spec.alpha, a, b);
    default: throw Error(ErrorCode::UnsupportedSpec, spec.name() + " is not a two-point divergence");
  }
}

}  // namespace

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  require_same_dim(a, b);
  return trace_norm(a.op() - b.op());
}

double fidelity(const DensityOperator& a, const DensityOperator& b) {
  require_same_dim(a, b);
  // tr sqrt(sqrt(a) b sqrt(a)) = ||sqrt(a) sqrt(b)||_1, the sum of singular values.
  const CMatrix m = psd_sqrt(a.op()).matrix() * psd_sqrt(b.op()).matrix();
  const double f = Eigen::JacobiSVD<CMatrix>(m).singularValues().sum();
  return std::min(f, 1.0);
}

double one_minus_fidelity(const DensityOperator& a, const DensityOperator& b) { return 1.0 - fidelity(a, b); }

double alpha_divergence(double alpha, const DensityOperator& a, const DensityOperator& b) {
  if (!(alpha > -1.0 && alpha < 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "alpha must lie in (-1, 1)");
  require_same_dim(a, b);
  const HermitianOperator pa = matrix_power(a.op(), 0.5 * (1.0 - alpha));
  const HermitianOperator pb = matrix_power(b.op(), 0.5 * (1.0 + alpha));
  const double overlap = hs_inner(pa, pb);
  return 4.0 / (1.0 - alpha * alpha) * (1.0 - overlap);
}

double weighted_sum(const RMatrix& weights, const DivergenceSpec& base, std::span<const DensityOperator> states) {
  if (weights.rows() != weights.cols() || weights.rows() != static_cast<Eigen::Index>(states.size())) {
    throw Error(ErrorCode::DimensionMismatch, "weight matrix must be k x k for k states");
  }
  if (weights.size() > 0 && weights.minCoeff() < 0.0) throw Error(ErrorCode::NegativeWeight, "negative weight");
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      if (weights(i, j) == 0.0) continue;
      total += weights(i, j) * two_point(base, states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Chebyshev center

namespace {

ChebyshevResult chebyshev_trace_distance(std::span<const DensityOperator> states, const conic::SolverOptions& options) {
  using namespace conic;
  const Eigen::Index d = states.front().dim();
  const auto k = static_cast<Eigen::Index>(states.size());
  SdpProblem p;
  const int center = p.add_block(BlockKind::ComplexPsd, d);
  std::vector<int> pb, qb;
  for (Eigen::Index j = 0; j < k; ++j) {
    pb.push_back(p.add_block(BlockKind::ComplexPsd, d));
    qb.push_back(p.add_block(BlockKind::ComplexPsd, d));
  }
  // Slacks s_j >= 0; t is free since the budget rows force t >= 0.
  const int slack = p.add_block(BlockKind::Nonnegative, k);
  const int level = p.add_block(BlockKind::Free, 1);
  p.objective().add(level, 0, 0, 1.0);

  LinearFunctional unit_trace;
  unit_trace.add_trace(center, 1.0);
  p.add_constraint(unit_trace, 1.0);
  const detail::EntryWriter center_entry = [center](LinearFunctional& f, Eigen::Index r, Eigen::Index c, Complex w) {
    f.add(center, c, r, w);
  };
  // Every splitting row carries the same center term; rotate so only one does.
  const RMatrix u = detail::row_rotation(RMatrix::Ones(k, 1));
  for (Eigen::Index q = 0; q < k; ++q) {
    const double center_weight = u.col(q).sum();
    const detail::EntryWriter scaled = [&center_entry, center_weight](LinearFunctional& f, Eigen::Index r,
                                                                       Eigen::Index c, Complex w) {
      if (std::abs(center_weight) > 1e-15) center_entry(f, r, c, center_weight * w);
    };
    CMatrix target = CMatrix::Zero(d, d);
    std::vector<detail::SplitTerm> terms;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      target += u(j, q) * states[ju].matrix();
      terms.push_back({u(j, q), pb[ju], qb[ju]});
    }
    // The unit-trace center fixes the trace of every row group.
    detail::add_splitting_constraints(p, scaled, terms, target, 0.0);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    LinearFunctional budget;
    budget.add_trace(pb[ju], 1.0).add_trace(qb[ju], 1.0).add(slack, j, 0, 1.0).add(level, 0, 0, -1.0);
    p.add_constraint(std::move(budget), 0.0);
  }

  // Interior point: maximally mixed center, margins on the splittings.
  const double margin = 0.01;
  const DensityOperator mixed = DensityOperator::maximally_mixed(d);
  BlockValues x0;
  x0.blocks.resize(p.blocks().size());
  x0.blocks[static_cast<std::size_t>(center)] = mixed.matrix();
  std::vector<double> budgets;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    auto [pp, qq] = detail::split_with_margin(states[ju].op() - mixed.op(), margin);
    budgets.push_back(pp.trace().real() + qq.trace().real());
    x0.blocks[static_cast<std::size_t>(pb[ju])] = std::move(pp);
    x0.blocks[static_cast<std::size_t>(qb[ju])] = std::move(qq);
  }
  const double t0 = *std::max_element(budgets.begin(), budgets.end()) + 0.1;
  CMatrix sv(k, 1);
  for (Eigen::Index j = 0; j < k; ++j) sv(j, 0) = t0 - budgets[static_cast<std::size_t>(j)];
  x0.blocks[static_cast<std::size_t>(slack)] = sv;
  x0.blocks[static_cast<std::size_t>(level)] = CMatrix::Constant(1, 1, t0);
  p.set_interior_point(std::move(x0));

  const SdpSolution sol = solve(p, options);
  if (sol.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "Chebyshev center program: " + std::string(to_string(sol.status)) + " (" +
                                              sol.message + ")");
  }
  double clipped = 0.0;
  DensityOperator c = DensityOperator::project(HermitianOperator(sol.x.blocks[static_cast<std::size_t>(center)]), 1e-7,
                                               &clipped);
  return {std::max(sol.primal_value, 0.0), std::move(c), true, sol.residuals, std::max(sol.dual_value, 0.0)};
}

/// Nelder-Mead on an unconstrained parameter vector.
RVector nelder_mead(const std::function<double(const RVector&)>& f, RVector x0, double step, int max_evals) {
  const Eigen::Index n = x0.size();
  std::vector<RVector> simplex{x0};
  for (Eigen::Index i = 0; i < n; ++i) {
    RVector v = x0;
    v(i) += step;
    simplex.push_back(v);
  }
  std::vector<double> fv;
  for (const auto& v : simplex) fv.push_back(f(v));
  int evals = static_cast<int>(fv.size());
  std::vector<std::size_t> order(simplex.size());
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (std::abs(fv[worst] - fv[best]) < 1e-12) break;
    RVector centroid = RVector::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(n);
    const RVector xr = centroid + (centroid - simplex[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < fv[best]) {
      const RVector xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      const RVector xc = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(xc);
      ++evals;
      if (fc < fv[worst]) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          fv[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  return simplex[static_cast<std::size_t>(it - fv.begin())];
}

DensityOperator state_from_params(const RVector& v, Eigen::Index d) {
  CMatrix a(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = Complex(v(2 * (r * d + c)), v(2 * (r * d + c) + 1));
  CMatrix m = a * a.adjoint();
  m /= m.trace().real();
  return DensityOperator(HermitianOperator(m));
}

RVector params_from_state(const DensityOperator& rho) {
  // A = sqrt(rho) reproduces rho exactly.
  const CMatrix a = psd_sqrt(rho.op()).matrix();
  const Eigen::Index d = rho.dim();
  RVector v(2 * d * d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      v(2 * (r * d + c)) = a(r, c).real();
      v(2 * (r * d + c) + 1) = a(r, c).imag();
    }
  return v;
}

ChebyshevResult chebyshev_estimate(const DivergenceSpec& base, std::span<const DensityOperator> states) {
  const Eigen::Index d = states.front().dim();
  auto objective = [&](const RVector& v) {
    const DensityOperator c = state_from_params(v, d);
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, two_point(base, s, c));
    return worst;
  };
  std::vector<DensityOperator> starts(states.begin(), states.end());
  starts.push_back(DensityOperator::maximally_mixed(d));
  Rng rng(0x5eed);
  for (int k = 0; k < 4; ++k) starts.push_back(random_density(d, rng));
  double best = std::numeric_limits<double>::infinity();
  RVector best_v;
  for (const auto& s : starts) {
    // Mix toward the maximally mixed state so sqrt-parameters are interior.
    const DensityOperator mixed(s.op() * 0.9 + DensityOperator::maximally_mixed(d).op() * 0.1);
    RVector v = nelder_mead(objective, params_from_state(mixed), 0.1, 4000);
    const double val = objective(v);
    if (val < best) {
      best = val;
      best_v = v;
    }
  }
  return {best, state_from_params(best_v, d), false, {}};
}

}  // namespace

ChebyshevResult chebyshev_divergence(const DivergenceSpec& base, std::span<const DensityOperator> states,
                                     const conic::SolverOptions& options) {
  if (states.empty()) throw Error(ErrorCode::DimensionMismatch, "Chebyshev divergence of an empty tuple");
  for (const auto& s : states) require_same_dim(s, states.front());
  if (base.arity() != 2) throw Error(ErrorCode::UnsupportedSpec, "Chebyshev base must be two-point");
  base.validate();
  if (base.kind == DivergenceKind::TraceDistance) return chebyshev_trace_distance(states, options);
  return chebyshev_estimate(base, states);
}

double evaluate(const DivergenceSpec& spec, std::span<const DensityOperator> states, const conic::SolverOptions& options) {
  spec.validate();
  const int k = spec.arity();
  if (k != 0 && static_cast<std::size_t>(k) != states.size()) {
    throw Error(ErrorCode::DimensionMismatch, spec.name() + " takes " + std::to_string(k) + " states");
  }
  switch (spec.kind) {
    case DivergenceKind::WeightedSum: return weighted_sum(spec.weights, *spec.base, states);
    case DivergenceKind::Chebyshev: return chebyshev_divergence(*spec.base, states, options).value;
    default: return two_point(spec, states[0], states[1]);
  }
}

// ---------------------------------------------------------------------------
// continuity moduli

namespace {

double two_point_modulus(const DivergenceSpec& spec, double x1, double x2, Eigen::Index dim) {
  switch (spec.kind) {
    case DivergenceKind::TraceDistance:
      return x1 + x2;
    case DivergenceKind::OneMinusFidelity:
      return 0.5 * x1 + std::sqrt(x1) + 0.5 * x2 + std::sqrt(x2);
    case DivergenceKind::Alpha: {
      // Perturbing the first argument moves a^{(1-alpha)/2}, the second b^{(1+alpha)/2}.
      const double c = 4.0 * static_cast<double>(dim) / (1.0 - spec.alpha * spec.alpha);
      return c * (std::pow(x1, 0.5 * (1.0 - spec.alpha)) + std::pow(x2, 0.5 * (1.0 + spec.alpha)));
    }
    default:
      throw Error(ErrorCode::UnsupportedSpec, "no modulus for " + spec.name());
  }
}

}  // namespace

double modulus(const DivergenceSpec& spec, std::span<const double> x, Eigen::Index dim) {
  spec.validate();
  const int k = spec.arity();
  if (k != 0 && static_cast<std::size_t>(k) != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "modulus arity");
  }
  switch (spec.kind) {
    case DivergenceKind::WeightedSum: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < spec.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < spec.weights.cols(); ++j)
          if (spec.weights(i, j) != 0.0) {
            total += spec.weights(i, j) *
                     two_point_modulus(*spec.base, x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], dim);
          }
      return total;
    }
    case DivergenceKind::Chebyshev: {
      if (spec.base->kind != DivergenceKind::TraceDistance) {
        throw Error(ErrorCode::UnsupportedSpec, "Chebyshev modulus is only derived for the exact trace-distance base");
      }
      double total = 0.0;
      for (double xj : x) total += two_point_modulus(*spec.base, xj, 0.0, dim);
      return total;
    }
    default:
      return two_point_modulus(spec, x[0], x[1], dim);
  }
}

ModulusCheck modulus_bound(const DivergenceSpec& spec, std::span<const DensityOperator> states,
                           std::span<const DensityOperator> perturbed, const conic::SolverOptions& options) {
  if (states.size() != perturbed.size() || states.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "modulus_bound needs tuples of equal positive arity");
  }
  std::vector<double> dist;
  for (std::size_t j = 0; j < states.size(); ++j) dist.push_back(trace_distance(states[j], perturbed[j]));
  const double rhs = modulus(spec, dist, states.front().dim());
  const double lhs = std::abs(evaluate(spec, states, options) - evaluate(spec, perturbed, options));
  return {lhs, rhs, lhs <= rhs + 1e-9};
}

}  // namespace lecam
