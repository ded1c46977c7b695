#include "lecam/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lecam/random.hpp"

namespace lecam {

namespace {

constexpr double kBasisClip = 1e-9;
constexpr double kLimitClip = 1e-7;

CVector vec(const CMatrix& x) {
  const Eigen::Index d = x.rows();
  CVector v(d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) v(a * d + b) = x(a, b);
  return v;
}

CMatrix unvec(const CVector& v, Eigen::Index d) {
  CMatrix x(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) x(a, b) = v(a * d + b);
  return x;
}

HermitianOperator apply_superoperator(const CMatrix& s, const HermitianOperator& x) {
  return HermitianOperator(unvec(s * vec(x.matrix()), x.dim()));
}

std::vector<std::string> basis_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back("b" + std::to_string(k));
  return out;
}

double max_pairwise(const std::vector<HermitianOperator>& ops) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = i + 1; j < ops.size(); ++j) worst = std::max(worst, trace_norm(ops[i] - ops[j]));
  return worst;
}

HermitianOperator combine(const RVector& alpha, const StateFamily& images) {
  HermitianOperator out = HermitianOperator::zero(images.dim());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) out = out + images.state(static_cast<std::size_t>(k)).op() * alpha(k);
  return out;
}

// Labels may repeat within a tuple.
std::vector<DensityOperator> select(const StateFamily& family, const std::vector<std::string>& labels) {
  std::vector<DensityOperator> out;
  for (const auto& label : labels) out.push_back(family.state(label));
  return out;
}

}  // namespace

Channel ChainScenario::channel_at(int step) const {
  if (step < 1) throw Error(ErrorCode::ParameterOutOfRange, "channel steps start at 1");
  const Eigen::Index d = initial.dim();
  if (const auto* h = std::get_if<Homogeneous>(&channels)) return h->channel;
  if (const auto* e = std::get_if<Explicit>(&channels)) {
    if (static_cast<std::size_t>(step) > e->channels.size()) {
      throw Error(ErrorCode::ParameterOutOfRange, "explicit chain has no channel for step " + std::to_string(step));
    }
    return e->channels[static_cast<std::size_t>(step - 1)];
  }
  const auto& r = std::get<RandomHaar>(channels);
  return random_channel(d, derive_seed(r.seed, static_cast<std::uint64_t>(step)));
}

void ChainScenario::validate() const {
  if (horizon < 0) throw Error(ErrorCode::ParameterOutOfRange, "horizon must be nonnegative");
  const Eigen::Index d = initial.dim();
  auto check = [d](const Channel& c) {
    if (c.dim_in() != d || c.dim_out() != d) {
      throw Error(ErrorCode::DimensionMismatch, "chain channels must act on the family's space");
    }
  };
  if (const auto* h = std::get_if<Homogeneous>(&channels)) check(h->channel);
  if (const auto* e = std::get_if<Explicit>(&channels)) {
    if (e->channels.size() < static_cast<std::size_t>(horizon)) {
      throw Error(ErrorCode::ParameterOutOfRange, "explicit chain is shorter than the horizon");
    }
    for (const auto& c : e->channels) check(c);
  }
}

ConvergenceTrace evolve(const ChainScenario& scenario, const EvolveOptions& options) {
  scenario.validate();
  ConvergenceTrace trace;
  for (const auto& probe : options.probes) {
    probe.spec.validate();
    trace.divergence_names.push_back(probe.spec.name());
  }
  trace.families.push_back(scenario.initial);
  for (int i = 1; i <= scenario.horizon; ++i) trace.families.push_back(trace.families.back().mapped(scenario.channel_at(i)));

  for (int i = 0; i <= scenario.horizon; ++i) {
    const StateFamily& e = trace.families[static_cast<std::size_t>(i)];
    TraceRow row;
    row.step = i;
    row.sup_pairwise_td = sup_pairwise_distance(e);
    if (options.limit) {
      row.delta_fw = deficiency_delta(e, *options.limit, options.solver).value;
      row.delta_bw = deficiency_delta(*options.limit, e, options.solver).value;
      row.Delta_to_limit = std::max(*row.delta_fw, *row.delta_bw);
    }
    if (options.step_deficiency && i < scenario.horizon) {
      row.delta_next = deficiency_delta(e, trace.families[static_cast<std::size_t>(i + 1)], options.solver).value;
    }
    for (const auto& probe : options.probes) {
      const auto states = select(e, probe.labels);
      row.divergences.push_back(evaluate(probe.spec, states, options.solver));
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

Channel BasisChain::composed(int step) const {
  const Eigen::Index d = basis.dim();
  return Channel::from_superoperator(superoperators.at(static_cast<std::size_t>(step)), d, d, 1e-8);
}

BasisChain basis_chain(const ChainScenario& scenario) {
  scenario.validate();
  const Eigen::Index d = scenario.initial.dim();
  BasisChain chain{state_basis(d), {}, {}};
  const auto labels = basis_labels(chain.basis.size());
  CMatrix s = CMatrix::Identity(d * d, d * d);
  for (int i = 0; i <= scenario.horizon; ++i) {
    if (i > 0) s = scenario.channel_at(i).superoperator() * s;
    std::vector<StateFamily::Entry> images;
    for (std::size_t k = 0; k < chain.basis.size(); ++k) {
      images.emplace_back(labels[k], DensityOperator::project(apply_superoperator(s, chain.basis.elements()[k]), kBasisClip));
    }
    chain.superoperators.push_back(s);
    chain.basis_families.emplace_back(std::move(images));
  }
  return chain;
}

std::string_view to_string(LimitMode mode) noexcept {
  switch (mode) {
    case LimitMode::Converged: return "Converged";
    case LimitMode::LimitCycle: return "LimitCycle";
    case LimitMode::Undetermined: return "Undetermined";
  }
  return "?";
}

LimitEstimate estimate_limit_family(const ChainScenario& scenario, const LimitOptions& options) {
  LimitEstimate est;
  const int n = scenario.horizon;
  const int m = options.window;
  if (m < 1 || n < 2 * m) {
    est.note = "horizon shorter than twice the window";
    return est;
  }
  const BasisChain chain = basis_chain(scenario);
  const auto& s = chain.superoperators;
  auto dist = [&s](int i, int j) { return (s[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(j)]).norm(); };
  for (int i = 1; i <= n; ++i) est.step_residuals.push_back(dist(i, i - 1));
  for (int i = m; i <= n; ++i) est.window_residuals.push_back(dist(i, i - m));

  const Eigen::Index d = scenario.initial.dim();
  for (const auto& [label, rho] : scenario.initial.entries()) {
    est.coefficients.push_back(expand(rho.op(), chain.basis));
    est.sup_alpha = std::max(est.sup_alpha, est.coefficients.back().cwiseAbs().maxCoeff());
  }

  bool cauchy = true;
  for (int i = n - m; i <= n && cauchy; ++i)
    for (int j = i + 1; j <= n && cauchy; ++j) cauchy = dist(i, j) <= options.tol;

  std::vector<HermitianOperator> final_images;
  for (const auto& [label, rho] : chain.basis_families.back().entries()) final_images.push_back(rho.op());
  const bool merged = !cauchy && max_pairwise(final_images) <= options.tol;

  int phase = n;
  if (cauchy || merged) {
    est.mode = LimitMode::Converged;
  } else {
    for (int p = 2; p <= m && est.mode == LimitMode::Undetermined; ++p) {
      bool periodic = true;
      for (int i = n - m + 1; i <= n && periodic; ++i) periodic = dist(i, i - p) <= options.tol;
      if (!periodic) continue;
      int onset = n - p;
      while (onset > 0 && dist(onset - 1, onset - 1 + p) <= options.tol) --onset;
      est.mode = LimitMode::LimitCycle;
      est.period = p;
      est.phase_step = onset;
      phase = onset;
    }
  }
  if (est.mode == LimitMode::Undetermined) {
    est.note = "no convergence or cycle of period <= window within the horizon";
    return est;
  }

  const auto labels = scenario.initial.labels();
  if (merged) {
    est.one_point = true;
    const DensityOperator sigma = DensityOperator::project(
        apply_superoperator(s.back(), DensityOperator::maximally_mixed(d).op()), kBasisClip);
    est.family = StateFamily::one_point(sigma, labels);
    est.basis_family = StateFamily::one_point(sigma, basis_labels(chain.basis.size()));
  } else {
    const StateFamily& images = chain.basis_families[static_cast<std::size_t>(phase)];
    std::vector<StateFamily::Entry> members;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const HermitianOperator h = combine(est.coefficients[t], images);
      if (min_eigenvalue(h) < -kLimitClip) {
        est.mode = LimitMode::Undetermined;
        est.note = "reconstructed limit state '" + labels[t] + "' is not positive semidefinite";
        est.family.reset();
        return est;
      }
      double clipped = 0.0;
      members.emplace_back(labels[t], DensityOperator::project(h, kLimitClip, &clipped));
      est.psd_clip = std::max(est.psd_clip, clipped);
    }
    est.family = StateFamily(std::move(members));
    est.basis_family = images;
  }

  if (est.mode == LimitMode::LimitCycle) {
    const StateFamily later = scenario.initial.mapped(chain.composed(phase + est.period));
    est.cycle_Delta = deficiency_Delta(*est.family, later, options.solver);
  }
  if (options.basis_deficiency_history) {
    for (const auto& fam : chain.basis_families) {
      est.basis_deficiency.push_back(deficiency_delta(*est.basis_family, fam, options.solver).value);
    }
  }
  return est;
}

ContractionResult contraction_sup(const Channel& channel, std::uint64_t seed) {
  if (channel.dim_in() != channel.dim_out()) throw Error(ErrorCode::DimensionMismatch, "contraction_sup needs a square channel");
  const Eigen::Index d = channel.dim_in();
  const CMatrix& s = channel.superoperator();
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));

  // Phi* satisfies vec(Phi*(M)^T) = S^T vec(M^T).
  auto adjoint = [&](const HermitianOperator& m) {
    const CMatrix mt = m.matrix().transpose();
    return HermitianOperator(unvec(s.transpose() * vec(mt), d).transpose());
  };
  auto climb = [&](CVector psi, CVector phi, ContractionResult& best) {
    double value = -1.0;
    for (int it = 0; it < 500; ++it) {
      const CMatrix diff = psi * psi.adjoint() - phi * phi.adjoint();
      const HermitianOperator x = apply_linear(channel, HermitianOperator(diff));
      const double current = trace_norm(x);
      if (current > best.value) {
        best.value = current;
        best.psi = psi;
        best.phi = phi;
      }
      if (current <= value + 1e-14) break;
      value = current;
      const auto ex = x.eigen();
      CMatrix sign = CMatrix::Zero(d, d);
      for (Eigen::Index k = 0; k < d; ++k) {
        const double lambda = ex.values(k);
        if (lambda > 0) sign += ex.vectors.col(k) * ex.vectors.col(k).adjoint();
        if (lambda < 0) sign -= ex.vectors.col(k) * ex.vectors.col(k).adjoint();
      }
      if (sign.isZero()) break;
      const auto ey = adjoint(HermitianOperator(sign)).eigen();
      psi = ey.vectors.col(d - 1);
      phi = ey.vectors.col(0);
    }
  };

  ContractionResult best;
  best.value = 0.0;
  best.psi = CVector::Unit(d, 0);
  best.phi = CVector::Unit(d, d > 1 ? 1 : 0);
  climb(best.psi, best.phi, best);
  int stale = 0;
  while (stale < 20 && best.restarts < 1000) {
    const double before = best.value;
    const CVector psi = ginibre(d, 1, rng).col(0).normalized();
    const CVector phi = ginibre(d, 1, rng).col(0).normalized();
    climb(psi, phi, best);
    ++best.restarts;
    stale = best.value > before + 1e-9 ? 0 : stale + 1;
  }
  best.value = std::clamp(best.value, 0.0, 2.0);
  return best;
}

ErgodicityReport weak_ergodicity_test(const ChainScenario& scenario, double tol, bool cross_check,
                                      const conic::SolverOptions& options) {
  const BasisChain chain = basis_chain(scenario);
  ErgodicityReport report;
  StateFamily e = scenario.initial;
  for (int i = 0; i <= scenario.horizon; ++i) {
    const Channel si = chain.composed(i);
    const double c = contraction_sup(si).value;
    report.contraction.push_back(c);
    if (!report.ergodic_at && c <= tol) report.ergodic_at = i;
    if (cross_check) {
      if (i > 0) e = e.mapped(scenario.channel_at(i));
      report.chebyshev_radius.push_back(chebyshev_radius(e, options));
    }
  }
  return report;
}

FixedPointCheck fixed_point_check(const Channel& gamma, const StateFamily& family, double tol,
                                  const conic::SolverOptions& options) {
  if (gamma.dim_in() != gamma.dim_out() || gamma.dim_in() != family.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "fixed-point check needs a square channel on the family's space");
  }
  const double value = deficiency_Delta(family.mapped(gamma), family, options);
  return {value, value <= tol};
}

MonotoneTrace monotone_trace(const ChainScenario& scenario, const DivergenceProbe& probe,
                             const std::optional<StateFamily>& limit, const conic::SolverOptions& options) {
  EvolveOptions eo;
  eo.probes.push_back(probe);
  eo.solver = options;
  const ConvergenceTrace trace = evolve(scenario, eo);
  MonotoneTrace out;
  for (const auto& row : trace.rows) out.values.push_back(row.divergences.front());
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    out.max_upward_violation = std::max(out.max_upward_violation, out.values[i] - out.values[i - 1]);
  }
  if (limit) {
    out.limit_value = evaluate(probe.spec, select(*limit, probe.labels), options);
    out.final_gap = std::abs(out.values.back() - *out.limit_value);
  }
  return out;
}

}  // namespace lecam
