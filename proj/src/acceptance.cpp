#include "lecam/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>

#include "lecam/classical.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/divergences.hpp"
#include "lecam/markov.hpp"
#include "lecam/random.hpp"

namespace lecam::acceptance {

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

StateFamily random_family(Eigen::Index d, std::size_t k, Rng& rng) {
  std::vector<DensityOperator> states;
  for (std::size_t i = 0; i < k; ++i) states.push_back(random_density(d, rng));
  return StateFamily::from_states(states);
}

// Pure states with probability 1/3, so rank-deficient inputs are covered.
DensityOperator random_qubit(Rng& rng, int k) {
  return k % 3 == 0 ? random_pure_state(2, rng) : random_density(2, rng);
}

ProbabilityVector random_vector(Eigen::Index n, Rng& rng) {
  const std::vector<double> p = random_probability(n, rng);
  return ProbabilityVector(Eigen::Map<const RVector>(p.data(), n));
}

StateFamily computational_dichotomy() {
  return StateFamily::from_states({DensityOperator::basis_projector(2, 0), DensityOperator::basis_projector(2, 1)});
}

double upward_violation(const std::vector<double>& values) {
  double worst = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) worst = std::max(worst, values[i] - values[i - 1]);
  return worst;
}

struct NamedChain {
  std::string name;
  ChainScenario scenario;
};

// The convergence scenarios: eleven homogeneous chains followed by nine
// random inhomogeneous ones.
std::vector<NamedChain> convergence_scenarios() {
  std::vector<NamedChain> out;
  Rng rng(4040);
  const auto add = [&](std::string name, Eigen::Index d, std::variant<ChainScenario::Homogeneous, ChainScenario::Explicit,
                                                                         ChainScenario::RandomHaar>
                                                             channels,
                       int horizon) {
    out.push_back({std::move(name), ChainScenario{random_family(d, 3, rng), std::move(channels), horizon}});
  };
  for (const Eigen::Index d : {2, 3}) {
    for (const double p : {0.3, 0.5}) {
      add(fmt("depolarizing(%g) d=%d", p, static_cast<int>(d)), d, ChainScenario::Homogeneous{depolarizing(p, d)}, 60);
    }
  }
  for (const Eigen::Index d : {2, 3}) {
    for (const double l : {0.3, 0.6}) {
      add(fmt("dephasing(%g) d=%d", l, static_cast<int>(d)), d, ChainScenario::Homogeneous{dephasing(l, d)}, 60);
    }
  }
  for (const double g : {0.3, 0.5, 0.8}) {
    add(fmt("amplitude_damping(%g)", g), 2, ChainScenario::Homogeneous{amplitude_damping(g)}, 120);
  }
  for (int k = 0; k < 9; ++k) {
    const Eigen::Index d = k < 6 ? 2 : 3;
    const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(k);
    add(fmt("random seed %llu d=%d", static_cast<unsigned long long>(seed), static_cast<int>(d)), d,
        ChainScenario::RandomHaar{seed}, 60);
  }
  return out;
}

constexpr std::size_t kHomogeneousScenarios = 11;

using Suite = std::function<SuiteResult(const conic::SolverOptions&, const SolveAudit&)>;

struct SuiteDef {
  std::string name;
  int criterion;
  Suite run;
};

// Criterion 1: delta(E, L(E)) vanishes.
SuiteResult randomization(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index d = 2 + k % 2;
    const StateFamily e = random_family(d, 2 + static_cast<std::size_t>(k / 2) % 2, rng);
    const Channel lambda = random_channel(d, derive_seed(1001, static_cast<std::uint64_t>(k)));
    worst = std::max(worst, deficiency_delta(e, e.mapped(lambda), solver).value);
    ++r.cases;
  }
  r.pass = worst <= 1e-6;
  r.detail = fmt("max delta(E, L(E)) = %.3e (tol 1e-6)", worst);
  return r;
}

// Criterion 2: LP and SDP deficiencies agree on diagonal families.
SuiteResult classical_cross_check(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1002);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index n = 2 + k % 3;
    const std::size_t size = 2 + static_cast<std::size_t>(k / 3) % 3;
    std::vector<ProbabilityVector> e, f;
    for (std::size_t t = 0; t < size; ++t) {
      e.push_back(random_vector(n, rng));
      f.push_back(random_vector(n, rng));
    }
    const ClassicalFamily ce = ClassicalFamily::from_vectors(e);
    const ClassicalFamily cf = ClassicalFamily::from_vectors(f);
    const double lp = lp_deficiency(ce, cf, solver).value;
    const double sdp = deficiency_delta(ce.to_quantum(), cf.to_quantum(), solver).value;
    worst = std::max(worst, std::abs(lp - sdp));
    ++r.cases;
  }
  const ClassicalFamily poles = ClassicalFamily::from_vectors({{1.0, 0.0}, {0.0, 1.0}});
  const ClassicalFamily noisy = ClassicalFamily::from_vectors({{0.9, 0.1}, {0.1, 0.9}});
  const double fw = lp_deficiency(poles, noisy, solver).value;
  const double bw = lp_deficiency(noisy, poles, solver).value;
  const double fw_sdp = deficiency_delta(poles.to_quantum(), noisy.to_quantum(), solver).value;
  const double bw_sdp = deficiency_delta(noisy.to_quantum(), poles.to_quantum(), solver).value;
  const double fixture = std::max({std::abs(fw), std::abs(bw - 0.2), std::abs(fw_sdp), std::abs(bw_sdp - 0.2)});
  r.cases += 4;
  r.pass = worst <= 1e-6 && fixture <= 1e-6;
  r.detail = fmt("max |LP - SDP| = %.3e (tol 1e-6); fixture 0 / 0.2 off by %.3e (tol 1e-6)", worst, fixture);
  return r;
}

// Criterion 3, triangle clauses.
SuiteResult triangle(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1003);
  double worst_delta = -std::numeric_limits<double>::infinity();
  double worst_Delta = worst_delta;
  for (int k = 0; k < 100; ++k) {
    const std::size_t size = 2 + static_cast<std::size_t>(k % 2);
    const StateFamily a = random_family(2, size, rng);
    const StateFamily b = random_family(2, size, rng);
    const StateFamily c = random_family(2, size, rng);
    const double ab = deficiency_delta(a, b, solver).value, ba = deficiency_delta(b, a, solver).value;
    const double bc = deficiency_delta(b, c, solver).value, cb = deficiency_delta(c, b, solver).value;
    const double ac = deficiency_delta(a, c, solver).value, ca = deficiency_delta(c, a, solver).value;
    worst_delta = std::max(worst_delta, ac - ab - bc);
    worst_Delta = std::max(worst_Delta, std::max(ac, ca) - std::max(ab, ba) - std::max(bc, cb));
    ++r.cases;
  }
  r.pass = worst_delta <= 1e-6 && worst_Delta <= 1e-6;
  r.detail = fmt("max delta(A,C) - delta(A,B) - delta(B,C) = %.3e, same for Delta %.3e (slack 1e-6)", worst_delta,
                 worst_Delta);
  return r;
}

// Criterion 3, CPTP monotonicity of Delta, evaluated as stated.
SuiteResult monotonicity(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1004);
  double worst = -std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t size = 2 + static_cast<std::size_t>(k % 2);
    const StateFamily e = random_family(2, size, rng);
    const StateFamily f = random_family(2, size, rng);
    const Channel lambda = random_channel(2, derive_seed(1004, static_cast<std::uint64_t>(k)));
    const double before = deficiency_Delta(e, f, solver);
    const double after = deficiency_Delta(e.mapped(lambda), f.mapped(lambda), solver);
    worst = std::max(worst, after - before);
    if (after - before > 1e-6) ++violations;
    ++r.cases;
  }
  // {|0>,|1>} and {|+>,|->} are unitarily equivalent, yet complete dephasing
  // keeps the first pair distinguishable and merges the second.
  const StateFamily e = computational_dichotomy();
  CVector plus(2), minus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  const StateFamily f = StateFamily::from_states({DensityOperator::pure(plus), DensityOperator::pure(minus)});
  const Channel dephase = dephasing(1.0, 2);
  const double before = deficiency_Delta(e, f, solver);
  const double certified_after = deficiency_delta(f.mapped(dephase), e.mapped(dephase), solver).dual_value;
  r.counterexample_certified = before <= 1e-6 && certified_after >= 1.0 - 1e-6;
  r.pass = violations == 0 && worst <= 1e-6;
  r.detail = fmt("%d/100 pairs exceed slack 1e-6, worst Delta(L(E),L(F)) - Delta(E,F) = %.3e; counterexample "
                 "Delta(E,F) = %.1e, certified Delta(L(E),L(F)) >= %.6f%s",
                 violations, worst, before, certified_after, r.counterexample_certified ? " [certified]" : "");
  return r;
}

// Criterion 4: limit, monotone order, monotone distance to the limit, proof bound.
SuiteResult convergence(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  double worst_next = 0.0, worst_up = 0.0, worst_bound = -std::numeric_limits<double>::infinity();
  std::vector<std::string> unconverged;
  for (const auto& [name, scenario] : convergence_scenarios()) {
    ++r.cases;
    LimitOptions lo;
    lo.basis_deficiency_history = true;
    lo.solver = solver;
    const LimitEstimate est = estimate_limit_family(scenario, lo);
    if (est.mode != LimitMode::Converged || !est.family) {
      unconverged.push_back(name);
      continue;
    }
    EvolveOptions eo;
    eo.limit = est.family;
    eo.step_deficiency = true;
    eo.solver = solver;
    const ConvergenceTrace trace = evolve(scenario, eo);
    std::vector<double> to_limit;
    const double d2 = static_cast<double>(scenario.initial.dim() * scenario.initial.dim());
    for (const auto& row : trace.rows) {
      if (row.delta_next) worst_next = std::max(worst_next, *row.delta_next);
      to_limit.push_back(*row.Delta_to_limit);
      const double bound = d2 * est.sup_alpha * est.basis_deficiency[static_cast<std::size_t>(row.step)];
      worst_bound = std::max(worst_bound, *row.delta_bw - bound);
    }
    worst_up = std::max(worst_up, upward_violation(to_limit));
  }
  r.pass = unconverged.empty() && worst_next <= 1e-6 && worst_up <= 1e-6 && worst_bound <= 1e-6;
  r.detail = fmt("%d/%d converged; max delta(E_i,E_i+1) = %.3e, max rise of Delta(E_i,E_inf) = %.3e, "
                 "max delta(E_inf,E_i) - d^2 sup|a| delta(basis) = %.3e (all tol 1e-6)",
                 r.cases - static_cast<int>(unconverged.size()), r.cases, worst_next, worst_up, worst_bound);
  for (const auto& n : unconverged) r.detail += "; not converged: " + n;
  return r;
}

// Criterion 5: closed-form contraction, ergodic_at, and unitary chains.
SuiteResult ergodicity(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  const ChainScenario depol{computational_dichotomy(), ChainScenario::Homogeneous{depolarizing(0.3, 2)}, 50};
  const ErgodicityReport rep = weak_ergodicity_test(depol, 1e-6, false, solver);
  double worst_closed = 0.0;
  for (int i = 0; i <= 30; ++i) {
    worst_closed = std::max(worst_closed, std::abs(rep.contraction[static_cast<std::size_t>(i)] - 2.0 * std::pow(0.7, i)));
  }
  r.cases += 2;
  const bool at41 = rep.ergodic_at == 41;

  Rng rng(1005);
  std::vector<ChainScenario> unitary;
  unitary.push_back({random_family(2, 3, rng), ChainScenario::Homogeneous{unitary_channel(haar_unitary(2, rng))}, 15});
  unitary.push_back({random_family(3, 3, rng), ChainScenario::Homogeneous{unitary_channel(haar_unitary(3, rng))}, 10});
  ChainScenario::Explicit varying;
  for (int i = 0; i < 15; ++i) varying.channels.push_back(unitary_channel(haar_unitary(2, rng)));
  unitary.push_back({random_family(2, 2, rng), varying, 15});
  bool none = true;
  double worst_Delta = 0.0;
  for (const auto& s : unitary) {
    ++r.cases;
    none = none && !weak_ergodicity_test(s, 1e-6, false, solver).ergodic_at.has_value();
    const ConvergenceTrace trace = evolve(s);
    for (const auto& fam : trace.families) worst_Delta = std::max(worst_Delta, deficiency_Delta(fam, s.initial, solver));
  }
  r.pass = worst_closed <= 1e-8 && at41 && none && worst_Delta <= 1e-6;
  r.detail = fmt("depolarizing(0.3): max |c_i - 2*0.7^i| (i<=30) = %.3e (tol 1e-8), ergodic_at = %s (expect 41); "
                 "unitary chains ergodic_at None: %s, max Delta(E_i,E_0) = %.3e (tol 1e-6)",
                 worst_closed, rep.ergodic_at ? std::to_string(*rep.ergodic_at).c_str() : "None", none ? "yes" : "no",
                 worst_Delta);
  return r;
}

// Criterion 6: the limit of a homogeneous chain is a fixed point.
SuiteResult fixed_point(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  double worst = 0.0;
  int failed = 0;
  const auto scenarios = convergence_scenarios();
  for (std::size_t k = 0; k < kHomogeneousScenarios; ++k) {
    const ChainScenario& s = scenarios[k].scenario;
    ++r.cases;
    LimitOptions lo;
    lo.solver = solver;
    const LimitEstimate est = estimate_limit_family(s, lo);
    if (est.mode != LimitMode::Converged || !est.family) {
      ++failed;
      continue;
    }
    const FixedPointCheck check = fixed_point_check(s.channel_at(1), *est.family, 1e-5, solver);
    worst = std::max(worst, check.Delta_value);
    if (!check.pass) ++failed;
  }
  r.pass = failed == 0;
  r.detail = fmt("%d/%d homogeneous limits fixed, max Delta(G(E_inf), E_inf) = %.3e (tol 1e-5)", r.cases - failed,
                 r.cases, worst);
  return r;
}

// Criterion 7: divergence traces decrease to the value at the analytic limit.
SuiteResult divergence_convergence(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1007);
  const ChainScenario s{random_family(2, 3, rng), ChainScenario::Homogeneous{depolarizing(0.3, 2)}, 40};
  const StateFamily limit = StateFamily::one_point(DensityOperator::maximally_mixed(2), s.initial.labels());
  double worst_up = 0.0, worst_gap = 0.0;
  for (const DivergenceSpec& spec : {DivergenceSpec::trace_distance(), DivergenceSpec::one_minus_fidelity(),
                                     DivergenceSpec::alpha_divergence(0.5), DivergenceSpec::alpha_divergence(-0.5)}) {
    for (const std::vector<std::string>& labels : {std::vector<std::string>{"0", "1"}, std::vector<std::string>{"2", "0"}}) {
      const MonotoneTrace t = monotone_trace(s, {spec, labels}, limit, solver);
      worst_up = std::max(worst_up, t.max_upward_violation);
      worst_gap = std::max(worst_gap, t.final_gap.value_or(std::numeric_limits<double>::infinity()));
      ++r.cases;
    }
  }
  r.pass = worst_up <= 1e-9 && worst_gap <= 1e-4;
  r.detail = fmt("max upward step = %.3e (tol 1e-9), max |D_N - D(limit)| = %.3e (tol 1e-4)", worst_up, worst_gap);
  return r;
}

// Criterion 8: Fuchs-van de Graaf and the fidelity angle triangle inequality.
SuiteResult fuchs_van_de_graaf(const conic::SolverOptions&, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1008);
  double worst_fvdg = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const DensityOperator a = random_qubit(rng, k);
    const DensityOperator b = random_qubit(rng, k + 1);
    const double f = fidelity(a, b);
    const double half = 0.5 * trace_norm(a.op() - b.op());
    worst_fvdg = std::max({worst_fvdg, (1.0 - f) - half, half - std::sqrt(std::max(0.0, 1.0 - f * f))});
    ++r.cases;
  }
  double worst_angle = -std::numeric_limits<double>::infinity();
  const auto angle = [](const DensityOperator& x, const DensityOperator& y) { return std::acos(std::min(1.0, fidelity(x, y))); };
  for (int k = 0; k < 1000; ++k) {
    const DensityOperator a = random_qubit(rng, k);
    const DensityOperator b = random_qubit(rng, k + 1);
    const DensityOperator c = random_qubit(rng, k + 2);
    worst_angle = std::max(worst_angle, angle(a, c) - angle(a, b) - angle(b, c));
    ++r.cases;
  }
  r.pass = worst_fvdg <= 1e-9 && worst_angle <= 1e-9;
  r.detail = fmt("max Fuchs-van de Graaf excess = %.3e, max angle triangle excess = %.3e (slack 1e-9)", worst_fvdg,
                 worst_angle);
  return r;
}

// Criterion 8: ||A^a - B^a|| <= ||A - B||^a for PSD A, B.
SuiteResult operator_monotone(const conic::SolverOptions&, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1009);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 500; ++k) {
    const Eigen::Index d = 2 + k % 3;
    const double scale = std::pow(10.0, static_cast<double>(k % 5) - 2.0);
    const HermitianOperator a = scale * static_cast<const HermitianOperator&>(random_density(d, rng));
    const HermitianOperator b = static_cast<const HermitianOperator&>(random_density(d, rng, 1 + k % d));
    for (const double alpha : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, operator_norm(matrix_power(a, alpha) - matrix_power(b, alpha)) -
                                  std::pow(operator_norm(a - b), alpha));
    }
    ++r.cases;
  }
  r.pass = worst <= 1e-9;
  r.detail = fmt("max ||A^a - B^a|| - ||A - B||^a = %.3e over a in {0.25, 0.5, 0.75} (slack 1e-9)", worst);
  return r;
}

// Criterion 9: Chebyshev radius against the Bloch enclosing ball.
SuiteResult chebyshev(const conic::SolverOptions& solver, const SolveAudit&) {
  SuiteResult r;
  Rng rng(1010);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t size = 2 + static_cast<std::size_t>(k % 4);
    std::vector<DensityOperator> states;
    std::vector<Eigen::Vector3d> points;
    for (std::size_t j = 0; j < size; ++j) {
      states.push_back(random_qubit(rng, k + static_cast<int>(j)));
      points.push_back(states.back().bloch());
    }
    const StateFamily e = StateFamily::from_states(states);
    const StateFamily point = StateFamily::one_point(random_density(2, rng), e.labels());
    worst = std::max(worst, std::abs(deficiency_delta(point, e, solver).value - enclosing_ball_radius(points)));
    ++r.cases;
  }
  const StateFamily poles = computational_dichotomy();
  const double pole_radius =
      deficiency_delta(StateFamily::one_point(DensityOperator::maximally_mixed(2), poles.labels()), poles, solver).value;
  ++r.cases;
  r.pass = worst <= 1e-5 && std::abs(pole_radius - 1.0) <= 1e-6;
  r.detail = fmt("max |delta(point, E) - Bloch ball radius| = %.3e (tol 1e-5); poles radius %.9f (expect 1)", worst,
                 pole_radius);
  return r;
}

// Criterion 10: analytic fixtures, then the audit of every solve so far.
SuiteResult solver_suite(const conic::SolverOptions& solver, const SolveAudit& audit) {
  using namespace conic;
  SuiteResult r;
  SdpProblem shifted;
  {
    const int t = shifted.add_block(BlockKind::Free, 1);
    const int s = shifted.add_block(BlockKind::RealPsd, 1);
    shifted.objective().add(t, 0, 0, 1.0);
    LinearFunctional f;
    f.add(t, 0, 0, 1.0).add(s, 0, 0, -1.0);
    shifted.add_constraint(f, 3.0);
    shifted.set_interior_point({{CMatrix::Constant(1, 1, 4.0), CMatrix::Constant(1, 1, 1.0)}});
  }
  SdpProblem eig;
  {
    const int x = eig.add_block(BlockKind::RealPsd, 2);
    eig.objective().add(x, 0, 0, 1.0).add(x, 1, 1, 2.0);
    LinearFunctional tr;
    tr.add_trace(x, 1.0);
    eig.add_constraint(tr, 1.0);
    eig.set_interior_point({{CMatrix::Identity(2, 2) * 0.5}});
  }
  double worst = 0.0;
  bool optimal = true;
  for (const auto& [problem, exact] : {std::pair<const SdpProblem*, double>{&shifted, 3.0}, {&eig, 1.0}}) {
    const SdpSolution sol = solve(*problem, solver);
    const Residuals kkt = check_kkt(*problem, sol);
    optimal = optimal && sol.status == SolveStatus::Optimal;
    worst = std::max({worst, std::abs(sol.primal_value - exact), kkt.primal_infeasibility, kkt.dual_infeasibility,
                      kkt.relative_gap});
    ++r.cases;
  }
  r.cases += static_cast<int>(std::min<std::int64_t>(audit.solves(), std::numeric_limits<int>::max()));
  r.pass = optimal && worst <= 1e-7 && audit.duality_violations() == 0 && audit.nondeterministic() == 0;
  r.detail = fmt("fixtures t>=3 -> 3 and min <diag(1,2),X> -> 1 off by %.3e (tol 1e-7); audited %lld solves: "
                 "%lld weak duality violations (worst dual - primal %.3e, slack 1e-9), %lld nondeterministic",
                 worst, static_cast<long long>(audit.solves()), static_cast<long long>(audit.duality_violations()),
                 audit.worst_duality_gap(), static_cast<long long>(audit.nondeterministic()));
  return r;
}

const std::vector<SuiteDef>& registry() {
  static const std::vector<SuiteDef> suites = {
      {"randomization", 1, randomization},
      {"classical-cross-check", 2, classical_cross_check},
      {"triangle", 3, triangle},
      {"monotonicity", 3, monotonicity},
      {"convergence", 4, convergence},
      {"ergodicity", 5, ergodicity},
      {"fixed-point", 6, fixed_point},
      {"divergence-convergence", 7, divergence_convergence},
      {"fuchs-van-de-graaf", 8, fuchs_van_de_graaf},
      {"operator-monotone", 8, operator_monotone},
      {"chebyshev", 9, chebyshev},
      {"solver", 10, solver_suite},
  };
  return suites;
}

const SuiteDef& find(std::string_view name) {
  for (const auto& s : registry()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::ConfigError, "unknown suite '" + std::string(name) + "'");
}

bool same_bits(const conic::SdpSolution& a, const conic::SdpSolution& b) {
  if (a.status != b.status || a.iterations != b.iterations) return false;
  if (std::memcmp(&a.primal_value, &b.primal_value, sizeof(double)) != 0) return false;
  if (std::memcmp(&a.dual_value, &b.dual_value, sizeof(double)) != 0) return false;
  if (a.y.size() != b.y.size() || a.x.blocks.size() != b.x.blocks.size()) return false;
  if (a.y.size() > 0 && std::memcmp(a.y.data(), b.y.data(), sizeof(double) * static_cast<std::size_t>(a.y.size())) != 0) {
    return false;
  }
  for (std::size_t k = 0; k < a.x.blocks.size(); ++k) {
    const CMatrix& p = a.x.blocks[k];
    const CMatrix& q = b.x.blocks[k];
    if (p.rows() != q.rows() || p.cols() != q.cols()) return false;
    if (p.size() > 0 && std::memcmp(p.data(), q.data(), sizeof(Complex) * static_cast<std::size_t>(p.size())) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : registry()) out.push_back(s.name);
    return out;
  }();
  return names;
}

int criterion_of(std::string_view suite) { return find(suite).criterion; }

void SolveAudit::on_solve(const conic::SdpProblem& problem, const conic::SolverOptions& options,
                          const conic::SdpSolution& solution) {
  ++solves_;
  const double excess = solution.dual_value - solution.primal_value;
  worst_ = std::max(worst_, excess);
  if (excess > 1e-9) ++duality_violations_;
  conic::SolverOptions again = options;
  again.observer = nullptr;
  again.debug_dump = nullptr;
  again.iteration_log = nullptr;
  if (!same_bits(solution, conic::solve(problem, again))) ++nondeterministic_;
}

Runner::Runner(Options options) : options_(options) {}

conic::SolverOptions Runner::solver() {
  conic::SolverOptions o;
  o.gap_tol = options_.solver_tol;
  o.feas_tol = options_.solver_tol;
  o.observer = &audit_;
  return o;
}

SuiteResult Runner::run(std::string_view suite) {
  const SuiteDef& def = find(suite);
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = def.run(solver(), audit_);
  } catch (const Error& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.name = def.name;
  r.criterion = def.criterion;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> by_criterion(const std::vector<SuiteResult>& results) {
  std::map<int, CriterionResult> grouped;
  for (const auto& r : results) {
    CriterionResult& c = grouped[r.criterion];
    c.id = r.criterion;
    c.suites.push_back(&r);
  }
  std::vector<CriterionResult> out;
  for (auto& [id, c] : grouped) {
    c.pass = std::all_of(c.suites.begin(), c.suites.end(), [](const SuiteResult* s) { return s->pass; });
    c.certified_failure = !c.pass && std::all_of(c.suites.begin(), c.suites.end(), [](const SuiteResult* s) {
      return s->pass || s->counterexample_certified;
    });
    out.push_back(std::move(c));
  }
  return out;
}

int exit_status(const std::vector<SuiteResult>& results, const std::set<int>& known_failures) {
  for (const auto& c : by_criterion(results)) {
    if (known_failures.count(c.id)) {
      if (!c.certified_failure) return 1;
    } else if (!c.pass) {
      return 1;
    }
  }
  return 0;
}

void print_suite_table(std::ostream& out, const std::vector<SuiteResult>& results) {
  out << fmt("%-24s %4s %7s %6s %8s  %s\n", "suite", "crit", "cases", "result", "seconds", "detail");
  for (const auto& r : results) {
    out << fmt("%-24s %4d %7d %6s %8.1f  ", r.name.c_str(), r.criterion, r.cases, r.pass ? "PASS" : "FAIL", r.seconds)
        << r.detail << "\n";
  }
}

void print_criteria(std::ostream& out, const std::vector<SuiteResult>& results, const std::set<int>& known_failures) {
  for (const auto& c : by_criterion(results)) {
    std::string verdict = c.pass ? "PASS" : "FAIL";
    if (!c.pass && known_failures.count(c.id)) {
      verdict += c.certified_failure ? " (known failure, certified counterexample)" : " (known failure, NOT certified)";
    } else if (c.pass && known_failures.count(c.id)) {
      verdict += " (listed as a known failure but passed)";
    }
    out << "criterion " << c.id << ": " << verdict << "\n";
    for (const SuiteResult* s : c.suites) out << "  " << s->name << ": " << (s->pass ? "pass" : "fail") << "; " << s->detail << "\n";
  }
}

namespace {

struct Ball {
  Eigen::Vector3d center;
  double radius;
};

std::optional<Ball> circumscribed(const std::vector<Eigen::Vector3d>& s) {
  if (s.size() == 1) return Ball{s[0], 0.0};
  if (s.size() == 2) return Ball{0.5 * (s[0] + s[1]), 0.5 * (s[0] - s[1]).norm()};
  if (s.size() == 3) {
    const Eigen::Vector3d u = s[1] - s[0];
    const Eigen::Vector3d v = s[2] - s[0];
    const Eigen::Vector3d w = u.cross(v);
    if (w.squaredNorm() < 1e-14) return std::nullopt;
    const Eigen::Vector3d c =
        s[0] + (u.squaredNorm() * v.cross(w) + v.squaredNorm() * w.cross(u)) / (2.0 * w.squaredNorm());
    return Ball{c, (c - s[0]).norm()};
  }
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    a.row(i) = 2.0 * (s[i + 1] - s[0]).transpose();
    b(i) = s[i + 1].squaredNorm() - s[0].squaredNorm();
  }
  if (std::abs(a.determinant()) < 1e-10) return std::nullopt;
  const Eigen::Vector3d c = a.fullPivLu().solve(b);
  return Ball{c, (c - s[0]).norm()};
}

}  // namespace

double enclosing_ball_radius(const std::vector<Eigen::Vector3d>& points) {
  const std::size_t n = points.size();
  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](const std::vector<Eigen::Vector3d>& support) {
    const auto ball = circumscribed(support);
    if (!ball || ball->radius >= best) return;
    for (const auto& p : points) {
      if ((p - ball->center).norm() > ball->radius + 1e-10) return;
    }
    best = ball->radius;
  };
  for (std::size_t i = 0; i < n; ++i) {
    consider({points[i]});
    for (std::size_t j = i + 1; j < n; ++j) {
      consider({points[i], points[j]});
      for (std::size_t k = j + 1; k < n; ++k) {
        consider({points[i], points[j], points[k]});
        for (std::size_t l = k + 1; l < n; ++l) consider({points[i], points[j], points[k], points[l]});
      }
    }
  }
  return best;
}

}  // namespace lecam::acceptance
