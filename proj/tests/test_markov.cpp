#include <cmath>
#include <vector>

#include "doctest.h"
#include "lecam/markov.hpp"
#include "lecam/random.hpp"
#include "test_support.hpp"

using namespace lecam;
using namespace lecam::testing;

namespace {

ChainScenario homogeneous(const StateFamily& e, const Channel& c, int horizon) {
  return ChainScenario{e, ChainScenario::Homogeneous{c}, horizon};
}

CMatrix z_rotation(double angle) {
  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = std::exp(Complex(0.0, -0.5 * angle));
  u(1, 1) = std::exp(Complex(0.0, 0.5 * angle));
  return u;
}

// Stationary distribution of a column-stochastic matrix by power iteration.
RVector stationary(const RMatrix& m) {
  RVector p = RVector::Constant(m.cols(), 1.0 / static_cast<double>(m.cols()));
  for (int k = 0; k < 10000; ++k) p = m * p;
  return p / p.sum();
}

}  // namespace

TEST_CASE("evolve under identity channels is constant") {
  Rng rng(81);
  const StateFamily e = random_family(3, 3, rng);
  const ConvergenceTrace t = evolve(homogeneous(e, identity_channel(3), 6));
  REQUIRE(t.rows.size() == 7);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].step == static_cast<int>(i));
    CHECK(family_distance(t.families[i], e) < 1e-12);
    CHECK(t.rows[i].sup_pairwise_td == doctest::Approx(t.rows[0].sup_pairwise_td));
  }
}

TEST_CASE("evolve under a constant channel collapses after one step") {
  Rng rng(82);
  const StateFamily e = random_family(2, 3, rng);
  const DensityOperator sigma = random_density(2, rng);
  const ConvergenceTrace t = evolve(homogeneous(e, constant_channel(sigma, 2), 4));
  for (std::size_t i = 1; i < t.families.size(); ++i) {
    CHECK(family_distance(t.families[i], StateFamily::one_point(sigma, e.labels())) < 1e-12);
    CHECK(t.rows[i].sup_pairwise_td < 1e-12);
  }
}

TEST_CASE("depolarizing contracts the pairwise distance geometrically") {
  const double p = 0.3;
  const ConvergenceTrace t = evolve(homogeneous(computational_dichotomy(), depolarizing(p, 2), 20));
  for (const auto& row : t.rows) CHECK(std::abs(row.sup_pairwise_td - 2.0 * std::pow(1.0 - p, row.step)) < 1e-12);
}

TEST_CASE("evolve fills the deficiency and divergence columns") {
  const StateFamily e = computational_dichotomy();
  EvolveOptions opts;
  opts.limit = StateFamily::one_point(DensityOperator::maximally_mixed(2), e.labels());
  opts.step_deficiency = true;
  opts.probes.push_back({DivergenceSpec::trace_distance(), {"0", "1"}});
  opts.probes.push_back({DivergenceSpec::one_minus_fidelity(), {"0", "1"}});
  const ConvergenceTrace t = evolve(homogeneous(e, depolarizing(0.5, 2), 4), opts);
  REQUIRE(t.divergence_names == std::vector<std::string>{"trace_distance", "one_minus_fidelity"});
  for (const auto& row : t.rows) {
    REQUIRE(row.Delta_to_limit.has_value());
    CHECK(*row.delta_fw <= 1e-6);
    CHECK(std::abs(*row.delta_bw - row.sup_pairwise_td / 2.0) <= 1e-6);
    CHECK(*row.Delta_to_limit == std::max(*row.delta_fw, *row.delta_bw));
    CHECK(row.delta_next.has_value() == (row.step < 4));
    CHECK(row.divergences.size() == 2);
    CHECK(std::abs(row.divergences[0] - row.sup_pairwise_td) < 1e-12);
  }
}

TEST_CASE("basis chain examples") {
  Rng rng(83);
  const BasisChain id = basis_chain(homogeneous(random_family(2, 2, rng), identity_channel(2), 3));
  for (const auto& s : id.superoperators) CHECK(max_abs(s - CMatrix::Identity(4, 4)) == 0.0);
  const BasisChain flip = basis_chain(homogeneous(random_family(2, 2, rng), unitary_channel(pauli_x()), 6));
  for (std::size_t i = 2; i < flip.superoperators.size(); ++i) {
    CHECK(max_abs(flip.superoperators[i] - flip.superoperators[i - 2]) < 1e-14);
    CHECK(max_abs(flip.superoperators[i] - flip.superoperators[i - 1]) > 0.5);
  }
}

TEST_CASE("basis chain agrees with stepwise evolution") {
  Rng rng(84);
  const StateFamily e = random_family(3, 3, rng);
  const ChainScenario s{e, ChainScenario::RandomHaar{17}, 8};
  const BasisChain chain = basis_chain(s);
  const ConvergenceTrace t = evolve(s);
  for (int i = 0; i <= 8; ++i) {
    const Channel si = chain.composed(i);
    CHECK(family_distance(e.mapped(si), t.families[static_cast<std::size_t>(i)]) < 1e-9);
    for (std::size_t k = 0; k < chain.basis.size(); ++k) {
      const HermitianOperator direct = apply_linear(si, chain.basis.elements()[k]);
      CHECK(max_abs(direct.matrix() - chain.basis_families[static_cast<std::size_t>(i)].state(k).matrix()) < 1e-10);
    }
  }
}

TEST_CASE("random chains are reproducible") {
  Rng rng(85);
  const ChainScenario s{random_family(2, 2, rng), ChainScenario::RandomHaar{5}, 4};
  for (int i = 1; i <= 4; ++i) CHECK(s.channel_at(i).choi() == s.channel_at(i).choi());
  CHECK(s.channel_at(1).choi() != s.channel_at(2).choi());
  CHECK(s.channel_at(3).choi() == random_channel(2, derive_seed(5, 3)).choi());
}

TEST_CASE("scenario validation") {
  Rng rng(86);
  const StateFamily e = random_family(2, 2, rng);
  CHECK_THROWS_AS(homogeneous(e, identity_channel(3), 2).validate(), Error);
  const ChainScenario short_chain{e, ChainScenario::Explicit{{identity_channel(2)}}, 3};
  CHECK_THROWS_AS(short_chain.validate(), Error);
  CHECK_THROWS_AS(evolve(short_chain), Error);
}

TEST_CASE("depolarizing limit is the maximally mixed one-point family") {
  Rng rng(87);
  const StateFamily e = random_family(2, 3, rng);
  const LimitEstimate est = estimate_limit_family(homogeneous(e, depolarizing(0.3, 2), 80));
  REQUIRE(est.mode == LimitMode::Converged);
  REQUIRE(est.family.has_value());
  CHECK(family_distance(*est.family, StateFamily::one_point(DensityOperator::maximally_mixed(2), e.labels())) <= 1e-6);
  CHECK(fixed_point_check(depolarizing(0.3, 2), *est.family).pass);
}

TEST_CASE("unitary flip chain is a limit cycle of period 2") {
  const StateFamily e = computational_dichotomy();
  const LimitEstimate est = estimate_limit_family(homogeneous(e, unitary_channel(pauli_x()), 12));
  CHECK(est.mode == LimitMode::LimitCycle);
  CHECK(est.period == 2);
  CHECK(est.phase_step == 0);
  REQUIRE(est.cycle_Delta.has_value());
  CHECK(*est.cycle_Delta <= 1e-6);
  EvolveOptions opts;
  opts.step_deficiency = true;
  opts.limit = e;
  const ConvergenceTrace t = evolve(homogeneous(e, unitary_channel(pauli_x()), 4), opts);
  for (const auto& row : t.rows) {
    CHECK(*row.Delta_to_limit <= 1e-6);
    if (row.delta_next) CHECK(*row.delta_next <= 1e-6);
  }
}

TEST_CASE("classical embedding converges to the stationary distribution") {
  RMatrix m(3, 3);
  m << 0.5, 0.2, 0.3, 0.25, 0.6, 0.1, 0.25, 0.2, 0.6;
  const RVector pi = stationary(m);
  const StateFamily e = StateFamily::from_states({DensityOperator::basis_projector(3, 0), DensityOperator::basis_projector(3, 2)});
  const LimitEstimate est = estimate_limit_family(homogeneous(e, classical_embedding(m), 120));
  REQUIRE(est.mode == LimitMode::Converged);
  const std::vector<double> target(pi.data(), pi.data() + pi.size());
  CHECK(family_distance(*est.family, StateFamily::one_point(DensityOperator::diagonal(target), e.labels())) <= 1e-6);
}

TEST_CASE("irrational rotations never settle") {
  std::vector<Channel> rotations;
  for (int i = 0; i < 30; ++i) rotations.push_back(unitary_channel(z_rotation(1.0)));
  const StateFamily e = StateFamily::from_states({plus_state(), DensityOperator::basis_projector(2, 0)});
  const LimitEstimate est = estimate_limit_family(ChainScenario{e, ChainScenario::Explicit{rotations}, 30});
  CHECK(est.mode == LimitMode::Undetermined);
  CHECK_FALSE(est.family.has_value());
  CHECK(est.window_residuals.size() == 26);
  CHECK(est.step_residuals.size() == 30);
}

TEST_CASE("short horizons are undetermined") {
  const LimitEstimate est = estimate_limit_family(homogeneous(computational_dichotomy(), depolarizing(0.5, 2), 9));
  CHECK(est.mode == LimitMode::Undetermined);
  CHECK_FALSE(est.note.empty());
}

TEST_CASE("contraction examples") {
  CHECK(std::abs(contraction_sup(identity_channel(3)).value - 2.0) < 1e-9);
  Rng rng(88);
  CHECK(contraction_sup(constant_channel(random_density(3, rng), 3)).value < 1e-12);
  for (const double p : {0.0, 0.1, 0.3, 0.75, 1.0}) {
    CHECK(std::abs(contraction_sup(depolarizing(p, 2)).value - 2.0 * (1.0 - p)) < 1e-9);
  }
  const ContractionResult r = contraction_sup(amplitude_damping(0.36));
  CHECK(std::abs(r.value - 2.0 * 0.8) < 1e-9);
  CHECK(std::abs(r.psi.norm() - 1.0) < 1e-12);
  CHECK(contraction_sup(random_channel(3, 4), 9).value == contraction_sup(random_channel(3, 4), 9).value);
}

TEST_CASE("weak ergodicity examples") {
  const StateFamily e = computational_dichotomy();
  const ErgodicityReport damp = weak_ergodicity_test(homogeneous(e, amplitude_damping(1.0), 3));
  CHECK(damp.ergodic_at == 1);
  const ErgodicityReport flip = weak_ergodicity_test(homogeneous(e, unitary_channel(pauli_x()), 5));
  CHECK_FALSE(flip.ergodic_at.has_value());
  for (const double c : flip.chebyshev_radius) CHECK(std::abs(c - 1.0) < 1e-6);
  const ErgodicityReport dep = weak_ergodicity_test(homogeneous(e, depolarizing(0.3, 2), 45), 1e-6, false);
  CHECK(dep.ergodic_at == 41);
  for (std::size_t i = 0; i <= 30; ++i) CHECK(std::abs(dep.contraction[i] - 2.0 * std::pow(0.7, i)) <= 1e-8);
}

TEST_CASE("fixed point examples") {
  Rng rng(89);
  const StateFamily e = random_family(3, 3, rng);
  const FixedPointCheck id = fixed_point_check(identity_channel(3), e);
  CHECK(id.pass);
  CHECK(id.Delta_value <= 1e-7);
  CHECK(fixed_point_check(depolarizing(0.3, 2), StateFamily({{"m", DensityOperator::maximally_mixed(2)}})).pass);
  CHECK_FALSE(fixed_point_check(constant_channel(DensityOperator::basis_projector(2, 0), 2), computational_dichotomy()).pass);
}

TEST_CASE("monotone trace examples") {
  const StateFamily e = computational_dichotomy();
  const ChainScenario s = homogeneous(e, depolarizing(0.2, 2), 30);
  const MonotoneTrace same = monotone_trace(s, {DivergenceSpec::trace_distance(), {"0", "0"}});
  for (const double v : same.values) CHECK(v == 0.0);
  const MonotoneTrace td = monotone_trace(s, {DivergenceSpec::trace_distance(), {"0", "1"}});
  for (std::size_t i = 0; i < td.values.size(); ++i) CHECK(std::abs(td.values[i] - 2.0 * std::pow(0.8, i)) < 1e-12);
  const StateFamily limit = StateFamily::one_point(DensityOperator::maximally_mixed(2), e.labels());
  const MonotoneTrace fid = monotone_trace(s, {DivergenceSpec::one_minus_fidelity(), {"0", "1"}}, limit);
  CHECK(fid.max_upward_violation <= 1e-9);
  REQUIRE(fid.final_gap.has_value());
  CHECK(*fid.final_gap <= 1e-4);
}

TEST_CASE("property: chain invariants on random contractive chains") {
  Rng rng(90);
  for (int k = 0; k < 3; ++k) {
    const StateFamily e = random_family(2, 2, rng);
    std::vector<Channel> chain;
    for (int i = 0; i < 60; ++i) chain.push_back(compose(depolarizing(0.2, 2), random_channel(2, 3000 + 100 * k + i)));
    const ChainScenario s{e, ChainScenario::Explicit{chain}, 60};
    LimitOptions lo;
    lo.basis_deficiency_history = true;
    const LimitEstimate est = estimate_limit_family(s, lo);
    REQUIRE(est.mode == LimitMode::Converged);
    EvolveOptions opts;
    opts.limit = est.family;
    opts.step_deficiency = true;
    const ConvergenceTrace t = evolve(s, opts);
    const double d2 = static_cast<double>(e.dim() * e.dim());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& row = t.rows[i];
      if (row.delta_next) CHECK(*row.delta_next <= 1e-6);
      if (i > 0) CHECK(*row.Delta_to_limit <= *t.rows[i - 1].Delta_to_limit + 1e-6);
      CHECK(*row.delta_bw <= d2 * est.sup_alpha * est.basis_deficiency[i] + 1e-6);
    }
    const ErgodicityReport er = weak_ergodicity_test(ChainScenario{e, ChainScenario::Explicit{chain}, 12}, 1e-6, false);
    for (std::size_t i = 1; i < er.contraction.size(); ++i) CHECK(er.contraction[i] <= er.contraction[i - 1] + 1e-6);
  }
}
