#include <cmath>
#include <vector>

#include "doctest.h"
#include "lecam/channels.hpp"
#include "lecam/classical.hpp"
#include "lecam/random.hpp"
#include "test_support.hpp"

using namespace lecam;
using namespace lecam::testing;

namespace {

ProbabilityVector random_vector(Eigen::Index n, Rng& rng) {
  const std::vector<double> p = random_probability(n, rng);
  return ProbabilityVector(Eigen::Map<const RVector>(p.data(), n));
}

ClassicalFamily random_classical(Eigen::Index n, std::size_t k, Rng& rng) {
  std::vector<ProbabilityVector> v;
  for (std::size_t i = 0; i < k; ++i) v.push_back(random_vector(n, rng));
  return ClassicalFamily::from_vectors(v);
}

StochasticMatrix random_stochastic(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  RMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) m.col(c) = random_vector(rows, rng).values();
  return StochasticMatrix(m);
}

ClassicalFamily poles() { return ClassicalFamily::from_vectors({{1.0, 0.0}, {0.0, 1.0}}); }

ClassicalFamily noisy_poles() { return ClassicalFamily::from_vectors({{0.9, 0.1}, {0.1, 0.9}}); }

// Exhaustive search over 2x2 stochastic matrices on a grid; an upper bound
// within 2 / steps of the true minimax for two-point sample spaces.
double grid_deficiency(const ClassicalFamily& e, const ClassicalFamily& f, int steps) {
  double best = 2.0;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      RMatrix m(2, 2);
      const double a = static_cast<double>(i) / steps, b = static_cast<double>(j) / steps;
      m << a, b, 1.0 - a, 1.0 - b;
      double worst = 0.0;
      for (std::size_t t = 0; t < e.size(); ++t) {
        worst = std::max(worst, (m * e.vector(t).values() - f.vector(t).values()).lpNorm<1>());
      }
      best = std::min(best, worst);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("probability vector and stochastic matrix validation") {
  CHECK_NOTHROW(ProbabilityVector({0.25, 0.75}));
  CHECK_THROWS_AS(ProbabilityVector({-0.1, 1.1}), Error);
  CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6}), Error);
  RMatrix bad(2, 2);
  bad << 0.5, 0.5, 0.6, 0.5;
  CHECK_THROWS_AS(StochasticMatrix{bad}, Error);
  bad << 1.2, 0.5, -0.2, 0.5;
  CHECK_THROWS_AS(StochasticMatrix{bad}, Error);
  RMatrix rect(3, 2);
  rect << 0.2, 0.0, 0.3, 0.5, 0.5, 0.5;
  const StochasticMatrix m(rect);
  const ProbabilityVector out = m.apply({0.5, 0.5});
  CHECK(std::abs(out(0) - 0.1) < 1e-15);
  CHECK(std::abs(out(1) - 0.4) < 1e-15);
  CHECK_THROWS_AS(m.apply({0.2, 0.3, 0.5}), Error);
  CHECK_THROWS_AS(ClassicalFamily({{"a", {0.5, 0.5}}, {"a", {1.0, 0.0}}}), Error);
  CHECK_THROWS_AS(ClassicalFamily::from_vectors({{0.5, 0.5}, {0.2, 0.3, 0.5}}), Error);
}

TEST_CASE("lp_deficiency fixtures") {
  const ClassicalFamily mixed = ClassicalFamily::from_vectors({{0.5, 0.5}, {0.5, 0.5}});
  CHECK(std::abs(lp_deficiency(poles(), mixed).value) <= 1e-6);
  CHECK(std::abs(lp_deficiency(mixed, poles()).value - 1.0) <= 1e-6);
  CHECK(std::abs(lp_deficiency(poles(), noisy_poles()).value) <= 1e-6);
  const LpDeficiencyResult back = lp_deficiency(noisy_poles(), poles());
  CHECK(std::abs(back.value - 0.2) <= 1e-6);
  CHECK(back.value >= back.dual_value - 1e-9);
  CHECK(std::abs(lp_Delta(poles(), noisy_poles()) - 0.2) <= 1e-6);
}

TEST_CASE("lp_deficiency of a garbled family vanishes") {
  Rng rng(81);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index n = 2 + k % 3;
    const ClassicalFamily e = random_classical(n, 2 + k % 3, rng);
    const StochasticMatrix m = random_stochastic(2 + (k + 1) % 3, n, rng);
    const LpDeficiencyResult r = lp_deficiency(e, e.mapped(m));
    CHECK(r.value <= 1e-6);
    REQUIRE(r.matrix.has_value());
    CHECK(r.matrix->rows() == m.rows());
    CHECK(r.matrix->cols() == n);
  }
}

TEST_CASE("lp_deficiency optimal garbling reproduces the value") {
  Rng rng(82);
  for (int k = 0; k < 20; ++k) {
    const ClassicalFamily e = random_classical(3, 3, rng);
    const ClassicalFamily f = random_classical(2 + k % 3, 3, rng);
    const LpDeficiencyResult r = lp_deficiency(e, f);
    REQUIRE(r.matrix.has_value());
    double worst = 0.0;
    for (std::size_t t = 0; t < e.size(); ++t) {
      worst = std::max(worst, (r.matrix->matrix() * e.vector(t).values() - f.vector(t).values()).lpNorm<1>());
    }
    CHECK(std::abs(worst - r.value) <= 1e-6);
  }
}

TEST_CASE("lp_deficiency agrees with a grid search on two outcomes") {
  Rng rng(83);
  const int steps = 400;
  for (int k = 0; k < 10; ++k) {
    const ClassicalFamily e = random_classical(2, 2 + k % 2, rng);
    const ClassicalFamily f = random_classical(2, 2 + k % 2, rng);
    const double lp = lp_deficiency(e, f).value;
    const double grid = grid_deficiency(e, f, steps);
    CHECK(lp <= grid + 1e-7);
    CHECK(grid - lp <= 4.0 / steps);
  }
}

TEST_CASE("lp_deficiency label errors") {
  const ClassicalFamily e({{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}});
  const ClassicalFamily f({{"a", {1.0, 0.0}}, {"c", {0.0, 1.0}}});
  CHECK_THROWS_AS(lp_deficiency(e, f), Error);
  CHECK_THROWS_AS(lp_deficiency(e, ClassicalFamily({{"a", {1.0, 0.0}}})), Error);
  const ClassicalFamily swapped({{"b", {0.1, 0.9}}, {"a", {0.9, 0.1}}});
  CHECK(std::abs(lp_deficiency(swapped, e).value - 0.2) <= 1e-6);
}

TEST_CASE("restrict examples") {
  Rng rng(84);
  const ClassicalFamily e = random_classical(3, 4, rng);
  const ClassicalFamily all = restrict(e, e.labels());
  CHECK(all.labels() == e.labels());
  for (std::size_t k = 0; k < e.size(); ++k) CHECK(all.vector(k).values() == e.vector(k).values());
  const ClassicalFamily one = restrict(e, {"2"});
  CHECK(one.size() == 1);
  CHECK(one.vector(0).values() == e.vector(2).values());
  CHECK_THROWS_AS(restrict(e, {"9"}), Error);
  CHECK_THROWS_AS(restrict(e, {}), Error);
  for (int k = 0; k < 10; ++k) {
    const ClassicalFamily a = random_classical(3, 4, rng);
    const ClassicalFamily b = random_classical(3, 4, rng);
    const double full = lp_deficiency(a, b).value;
    const std::vector<std::string> sub = {"0", "3"};
    CHECK(lp_deficiency(restrict(a, sub), restrict(b, sub)).value <= full + 1e-9);
  }
}

TEST_CASE("evolve_classical examples") {
  Rng rng(85);
  const ClassicalFamily e = random_classical(3, 3, rng);
  const ClassicalTrace still = evolve_classical(e, std::vector<StochasticMatrix>(5, StochasticMatrix::identity(3)));
  REQUIRE(still.families.size() == 6);
  for (const auto& fam : still.families) {
    for (std::size_t k = 0; k < e.size(); ++k) CHECK((fam.vector(k).values() - e.vector(k).values()).norm() < 1e-15);
  }
  const ProbabilityVector q = {0.2, 0.5, 0.3};
  RMatrix r(3, 3);
  r << q.values(), q.values(), q.values();
  const ClassicalTrace collapsed = evolve_classical(e, {StochasticMatrix(r)});
  for (std::size_t k = 0; k < e.size(); ++k) {
    CHECK((collapsed.families[1].vector(k).values() - q.values()).norm() < 1e-15);
  }
  CHECK(collapsed.sup_pairwise_l1[1] < 1e-15);
  CHECK_THROWS_AS(evolve_classical(e, {StochasticMatrix::identity(2)}), Error);
}

TEST_CASE("doubly stochastic chain converges to uniform") {
  RMatrix m(3, 3);
  m << 0.5, 0.3, 0.2, 0.2, 0.5, 0.3, 0.3, 0.2, 0.5;
  const ClassicalFamily e = ClassicalFamily::from_vectors({{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, {0.1, 0.6, 0.3}});
  const ClassicalTrace trace = evolve_classical(e, std::vector<StochasticMatrix>(60, StochasticMatrix(m)));
  // Power iteration oracle.
  for (std::size_t k = 0; k < e.size(); ++k) {
    RVector v = e.vector(k).values();
    for (int i = 0; i < 60; ++i) v = m * v;
    CHECK((trace.families.back().vector(k).values() - v).norm() < 1e-12);
    CHECK((v - RVector::Constant(3, 1.0 / 3.0)).norm() < 1e-12);
  }
}

TEST_CASE("ergodicity_tests examples") {
  Rng rng(86);
  const ClassicalFamily e = random_classical(3, 3, rng);
  RMatrix r(3, 3);
  r << 0.2, 0.2, 0.2, 0.5, 0.5, 0.5, 0.3, 0.3, 0.3;
  const ClassicalErgodicity rank_one =
      ergodicity_tests(evolve_classical(e, std::vector<StochasticMatrix>(4, StochasticMatrix(r))), 1e-6);
  CHECK(rank_one.weak == 1);
  CHECK(rank_one.detections_agree);
  CHECK(rank_one.weak_topology.has_value());

  RMatrix perm(3, 3);
  perm << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  const ClassicalErgodicity cyclic =
      ergodicity_tests(evolve_classical(e, std::vector<StochasticMatrix>(12, StochasticMatrix(perm))), 1e-6);
  CHECK_FALSE(cyclic.weak.has_value());
  CHECK(cyclic.detections_agree);
  for (const auto& [pair, onset] : cyclic.l1_weak_per_pair) CHECK_FALSE(onset.has_value());
}

TEST_CASE("two-state chain contracts by the second eigenvalue") {
  RMatrix m(2, 2);
  m << 0.9, 0.1, 0.1, 0.9;
  const double tol = 1e-6;
  const ClassicalTrace trace = evolve_classical(poles(), std::vector<StochasticMatrix>(80, StochasticMatrix(m)));
  for (std::size_t i = 0; i < trace.sup_pairwise_l1.size(); ++i) {
    CHECK(std::abs(trace.sup_pairwise_l1[i] - 2.0 * std::pow(0.8, static_cast<double>(i))) < 1e-12);
  }
  int expected = 0;
  while (2.0 * std::pow(0.8, expected) > tol) ++expected;
  const ClassicalErgodicity erg = ergodicity_tests(trace, tol);
  CHECK(erg.weak == expected);
  CHECK(erg.detections_agree);
  CHECK(erg.l1_weak_per_pair.at({"0", "1"}) == expected);
  REQUIRE(erg.weak_topology.has_value());
  CHECK(*erg.weak_topology <= expected);
}

TEST_CASE("weak topology check against an explicit limit") {
  RMatrix m(2, 2);
  m << 0.9, 0.2, 0.1, 0.8;
  ErgodicityOptions options;
  options.limit = ClassicalFamily::from_vectors({{2.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 3.0}});
  const ClassicalTrace trace = evolve_classical(poles(), std::vector<StochasticMatrix>(120, StochasticMatrix(m)));
  const ClassicalErgodicity erg = ergodicity_tests(trace, 1e-6, options);
  REQUIRE(erg.weak_topology.has_value());
  CHECK(erg.subset_onset.size() == 3);
  options.limit = poles();
  CHECK_FALSE(ergodicity_tests(trace, 1e-6, options).weak_topology.has_value());
}

TEST_CASE("property: LP and SDP deficiencies agree on diagonal families") {
  Rng rng(87);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index n = 2 + k % 3;
    const std::size_t size = 2 + static_cast<std::size_t>(k / 3) % 3;
    const ClassicalFamily e = random_classical(n, size, rng);
    const ClassicalFamily f = random_classical(n, size, rng);
    const double lp = lp_deficiency(e, f).value;
    const double sdp = deficiency_delta(e.to_quantum(), f.to_quantum()).value;
    worst = std::max(worst, std::abs(lp - sdp));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("property: classical embedding of garblings") {
  Rng rng(88);
  for (int k = 0; k < 20; ++k) {
    const ClassicalFamily e = random_classical(3, 3, rng);
    const StochasticMatrix m = random_stochastic(3, 3, rng);
    const StateFamily mapped = e.to_quantum().mapped(classical_embedding(m.matrix()));
    CHECK(family_distance(mapped, e.mapped(m).to_quantum()) < 1e-12);
  }
}

TEST_CASE("property: LP triangle inequality and monotonicity") {
  Rng rng(89);
  double worst = -1.0;
  for (int k = 0; k < 100; ++k) {
    const ClassicalFamily a = random_classical(3, 2, rng);
    const ClassicalFamily b = random_classical(3, 2, rng);
    const ClassicalFamily c = random_classical(3, 2, rng);
    const double ab = lp_deficiency(a, b).value;
    const double bc = lp_deficiency(b, c).value;
    const LpDeficiencyResult ac = lp_deficiency(a, c);
    worst = std::max(worst, ac.dual_value - ab - bc);
    // delta(A, M(B)) <= delta(A, B) <= delta(M(A), B).
    const StochasticMatrix m = random_stochastic(3, 3, rng);
    worst = std::max(worst, lp_deficiency(a, b.mapped(m)).dual_value - ab);
    worst = std::max(worst, lp_deficiency(a, b).dual_value - lp_deficiency(a.mapped(m), b).value);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("property: ergodicity detections agree") {
  Rng rng(90);
  for (int k = 0; k < 20; ++k) {
    const ClassicalFamily e = random_classical(3, 3, rng);
    std::vector<StochasticMatrix> chain;
    for (int i = 0; i < 40; ++i) chain.push_back(random_stochastic(3, 3, rng));
    ErgodicityOptions options;
    options.max_subset = 0;
    const ClassicalErgodicity erg = ergodicity_tests(evolve_classical(e, chain), 1e-6, options);
    CHECK(erg.detections_agree);
  }
}
