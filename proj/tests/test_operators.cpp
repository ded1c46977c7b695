#include <cmath>

#include "doctest.h"
#include "lecam/operators.hpp"
#include "lecam/random.hpp"
#include "test_support.hpp"

using namespace lecam;
using namespace lecam::testing;

namespace {

// Rank of a real matrix by Gaussian elimination with partial pivoting.
int elimination_rank(RMatrix a, double tol = 1e-9) {
  int rank = 0;
  for (Eigen::Index c = 0; c < a.cols() && rank < a.rows(); ++c) {
    Eigen::Index pivot = rank;
    for (Eigen::Index r = rank; r < a.rows(); ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    if (std::abs(a(pivot, c)) < tol) continue;
    a.row(pivot).swap(a.row(rank));
    for (Eigen::Index r = rank + 1; r < a.rows(); ++r) a.row(r) -= a(r, c) / a(rank, c) * a.row(rank);
    ++rank;
  }
  return rank;
}

RVector real_coordinates(const HermitianOperator& h) {
  const Eigen::Index d = h.dim();
  RVector v(2 * d * d);
  for (Eigen::Index i = 0; i < d * d; ++i) {
    v(i) = h.matrix()(i / d, i % d).real();
    v(d * d + i) = h.matrix()(i / d, i % d).imag();
  }
  return v;
}

HermitianOperator random_hermitian(Eigen::Index d, Rng& rng) {
  const CMatrix g = ginibre(d, d, rng);
  return HermitianOperator(g + g.adjoint());
}

}  // namespace

TEST_CASE("trace norm examples") {
  CHECK(trace_norm(HermitianOperator::diagonal({1.0, -1.0})) == doctest::Approx(2.0));
  CHECK(trace_norm(HermitianOperator::zero(3)) == 0.0);
  const HermitianOperator diff = HermitianOperator::diagonal({0.75, 0.25}) - HermitianOperator::diagonal({0.5, 0.5});
  CHECK(trace_norm(diff) == doctest::Approx(0.5));
}

TEST_CASE("operator norm examples") {
  CHECK(operator_norm(HermitianOperator::diagonal({1.0, -3.0})) == doctest::Approx(3.0));
  CHECK(operator_norm(HermitianOperator::identity(4)) == doctest::Approx(1.0));
  CHECK(operator_norm(HermitianOperator(0.5 * pauli_x())) == doctest::Approx(0.5));
}

TEST_CASE("matrix power examples") {
  const HermitianOperator r = matrix_power(HermitianOperator::diagonal({4.0, 9.0}), 0.5);
  CHECK(max_abs(r.matrix() - HermitianOperator::diagonal({2.0, 3.0}).matrix()) < 1e-12);
  Rng rng(3);
  const DensityOperator a = random_density(3, rng);
  CHECK(max_abs(matrix_power(a, 1.0).matrix() - a.matrix()) < 1e-12);
  const DensityOperator p = random_pure_state(3, rng);
  for (const double alpha : {0.1, 0.5, 0.9}) CHECK(max_abs(matrix_power(p, alpha).matrix() - p.matrix()) < 1e-9);
  CHECK_THROWS_AS(matrix_power(HermitianOperator::diagonal({1.0, -1e-6}), 0.5), Error);
  CHECK_NOTHROW(matrix_power(HermitianOperator::diagonal({1.0, -1e-12}), 0.5));
}

TEST_CASE("density operator validation") {
  CHECK_THROWS_AS(DensityOperator(HermitianOperator::diagonal({1.2, -0.2})), Error);
  CHECK_THROWS_AS(DensityOperator(HermitianOperator::diagonal({0.5, 0.6})), Error);
  CHECK_NOTHROW(DensityOperator(HermitianOperator::diagonal({1.0, 0.0})));
}

TEST_CASE("state basis for a qubit has the prescribed Bloch vectors") {
  const OperatorBasis b = state_basis(2);
  REQUIRE(b.size() == 4);
  const auto states = b.as_states();
  const Eigen::Vector3d expected[] = {{0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {0, 1, 0}};
  for (int k = 0; k < 4; ++k) CHECK((states[k].bloch() - expected[k]).norm() < 1e-12);
}

TEST_CASE("state basis is biorthogonal to its dual") {
  for (const Eigen::Index d : {2, 3, 4}) {
    const OperatorBasis b = state_basis(d);
    REQUIRE(b.size() == static_cast<std::size_t>(d * d));
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        worst = std::max(worst, std::abs(hs_inner(b.elements()[i], b.dual_elements()[j]) - (i == j ? 1.0 : 0.0)));
      }
    }
    CHECK(worst < 1e-9);
    CHECK(b.gram_condition() < OperatorBasis::kMaxCondition);
  }
}

TEST_CASE("qutrit state basis has full real rank") {
  const OperatorBasis b = state_basis(3);
  RMatrix coords(9, 18);
  for (int k = 0; k < 9; ++k) coords.row(k) = real_coordinates(b.elements()[k]).transpose();
  CHECK(elimination_rank(coords) == 9);
}

TEST_CASE("ill-conditioned element lists are rejected") {
  std::vector<HermitianOperator> e = state_basis(2).elements();
  e[3] = e[2];
  CHECK_THROWS_AS(OperatorBasis::from_elements(e), Error);
}

TEST_CASE("expand and reconstruct") {
  const OperatorBasis b = state_basis(3);
  for (std::size_t k = 0; k < b.size(); ++k) {
    const RVector a = expand(b.elements()[k], b);
    RVector e = RVector::Zero(static_cast<Eigen::Index>(b.size()));
    e(static_cast<Eigen::Index>(k)) = 1.0;
    CHECK((a - e).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(max_abs(reconstruct(e, b).matrix() - b.elements()[k].matrix()) < 1e-12);
  }
  CHECK(max_abs(reconstruct(RVector::Zero(9), b).matrix()) == 0.0);
  CHECK_THROWS_AS(expand(HermitianOperator::identity(2), b), Error);
  CHECK_THROWS_AS(reconstruct(RVector::Zero(4), b), Error);
}

TEST_CASE("Pauli basis expansion of the maximally mixed state") {
  std::vector<HermitianOperator> pauli = {HermitianOperator::identity(2), HermitianOperator(pauli_x()),
                                          HermitianOperator(pauli_y()), HermitianOperator(pauli_z())};
  const OperatorBasis b = OperatorBasis::from_elements(pauli);
  for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs(b.dual_elements()[k].matrix() - 0.5 * pauli[k].matrix()) < 1e-12);
  const RVector a = expand(DensityOperator::maximally_mixed(2), b);
  CHECK(std::abs(a(0) - 0.5) < 1e-12);
  CHECK(a.tail(3).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruction of a valid state is a state") {
  Rng rng(11);
  const OperatorBasis b = state_basis(3);
  for (int k = 0; k < 20; ++k) {
    const DensityOperator rho = random_density(3, rng);
    const HermitianOperator r = reconstruct(expand(rho, b), b);
    const RVector ev = r.eigenvalues();
    CHECK(ev.minCoeff() > -1e-10);
    CHECK(std::abs(ev.sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("property: expand/reconstruct round trip") {
  Rng rng(12);
  for (const Eigen::Index d : {2, 3, 4}) {
    const OperatorBasis b = state_basis(d);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const DensityOperator rho = random_density(d, rng);
      worst = std::max(worst, max_abs(reconstruct(expand(rho, b), b).matrix() - rho.matrix()));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("property: norm ordering and triangle inequality") {
  Rng rng(13);
  for (int k = 0; k < 300; ++k) {
    const Eigen::Index d = 2 + k % 3;
    const HermitianOperator a = random_hermitian(d, rng);
    const HermitianOperator b = random_hermitian(d, rng);
    CHECK(trace_norm(a) >= operator_norm(a) - 1e-12);
    CHECK(operator_norm(a) >= 0.0);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12);
  }
}

TEST_CASE("property: operator-monotone perturbation bound") {
  Rng rng(14);
  double worst = -1.0;
  for (int k = 0; k < 500; ++k) {
    const Eigen::Index d = 2 + k % 3;
    const double scale = std::pow(10.0, static_cast<double>(k % 5) - 2.0);
    const HermitianOperator a = scale * static_cast<const HermitianOperator&>(random_density(d, rng));
    const HermitianOperator b = static_cast<const HermitianOperator&>(random_density(d, rng, 1 + k % d));
    for (const double alpha : {0.25, 0.5, 0.75}) {
      const double lhs = operator_norm(matrix_power(a, alpha) - matrix_power(b, alpha));
      const double rhs = std::pow(operator_norm(a - b), alpha);
      worst = std::max(worst, lhs - rhs);
    }
  }
  CHECK(worst <= 1e-9);
}
