#include <cmath>

#include "doctest.h"
#include "lecam/channels.hpp"
#include "lecam/random.hpp"
#include "test_support.hpp"

using namespace lecam;
using namespace lecam::testing;

namespace {

// Choi matrix assembled entry by entry from the channel's action on E_ij.
CMatrix choi_by_definition(const Channel& c) {
  const Eigen::Index din = c.dim_in();
  const Eigen::Index dout = c.dim_out();
  CMatrix j = CMatrix::Zero(din * dout, din * dout);
  for (Eigen::Index i = 0; i < din; ++i) {
    for (Eigen::Index k = 0; k < din; ++k) {
      CMatrix eik = CMatrix::Zero(din, din);
      eik(i, k) = 1.0;
      const CMatrix out = (c.superoperator() * Eigen::Map<const CVector>(CMatrix(eik.transpose()).data(), din * din))
                              .eval();
      CMatrix image(dout, dout);
      for (Eigen::Index a = 0; a < dout; ++a) {
        for (Eigen::Index b = 0; b < dout; ++b) image(a, b) = out(a * dout + b);
      }
      j.block(i * dout, k * dout, dout, dout) = image;
    }
  }
  return j;
}

}  // namespace

TEST_CASE("apply examples") {
  Rng rng(21);
  const DensityOperator rho = random_density(3, rng);
  CHECK(max_abs(apply(identity_channel(3), rho).matrix() - rho.matrix()) < 1e-12);
  const DensityOperator sigma = random_density(3, rng);
  CHECK(max_abs(apply(constant_channel(sigma, 3), rho).matrix() - sigma.matrix()) < 1e-12);
  const DensityOperator q = random_density(2, rng);
  CHECK(max_abs(apply(depolarizing(1.0, 2), q).matrix() - DensityOperator::maximally_mixed(2).matrix()) < 1e-12);
  CHECK_THROWS_AS(apply(identity_channel(2), rho), Error);
}

TEST_CASE("Choi convention is input factor first") {
  Rng rng(22);
  const Channel c = random_channel(2, 5);
  CHECK(max_abs(choi_by_definition(c) - c.choi()) < 1e-12);
  const DensityOperator rho = random_density(2, rng);
  CMatrix viaChoi = CMatrix::Zero(2, 2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) viaChoi += rho.matrix()(i, j) * c.choi().block(i * 2, j * 2, 2, 2);
  }
  CHECK(max_abs(viaChoi - apply(c, rho).matrix()) < 1e-12);
}

TEST_CASE("compose examples") {
  Rng rng(23);
  const Channel l = random_channel(3, 9);
  CHECK(max_abs(compose(identity_channel(3), l).choi() - l.choi()) < 1e-10);
  const Channel pq = compose(depolarizing(0.2, 3), depolarizing(0.35, 3));
  CHECK(max_abs(pq.choi() - depolarizing(1.0 - 0.8 * 0.65, 3).choi()) < 1e-12);
  const DensityOperator sigma = random_density(3, rng);
  CHECK(max_abs(compose(constant_channel(sigma, 3), l).choi() - constant_channel(sigma, 3).choi()) < 1e-12);
  CHECK_THROWS_AS(compose(identity_channel(2), l), Error);
}

TEST_CASE("from_kraus examples") {
  CHECK(max_abs(Channel::from_kraus({CMatrix::Identity(2, 2)}).choi() - identity_channel(2).choi()) < 1e-15);
  CMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, 0;
  k1 << 0, 1, 0, 0;
  const Channel damped = Channel::from_kraus({k0, k1});
  CHECK(max_abs(damped.choi() - constant_channel(DensityOperator::basis_projector(2, 0), 2).choi()) < 1e-15);
  CHECK(max_abs(amplitude_damping(1.0).choi() - damped.choi()) < 1e-15);
  CHECK_THROWS_AS(Channel::from_kraus({0.9 * CMatrix::Identity(2, 2)}), Error);
  Rng rng(24);
  for (int k = 0; k < 20; ++k) {
    const CMatrix v = haar_isometry(6, 3, rng);
    std::vector<CMatrix> kraus = {v.topRows(3), v.bottomRows(3)};
    CHECK(validate_cptp(Channel::from_kraus(kraus).choi(), 1e-9).pass);
  }
}

TEST_CASE("validate_cptp examples") {
  const CptpReport id = validate_cptp(identity_channel(3).choi(), 1e-9);
  CHECK(id.pass);
  CHECK(std::abs(id.min_eigenvalue) < 1e-12);
  const CptpReport full = validate_cptp(CMatrix::Identity(9, 9) / 3.0, 1e-9);
  CHECK(full.pass);
  const CptpReport t = validate_cptp(transpose_map_choi(2), 1e-9);
  CHECK_FALSE(t.pass);
  CHECK(t.min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(t.tp_residual < 1e-12);
  CHECK_THROWS_AS(Channel::from_choi(transpose_map_choi(2), 2, 2), Error);
  CHECK_THROWS_AS(Channel::from_choi(CMatrix::Identity(4, 4), 2, 2), Error);
}

TEST_CASE("standard constructors") {
  CHECK(max_abs(depolarizing(0.0, 3).choi() - identity_channel(3).choi()) < 1e-15);
  const RMatrix m = RMatrix::Identity(3, 3);
  const DensityOperator p = DensityOperator::diagonal({0.2, 0.3, 0.5});
  CHECK(max_abs(apply(classical_embedding(m), p).matrix() - p.matrix()) < 1e-15);
  const Channel x = unitary_channel(pauli_x());
  CHECK(max_abs(compose(x, x).choi() - identity_channel(2).choi()) < 1e-15);
  CHECK_THROWS_AS(depolarizing(1.5, 2), Error);
  CHECK_THROWS_AS(dephasing(-0.1, 2), Error);
  CHECK_THROWS_AS(amplitude_damping(2.0), Error);
  CHECK_THROWS_AS(unitary_channel(2.0 * pauli_x()), Error);
  RMatrix bad(2, 2);
  bad << 0.5, 0.5, 0.6, 0.5;
  CHECK_THROWS_AS(classical_embedding(bad), Error);
}

TEST_CASE("classical embedding measures then prepares") {
  RMatrix m(2, 2);
  m << 0.7, 0.2, 0.3, 0.8;
  const DensityOperator out = apply(classical_embedding(m), plus_state());
  CHECK(max_abs(out.matrix() - DensityOperator::diagonal({0.45, 0.55}).matrix()) < 1e-15);
}

TEST_CASE("random_channel is seeded and valid") {
  CHECK(random_channel(3, 42).choi() == random_channel(3, 42).choi());
  CHECK(random_channel(3, 42).choi() != random_channel(3, 43).choi());
  Rng rng(25);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Channel c = random_channel(2 + seed % 2, seed);
    CHECK(validate_cptp(c.choi(), 1e-9).pass);
    CHECK(std::abs(apply_linear(c, random_density(c.dim_in(), rng)).trace() - 1.0) < 1e-10);
  }
}

TEST_CASE("property: representation round trips") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Channel c = random_channel(2 + seed % 3, seed);
    const Channel viaKraus = Channel::from_kraus(c.kraus());
    CHECK(max_abs(viaKraus.choi() - c.choi()) < 1e-9);
    const CMatrix s = choi_to_superoperator(c.choi(), c.dim_in(), c.dim_out());
    CHECK(max_abs(superoperator_to_choi(s, c.dim_in(), c.dim_out()) - c.choi()) < 1e-15);
  }
}

TEST_CASE("property: composition is associative") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Eigen::Index d = 2 + seed % 2;
    const Channel a = random_channel(d, 3 * seed);
    const Channel b = random_channel(d, 3 * seed + 1);
    const Channel c = random_channel(d, 3 * seed + 2);
    CHECK(max_abs(compose(a, compose(b, c)).choi() - compose(compose(a, b), c).choi()) < 1e-10);
  }
}

TEST_CASE("property: data processing for trace distance") {
  Rng rng(26);
  double worst = -1.0;
  for (int k = 0; k < 500; ++k) {
    const Eigen::Index d = 2 + k % 2;
    const Channel c = random_channel(d, 1000 + k);
    const DensityOperator rho = random_density(d, rng);
    const DensityOperator sigma = k % 3 == 0 ? random_pure_state(d, rng) : random_density(d, rng);
    worst = std::max(worst, trace_norm(apply(c, rho).op() - apply(c, sigma).op()) - trace_norm(rho.op() - sigma.op()));
  }
  CHECK(worst <= 1e-9);
}
