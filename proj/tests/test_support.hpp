#pragma once

#include <cmath>
#include <vector>

#include "lecam/acceptance.hpp"
#include "lecam/channels.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/operators.hpp"
#include "lecam/random.hpp"

namespace lecam::testing {

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline DensityOperator plus_state() {
  CVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return DensityOperator::pure(v);
}

inline StateFamily random_family(Eigen::Index d, std::size_t k, Rng& rng) {
  std::vector<DensityOperator> states;
  for (std::size_t i = 0; i < k; ++i) states.push_back(random_density(d, rng));
  return StateFamily::from_states(states);
}

inline StateFamily computational_dichotomy() {
  return StateFamily::from_states({DensityOperator::basis_projector(2, 0), DensityOperator::basis_projector(2, 1)});
}

inline StateFamily noisy_dichotomy() {
  return StateFamily::from_states({DensityOperator::diagonal({0.9, 0.1}), DensityOperator::diagonal({0.1, 0.9})});
}

using acceptance::enclosing_ball_radius;

}  // namespace lecam::testing
