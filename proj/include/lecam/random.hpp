#pragma once

#include <cstdint>
#include <random>

#include "lecam/operators.hpp"

namespace lecam {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer applied to seed + (index + 1) * golden-ratio
/// increment. Used to derive per-step seeds from a scenario seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// d x n matrix of independent standard complex Gaussians.
CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed isometry with `cols` orthonormal columns in C^rows.
CMatrix haar_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng);
CMatrix haar_unitary(Eigen::Index d, Rng& rng);

/// Haar-random pure state.
DensityOperator random_pure_state(Eigen::Index d, Rng& rng);
/// Induced-measure mixed state G G^dagger / tr(G G^dagger) with a d x rank
/// Ginibre G. rank = 0 means full rank d.
DensityOperator random_density(Eigen::Index d, Rng& rng, Eigen::Index rank = 0);
/// Uniform point of the probability simplex.
std::vector<double> random_probability(Eigen::Index n, Rng& rng);

}  // namespace lecam
