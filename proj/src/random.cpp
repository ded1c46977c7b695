#include "lecam/random.hpp"

#include <cmath>

namespace lecam {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  CMatrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = n01(rng);
      const double im = n01(rng);
      g(r, c) = Complex(re, im);
    }
  }
  return g;
}

CMatrix haar_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const CMatrix g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(rows, cols);
  const CMatrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so the distribution is Haar.
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Complex rkk = r(k, k);
    const double mag = std::abs(rkk);
    if (mag > 0.0) q.col(k) *= rkk / mag;
  }
  return q;
}

CMatrix haar_unitary(Eigen::Index d, Rng& rng) { return haar_isometry(d, d, rng); }

DensityOperator random_pure_state(Eigen::Index d, Rng& rng) {
  return DensityOperator::pure(ginibre(d, 1, rng).col(0));
}

DensityOperator random_density(Eigen::Index d, Rng& rng, Eigen::Index rank) {
  const CMatrix g = ginibre(d, rank > 0 ? rank : d, rng);
  CMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator(HermitianOperator(m));
}

std::vector<double> random_probability(Eigen::Index n, Rng& rng) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& x : p) total += (x = ex(rng));
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace lecam
