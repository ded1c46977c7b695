#pragma once

// Shared construction for the trace-norm minimax programs (deficiency,
// Chebyshev center): for a Hermitian-valued linear map L of the decision
// blocks, impose L(.) - target = P - Q with P, Q >= 0.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "lecam/conic_solver.hpp"
#include "lecam/operators.hpp"

namespace lecam::detail {

/// Adds to f the functional X -> Re(w * L(X)(r, c)).
using EntryWriter = std::function<void(conic::LinearFunctional& f, Eigen::Index r, Eigen::Index c, Complex w)>;

/// One P_j - Q_j pair entering a splitting row with the given weight.
struct SplitTerm {
  double weight;
  int p_block;
  int q_block;
};

/// For every r <= c adds Re and (r < c) Im equalities
/// L(r,c) + sum_j w_j (P_j(r,c) - Q_j(r,c)) = target(r,c).
///
/// When the trace of L is fixed by the other constraints of the program, the
/// last diagonal row is a combination of those up to the P, Q terms and makes
/// the Newton system singular near the optimum. Passing `trace_rhs` replaces it
/// by the equivalent sum_j w_j tr(P_j - Q_j) = trace_rhs.
inline void add_splitting_constraints(conic::SdpProblem& p, const EntryWriter& linear_part,
                                      const std::vector<SplitTerm>& terms, const CMatrix& target,
                                      std::optional<double> trace_rhs = std::nullopt) {
  const Eigen::Index d = target.rows();
  const Complex one(1.0, 0.0);
  const Complex minus_i(0.0, -1.0);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = r; c < d; ++c) {
      for (int part = 0; part < (r == c ? 1 : 2); ++part) {
        const Complex w = part == 0 ? one : minus_i;
        conic::LinearFunctional f;
        if (trace_rhs && r == d - 1 && c == d - 1) {
          for (const auto& t : terms) {
            if (t.weight == 0.0) continue;
            f.add_trace(t.p_block, t.weight);
            f.add_trace(t.q_block, -t.weight);
          }
          p.add_constraint(std::move(f), *trace_rhs);
          continue;
        }
        linear_part(f, r, c, w);
        for (const auto& t : terms) {
          if (t.weight == 0.0) continue;
          f.add(t.p_block, c, r, t.weight * w);
          f.add(t.q_block, c, r, -t.weight * w);
        }
        const double rhs = part == 0 ? target(r, c).real() : target(r, c).imag();
        p.add_constraint(std::move(f), rhs);
      }
    }
  }
}

/// Orthogonal k x k matrix U from the SVD of the k x n matrix `rows`. Taking the
/// splitting rows in the combinations given by the columns of U leaves the
/// program unchanged, but rows whose linear parts nearly coincide cancel in the
/// data instead of in the Newton system, which keeps the latter well conditioned.
inline RMatrix row_rotation(const RMatrix& rows) {
  Eigen::JacobiSVD<RMatrix> svd(rows, Eigen::ComputeFullU);
  return svd.matrixU();
}

/// Realified row-major vec of a square matrix.
inline RVector real_vec(const CMatrix& m) {
  RVector v(2 * m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      v(k) = m(r, c).real();
      v(m.size() + k) = m(r, c).imag();
      ++k;
    }
  return v;
}

/// Strictly positive P, Q with P - Q = diff: positive and negative parts plus margin * I.
inline std::pair<CMatrix, CMatrix> split_with_margin(const HermitianOperator& diff, double margin) {
  const auto [values, vectors] = diff.eigen();
  const RVector pos = values.cwiseMax(0.0);
  const RVector neg = (-values).cwiseMax(0.0);
  const Eigen::Index d = diff.dim();
  CMatrix p = vectors * pos.cast<Complex>().asDiagonal() * vectors.adjoint() + margin * CMatrix::Identity(d, d);
  CMatrix q = vectors * neg.cast<Complex>().asDiagonal() * vectors.adjoint() + margin * CMatrix::Identity(d, d);
  return {0.5 * (p + p.adjoint()), 0.5 * (q + q.adjoint())};
}

}  // namespace lecam::detail
