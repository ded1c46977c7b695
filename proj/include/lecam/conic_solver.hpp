#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lecam/operators.hpp"

namespace lecam::conic {

/// Cone of one variable block.
///  - RealPsd(n):    n x n real symmetric, positive semidefinite
///  - ComplexPsd(n): n x n complex Hermitian, positive semidefinite
///  - Nonnegative(n): n scalars >= 0 (a diagonal PSD block, i.e. LP variables)
///  - Free(n):       n unconstrained scalars
enum class BlockKind { RealPsd, ComplexPsd, Nonnegative, Free };

struct BlockSpec {
  BlockKind kind;
  Eigen::Index size;

  bool is_matrix() const noexcept { return kind == BlockKind::RealPsd || kind == BlockKind::ComplexPsd; }
};

/// sum over blocks of Re tr(C_b X_b) for matrix blocks and sum_k Re(c_b[k]) x_b[k]
/// for vector blocks. Since X_b is Hermitian only the Hermitian part of C_b
/// contributes, so Re(X_b(r, c)) is addressed by add(b, c, r, 1) and
/// Im(X_b(r, c)) by add(b, c, r, -i).
class LinearFunctional {
 public:
  /// Adds v at position (row, col) of block b's coefficient. Vector blocks use col = 0.
  LinearFunctional& add(int block, Eigen::Index row, Eigen::Index col, Complex v);
  /// Adds v * I on a matrix block (v * tr X_b), or v on every entry of a vector block.
  LinearFunctional& add_trace(int block, double v);
  LinearFunctional& add_matrix(int block, const CMatrix& coeff);

  const std::map<int, CMatrix>& terms() const noexcept { return terms_; }
  /// Pending add_trace contributions, as 1 x 1 entries keyed by block.
  const std::map<int, CMatrix>& trace_terms() const noexcept { return trace_terms_; }

 private:
  friend class SdpProblem;
  std::map<int, CMatrix> terms_;
  std::map<int, CMatrix> trace_terms_;
};

/// Point of the primal space: one matrix per block (vector blocks are n x 1).
struct BlockValues {
  std::vector<CMatrix> blocks;
};

/// minimize <C, X> subject to <A_i, X> = b_i, X in the product cone.
class SdpProblem {
 public:
  int add_block(BlockKind kind, Eigen::Index size);
  LinearFunctional& objective() noexcept { return objective_; }
  const LinearFunctional& objective() const noexcept { return objective_; }
  void add_constraint(LinearFunctional f, double rhs);
  /// A strictly feasible primal point (matrix blocks positive definite,
  /// vector cone entries positive, equalities satisfied). solve() rejects
  /// problems without one.
  void set_interior_point(BlockValues x0) { interior_ = std::move(x0); }

  const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
  const std::vector<LinearFunctional>& constraints() const noexcept { return constraints_; }
  const std::vector<double>& rhs() const noexcept { return rhs_; }
  const std::optional<BlockValues>& interior_point() const noexcept { return interior_; }

  /// Evaluates f at x.
  double evaluate(const LinearFunctional& f, const BlockValues& x) const;

 private:
  void check_terms(const LinearFunctional& f) const;

  std::vector<BlockSpec> blocks_;
  LinearFunctional objective_;
  std::vector<LinearFunctional> constraints_;
  std::vector<double> rhs_;
  std::optional<BlockValues> interior_;
};

enum class SolveStatus { Optimal, MaxIterations, NumericalFailure };
std::string_view to_string(SolveStatus s) noexcept;

struct Residuals {
  double primal_infeasibility = 0.0;  // ||A(X) - b|| / (1 + ||b||), plus cone violation
  double dual_infeasibility = 0.0;    // ||C - A*(y) - Z|| / (1 + ||C||), plus cone violation
  double relative_gap = 0.0;          // |pobj - dobj| / (1 + |pobj| + |dobj|)
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double primal_value = 0.0;
  double dual_value = 0.0;
  BlockValues x;  // primal blocks
  BlockValues z;  // dual slack blocks, zero for free blocks
  RVector y;      // equality multipliers
  Residuals residuals;
  int iterations = 0;
  std::string message;
};

class SolveObserver;

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
  /// When set, every solve writes its realified problem here (SDPA sparse format).
  std::ostream* debug_dump = nullptr;
  /// When set, one line per iteration: objectives, residuals, mu and step lengths.
  std::ostream* iteration_log = nullptr;
  /// Notified after every solve; not owned.
  SolveObserver* observer = nullptr;
};

class SolveObserver {
 public:
  virtual ~SolveObserver() = default;
  virtual void on_solve(const SdpProblem& problem, const SolverOptions& options, const SdpSolution& solution) = 0;
};

/// Real symmetric embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian matrix.
/// Spectrum is that of A with every eigenvalue doubled in multiplicity.
RMatrix realify(const CMatrix& hermitian);
/// Inverse of realify on matrices with the embedding's block pattern; other
/// inputs are projected onto it.
CMatrix complexify(const RMatrix& real_block);

/// Primal-dual interior-point method (HKM direction with Mehrotra
/// predictor-corrector) on the realified problem. Throws InvalidProblem when
/// the problem has no strictly feasible interior point or is malformed.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {});

/// Recomputes residuals directly from the complex problem data and the
/// solution's x, y, z. Cone violations (negative eigenvalues) are added to the
/// respective infeasibility.
Residuals check_kkt(const SdpProblem& problem, const SdpSolution& solution);

/// Writes the realified problem in SDPA sparse format. Our primal
/// min <C, X> s.t. <A_i, X> = b_i is SDPA's dual with F0 = -C, F_i = A_i,
/// c_i = b_i. Free variables become pairs of diagonal entries (x+, x-).
void write_sdpa(const SdpProblem& problem, std::ostream& out);

}  // namespace lecam::conic
