#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lecam/conic_solver.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/operators.hpp"

namespace lecam {

/// Nonnegative entries summing to 1 within 1e-12.
class ProbabilityVector {
 public:
  static constexpr double kTolerance = 1e-12;

  /// Throws ParameterOutOfRange for negative entries, NotNormalized otherwise.
  explicit ProbabilityVector(RVector p);
  ProbabilityVector(std::initializer_list<double> p);

  Eigen::Index dim() const noexcept { return p_.size(); }
  const RVector& values() const noexcept { return p_; }
  double operator()(Eigen::Index k) const { return p_(k); }

 private:
  RVector p_;
};

/// n_out x n_in, nonnegative, every column summing to 1 within 1e-12.
class StochasticMatrix {
 public:
  /// Throws ParameterOutOfRange / NotNormalized.
  explicit StochasticMatrix(RMatrix m);
  static StochasticMatrix identity(Eigen::Index n);

  Eigen::Index rows() const noexcept { return m_.rows(); }
  Eigen::Index cols() const noexcept { return m_.cols(); }
  const RMatrix& matrix() const noexcept { return m_; }

  /// M p, renormalized against rounding. Throws DimensionMismatch.
  ProbabilityVector apply(const ProbabilityVector& p) const;

 private:
  RMatrix m_;
};

/// Labelled probability vectors on a common sample space; labels are unique.
class ClassicalFamily {
 public:
  using Entry = std::pair<std::string, ProbabilityVector>;

  explicit ClassicalFamily(std::vector<Entry> entries);
  /// Labels "0", "1", ...
  static ClassicalFamily from_vectors(const std::vector<ProbabilityVector>& vectors);

  Eigen::Index dim() const noexcept { return entries_.front().second.dim(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<std::string> labels() const;
  const ProbabilityVector& vector(std::size_t index) const { return entries_.at(index).second; }
  /// Throws UnknownLabel.
  const ProbabilityVector& vector(const std::string& label) const;
  std::optional<std::size_t> index_of(const std::string& label) const;

  ClassicalFamily mapped(const StochasticMatrix& m) const;
  /// Diagonal density operators in the computational basis.
  StateFamily to_quantum() const;

 private:
  std::vector<Entry> entries_;
};

/// Subfamily with labels `labels`, in that order. Throws UnknownLabel, or
/// ParameterOutOfRange for an empty selection.
ClassicalFamily restrict(const ClassicalFamily& e, const std::vector<std::string>& labels);

struct LpDeficiencyResult {
  double value = 0.0;  // in [0, 2]
  double dual_value = 0.0;
  std::optional<StochasticMatrix> matrix;  // the optimal garbling, n_F x n_E
  conic::Residuals residuals;
  int iterations = 0;
};

/// inf over stochastic M of max_theta ||M p_theta - q_theta||_1, as an LP.
/// Throws LabelMismatch / SolverFailure.
LpDeficiencyResult lp_deficiency(const ClassicalFamily& e, const ClassicalFamily& f,
                                 const conic::SolverOptions& options = {});
double lp_Delta(const ClassicalFamily& e, const ClassicalFamily& f, const conic::SolverOptions& options = {});

struct ClassicalTrace {
  std::vector<ClassicalFamily> families;   // E_0 .. E_N
  std::vector<double> sup_pairwise_l1;     // per step
};

/// P_i = M_i P_{i-1} for every member. Throws DimensionMismatch.
ClassicalTrace evolve_classical(const ClassicalFamily& initial, const std::vector<StochasticMatrix>& matrices);

struct ErgodicityOptions {
  /// Subsets of at most this many labels enter the weak-topology check; 0 skips it.
  std::size_t max_subset = 3;
  /// Reference E* for the weak-topology check; the final family when absent.
  std::optional<ClassicalFamily> limit;
  conic::SolverOptions solver;
};

struct ClassicalErgodicity {
  std::optional<int> weak;  // first step with max pairwise L1 <= tol
  std::map<std::pair<std::string, std::string>, std::optional<int>> l1_weak_per_pair;
  /// weak equals the latest per-pair onset (they must agree for finite Theta).
  bool detections_agree = true;
  /// Per subset: first step from which Delta(restricted E_i, restricted E*) <= tol holds for the rest of the trace.
  std::map<std::vector<std::string>, std::optional<int>> subset_onset;
  std::optional<int> weak_topology;  // latest subset onset, when all subsets settle
};

ClassicalErgodicity ergodicity_tests(const ClassicalTrace& trace, double tol, const ErgodicityOptions& options = {});

}  // namespace lecam
