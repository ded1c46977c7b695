#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lecam/channels.hpp"
#include "lecam/conic_solver.hpp"
#include "lecam/operators.hpp"

namespace lecam {

/// A finite labelled family of states on a common space. Labels are unique;
/// families are compared label by label, never by position.
class StateFamily {
 public:
  using Entry = std::pair<std::string, DensityOperator>;

  explicit StateFamily(std::vector<Entry> entries);
  /// Labels "0", "1", ...
  static StateFamily from_states(const std::vector<DensityOperator>& states);
  /// The same state under every label.
  static StateFamily one_point(const DensityOperator& state, const std::vector<std::string>& labels);

  Eigen::Index dim() const noexcept { return entries_.front().second.dim(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<std::string> labels() const;
  std::vector<DensityOperator> states() const;
  const DensityOperator& state(std::size_t index) const { return entries_.at(index).second; }
  /// Throws UnknownLabel.
  const DensityOperator& state(const std::string& label) const;
  std::optional<std::size_t> index_of(const std::string& label) const;

  /// {L(rho_theta)}.
  StateFamily mapped(const Channel& channel) const;
  /// Subfamily on `labels`, in the given order. Throws UnknownLabel.
  StateFamily restricted(const std::vector<std::string>& labels) const;

 private:
  std::vector<Entry> entries_;
};

/// max_theta ||rho_theta - sigma_theta||_1, the entrywise distance of two families.
double family_distance(const StateFamily& e, const StateFamily& f);
/// max over label pairs of ||rho_theta - rho_theta'||_1.
double sup_pairwise_distance(const StateFamily& e);

struct DeficiencyResult {
  double value = 0.0;       // certified primal value, in [0, 2]
  double dual_value = 0.0;  // lower bound from the dual
  std::optional<Channel> optimal_channel;
  conic::Residuals residuals;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// delta(E, F) = inf over channels L of max_theta ||L(rho_theta) - sigma_theta||_1,
/// solved exactly as a semidefinite program over the Choi matrix of L.
/// Throws LabelMismatch / DimensionMismatch / SolverFailure.
DeficiencyResult deficiency_delta(const StateFamily& e, const StateFamily& f, const conic::SolverOptions& options = {});

/// max(delta(E, F), delta(F, E)).
double deficiency_Delta(const StateFamily& e, const StateFamily& f, const conic::SolverOptions& options = {});

/// E is at least as informative as F: delta(E, F) <= tol.
bool is_more_informative(const StateFamily& e, const StateFamily& f, double tol = 1e-6,
                         const conic::SolverOptions& options = {});
bool is_equivalent(const StateFamily& e, const StateFamily& f, double tol = 1e-6,
                   const conic::SolverOptions& options = {});

/// min over states c of max_theta ||c - rho_theta||_1, which equals the
/// deficiency of any one-point family with respect to E.
double chebyshev_radius(const StateFamily& e, const conic::SolverOptions& options = {});

}  // namespace lecam
