#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lecam/conic_solver.hpp"

namespace lecam::acceptance {

struct SuiteResult {
  std::string name;
  int criterion = 0;
  bool pass = false;
  int cases = 0;
  /// Worst observed values against their tolerances, one line.
  std::string detail;
  /// A failure backed by a certified counterexample to the checked claim.
  bool counterexample_certified = false;
  double seconds = 0.0;
};

struct Options {
  /// Gap and feasibility tolerance injected into every solve.
  double solver_tol = 1e-8;
};

/// Every suite in run order; the solver suite comes last so that its audit
/// covers the solves of all earlier suites.
const std::vector<std::string>& suite_names();
/// Throws ConfigError for an unknown name.
int criterion_of(std::string_view suite);

/// Weak duality and determinism of every solve. Determinism is checked by
/// solving each problem a second time and comparing the results bit for bit.
class SolveAudit : public conic::SolveObserver {
 public:
  void on_solve(const conic::SdpProblem& problem, const conic::SolverOptions& options,
                const conic::SdpSolution& solution) override;

  std::int64_t solves() const noexcept { return solves_; }
  std::int64_t duality_violations() const noexcept { return duality_violations_; }
  std::int64_t nondeterministic() const noexcept { return nondeterministic_; }
  double worst_duality_gap() const noexcept { return worst_; }

 private:
  std::int64_t solves_ = 0;
  std::int64_t duality_violations_ = 0;
  std::int64_t nondeterministic_ = 0;
  double worst_ = 0.0;  // max of dual - primal
};

class Runner {
 public:
  explicit Runner(Options options = {});

  /// Throws ConfigError for an unknown name.
  SuiteResult run(std::string_view suite);
  const SolveAudit& audit() const noexcept { return audit_; }

 private:
  conic::SolverOptions solver();

  Options options_;
  SolveAudit audit_;
};

struct CriterionResult {
  int id = 0;
  bool pass = false;
  /// Failing only through suites with a certified counterexample.
  bool certified_failure = false;
  std::vector<const SuiteResult*> suites;
};

std::vector<CriterionResult> by_criterion(const std::vector<SuiteResult>& results);

/// 0 when every criterion passes, except those in `known_failures`, which must
/// fail and only through certified counterexamples; 1 otherwise.
int exit_status(const std::vector<SuiteResult>& results, const std::set<int>& known_failures);

/// One row per suite: name, criterion, case count, verdict, time, detail.
void print_suite_table(std::ostream& out, const std::vector<SuiteResult>& results);
/// One verdict line per criterion, followed by its suites.
void print_criteria(std::ostream& out, const std::vector<SuiteResult>& results, const std::set<int>& known_failures);

/// Radius of the smallest ball enclosing 3-d points, by brute force over all
/// supports of size 1..4.
double enclosing_ball_radius(const std::vector<Eigen::Vector3d>& points);

}  // namespace lecam::acceptance
