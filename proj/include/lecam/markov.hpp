#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lecam/channels.hpp"
#include "lecam/conic_solver.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/divergences.hpp"

namespace lecam {

/// An inhomogeneous Markov process rho_i = Gamma_i(rho_{i-1}) acting on every
/// member of an initial family.
struct ChainScenario {
  struct Homogeneous {
    Channel channel;
  };
  struct Explicit {
    std::vector<Channel> channels;  // Gamma_1, Gamma_2, ...
  };
  /// Gamma_i = random_channel(d, derive_seed(seed, i)).
  struct RandomHaar {
    std::uint64_t seed;
  };

  StateFamily initial;
  std::variant<Homogeneous, Explicit, RandomHaar> channels;
  int horizon = 0;

  /// Gamma_step for step >= 1.
  Channel channel_at(int step) const;
  bool is_homogeneous() const noexcept { return std::holds_alternative<Homogeneous>(channels); }
  /// Throws DimensionMismatch / ParameterOutOfRange.
  void validate() const;
};

/// A divergence evaluated on the members of a family selected by label.
struct DivergenceProbe {
  DivergenceSpec spec;
  std::vector<std::string> labels;
};

struct TraceRow {
  int step = 0;
  double sup_pairwise_td = 0.0;
  std::optional<double> delta_fw;        // delta(E_i, E_limit)
  std::optional<double> delta_bw;        // delta(E_limit, E_i)
  std::optional<double> Delta_to_limit;  // max of the two
  std::optional<double> delta_next;      // delta(E_i, E_{i+1})
  std::vector<double> divergences;       // one per probe
};

struct ConvergenceTrace {
  std::vector<StateFamily> families;  // E_0 .. E_N
  std::vector<TraceRow> rows;
  std::vector<std::string> divergence_names;
};

struct EvolveOptions {
  std::optional<StateFamily> limit;  // candidate limit for the deficiency columns
  bool step_deficiency = false;      // fill delta_next
  std::vector<DivergenceProbe> probes;
  conic::SolverOptions solver;
};

ConvergenceTrace evolve(const ChainScenario& scenario, const EvolveOptions& options = {});

/// Superoperator products S_i = Gamma_i o ... o Gamma_1 (S_0 = identity) and the
/// images of state_basis(d) under them.
struct BasisChain {
  OperatorBasis basis;
  std::vector<CMatrix> superoperators;       // S_0 .. S_N
  std::vector<StateFamily> basis_families;   // labels "b0", "b1", ...

  Channel composed(int step) const;
};

BasisChain basis_chain(const ChainScenario& scenario);

enum class LimitMode { Converged, LimitCycle, Undetermined };
std::string_view to_string(LimitMode mode) noexcept;

struct LimitOptions {
  int window = 5;
  double tol = 1e-7;
  /// Also record delta(basis limit, basis family at step i) for every step.
  bool basis_deficiency_history = false;
  conic::SolverOptions solver;
};

struct LimitEstimate {
  LimitMode mode = LimitMode::Undetermined;
  int period = 0;         // LimitCycle only
  int phase_step = -1;    // LimitCycle: step whose family is reported
  bool one_point = false; // Converged because all basis images merged
  std::optional<StateFamily> family;        // E_infinity
  std::optional<StateFamily> basis_family;  // images of the basis at the limit
  std::vector<RVector> coefficients;        // per label, on state_basis(d)
  double sup_alpha = 0.0;
  std::vector<double> step_residuals;    // ||S_i - S_{i-1}||_F, i = 1..N
  std::vector<double> window_residuals;  // ||S_i - S_{i-m}||_F, i = m..N
  std::vector<double> basis_deficiency;  // delta(basis limit, basis family at i), i = 0..N
  double psd_clip = 0.0;
  std::optional<double> cycle_Delta;  // Delta(E_phase, E_phase+period)
  std::string note;
};

LimitEstimate estimate_limit_family(const ChainScenario& scenario, const LimitOptions& options = {});

struct ContractionResult {
  double value = 0.0;  // ||Phi(psi) - Phi(phi)||_1 for the best pair found
  CVector psi;
  CVector phi;
  int restarts = 0;
};

/// sup over state pairs of ||Phi(rho) - Phi(rho')||_1, searched over pure pairs by
/// alternating maximization with random restarts. The value is attained, so it
/// is a lower bound on the supremum.
ContractionResult contraction_sup(const Channel& channel, std::uint64_t seed = 0);

struct ErgodicityReport {
  std::optional<int> ergodic_at;
  std::vector<double> contraction;        // contraction_sup(S_i), i = 0..N
  std::vector<double> chebyshev_radius;   // Delta(E_i, one-point at its center), when cross-checked
};

ErgodicityReport weak_ergodicity_test(const ChainScenario& scenario, double tol = 1e-6, bool cross_check = true,
                                      const conic::SolverOptions& options = {});

struct FixedPointCheck {
  double Delta_value;
  bool pass;
};

/// Delta(Gamma(E), E) <= tol.
FixedPointCheck fixed_point_check(const Channel& gamma, const StateFamily& family, double tol = 1e-5,
                                  const conic::SolverOptions& options = {});

struct MonotoneTrace {
  std::vector<double> values;  // D at steps 0..N
  double max_upward_violation = 0.0;
  std::optional<double> limit_value;  // D at the limit family
  std::optional<double> final_gap;    // |D_N - limit_value|
};

MonotoneTrace monotone_trace(const ChainScenario& scenario, const DivergenceProbe& probe,
                             const std::optional<StateFamily>& limit = std::nullopt,
                             const conic::SolverOptions& options = {});

}  // namespace lecam
