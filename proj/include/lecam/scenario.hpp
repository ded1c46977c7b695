#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lecam/classical.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/markov.hpp"

namespace lecam {

/// A validated scenario document. Classical documents keep their probability
/// vectors and stochastic matrices alongside the diagonal quantum embedding,
/// so every quantum analysis also runs on them.
struct ScenarioConfig {
  explicit ScenarioConfig(StateFamily initial) : dim(initial.dim()), family(std::move(initial)) {}

  Eigen::Index dim = 0;
  bool classical = false;
  std::uint64_t seed = 0;

  StateFamily family;
  std::optional<StateFamily> target;
  std::optional<ClassicalFamily> classical_family;
  std::optional<ClassicalFamily> classical_target;

  /// Present when the document has a "chain" section.
  std::optional<ChainScenario> chain;
  /// Classical documents: M_1 .. M_N, expanded to the horizon.
  std::vector<StochasticMatrix> classical_chain;

  std::vector<DivergenceProbe> divergences;
  LimitOptions limit;
  double ergodicity_tol = 1e-6;
  bool cross_check = false;
  std::size_t max_subset = 3;
  bool step_deficiency = false;
};

/// Parses and validates a scenario document. Every problem, including unknown
/// keys and invalid states or channels, throws ConfigError naming the JSON path.
ScenarioConfig parse_scenario(std::string_view text);
/// Reads `path` and parses it. Throws ConfigError when the file is unreadable.
ScenarioConfig load_scenario(const std::string& path);

}  // namespace lecam
