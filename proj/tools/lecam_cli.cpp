#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lecam/acceptance.hpp"
#include "lecam/scenario.hpp"

namespace {

using lecam::Error;
using lecam::ErrorCode;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kSelftestFailed = 1;
constexpr int kValidation = 2;
constexpr int kSolver = 3;

struct Output {
  std::optional<std::string> csv;
  ordered_json summary;
};

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string probe_name(const lecam::DivergenceProbe& p) {
  std::string name = p.spec.name() + "(";
  for (std::size_t k = 0; k < p.labels.size(); ++k) name += (k ? ";" : "") + p.labels[k];
  return name + ")";
}

std::string trace_csv(const lecam::ConvergenceTrace& trace, const std::vector<lecam::DivergenceProbe>& probes) {
  std::ostringstream out;
  out << "# schema=1\n";
  out << "step,sup_pairwise_td,delta_fw,delta_bw,Delta_to_limit";
  for (const auto& p : probes) out << ',' << csv_field(probe_name(p));
  out << '\n';
  const auto opt = [](const std::optional<double>& v) { return v ? number(*v) : std::string(); };
  for (const auto& row : trace.rows) {
    out << row.step << ',' << number(row.sup_pairwise_td) << ',' << opt(row.delta_fw) << ',' << opt(row.delta_bw) << ','
        << opt(row.Delta_to_limit);
    for (const double v : row.divergences) out << ',' << number(v);
    out << '\n';
  }
  return out.str();
}

ordered_json matrix_json(const lecam::CMatrix& m) {
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json rr = ordered_json::array(), ri = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

ordered_json family_json(const lecam::StateFamily& f) {
  ordered_json out = ordered_json::array();
  for (const auto& [label, rho] : f.entries()) out.push_back({{"label", label}, {"state", matrix_json(rho.matrix())}});
  return out;
}

ordered_json optional_int(const std::optional<int>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json header(const std::string& command, const lecam::ScenarioConfig& cfg) {
  ordered_json s;
  s["schema"] = 1;
  s["command"] = command;
  s["dim"] = cfg.dim;
  s["classical"] = cfg.classical;
  s["seed"] = cfg.seed;
  s["labels"] = cfg.family.labels();
  if (cfg.chain) s["horizon"] = cfg.chain->horizon;
  return s;
}

const lecam::ChainScenario& require_chain(const lecam::ScenarioConfig& cfg) {
  if (!cfg.chain) throw Error(ErrorCode::ConfigError, "$: this command needs a 'chain' section");
  return *cfg.chain;
}

lecam::LimitEstimate limit_estimate(const lecam::ScenarioConfig& cfg) {
  return lecam::estimate_limit_family(require_chain(cfg), cfg.limit);
}

ordered_json limit_json(const lecam::LimitEstimate& est) {
  ordered_json l;
  l["mode"] = std::string(lecam::to_string(est.mode));
  l["period"] = est.period;
  l["phase_step"] = est.phase_step;
  l["one_point"] = est.one_point;
  l["sup_alpha"] = est.sup_alpha;
  l["psd_clip"] = est.psd_clip;
  l["cycle_Delta"] = est.cycle_Delta ? ordered_json(*est.cycle_Delta) : ordered_json(nullptr);
  l["final_window_residual"] = est.window_residuals.empty() ? ordered_json(nullptr) : ordered_json(est.window_residuals.back());
  l["note"] = est.note;
  l["family"] = est.family ? family_json(*est.family) : ordered_json(nullptr);
  return l;
}

ordered_json quantum_ergodicity_json(const lecam::ErgodicityReport& rep, double tol) {
  ordered_json e;
  e["tol"] = tol;
  e["contraction"] = rep.contraction;
  if (!rep.chebyshev_radius.empty()) e["chebyshev_radius"] = rep.chebyshev_radius;
  return e;
}

ordered_json classical_ergodicity_json(const lecam::ScenarioConfig& cfg, double tol) {
  const lecam::ClassicalTrace trace = lecam::evolve_classical(*cfg.classical_family, cfg.classical_chain);
  lecam::ErgodicityOptions options;
  options.max_subset = cfg.max_subset;
  const lecam::ClassicalErgodicity erg = lecam::ergodicity_tests(trace, tol, options);
  ordered_json e;
  e["weak"] = optional_int(erg.weak);
  ordered_json pairs = ordered_json::array();
  for (const auto& [pair, onset] : erg.l1_weak_per_pair) {
    pairs.push_back({{"labels", {pair.first, pair.second}}, {"onset", optional_int(onset)}});
  }
  e["l1_weak_per_pair"] = pairs;
  e["detections_agree"] = erg.detections_agree;
  e["weak_topology"] = optional_int(erg.weak_topology);
  e["sup_pairwise_l1"] = trace.sup_pairwise_l1;
  return e;
}

ordered_json ergodicity_section(const lecam::ScenarioConfig& cfg, double tol, ordered_json& summary) {
  const lecam::ErgodicityReport rep = lecam::weak_ergodicity_test(require_chain(cfg), tol, cfg.cross_check);
  summary["ergodic_at"] = optional_int(rep.ergodic_at);
  ordered_json e = quantum_ergodicity_json(rep, tol);
  if (cfg.classical) e["classical"] = classical_ergodicity_json(cfg, tol);
  return e;
}

double max_next(const lecam::ConvergenceTrace& trace) {
  double worst = 0.0;
  for (const auto& row : trace.rows) worst = std::max(worst, row.delta_next.value_or(0.0));
  return worst;
}

ordered_json divergences_json(const lecam::ScenarioConfig& cfg, const std::optional<lecam::StateFamily>& limit) {
  ordered_json out = ordered_json::array();
  for (const auto& probe : cfg.divergences) {
    const lecam::MonotoneTrace t = lecam::monotone_trace(require_chain(cfg), probe, limit);
    ordered_json d;
    d["name"] = probe.spec.name();
    d["labels"] = probe.labels;
    d["values"] = t.values;
    d["max_upward_violation"] = t.max_upward_violation;
    d["limit_value"] = t.limit_value ? ordered_json(*t.limit_value) : ordered_json(nullptr);
    d["final_gap"] = t.final_gap ? ordered_json(*t.final_gap) : ordered_json(nullptr);
    out.push_back(d);
  }
  return out;
}

Output cmd_simulate(const lecam::ScenarioConfig& cfg, std::optional<double> tol) {
  const lecam::ChainScenario& chain = require_chain(cfg);
  Output out;
  out.summary = header("simulate", cfg);
  const lecam::LimitEstimate est = limit_estimate(cfg);
  lecam::EvolveOptions eo;
  eo.limit = est.family;
  eo.step_deficiency = cfg.step_deficiency;
  eo.probes = cfg.divergences;
  const lecam::ConvergenceTrace trace = lecam::evolve(chain, eo);
  out.csv = trace_csv(trace, cfg.divergences);
  out.summary["limit"] = limit_json(est);
  out.summary["ergodic_at"] = nullptr;
  out.summary["ergodicity"] = ergodicity_section(cfg, tol.value_or(cfg.ergodicity_tol), out.summary);
  if (cfg.step_deficiency) out.summary["max_delta_next"] = max_next(trace);
  if (!cfg.divergences.empty()) out.summary["divergences"] = divergences_json(cfg, est.family);
  return out;
}

Output cmd_limit(const lecam::ScenarioConfig& cfg, std::optional<double> tol) {
  lecam::ScenarioConfig local = cfg;
  if (tol) local.limit.tol = *tol;
  Output out;
  out.summary = header("limit", cfg);
  const lecam::LimitEstimate est = limit_estimate(local);
  lecam::EvolveOptions eo;
  eo.limit = est.family;
  eo.step_deficiency = cfg.step_deficiency;
  eo.probes = cfg.divergences;
  const lecam::ConvergenceTrace trace = lecam::evolve(require_chain(cfg), eo);
  out.csv = trace_csv(trace, cfg.divergences);
  out.summary["window"] = local.limit.window;
  out.summary["tol"] = local.limit.tol;
  out.summary["limit"] = limit_json(est);
  out.summary["window_residuals"] = est.window_residuals;
  if (cfg.step_deficiency) out.summary["max_delta_next"] = max_next(trace);
  return out;
}

Output cmd_ergodicity(const lecam::ScenarioConfig& cfg, std::optional<double> tol) {
  Output out;
  out.summary = header("ergodicity", cfg);
  lecam::EvolveOptions eo;
  eo.probes = cfg.divergences;
  out.csv = trace_csv(lecam::evolve(require_chain(cfg), eo), cfg.divergences);
  out.summary["ergodic_at"] = nullptr;
  out.summary["ergodicity"] = ergodicity_section(cfg, tol.value_or(cfg.ergodicity_tol), out.summary);
  return out;
}

Output cmd_divergences(const lecam::ScenarioConfig& cfg) {
  if (cfg.divergences.empty()) throw Error(ErrorCode::ConfigError, "$.analyses.divergences: nothing to evaluate");
  Output out;
  out.summary = header("divergences", cfg);
  const lecam::LimitEstimate est = limit_estimate(cfg);
  out.summary["limit_mode"] = std::string(lecam::to_string(est.mode));
  out.summary["divergences"] = divergences_json(cfg, est.family);
  return out;
}

Output cmd_deficiency(const lecam::ScenarioConfig& cfg) {
  if (!cfg.target) throw Error(ErrorCode::ConfigError, "$: the deficiency command needs a 'target' family");
  double fw = 0.0, bw = 0.0;
  std::string method;
  if (cfg.classical) {
    fw = lecam::lp_deficiency(*cfg.classical_family, *cfg.classical_target).value;
    bw = lecam::lp_deficiency(*cfg.classical_target, *cfg.classical_family).value;
    method = "lp";
  } else {
    fw = lecam::deficiency_delta(cfg.family, *cfg.target).value;
    bw = lecam::deficiency_delta(*cfg.target, cfg.family).value;
    method = "sdp";
  }
  Output out;
  out.summary["delta_fw"] = fw;
  out.summary["delta_bw"] = bw;
  out.summary["Delta"] = std::max(fw, bw);
  out.summary["method"] = method;
  return out;
}

// Writes nothing unless every file can be produced.
void write_outputs(const std::string& dir, const Output& out) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + (std::filesystem::path(dir) / name).string());
  };
  if (out.csv) write("trace.csv", *out.csv);
  write("summary.json", out.summary.dump(2) + "\n");
}

bool is_validation(ErrorCode code) {
  return code != ErrorCode::SolverFailure && code != ErrorCode::InvalidProblem && code != ErrorCode::NumericalTP;
}

int run_scenario_command(const std::string& command, const std::string& config, const std::optional<std::string>& dir,
                         std::optional<double> tol) {
  std::optional<lecam::ScenarioConfig> cfg;
  try {
    cfg.emplace(lecam::load_scenario(config));
  } catch (const Error& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  }
  Output out;
  try {
    if (command == "simulate") out = cmd_simulate(*cfg, tol);
    if (command == "limit") out = cmd_limit(*cfg, tol);
    if (command == "ergodicity") out = cmd_ergodicity(*cfg, tol);
    if (command == "divergences") out = cmd_divergences(*cfg);
    if (command == "deficiency") out = cmd_deficiency(*cfg);
  } catch (const Error& e) {
    std::cerr << (is_validation(e.code()) ? "invalid config: " : "solver failure: ") << e.what() << "\n";
    return is_validation(e.code()) ? kValidation : kSolver;
  }
  if (dir) {
    try {
      write_outputs(*dir, out);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kValidation;
    }
  }
  if (command == "simulate") {
    std::cout << "wrote " << (std::filesystem::path(*dir) / "trace.csv").string() << " and "
              << (std::filesystem::path(*dir) / "summary.json").string() << "\n";
  } else {
    std::cout << out.summary.dump(2) << "\n";
  }
  return kOk;
}

int run_selftest(const std::vector<std::string>& suites, std::optional<double> tol, const std::vector<int>& known) {
  lecam::acceptance::Options options;
  if (tol) options.solver_tol = *tol;
  std::vector<std::string> names = suites.empty() ? lecam::acceptance::suite_names() : suites;
  for (const auto& n : names) {
    try {
      lecam::acceptance::criterion_of(n);
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return kValidation;
    }
  }
  lecam::acceptance::Runner runner(options);
  std::vector<lecam::acceptance::SuiteResult> results;
  for (const auto& n : names) results.push_back(runner.run(n));
  lecam::acceptance::print_suite_table(std::cout, results);
  const std::set<int> known_set(known.begin(), known.end());
  const int status = lecam::acceptance::exit_status(results, known_set);
  std::cout << (status == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return status == 0 ? kOk : kSelftestFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deficiency distances, Markov chain limits and ergodicity for finite state families"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  double tol = 0.0;
  std::vector<std::string> suites;
  std::vector<int> known;

  struct Command {
    const char* name;
    const char* help;
    bool needs_out;
    bool takes_tol;
  };
  const std::vector<Command> commands = {
      {"simulate", "Evolve the family; write trace.csv and summary.json", true, true},
      {"deficiency", "Print delta(family, target), delta(target, family) and Delta as JSON", false, false},
      {"ergodicity", "Weak ergodicity of the chain (and classical L1 tests)", false, true},
      {"limit", "Estimate the limit family of the chain", false, true},
      {"divergences", "Divergence traces along the chain and at its limit", false, false},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    CLI::Option* out = sub->add_option("--out", out_dir, "Output directory");
    if (c.needs_out) out->required();
    if (c.takes_tol) sub->add_option("--tol", tol, "Override the command's tolerance")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  CLI::App* selftest = app.add_subcommand("selftest", "Run the acceptance suites");
  selftest->add_option("--suite", suites, "Run only these suites");
  selftest->add_option("--tol", tol, "Solver gap and feasibility tolerance")->check(CLI::PositiveNumber);
  selftest->add_option("--known-failure", known, "Criteria expected to fail with a certified counterexample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  const std::optional<double> tol_opt = tol > 0.0 ? std::optional<double>(tol) : std::nullopt;
  if (selftest->parsed()) return run_selftest(suites, tol_opt, known);
  for (std::size_t k = 0; k < commands.size(); ++k) {
    if (subs[k]->parsed()) {
      const std::optional<std::string> dir = out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir);
      return run_scenario_command(commands[k].name, config, dir, tol_opt);
    }
  }
  return kValidation;
}
