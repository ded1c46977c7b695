#include "lecam/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lecam/random.hpp"

namespace lecam {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::ConfigError, path + ": " + message);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& required,
                const std::set<std::string>& optional) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) fail(path, "unknown key '" + key + "'");
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) fail(path, "missing key '" + key + "'");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t seed_value(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) fail(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

RVector real_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
  RVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = number(v[k], path + "[" + std::to_string(k) + "]");
  return out;
}

RMatrix real_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  RMatrix out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const RVector row = real_vector(v[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
    if (r == 0) out.resize(rows, row.size());
    if (row.size() != out.cols()) fail(path, "rows differ in length");
    out.row(r) = row.transpose();
  }
  return out;
}

// {"re": [[...]], "im": [[...]]}; "im" defaults to zero.
CMatrix complex_matrix(const json& v, const std::string& path) {
  check_keys(v, path, {"re"}, {"im"});
  const RMatrix re = real_matrix(v["re"], path + ".re");
  RMatrix im = RMatrix::Zero(re.rows(), re.cols());
  if (v.contains("im")) {
    im = real_matrix(v["im"], path + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) fail(path, "re and im differ in shape");
  }
  CMatrix out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

CVector complex_vector(const json& v, const std::string& path) {
  check_keys(v, path, {"re"}, {"im"});
  const RVector re = real_vector(v["re"], path + ".re");
  RVector im = RVector::Zero(re.size());
  if (v.contains("im")) {
    im = real_vector(v["im"], path + ".im");
    if (im.size() != re.size()) fail(path, "re and im differ in length");
  }
  CVector out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

CMatrix square(const CMatrix& m, Eigen::Index dim, const std::string& path) {
  if (m.rows() != dim || m.cols() != dim) {
    fail(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  return m;
}

// Runs a library constructor and reports its validation error at `path`.
template <class F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(path, e.what());
  }
}

DensityOperator quantum_state(const json& entry, Eigen::Index dim, const std::string& path) {
  if (entry.contains("state")) {
    const CMatrix m = square(complex_matrix(entry["state"], path + ".state"), dim, path + ".state");
    return guarded(path + ".state", [&] { return DensityOperator(m); });
  }
  if (entry.contains("pure")) {
    const CVector psi = complex_vector(entry["pure"], path + ".pure");
    if (psi.size() != dim) fail(path + ".pure", "expected " + std::to_string(dim) + " amplitudes");
    return guarded(path + ".pure", [&] { return DensityOperator::pure(psi); });
  }
  fail(path, "a quantum member needs 'state' or 'pure'");
}

struct ParsedFamily {
  StateFamily quantum;
  std::optional<ClassicalFamily> classical;
};

ParsedFamily family(const json& v, Eigen::Index dim, bool classical, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of members");
  std::vector<StateFamily::Entry> quantum;
  std::vector<ClassicalFamily::Entry> probs;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string at = path + "[" + std::to_string(k) + "]";
    const json& entry = v[k];
    if (classical) {
      check_keys(entry, at, {"label", "p"}, {});
    } else {
      check_keys(entry, at, {"label"}, {"state", "pure"});
      if (entry.contains("state") && entry.contains("pure")) fail(at, "give either 'state' or 'pure'");
    }
    const std::string label = string(entry["label"], at + ".label");
    if (classical) {
      const RVector p = real_vector(entry["p"], at + ".p");
      if (p.size() != dim) fail(at + ".p", "expected " + std::to_string(dim) + " probabilities");
      ProbabilityVector pv = guarded(at + ".p", [&] { return ProbabilityVector(p); });
      quantum.emplace_back(label, DensityOperator::diagonal(std::vector<double>(p.begin(), p.end())));
      probs.emplace_back(label, std::move(pv));
    } else {
      quantum.emplace_back(label, quantum_state(entry, dim, at));
    }
  }
  ParsedFamily out{guarded(path, [&] { return StateFamily(std::move(quantum)); }), std::nullopt};
  if (classical) out.classical = guarded(path, [&] { return ClassicalFamily(std::move(probs)); });
  return out;
}

StochasticMatrix random_stochastic(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  RMatrix m(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const std::vector<double> p = random_probability(n, rng);
    for (Eigen::Index r = 0; r < n; ++r) m(r, c) = p[static_cast<std::size_t>(r)];
  }
  return StochasticMatrix(m);
}

struct ParsedChannel {
  Channel quantum;
  std::optional<StochasticMatrix> classical;
};

ParsedChannel channel(const json& v, Eigen::Index dim, bool classical, const std::string& path) {
  if (!v.is_object() || !v.contains("kind")) fail(path, "a channel needs a 'kind'");
  const std::string kind = string(v["kind"], path + ".kind");
  if (classical && kind != "classical" && kind != "random") {
    fail(path + ".kind", "classical scenarios accept only 'classical' and 'random' channels");
  }
  if (kind == "depolarizing") {
    check_keys(v, path, {"kind", "p"}, {});
    const double p = number(v["p"], path + ".p");
    return {guarded(path, [&] { return depolarizing(p, dim); }), std::nullopt};
  }
  if (kind == "dephasing") {
    check_keys(v, path, {"kind", "lambda"}, {});
    const double lambda = number(v["lambda"], path + ".lambda");
    return {guarded(path, [&] { return dephasing(lambda, dim); }), std::nullopt};
  }
  if (kind == "amplitude_damping") {
    check_keys(v, path, {"kind", "gamma"}, {});
    if (dim != 2) fail(path, "amplitude_damping acts on qubits only");
    const double gamma = number(v["gamma"], path + ".gamma");
    return {guarded(path, [&] { return amplitude_damping(gamma); }), std::nullopt};
  }
  if (kind == "unitary") {
    check_keys(v, path, {"kind", "matrix"}, {});
    const CMatrix u = square(complex_matrix(v["matrix"], path + ".matrix"), dim, path + ".matrix");
    return {guarded(path, [&] { return unitary_channel(u); }), std::nullopt};
  }
  if (kind == "constant") {
    check_keys(v, path, {"kind", "state"}, {});
    const CMatrix m = square(complex_matrix(v["state"], path + ".state"), dim, path + ".state");
    return {guarded(path, [&] { return constant_channel(DensityOperator(m), dim); }), std::nullopt};
  }
  if (kind == "classical") {
    check_keys(v, path, {"kind", "matrix"}, {});
    const RMatrix m = real_matrix(v["matrix"], path + ".matrix");
    if (m.rows() != dim || m.cols() != dim) fail(path + ".matrix", "expected a square matrix of the scenario dimension");
    StochasticMatrix s = guarded(path, [&] { return StochasticMatrix(m); });
    return {guarded(path, [&] { return classical_embedding(m); }), std::move(s)};
  }
  if (kind == "kraus") {
    check_keys(v, path, {"kind", "operators"}, {});
    const json& ops = v["operators"];
    if (!ops.is_array() || ops.empty()) fail(path + ".operators", "expected a nonempty array of matrices");
    std::vector<CMatrix> kraus;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const std::string at = path + ".operators[" + std::to_string(k) + "]";
      kraus.push_back(square(complex_matrix(ops[k], at), dim, at));
    }
    return {guarded(path, [&] { return Channel::from_kraus(kraus); }), std::nullopt};
  }
  if (kind == "choi") {
    check_keys(v, path, {"kind", "matrix"}, {});
    const CMatrix j = square(complex_matrix(v["matrix"], path + ".matrix"), dim * dim, path + ".matrix");
    return {guarded(path, [&] { return Channel::from_choi(j, dim, dim); }), std::nullopt};
  }
  if (kind == "random") {
    check_keys(v, path, {"kind", "seed"}, {});
    const std::uint64_t seed = seed_value(v["seed"], path + ".seed");
    if (classical) {
      StochasticMatrix s = random_stochastic(dim, seed);
      return {classical_embedding(s.matrix()), std::move(s)};
    }
    return {random_channel(dim, seed), std::nullopt};
  }
  fail(path + ".kind", "unknown channel kind '" + kind + "'");
}

DivergenceSpec divergence_spec(const json& v, const std::string& path) {
  if (!v.is_object() || !v.contains("kind")) fail(path, "a divergence needs a 'kind'");
  const std::string kind = string(v["kind"], path + ".kind");
  DivergenceSpec spec;
  if (kind == "trace_distance") {
    check_keys(v, path, {"kind"}, {});
    spec = DivergenceSpec::trace_distance();
  } else if (kind == "one_minus_fidelity") {
    check_keys(v, path, {"kind"}, {});
    spec = DivergenceSpec::one_minus_fidelity();
  } else if (kind == "alpha") {
    check_keys(v, path, {"kind", "alpha"}, {});
    const double alpha = number(v["alpha"], path + ".alpha");
    spec = guarded(path, [&] { return DivergenceSpec::alpha_divergence(alpha); });
  } else if (kind == "weighted_sum") {
    check_keys(v, path, {"kind", "weights"}, {"base"});
    const RMatrix w = real_matrix(v["weights"], path + ".weights");
    const DivergenceSpec base =
        v.contains("base") ? divergence_spec(v["base"], path + ".base") : DivergenceSpec::trace_distance();
    spec = guarded(path, [&] { return DivergenceSpec::weighted_sum(w, base); });
  } else if (kind == "chebyshev") {
    check_keys(v, path, {"kind"}, {"base"});
    const DivergenceSpec base =
        v.contains("base") ? divergence_spec(v["base"], path + ".base") : DivergenceSpec::trace_distance();
    spec = guarded(path, [&] { return DivergenceSpec::chebyshev(base); });
  } else {
    fail(path + ".kind", "unknown divergence kind '" + kind + "'");
  }
  guarded(path, [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

std::vector<DivergenceProbe> probes(const json& v, const StateFamily& family, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  std::vector<DivergenceProbe> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string at = path + "[" + std::to_string(k) + "]";
    check_keys(v[k], at, {"spec", "labels"}, {});
    DivergenceProbe probe{divergence_spec(v[k]["spec"], at + ".spec"), {}};
    const json& labels = v[k]["labels"];
    if (!labels.is_array() || labels.empty()) fail(at + ".labels", "expected a nonempty array of labels");
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const std::string label = string(labels[j], at + ".labels[" + std::to_string(j) + "]");
      if (!family.index_of(label)) fail(at + ".labels", "unknown label '" + label + "'");
      probe.labels.push_back(label);
    }
    const int arity = probe.spec.arity();
    if (arity != 0 && static_cast<int>(probe.labels.size()) != arity) {
      fail(at + ".labels", probe.spec.name() + " takes " + std::to_string(arity) + " labels");
    }
    out.push_back(std::move(probe));
  }
  return out;
}

void check_same_labels(const StateFamily& a, const StateFamily& b, const std::string& path) {
  if (a.size() != b.size()) fail(path, "target must carry exactly the family's labels");
  for (const auto& label : a.labels()) {
    if (!b.index_of(label)) fail(path, "label '" + label + "' is missing from the target");
  }
}

void chain(const json& v, ScenarioConfig& cfg, const std::string& path) {
  check_keys(v, path, {"horizon"}, {"channel", "channels", "random"});
  const int given = static_cast<int>(v.contains("channel")) + static_cast<int>(v.contains("channels")) +
                    static_cast<int>(v.contains("random"));
  if (given != 1) fail(path, "give exactly one of 'channel', 'channels', 'random'");
  const std::int64_t horizon = integer(v["horizon"], path + ".horizon");
  if (horizon < 0 || horizon > 100000) fail(path + ".horizon", "expected an integer in [0, 100000]");
  const int n = static_cast<int>(horizon);
  ChainScenario scenario{cfg.family, ChainScenario::Explicit{}, n};
  if (v.contains("channel")) {
    ParsedChannel c = channel(v["channel"], cfg.dim, cfg.classical, path + ".channel");
    if (c.classical) cfg.classical_chain.assign(static_cast<std::size_t>(n), *c.classical);
    scenario.channels = ChainScenario::Homogeneous{std::move(c.quantum)};
  } else if (v.contains("channels")) {
    const json& list = v["channels"];
    if (!list.is_array()) fail(path + ".channels", "expected an array of channels");
    if (list.size() < static_cast<std::size_t>(n)) fail(path + ".channels", "fewer channels than the horizon");
    ChainScenario::Explicit e;
    for (std::size_t k = 0; k < list.size(); ++k) {
      ParsedChannel c = channel(list[k], cfg.dim, cfg.classical, path + ".channels[" + std::to_string(k) + "]");
      if (c.classical && k < static_cast<std::size_t>(n)) cfg.classical_chain.push_back(*c.classical);
      e.channels.push_back(std::move(c.quantum));
    }
    scenario.channels = std::move(e);
  } else {
    check_keys(v["random"], path + ".random", {}, {"seed"});
    const std::uint64_t seed =
        v["random"].contains("seed") ? seed_value(v["random"]["seed"], path + ".random.seed") : cfg.seed;
    if (cfg.classical) {
      ChainScenario::Explicit e;
      for (int i = 1; i <= n; ++i) {
        cfg.classical_chain.push_back(random_stochastic(cfg.dim, derive_seed(seed, static_cast<std::uint64_t>(i))));
        e.channels.push_back(classical_embedding(cfg.classical_chain.back().matrix()));
      }
      scenario.channels = std::move(e);
    } else {
      scenario.channels = ChainScenario::RandomHaar{seed};
    }
  }
  guarded(path, [&] {
    scenario.validate();
    return 0;
  });
  cfg.chain = std::move(scenario);
}

void analyses(const json& v, ScenarioConfig& cfg, const std::string& path) {
  check_keys(v, path, {}, {"divergences", "ergodicity", "limit", "deficiency"});
  if (v.contains("divergences")) cfg.divergences = probes(v["divergences"], cfg.family, path + ".divergences");
  if (v.contains("ergodicity")) {
    const json& e = v["ergodicity"];
    const std::string at = path + ".ergodicity";
    check_keys(e, at, {}, {"tol", "cross_check", "max_subset"});
    if (e.contains("tol")) cfg.ergodicity_tol = number(e["tol"], at + ".tol");
    if (!(cfg.ergodicity_tol > 0.0)) fail(at + ".tol", "expected a positive tolerance");
    if (e.contains("cross_check")) cfg.cross_check = boolean(e["cross_check"], at + ".cross_check");
    if (e.contains("max_subset")) {
      const std::int64_t m = integer(e["max_subset"], at + ".max_subset");
      if (m < 0 || m > 8) fail(at + ".max_subset", "expected an integer in [0, 8]");
      cfg.max_subset = static_cast<std::size_t>(m);
    }
  }
  if (v.contains("limit")) {
    const json& l = v["limit"];
    const std::string at = path + ".limit";
    check_keys(l, at, {}, {"window", "tol"});
    if (l.contains("window")) {
      const std::int64_t w = integer(l["window"], at + ".window");
      if (w < 1 || w > 1000) fail(at + ".window", "expected an integer in [1, 1000]");
      cfg.limit.window = static_cast<int>(w);
    }
    if (l.contains("tol")) cfg.limit.tol = number(l["tol"], at + ".tol");
    if (!(cfg.limit.tol > 0.0)) fail(at + ".tol", "expected a positive tolerance");
  }
  if (v.contains("deficiency")) {
    check_keys(v["deficiency"], path + ".deficiency", {}, {"step"});
    if (v["deficiency"].contains("step")) {
      cfg.step_deficiency = boolean(v["deficiency"]["step"], path + ".deficiency.step");
    }
  }
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "$", {"dim", "family"}, {"classical", "seed", "target", "chain", "analyses"});
  const std::int64_t dim = integer(doc["dim"], "$.dim");
  if (dim < 1 || dim > 16) fail("$.dim", "expected an integer in [1, 16]");
  const bool classical = doc.contains("classical") && boolean(doc["classical"], "$.classical");

  ParsedFamily fam = family(doc["family"], dim, classical, "$.family");
  ScenarioConfig cfg(std::move(fam.quantum));
  cfg.classical = classical;
  cfg.classical_family = std::move(fam.classical);
  if (doc.contains("seed")) cfg.seed = seed_value(doc["seed"], "$.seed");
  if (doc.contains("target")) {
    ParsedFamily t = family(doc["target"], dim, classical, "$.target");
    check_same_labels(cfg.family, t.quantum, "$.target");
    cfg.target = std::move(t.quantum);
    cfg.classical_target = std::move(t.classical);
  }
  if (doc.contains("chain")) chain(doc["chain"], cfg, "$.chain");
  if (doc.contains("analyses")) analyses(doc["analyses"], cfg, "$.analyses");
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace lecam
