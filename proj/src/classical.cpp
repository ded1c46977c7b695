#include "lecam/classical.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "trace_program.hpp"

namespace lecam {

ProbabilityVector::ProbabilityVector(RVector p) : p_(std::move(p)) {
  if (p_.size() == 0) throw Error(ErrorCode::DimensionMismatch, "probability vector is empty");
  if (p_.minCoeff() < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "probability vector has a negative entry");
  if (std::abs(p_.sum() - 1.0) > kTolerance) throw Error(ErrorCode::NotNormalized, "probability vector does not sum to 1");
}

ProbabilityVector::ProbabilityVector(std::initializer_list<double> p)
    : ProbabilityVector(RVector(Eigen::Map<const RVector>(p.begin(), static_cast<Eigen::Index>(p.size())))) {}

StochasticMatrix::StochasticMatrix(RMatrix m) : m_(std::move(m)) {
  if (m_.size() == 0) throw Error(ErrorCode::DimensionMismatch, "stochastic matrix is empty");
  if (m_.minCoeff() < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "stochastic matrix has a negative entry");
  for (Eigen::Index c = 0; c < m_.cols(); ++c) {
    if (std::abs(m_.col(c).sum() - 1.0) > ProbabilityVector::kTolerance) {
      throw Error(ErrorCode::NotNormalized, "stochastic matrix column " + std::to_string(c) + " does not sum to 1");
    }
  }
}

StochasticMatrix StochasticMatrix::identity(Eigen::Index n) { return StochasticMatrix(RMatrix::Identity(n, n)); }

ProbabilityVector StochasticMatrix::apply(const ProbabilityVector& p) const {
  if (p.dim() != cols()) throw Error(ErrorCode::DimensionMismatch, "stochastic matrix and vector sizes differ");
  RVector out = (m_ * p.values()).cwiseMax(0.0);
  return ProbabilityVector(out / out.sum());
}

ClassicalFamily::ClassicalFamily(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::DimensionMismatch, "a classical family needs at least one entry");
  std::set<std::string> seen;
  for (const auto& [label, p] : entries_) {
    if (p.dim() != entries_.front().second.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "family member '" + label + "' differs in dimension");
    }
    if (!seen.insert(label).second) throw Error(ErrorCode::LabelMismatch, "duplicate label '" + label + "'");
  }
}

ClassicalFamily ClassicalFamily::from_vectors(const std::vector<ProbabilityVector>& vectors) {
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < vectors.size(); ++k) entries.emplace_back(std::to_string(k), vectors[k]);
  return ClassicalFamily(std::move(entries));
}

std::vector<std::string> ClassicalFamily::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

std::optional<std::size_t> ClassicalFamily::index_of(const std::string& label) const {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].first == label) return k;
  }
  return std::nullopt;
}

const ProbabilityVector& ClassicalFamily::vector(const std::string& label) const {
  const auto k = index_of(label);
  if (!k) throw Error(ErrorCode::UnknownLabel, "no family member labelled '" + label + "'");
  return entries_[*k].second;
}

ClassicalFamily ClassicalFamily::mapped(const StochasticMatrix& m) const {
  std::vector<Entry> out;
  for (const auto& [label, p] : entries_) out.emplace_back(label, m.apply(p));
  return ClassicalFamily(std::move(out));
}

StateFamily ClassicalFamily::to_quantum() const {
  std::vector<StateFamily::Entry> out;
  for (const auto& [label, p] : entries_) {
    out.emplace_back(label, DensityOperator::diagonal(std::vector<double>(p.values().begin(), p.values().end())));
  }
  return StateFamily(std::move(out));
}

ClassicalFamily restrict(const ClassicalFamily& e, const std::vector<std::string>& labels) {
  if (labels.empty()) throw Error(ErrorCode::ParameterOutOfRange, "restriction to an empty label set");
  std::vector<ClassicalFamily::Entry> out;
  for (const auto& l : labels) out.emplace_back(l, e.vector(l));
  return ClassicalFamily(std::move(out));
}

LpDeficiencyResult lp_deficiency(const ClassicalFamily& e, const ClassicalFamily& f, const conic::SolverOptions& options) {
  using namespace conic;
  if (e.size() != f.size()) throw Error(ErrorCode::LabelMismatch, "families have different label sets");
  std::vector<std::size_t> pos;
  for (const auto& [label, p] : e.entries()) {
    const auto k = f.index_of(label);
    if (!k) throw Error(ErrorCode::LabelMismatch, "label '" + label + "' is missing from the target family");
    pos.push_back(*k);
  }
  const Eigen::Index nin = e.dim();
  const Eigen::Index nout = f.dim();
  const auto k = static_cast<Eigen::Index>(e.size());

  // M(y, x) sits at index y * nin + x.
  SdpProblem p;
  const int mb = p.add_block(BlockKind::Nonnegative, nout * nin);
  std::vector<int> ub, vb;
  for (Eigen::Index t = 0; t < k; ++t) {
    ub.push_back(p.add_block(BlockKind::Nonnegative, nout));
    vb.push_back(p.add_block(BlockKind::Nonnegative, nout));
  }
  const int slack = p.add_block(BlockKind::Nonnegative, k);
  const int level = p.add_block(BlockKind::Free, 1);
  p.objective().add(level, 0, 0, 1.0);

  for (Eigen::Index x = 0; x < nin; ++x) {
    LinearFunctional col;
    for (Eigen::Index y = 0; y < nout; ++y) col.add(mb, y * nin + x, 0, 1.0);
    p.add_constraint(std::move(col), 1.0);
  }
  // M p_t - u_t + v_t = q_t, in rotated combinations as in the quantum program.
  RMatrix sources(k, nin);
  for (Eigen::Index t = 0; t < k; ++t) sources.row(t) = e.vector(static_cast<std::size_t>(t)).values().transpose();
  const RMatrix u = detail::row_rotation(sources);
  for (Eigen::Index q = 0; q < k; ++q) {
    const RVector pq = sources.transpose() * u.col(q);
    RVector target = RVector::Zero(nout);
    for (Eigen::Index t = 0; t < k; ++t) target += u(t, q) * f.vector(pos[static_cast<std::size_t>(t)]).values();
    for (Eigen::Index y = 0; y < nout; ++y) {
      LinearFunctional row;
      if (y == nout - 1) {
        // The column sums already fix sum_y (M p)_y; keep only the slack part of this row.
        for (Eigen::Index t = 0; t < k; ++t) {
          if (u(t, q) == 0.0) continue;
          for (Eigen::Index z = 0; z < nout; ++z) {
            row.add(ub[static_cast<std::size_t>(t)], z, 0, -u(t, q));
            row.add(vb[static_cast<std::size_t>(t)], z, 0, u(t, q));
          }
        }
        p.add_constraint(std::move(row), 0.0);
        continue;
      }
      for (Eigen::Index x = 0; x < nin; ++x) {
        if (pq(x) != 0.0) row.add(mb, y * nin + x, 0, pq(x));
      }
      for (Eigen::Index t = 0; t < k; ++t) {
        if (u(t, q) == 0.0) continue;
        row.add(ub[static_cast<std::size_t>(t)], y, 0, -u(t, q));
        row.add(vb[static_cast<std::size_t>(t)], y, 0, u(t, q));
      }
      p.add_constraint(std::move(row), target(y));
    }
  }
  for (Eigen::Index t = 0; t < k; ++t) {
    LinearFunctional budget;
    for (Eigen::Index y = 0; y < nout; ++y) {
      budget.add(ub[static_cast<std::size_t>(t)], y, 0, 1.0);
      budget.add(vb[static_cast<std::size_t>(t)], y, 0, 1.0);
    }
    budget.add(slack, t, 0, 1.0).add(level, 0, 0, -1.0);
    p.add_constraint(std::move(budget), 0.0);
  }

  // Strictly feasible start: the uniform garbling.
  const double margin = 0.01;
  BlockValues x0;
  x0.blocks.resize(p.blocks().size());
  x0.blocks[static_cast<std::size_t>(mb)] = CMatrix::Constant(nout * nin, 1, 1.0 / static_cast<double>(nout));
  std::vector<double> budgets;
  for (Eigen::Index t = 0; t < k; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    const RVector diff = RVector::Constant(nout, 1.0 / static_cast<double>(nout)) - f.vector(pos[tu]).values();
    const RVector up = diff.cwiseMax(0.0).array() + margin;
    const RVector vp = (-diff).cwiseMax(0.0).array() + margin;
    budgets.push_back(up.sum() + vp.sum());
    x0.blocks[static_cast<std::size_t>(ub[tu])] = up.cast<Complex>();
    x0.blocks[static_cast<std::size_t>(vb[tu])] = vp.cast<Complex>();
  }
  const double t0 = std::max(2.1, *std::max_element(budgets.begin(), budgets.end()) + 0.1);
  CMatrix sv(k, 1);
  for (Eigen::Index t = 0; t < k; ++t) sv(t, 0) = t0 - budgets[static_cast<std::size_t>(t)];
  x0.blocks[static_cast<std::size_t>(slack)] = sv;
  x0.blocks[static_cast<std::size_t>(level)] = CMatrix::Constant(1, 1, t0);
  p.set_interior_point(std::move(x0));

  const SdpSolution sol = solve(p, options);
  if (sol.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "classical deficiency LP: " + std::string(to_string(sol.status)) + " after " +
                                              std::to_string(sol.iterations) + " iterations (" + sol.message + ")");
  }
  LpDeficiencyResult result;
  result.value = std::clamp(sol.primal_value, 0.0, 2.0);
  result.dual_value = sol.dual_value;
  result.residuals = sol.residuals;
  result.iterations = sol.iterations;
  RMatrix m(nout, nin);
  const CMatrix& mv = sol.x.blocks[static_cast<std::size_t>(mb)];
  for (Eigen::Index y = 0; y < nout; ++y)
    for (Eigen::Index x = 0; x < nin; ++x) m(y, x) = std::max(mv(y * nin + x, 0).real(), 0.0);
  for (Eigen::Index x = 0; x < nin; ++x) m.col(x) /= m.col(x).sum();
  result.matrix = StochasticMatrix(std::move(m));
  return result;
}

double lp_Delta(const ClassicalFamily& e, const ClassicalFamily& f, const conic::SolverOptions& options) {
  return std::max(lp_deficiency(e, f, options).value, lp_deficiency(f, e, options).value);
}

namespace {

double sup_pairwise_l1(const ClassicalFamily& e) {
  double worst = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j)
      worst = std::max(worst, (e.vector(i).values() - e.vector(j).values()).lpNorm<1>());
  return worst;
}

void subsets(const std::vector<std::string>& labels, std::size_t max_size, std::size_t start,
             std::vector<std::string>& current, std::vector<std::vector<std::string>>& out) {
  if (!current.empty()) out.push_back(current);
  if (current.size() == max_size) return;
  for (std::size_t k = start; k < labels.size(); ++k) {
    current.push_back(labels[k]);
    subsets(labels, max_size, k + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

ClassicalTrace evolve_classical(const ClassicalFamily& initial, const std::vector<StochasticMatrix>& matrices) {
  ClassicalTrace trace;
  trace.families.push_back(initial);
  for (const auto& m : matrices) {
    if (m.cols() != trace.families.back().dim()) {
      throw Error(ErrorCode::DimensionMismatch, "stochastic matrix does not act on the current sample space");
    }
    trace.families.push_back(trace.families.back().mapped(m));
  }
  for (const auto& fam : trace.families) trace.sup_pairwise_l1.push_back(sup_pairwise_l1(fam));
  return trace;
}

ClassicalErgodicity ergodicity_tests(const ClassicalTrace& trace, double tol, const ErgodicityOptions& options) {
  ClassicalErgodicity out;
  const auto steps = static_cast<int>(trace.families.size());
  for (int i = 0; i < steps && !out.weak; ++i) {
    if (trace.sup_pairwise_l1[static_cast<std::size_t>(i)] <= tol) out.weak = i;
  }
  const auto& first = trace.families.front();
  const auto labels = first.labels();
  std::optional<int> latest_pair = 0;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.size(); ++b) {
      std::optional<int> onset;
      for (int i = 0; i < steps && !onset; ++i) {
        const auto& fam = trace.families[static_cast<std::size_t>(i)];
        if ((fam.vector(labels[a]).values() - fam.vector(labels[b]).values()).lpNorm<1>() <= tol) onset = i;
      }
      out.l1_weak_per_pair[{labels[a], labels[b]}] = onset;
      latest_pair = (latest_pair && onset) ? std::optional<int>(std::max(*latest_pair, *onset)) : std::nullopt;
    }
  }
  out.detections_agree = latest_pair == out.weak;

  if (options.max_subset == 0) return out;
  const ClassicalFamily& reference = options.limit ? *options.limit : trace.families.back();
  std::vector<std::vector<std::string>> all;
  std::vector<std::string> current;
  subsets(labels, options.max_subset, 0, current, all);
  std::optional<int> latest = 0;
  for (const auto& sub : all) {
    const ClassicalFamily ref = restrict(reference, sub);
    std::optional<int> onset;
    for (int i = steps - 1; i >= 0; --i) {
      const ClassicalFamily fam = restrict(trace.families[static_cast<std::size_t>(i)], sub);
      if (lp_Delta(fam, ref, options.solver) > tol) break;
      onset = i;
    }
    out.subset_onset[sub] = onset;
    latest = (latest && onset) ? std::optional<int>(std::max(*latest, *onset)) : std::nullopt;
  }
  out.weak_topology = latest;
  return out;
}

}  // namespace lecam
