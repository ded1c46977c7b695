#include "lecam/deficiency.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "lecam/divergences.hpp"
#include "trace_program.hpp"

namespace lecam {

StateFamily::StateFamily(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::DimensionMismatch, "a state family needs at least one entry");
  std::set<std::string> seen;
  for (const auto& [label, rho] : entries_) {
    if (rho.dim() != entries_.front().second.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "family member '" + label + "' differs in dimension");
    }
    if (!seen.insert(label).second) throw Error(ErrorCode::LabelMismatch, "duplicate label '" + label + "'");
  }
}

StateFamily StateFamily::from_states(const std::vector<DensityOperator>& states) {
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < states.size(); ++k) entries.emplace_back(std::to_string(k), states[k]);
  return StateFamily(std::move(entries));
}

StateFamily StateFamily::one_point(const DensityOperator& state, const std::vector<std::string>& labels) {
  std::vector<Entry> entries;
  for (const auto& l : labels) entries.emplace_back(l, state);
  return StateFamily(std::move(entries));
}

std::vector<std::string> StateFamily::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

std::vector<DensityOperator> StateFamily::states() const {
  std::vector<DensityOperator> out;
  for (const auto& e : entries_) out.push_back(e.second);
  return out;
}

std::optional<std::size_t> StateFamily::index_of(const std::string& label) const {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].first == label) return k;
  }
  return std::nullopt;
}

const DensityOperator& StateFamily::state(const std::string& label) const {
  const auto k = index_of(label);
  if (!k) throw Error(ErrorCode::UnknownLabel, "no family member labelled '" + label + "'");
  return entries_[*k].second;
}

StateFamily StateFamily::mapped(const Channel& channel) const {
  std::vector<Entry> out;
  for (const auto& [label, rho] : entries_) out.emplace_back(label, apply(channel, rho));
  return StateFamily(std::move(out));
}

StateFamily StateFamily::restricted(const std::vector<std::string>& labels) const {
  std::vector<Entry> out;
  for (const auto& l : labels) out.emplace_back(l, state(l));
  return StateFamily(std::move(out));
}

namespace {

/// Position in f of each label of e, or LabelMismatch.
std::vector<std::size_t> match_labels(const StateFamily& e, const StateFamily& f) {
  if (e.dim() != f.dim()) throw Error(ErrorCode::DimensionMismatch, "families live on different spaces");
  if (e.size() != f.size()) throw Error(ErrorCode::LabelMismatch, "families have different label sets");
  std::vector<std::size_t> pos;
  for (const auto& [label, rho] : e.entries()) {
    const auto k = f.index_of(label);
    if (!k) throw Error(ErrorCode::LabelMismatch, "label '" + label + "' missing from the second family");
    pos.push_back(*k);
  }
  return pos;
}

}  // namespace

double family_distance(const StateFamily& e, const StateFamily& f) {
  const auto pos = match_labels(e, f);
  double worst = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) worst = std::max(worst, trace_distance(e.state(k), f.state(pos[k])));
  return worst;
}

double sup_pairwise_distance(const StateFamily& e) {
  double worst = 0.0;
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = a + 1; b < e.size(); ++b) worst = std::max(worst, trace_distance(e.state(a), e.state(b)));
  return worst;
}

DeficiencyResult deficiency_delta(const StateFamily& e, const StateFamily& f, const conic::SolverOptions& options) {
  using namespace conic;
  const auto pos = match_labels(e, f);
  const Eigen::Index d = e.dim();
  const auto k = static_cast<Eigen::Index>(e.size());

  SdpProblem p;
  const int choi = p.add_block(BlockKind::ComplexPsd, d * d);
  std::vector<int> ab, bb;
  for (Eigen::Index j = 0; j < k; ++j) {
    ab.push_back(p.add_block(BlockKind::ComplexPsd, d));
    bb.push_back(p.add_block(BlockKind::ComplexPsd, d));
  }
  // Slacks s_j >= 0; t is free since the budget rows force t >= 0.
  const int slack = p.add_block(BlockKind::Nonnegative, k);
  const int level = p.add_block(BlockKind::Free, 1);
  p.objective().add(level, 0, 0, 1.0);

  // Trace preservation: sum_a J(i a, j a) = delta_ij.
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      for (int part = 0; part < (i == j ? 1 : 2); ++part) {
        const Complex w = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, -1.0);
        LinearFunctional fn;
        for (Eigen::Index a = 0; a < d; ++a) fn.add(choi, j * d + a, i * d + a, w);
        p.add_constraint(std::move(fn), (part == 0 && i == j) ? 1.0 : 0.0);
      }
    }
  }
  // L_J(rho)(r, c) = sum_ij rho(i, j) J(i r, j c) = Re tr(C J) with C(j c, i r) = rho(i, j).
  // Splitting rows are imposed in the rotated combinations sum_t U(t, q) (row t).
  RMatrix sources(k, 2 * d * d);
  for (Eigen::Index t = 0; t < k; ++t) sources.row(t) = detail::real_vec(e.state(static_cast<std::size_t>(t)).matrix());
  const RMatrix u = detail::row_rotation(sources);
  for (Eigen::Index q = 0; q < k; ++q) {
    CMatrix rho = CMatrix::Zero(d, d);
    CMatrix target = CMatrix::Zero(d, d);
    std::vector<detail::SplitTerm> terms;
    for (Eigen::Index t = 0; t < k; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      rho += u(t, q) * e.state(tu).matrix();
      target += u(t, q) * f.state(pos[tu]).matrix();
      terms.push_back({u(t, q), ab[tu], bb[tu]});
    }
    const detail::EntryWriter image = [&rho, choi, d](LinearFunctional& fn, Eigen::Index r, Eigen::Index c, Complex w) {
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          if (rho(i, j) != Complex(0.0, 0.0)) fn.add(choi, j * d + c, i * d + r, w * rho(i, j));
    };
    // tr L_J(rho) = tr rho under trace preservation, and tr target = tr rho = sum_t U(t, q).
    detail::add_splitting_constraints(p, image, terms, target, 0.0);
  }
  for (Eigen::Index t = 0; t < k; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    LinearFunctional budget;
    budget.add_trace(ab[tu], 1.0).add_trace(bb[tu], 1.0).add(slack, t, 0, 1.0).add(level, 0, 0, -1.0);
    p.add_constraint(std::move(budget), 0.0);
  }

  // Strictly feasible start: the completely depolarizing channel J = I / d.
  const double margin = 0.01;
  const HermitianOperator mixed = DensityOperator::maximally_mixed(d).op();
  BlockValues x0;
  x0.blocks.resize(p.blocks().size());
  x0.blocks[static_cast<std::size_t>(choi)] = CMatrix::Identity(d * d, d * d) / static_cast<double>(d);
  double worst_budget = 0.0;
  std::vector<double> budgets;
  for (Eigen::Index t = 0; t < k; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    auto [pa, pb] = detail::split_with_margin(f.state(pos[tu]).op() - mixed, margin);
    budgets.push_back(pa.trace().real() + pb.trace().real());
    worst_budget = std::max(worst_budget, budgets.back());
    x0.blocks[static_cast<std::size_t>(ab[tu])] = std::move(pa);
    x0.blocks[static_cast<std::size_t>(bb[tu])] = std::move(pb);
  }
  const double t0 = std::max(2.1, worst_budget + 0.1);
  CMatrix sv(k, 1);
  for (Eigen::Index t = 0; t < k; ++t) sv(t, 0) = t0 - budgets[static_cast<std::size_t>(t)];
  x0.blocks[static_cast<std::size_t>(slack)] = sv;
  x0.blocks[static_cast<std::size_t>(level)] = CMatrix::Constant(1, 1, t0);
  p.set_interior_point(std::move(x0));

  const SdpSolution sol = solve(p, options);
  if (sol.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "deficiency program: " + std::string(to_string(sol.status)) + " after " +
                                              std::to_string(sol.iterations) + " iterations (" + sol.message +
                                              "), gap " + std::to_string(sol.residuals.relative_gap));
  }
  DeficiencyResult result;
  result.value = std::clamp(sol.primal_value, 0.0, 2.0);
  result.dual_value = sol.dual_value;
  result.residuals = sol.residuals;
  result.iterations = sol.iterations;
  try {
    result.optimal_channel = Channel::from_choi(sol.x.blocks[static_cast<std::size_t>(choi)], d, d, 1e-7);
  } catch (const Error& err) {
    result.warnings.push_back(std::string("optimal channel failed CPTP revalidation: ") + err.what());
  }
  return result;
}

double deficiency_Delta(const StateFamily& e, const StateFamily& f, const conic::SolverOptions& options) {
  return std::max(deficiency_delta(e, f, options).value, deficiency_delta(f, e, options).value);
}

bool is_more_informative(const StateFamily& e, const StateFamily& f, double tol, const conic::SolverOptions& options) {
  return deficiency_delta(e, f, options).value <= tol;
}

bool is_equivalent(const StateFamily& e, const StateFamily& f, double tol, const conic::SolverOptions& options) {
  return deficiency_Delta(e, f, options) <= tol;
}

double chebyshev_radius(const StateFamily& e, const conic::SolverOptions& options) {
  const auto states = e.states();
  return chebyshev_divergence(DivergenceSpec::trace_distance(), states, options).value;
}

}  // namespace lecam
