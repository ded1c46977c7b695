#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lecam/conic_solver.hpp"
#include "lecam/random.hpp"

using namespace lecam;
using namespace lecam::conic;

namespace {

// minimize t subject to t - 3 >= 0: t free, s >= 0 with t - s = 3.
SdpProblem shifted_scalar_problem(double objective_scale = 1.0) {
  SdpProblem p;
  const int t = p.add_block(BlockKind::Free, 1);
  const int s = p.add_block(BlockKind::RealPsd, 1);
  p.objective().add(t, 0, 0, objective_scale);
  LinearFunctional f;
  f.add(t, 0, 0, 1.0).add(s, 0, 0, -1.0);
  p.add_constraint(f, 3.0);
  BlockValues x0;
  x0.blocks = {CMatrix::Constant(1, 1, 4.0), CMatrix::Constant(1, 1, 1.0)};
  p.set_interior_point(x0);
  return p;
}

// minimize <diag(1,2), X> subject to tr X = 1, X >= 0.
SdpProblem smallest_eigenvalue_problem(double objective_scale = 1.0) {
  SdpProblem p;
  const int x = p.add_block(BlockKind::RealPsd, 2);
  p.objective().add(x, 0, 0, 1.0 * objective_scale).add(x, 1, 1, 2.0 * objective_scale);
  LinearFunctional tr;
  tr.add_trace(x, 1.0);
  p.add_constraint(tr, 1.0);
  BlockValues x0;
  x0.blocks = {CMatrix::Identity(2, 2) * 0.5};
  p.set_interior_point(x0);
  return p;
}

}  // namespace

TEST_CASE("scalar shift fixture") {
  const SdpSolution sol = solve(shifted_scalar_problem());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.primal_value == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(sol.primal_value >= sol.dual_value - 1e-9);
  const Residuals r = check_kkt(shifted_scalar_problem(), sol);
  CHECK(r.primal_infeasibility <= 1e-7);
  CHECK(r.dual_infeasibility <= 1e-7);
  CHECK(r.relative_gap <= 1e-7);
}

TEST_CASE("smallest eigenvalue fixture") {
  const SdpSolution sol = solve(smallest_eigenvalue_problem());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.primal_value - 1.0) <= 1e-7);
  CHECK(sol.primal_value >= sol.dual_value - 1e-9);
  MESSAGE("iterations " << sol.iterations);
}

TEST_CASE("scale invariance of the argmin") {
  for (const auto& make : {shifted_scalar_problem, smallest_eigenvalue_problem}) {
    const SdpSolution a = solve(make(1.0));
    const SdpSolution b = solve(make(10.0));
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(std::abs(b.primal_value - 10.0 * a.primal_value) <= 1e-6);
    for (std::size_t k = 0; k < a.x.blocks.size(); ++k) {
      CHECK((a.x.blocks[k] - b.x.blocks[k]).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("identical problems give identical solutions") {
  const SdpSolution a = solve(smallest_eigenvalue_problem());
  const SdpSolution b = solve(smallest_eigenvalue_problem());
  CHECK(a.primal_value == b.primal_value);
  CHECK(a.dual_value == b.dual_value);
  CHECK(a.iterations == b.iterations);
  CHECK(a.x.blocks[0] == b.x.blocks[0]);
  CHECK(a.y == b.y);
}

TEST_CASE("check_kkt recomputes residuals") {
  const SdpProblem p = smallest_eigenvalue_problem();
  const SdpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const Residuals r = check_kkt(p, sol);
  CHECK(std::max({r.primal_infeasibility, r.dual_infeasibility, r.relative_gap}) <= 1e-7);
  SdpSolution perturbed = sol;
  perturbed.x.blocks[0](0, 0) += 1e-3;
  const Residuals q = check_kkt(p, perturbed);
  CHECK(std::max({q.primal_infeasibility, q.dual_infeasibility, q.relative_gap}) > 1e-4);
}

TEST_CASE("problems without a feasible interior point are rejected") {
  SdpProblem p;
  const int x = p.add_block(BlockKind::RealPsd, 2);
  p.objective().add(x, 0, 0, 1.0);
  LinearFunctional tr;
  tr.add_trace(x, 1.0);
  p.add_constraint(tr, -1.0);
  CHECK_THROWS_AS(solve(p), Error);
  BlockValues x0;
  x0.blocks = {CMatrix::Identity(2, 2)};
  p.set_interior_point(x0);
  CHECK_THROWS_AS(solve(p), Error);
}

TEST_CASE("unbounded problem is never reported optimal") {
  SdpProblem p = shifted_scalar_problem(-1.0);
  SolverOptions opts;
  opts.max_iter = 60;
  const SdpSolution sol = solve(p, opts);
  CHECK(sol.status != SolveStatus::Optimal);
}

TEST_CASE("realify examples") {
  RMatrix s(2, 2);
  s << 2, 1, 1, 3;
  const RMatrix r = realify(s.cast<Complex>());
  CHECK((r.topLeftCorner(2, 2) - s).norm() == 0.0);
  CHECK((r.bottomRightCorner(2, 2) - s).norm() == 0.0);
  CHECK(r.topRightCorner(2, 2).norm() == 0.0);
  const RMatrix one = realify(CMatrix::Constant(1, 1, Complex(5.0, 0.0)));
  CHECK((one - 5.0 * RMatrix::Identity(2, 2)).norm() == 0.0);
  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const CMatrix g = ginibre(3, 3, rng);
    const CMatrix h = g + g.adjoint();
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues();
    const RVector evr = Eigen::SelfAdjointEigenSolver<RMatrix>(realify(h)).eigenvalues();
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(std::abs(evr(2 * i) - ev(i)) < 1e-12);
      CHECK(std::abs(evr(2 * i + 1) - ev(i)) < 1e-12);
    }
    CHECK((complexify(realify(h)) - h).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("complex block: smallest eigenvalue of a Hermitian objective") {
  Rng rng(32);
  for (int k = 0; k < 10; ++k) {
    const CMatrix g = ginibre(3, 3, rng);
    const CMatrix h = g + g.adjoint();
    SdpProblem p;
    const int x = p.add_block(BlockKind::ComplexPsd, 3);
    p.objective().add_matrix(x, h);
    LinearFunctional tr;
    tr.add_trace(x, 1.0);
    p.add_constraint(tr, 1.0);
    BlockValues x0;
    x0.blocks = {CMatrix::Identity(3, 3) / 3.0};
    p.set_interior_point(x0);
    const SdpSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const double lmin = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues()(0);
    CHECK(std::abs(sol.primal_value - lmin) <= 1e-7);
    CHECK(sol.primal_value >= sol.dual_value - 1e-9);
    const Residuals r = check_kkt(p, sol);
    CHECK(std::max({r.primal_infeasibility, r.dual_infeasibility, r.relative_gap}) <= 1e-7);
  }
}

TEST_CASE("nonnegative block is a linear program") {
  // min x0 + 2 x1 + 3 x2 s.t. x0 + x1 + x2 = 1, x1 - x2 = 0.2; optimum 1.2 at (0.8, 0.2, 0).
  SdpProblem p;
  const int x = p.add_block(BlockKind::Nonnegative, 3);
  p.objective().add(x, 0, 0, 1.0).add(x, 1, 0, 2.0).add(x, 2, 0, 3.0);
  LinearFunctional sum;
  sum.add_trace(x, 1.0);
  p.add_constraint(sum, 1.0);
  LinearFunctional diff;
  diff.add(x, 1, 0, 1.0).add(x, 2, 0, -1.0);
  p.add_constraint(diff, 0.2);
  BlockValues x0;
  x0.blocks = {(RVector(3) << 0.4, 0.4, 0.2).finished().cast<Complex>()};
  p.set_interior_point(x0);
  const SdpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.primal_value - 1.2) <= 1e-7);
}

TEST_CASE("SDPA dump of the realified problem") {
  std::ostringstream out;
  SolverOptions opts;
  opts.debug_dump = &out;
  const SdpSolution sol = solve(shifted_scalar_problem(), opts);
  CHECK(sol.status == SolveStatus::Optimal);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.front() == '"');
  std::getline(in, line);
  CHECK(line == "1 = mDIM");
  std::getline(in, line);
  CHECK(line == "2 = nBLOCK");
  std::getline(in, line);
  CHECK(line == "1 -2 = bLOCKsTRUCT");
  std::getline(in, line);
  CHECK(line == "3");
  std::vector<std::string> entries;
  while (std::getline(in, line)) entries.push_back(line);
  // F0 carries -c on the free pair; F1 carries t+ - t- - s.
  CHECK(entries == std::vector<std::string>{"0 2 1 1 -1", "0 2 2 2 1", "1 2 1 1 1", "1 2 2 2 -1", "1 1 1 1 -1"});
}
