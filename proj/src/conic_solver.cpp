#include "lecam/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace lecam::conic {

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// problem description

namespace {

Eigen::Index coeff_cols(const BlockSpec& b) { return b.is_matrix() ? b.size : 1; }

CMatrix& term_for(std::map<int, CMatrix>& terms, int block, Eigen::Index rows, Eigen::Index cols) {
  auto it = terms.find(block);
  if (it == terms.end()) it = terms.emplace(block, CMatrix::Zero(rows, cols)).first;
  return it->second;
}

}  // namespace

LinearFunctional& LinearFunctional::add(int block, Eigen::Index row, Eigen::Index col, Complex v) {
  // The shape is fixed on first use and checked against the block in SdpProblem.
  auto it = terms_.find(block);
  if (it == terms_.end()) {
    // Grow lazily; the owning problem resizes to the block shape.
    CMatrix m = CMatrix::Zero(row + 1, col + 1);
    m(row, col) = v;
    terms_.emplace(block, std::move(m));
    return *this;
  }
  CMatrix& m = it->second;
  if (row >= m.rows() || col >= m.cols()) {
    CMatrix grown = CMatrix::Zero(std::max(m.rows(), row + 1), std::max(m.cols(), col + 1));
    grown.topLeftCorner(m.rows(), m.cols()) = m;
    m = std::move(grown);
  }
  m(row, col) += v;
  return *this;
}

LinearFunctional& LinearFunctional::add_trace(int block, double v) {
  // Marker entry; expanded to the full block shape by SdpProblem::check_terms.
  CMatrix& m = term_for(trace_terms_, block, 1, 1);
  m(0, 0) += v;
  return *this;
}

LinearFunctional& LinearFunctional::add_matrix(int block, const CMatrix& coeff) {
  auto it = terms_.find(block);
  if (it == terms_.end()) {
    terms_.emplace(block, coeff);
  } else {
    CMatrix& m = it->second;
    CMatrix grown = CMatrix::Zero(std::max(m.rows(), coeff.rows()), std::max(m.cols(), coeff.cols()));
    grown.topLeftCorner(m.rows(), m.cols()) = m;
    grown.topLeftCorner(coeff.rows(), coeff.cols()) += coeff;
    m = std::move(grown);
  }
  return *this;
}

int SdpProblem::add_block(BlockKind kind, Eigen::Index size) {
  if (size <= 0) throw Error(ErrorCode::InvalidProblem, "block size must be positive");
  blocks_.push_back({kind, size});
  return static_cast<int>(blocks_.size()) - 1;
}

void SdpProblem::check_terms(const LinearFunctional& f) const {
  for (const auto& [b, c] : f.terms_) {
    if (b < 0 || b >= static_cast<int>(blocks_.size())) {
      throw Error(ErrorCode::InvalidProblem, "functional addresses undeclared block " + std::to_string(b));
    }
    const BlockSpec& spec = blocks_[static_cast<std::size_t>(b)];
    if (c.rows() > spec.size || c.cols() > coeff_cols(spec)) {
      throw Error(ErrorCode::InvalidProblem, "coefficient exceeds the shape of block " + std::to_string(b));
    }
  }
  for (const auto& [b, c] : f.trace_terms_) {
    (void)c;
    if (b < 0 || b >= static_cast<int>(blocks_.size())) {
      throw Error(ErrorCode::InvalidProblem, "functional addresses undeclared block " + std::to_string(b));
    }
  }
}

namespace {

/// Full-shape coefficient of f on block b (zero when absent).
CMatrix coefficient(const LinearFunctional& f, const std::map<int, CMatrix>& trace_terms, int b, const BlockSpec& spec) {
  CMatrix out = CMatrix::Zero(spec.size, coeff_cols(spec));
  if (auto it = f.terms().find(b); it != f.terms().end()) {
    out.topLeftCorner(it->second.rows(), it->second.cols()) = it->second;
  }
  if (auto it = trace_terms.find(b); it != trace_terms.end()) {
    const Complex v = it->second(0, 0);
    if (spec.is_matrix()) {
      out.diagonal().array() += v;
    } else {
      out.col(0).array() += v;
    }
  }
  return out;
}

}  // namespace

void SdpProblem::add_constraint(LinearFunctional f, double rhs) {
  check_terms(f);
  constraints_.push_back(std::move(f));
  rhs_.push_back(rhs);
}

double SdpProblem::evaluate(const LinearFunctional& f, const BlockValues& x) const {
  check_terms(f);
  if (x.blocks.size() != blocks_.size()) throw Error(ErrorCode::DimensionMismatch, "block count of point");
  double v = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const int bi = static_cast<int>(b);
    if (!f.terms().count(bi) && !f.trace_terms().count(bi)) continue;
    const CMatrix c = coefficient(f, f.trace_terms(), bi, blocks_[b]);
    if (blocks_[b].is_matrix()) {
      // Re tr(C X) = Re sum_ij C_ij X_ji
      v += (c.array() * x.blocks[b].transpose().array()).sum().real();
    } else {
      v += (c.col(0).real().array() * x.blocks[b].col(0).real().array()).sum();
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// realification

RMatrix realify(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  RMatrix r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = a.real();
  r.topRightCorner(n, n) = -a.imag();
  r.bottomLeftCorner(n, n) = a.imag();
  r.bottomRightCorner(n, n) = a.real();
  return r;
}

CMatrix complexify(const RMatrix& r) {
  const Eigen::Index n = r.rows() / 2;
  CMatrix c(n, n);
  c.real() = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
  c.imag() = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
  return c;
}

namespace {

enum class RealKind { Dense, Diagonal, Free };

/// Problem data after realification. Matrix blocks are dense real symmetric,
/// vector blocks are stored as n x 1 columns.
struct RealProblem {
  std::vector<RealKind> kind;
  std::vector<Eigen::Index> size;
  std::vector<RMatrix> c;
  // Per block, the constraints touching it and their coefficients.
  std::vector<std::vector<std::pair<Eigen::Index, RMatrix>>> a;
  RVector b;
  Eigen::Index m = 0;
  double cone_dim = 0.0;
};

RMatrix real_coefficient(const CMatrix& c, const BlockSpec& spec) {
  switch (spec.kind) {
    case BlockKind::RealPsd: {
      const RMatrix re = c.real();
      return 0.5 * (re + re.transpose());
    }
    case BlockKind::ComplexPsd: {
      const CMatrix h = 0.5 * (c + c.adjoint());
      return 0.5 * realify(h);
    }
    case BlockKind::Nonnegative:
    case BlockKind::Free:
      return c.col(0).real();
  }
  return {};
}

RMatrix real_point(const CMatrix& x, const BlockSpec& spec) {
  switch (spec.kind) {
    case BlockKind::RealPsd: {
      const RMatrix re = x.real();
      return 0.5 * (re + re.transpose());
    }
    case BlockKind::ComplexPsd:
      return realify(0.5 * (x + x.adjoint()));
    case BlockKind::Nonnegative:
    case BlockKind::Free:
      return x.col(0).real();
  }
  return {};
}

CMatrix complex_point(const RMatrix& x, const BlockSpec& spec) {
  switch (spec.kind) {
    case BlockKind::RealPsd:
      return x.cast<Complex>();
    case BlockKind::ComplexPsd:
      return complexify(x);
    case BlockKind::Nonnegative:
    case BlockKind::Free:
      return x.cast<Complex>();
  }
  return {};
}

RealProblem realify_problem(const SdpProblem& p) {
  RealProblem rp;
  const auto& blocks = p.blocks();
  const std::size_t nb = blocks.size();
  rp.kind.resize(nb);
  rp.size.resize(nb);
  rp.c.resize(nb);
  rp.a.resize(nb);
  rp.m = static_cast<Eigen::Index>(p.constraints().size());
  rp.b = Eigen::Map<const RVector>(p.rhs().data(), rp.m);
  for (std::size_t k = 0; k < nb; ++k) {
    const BlockSpec& spec = blocks[k];
    const int bi = static_cast<int>(k);
    switch (spec.kind) {
      case BlockKind::RealPsd: rp.kind[k] = RealKind::Dense; rp.size[k] = spec.size; break;
      case BlockKind::ComplexPsd: rp.kind[k] = RealKind::Dense; rp.size[k] = 2 * spec.size; break;
      case BlockKind::Nonnegative: rp.kind[k] = RealKind::Diagonal; rp.size[k] = spec.size; break;
      case BlockKind::Free: rp.kind[k] = RealKind::Free; rp.size[k] = spec.size; break;
    }
    if (rp.kind[k] != RealKind::Free) rp.cone_dim += static_cast<double>(rp.size[k]);
    rp.c[k] = real_coefficient(coefficient(p.objective(), p.objective().trace_terms(), bi, spec), spec);
    for (Eigen::Index i = 0; i < rp.m; ++i) {
      const LinearFunctional& f = p.constraints()[static_cast<std::size_t>(i)];
      if (!f.terms().count(bi) && !f.trace_terms().count(bi)) continue;
      RMatrix coeff = real_coefficient(coefficient(f, f.trace_terms(), bi, spec), spec);
      if (coeff.cwiseAbs().maxCoeff() == 0.0) continue;
      rp.a[k].emplace_back(i, std::move(coeff));
    }
  }
  return rp;
}

double inner(const RMatrix& a, const RMatrix& b) { return (a.array() * b.array()).sum(); }

RVector apply_a(const RealProblem& rp, const std::vector<RMatrix>& x) {
  RVector r = RVector::Zero(rp.m);
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (const auto& [i, ai] : rp.a[k]) r(i) += inner(ai, x[k]);
  }
  return r;
}

RMatrix apply_a_adjoint(const RealProblem& rp, std::size_t k, const RVector& y) {
  const Eigen::Index cols = rp.kind[k] == RealKind::Dense ? rp.size[k] : 1;
  RMatrix out = RMatrix::Zero(rp.size[k], cols);
  for (const auto& [i, ai] : rp.a[k]) out += y(i) * ai;
  return out;
}

/// Largest step t <= inf keeping x + t dx in the cone.
double max_step(RealKind kind, const RMatrix& x, const RMatrix& dx) {
  if (kind == RealKind::Free) return std::numeric_limits<double>::infinity();
  if (kind == RealKind::Diagonal) {
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      if (dx(k, 0) < 0.0) t = std::min(t, -x(k, 0) / dx(k, 0));
    }
    return t;
  }
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  RMatrix w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

bool positive_definite(const RMatrix& x) {
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() != Eigen::Success) return false;
  return llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0;
}

struct Iterate {
  std::vector<RMatrix> x;
  std::vector<RMatrix> z;
  RVector y;
};

struct Direction {
  std::vector<RMatrix> dx;
  std::vector<RMatrix> dz;
  RVector dy;
};

constexpr double kNeighborhood = 1e-3;

class InteriorPoint {
 public:
  InteriorPoint(const RealProblem& rp, const SolverOptions& opts) : rp_(rp), opts_(opts) {}

  SdpSolution run(Iterate it);

 private:
  struct Measures {
    double pobj, dobj, pinf, dinf, gap, mu;
  };

  Measures measure(const Iterate& it) const;
  bool factorize(const Iterate& it);
  RMatrix schur_solve(const RMatrix& v) const;
  /// Pulls x back onto A x = b with the correction X A^T(w) X, the least-norm
  /// step in the metric of X, keeping X positive definite.
  void restore_primal(Iterate& it) const;
  /// Solves [[M, A_f], [A_f^T, 0]] (dy, dx_f) = rhs.
  RVector kkt_solve(const RVector& rhs) const;
  Direction direction(const Iterate& it, double sigma_mu, const Direction* predictor) const;
  /// min_k lambda_min(X_k Z_k) / mu at the trial point, over all cone blocks.
  double centrality(const Iterate& it, const Direction& d, double ap, double ad) const;

  const RealProblem& rp_;
  const SolverOptions& opts_;

  // Per-iteration factorization data.
  std::vector<RMatrix> zinv_;
  RVector rp_res_;
  std::vector<RMatrix> rd_res_;
  Eigen::HouseholderQR<RMatrix> qr_;
  RMatrix r_factor_;   // M = R^T R
  RMatrix af_;         // free-variable columns of A
  RMatrix minv_af_;    // M^-1 A_f
  Eigen::PartialPivLU<RMatrix> free_lu_;
  std::vector<std::pair<std::size_t, Eigen::Index>> free_index_;  // (block, offset) per free variable
};

InteriorPoint::Measures InteriorPoint::measure(const Iterate& it) const {
  Measures m{};
  double pobj = 0.0;
  double xz = 0.0;
  double cnorm2 = 0.0;
  double dres2 = 0.0;
  const RVector ax = apply_a(rp_, it.x);
  for (std::size_t k = 0; k < it.x.size(); ++k) {
    pobj += inner(rp_.c[k], it.x[k]);
    cnorm2 += rp_.c[k].squaredNorm();
    RMatrix rd = rp_.c[k] - apply_a_adjoint(rp_, k, it.y);
    if (rp_.kind[k] != RealKind::Free) {
      rd -= it.z[k];
      xz += inner(it.x[k], it.z[k]);
    }
    dres2 += rd.squaredNorm();
  }
  m.pobj = pobj;
  m.dobj = rp_.b.dot(it.y);
  m.pinf = (rp_.b - ax).norm() / (1.0 + rp_.b.norm());
  m.dinf = std::sqrt(dres2) / (1.0 + std::sqrt(cnorm2));
  m.mu = rp_.cone_dim > 0 ? xz / rp_.cone_dim : 0.0;
  m.gap = std::max(std::abs(m.pobj - m.dobj), std::max(xz, 0.0)) / (1.0 + std::abs(m.pobj) + std::abs(m.dobj));
  return m;
}

bool InteriorPoint::factorize(const Iterate& it) {
  const Eigen::Index m = rp_.m;
  const std::size_t nb = it.x.size();
  zinv_.assign(nb, RMatrix());
  rd_res_.assign(nb, RMatrix());
  rp_res_ = rp_.b - apply_a(rp_, it.x);
  free_index_.clear();
  Eigen::Index rows = 0;
  for (std::size_t k = 0; k < nb; ++k) {
    if (rp_.kind[k] == RealKind::Free) {
      for (Eigen::Index j = 0; j < rp_.size[k]; ++j) free_index_.emplace_back(k, j);
    } else {
      rows += rp_.kind[k] == RealKind::Dense ? rp_.size[k] * rp_.size[k] : rp_.size[k];
    }
  }
  const auto nf = static_cast<Eigen::Index>(free_index_.size());

  // The Schur complement M(p, q) = tr(A_p X A_q Z^-1) equals G^T G with
  // G_p = L_X^T A_p L_Z^-T. Factoring G by QR instead of forming M keeps the
  // condition number at sqrt(cond M), which matters once mu is small.
  RMatrix g = RMatrix::Zero(std::max(rows, m), m);
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < nb; ++k) {
    RMatrix rd = rp_.c[k] - apply_a_adjoint(rp_, k, it.y);
    if (rp_.kind[k] != RealKind::Free) rd -= it.z[k];
    rd_res_[k] = std::move(rd);
    const auto& terms = rp_.a[k];
    if (rp_.kind[k] == RealKind::Dense) {
      const Eigen::Index n = rp_.size[k];
      Eigen::LLT<RMatrix> lz(it.z[k]);
      Eigen::LLT<RMatrix> lx(it.x[k]);
      if (lz.info() != Eigen::Success || lx.info() != Eigen::Success) return false;
      zinv_[k] = lz.solve(RMatrix::Identity(n, n));
      zinv_[k] = 0.5 * (zinv_[k] + zinv_[k].transpose());
      const RMatrix lz_inv = lz.matrixL().solve(RMatrix::Identity(n, n));
      const RMatrix lx_t = lx.matrixL().transpose();
      for (const auto& [i, ai] : terms) {
        const RMatrix gp = lx_t * ai * lz_inv.transpose();
        g.col(i).segment(offset, n * n) += Eigen::Map<const RVector>(gp.data(), n * n);
      }
      offset += n * n;
    } else if (rp_.kind[k] == RealKind::Diagonal) {
      if (it.z[k].minCoeff() <= 0.0 || it.x[k].minCoeff() <= 0.0) return false;
      zinv_[k] = it.z[k].cwiseInverse();
      const RVector w = it.x[k].col(0).cwiseProduct(zinv_[k].col(0)).cwiseSqrt();
      for (const auto& [i, ai] : terms) g.col(i).segment(offset, rp_.size[k]) += w.cwiseProduct(ai.col(0));
      offset += rp_.size[k];
    }
  }
  qr_.compute(g);
  r_factor_ = qr_.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  if (!r_factor_.allFinite() || r_factor_.diagonal().cwiseAbs().minCoeff() == 0.0) return false;

  // Free variables enter through S_f = A_f^T M^-1 A_f.
  af_ = RMatrix::Zero(m, nf);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto [k, j] = free_index_[static_cast<std::size_t>(f)];
    for (const auto& [i, ai] : rp_.a[k]) af_(i, f) = ai(j, 0);
  }
  minv_af_ = schur_solve(af_);
  if (nf > 0) free_lu_.compute(af_.transpose() * minv_af_);
  return minv_af_.allFinite();
}

RMatrix InteriorPoint::schur_solve(const RMatrix& v) const {
  const RMatrix z = r_factor_.transpose().triangularView<Eigen::Lower>().solve(v);
  return r_factor_.triangularView<Eigen::Upper>().solve(z);
}

RVector InteriorPoint::kkt_solve(const RVector& rhs) const {
  const Eigen::Index m = rp_.m;
  const Eigen::Index nf = af_.cols();
  RVector out(m + nf);
  const RVector minv_r = schur_solve(rhs.head(m));
  if (nf == 0) {
    out = minv_r;
    return out;
  }
  const RVector dxf = free_lu_.solve(af_.transpose() * minv_r - rhs.tail(nf));
  out.head(m) = minv_r - minv_af_ * dxf;
  out.tail(nf) = dxf;
  return out;
}

Direction InteriorPoint::direction(const Iterate& it, double sigma_mu, const Direction* pred) const {
  const Eigen::Index m = rp_.m;
  const std::size_t nb = it.x.size();
  const auto nf = static_cast<Eigen::Index>(free_index_.size());
  // Complementarity target per block: R_c = sigma mu I - X Z - dXa dZa, and
  // T = (R_c - X R_d) Z^{-1}; then M dy + A_f dx_f = r_p - A(T).
  std::vector<RMatrix> t(nb);
  RVector rhs = RVector::Zero(m + nf);
  rhs.head(m) = rp_res_;
  for (std::size_t k = 0; k < nb; ++k) {
    if (rp_.kind[k] == RealKind::Dense) {
      const Eigen::Index n = rp_.size[k];
      RMatrix tk = sigma_mu * zinv_[k] - it.x[k] - it.x[k] * rd_res_[k] * zinv_[k];
      if (pred != nullptr) tk -= pred->dx[k] * pred->dz[k] * zinv_[k];
      (void)n;
      t[k] = std::move(tk);
    } else if (rp_.kind[k] == RealKind::Diagonal) {
      RVector tk = (sigma_mu * zinv_[k].col(0)).eval() - it.x[k].col(0) -
                   it.x[k].col(0).cwiseProduct(rd_res_[k].col(0)).cwiseProduct(zinv_[k].col(0));
      if (pred != nullptr) {
        tk -= pred->dx[k].col(0).cwiseProduct(pred->dz[k].col(0)).cwiseProduct(zinv_[k].col(0));
      }
      t[k] = tk;
    } else {
      continue;
    }
    for (const auto& [i, ai] : rp_.a[k]) rhs(i) -= inner(ai, t[k]);
  }
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto [k, j] = free_index_[static_cast<std::size_t>(f)];
    rhs(m + f) = rd_res_[k](j, 0);
  }
  auto assemble = [&](const RVector& sol) {
    Direction d;
    d.dy = sol.head(m);
    d.dx.resize(nb);
    d.dz.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      if (rp_.kind[k] == RealKind::Free) {
        d.dx[k] = RMatrix::Zero(rp_.size[k], 1);
        d.dz[k] = RMatrix::Zero(rp_.size[k], 1);
        continue;
      }
      d.dz[k] = rd_res_[k] - apply_a_adjoint(rp_, k, d.dy);
      if (rp_.kind[k] == RealKind::Dense) {
        RMatrix dx = t[k] + it.x[k] * (rd_res_[k] - d.dz[k]) * zinv_[k];
        d.dx[k] = 0.5 * (dx + dx.transpose());
      } else {
        d.dx[k] = t[k] + it.x[k].cwiseProduct(rd_res_[k] - d.dz[k]).cwiseProduct(zinv_[k]);
      }
    }
    for (Eigen::Index f = 0; f < nf; ++f) {
      const auto [k, j] = free_index_[static_cast<std::size_t>(f)];
      d.dx[k](j, 0) = sol(m + f);
    }
    return d;
  };
  // Residual of the unreduced equations A(dx) = r_p and A_f^T dy = r_d on free blocks.
  auto residual = [&](const Direction& d) {
    RVector r = RVector::Zero(m + nf);
    r.head(m) = rp_res_ - apply_a(rp_, d.dx);
    for (Eigen::Index f = 0; f < nf; ++f) {
      const auto [k, j] = free_index_[static_cast<std::size_t>(f)];
      r(m + f) = rd_res_[k](j, 0) - apply_a_adjoint(rp_, k, d.dy)(j, 0);
    }
    return r;
  };

  RVector sol = kkt_solve(rhs);
  Direction d = assemble(sol);
  RVector r = residual(d);
  for (int refine = 0; refine < 3 && r.allFinite(); ++refine) {
    const RVector candidate = sol + kkt_solve(r);
    Direction dc = assemble(candidate);
    RVector rc = residual(dc);
    if (!(rc.norm() < r.norm())) break;
    sol = candidate;
    d = std::move(dc);
    r = std::move(rc);
  }
  return d;
}

double InteriorPoint::centrality(const Iterate& it, const Direction& d, double ap, double ad) const {
  double lo = std::numeric_limits<double>::infinity();
  double xz = 0.0;
  for (std::size_t k = 0; k < it.x.size(); ++k) {
    if (rp_.kind[k] == RealKind::Free) continue;
    const RMatrix x = it.x[k] + ap * d.dx[k];
    const RMatrix z = it.z[k] + ad * d.dz[k];
    xz += inner(x, z);
    if (rp_.kind[k] == RealKind::Diagonal) {
      lo = std::min(lo, x.col(0).cwiseProduct(z.col(0)).minCoeff());
      continue;
    }
    Eigen::LLT<RMatrix> llt(0.5 * (x + x.transpose()));
    if (llt.info() != Eigen::Success) return -1.0;
    const RMatrix l = llt.matrixL();
    const RMatrix w = l.transpose() * z * l;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  const double mu = xz / rp_.cone_dim;
  return mu > 0.0 ? lo / mu : -1.0;
}

void InteriorPoint::restore_primal(Iterate& it) const {
  const Eigen::Index m = rp_.m;
  const RVector r = rp_.b - apply_a(rp_, it.x);
  if (r.norm() <= 0.01 * opts_.feas_tol * (1.0 + rp_.b.norm())) return;
  const std::size_t nb = it.x.size();
  Eigen::Index rows = 0;
  for (std::size_t k = 0; k < nb; ++k) rows += rp_.kind[k] == RealKind::Dense ? rp_.size[k] * rp_.size[k] : rp_.size[k];
  RMatrix g = RMatrix::Zero(std::max(rows, m), m);
  std::vector<RMatrix> lx(nb);
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < nb; ++k) {
    const Eigen::Index n = rp_.size[k];
    if (rp_.kind[k] == RealKind::Dense) {
      Eigen::LLT<RMatrix> llt(it.x[k]);
      if (llt.info() != Eigen::Success) return;
      lx[k] = llt.matrixL();
      for (const auto& [i, ai] : rp_.a[k]) {
        const RMatrix gp = lx[k].transpose() * ai * lx[k];
        g.col(i).segment(offset, n * n) += Eigen::Map<const RVector>(gp.data(), n * n);
      }
      offset += n * n;
    } else {
      const RVector w = rp_.kind[k] == RealKind::Diagonal ? RVector(it.x[k].col(0)) : RVector(RVector::Ones(n));
      for (const auto& [i, ai] : rp_.a[k]) g.col(i).segment(offset, n) += w.cwiseProduct(ai.col(0));
      offset += n;
    }
  }
  const Eigen::HouseholderQR<RMatrix> qr(g);
  const RMatrix rf = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const RVector w = rf.triangularView<Eigen::Upper>().solve(rf.transpose().triangularView<Eigen::Lower>().solve(r));
  if (!w.allFinite()) return;
  std::vector<RMatrix> dx(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const RMatrix at = apply_a_adjoint(rp_, k, w);
    if (rp_.kind[k] == RealKind::Dense) {
      const RMatrix xk = lx[k] * lx[k].transpose();
      dx[k] = xk * at * xk;
      dx[k] = 0.5 * (dx[k] + dx[k].transpose()).eval();
    } else if (rp_.kind[k] == RealKind::Diagonal) {
      dx[k] = it.x[k].cwiseProduct(it.x[k]).cwiseProduct(at);
    } else {
      dx[k] = at;
    }
  }
  for (const double scale : {1.0, 0.5}) {
    bool interior = true;
    std::vector<RMatrix> trial(nb);
    for (std::size_t k = 0; k < nb && interior; ++k) {
      trial[k] = it.x[k] + scale * dx[k];
      if (rp_.kind[k] == RealKind::Dense) interior = positive_definite(trial[k]);
      if (rp_.kind[k] == RealKind::Diagonal) interior = trial[k].minCoeff() > 0.0;
    }
    if (interior && (rp_.b - apply_a(rp_, trial)).norm() < r.norm()) {
      it.x = std::move(trial);
      return;
    }
  }
}

SdpSolution InteriorPoint::run(Iterate it) {
  SdpSolution sol;
  const std::size_t nb = it.x.size();
  auto steps = [&](const Direction& d) {
    double ap = std::numeric_limits<double>::infinity();
    double ad = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(rp_.kind[k], it.x[k], d.dx[k]));
      ad = std::min(ad, max_step(rp_.kind[k], it.z[k], d.dz[k]));
    }
    return std::pair{ap, ad};
  };

  int stalls = 0;
  for (int iter = 0;; ++iter) {
    const Measures ms = measure(it);
    sol.iterations = iter;
    sol.primal_value = ms.pobj;
    sol.dual_value = ms.dobj;
    sol.residuals = {ms.pinf, ms.dinf, ms.gap};
    if (opts_.iteration_log != nullptr) {
      *opts_.iteration_log << "iter " << iter << " pobj " << ms.pobj << " dobj " << ms.dobj << " pinf " << ms.pinf
                           << " dinf " << ms.dinf << " gap " << ms.gap << " mu " << ms.mu << '\n';
    }
    if (ms.pinf <= opts_.feas_tol && ms.dinf <= opts_.feas_tol && ms.gap <= opts_.gap_tol) {
      sol.status = SolveStatus::Optimal;
      break;
    }
    if (iter >= opts_.max_iter) {
      sol.status = SolveStatus::MaxIterations;
      sol.message = "iteration limit reached";
      break;
    }
    if (!factorize(it)) {
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "factorization failed";
      break;
    }
    const Direction pred = direction(it, 0.0, nullptr);
    const auto [ap_aff, ad_aff] = steps(pred);
    const double ap1 = std::min(1.0, ap_aff);
    const double ad1 = std::min(1.0, ad_aff);
    double xz_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      if (rp_.kind[k] == RealKind::Free) continue;
      xz_aff += inner(it.x[k] + ap1 * pred.dx[k], it.z[k] + ad1 * pred.dz[k]);
    }
    const double mu_aff = xz_aff / rp_.cone_dim;
    double sigma = ms.mu > 0.0 ? std::pow(std::clamp(mu_aff / ms.mu, 0.0, 1.0), 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);
    const Direction corr = direction(it, sigma * ms.mu, &pred);
    const auto [ap_max, ad_max] = steps(corr);
    const double gamma = 0.9 + 0.09 * std::min(ap1, ad1);
    double ap = std::min(1.0, gamma * ap_max);
    double ad = std::min(1.0, gamma * ad_max);
    // Stay in the wide neighborhood lambda_min(X Z) >= kNeighborhood * mu.
    for (int back = 0; back < 30 && ap > 0.0 && ad > 0.0; ++back) {
      if (centrality(it, corr, ap, ad) >= kNeighborhood) break;
      ap *= 0.8;
      ad *= 0.8;
    }
    if (opts_.iteration_log != nullptr) {
      *opts_.iteration_log << "  sigma " << sigma << " step " << ap << ' ' << ad << '\n';
    }
    if (!(ap > 0.0) || !(ad > 0.0) || !corr.dy.allFinite()) {
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "no admissible step";
      break;
    }
    stalls = (ap < 1e-10 && ad < 1e-10) ? stalls + 1 : 0;
    if (stalls >= 3) {
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "step length stalled";
      break;
    }
    for (std::size_t k = 0; k < nb; ++k) {
      it.x[k] += ap * corr.dx[k];
      if (rp_.kind[k] != RealKind::Free) it.z[k] += ad * corr.dz[k];
      if (rp_.kind[k] == RealKind::Dense) {
        it.x[k] = 0.5 * (it.x[k] + it.x[k].transpose()).eval();
        it.z[k] = 0.5 * (it.z[k] + it.z[k].transpose()).eval();
      }
    }
    it.y += ad * corr.dy;
    restore_primal(it);
    double xmax = 0.0;
    for (const auto& xb : it.x) xmax = std::max(xmax, xb.cwiseAbs().maxCoeff());
    if (!std::isfinite(xmax) || xmax > 1e12) {
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "primal iterates diverge (problem may be unbounded)";
      break;
    }
  }
  // Hand the raw realified iterate back through the members of sol filled by the caller.
  sol.y = it.y;
  sol.x.blocks.clear();
  sol.z.blocks.clear();
  for (std::size_t k = 0; k < nb; ++k) {
    sol.x.blocks.push_back(it.x[k].cast<Complex>());
    sol.z.blocks.push_back(rp_.kind[k] == RealKind::Free ? RMatrix::Zero(rp_.size[k], 1).cast<Complex>().eval()
                                                         : it.z[k].cast<Complex>().eval());
  }
  return sol;
}

void validate_interior(const SdpProblem& p, const RealProblem& rp, const std::vector<RMatrix>& x) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (rp.kind[k] == RealKind::Dense && !positive_definite(x[k])) {
      throw Error(ErrorCode::InvalidProblem, "interior point block " + std::to_string(k) + " is not positive definite");
    }
    if (rp.kind[k] == RealKind::Diagonal && !(x[k].minCoeff() > 0.0)) {
      throw Error(ErrorCode::InvalidProblem, "interior point block " + std::to_string(k) + " has a nonpositive entry");
    }
  }
  const RVector r = rp.b - apply_a(rp, x);
  for (Eigen::Index i = 0; i < rp.m; ++i) {
    if (std::abs(r(i)) > 1e-7 * (1.0 + std::abs(rp.b(i)))) {
      throw Error(ErrorCode::InvalidProblem,
                  "interior point violates constraint " + std::to_string(i) + " by " + std::to_string(r(i)));
    }
  }
  (void)p;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) {
  if (!problem.interior_point()) {
    throw Error(ErrorCode::InvalidProblem, "problem has no strictly feasible starting point");
  }
  const auto& blocks = problem.blocks();
  const BlockValues& x0 = *problem.interior_point();
  if (x0.blocks.size() != blocks.size()) throw Error(ErrorCode::InvalidProblem, "interior point block count");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (x0.blocks[k].rows() != blocks[k].size || x0.blocks[k].cols() != coeff_cols(blocks[k])) {
      throw Error(ErrorCode::InvalidProblem, "interior point block " + std::to_string(k) + " has the wrong shape");
    }
  }
  const RealProblem rp = realify_problem(problem);
  if (options.debug_dump != nullptr) write_sdpa(problem, *options.debug_dump);

  Iterate it;
  double cscale = 1.0;
  for (const auto& c : rp.c) cscale = std::max(cscale, c.cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    it.x.push_back(real_point(x0.blocks[k], blocks[k]));
    if (rp.kind[k] == RealKind::Dense) {
      it.z.push_back(cscale * RMatrix::Identity(rp.size[k], rp.size[k]));
    } else {
      it.z.push_back(RMatrix::Constant(rp.size[k], 1, rp.kind[k] == RealKind::Free ? 0.0 : cscale));
    }
  }
  validate_interior(problem, rp, it.x);
  it.y = RVector::Zero(rp.m);

  InteriorPoint ipm(rp, options);
  SdpSolution sol = ipm.run(std::move(it));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const RMatrix xr = sol.x.blocks[k].real();
    const RMatrix zr = sol.z.blocks[k].real();
    sol.x.blocks[k] = complex_point(xr, blocks[k]);
    // The realified dual slack is half the realification of the complex one.
    sol.z.blocks[k] = blocks[k].kind == BlockKind::ComplexPsd ? (2.0 * complexify(zr)).eval()
                                                               : complex_point(zr, blocks[k]);
  }
  if (options.observer != nullptr) options.observer->on_solve(problem, options, sol);
  return sol;
}

// ---------------------------------------------------------------------------

Residuals check_kkt(const SdpProblem& problem, const SdpSolution& solution) {
  const auto& blocks = problem.blocks();
  const auto& cons = problem.constraints();
  const auto& b = problem.rhs();
  if (solution.x.blocks.size() != blocks.size() || solution.z.blocks.size() != blocks.size() ||
      solution.y.size() != static_cast<Eigen::Index>(cons.size())) {
    throw Error(ErrorCode::DimensionMismatch, "solution does not match problem shape");
  }
  Residuals r;
  double bnorm2 = 0.0;
  double pres2 = 0.0;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const double v = problem.evaluate(cons[i], solution.x) - b[i];
    pres2 += v * v;
    bnorm2 += b[i] * b[i];
  }
  double primal_cone = 0.0;
  double dual_cone = 0.0;
  double cnorm2 = 0.0;
  double dres2 = 0.0;
  double xz = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const int bi = static_cast<int>(k);
    const BlockSpec& spec = blocks[k];
    CMatrix c = coefficient(problem.objective(), problem.objective().trace_terms(), bi, spec);
    CMatrix aty = CMatrix::Zero(c.rows(), c.cols());
    for (std::size_t i = 0; i < cons.size(); ++i) {
      if (!cons[i].terms().count(bi) && !cons[i].trace_terms().count(bi)) continue;
      aty += solution.y(static_cast<Eigen::Index>(i)) * coefficient(cons[i], cons[i].trace_terms(), bi, spec);
    }
    const CMatrix& x = solution.x.blocks[k];
    const CMatrix& z = solution.z.blocks[k];
    CMatrix rd;
    if (spec.is_matrix()) {
      // Only the Hermitian (real symmetric) part of a coefficient acts on the block.
      if (spec.kind == BlockKind::RealPsd) {
        c = CMatrix(0.5 * (c.real() + c.real().transpose()));
        aty = CMatrix(0.5 * (aty.real() + aty.real().transpose()));
      } else {
        c = 0.5 * (c + c.adjoint());
        aty = 0.5 * (aty + aty.adjoint());
      }
      rd = c - aty - z;
      primal_cone = std::max(primal_cone, -min_eigenvalue(HermitianOperator(x)));
      dual_cone = std::max(dual_cone, -min_eigenvalue(HermitianOperator(z)));
      xz += (x.array() * z.transpose().array()).sum().real();
    } else {
      c = CMatrix(c.real());
      aty = CMatrix(aty.real());
      rd = c - aty;
      if (spec.kind == BlockKind::Nonnegative) {
        rd -= z;
        primal_cone = std::max(primal_cone, -x.real().minCoeff());
        dual_cone = std::max(dual_cone, -z.real().minCoeff());
        xz += (x.real().array() * z.real().array()).sum();
      }
    }
    cnorm2 += c.squaredNorm();
    dres2 += rd.squaredNorm();
  }
  r.primal_infeasibility = std::sqrt(pres2) / (1.0 + std::sqrt(bnorm2)) + std::max(primal_cone, 0.0);
  r.dual_infeasibility = std::sqrt(dres2) / (1.0 + std::sqrt(cnorm2)) + std::max(dual_cone, 0.0);
  const double pobj = problem.evaluate(problem.objective(), solution.x);
  double dobj = 0.0;
  for (std::size_t i = 0; i < cons.size(); ++i) dobj += b[i] * solution.y(static_cast<Eigen::Index>(i));
  r.relative_gap = std::max(std::abs(pobj - dobj), std::max(xz, 0.0)) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return r;
}

void write_sdpa(const SdpProblem& problem, std::ostream& out) {
  const RealProblem rp = realify_problem(problem);
  const auto prec = out.precision(17);
  out << "\"realified problem: min <C,X> s.t. <A_i,X> = b_i written as SDPA dual, F0 = -C, F_i = A_i\n";
  out << rp.m << " = mDIM\n";
  // Dense blocks keep their side, all vector blocks merge into one diagonal block.
  Eigen::Index diag = 0;
  int ndense = 0;
  for (std::size_t k = 0; k < rp.kind.size(); ++k) {
    if (rp.kind[k] == RealKind::Dense) ++ndense;
    if (rp.kind[k] == RealKind::Diagonal) diag += rp.size[k];
    if (rp.kind[k] == RealKind::Free) diag += 2 * rp.size[k];
  }
  out << ndense + (diag > 0 ? 1 : 0) << " = nBLOCK\n";
  for (std::size_t k = 0; k < rp.kind.size(); ++k) {
    if (rp.kind[k] == RealKind::Dense) out << rp.size[k] << ' ';
  }
  if (diag > 0) out << -diag;
  out << " = bLOCKsTRUCT\n";
  for (Eigen::Index i = 0; i < rp.m; ++i) out << rp.b(i) << (i + 1 < rp.m ? " " : "\n");
  if (rp.m == 0) out << '\n';

  auto emit = [&](Eigen::Index mat, const RMatrix& coeff, std::size_t k, int dense_no, Eigen::Index diag_off, double sign) {
    if (rp.kind[k] == RealKind::Dense) {
      for (Eigen::Index r = 0; r < coeff.rows(); ++r)
        for (Eigen::Index c = r; c < coeff.cols(); ++c)
          if (coeff(r, c) != 0.0) out << mat << ' ' << dense_no << ' ' << r + 1 << ' ' << c + 1 << ' ' << sign * coeff(r, c) << '\n';
      return;
    }
    const int blk = ndense + 1;
    for (Eigen::Index r = 0; r < coeff.rows(); ++r) {
      if (coeff(r, 0) == 0.0) continue;
      if (rp.kind[k] == RealKind::Diagonal) {
        const Eigen::Index e = diag_off + r + 1;
        out << mat << ' ' << blk << ' ' << e << ' ' << e << ' ' << sign * coeff(r, 0) << '\n';
      } else {
        const Eigen::Index e = diag_off + 2 * r + 1;
        out << mat << ' ' << blk << ' ' << e << ' ' << e << ' ' << sign * coeff(r, 0) << '\n';
        out << mat << ' ' << blk << ' ' << e + 1 << ' ' << e + 1 << ' ' << -sign * coeff(r, 0) << '\n';
      }
    }
  };
  std::vector<int> dense_no(rp.kind.size(), 0);
  std::vector<Eigen::Index> diag_off(rp.kind.size(), 0);
  int dn = 0;
  Eigen::Index off = 0;
  for (std::size_t k = 0; k < rp.kind.size(); ++k) {
    if (rp.kind[k] == RealKind::Dense) {
      dense_no[k] = ++dn;
    } else {
      diag_off[k] = off;
      off += rp.kind[k] == RealKind::Free ? 2 * rp.size[k] : rp.size[k];
    }
  }
  for (std::size_t k = 0; k < rp.kind.size(); ++k) emit(0, rp.c[k], k, dense_no[k], diag_off[k], -1.0);
  for (std::size_t k = 0; k < rp.kind.size(); ++k)
    for (const auto& [i, ai] : rp.a[k]) emit(i + 1, ai, k, dense_no[k], diag_off[k], 1.0);
  out.precision(prec);
}

}  // namespace lecam::conic
