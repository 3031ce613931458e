#include "encopt/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace encopt {

// ---------------------------------------------------------------------------
// LinearMatrixExpr

LinearMatrixExpr::LinearMatrixExpr(Index dim) : dim_(dim), constant_(RealMatrix::Zero(dim, dim)) {}

void LinearMatrixExpr::add_entry(Index var, Index row, Index col, double value) {
  if (row < 0 || col < 0 || row >= dim_ || col >= dim_)
    throw Error(ErrorCode::dimension_mismatch, "matrix entry outside the block");
  if (value == 0.0) return;
  auto& m = terms_[var];
  m[{row, col}] += value;
  if (row != col) m[{col, row}] += value;
}

void LinearMatrixExpr::add_constant(Index row, Index col, double value) {
  constant_(row, col) += value;
  if (row != col) constant_(col, row) += value;
}

SparseMatrix LinearMatrixExpr::coefficient(Index var) const {
  SparseMatrix out(dim_, dim_);
  auto it = terms_.find(var);
  if (it == terms_.end()) return out;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(it->second.size());
  for (const auto& [rc, v] : it->second) trips.emplace_back(rc.first, rc.second, v);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

RealMatrix LinearMatrixExpr::evaluate(const RealVector& x) const {
  RealMatrix out = constant_;
  for (const auto& [var, entries] : terms_) {
    const double xv = x(var);
    if (xv == 0.0) continue;
    for (const auto& [rc, v] : entries) out(rc.first, rc.second) += xv * v;
  }
  return out;
}

Index LinearMatrixExpr::max_variable() const {
  return terms_.empty() ? -1 : terms_.rbegin()->first;
}

// ---------------------------------------------------------------------------
// SdpProblem

void SdpProblem::set_bounds(Index var, std::optional<double> lo, std::optional<double> hi) {
  if (lower.empty()) lower.assign(static_cast<std::size_t>(num_vars), std::nullopt);
  if (upper.empty()) upper.assign(static_cast<std::size_t>(num_vars), std::nullopt);
  lower.at(static_cast<std::size_t>(var)) = lo;
  upper.at(static_cast<std::size_t>(var)) = hi;
}

void SdpProblem::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::precondition, m); };
  if (objective.size() != num_vars) fail("objective length differs from variable count");
  if (!objective.allFinite()) fail("objective is not finite");
  for (const auto& c : psd_constraints) {
    if (c.max_variable() >= num_vars) fail("PSD constraint references an unknown variable");
    if (!c.constant().allFinite()) fail("PSD constant block is not finite");
    if ((c.constant() - c.constant().transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + c.constant().cwiseAbs().maxCoeff()))
      fail("PSD constant block is not symmetric");
  }
  for (const auto& e : equalities) {
    for (const auto& [var, v] : e.terms) {
      if (var < 0 || var >= num_vars) fail("equality references an unknown variable");
      if (!std::isfinite(v)) fail("equality row is not finite");
    }
    if (!std::isfinite(e.rhs)) fail("equality right-hand side is not finite");
  }
  if (!lower.empty() && static_cast<Index>(lower.size()) != num_vars) fail("lower bounds have the wrong length");
  if (!upper.empty() && static_cast<Index>(upper.size()) != num_vars) fail("upper bounds have the wrong length");
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

double constraint_violation(const SdpProblem& p, const RealVector& x) {
  double worst = 0;
  for (const auto& e : p.equalities) {
    double lhs = 0;
    for (const auto& [var, v] : e.terms) lhs += v * x(var);
    worst = std::max(worst, std::abs(lhs - e.rhs));
  }
  for (Index i = 0; i < p.num_vars; ++i) {
    if (!p.lower.empty() && p.lower[static_cast<std::size_t>(i)])
      worst = std::max(worst, *p.lower[static_cast<std::size_t>(i)] - x(i));
    if (!p.upper.empty() && p.upper[static_cast<std::size_t>(i)])
      worst = std::max(worst, x(i) - *p.upper[static_cast<std::size_t>(i)]);
  }
  for (const auto& c : p.psd_constraints) {
    if (c.dim() == 0) continue;
    const RealVector ev = hermitian_eigenvalues(c.evaluate(x));
    worst = std::max(worst, -ev(ev.size() - 1));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Equality elimination

namespace {

// Reduced row echelon form with full pivoting; returns pivot columns.
struct Elimination {
  RealMatrix rref;
  RealVector rhs;
  std::vector<Index> pivot_cols;
  bool consistent = true;
};

Elimination eliminate(RealMatrix a, RealVector b, double tol) {
  Elimination out;
  const Index rows = a.rows(), cols = a.cols();
  const double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
  Index r = 0;
  std::vector<bool> used(static_cast<std::size_t>(cols), false);
  for (; r < rows; ++r) {
    // full pivot among remaining rows / unused columns
    double best = 0;
    Index br = -1, bc = -1;
    for (Index i = r; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        if (!used[static_cast<std::size_t>(j)] && std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          br = i;
          bc = j;
        }
    if (best <= tol * scale) break;
    a.row(r).swap(a.row(br));
    std::swap(b(r), b(br));
    const double piv = a(r, bc);
    a.row(r) /= piv;
    b(r) /= piv;
    a(r, bc) = 1.0;
    for (Index i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = a(i, bc);
      if (f == 0.0) continue;
      a.row(i) -= f * a.row(r);
      a(i, bc) = 0.0;
      b(i) -= f * b(r);
    }
    used[static_cast<std::size_t>(bc)] = true;
    out.pivot_cols.push_back(bc);
  }
  const double bscale = 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  for (Index i = r; i < rows; ++i)
    if (std::abs(b(i)) > 1e3 * tol * bscale) out.consistent = false;
  out.rref = a.topRows(r);
  out.rhs = b.head(r);
  return out;
}

}  // namespace

std::optional<ReducedProblem> reduce_problem(const SdpProblem& p, double tol) {
  p.validate();
  const Index n = p.num_vars;
  ReducedProblem red;

  // x = offset + basis * w
  RealVector offset = RealVector::Zero(n);
  std::vector<Eigen::Triplet<double>> basis_trips;
  Index nfree = n;
  if (!p.equalities.empty()) {
    RealMatrix a = RealMatrix::Zero(static_cast<Index>(p.equalities.size()), n);
    RealVector b(static_cast<Index>(p.equalities.size()));
    for (std::size_t k = 0; k < p.equalities.size(); ++k) {
      for (const auto& [var, v] : p.equalities[k].terms) a(static_cast<Index>(k), var) += v;
      b(static_cast<Index>(k)) = p.equalities[k].rhs;
    }
    Elimination el = eliminate(std::move(a), std::move(b), tol);
    if (!el.consistent) return std::nullopt;
    std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
    for (Index c : el.pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;
    std::vector<Index> free_index(static_cast<std::size_t>(n), -1);
    nfree = 0;
    for (Index j = 0; j < n; ++j)
      if (!is_pivot[static_cast<std::size_t>(j)]) free_index[static_cast<std::size_t>(j)] = nfree++;
    for (Index j = 0; j < n; ++j)
      if (!is_pivot[static_cast<std::size_t>(j)]) basis_trips.emplace_back(j, free_index[static_cast<std::size_t>(j)], 1.0);
    for (std::size_t k = 0; k < el.pivot_cols.size(); ++k) {
      const Index pc = el.pivot_cols[k];
      offset(pc) = el.rhs(static_cast<Index>(k));
      for (Index j = 0; j < n; ++j) {
        if (is_pivot[static_cast<std::size_t>(j)]) continue;
        const double v = el.rref(static_cast<Index>(k), j);
        if (std::abs(v) > 1e-15) basis_trips.emplace_back(pc, free_index[static_cast<std::size_t>(j)], -v);
      }
    }
  } else {
    for (Index j = 0; j < n; ++j) basis_trips.emplace_back(j, j, 1.0);
  }
  red.param.offset = offset;
  red.param.basis.resize(n, nfree);
  red.param.basis.setFromTriplets(basis_trips.begin(), basis_trips.end());
  red.num_vars = nfree;

  const SparseMatrix& basis = red.param.basis;
  red.objective = basis.transpose() * p.objective;
  red.objective_offset = p.objective.dot(offset);

  // PSD blocks: C = F0 + sum_i offset_i F_i ; A_k = sum_i basis(i,k) F_i
  const SparseMatrix basis_t = basis.transpose();
  for (const auto& c : p.psd_constraints) {
    RealMatrix constant = c.evaluate(offset);
    std::vector<std::vector<Eigen::Triplet<double>>> trips(static_cast<std::size_t>(nfree));
    for (const auto& [var, entries] : c.terms()) {
      for (SparseMatrix::InnerIterator it(basis_t, var); it; ++it) {
        const Index k = it.row();
        const double s = it.value();
        for (const auto& [rc, v] : entries) trips[static_cast<std::size_t>(k)].emplace_back(rc.first, rc.second, s * v);
      }
    }
    std::vector<SparseMatrix> coeffs(static_cast<std::size_t>(nfree));
    for (Index k = 0; k < nfree; ++k) {
      coeffs[static_cast<std::size_t>(k)].resize(c.dim(), c.dim());
      auto& t = trips[static_cast<std::size_t>(k)];
      coeffs[static_cast<std::size_t>(k)].setFromTriplets(t.begin(), t.end());
      coeffs[static_cast<std::size_t>(k)].prune(1e-15, 1.0);
    }
    const bool constant_only =
        std::all_of(coeffs.begin(), coeffs.end(), [](const SparseMatrix& a) { return a.nonZeros() == 0; });
    if (constant_only) {
      // Nothing to optimize in this block; it is either satisfied or makes the problem infeasible.
      if (c.dim() > 0 && !is_psd(constant, 1e-9)) return std::nullopt;
      continue;
    }
    red.constants.push_back(std::move(constant));
    red.coefficients.push_back(std::move(coeffs));
  }

  // Box bounds as one diagonal block.
  std::vector<std::pair<Index, double>> rows;  // (var, sign) with bound value
  std::vector<double> values;
  for (Index i = 0; i < n; ++i) {
    if (!p.lower.empty() && p.lower[static_cast<std::size_t>(i)]) {
      rows.emplace_back(i, 1.0);
      values.push_back(*p.lower[static_cast<std::size_t>(i)]);
    }
    if (!p.upper.empty() && p.upper[static_cast<std::size_t>(i)]) {
      rows.emplace_back(i, -1.0);
      values.push_back(*p.upper[static_cast<std::size_t>(i)]);
    }
  }
  if (!rows.empty()) {
    const Index q = static_cast<Index>(rows.size());
    RealMatrix constant = RealMatrix::Zero(q, q);
    std::vector<std::vector<Eigen::Triplet<double>>> trips(static_cast<std::size_t>(nfree));
    for (Index r = 0; r < q; ++r) {
      const auto [var, sign] = rows[static_cast<std::size_t>(r)];
      // sign * (x_var - bound) >= 0
      constant(r, r) = sign * (offset(var) - values[static_cast<std::size_t>(r)]);
      for (SparseMatrix::InnerIterator it(basis_t, var); it; ++it)
        trips[static_cast<std::size_t>(it.row())].emplace_back(r, r, sign * it.value());
    }
    std::vector<SparseMatrix> coeffs(static_cast<std::size_t>(nfree));
    for (Index k = 0; k < nfree; ++k) {
      coeffs[static_cast<std::size_t>(k)].resize(q, q);
      auto& t = trips[static_cast<std::size_t>(k)];
      coeffs[static_cast<std::size_t>(k)].setFromTriplets(t.begin(), t.end());
    }
    red.constants.push_back(std::move(constant));
    red.coefficients.push_back(std::move(coeffs));
  }
  return red;
}

// ---------------------------------------------------------------------------
// Interior-point method on the reduced problem

namespace {

struct Entry {
  int row;
  int col;
  double value;
};

struct IpmBlock {
  Index dim = 0;
  RealMatrix constant;
  std::vector<std::vector<Entry>> coeffs;  // per variable, full symmetric storage
  std::vector<Index> active;               // variables with a non-empty coefficient
  std::vector<std::vector<int>> row_support;
};

double trace_product(const std::vector<Entry>& a, const RealMatrix& g) {
  // Tr(A G) = sum_{r,c} A(r,c) G(c,r)
  double s = 0;
  for (const auto& e : a) s += e.value * g(e.col, e.row);
  return s;
}

void add_scaled(RealMatrix& out, const std::vector<Entry>& a, double s) {
  for (const auto& e : a) out(e.row, e.col) += s * e.value;
}

// Largest alpha in (0, inf] with x + alpha dx >= 0, given chol(x) = L L^T.
double max_step(const Eigen::LLT<RealMatrix>& chol, const RealMatrix& dx) {
  RealMatrix t = chol.matrixL().solve(dx);
  RealMatrix m = chol.matrixL().solve(t.transpose());
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

RealMatrix sym(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

struct IpmResult {
  SdpStatus status = SdpStatus::numerical_failure;
  RealVector w;
  double primal = 0;
  double dual = 0;
  int iterations = 0;
  std::string message;
};

class InteriorPoint {
 public:
  InteriorPoint(const ReducedProblem& red, const SolverSettings& s) : settings_(s), m_(red.num_vars) {
    c_ = red.objective;
    offset_ = red.objective_offset;
    for (std::size_t b = 0; b < red.constants.size(); ++b) {
      IpmBlock blk;
      blk.dim = red.constants[b].rows();
      blk.constant = red.constants[b];
      blk.coeffs.resize(static_cast<std::size_t>(m_));
      blk.row_support.resize(static_cast<std::size_t>(m_));
      for (Index j = 0; j < m_; ++j) {
        const SparseMatrix& a = red.coefficients[b][static_cast<std::size_t>(j)];
        auto& list = blk.coeffs[static_cast<std::size_t>(j)];
        std::vector<int> rows;
        for (Index k = 0; k < a.outerSize(); ++k)
          for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
            list.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
            rows.push_back(static_cast<int>(it.row()));
          }
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        blk.row_support[static_cast<std::size_t>(j)] = std::move(rows);
        if (!list.empty()) blk.active.push_back(j);
      }
      total_dim_ += blk.dim;
      blocks_.push_back(std::move(blk));
    }
  }

  IpmResult run() {
    IpmResult res;
    res.w = RealVector::Zero(m_);
    if (blocks_.empty()) {
      if (c_.cwiseAbs().maxCoeff() > 0) {
        res.status = SdpStatus::numerical_failure;
        res.message = "unbounded: no constraints";
      } else {
        res.status = SdpStatus::optimal;
      }
      res.primal = res.dual = offset_;
      return res;
    }
    init();
    RealVector& w = w_;
    double norm_c = c_.norm();
    double norm_cons = 0;
    for (const auto& b : blocks_) norm_cons += b.constant.squaredNorm();
    norm_cons = std::sqrt(norm_cons);

    double best_merit = std::numeric_limits<double>::infinity();
    RealVector best_w = w;
    int stall = 0;

    for (int it = 0; it < settings_.max_iters; ++it) {
      res.iterations = it;
      // residuals
      std::vector<RealMatrix> rd(blocks_.size());
      double rd_norm2 = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        rd[b] = apply(b, w) - s_[b];
        rd_norm2 += rd[b].squaredNorm();
      }
      RealVector atz = adjoint(z_);
      RealVector rp = c_ - atz;
      double mu = 0, trcz = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        mu += z_[b].cwiseProduct(s_[b]).sum();
        trcz += blocks_[b].constant.cwiseProduct(z_[b]).sum();
      }
      mu /= static_cast<double>(total_dim_);
      const double pobj = c_.dot(w) + offset_;
      const double dobj = -trcz + offset_;
      const double pinf = std::sqrt(rd_norm2) / (1 + norm_cons);
      const double dinf = rp.norm() / (1 + norm_c);
      const double gap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
      const double comp = mu * static_cast<double>(total_dim_) / (1 + std::abs(pobj) + std::abs(dobj));
      if (settings_.verbose)
        std::fprintf(stderr, "ipm %3d  p %.10e  d %.10e  pinf %.2e dinf %.2e gap %.2e mu %.2e\n", it, pobj, dobj,
                     pinf, dinf, gap, mu);
      const double merit = std::max({pinf, dinf, gap, comp});
      if (merit < best_merit) {
        best_merit = merit;
        best_w = w;
      }
      if (pinf <= settings_.tol && dinf <= settings_.tol && gap <= settings_.tol && comp <= 10 * settings_.tol) {
        res.status = SdpStatus::optimal;
        res.w = w;
        res.primal = pobj;
        res.dual = dobj;
        return res;
      }
      // Farkas-type certificate: Z >= 0, A^*(Z) ~ 0, Tr(C Z) < 0.
      if (trcz < 0 && atz.norm() <= 1e-8 * -trcz && -trcz > 1e6 * (1 + norm_c)) {
        res.status = SdpStatus::infeasible;
        res.w = w;
        res.message = "LMI infeasibility certificate found";
        return res;
      }
      if (-pobj > 1e12 * (1 + norm_c) && pinf < 1e-6) {
        res.status = SdpStatus::numerical_failure;
        res.w = best_w;
        res.message = "objective unbounded below";
        return res;
      }

      // Newton system
      std::vector<RealMatrix> sinv(blocks_.size());
      std::vector<Eigen::LLT<RealMatrix>> schol(blocks_.size()), zchol(blocks_.size());
      bool ok = true;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        schol[b].compute(s_[b]);
        zchol[b].compute(z_[b]);
        if (schol[b].info() != Eigen::Success || zchol[b].info() != Eigen::Success) ok = false;
        else sinv[b] = sym(schol[b].solve(RealMatrix::Identity(blocks_[b].dim, blocks_[b].dim)));
      }
      if (!ok) {
        res.message = "lost positive definiteness";
        break;
      }
      RealMatrix schur = schur_matrix(sinv);
      Eigen::LLT<RealMatrix> mchol(schur);
      if (mchol.info() != Eigen::Success) {
        const double ridge = 1e-14 * (1 + schur.diagonal().cwiseAbs().maxCoeff());
        schur.diagonal().array() += ridge;
        mchol.compute(schur);
        if (mchol.info() != Eigen::Success) {
          res.message = "Schur complement is singular";
          break;
        }
      }
      // Z Rd S^-1 terms
      std::vector<RealMatrix> zrds(blocks_.size());
      for (std::size_t b = 0; b < blocks_.size(); ++b) zrds[b] = z_[b] * rd[b] * sinv[b];
      RealVector base_rhs = -c_;
      for (std::size_t b = 0; b < blocks_.size(); ++b)
        for (Index j : blocks_[b].active) base_rhs(j) -= trace_product(blocks_[b].coeffs[static_cast<std::size_t>(j)], zrds[b]);

      // predictor
      RealVector dw = mchol.solve(base_rhs);
      std::vector<RealMatrix> ds(blocks_.size()), dz(blocks_.size());
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        ds[b] = apply_linear(b, dw) + rd[b];
        dz[b] = -z_[b] - sym(z_[b] * ds[b] * sinv[b]);
      }
      double ap = step_limit(schol, ds), ad = step_limit(zchol, dz);
      ap = std::min(1.0, ap);
      ad = std::min(1.0, ad);
      double mu_aff = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b)
        mu_aff += (z_[b] + ad * dz[b]).cwiseProduct(s_[b] + ap * ds[b]).sum();
      mu_aff /= static_cast<double>(total_dim_);
      double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
      sigma = std::clamp(sigma, 0.0, 1.0);

      // corrector
      RealVector rhs = base_rhs;
      std::vector<RealMatrix> second(blocks_.size());
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        second[b] = sym(dz[b] * ds[b] * sinv[b]);
        const RealMatrix target = sigma * mu * sinv[b] - second[b];
        for (Index j : blocks_[b].active) rhs(j) += trace_product(blocks_[b].coeffs[static_cast<std::size_t>(j)], target);
      }
      dw = mchol.solve(rhs);
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        ds[b] = apply_linear(b, dw) + rd[b];
        dz[b] = sigma * mu * sinv[b] - z_[b] - sym(z_[b] * ds[b] * sinv[b]) - second[b];
      }
      ap = step_limit(schol, ds);
      ad = step_limit(zchol, dz);
      const double frac = 0.98;
      ap = std::min(1.0, frac * ap);
      ad = std::min(1.0, frac * ad);
      if (!(ap > 0) || !(ad > 0) || !dw.allFinite()) {
        res.message = "invalid step";
        break;
      }
      w += ap * dw;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        s_[b] = sym(s_[b] + ap * ds[b]);
        z_[b] = sym(z_[b] + ad * dz[b]);
      }
      if (ap < 1e-10 && ad < 1e-10) {
        if (++stall > 5) {
          res.message = "step length stalled";
          break;
        }
      } else {
        stall = 0;
      }
    }
    if (res.message.empty()) res.message = "iteration limit reached";
    res.status = SdpStatus::numerical_failure;
    res.w = best_w;
    res.primal = c_.dot(best_w) + offset_;
    return res;
  }

 private:
  void init() {
    w_ = RealVector::Zero(m_);
    s_.clear();
    z_.clear();
    for (const auto& b : blocks_) {
      const double n = static_cast<double>(b.dim);
      double max_a = 0;
      double zeta_z = std::max(10.0, std::sqrt(n));
      for (Index j : b.active) {
        double fro = 0;
        for (const auto& e : b.coeffs[static_cast<std::size_t>(j)]) fro += e.value * e.value;
        fro = std::sqrt(fro);
        max_a = std::max(max_a, fro);
        zeta_z = std::max(zeta_z, std::sqrt(n) * (1 + std::abs(c_(j))) / (1 + fro));
      }
      const double zeta_s = std::max({10.0, std::sqrt(n), max_a, b.constant.norm()});
      s_.push_back(zeta_s * RealMatrix::Identity(b.dim, b.dim));
      z_.push_back(zeta_z * RealMatrix::Identity(b.dim, b.dim));
    }
  }

  RealMatrix apply(std::size_t b, const RealVector& w) const {
    RealMatrix out = blocks_[b].constant;
    for (Index j : blocks_[b].active) add_scaled(out, blocks_[b].coeffs[static_cast<std::size_t>(j)], w(j));
    return out;
  }

  RealMatrix apply_linear(std::size_t b, const RealVector& w) const {
    RealMatrix out = RealMatrix::Zero(blocks_[b].dim, blocks_[b].dim);
    for (Index j : blocks_[b].active) add_scaled(out, blocks_[b].coeffs[static_cast<std::size_t>(j)], w(j));
    return out;
  }

  RealVector adjoint(const std::vector<RealMatrix>& z) const {
    RealVector out = RealVector::Zero(m_);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      for (Index j : blocks_[b].active) out(j) += trace_product(blocks_[b].coeffs[static_cast<std::size_t>(j)], z[b]);
    return out;
  }

  double step_limit(const std::vector<Eigen::LLT<RealMatrix>>& chol, const std::vector<RealMatrix>& d) const {
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < blocks_.size(); ++b) a = std::min(a, max_step(chol[b], d[b]));
    return a;
  }

  // M_ij = sum_b Tr(A_i Z A_j S^-1)
  RealMatrix schur_matrix(const std::vector<RealMatrix>& sinv) const {
    RealMatrix schur = RealMatrix::Zero(m_, m_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const IpmBlock& blk = blocks_[b];
      const RealMatrix& z = z_[b];
      const RealMatrix& si = sinv[b];
      for (Index j : blk.active) {
        const auto& rows = blk.row_support[static_cast<std::size_t>(j)];
        const Index nr = static_cast<Index>(rows.size());
        // T = A_j S^-1 restricted to its row support
        RealMatrix t = RealMatrix::Zero(nr, blk.dim);
        for (const auto& e : blk.coeffs[static_cast<std::size_t>(j)]) {
          const Index k = std::lower_bound(rows.begin(), rows.end(), e.row) - rows.begin();
          t.row(k) += e.value * si.row(e.col);
        }
        RealMatrix zsub(blk.dim, nr);
        for (Index k = 0; k < nr; ++k) zsub.col(k) = z.col(rows[static_cast<std::size_t>(k)]);
        const RealMatrix g = zsub * t;  // Z A_j S^-1
        for (Index i : blk.active) {
          if (i < j) continue;
          const double v = trace_product(blk.coeffs[static_cast<std::size_t>(i)], g);
          schur(i, j) += v;
          if (i != j) schur(j, i) += v;
        }
      }
    }
    return schur;
  }

  SolverSettings settings_;
  Index m_;
  RealVector c_;
  double offset_ = 0;
  std::vector<IpmBlock> blocks_;
  Index total_dim_ = 0;
  RealVector w_;
  std::vector<RealMatrix> s_, z_;
};

SdpSolution finish(const SdpProblem& p, const ReducedProblem& red, const RealVector& w, SdpStatus status,
                   double dual, int iterations, std::string message) {
  SdpSolution sol;
  sol.status = status;
  sol.x = red.param.offset + red.param.basis * w;
  sol.objective = p.objective.dot(sol.x);
  sol.dual_objective = dual;
  sol.max_violation = constraint_violation(p, sol.x);
  sol.iterations = iterations;
  sol.message = std::move(message);
  return sol;
}

}  // namespace

SdpSolution InteriorPointBackend::solve(const SdpProblem& p, const SolverSettings& settings) const {
  auto red = reduce_problem(p);
  if (!red) {
    SdpSolution sol;
    sol.status = SdpStatus::infeasible;
    sol.x = RealVector::Zero(p.num_vars);
    sol.message = "infeasible constraint data";
    return sol;
  }
  return solve_reduced(p, *red, settings);
}

void set_objective(ReducedProblem& red, const RealVector& objective) {
  detail::require(objective.size() == red.param.basis.rows(), ErrorCode::dimension_mismatch,
                  "objective length differs from variable count");
  red.objective = red.param.basis.transpose() * objective;
  red.objective_offset = objective.dot(red.param.offset);
}

SdpSolution solve_reduced(const SdpProblem& p, const ReducedProblem& red, const SolverSettings& settings) {
  InteriorPoint ipm(red, settings);
  IpmResult r = ipm.run();
  return finish(p, red, r.w, r.status, r.dual, r.iterations, r.message);
}

SdpSolution solve_sdp(const SdpProblem& p, const SolverSettings& settings) {
  return InteriorPointBackend().solve(p, settings);
}

// ---------------------------------------------------------------------------
// SDPA export and file backend

void write_sdpa(std::ostream& out, const ReducedProblem& r) {
  // SDPA primal: minimize sum c_i x_i s.t. sum_i F_i x_i - F_0 >= 0, i.e.
  // F_0 = -C and F_i = A_i.
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "\"encopt reduced problem\"\n";
  out << r.num_vars << " = mDIM\n";
  out << r.constants.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < r.constants.size(); ++b) out << (b ? " " : "") << r.constants[b].rows();
  out << " = bLOCKsTRUCT\n";
  for (Index i = 0; i < r.num_vars; ++i) out << (i ? " " : "") << num(r.objective(i));
  out << "\n";
  for (std::size_t b = 0; b < r.constants.size(); ++b) {
    const RealMatrix& c = r.constants[b];
    for (Index i = 0; i < c.rows(); ++i)
      for (Index j = i; j < c.cols(); ++j)
        if (c(i, j) != 0.0) out << 0 << ' ' << b + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << num(-c(i, j)) << "\n";
  }
  for (Index k = 0; k < r.num_vars; ++k) {
    for (std::size_t b = 0; b < r.constants.size(); ++b) {
      const SparseMatrix& a = r.coefficients[b][static_cast<std::size_t>(k)];
      std::vector<std::tuple<Index, Index, double>> entries;
      for (Index col = 0; col < a.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(a, col); it; ++it)
          if (it.row() <= it.col()) entries.emplace_back(it.row(), it.col(), it.value());
      std::sort(entries.begin(), entries.end());
      for (const auto& [i, j, v] : entries)
        out << k + 1 << ' ' << b + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << num(v) << "\n";
    }
  }
}

SdpaFileBackend::SdpaFileBackend(std::string command, std::string work_dir)
    : command_(std::move(command)), work_dir_(std::move(work_dir)) {}

SdpSolution SdpaFileBackend::solve(const SdpProblem& p, const SolverSettings& /*settings*/) const {
  auto red = reduce_problem(p);
  if (!red) {
    SdpSolution sol;
    sol.status = SdpStatus::infeasible;
    sol.x = RealVector::Zero(p.num_vars);
    sol.message = "infeasible constraint data";
    return sol;
  }
  namespace fs = std::filesystem;
  fs::create_directories(work_dir_);
  const fs::path problem = fs::path(work_dir_) / "problem.dat-s";
  const fs::path solution = fs::path(work_dir_) / "problem.sol";
  {
    std::ofstream f(problem);
    write_sdpa(f, *red);
  }
  fs::remove(solution);
  const std::string cmd = command_ + " '" + problem.string() + "' '" + solution.string() + "' > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(solution);
  std::string line;
  RealVector w = RealVector::Zero(red->num_vars);
  bool parsed = false;
  if (in && std::getline(in, line)) {
    std::istringstream ls(line);
    Index k = 0;
    double v;
    while (ls >> v && k < red->num_vars) w(k++) = v;
    parsed = k == red->num_vars;
  }
  if (!parsed) {
    SdpSolution sol;
    sol.status = SdpStatus::numerical_failure;
    sol.x = red->param.offset;
    sol.message = "external solver failed (exit " + std::to_string(rc) + ")";
    return sol;
  }
  auto sol = finish(p, *red, w, SdpStatus::optimal, std::numeric_limits<double>::quiet_NaN(), 0, "external");
  if (sol.max_violation > 1e-6) sol.status = SdpStatus::numerical_failure;
  return sol;
}

}  // namespace encopt
