#include "encopt/sos_lmi.hpp"

#include <array>
#include <tuple>
#include <cmath>
#include <map>

namespace encopt {

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Position of (a, b), a <= b, in the graded lexicographic monomial list.
Index monomial_index(Index v, Index a, Index b) {
  // rows 0..a-1 contribute v, v-1, ..., v-a+1 entries
  return a * v - a * (a - 1) / 2 + (b - a);
}

}  // namespace

const char* to_string(InputMode mode) {
  switch (mode) {
    case InputMode::real_qubit: return "real_qubit";
    case InputMode::complex_qubit: return "complex_qubit";
    case InputMode::general_r: return "general_r";
  }
  return "?";
}

InputMode parse_input_mode(const std::string& text) {
  if (text == "real_qubit") return InputMode::real_qubit;
  if (text == "complex_qubit") return InputMode::complex_qubit;
  if (text == "general_r") return InputMode::general_r;
  throw Error(ErrorCode::unknown_name, "unknown input mode '" + text + "'");
}

Index num_input_params(Index r, InputMode mode) {
  return mode == InputMode::real_qubit ? r : 2 * r - 1;
}

ComplexVector input_state(Index r, InputMode mode, const RealVector& x) {
  detail::require(x.size() == num_input_params(r, mode), ErrorCode::dimension_mismatch,
                  "parameter vector has the wrong length");
  ComplexVector phi(r);
  if (mode == InputMode::real_qubit) {
    for (Index i = 0; i < r; ++i) phi(i) = x(i);
    return phi;
  }
  for (Index i = 0; i + 1 < r; ++i) phi(i) = Complex(x(2 * i), x(2 * i + 1));
  phi(r - 1) = x(2 * r - 2);
  return phi;
}

RealVector monomials(const RealVector& x) {
  const Index v = x.size();
  RealVector z(v * (v + 1) / 2);
  Index idx = 0;
  for (Index a = 0; a < v; ++a)
    for (Index b = a; b < v; ++b) z(idx++) = a == b ? x(a) * x(a) : kSqrt2 * x(a) * x(b);
  return z;
}

MonomialMap monomial_map(Index r, InputMode mode) {
  if (mode == InputMode::real_qubit || mode == InputMode::complex_qubit)
    detail::require(r == 2, ErrorCode::precondition, std::string(to_string(mode)) + " mode requires r = 2");
  detail::require(r >= 2, ErrorCode::precondition, "general_r mode requires r >= 2");

  MonomialMap out;
  out.r = r;
  out.mode = mode;
  const bool real = mode == InputMode::real_qubit;
  const Index v = num_input_params(r, mode);
  out.num_params = v;

  // phi_i = x[re[i]] + i x[im[i]] (im[i] = -1 when phi_i is real)
  std::vector<Index> re(static_cast<std::size_t>(r)), im(static_cast<std::size_t>(r), -1);
  for (Index i = 0; i < r; ++i) {
    if (real) {
      re[static_cast<std::size_t>(i)] = i;
    } else if (i + 1 < r) {
      re[static_cast<std::size_t>(i)] = 2 * i;
      im[static_cast<std::size_t>(i)] = 2 * i + 1;
    } else {
      re[static_cast<std::size_t>(i)] = 2 * r - 2;
    }
  }

  // Each reduced coordinate as a quadratic form: list of (a, b, coefficient of x_a x_b).
  using Quad = std::vector<std::tuple<Index, Index, double>>;
  std::vector<Quad> coords;
  std::vector<std::vector<std::pair<Index, Complex>>> wcols;  // column of W: (row, value)
  auto prod = [&](Quad& q, Index a, Index b, double c) {
    if (a < 0 || b < 0) return;
    q.emplace_back(std::min(a, b), std::max(a, b), c);
  };
  for (Index i = 0; i < r; ++i) {
    for (Index j = i; j < r; ++j) {
      const Index ri = re[static_cast<std::size_t>(i)], ii = im[static_cast<std::size_t>(i)];
      const Index rj = re[static_cast<std::size_t>(j)], ij = im[static_cast<std::size_t>(j)];
      if (i == j) {
        Quad q;
        prod(q, ri, ri, 1.0);
        prod(q, ii, ii, 1.0);
        coords.push_back(q);
        wcols.push_back({{i * r + i, Complex(1.0)}});
        continue;
      }
      // phi_i phi_j^* = (ri + i ii)(rj - i ij): Re = ri rj + ii ij, Im = ii rj - ri ij
      Quad qre;
      prod(qre, ri, rj, kSqrt2);
      prod(qre, ii, ij, kSqrt2);
      coords.push_back(qre);
      wcols.push_back({{i * r + j, Complex(1 / kSqrt2)}, {j * r + i, Complex(1 / kSqrt2)}});
      if (!real) {
        Quad qim;
        prod(qim, ii, rj, kSqrt2);
        prod(qim, ri, ij, -kSqrt2);
        coords.push_back(qim);
        wcols.push_back({{i * r + j, Complex(0, 1 / kSqrt2)}, {j * r + i, Complex(0, -1 / kSqrt2)}});
      }
    }
  }

  const Index dy = static_cast<Index>(coords.size());
  out.W = ComplexMatrix::Zero(r * r, dy);
  for (Index c = 0; c < dy; ++c)
    for (const auto& [row, val] : wcols[static_cast<std::size_t>(c)]) out.W(row, c) += val;
  out.M = RealMatrix::Zero(dy, v * (v + 1) / 2);
  for (Index c = 0; c < dy; ++c)
    for (const auto& [a, b, coef] : coords[static_cast<std::size_t>(c)])
      out.M(c, monomial_index(v, a, b)) += a == b ? coef : coef / kSqrt2;
  return out;
}

std::vector<RealMatrix> gram_kernel_basis(Index v) {
  detail::require(v >= 2, ErrorCode::precondition, "Gram kernel needs at least two variables");
  const Index d = v * (v + 1) / 2;
  struct Mono {
    Index a, b;
    double scale;
  };
  std::vector<Mono> z;
  for (Index a = 0; a < v; ++a)
    for (Index b = a; b < v; ++b) z.push_back({a, b, a == b ? 1.0 : kSqrt2});

  // Gram entries (p, q), p <= q, grouped by the quartic monomial z_p z_q.
  struct Member {
    Index p, q;
    double weight;  // coefficient of Q(p,q) in that monomial's coefficient
  };
  std::map<std::array<Index, 4>, std::vector<Member>> groups;
  for (Index p = 0; p < d; ++p)
    for (Index q = p; q < d; ++q) {
      std::array<Index, 4> key{z[static_cast<std::size_t>(p)].a, z[static_cast<std::size_t>(p)].b,
                               z[static_cast<std::size_t>(q)].a, z[static_cast<std::size_t>(q)].b};
      std::sort(key.begin(), key.end());
      const double w = (p == q ? 1.0 : 2.0) * z[static_cast<std::size_t>(p)].scale * z[static_cast<std::size_t>(q)].scale;
      groups[key].push_back({p, q, w});
    }

  std::vector<RealMatrix> basis;
  for (const auto& [key, members] : groups) {
    const Member& base = members.front();
    for (std::size_t j = 1; j < members.size(); ++j) {
      const Member& m = members[j];
      RealMatrix k = RealMatrix::Zero(d, d);
      k(m.p, m.q) += 1.0 / m.weight;
      if (m.p != m.q) k(m.q, m.p) += 1.0 / m.weight;
      k(base.p, base.q) -= 1.0 / base.weight;
      if (base.p != base.q) k(base.q, base.p) -= 1.0 / base.weight;
      k /= k.cwiseAbs().maxCoeff();
      for (Index i = 0; i < k.size(); ++i) {
        const double val = k.data()[i];
        if (val == 0.0) continue;
        // symmetric, so storage order is row-major order
        if (val < 0) k = -k;
        break;
      }
      basis.push_back(std::move(k));
    }
  }
  return basis;
}

RealMatrix build_P(const SuperopMatrix& a) {
  const ComplexMatrix g = a.matrix().adjoint() * a.matrix();
  return hermitian_real_embed(ComplexMatrix((g + g.adjoint()) / 2.0));
}

double choose_k(const RealMatrix& p) {
  const RealVector ev = hermitian_eigenvalues(p);
  const double lmax = ev.size() ? ev(0) : 0.0;
  if (lmax <= 1e-14) return 1.0;
  return std::max(2.0, 1.05 * lmax);
}

SosContext SosContext::create(const KrausChannel& channel, Index r, InputMode mode, std::optional<double> k) {
  detail::require(channel.dim_in() == channel.dim_out(), ErrorCode::dimension_mismatch,
                  "error channel must map a space to itself");
  SosContext ctx;
  ctx.r = r;
  ctx.n = channel.dim_in();
  detail::require(r <= ctx.n, ErrorCode::precondition, "code space is larger than the ambient space");
  ctx.mode = mode;
  ctx.map = monomial_map(r, mode);
  ctx.P = build_P(kraus_to_superop(channel));
  ctx.k = k ? *k : choose_k(ctx.P);
  detail::require(ctx.k > 0, ErrorCode::precondition, "k must be positive");
  const RealVector ev = hermitian_eigenvalues(ctx.P);
  detail::require(ctx.k - ev(0) >= 1e-6 * ctx.k, ErrorCode::precondition,
                  "k I - P is not positive definite (lambda_max(P) = " + std::to_string(ev(0)) + ")");
  ctx.kernel = gram_kernel_basis(ctx.map.num_params);
  return ctx;
}

// ---------------------------------------------------------------------------
// DecisionLayout

DecisionLayout::DecisionLayout(Index n, Index r, Index num_tau) : n_(n), r_(r), num_tau_(num_tau) {
  detail::require(n >= 1 && r >= 1 && num_tau >= 0, ErrorCode::invalid_dimension, "bad layout dimensions");
  const Index d = choi_dim();
  index_.assign(static_cast<std::size_t>(d * d), -1);
  Index next = 0;
  for (Index a = 0; a < d; ++a)
    for (Index b = a; b < d; ++b) {
      index_[static_cast<std::size_t>(a * d + b)] = next;
      next += a == b ? 1 : 2;
    }
}

std::vector<std::pair<Index, Complex>> DecisionLayout::choi_entry(Index a, Index b) const {
  const Index d = choi_dim();
  if (a == b) return {{index_[static_cast<std::size_t>(a * d + a)], Complex(1.0)}};
  if (a < b) {
    const Index v = index_[static_cast<std::size_t>(a * d + b)];
    return {{v, Complex(1.0)}, {v + 1, Complex(0, 1.0)}};
  }
  const Index v = index_[static_cast<std::size_t>(b * d + a)];
  return {{v, Complex(1.0)}, {v + 1, Complex(0, -1.0)}};
}

std::vector<std::pair<Index, Complex>> DecisionLayout::superop_entry(Index row, Index col) const {
  const Index i = row / n_, j = row % n_, k = col / r_, l = col % r_;
  return choi_entry(i * r_ + k, j * r_ + l);
}

ComplexMatrix DecisionLayout::choi(const RealVector& x) const {
  const Index d = choi_dim();
  ComplexMatrix c(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) {
      Complex s(0);
      for (const auto& [var, coef] : choi_entry(a, b)) s += coef * x(var);
      c(a, b) = s;
    }
  return c;
}

SuperopMatrix DecisionLayout::superop(const RealVector& x) const {
  return rearrange_inv(ChoiMatrix(choi(x), r_, n_));
}

void DecisionLayout::set_choi(RealVector& x, const ComplexMatrix& c) const {
  const Index d = choi_dim();
  detail::require(c.rows() == d && c.cols() == d, ErrorCode::dimension_mismatch, "Choi matrix has the wrong size");
  for (Index a = 0; a < d; ++a)
    for (Index b = a; b < d; ++b) {
      const Index v = index_[static_cast<std::size_t>(a * d + b)];
      if (a == b) {
        x(v) = c(a, a).real();
      } else {
        const Complex h = (c(a, b) + std::conj(c(b, a))) / 2.0;
        x(v) = h.real();
        x(v + 1) = h.imag();
      }
    }
}

RealVector DecisionLayout::trace_functional(const ComplexMatrix& g) const {
  const Index d = choi_dim();
  detail::require(g.rows() == d && g.cols() == d, ErrorCode::dimension_mismatch, "weight matrix has the wrong size");
  RealVector out = RealVector::Zero(num_vars());
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b)
      for (const auto& [var, coef] : choi_entry(a, b)) out(var) += (g(b, a) * coef).real();
  return out;
}

DecisionLayout make_layout(const SosContext& ctx) {
  return DecisionLayout(ctx.n, ctx.r, static_cast<Index>(ctx.kernel.size()));
}

// ---------------------------------------------------------------------------
// LMI emission

namespace {

// Adds [Re(E W R); Im(E W R)] at (row_offset, col_offset) in the upper
// triangle of the LMI, E being the layout's superoperator.
void add_encoder_product(LinearMatrixExpr& expr, const DecisionLayout& layout, const ComplexMatrix& w,
                         const RealMatrix& r, Index row_offset, Index col_offset) {
  const Index n2 = layout.n() * layout.n();
  const Index r2 = layout.r() * layout.r();
  const ComplexMatrix wr = w * r;  // r^2 x q
  const Index q = wr.cols();
  for (Index rho = 0; rho < n2; ++rho) {
    std::map<Index, ComplexVector> acc;
    for (Index col = 0; col < r2; ++col) {
      if (wr.row(col).cwiseAbs().maxCoeff() == 0.0) continue;
      for (const auto& [var, coef] : layout.superop_entry(rho, col)) {
        auto it = acc.find(var);
        if (it == acc.end()) it = acc.emplace(var, ComplexVector::Zero(q)).first;
        it->second += coef * wr.row(col).transpose();
      }
    }
    for (const auto& [var, vals] : acc)
      for (Index j = 0; j < q; ++j) {
        const double re = vals(j).real(), im = vals(j).imag();
        if (std::abs(re) > 1e-15) expr.add_entry(var, row_offset + rho, col_offset + j, re);
        if (std::abs(im) > 1e-15) expr.add_entry(var, row_offset + n2 + rho, col_offset + j, im);
      }
  }
}

void set_constant_block(LinearMatrixExpr& expr, Index offset, const RealMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i; j < m.cols(); ++j)
      if (m(i, j) != 0.0) expr.add_constant(offset + i, offset + j, m(i, j));
}

void add_variable_block(LinearMatrixExpr& expr, Index var, Index offset, const RealMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i; j < m.cols(); ++j)
      if (m(i, j) != 0.0) expr.add_entry(var, offset + i, offset + j, m(i, j));
}

RealMatrix spd_inverse(const RealMatrix& m) {
  Eigen::LLT<RealMatrix> llt(m);
  detail::require(llt.info() == Eigen::Success, ErrorCode::precondition, "Schur block is not positive definite");
  RealMatrix inv = llt.solve(RealMatrix::Identity(m.rows(), m.cols()));
  return (inv + inv.transpose()) / 2;
}

}  // namespace

RealMatrix real_qubit_kernel() {
  RealMatrix s = RealMatrix::Zero(3, 3);
  s(0, 2) = s(2, 0) = 1;
  s(1, 1) = -1;
  return s;
}

std::vector<RealMatrix> real_qubit_cross_selectors() {
  std::vector<RealMatrix> s(4, RealMatrix::Zero(3, 3));
  s[0](0, 1) = 1 / kSqrt2;
  s[1](2, 1) = 1 / kSqrt2;
  s[2](0, 0) = 1;
  s[3](2, 2) = 1;
  return s;
}

std::vector<Index> lmi_block_sizes(const SosContext& ctx, LmiForm form) {
  const Index n2 = ctx.n * ctx.n;
  const Index dz = ctx.map.M.cols();
  if (form == LmiForm::cross_terms) return {2 * n2, 4 * n2, 4 * n2, dz};
  return {2 * n2, dz};
}

LinearMatrixExpr build_purity_lmi(const SosContext& ctx, const DecisionLayout& layout, LmiForm form) {
  detail::require(layout.n() == ctx.n && layout.r() == ctx.r &&
                      layout.num_tau() == static_cast<Index>(ctx.kernel.size()),
                  ErrorCode::dimension_mismatch, "layout does not match the context");
  const Index n2 = ctx.n * ctx.n;
  const Index m2 = 2 * n2;
  const RealMatrix kp = ctx.k * RealMatrix::Identity(m2, m2) - ctx.P;
  const RealMatrix& M = ctx.map.M;
  const Index dz = M.cols();

  if (form == LmiForm::compact) {
    LinearMatrixExpr expr(m2 + dz);
    set_constant_block(expr, 0, spd_inverse(kp));
    add_encoder_product(expr, layout, ctx.map.W, M, 0, m2);
    const RealMatrix mtm = M.transpose() * M;
    set_constant_block(expr, m2, (ctx.k - 1) * mtm);
    add_variable_block(expr, layout.epsilon(), m2, mtm);
    for (Index i = 0; i < layout.num_tau(); ++i)
      add_variable_block(expr, layout.tau(i), m2, ctx.kernel[static_cast<std::size_t>(i)]);
    return expr;
  }

  detail::require(ctx.mode == InputMode::real_qubit, ErrorCode::precondition,
                  "the cross-term LMI form exists only for real qubit inputs");
  const RealMatrix kI = ctx.k * RealMatrix::Identity(m2, m2);
  RealMatrix minus(2 * m2, 2 * m2), plus(2 * m2, 2 * m2);
  minus << kI, -ctx.P, -ctx.P, kI;
  plus << kI, ctx.P, ctx.P, kI;
  const Index o1 = m2, o2 = 3 * m2, oc = 5 * m2;
  LinearMatrixExpr expr(oc + dz);
  set_constant_block(expr, 0, spd_inverse(kp));
  set_constant_block(expr, o1, spd_inverse(minus));
  set_constant_block(expr, o2, spd_inverse(plus));
  const auto sel = real_qubit_cross_selectors();
  add_encoder_product(expr, layout, ctx.map.W, M, 0, oc);
  add_encoder_product(expr, layout, ctx.map.W, sel[0], o1, oc);
  add_encoder_product(expr, layout, ctx.map.W, sel[1], o1 + m2, oc);
  add_encoder_product(expr, layout, ctx.map.W, sel[2], o2, oc);
  add_encoder_product(expr, layout, ctx.map.W, sel[3], o2 + m2, oc);
  set_constant_block(expr, oc, (2 * ctx.k - 1) * RealMatrix::Identity(dz, dz));
  add_variable_block(expr, layout.epsilon(), oc, RealMatrix::Identity(dz, dz));
  for (Index i = 0; i < layout.num_tau(); ++i)
    add_variable_block(expr, layout.tau(i), oc, ctx.kernel[static_cast<std::size_t>(i)]);
  return expr;
}

SdpProblem assemble_problem(const SosContext& ctx, const DecisionLayout& layout, const RealVector& objective,
                            LmiForm form) {
  detail::require(objective.size() == layout.num_vars(), ErrorCode::dimension_mismatch,
                  "objective does not match the layout");
  SdpProblem p(layout.num_vars());
  p.objective = objective;
  p.psd_constraints.push_back(build_purity_lmi(ctx, layout, form));

  const Index d = layout.choi_dim();
  LinearMatrixExpr choi(2 * d);
  for (Index a = 0; a < d; ++a)
    for (Index b = a; b < d; ++b)
      for (const auto& [var, coef] : layout.choi_entry(a, b)) {
        if (coef.real() != 0.0) {
          choi.add_entry(var, a, b, coef.real());
          choi.add_entry(var, d + a, d + b, coef.real());
        }
        if (coef.imag() != 0.0) {
          choi.add_entry(var, a, d + b, -coef.imag());
          choi.add_entry(var, d + a, b, coef.imag());
        }
      }
  p.psd_constraints.push_back(std::move(choi));

  // Tr_out Phi(E) = I_r, real and imaginary parts.
  const Index r = layout.r();
  for (Index k = 0; k < r; ++k)
    for (Index l = 0; l < r; ++l) {
      LinearEquality re, im;
      for (Index i = 0; i < layout.n(); ++i)
        for (const auto& [var, coef] : layout.choi_entry(i * r + k, i * r + l)) {
          if (coef.real() != 0.0) re.terms.emplace_back(var, coef.real());
          if (coef.imag() != 0.0) im.terms.emplace_back(var, coef.imag());
        }
      re.rhs = k == l ? 1.0 : 0.0;
      im.rhs = 0.0;
      p.equalities.push_back(std::move(re));
      p.equalities.push_back(std::move(im));
    }
  p.set_bounds(layout.epsilon(), 0.0, 1.0);
  return p;
}

void freeze_encoder(SdpProblem& problem, const DecisionLayout& layout, const SuperopMatrix& superop) {
  RealVector x = RealVector::Zero(layout.num_vars());
  layout.set_choi(x, rearrange(superop).matrix());
  for (Index v = 0; v < layout.num_choi_vars(); ++v) problem.equalities.push_back({{{v, 1.0}}, x(v)});
}

}  // namespace encopt
