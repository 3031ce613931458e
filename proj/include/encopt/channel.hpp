#pragma once

// Dense channel algebra: vectorization, superoperator and Choi
// representations, the rearrangement map between them, purity functionals
// and the pure-state-preservation tests.
//
// Index packing is row-major everywhere: the pair (a, b) with b ranging over
// a factor of dimension d2 maps to a * d2 + b. A vectorized operator X has
// components |X>>_(i,k) = X(i,k), which is (X (x) I)|I>> with
// |I>> = sum_i |i> (x) |i>*.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "encopt/error.hpp"

namespace encopt {

using Index = Eigen::Index;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;
using RealMatrix = RMatrix<double>;
using RealVector = RVector<double>;
using Complex = std::complex<double>;

namespace detail {

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar hermitian_residual(const Eigen::MatrixBase<Derived>& m) {
  return max_abs(m - m.adjoint());
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail

/// Eigenvalues of a Hermitian matrix in descending order. Only the lower
/// triangle is read.
template <typename Derived>
RVector<typename Derived::RealScalar> hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& h) {
  using Real = typename Derived::RealScalar;
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(h), Eigen::EigenvaluesOnly);
  RVector<Real> ev = es.eigenvalues().reverse();
  return ev;
}

/// PSD test with the scale-aware threshold  lambda_min >= -tol * (1 + ||h||).
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& h, typename Derived::RealScalar tol = 1e-10) {
  if (h.size() == 0) return true;
  auto ev = hermitian_eigenvalues(h);
  auto scale = ev.cwiseAbs().maxCoeff();
  return ev(ev.size() - 1) >= -tol * (1 + scale);
}

// ---------------------------------------------------------------------------
// Value types

template <typename Real>
class PureStateT {
 public:
  explicit PureStateT(CVector<Real> amplitudes) : amplitudes_(std::move(amplitudes)) {
    detail::require(amplitudes_.size() >= 1, ErrorCode::invalid_dimension, "empty state");
    detail::require(std::abs(amplitudes_.norm() - Real(1)) <= Real(1e-12), ErrorCode::precondition,
                    "pure state must have unit norm");
  }

  static PureStateT normalized(const CVector<Real>& v) {
    detail::require(v.norm() > 0, ErrorCode::degenerate_input, "cannot normalize zero vector");
    return PureStateT(v / v.norm());
  }

  Index dim() const { return amplitudes_.size(); }
  const CVector<Real>& amplitudes() const { return amplitudes_; }

 private:
  CVector<Real> amplitudes_;
};

template <typename Real>
class DensityMatrixT {
 public:
  explicit DensityMatrixT(CMatrix<Real> m) : matrix_(std::move(m)) {
    detail::require(matrix_.rows() == matrix_.cols() && matrix_.rows() >= 1,
                    ErrorCode::invalid_dimension, "density matrix must be square and non-empty");
    detail::require(detail::hermitian_residual(matrix_) <= Real(1e-12), ErrorCode::not_hermitian,
                    "density matrix is not Hermitian");
    detail::require(std::abs(matrix_.trace() - std::complex<Real>(1)) <= Real(1e-12),
                    ErrorCode::precondition, "density matrix must have unit trace");
    auto ev = hermitian_eigenvalues(matrix_);
    detail::require(ev(ev.size() - 1) >= Real(-1e-10), ErrorCode::precondition,
                    "density matrix has a negative eigenvalue");
  }

  static DensityMatrixT pure(const PureStateT<Real>& s) {
    CMatrix<Real> m = s.amplitudes() * s.amplitudes().adjoint();
    return DensityMatrixT(m);
  }

  static DensityMatrixT maximally_mixed(Index dim) {
    detail::require(dim >= 1, ErrorCode::invalid_dimension, "dimension must be positive");
    return DensityMatrixT(CMatrix<Real>::Identity(dim, dim) / Real(dim));
  }

  Index dim() const { return matrix_.rows(); }
  const CMatrix<Real>& matrix() const { return matrix_; }

 private:
  CMatrix<Real> matrix_;
};

/// Channel C^n -> C^m given by Kraus operators (each m x n) satisfying
/// sum_i A_i^dag A_i = I_n.
template <typename Real>
class KrausChannelT {
 public:
  KrausChannelT(std::vector<CMatrix<Real>> kraus, Real tp_tol = Real(1e-10)) : kraus_(std::move(kraus)) {
    detail::require(!kraus_.empty(), ErrorCode::invalid_dimension, "channel needs at least one Kraus operator");
    dim_out_ = kraus_.front().rows();
    dim_in_ = kraus_.front().cols();
    detail::require(dim_in_ >= 1 && dim_out_ >= 1, ErrorCode::invalid_dimension, "empty Kraus operator");
    for (const auto& a : kraus_) {
      detail::require(a.rows() == dim_out_ && a.cols() == dim_in_, ErrorCode::dimension_mismatch,
                      "Kraus operators must share one shape");
    }
    const Real residual = trace_preservation_residual();
    detail::require(residual <= tp_tol, ErrorCode::not_trace_preserving,
                    "sum A^dag A deviates from identity by " + std::to_string(residual));
  }

  static KrausChannelT identity(Index dim) {
    return KrausChannelT({CMatrix<Real>::Identity(dim, dim)});
  }

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const std::vector<CMatrix<Real>>& kraus() const { return kraus_; }

  Real trace_preservation_residual() const {
    CMatrix<Real> s = CMatrix<Real>::Zero(dim_in_, dim_in_);
    for (const auto& a : kraus_) s.noalias() += a.adjoint() * a;
    return detail::max_abs(s - CMatrix<Real>::Identity(dim_in_, dim_in_));
  }

 private:
  std::vector<CMatrix<Real>> kraus_;
  Index dim_in_ = 0;
  Index dim_out_ = 0;
};

/// X2 = sum_i A_i (x) A_i^*, an m^2 x n^2 matrix acting on vectorized states.
/// Construction checks shapes only; see channel_residual() for membership.
template <typename Real>
class SuperopMatrixT {
 public:
  SuperopMatrixT(CMatrix<Real> m, Index dim_in, Index dim_out)
      : matrix_(std::move(m)), dim_in_(dim_in), dim_out_(dim_out) {
    detail::require(dim_in >= 1 && dim_out >= 1, ErrorCode::invalid_dimension, "dimensions must be positive");
    detail::require(matrix_.rows() == dim_out * dim_out && matrix_.cols() == dim_in * dim_in,
                    ErrorCode::dimension_mismatch, "superoperator must be m^2 x n^2");
  }

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const CMatrix<Real>& matrix() const { return matrix_; }

 private:
  CMatrix<Real> matrix_;
  Index dim_in_;
  Index dim_out_;
};

/// X1 = Phi(X2), an mn x mn matrix on K (x) H (output index first).
template <typename Real>
class ChoiMatrixT {
 public:
  ChoiMatrixT(CMatrix<Real> m, Index dim_in, Index dim_out)
      : matrix_(std::move(m)), dim_in_(dim_in), dim_out_(dim_out) {
    detail::require(dim_in >= 1 && dim_out >= 1, ErrorCode::invalid_dimension, "dimensions must be positive");
    detail::require(matrix_.rows() == dim_out * dim_in && matrix_.cols() == dim_out * dim_in,
                    ErrorCode::dimension_mismatch, "Choi matrix must be mn x mn");
  }

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const CMatrix<Real>& matrix() const { return matrix_; }

  /// Tr_K X1, the n x n block sum over the output index.
  CMatrix<Real> partial_trace_output() const {
    CMatrix<Real> out = CMatrix<Real>::Zero(dim_in_, dim_in_);
    for (Index i = 0; i < dim_out_; ++i) out += matrix_.block(i * dim_in_, i * dim_in_, dim_in_, dim_in_);
    return out;
  }

 private:
  CMatrix<Real> matrix_;
  Index dim_in_;
  Index dim_out_;
};

template <typename Real>
struct VectorizedStateT {
  CVector<Real> vector;
  Index dim = 0;
};

using PureState = PureStateT<double>;
using DensityMatrix = DensityMatrixT<double>;
using KrausChannel = KrausChannelT<double>;
using SuperopMatrix = SuperopMatrixT<double>;
using ChoiMatrix = ChoiMatrixT<double>;
using VectorizedState = VectorizedStateT<double>;

// ---------------------------------------------------------------------------
// Vectorization

template <typename Real = double>
VectorizedStateT<Real> identity_vector(Index dim) {
  detail::require(dim >= 1, ErrorCode::invalid_dimension, "identity vector needs dim >= 1");
  VectorizedStateT<Real> v{CVector<Real>::Zero(dim * dim), dim};
  for (Index i = 0; i < dim; ++i) v.vector(i * dim + i) = 1;
  return v;
}

/// sum_i |b_i> (x) |b_i>^* for the orthonormal basis given by the columns of
/// `basis`; equals identity_vector for every unitary basis.
template <typename Derived>
CVector<typename Derived::RealScalar> identity_vector_in_basis(const Eigen::MatrixBase<Derived>& basis) {
  using Real = typename Derived::RealScalar;
  const Index d = basis.rows();
  CVector<Real> out = CVector<Real>::Zero(d * d);
  for (Index c = 0; c < basis.cols(); ++c)
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b) out(a * d + b) += basis(a, c) * std::conj(basis(b, c));
  return out;
}

/// Row-major vec of an arbitrary square operator, i.e. (X (x) I)|I>>.
template <typename Derived>
CVector<typename Derived::RealScalar> vectorize_operator(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::RealScalar;
  const Index rows = x.rows(), cols = x.cols();
  CVector<Real> v(rows * cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) v(i * cols + k) = x(i, k);
  return v;
}

template <typename Real>
VectorizedStateT<Real> vectorize_state(const DensityMatrixT<Real>& rho) {
  return {vectorize_operator(rho.matrix()), rho.dim()};
}

template <typename Real>
CMatrix<Real> devectorize(const CVector<Real>& v, Index rows, Index cols) {
  detail::require(v.size() == rows * cols, ErrorCode::dimension_mismatch, "vector length does not match shape");
  CMatrix<Real> x(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) x(i, k) = v(i * cols + k);
  return x;
}

template <typename Real>
CMatrix<Real> devectorize(const VectorizedStateT<Real>& v) {
  return devectorize(v.vector, v.dim, v.dim);
}

/// Tr(rho^2). Debug builds also compare against <<rho|rho>>.
template <typename Real>
Real purity(const DensityMatrixT<Real>& rho) {
  const auto& m = rho.matrix();
  // Tr(rho^2) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho
  const Real p = (m.cwiseProduct(m.transpose())).sum().real();
#ifndef NDEBUG
  const Real via_vector = vectorize_state(rho).vector.squaredNorm();
  detail::require(std::abs(p - via_vector) <= Real(1e-12), ErrorCode::inconsistency,
                  "purity paths disagree");
#endif
  return p;
}

// ---------------------------------------------------------------------------
// Channel evaluation and representations

template <typename Real>
DensityMatrixT<Real> apply_channel(const KrausChannelT<Real>& ch, const DensityMatrixT<Real>& rho) {
  detail::require(rho.dim() == ch.dim_in(), ErrorCode::dimension_mismatch,
                  "state dimension does not match channel input");
  CMatrix<Real> out = CMatrix<Real>::Zero(ch.dim_out(), ch.dim_out());
  for (const auto& a : ch.kraus()) out.noalias() += a * rho.matrix() * a.adjoint();
  CMatrix<Real> herm = (out + out.adjoint()) / Real(2);
  return DensityMatrixT<Real>(herm);
}

template <typename Real>
SuperopMatrixT<Real> kraus_to_superop(const KrausChannelT<Real>& ch) {
  const Index m = ch.dim_out(), n = ch.dim_in();
  CMatrix<Real> x = CMatrix<Real>::Zero(m * m, n * n);
  for (const auto& a : ch.kraus()) {
    const CMatrix<Real> ac = a.conjugate();
    for (Index i = 0; i < m; ++i)
      for (Index k = 0; k < n; ++k) x.block(i * m, k * n, m, n) += a(i, k) * ac;
  }
  return SuperopMatrixT<Real>(std::move(x), n, m);
}

/// Superoperator of a single operator E: E (x) E^*.
template <typename Derived>
SuperopMatrixT<typename Derived::RealScalar> superop_of_operator(const Eigen::MatrixBase<Derived>& e) {
  using Real = typename Derived::RealScalar;
  const Index m = e.rows(), n = e.cols();
  CMatrix<Real> ec = e.conjugate();
  CMatrix<Real> x(m * m, n * n);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < n; ++k) x.block(i * m, k * n, m, n) = e(i, k) * ec;
  return SuperopMatrixT<Real>(std::move(x), n, m);
}

/// The index permutation Phi(X)[(i,k),(j,l)] = X[(i,j),(k,l)] on a raw
/// m^2 x n^2 matrix; i, j are output indices and k, l input indices.
template <typename Derived>
CMatrix<typename Derived::RealScalar> rearrange_matrix(const Eigen::MatrixBase<Derived>& x, Index dim_in,
                                                       Index dim_out) {
  using Real = typename Derived::RealScalar;
  const Index m = dim_out, n = dim_in;
  detail::require(x.rows() == m * m && x.cols() == n * n, ErrorCode::dimension_mismatch,
                  "rearrangement expects an m^2 x n^2 matrix");
  CMatrix<Real> out(m * n, m * n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) out(i * n + k, j * n + l) = x(i * m + j, k * n + l);
  return out;
}

template <typename Derived>
CMatrix<typename Derived::RealScalar> rearrange_inv_matrix(const Eigen::MatrixBase<Derived>& x1, Index dim_in,
                                                           Index dim_out) {
  using Real = typename Derived::RealScalar;
  const Index m = dim_out, n = dim_in;
  detail::require(x1.rows() == m * n && x1.cols() == m * n, ErrorCode::dimension_mismatch,
                  "inverse rearrangement expects an mn x mn matrix");
  CMatrix<Real> out(m * m, n * n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) out(i * m + j, k * n + l) = x1(i * n + k, j * n + l);
  return out;
}

template <typename Real>
ChoiMatrixT<Real> rearrange(const SuperopMatrixT<Real>& x2) {
  return ChoiMatrixT<Real>(rearrange_matrix(x2.matrix(), x2.dim_in(), x2.dim_out()), x2.dim_in(),
                           x2.dim_out());
}

template <typename Real>
SuperopMatrixT<Real> rearrange_inv(const ChoiMatrixT<Real>& x1) {
  return SuperopMatrixT<Real>(rearrange_inv_matrix(x1.matrix(), x1.dim_in(), x1.dim_out()), x1.dim_in(),
                              x1.dim_out());
}

/// Output state from the superoperator acting on |rho>>.
template <typename Real>
CMatrix<Real> apply_superop(const SuperopMatrixT<Real>& x2, const DensityMatrixT<Real>& rho) {
  detail::require(rho.dim() == x2.dim_in(), ErrorCode::dimension_mismatch, "state/superop mismatch");
  CVector<Real> out = x2.matrix() * vectorize_state(rho).vector;
  return devectorize(out, x2.dim_out(), x2.dim_out());
}

/// Output state from the Choi form: rho' = Tr_H[(I (x) rho^T) X1].
template <typename Real>
CMatrix<Real> apply_choi(const ChoiMatrixT<Real>& x1, const DensityMatrixT<Real>& rho) {
  const Index m = x1.dim_out(), n = x1.dim_in();
  detail::require(rho.dim() == n, ErrorCode::dimension_mismatch, "state/Choi mismatch");
  CMatrix<Real> out = CMatrix<Real>::Zero(m, m);
  const auto& x = x1.matrix();
  const auto& r = rho.matrix();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index kp = 0; kp < n; ++kp) out(i, j) += r(kp, k) * x(i * n + kp, j * n + k);
  return out;
}

/// Cascade: first `first`, then `second`.
template <typename Real>
SuperopMatrixT<Real> compose(const SuperopMatrixT<Real>& second, const SuperopMatrixT<Real>& first) {
  detail::require(second.dim_in() == first.dim_out(), ErrorCode::dimension_mismatch,
                  "cascade dimensions do not chain");
  return SuperopMatrixT<Real>(second.matrix() * first.matrix(), first.dim_in(), second.dim_out());
}

/// Max deviation of <<I_K| X from <<I_H| (the trace-preservation row test).
template <typename Real>
Real trace_condition_residual(const SuperopMatrixT<Real>& x2) {
  const auto ik = identity_vector<Real>(x2.dim_out()).vector;
  const auto ih = identity_vector<Real>(x2.dim_in()).vector;
  CVector<Real> row = x2.matrix().transpose() * ik;  // <<I| has real entries
  return detail::max_abs(row - ih);
}

/// Membership in the channel set: TP row condition and Phi(X) >= 0.
template <typename Real>
bool is_channel(const SuperopMatrixT<Real>& x2, Real tol = Real(1e-10)) {
  if (trace_condition_residual(x2) > tol) return false;
  const auto choi = rearrange_matrix(x2.matrix(), x2.dim_in(), x2.dim_out());
  if (detail::hermitian_residual(choi) > tol) return false;
  return is_psd(choi, tol);
}

// ---------------------------------------------------------------------------
// Rank and pure-state preservation

template <typename Real>
struct RankEstimateT {
  Index rank = 0;
  RVector<Real> eigenvalues;  // descending
};
using RankEstimate = RankEstimateT<double>;

/// rank = #{ lambda_i > ratio_tol * lambda_max }.
template <typename Derived>
RankEstimateT<typename Derived::RealScalar> detect_rank(const Eigen::MatrixBase<Derived>& h,
                                                        typename Derived::RealScalar ratio_tol) {
  using Real = typename Derived::RealScalar;
  RankEstimateT<Real> out;
  out.eigenvalues = hermitian_eigenvalues(h);
  const Real lmax = out.eigenvalues.size() ? out.eigenvalues(0) : Real(0);
  detail::require(lmax > 0, ErrorCode::degenerate_input, "largest eigenvalue is not positive");
  out.rank = (out.eigenvalues.array() > ratio_tol * lmax).count();
  return out;
}

template <typename Real>
RankEstimateT<Real> detect_rank(const ChoiMatrixT<Real>& choi, Real ratio_tol) {
  return detect_rank(choi.matrix(), ratio_tol);
}

template <typename Real>
struct PurePreservationT {
  bool pure_preserving = false;
  Real unitarity_residual = 0;  // max |X^dag X - I|
  RankEstimateT<Real> choi_rank;
};
using PurePreservation = PurePreservationT<double>;

/// Evaluates X^dag X = I and rank Phi(X) = 1 independently; the two must
/// agree, otherwise the tolerances are inconsistent and an error is thrown.
template <typename Real>
PurePreservationT<Real> is_pure_preserving(const SuperopMatrixT<Real>& x2, Real tol,
                                           Real rank_ratio_tol = Real(1e-3)) {
  PurePreservationT<Real> out;
  const Index n2 = x2.matrix().cols();
  out.unitarity_residual =
      detail::max_abs(x2.matrix().adjoint() * x2.matrix() - CMatrix<Real>::Identity(n2, n2));
  out.choi_rank = detect_rank(rearrange(x2), rank_ratio_tol);
  const bool isometric = out.unitarity_residual <= tol;
  const bool rank_one = out.choi_rank.rank == 1;
  if (isometric != rank_one) {
    throw Error(ErrorCode::inconsistency,
                "X^dag X = I test says " + std::string(isometric ? "yes" : "no") + " (residual " +
                    std::to_string(out.unitarity_residual) + ") but Choi rank is " +
                    std::to_string(out.choi_rank.rank));
  }
  out.pure_preserving = isometric;
  return out;
}

/// Recovers X (m x n) from a rank-one Choi matrix |x>><<x|. The leading
/// eigenvalue must equal n; the global phase makes the largest-magnitude
/// entry real positive (first such entry in row-major order on ties).
template <typename Real>
CMatrix<Real> extract_kraus_rank_one(const ChoiMatrixT<Real>& x1, Real rank_ratio_tol = Real(1e-3)) {
  const Index m = x1.dim_out(), n = x1.dim_in();
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(x1.matrix());
  const RVector<Real> ev = es.eigenvalues().reverse();
  const Real lmax = ev(0);
  detail::require(lmax > 0, ErrorCode::degenerate_input, "Choi matrix has no positive eigenvalue");
  const Index rank = (ev.array() > rank_ratio_tol * lmax).count();
  detail::require(rank == 1, ErrorCode::not_rank_one, "Choi matrix has rank " + std::to_string(rank));
  detail::require(std::abs(lmax - Real(n)) <= Real(1e-6) * Real(n), ErrorCode::malformed_choi,
                  "leading eigenvalue " + std::to_string(lmax) + " differs from " + std::to_string(n));
  CVector<Real> v = es.eigenvectors().col(x1.matrix().rows() - 1) * std::sqrt(lmax);
  CMatrix<Real> x = devectorize(v, m, n);

  Index best = 0;
  Real best_abs = -1;
  const Real tie = Real(1e-12) * std::sqrt(lmax);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < n; ++k) {
      const Real a = std::abs(x(i, k));
      if (a > best_abs + tie) {
        best_abs = a;
        best = i * n + k;
      }
    }
  const std::complex<Real> pivot = x(best / n, best % n);
  x *= std::conj(pivot) / std::abs(pivot);
  return x;
}

// ---------------------------------------------------------------------------
// Purity operator and real embedding

/// Omega = sum_ij (A_j^dag A_i) (x) (A_i^dag A_j); <phi phi|Omega|phi phi>
/// is the output purity of the pure input |phi>.
template <typename Real>
CMatrix<Real> compute_omega(const KrausChannelT<Real>& ch) {
  const Index n = ch.dim_in();
  const auto& ks = ch.kraus();
  CMatrix<Real> omega = CMatrix<Real>::Zero(n * n, n * n);
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const CMatrix<Real> left = ks[j].adjoint() * ks[i];
      const CMatrix<Real> right = ks[i].adjoint() * ks[j];
      for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b) omega.block(a * n, b * n, n, n) += left(a, b) * right;
    }
  return (omega + omega.adjoint()) / Real(2);
}

/// [[Re h, -Im h], [Im h, Re h]]; PSD iff h is PSD.
template <typename Derived>
RMatrix<typename Derived::RealScalar> hermitian_real_embed(const Eigen::MatrixBase<Derived>& h) {
  using Real = typename Derived::RealScalar;
  detail::require(h.rows() == h.cols(), ErrorCode::dimension_mismatch, "embedding needs a square matrix");
  detail::require(detail::hermitian_residual(h) <= Real(1e-10) * (1 + detail::max_abs(h)),
                  ErrorCode::not_hermitian, "embedding needs a Hermitian matrix");
  const Index d = h.rows();
  RMatrix<Real> out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = h.real();
  out.topRightCorner(d, d) = -h.imag();
  out.bottomLeftCorner(d, d) = h.imag();
  out.bottomRightCorner(d, d) = h.real();
  return out;
}

/// Kronecker product of complex matrices.
template <typename DerivedA, typename DerivedB>
CMatrix<typename DerivedA::RealScalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Real = typename DerivedA::RealScalar;
  CMatrix<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = std::complex<Real>(a(i, j)) * b;
  return out;
}

}  // namespace encopt
