#include <gtest/gtest.h>

#include "support.hpp"

using namespace encopt;
using namespace encopt::testing;

namespace {

ComplexMatrix sx() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix ket_bra(Index d, Index i, Index j) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(i, j) = 1;
  return m;
}

// 4x4 grid of 4x4 blocks.
ComplexMatrix blocks(const std::vector<std::vector<ComplexMatrix>>& b) {
  ComplexMatrix m(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m.block(4 * i, 4 * j, 4, 4) = b[i][j];
  return m;
}

}  // namespace

TEST(IdentityVector, ComputationalBasis) {
  EXPECT_EQ(identity_vector(1).vector.size(), 1);
  EXPECT_EQ(identity_vector(1).vector(0), Complex(1));
  ComplexVector two(4);
  two << 1, 0, 0, 1;
  EXPECT_EQ(identity_vector(2).vector, two);
  const ComplexVector three = identity_vector(3).vector;
  for (Index i = 0; i < 9; ++i) EXPECT_EQ(three(i), Complex(i % 4 == 0 ? 1 : 0));
  EXPECT_DOUBLE_EQ(three.squaredNorm(), 3);
  EXPECT_THROW(identity_vector(0), Error);
}

TEST(IdentityVector, BasisInvariance) {
  std::mt19937_64 rng(11);
  for (Index d : {2, 3, 5}) {
    const ComplexMatrix u = random_unitary(d, rng);
    EXPECT_LT((identity_vector_in_basis(u) - identity_vector(d).vector).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Vectorize, Examples) {
  const DensityMatrix zero(ket_bra(2, 0, 0));
  ComplexVector e(4);
  e << 1, 0, 0, 0;
  EXPECT_EQ(vectorize_state(zero).vector, e);

  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  e << 0.5, 0, 0, 0.5;
  EXPECT_LT((vectorize_state(mixed).vector - e).norm(), 1e-15);

  ComplexVector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const DensityMatrix rp = DensityMatrix::pure(PureState(plus));
  EXPECT_LT((vectorize_state(rp).vector - ComplexVector::Constant(4, 0.5)).norm(), 1e-15);
}

TEST(Vectorize, PureStateIsKetTimesConjugate) {
  std::mt19937_64 rng(3);
  const ComplexVector a = random_state(3, rng);
  const DensityMatrix rho = DensityMatrix::pure(PureState(a));
  EXPECT_LT((vectorize_state(rho).vector - kron(a, a.conjugate())).norm(), 1e-14);
}

TEST(Vectorize, RoundTripAndNorm) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho = random_density(3, rng);
    const VectorizedState v = vectorize_state(rho);
    EXPECT_EQ(devectorize(v), rho.matrix());
    EXPECT_NEAR(v.vector.squaredNorm(), purity(rho), 1e-12);
  }
}

TEST(Purity, Examples) {
  EXPECT_DOUBLE_EQ(purity(DensityMatrix::maximally_mixed(2)), 0.5);
  std::mt19937_64 rng(1);
  EXPECT_NEAR(purity(DensityMatrix::pure(PureState(random_state(4, rng)))), 1.0, 1e-14);
  const DensityMatrix out = apply_channel(make_bit_flip(0.1), DensityMatrix(ket_bra(2, 0, 0)));
  EXPECT_NEAR(purity(out), 0.82, 1e-15);
}

TEST(ApplyChannel, Examples) {
  std::mt19937_64 rng(2);
  const DensityMatrix rho = random_density(3, rng);
  EXPECT_LT((apply_channel(KrausChannel::identity(3), rho).matrix() - rho.matrix()).norm(), 1e-15);

  ComplexMatrix want = ComplexMatrix::Zero(2, 2);
  want(0, 0) = 0.9;
  want(1, 1) = 0.1;
  EXPECT_LT((apply_channel(make_bit_flip(0.1), DensityMatrix(ket_bra(2, 0, 0))).matrix() - want).norm(), 1e-15);

  const double p = 0.3;
  want(0, 0) = 1 - p;
  want(1, 1) = p;
  EXPECT_LT((apply_channel(make_amplitude_damping(p), DensityMatrix(ket_bra(2, 1, 1))).matrix() - want).norm(),
            1e-15);
  EXPECT_THROW(apply_channel(make_bit_flip(0.1), rho), Error);
}

TEST(ApplyChannel, TracePreserved) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const KrausChannel ch = random_channel(3, 3, rng);
    EXPECT_NEAR(apply_channel(ch, random_density(3, rng)).matrix().trace().real(), 1.0, 1e-12);
  }
}

TEST(KrausChannelType, RejectsNonTracePreserving) {
  EXPECT_THROW(KrausChannel({ComplexMatrix::Identity(2, 2) * 0.9}), Error);
  EXPECT_THROW(KrausChannel(std::vector<ComplexMatrix>{}), Error);
}

TEST(Superop, IdentityChannel) {
  EXPECT_EQ(kraus_to_superop(KrausChannel::identity(2)).matrix(), ComplexMatrix::Identity(4, 4));
}

TEST(Superop, DoubleBitFlipDisplayedBlocks) {
  const double p = 0.1, q = 0.9, s = std::sqrt(p * q);
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix a1 = p * kron(sx(), sx()), a2 = s * kron(sx(), i2), a3 = s * kron(i2, sx()),
                      a4 = q * kron(i2, i2);
  const ComplexMatrix want = blocks({{q * a4, s * a3, s * a2, p * a1},
                                     {s * a3, q * a4, p * a1, s * a2},
                                     {s * a2, p * a1, q * a4, s * a3},
                                     {p * a1, s * a2, s * a3, q * a4}});
  EXPECT_LT((kraus_to_superop(double_bit_flip(p)).matrix() - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Superop, DoubleAmplitudeDampingDisplayedBlocks) {
  const double p = 0.1;
  ComplexMatrix h1 = ComplexMatrix::Zero(2, 2), h2 = ComplexMatrix::Zero(2, 2);
  h1(0, 0) = 1;
  h1(1, 1) = std::sqrt(p);
  h2(0, 1) = std::sqrt(1 - p);
  const ComplexMatrix a1 = kron(h1, h1), a2 = kron(h1, h2), a3 = kron(h2, h1), a4 = kron(h2, h2);
  const ComplexMatrix o = ComplexMatrix::Zero(4, 4);
  const double c = std::sqrt(1 - p), sp = std::sqrt(p), m = std::sqrt(p * (1 - p));
  const ComplexMatrix want = blocks({{a1, c * a2, c * a3, (1 - p) * a4},
                                     {o, sp * a1, o, m * a3},
                                     {o, o, sp * a1, m * a2},
                                     {o, o, o, p * a1}});
  EXPECT_LT((kraus_to_superop(double_ad(p)).matrix() - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Superop, ThreeEvaluationPathsAgree) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const Index n = 2 + t % 3;
    const KrausChannel ch = random_channel(n, 1 + t % 4, rng);
    const DensityMatrix rho = random_density(n, rng);
    const ComplexMatrix direct = apply_channel(ch, rho).matrix();
    const SuperopMatrix x2 = kraus_to_superop(ch);
    EXPECT_LT((apply_superop(x2, rho) - direct).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((apply_choi(rearrange(x2), rho) - direct).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Superop, Composition) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const KrausChannel a = random_channel(3, 2, rng), b = random_channel(3, 3, rng);
    std::vector<ComplexMatrix> ba;
    for (const auto& kb : b.kraus())
      for (const auto& ka : a.kraus()) ba.push_back(kb * ka);
    const SuperopMatrix want = kraus_to_superop(KrausChannel(ba));
    const SuperopMatrix got = compose(kraus_to_superop(b), kraus_to_superop(a));
    EXPECT_LT((got.matrix() - want.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Rearrange, IdentityChannelGivesProjector) {
  const ChoiMatrix c = rearrange(kraus_to_superop(KrausChannel::identity(2)));
  ComplexMatrix want = ComplexMatrix::Zero(4, 4);
  for (Index i : {0, 3})
    for (Index j : {0, 3}) want(i, j) = 1;
  EXPECT_EQ(c.matrix(), want);
}

TEST(Rearrange, IndexRule) {
  std::mt19937_64 rng(8);
  const Index n = 2, m = 3;
  const ComplexMatrix x = random_complex(m * m, n * n, rng);
  const ComplexMatrix c = rearrange_matrix(x, n, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) EXPECT_EQ(c(i * n + k, j * n + l), x(i * m + j, k * n + l));
}

TEST(Rearrange, RoundTripIsExact) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const Index n = 1 + t % 4, m = 1 + (t / 4) % 4;
    const ComplexMatrix x = random_complex(m * m, n * n, rng);
    EXPECT_EQ(rearrange_inv_matrix(rearrange_matrix(x, n, m), n, m), x);
    const ComplexMatrix y = random_complex(m * n, m * n, rng);
    EXPECT_EQ(rearrange_matrix(rearrange_inv_matrix(y, n, m), n, m), y);
  }
}

TEST(Rearrange, ChoiTraceEqualsInputDimension) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + t % 3;
    const ChoiMatrix c = rearrange(kraus_to_superop(random_channel(n, 3, rng)));
    EXPECT_NEAR(c.matrix().trace().real(), double(n), 1e-12);
    EXPECT_LT((c.partial_trace_output() - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ChannelMembership, KrausChannelsAreChannels) {
  std::mt19937_64 rng(12);
  const SuperopMatrix x = kraus_to_superop(random_channel(3, 2, rng));
  EXPECT_TRUE(is_channel(x));
  EXPECT_LT(trace_condition_residual(x), 1e-12);
  const SuperopMatrix scaled(x.matrix() * 1.1, 3, 3);
  EXPECT_FALSE(is_channel(scaled));
}

TEST(PurePreserving, Examples) {
  EXPECT_TRUE(is_pure_preserving(kraus_to_superop(KrausChannel::identity(2)), 1e-10).pure_preserving);
  const PurePreservation bf = is_pure_preserving(kraus_to_superop(make_bit_flip(0.1)), 1e-10);
  EXPECT_FALSE(bf.pure_preserving);
  EXPECT_EQ(bf.choi_rank.rank, 2);
  std::mt19937_64 rng(13);
  const ComplexMatrix e = random_isometry(4, 2, 99);
  EXPECT_TRUE(is_pure_preserving(superop_of_operator(e), 1e-10).pure_preserving);
}

// Half isometric E (x) E^*, half channels with two or more Kraus terms; the
// two characterizations must agree on every sample.
TEST(PurePreserving, TwoCharacterizationsAgreeOn200Channels) {
  std::mt19937_64 rng(14);
  int yes = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 3;
    SuperopMatrix x = t % 2 == 0 ? superop_of_operator(random_unitary(n, rng))
                                 : kraus_to_superop(random_channel(n, 2 + t % 3, rng));
    PurePreservation r = is_pure_preserving(x, 1e-8);
    EXPECT_EQ(r.pure_preserving, t % 2 == 0);
    yes += r.pure_preserving;
  }
  EXPECT_EQ(yes, 100);
}

TEST(ExtractKraus, RepetitionEncoder) {
  ComplexMatrix e = ComplexMatrix::Zero(4, 2);
  e(0, 0) = 1;
  e(3, 1) = 1;
  const ChoiMatrix c = rearrange(superop_of_operator(e));
  EXPECT_NEAR(detect_rank(c, 1e-3).eigenvalues(0), 2.0, 1e-12);
  EXPECT_LT((extract_kraus_rank_one(c) - e).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExtractKraus, IdentityProjector) {
  const ChoiMatrix c = rearrange(kraus_to_superop(KrausChannel::identity(2)));
  EXPECT_LT((extract_kraus_rank_one(c) - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExtractKraus, RandomRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ComplexMatrix e = random_isometry(5, 3, seed);
    const ChoiMatrix c = rearrange(superop_of_operator(e));
    const ComplexMatrix got = extract_kraus_rank_one(c);
    EXPECT_LT((got.adjoint() * got - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((rearrange(superop_of_operator(got)).matrix() - c.matrix()).cwiseAbs().maxCoeff(), 1e-8);
    Index row, col;
    got.cwiseAbs().maxCoeff(&row, &col);
    EXPECT_NEAR(got(row, col).imag(), 0.0, 1e-12);
    EXPECT_GT(got(row, col).real(), 0.0);
  }
}

TEST(ExtractKraus, Errors) {
  EXPECT_THROW(extract_kraus_rank_one(rearrange(kraus_to_superop(make_bit_flip(0.1)))), Error);
  const ComplexMatrix e = random_isometry(4, 2, 1);
  const ChoiMatrix scaled(rearrange(superop_of_operator(e)).matrix() * 1.5, 2, 4);
  try {
    extract_kraus_rank_one(scaled);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::malformed_choi);
  }
}

TEST(DetectRank, Examples) {
  RealVector ev(3);
  ev << 2, 1e-9, 0;
  EXPECT_EQ(detect_rank(ComplexMatrix(ev.cast<Complex>().asDiagonal()), 1e-3).rank, 1);
  EXPECT_EQ(detect_rank(ComplexMatrix(ComplexMatrix::Identity(8, 8) / 4.0), 1e-3).rank, 8);
  const RankEstimate a = detect_rank(rearrange(superop_of_operator(builtin_encoder("a", {}).kraus)), 1e-3);
  EXPECT_EQ(a.rank, 1);
  EXPECT_NEAR(a.eigenvalues(0), 2.0, 1e-12);
  EXPECT_THROW(detect_rank(ComplexMatrix(ComplexMatrix::Zero(3, 3)), 1e-3), Error);
}

TEST(Omega, IdentityChannel) {
  EXPECT_LT((compute_omega(KrausChannel::identity(2)) - ComplexMatrix::Identity(4, 4)).norm(), 1e-15);
}

TEST(Omega, BitFlipRealMinimum) {
  const ComplexMatrix om = compute_omega(make_bit_flip(0.1));
  double best = 2;
  for (int i = 0; i < 3600; ++i) {
    const double t = pi * i / 3600;
    ComplexVector phi(2);
    phi << std::cos(t), std::sin(t);
    const ComplexVector pp = kron(phi, phi);
    best = std::min(best, (pp.adjoint() * om * pp)(0).real());
  }
  EXPECT_NEAR(best, 0.82, 1e-12);
}

TEST(Omega, EncoderAUnderDoubleBitFlip) {
  const ComplexMatrix e = builtin_encoder("a", {}).kraus;
  const ComplexMatrix om = compute_omega(double_bit_flip(0.1));
  double best = 2;
  for (int i = 0; i < 3600; ++i) {
    const double t = pi * i / 3600;
    ComplexVector phi(2);
    phi << std::cos(t), std::sin(t);
    const ComplexVector c = e * phi;
    const ComplexVector cc = kron(c, c);
    best = std::min(best, (cc.adjoint() * om * cc)(0).real());
  }
  EXPECT_NEAR(best, 0.82, 1e-12);
}

TEST(Omega, MatchesKrausPurityOn100RandomPairs) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 3;
    const KrausChannel ch = random_channel(n, 1 + t % 4, rng);
    const ComplexMatrix om = compute_omega(ch);
    EXPECT_LT(detail::hermitian_residual(om), 1e-12);
    const ComplexVector phi = random_state(n, rng);
    const ComplexVector pp = kron(phi, phi);
    EXPECT_NEAR((pp.adjoint() * om * pp)(0).real(), kraus_purity(ch, phi * phi.adjoint()), 1e-10);
  }
}

TEST(HermitianEmbed, Examples) {
  EXPECT_EQ(hermitian_real_embed(ComplexMatrix(ComplexMatrix::Identity(2, 2))), RealMatrix::Identity(4, 4));

  ComplexMatrix y(2, 2);
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  RealVector ev = Eigen::SelfAdjointEigenSolver<RealMatrix>(hermitian_real_embed(y)).eigenvalues();
  RealVector want(4);
  want << -1, -1, 1, 1;
  EXPECT_LT((ev - want).norm(), 1e-14);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 2;
  ev = Eigen::SelfAdjointEigenSolver<RealMatrix>(hermitian_real_embed(d)).eigenvalues();
  want << 0, 0, 2, 2;
  EXPECT_LT((ev - want).norm(), 1e-14);

  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1;
  EXPECT_THROW(hermitian_real_embed(bad), Error);
}

TEST(HermitianEmbed, EigenvaluesDoubled) {
  std::mt19937_64 rng(16);
  const ComplexMatrix g = random_complex(4, 4, rng);
  const ComplexMatrix h = g + g.adjoint();
  RealVector ev = hermitian_eigenvalues(h);
  RealVector emb = hermitian_eigenvalues(hermitian_real_embed(h));
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(emb(2 * i), ev(i), 1e-12);
    EXPECT_NEAR(emb(2 * i + 1), ev(i), 1e-12);
  }
}
