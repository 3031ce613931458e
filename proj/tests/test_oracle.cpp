#include <gtest/gtest.h>

#include "support.hpp"

using namespace encopt;
using namespace encopt::testing;

namespace {

RealVector angle(double t) { return RealVector::Constant(1, t); }

}  // namespace

TEST(Oracle, GoldenValuesUnderDoubleBitFlip) {
  const KrausChannel ch = double_bit_flip(0.1);
  const double p = 0.1, q = 0.9;
  EXPECT_NEAR(worst_case_purity(ch, builtin_encoder("a", {}).kraus).min_purity, 1 - 2 * p * q, 1e-9);
  EXPECT_NEAR(worst_case_purity(ch, builtin_encoder("c", {}).kraus).min_purity, 1 - 4 * p * q * (p * p + q * q), 1e-9);
  EXPECT_NEAR(worst_case_purity(ch, builtin_encoder("repetition", {}).kraus).min_purity,
              std::pow(p * p + q * q, 2), 1e-9);
}

TEST(Oracle, AgreesWithDenseScan) {
  const KrausChannel ch = double_ad(0.15);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexMatrix e = random_isometry(4, 2, seed);
    EXPECT_NEAR(worst_case_purity(ch, e).min_purity, scan_real_qubit(ch, e), 1e-9);
  }
}

TEST(Oracle, ArgminReproducesMinimum) {
  const KrausChannel ch = double_bit_flip(0.1);
  const ComplexMatrix e = builtin_encoder("c", {{"alpha", 0.4}}).kraus;
  const OracleResult r = worst_case_purity(ch, e);
  EXPECT_LT((oracle_state(2, InputMode::real_qubit, r.argmin_angles) - r.argmin_state).norm(), 1e-15);
  EXPECT_NEAR(output_purity(ch, e, r.argmin_state), r.min_purity, 1e-12);
  EXPECT_LE(r.cross_check_residual, 1e-10);
}

TEST(Oracle, RefinementIsMonotoneInResolution) {
  const KrausChannel ch = double_ad(0.1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexMatrix e = random_isometry(4, 2, 40 + seed);
    for (InputMode mode : {InputMode::real_qubit, InputMode::complex_qubit}) {
      double prev = 2;
      for (int res : {90, 360, 720}) {
        OracleConfig cfg;
        cfg.mode = mode;
        cfg.resolution = res;
        const double m = worst_case_purity(ch, e, cfg).min_purity;
        EXPECT_LE(m, prev + 1e-12);
        prev = m;
      }
    }
  }
}

TEST(Oracle, ComplexInputsNeverBeatRealOnes) {
  const KrausChannel ch = double_bit_flip(0.1);
  OracleConfig cfg;
  cfg.mode = InputMode::complex_qubit;
  for (const char* name : {"a", "c", "repetition"}) {
    const ComplexMatrix e = builtin_encoder(name, {}).kraus;
    EXPECT_LE(worst_case_purity(ch, e, cfg).min_purity, worst_case_purity(ch, e).min_purity + 1e-12) << name;
  }
}

TEST(Oracle, GeneralRMatchesQubitModeForRTwo) {
  const KrausChannel ch = double_ad(0.1);
  const ComplexMatrix e = random_isometry(4, 2, 77);
  OracleConfig c2, g2;
  c2.mode = InputMode::complex_qubit;
  g2.mode = InputMode::general_r;
  EXPECT_NEAR(worst_case_purity(ch, e, c2).min_purity, worst_case_purity(ch, e, g2).min_purity, 1e-8);
}

TEST(Oracle, States) {
  EXPECT_EQ(oracle_num_angles(2, InputMode::real_qubit), 1);
  EXPECT_EQ(oracle_num_angles(2, InputMode::complex_qubit), 2);
  EXPECT_EQ(oracle_num_angles(3, InputMode::general_r), 4);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  for (int t = 0; t < 20; ++t) {
    RealVector a(4);
    for (Index i = 0; i < 4; ++i) a(i) = u(rng);
    const ComplexVector s = oracle_state(3, InputMode::general_r, a);
    EXPECT_NEAR(s.norm(), 1.0, 1e-14);
    EXPECT_NEAR(s(0).imag(), 0.0, 1e-15);
  }
}

TEST(Oracle, PurityFormMatchesKrausSum) {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 100; ++t) {
    const Index n = 3 + t % 3, r = 2 + t % 2;
    const KrausChannel ch = random_channel(n, 1 + t % 4, rng);
    const ComplexMatrix e = random_isometry(n, r, 900 + t);
    const PurityForm form(ch, e);
    const ComplexVector phi = random_state(r, rng);
    const ComplexVector psi = e * phi;
    EXPECT_NEAR(form(phi), kraus_purity(ch, psi * psi.adjoint()), 1e-10);
  }
}

TEST(Oracle, Errors) {
  OracleConfig cfg;
  cfg.resolution = 4;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(worst_case_purity(double_bit_flip(0.1), random_isometry(3, 2, 1)), Error);
  EXPECT_THROW(worst_case_purity(double_bit_flip(0.1), random_isometry(4, 3, 1)), Error);
}

TEST(Analytic, Examples) {
  const ParamMap p{{"p", 0.1}, {"alpha", 0.3}};
  EXPECT_NEAR(analytic_purity("bf_a", p, angle(pi / 4 - 0.3)), 1.0, 1e-15);
  EXPECT_NEAR(analytic_purity("ad_f", {{"p", 0.1}, {"alpha", 0}}, angle(pi / 2)), 0.82, 1e-15);
  EXPECT_NEAR(analytic_purity("ad_f", {{"p", 0.1}, {"alpha", pi / 2}, {"beta", 0.7}}, angle(0)), 0.6724, 1e-14);
  EXPECT_NEAR(analytic_purity("identity", {}, angle(1.0)), 1.0, 0);
  EXPECT_THROW(analytic_purity("bf_z", p, angle(0)), Error);
}

// The closed forms against direct evaluation of the encoder-channel pair.
TEST(Analytic, MatchesDirectEvaluation) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0, pi);
  const double p = 0.23;
  const struct {
    const char* family;
    const char* channel;
    const char* encoder;
  } cases[] = {{"bf_a", "bitflip2", "a"}, {"bf_b", "bitflip2", "b"}, {"bf_c", "bitflip2", "c"},
               {"ad_d", "ad2", "d"},      {"ad_d", "ad2", "e"},      {"ad_f", "ad2", "f"}};
  for (const auto& c : cases) {
    const KrausChannel ch = builtin_channel(c.channel, {{"p", p}});
    for (int t = 0; t < 20; ++t) {
      const double alpha = u(rng), beta = std::string(c.family) == "ad_f" ? u(rng) : 0.0;
      const ParamMap params{{"p", p}, {"alpha", alpha}, {"beta", beta}};
      const ComplexMatrix e = builtin_encoder(c.encoder, params).kraus;
      const double th = u(rng);
      ComplexVector phi(2);
      phi << std::cos(th), std::sin(th);
      const ComplexVector psi = e * phi;
      EXPECT_NEAR(analytic_purity(c.family, params, angle(th)), kraus_purity(ch, psi * psi.adjoint()), 1e-12)
          << c.family << " with encoder " << c.encoder;
    }
  }
}

TEST(Analytic, FamilyLookup) {
  EXPECT_EQ(analytic_family("bitflip2", "a", {}), "bf_a");
  EXPECT_EQ(analytic_family("bitflip2", "c", {}), "bf_c");
  EXPECT_EQ(analytic_family("ad2", "d", {{"alpha", 1.0}}), "ad_d");
  EXPECT_EQ(analytic_family("ad2", "d", {{"beta", 0.4}}), "");
  EXPECT_EQ(analytic_family("ad2", "a", {}), "");
}

TEST(CrossValidate, BitFlipFamilyA) {
  const KrausChannel ch = double_bit_flip(0.1);
  for (double a : {0.0, 1.1}) {
    const ParamMap params{{"p", 0.1}, {"alpha", a}};
    const CrossValidationReport r = cross_validate("bf_a", params, ch, builtin_encoder("a", params).kraus);
    EXPECT_LT(r.max_deviation, 1e-8);
    EXPECT_EQ(r.points, 101);
  }
}

TEST(CrossValidate, AmplitudeDampingFamilyD) {
  const KrausChannel ch = double_ad(0.1);
  for (double a : {0.0, pi / 3}) {
    const ParamMap params{{"p", 0.1}, {"alpha", a}};
    const CrossValidationReport r = cross_validate("ad_d", params, ch, builtin_encoder("d", params).kraus);
    EXPECT_NEAR(r.oracle_min, 0.82, 1e-9);
    EXPECT_NEAR(r.analytic_min, 0.82, 1e-9);
  }
}

TEST(CrossValidate, IdentityChannel) {
  const KrausChannel id = KrausChannel::identity(4);
  const CrossValidationReport r = cross_validate("identity", {}, id, random_isometry(4, 2, 3));
  EXPECT_NEAR(r.oracle_min, 1.0, 1e-12);
  EXPECT_NEAR(r.analytic_min, 1.0, 0);
}

TEST(CrossValidate, MismatchIsReported) {
  const KrausChannel ch = double_bit_flip(0.1);
  try {
    cross_validate("bf_c", {{"p", 0.1}}, ch, builtin_encoder("a", {}).kraus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::inconsistency);
  }
}
