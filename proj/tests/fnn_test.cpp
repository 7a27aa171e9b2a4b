#include <gtest/gtest.h>

#include "chaoskit/fnn.hpp"
#include "chaoskit/synth.hpp"
#include "test_support.hpp"

using namespace chaoskit;

namespace {

ReturnSeries henon_series(std::size_t n) {
  MapSpec spec;
  spec.params = HenonParams{};
  spec.length = n;
  spec.transient = 1000;
  return generate_series(spec);
}

}  // namespace

TEST(FnnFraction, PerfectLineUnfoldsInOneDimension) {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i + 1);
  const auto z = make_return_series(std::move(v), "line");
  const auto rec = fnn_fraction(z, 1, 1, 10.0, z.sigma, 0);
  ASSERT_TRUE(rec.fraction.has_value());
  EXPECT_EQ(rec.numerator, 0);
  EXPECT_GT(rec.denominator, 0);
  EXPECT_DOUBLE_EQ(*rec.fraction, 0.0);
}

TEST(FnnFraction, HenonDropsBelowThresholdAtTwo) {
  const auto z = henon_series(5000);
  const auto m1 = fnn_fraction(z, 1, 1, 10.0, z.sigma, 0);
  const auto m2 = fnn_fraction(z, 2, 1, 10.0, z.sigma, 1);
  ASSERT_TRUE(m1.fraction && m2.fraction);
  EXPECT_GT(*m1.fraction, 0.10);
  EXPECT_LT(*m2.fraction, 0.005);

  // exact agreement with the exhaustive-scan reference
  for (int m : {1, 2, 3}) {
    const int theiler = m - 1;
    const auto got = fnn_fraction(z, m, 1, 10.0, z.sigma, theiler);
    const auto want = testsupport::fnn_brute_force(z.values, m, 1, 10.0, z.sigma, theiler);
    EXPECT_EQ(got.numerator, want.numerator) << "m=" << m;
    EXPECT_EQ(got.denominator, want.denominator) << "m=" << m;
    EXPECT_EQ(got.ties, want.ties) << "m=" << m;
  }
}

TEST(FnnFraction, MatchesBruteForceOnRandomSeries) {
  for (int cs = 0; cs < 6; ++cs) {
    Rng rng(600 + std::uint64_t(cs));
    const std::size_t n = 200 + std::size_t(rng.uniform01() * 1800);
    const auto z = make_return_series(testsupport::ar1_series(rng, n, 0.6, 1.0), "ar1");
    const int m = 1 + cs % 3;
    const int tau = 1 + cs % 2;
    const int theiler = (m - 1) * tau;
    const auto got = fnn_fraction(z, m, tau, 10.0, z.sigma, theiler);
    const auto want = testsupport::fnn_brute_force(z.values, m, tau, 10.0, z.sigma, theiler);
    EXPECT_EQ(got.numerator, want.numerator) << "case " << cs;
    EXPECT_EQ(got.denominator, want.denominator) << "case " << cs;
    EXPECT_EQ(got.ties, want.ties) << "case " << cs;
  }
}

TEST(FnnFraction, ParallelMatchesSerialExactly) {
  const auto z = henon_series(4000);
  for (int m : {1, 2, 4}) {
    const auto serial = fnn_fraction(z, m, 1, 10.0, z.sigma, m - 1, 1);
    const auto parallel = fnn_fraction(z, m, 1, 10.0, z.sigma, m - 1, 4);
    EXPECT_EQ(serial.numerator, parallel.numerator);
    EXPECT_EQ(serial.denominator, parallel.denominator);
    EXPECT_EQ(serial.ties, parallel.ties);
  }
}

TEST(FnnFraction, DuplicatePointsBecomeTies) {
  // two copies of the same segment: every nearest neighbour is an exact twin
  std::vector<double> v;
  Rng rng(77);
  for (int i = 0; i < 50; ++i) v.push_back(rng.normal());
  std::vector<double> doubled = v;
  doubled.insert(doubled.end(), v.begin(), v.end());
  const auto z = make_return_series(std::move(doubled), "twins");
  const auto rec = fnn_fraction(z, 1, 1, 10.0, z.sigma, 0);
  EXPECT_GT(rec.ties, 0);
  EXPECT_FALSE(rec.fraction.has_value() && rec.denominator == 0);
}

TEST(FnnFraction, ScaleAndShiftCovariance) { testsupport::check_fnn_scale_covariance(100); }

TEST(FnnFraction, InvalidParametersThrow) {
  const auto z = make_return_series({1, 2, 3, 4, 5, 6, 7, 8}, "z");
  EXPECT_THROW(fnn_fraction(z, 1, 1, 1.0, z.sigma, 0), std::invalid_argument);   // r <= 1
  EXPECT_THROW(fnn_fraction(z, 1, 1, 10.0, 0.0, 0), std::invalid_argument);      // sigma
  EXPECT_THROW(fnn_fraction(z, 7, 1, 10.0, z.sigma, 0), std::invalid_argument);  // too short
}

TEST(MinEmbeddingDim, HenonConvergesAtTwo) {
  const auto z = henon_series(5000);
  const auto res = min_embedding_dim(z, 1, 10.0, z.sigma, -1, 0.005, 30);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.m_min, 2);
  ASSERT_EQ(res.curve.records.size(), 2u);
  EXPECT_EQ(res.curve.records[0].m, 1);
  EXPECT_EQ(res.curve.records[1].m, 2);
  for (const auto& rec : res.curve.records) {
    if (rec.fraction) {
      EXPECT_GE(*rec.fraction, 0.0);
      EXPECT_LE(*rec.fraction, 1.0);
    }
  }
}

TEST(MinEmbeddingDim, WhiteNoiseNeverConverges) {
  MapSpec spec;
  spec.params = NoiseParams{1.0};
  spec.seed = 1;
  spec.length = 4096;
  const auto z = generate_series(spec);
  const auto res = min_embedding_dim(z, 1, 10.0, z.sigma, -1, 0.005, 30);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.m_min, 30);
  for (const auto& rec : res.curve.records) {
    if (rec.fraction) {
      EXPECT_GE(*rec.fraction, 0.005) << "m=" << rec.m;
    }
  }
}

TEST(MinEmbeddingDim, DegenerateQuantizedSeriesRaisesFlag) {
  // constant plus noise at the rounding scale: almost all points collapse to
  // a handful of distinct values, nearest neighbours are exact ties and the
  // denominator collapses
  std::vector<double> v(500);
  Rng rng(5);
  for (auto& x : v) x = 1.0 + 1e-16 * std::floor(3.0 * rng.uniform01());
  const auto z = make_return_series(std::move(v), "quantized");
  ASSERT_GT(z.sigma, 0.0);
  const auto res = min_embedding_dim(z, 1, 10.0, z.sigma, 0, 0.005, 5);
  EXPECT_FALSE(res.converged);
  for (const auto& rec : res.curve.records) EXPECT_GT(rec.ties, 0) << "m=" << rec.m;
}
