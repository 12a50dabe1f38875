#include <gtest/gtest.h>

#include <cmath>

#include "rvsem/noise.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace rvsem;

namespace {
const SpaceConfig kSmall{250, 4, 0, Weighting::uniform};
const SpaceConfig kPaper{2500, 50, 0, Weighting::uniform};
}  // namespace

TEST(Pmf, NormalizedAndSymmetric) {
  for (const auto& [d, m] : {std::pair{250u, 4u}, {250u, 50u}, {2500u, 50u}, {1000u, 10u}}) {
    const auto pmf = theoretical_pmf(d, m);
    EXPECT_NEAR(pmf.total(), 1.0, 1e-10);
    for (int s = 1; s <= pmf.max_units(); ++s) EXPECT_NEAR(pmf.probability(s), pmf.probability(-s), 1e-15);
  }
}

TEST(Pmf, StdIsInverseSqrtD) {
  // Each overlapping coordinate contributes +-1/(2m) at random, so
  // Var = E[v] / (2m)^2 = (2m * 2m/d) / (2m)^2 = 1/d.
  const auto pmf = theoretical_pmf(kPaper);
  EXPECT_NEAR(pmf.stddev() * std::sqrt(2500.0), 1.0, 0.02);
  EXPECT_NEAR(theoretical_pmf(kSmall).variance(), 1.0 / 250, 1e-12);
}

TEST(Pmf, VarianceFallsWithD) {
  double last = 1.0;
  for (std::uint32_t d : {100u, 250u, 500u, 1000u, 2500u, 10000u}) {
    const double v = theoretical_pmf(d, 20).variance();
    EXPECT_LT(v, last);
    last = v;
  }
}

TEST(Pmf, OddParityTermsVanish) {
  // P(s) with s odd needs an odd overlap; check one value by hand.
  const auto pmf = theoretical_pmf(kSmall);
  double ref = 0;
  for (int v = 1; v <= 8; v += 2) ref += p_overlap(static_cast<std::uint32_t>(v), 250, 4) * p_scalar(v, 1);
  EXPECT_NEAR(pmf.probability(1), ref, 1e-16);
}

TEST(Sample, SeedModeIsOnGrid) {
  const auto h = sample_seed_noise(kSmall, 50000, 1);
  EXPECT_EQ(h.total, 50000u);
  EXPECT_EQ(h.counts.size(), 17u);
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double units = h.center(b) * 8;
    EXPECT_NEAR(units, std::round(units), 1e-9);
  }
  // Moments come from the exact grid values.
  double s = 0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) s += h.counts[b] * h.center(b);
  EXPECT_NEAR(h.mean(), s / 50000, 1e-12);
}

TEST(Sample, ZeroSamples) {
  const auto h = sample_seed_noise(kSmall, 0, 1);
  EXPECT_EQ(h.total, 0u);
  EXPECT_EQ(h.stddev(), 0.0);
  EXPECT_THROW(compare(theoretical_pmf(kSmall), h), DomainError);
}

TEST(Sample, DeterministicAcrossThreadCounts) {
  const auto a = sample_seed_noise(kSmall, 300000, 9, SampleMode::seed, 1);
  const auto b = sample_seed_noise(kSmall, 300000, 9, SampleMode::seed, 4);
  EXPECT_EQ(a.counts, b.counts);
  const auto c = sample_seed_noise(kPaper, 70000, 9, SampleMode::composite, 1);
  const auto d = sample_seed_noise(kPaper, 70000, 9, SampleMode::composite, 3);
  EXPECT_EQ(c.counts, d.counts);
  EXPECT_NE(a.counts, sample_seed_noise(kSmall, 300000, 10).counts);
}

TEST(Sample, MatchesExactLawAtSmallScale) {
  const auto exact = fixtures::exact_seed_pmf(250, 4);
  const auto h = sample_seed_noise(kSmall, 1000000, 3);
  const double n = static_cast<double>(h.total);
  for (std::size_t b = 0; b < exact.size(); ++b) {
    const double p = std::max(exact[b], 5.0 / n);
    EXPECT_LE(std::abs(h.counts[b] / n - exact[b]), 4 * std::sqrt(p * (1 - p) / n)) << b;
  }
}

TEST(Sample, PaperScaleMatchesTheory) {
  const auto h = sample_seed_noise(kPaper, 1000000, 4);
  const auto r = compare(theoretical_pmf(kPaper), h);
  EXPECT_TRUE(r.pass) << "max band ratio " << r.max_band_ratio;
  EXPECT_NEAR(h.stddev() * 50, 1.0, 0.05);
}

TEST(Sample, CompositeModeStd) {
  const auto h = sample_seed_noise(kPaper, 200000, 2, SampleMode::composite);
  EXPECT_GE(h.stddev(), 0.015);
  EXPECT_LE(h.stddev(), 0.03);
  EXPECT_NEAR(h.mean(), 0.0, 5e-4);
}

TEST(Sample, DeviationShrinksWithSamples) {
  const auto pmf = theoretical_pmf(kPaper);
  std::vector<double> dev;
  for (std::uint64_t n : {10000u, 100000u, 1000000u}) dev.push_back(compare(pmf, sample_seed_noise(kPaper, n, 21)).max_abs_deviation);
  EXPECT_LT(dev[1], dev[0]);
  EXPECT_LT(dev[2], dev[1]);
  // O(1/sqrt n): two decades of n buy roughly one decade of deviation.
  EXPECT_LT(dev[2] / dev[0], 0.3);
}

TEST(Compare, SelfIsExact) {
  const auto pmf = theoretical_pmf(kSmall);
  const auto r = compare(pmf, pmf);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_abs_deviation, 0.0);
  EXPECT_FALSE(compare(pmf, theoretical_pmf(251, 4)).pass);
  EXPECT_THROW(compare(pmf, theoretical_pmf(250, 5)), DomainError);
}

TEST(Compare, WrongMFails) {
  const auto h = sample_seed_noise(kSmall, 100000, 5);
  EXPECT_FALSE(compare(theoretical_pmf(250, 5), h).pass);
  EXPECT_FALSE(compare(theoretical_pmf(250, 2), h).pass);
}

TEST(Compare, BinningMismatch) {
  Histogram h;
  h.origin = -0.25;
  h.width = 0.125;
  h.counts.assign(4, 0);
  h.add(0.0);
  EXPECT_THROW(compare(theoretical_pmf(250, 4), h), DomainError);
}

TEST(Tail, RangeAndMean) {
  // Ranks [100, 3900) of 4000 cut equal slices off both ends.
  const auto space = build_space(fixtures::random_lexicon(4000, 500, 8), SpaceConfig{2500, 50, 1});
  const auto t = space.lexicon().id_of("w000");
  const auto h = tail_noise(space, t, 100, 3800);
  EXPECT_EQ(h.total, 3800u);
  EXPECT_NEAR(h.mean(), 0.0, 0.005);
  EXPECT_LT(h.stddev(), 0.05);
  EXPECT_EQ(tail_noise(space, t, 0, 1).total, 1u);
  EXPECT_NEAR(tail_noise(space, t, 0, 1).mean(), 1.0, 1e-5);
  EXPECT_THROW(tail_noise(space, t, 3000, 1001), DomainError);
}

TEST(Report, Fields) {
  const auto r = noise_report(250, 4, SampleMode::seed, 20000, 1);
  EXPECT_EQ(r.sample_count, 20000u);
  ASSERT_TRUE(r.deviation.has_value());
  EXPECT_NEAR(r.theoretical_std, 1 / std::sqrt(250.0), 1e-9);
  const auto c = noise_report(2500, 50, SampleMode::composite, 1000, 1);
  EXPECT_FALSE(c.deviation.has_value());
  EXPECT_NEAR(normal_mass(-10, 10, 1), 1.0, 1e-12);
}
