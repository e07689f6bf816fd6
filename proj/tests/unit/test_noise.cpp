#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include "chemostat_es/errors.hpp"
#include "chemostat_es/noise.hpp"
#include "chemostat_es/plant.hpp"

namespace ces = chemostat_es;

TEST(Noise, ZeroAmplitudeIsZero) {
  ces::NoiseParams n;
  n.a = 0.0;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(ces::square_wave(n, i * 0.37), 0.0);
}

TEST(Noise, ZeroNoiseAndNoNoise) {
  for (double t : {0.0, 1.0, 123.4}) {
    EXPECT_EQ(ces::square_wave(ces::zero_noise(), t), 0.0);
    EXPECT_EQ(ces::square_wave(ces::no_noise(), t), 0.0);
    EXPECT_EQ(ces::measure({0.3, 0.7}, t, ces::zero_noise()), 0.3);
  }
}

TEST(Noise, ConstantBias) {
  ces::NoiseParams n;
  n.kind = ces::NoiseKind::constant_bias;
  EXPECT_EQ(ces::square_wave(n, 17.0), 0.05);
}

TEST(Noise, PiecewiseConstantOverHoldInterval) {
  ces::NoiseParams n;
  n.seed = 42;
  for (int k = 0; k < 50; ++k) {
    const double t = k / n.omega;
    EXPECT_EQ(ces::square_wave(n, t), ces::square_wave(n, t + 0.5 / n.omega));
    EXPECT_EQ(ces::square_wave(n, t), ces::square_wave(n, t + 0.999 / n.omega));
  }
}

TEST(Noise, DeterministicAndSeedDependent) {
  ces::NoiseParams a;
  a.seed = 7;
  ces::NoiseParams b = a;
  ces::NoiseParams c = a;
  c.seed = 8;
  int differ = 0;
  for (int k = 0; k < 200; ++k) {
    const double t = k * 5.0 + 1.0;
    EXPECT_EQ(ces::square_wave(a, t), ces::square_wave(b, t));
    differ += ces::square_wave(a, t) != ces::square_wave(c, t);
  }
  EXPECT_GT(differ, 190);
}

TEST(Noise, OrderIndependentQueries) {
  ces::NoiseParams n;
  const double late = ces::square_wave(n, 1000.0);
  for (int k = 0; k < 100; ++k) ces::square_wave(n, k * 1.0);
  EXPECT_EQ(ces::square_wave(n, 1000.0), late);
}

TEST(Noise, EmpiricalStatistics) {
  ces::NoiseParams n;
  n.seed = 2024;
  double sum = 0.0;
  double max_abs = 0.0;
  double sum_sq = 0.0;
  constexpr int kCount = 10000;
  for (std::int64_t k = 0; k < kCount; ++k) {
    const double v = ces::square_value(n, k);
    sum += v;
    sum_sq += v * v;
    max_abs = std::max(max_abs, std::abs(v));
  }
  EXPECT_LE(std::abs(sum / kCount), 0.002);
  EXPECT_LE(max_abs, 0.05);
  // Uniform on [-a, a]: variance a^2 / 3.
  EXPECT_NEAR(sum_sq / kCount, 0.05 * 0.05 / 3.0, 5e-5);
}

TEST(Noise, NegativeTimeIsDomainError) {
  EXPECT_THROW(ces::square_wave(ces::NoiseParams{}, -1.0), ces::DomainError);
}

TEST(Noise, KindRoundTripAndValidation) {
  for (auto k : {ces::NoiseKind::none, ces::NoiseKind::zero, ces::NoiseKind::square, ces::NoiseKind::constant_bias}) {
    EXPECT_EQ(ces::parse_noise_kind(ces::to_string(k)), k);
  }
  EXPECT_THROW(ces::parse_noise_kind("gaussian"), ces::ConfigError);
  ces::NoiseParams bad;
  bad.a = -0.1;
  EXPECT_THROW(ces::validate(bad), ces::ConfigError);
  bad = {};
  bad.omega = 0.0;
  EXPECT_THROW(ces::validate(bad), ces::ConfigError);
}
