#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "chemostat_es/errors.hpp"
#include "chemostat_es/oracle.hpp"

namespace ces = chemostat_es;
namespace oracle = chemostat_es::oracle;

TEST(Oracle, ClosedFormOptimum) {
  const ces::PlantParams p;
  const auto opt = oracle::phi_opt(p);
  const double s_star = (-1.0 + std::sqrt(12.0)) / 11.0;
  EXPECT_NEAR(opt.s_star, s_star, 1e-8);
  EXPECT_NEAR(opt.phi_star, p.growth.mu(s_star) * (1.0 - s_star), 1e-12);
  EXPECT_NEAR(opt.s_star, 0.22401, 1e-5);
  EXPECT_NEAR(opt.phi_star, 0.10073, 1e-5);
}

TEST(Oracle, FineGridAgrees) {
  const ces::PlantParams p;
  double best = -1.0;
  double best_s = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double s = i * 1e-6;
    const double v = oracle::phi(s, p);
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  const auto opt = oracle::phi_opt(p);
  EXPECT_NEAR(opt.s_star, best_s, 1e-5);
  EXPECT_NEAR(opt.phi_star, best, 1e-10);
}

TEST(Oracle, FirstOrderCondition) {
  const ces::PlantParams p;
  const auto opt = oracle::phi_opt(p);
  const double foc = p.growth.mu_prime(opt.s_star) * (p.s_in - opt.s_star) - p.growth.mu(opt.s_star);
  EXPECT_LE(std::abs(foc), 1e-8);
}

TEST(Oracle, LinearGrowthGivesMidpoint) {
  // Monod far from saturation: mu ~ (mu_max/K) s.
  ces::PlantParams p;
  p.growth = ces::GrowthModel::monod(1e8, 1e8);
  p.s_in = 2.0;
  EXPECT_NEAR(oracle::phi_opt(p).s_star, 1.0, 1e-6);
}

TEST(Oracle, TabulatedWithScaledFeed) {
  std::vector<double> knots;
  for (int i = 0; i <= 50; ++i) knots.push_back(i * 0.04);
  ces::PlantParams p;
  p.growth = ces::GrowthModel::tabulate(ces::GrowthModel{}, knots);
  const auto a = oracle::phi_opt(p);
  p.s_in = 2.0;
  const auto b = oracle::phi_opt(p);
  EXPECT_NE(a.phi_star, b.phi_star);
  const double foc = p.growth.mu_prime(b.s_star) * (p.s_in - b.s_star) - p.growth.mu(b.s_star);
  EXPECT_LE(std::abs(foc), 1e-8);
}

TEST(Oracle, Psi) {
  const ces::PlantParams p;
  EXPECT_NEAR(oracle::psi(1e-12, p), 0.0, 1e-11);
  const double peak = std::sqrt(0.1);
  EXPECT_NEAR(oracle::psi(peak, p), peak / (2.0 + peak), 1e-15);
  EXPECT_NEAR(oracle::psi(peak, p), 0.13650, 1e-4);
  EXPECT_THROW(oracle::psi(1.0, p), ces::DomainError);
  EXPECT_THROW(oracle::psi(0.0, p), ces::DomainError);
}

TEST(Oracle, MinimalGain) {
  const ces::PlantParams p;
  const double g = oracle::min_gain(p);
  EXPECT_NEAR(g, 0.096869, 1e-6);
  EXPECT_LT(g, 1.0);
}

TEST(Oracle, EquilibriumInverseIdentity) {
  const ces::PlantParams p;
  const auto r = oracle::equilibrium_solve(p.growth.mu(0.3) + 0.3, 1.0, p, {});
  EXPECT_NEAR(r.s_eq, 0.3, 1e-12);
  EXPECT_NEAR(r.b_eq, 0.7, 1e-12);
  EXPECT_FALSE(r.boundary);
  EXPECT_FALSE(r.saturated);
}

TEST(Oracle, EquilibriumRandomInverse) {
  const ces::PlantParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.005, 0.995);
  for (int i = 0; i < 100; ++i) {
    const double s = dist(rng);
    const auto r = oracle::equilibrium_solve(oracle::psi(s, p) + s, 1.0, p, {});
    EXPECT_NEAR(r.s_eq, s, 1e-10);
  }
}

TEST(Oracle, EquilibriumWithoutFeed) {
  const ces::PlantParams p;
  const auto r = oracle::equilibrium_solve(0.0, 1.0, p, {});
  EXPECT_EQ(r.s_eq, 0.0);
  EXPECT_EQ(r.b_eq, 1.0);
  EXPECT_EQ(r.u_eq, 0.0);
  EXPECT_TRUE(r.boundary);
}

TEST(Oracle, EquilibriumWashout) {
  const ces::PlantParams p;
  const auto r = oracle::equilibrium_solve(3.0, 1.0, p, {});
  EXPECT_EQ(r.s_eq, 1.0);
  EXPECT_EQ(r.b_eq, 0.0);
  EXPECT_TRUE(r.boundary);
}

TEST(Oracle, GainConditionEnforced) {
  const ces::PlantParams p;
  EXPECT_THROW(oracle::equilibrium_solve(0.3, 0.05, p, {}), ces::ConfigError);
  EXPECT_THROW(oracle::equilibrium_solve(0.3, 1.0, p, {1.0, 0.0}), ces::ConfigError);
}
