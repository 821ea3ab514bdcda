#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "sawtooth/finite_lattice.hpp"
#include "sawtooth/random_perturbation.hpp"

namespace {

using namespace sawtooth;

DisorderConfig config(double delta, int n_sites, int samples, std::uint64_t seed = 1) {
  DisorderConfig c;
  c.delta = delta;
  c.n_sites = n_sites;
  c.samples = samples;
  c.seed = seed;
  return c;
}

TEST(Depths, CleanChainHasUnitDepths) {
  for (double d : sample_depths(config(0.0, 50, 1), 3)) EXPECT_EQ(d, 1.0);
}

TEST(Depths, DeterministicPerSeedAndSample) {
  const auto c = config(0.3, 100, 1, 42);
  EXPECT_EQ(sample_depths(c, 5), sample_depths(c, 5));
  EXPECT_NE(sample_depths(c, 5), sample_depths(c, 6));
  EXPECT_NE(sample_depths(c, 5), sample_depths(config(0.3, 100, 1, 43), 5));
}

// Uniform omega: mean 1 + delta/2, standard deviation delta / sqrt(12).
TEST(Depths, UniformOnInterval) {
  const double delta = 0.3;
  const auto d = sample_depths(config(delta, 10000, 1, 9), 0);
  for (double x : d) {
    EXPECT_GE(x, 1.0);
    EXPECT_LE(x, 1.0 + delta);
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / double(d.size());
  const double se = delta / std::sqrt(12.0) / std::sqrt(double(d.size()));
  EXPECT_NEAR(mean, 1.0 + delta / 2.0, 3.0 * se);
}

TEST(Depths, RejectsBadConfig) {
  EXPECT_THROW(validate(config(-0.1, 10, 1)), std::invalid_argument);
  EXPECT_THROW(validate(config(NAN, 10, 1)), std::invalid_argument);
  EXPECT_THROW(validate(config(0.1, 0, 1)), std::invalid_argument);
  EXPECT_THROW(validate(config(0.1, 10, 0)), std::invalid_argument);
}

// Without disorder the chain of 401 wells is the finite lattice with N = 200.
TEST(EmpiricalIds, CleanChainEqualsFiniteLattice) {
  const auto c = config(0.0, 401, 2);
  const auto grid = uniform_grid(300);
  const auto ids = empirical_ids(c, grid);
  const Lattice& l = c.lattice;
  const FiniteSpectrum s = eigenvalues(200, l, band_edges(l, 0.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_DOUBLE_EQ(ids.mean[i], counting_function(grid[i], s)) << grid[i];
    EXPECT_EQ(ids.stderr_mean[i], 0.0);
  }
}

TEST(ChainCount, MatchesFdBox) {
  const auto c = config(0.3, 11, 1, 3);
  const auto depths = sample_depths(c, 0);
  for (int i = 1; i < 40; ++i) {
    const double e = -1.3 + 1.3 * i / 40.0;
    const int tm = chain_count_below(e, depths, c.lattice.kappa);
    const auto fd = static_cast<int>(fd_chain_count_below(e, depths, c.lattice.kappa));
    EXPECT_LE(std::abs(tm - fd), 1) << e;
  }
  EXPECT_NO_THROW(calibrate_counts(c, {-1.1, -0.6, -0.3, -0.05}));
  EXPECT_THROW(chain_count_below(0.0, depths, c.lattice.kappa), std::domain_error);
}

// Shared omega across delta: deeper wells can only lower the ground level.
TEST(ChainCount, LowestLevelMonotoneInDelta) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    double prev = 0.0;
    for (double delta : {0.0, 0.1, 0.3}) {
      const double e0 = chain_lowest_level(sample_depths(config(delta, 31, 1, 5), s), 2.8);
      if (delta > 0.0) {
        EXPECT_LT(e0, prev) << s << " " << delta;
      }
      EXPECT_EQ(chain_count_below(e0 - 1e-9, sample_depths(config(delta, 31, 1, 5), s), 2.8), 0);
      prev = e0;
    }
  }
}

TEST(EmpiricalIds, MonotoneAndZeroBelowSpectrum) {
  const auto c = config(0.3, 51, 12, 2);
  std::vector<double> grid;
  for (int i = 0; i < 60; ++i) grid.push_back(-1.35 + 1.34 * i / 59.0);
  const auto ids = empirical_ids(c, grid);
  EXPECT_EQ(ids.mean.front(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GE(ids.mean[i], ids.mean[i - 1]);
  EXPECT_THROW(empirical_ids(c, {0.1}), std::domain_error);
}

TEST(EmpiricalIds, IndependentOfThreadCount) {
  const auto c = config(0.3, 41, 16, 7);
  const auto grid = uniform_grid(40);
  const auto one = empirical_ids(c, grid, 1);
  const auto four = empirical_ids(c, grid, 4);
  EXPECT_EQ(one.mean, four.mean);
  EXPECT_EQ(one.stderr_mean, four.stderr_mean);
}

TEST(LifshitzFit, RecoversSyntheticExponent) {
  std::vector<double> e, ids;
  for (int i = 0; i < 50; ++i) {
    const double x = 1e-4 * std::pow(100.0, i / 49.0);
    e.push_back(-0.7 + x);
    ids.push_back(std::exp(-0.1 / std::sqrt(x)));
  }
  const LifshitzFit f = lifshitz_fit(e, ids, -0.7);
  EXPECT_NEAR(f.exponent, -0.5, 1e-6);
  EXPECT_NEAR(f.slope_lower_half, -0.5, 1e-6);
  EXPECT_NEAR(f.slope_upper_half, -0.5, 1e-6);
  EXPECT_EQ(f.points, 50);
  EXPECT_FALSE(f.mismatch);
}

TEST(LifshitzFit, PowerLawIsFlagged) {
  std::vector<double> e, ids;
  for (int i = 0; i < 50; ++i) {
    const double x = 1e-4 * std::pow(100.0, i / 49.0);
    e.push_back(-0.7 + x);
    ids.push_back(0.3 * std::sqrt(x));
  }
  EXPECT_TRUE(lifshitz_fit(e, ids, -0.7).mismatch);
}

TEST(LifshitzFit, NeedsEightPoints) {
  std::vector<double> e, ids;
  for (int i = 0; i < 7; ++i) {
    e.push_back(-0.5 + 0.01 * (i + 1));
    ids.push_back(0.01 * (i + 1));
  }
  EXPECT_THROW(lifshitz_fit(e, ids, -0.5), std::runtime_error);
  EXPECT_THROW(lifshitz_fit(e, {0.1}, -0.5), std::invalid_argument);
}

TEST(RunLifshitz, SmallRun) {
  const auto c = config(0.3, 101, 10, 1);
  LifshitzOptions opt;
  opt.grid_points = 40;
  const LifshitzRun r = run_lifshitz(c, opt);
  ASSERT_EQ(r.curve.e.size(), 40u);
  EXPECT_DOUBLE_EQ(r.curve.e.front(), r.lowest_level);
  EXPECT_LT(r.fit.e0_hat, r.lowest_level);
  EXPECT_LT(r.lowest_level, band_edges(c.lattice, 0.0).bands[0].e_min);  // below the clean band bottom
  EXPECT_GE(r.curve.mean.back(), opt.ids_cap);
  EXPECT_LT(r.fit.exponent, 0.0);
  const std::string csv = to_csv(r.curve, c.lattice, EnergyUnit::dimensionless);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "E,e,ids_mean,ids_stderr");
  opt.grid_points = 4;
  EXPECT_THROW(run_lifshitz(c, opt), std::invalid_argument);
}

}  // namespace
