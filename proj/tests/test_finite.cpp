#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sawtooth/finite_lattice.hpp"

namespace {

using namespace sawtooth;

struct Chain : ::testing::Test {
  Lattice l = Lattice::from_kappa(2.8);
  BandTable t = band_edges(l, 0.0);
};

double max_abs(const Mat2& m) {
  return std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a21), std::abs(m.a22)});
}

TEST(BoundaryVectors, DecayRates) {
  const auto [left, right] = boundary_vectors(-0.25, 2.8);
  const double q = std::pow(2.8, 1.5) * 0.5;
  EXPECT_DOUBLE_EQ(left.x, 1.0);
  EXPECT_DOUBLE_EQ(left.y, -q);
  EXPECT_DOUBLE_EQ(right.y, q);
  EXPECT_THROW(boundary_vectors(0.0, 2.8), std::domain_error);
  EXPECT_THROW(boundary_vectors(-1.5, 2.8), std::domain_error);
}

// The Chebyshev reduction of M^n against explicit repeated products.
TEST_F(Chain, ChebyshevMatchesRepeatedProducts) {
  for (Pairing pairing : {Pairing::decaying, Pairing::boundary_vectors}) {
    for (int N = 0; N <= 10; ++N) {
      for (double e : {-0.95, -0.64, -0.635, -0.5, -0.2, -0.15, -0.08, -0.03}) {
        const Mat2 m = monodromy(e, l);
        Mat2 power = Mat2::identity();
        for (int k = 0; k < 2 * N + 1; ++k) power = m * power;
        const double sgn = pairing == Pairing::decaying ? 1.0 : -1.0;
        const double qt = std::sqrt(l.kappa) * std::sqrt(-e);
        const Vec2 u{1.0, sgn * qt};
        const Vec2 w{sgn * qt, 1.0};
        const double ref = dot(w, power * u);
        const SecularValue s = secular_value(e, N, l, pairing);
        const double got = s.value * std::exp(s.log_scale);
        const double scale = max_abs(power) * (1.0 + qt) * (1.0 + qt);
        EXPECT_NEAR(got, ref, 1e-9 * scale) << N << " " << e;
      }
    }
  }
}

// Sign of the decaying pairing against RK4 shooting across the whole chain
// in (psi, psi_s): start (1, q) at the left cusp, test q psi + psi_s at the right.
TEST_F(Chain, SignMatchesShooting) {
  for (int N : {0, 2}) {
    const double edge = 2.0 * N + 1.0;
    int compared = 0;
    for (int i = 1; i < 200; ++i) {
      const double e = -1.0 + i / 200.0;
      const double q = std::pow(l.kappa, 1.5) * std::sqrt(-e);
      const Vec2 y = testing_oracles::rk4({1.0, q}, -edge, edge, e, l.kappa, 4000 * (2 * N + 1));
      const double g = q * y.x + y.y;
      const double mag = std::abs(q * y.x) + std::abs(y.y);
      if (std::abs(g) < 1e-4 * mag) continue;  // too close to a level
      const SecularValue s = secular_value(e, N, l);
      EXPECT_EQ(std::signbit(g), std::signbit(s.value)) << N << " " << e;
      ++compared;
    }
    EXPECT_GT(compared, 150);
  }
}

// Decaying pairing against the fd eigen-solver in a padded Dirichlet box.
TEST_F(Chain, DecayingPairingMatchesFdBox) {
  for (int N : {0, 5}) {
    const FiniteSpectrum s = eigenvalues(N, l, t);
    const auto fd = testing_oracles::fd_chain_levels(N, l.kappa, s.eigenvalues.size() + 1);
    ASSERT_EQ(fd.eigenvalues.size(), s.eigenvalues.size() + 1);
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) {
      EXPECT_NEAR(s.eigenvalues[k], fd.eigenvalues[k], 1e-5) << N << " " << k;
      EXPECT_LT(fd.error_estimates[k], 1e-6);
    }
    // The box has no further level below 0.
    EXPECT_GT(fd.eigenvalues.back(), 0.0) << N;
  }
}

TEST_F(Chain, BoundaryVectorPairingDisagreesWithFdBox) {
  const FiniteSpectrum dec = eigenvalues(5, l, t);
  const FiniteSpectrum bv = eigenvalues(5, l, t, Pairing::boundary_vectors);
  EXPECT_NE(bv.eigenvalues.size(), dec.eigenvalues.size());
  EXPECT_EQ(bv.per_band_counts, (std::vector<int>{9, 9}));
}

// Observed level count: 2N+1 per band (one per well), none in gaps.
TEST_F(Chain, LevelsPerBandEqualWellCount) {
  for (int N : {0, 1, 5, 10, 20}) {
    const FiniteSpectrum s = eigenvalues(N, l, t);
    ASSERT_EQ(s.per_band_counts.size(), 2u);
    EXPECT_EQ(s.per_band_counts[0], 2 * N + 1) << N;
    EXPECT_EQ(s.per_band_counts[1], 2 * N + 1) << N;
    EXPECT_EQ(s.diagnostics.size(), 2u);  // differs from the 2N+2 expectation
    for (int g : gap_sign_changes(N, l, t, 400)) EXPECT_EQ(g, 0) << N;
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) {
      const Band& b = t.bands[static_cast<std::size_t>(s.band_of[k])];
      EXPECT_TRUE(b.contains(s.eigenvalues[k]));
      if (k > 0) {
        EXPECT_LT(s.eigenvalues[k - 1], s.eigenvalues[k]);
      }
    }
  }
}

TEST(CarbonChain, ThinBandsAreFlaggedUnresolved) {
  const Lattice c = Lattice::preset(Preset::carbon);
  const BandTable t = band_edges(c, 0.0);
  const FiniteSpectrum s = eigenvalues(2, c, t);
  ASSERT_EQ(s.per_band_counts.size(), 15u);
  for (std::size_t p = 0; p < 15; ++p) {
    EXPECT_EQ(s.per_band_counts[p], 5) << p;
    EXPECT_EQ(s.band_resolved[p], t.bands[p].width() >= 2e-12) << p;
  }
  EXPECT_FALSE(s.band_resolved[2]);
  EXPECT_TRUE(s.band_resolved[3]);
  EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
}

TEST_F(Chain, CountingFunctionPlateaus) {
  for (int N : {0, 3, 20}) {
    const FiniteSpectrum s = eigenvalues(N, l, t);
    EXPECT_EQ(counting_function(-0.9, s), 0.0);
    EXPECT_DOUBLE_EQ(counting_function(-0.4, s), 0.5);
    EXPECT_DOUBLE_EQ(counting_function(-0.01, s), 1.0);
  }
}

TEST_F(Chain, ConvergenceUnderDoubling) {
  const auto rows = convergence_report(l, {10, 20, 40, 80}, uniform_grid(1000));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double ratio = rows[k - 1].sup_error / rows[k].sup_error;
    EXPECT_GE(ratio, 1.5) << rows[k].N;
    EXPECT_LE(ratio, 3.0) << rows[k].N;
    EXPECT_LT(rows[k].mean_error, rows[k - 1].mean_error);
  }
  const double s = decay_exponent(rows);
  EXPECT_GE(s, 0.5);
  EXPECT_LE(s, 1.5);
}

TEST_F(Chain, RejectsBadInput) {
  EXPECT_THROW(eigenvalues(-1, l, t), std::invalid_argument);
  EXPECT_THROW(secular_value(0.1, 2, l), std::domain_error);
  EXPECT_THROW(secular_value(-1.0, 2, l), std::domain_error);
  EXPECT_THROW(convergence_report(l, {20, 10}, uniform_grid(10)), std::invalid_argument);
  EXPECT_THROW(convergence_report(l, {}, uniform_grid(10)), std::invalid_argument);
  EXPECT_THROW(eigenvalues(2, l, band_edges(l, -0.5)), std::invalid_argument);
}

TEST(UniformGrid, Midpoints) {
  const auto g = uniform_grid(4, -1.0, 0.0);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g[0], -0.875);
  EXPECT_DOUBLE_EQ(g[3], -0.125);
}

TEST_F(Chain, CsvSchemas) {
  const FiniteSpectrum s = eigenvalues(2, l, t);
  const std::string csv = to_csv(s, l, EnergyUnit::dimensionless);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,e,E_unit,band");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 10);
  const auto rows = convergence_report(l, {1, 2}, uniform_grid(50));
  const std::string rc = to_csv(rows);
  EXPECT_EQ(rc.substr(0, rc.find('\n')), "N,sup_error,mean_error");
  const Lattice c = Lattice::preset(Preset::carbon);
  const FiniteSpectrum sc = eigenvalues(0, c, band_edges(c, 0.0));
  const std::string ev = to_csv(sc, c, EnergyUnit::ev);
  const auto second = ev.substr(ev.find('\n') + 1);
  const auto fields = split_csv_line(second.substr(0, second.find('\n')));
  EXPECT_NEAR(parse_double(fields[2]), 489.99 * parse_double(fields[1]), 1e-9);
}

}  // namespace
