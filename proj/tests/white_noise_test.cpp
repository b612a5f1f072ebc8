#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "noisespec/errors.hpp"
#include "noisespec/spectral_measure.hpp"
#include "noisespec/white_noise.hpp"

using namespace noisespec;

namespace {

NoiseFunctional ito_unit(int order, int level) {
  return NoiseFunctional::brownian(TimeGrid::dyadic(level), BrownianProgram::ito(SimplexKernel::constant(order, 1.0)));
}

}  // namespace

TEST(BrownianGrid, IncrementVariance) {
  BrownianGrid paths(TimeGrid::dyadic(8), 1, 10000, 3);
  const double h = 1.0 / 256.0;
  std::vector<double> sum(256, 0.0), sq(256, 0.0);
  for (std::size_t p = 0; p < paths.paths(); ++p) {
    auto dx = paths.path(p);
    for (std::size_t i = 0; i < 256; ++i) {
      sum[i] += dx[i];
      sq[i] += dx[i] * dx[i];
    }
  }
  // sample variance of k normals has relative sd sqrt(2/k)
  const double k = 10000.0, sd = std::sqrt(2.0 / k) * h;
  for (std::size_t i = 0; i < 256; ++i) {
    const double var = sq[i] / k - std::pow(sum[i] / k, 2);
    EXPECT_LT(std::abs(var - h), 5.0 * sd) << i;
  }
}

TEST(BrownianGrid, ChannelsUncorrelated) {
  BrownianGrid paths(TimeGrid::dyadic(4), 2, 20000, 5);
  auto est = monte_carlo(paths, 1, [](std::span<const double> dx, std::span<double> out) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 16; ++i) acc += dx[2 * i] * dx[2 * i + 1];
    out[0] = acc;
  });
  EXPECT_LT(std::abs(est[0].z_score(0.0)), 4.0);
}

TEST(BrownianGrid, SeedReproducible) {
  BrownianGrid a(TimeGrid::dyadic(5), 2, 50, 42), b(TimeGrid::dyadic(5), 2, 50, 42), c(TimeGrid::dyadic(5), 2, 50, 43);
  EXPECT_EQ(a.table(), b.table());
  EXPECT_NE(a.table(), c.table());
  auto table = a.table();
  std::vector<double> row(table.begin() + 17 * 64, table.begin() + 18 * 64);
  EXPECT_EQ(a.path(17), row);
}

TEST(MultipleIto, OrderOneIsSum) {
  TimeGrid g = TimeGrid::dyadic(3);
  std::vector<double> dx{0.1, -0.2, 0.3, 0.05, -0.4, 0.2, 0.0, 0.7};
  const double total = std::accumulate(dx.begin(), dx.end(), 0.0);
  EXPECT_NEAR(multiple_ito_integral(SimplexKernel::constant(1, 1.0), g, dx), total, 1e-15);
}

TEST(MultipleIto, OrderTwoIdentity) {
  TimeGrid g = TimeGrid::dyadic(4);
  BrownianGrid paths(g, 1, 20, 7);
  for (std::size_t p = 0; p < 20; ++p) {
    auto dx = paths.path(p);
    double s = 0.0, q = 0.0;
    for (double x : dx) {
      s += x;
      q += x * x;
    }
    EXPECT_NEAR(multiple_ito_integral(SimplexKernel::constant(2, 1.0), g, dx), (s * s - q) / 2.0, 1e-12);
  }
}

TEST(MultipleIto, SeparableMatchesTable) {
  TimeGrid g = TimeGrid::dyadic(3);
  std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8}, b{0.5, -1, 2, 0, 1, 1, -3, 2};
  std::map<SpectralIndex, double> entries;
  for (std::uint32_t i = 0; i < 8; ++i) {
    for (std::uint32_t j = i + 1; j < 8; ++j) entries[rademacher_index({i, j})] = a[i] * b[j];
  }
  auto sep = SimplexKernel::separable({a, b});
  auto tab = SimplexKernel::table(2, entries);
  BrownianGrid paths(g, 1, 10, 1);
  for (std::size_t p = 0; p < 10; ++p) {
    auto dx = paths.path(p);
    EXPECT_NEAR(multiple_ito_integral(sep, g, dx), multiple_ito_integral(tab, g, dx), 1e-12);
  }
  EXPECT_NEAR(sep.isometry_norm2(g), tab.isometry_norm2(g), 1e-12);
}

TEST(MultipleIto, OrderOverflow) {
  TimeGrid g = TimeGrid::dyadic(3);
  std::vector<double> dx(8, 0.1);
  EXPECT_THROW(multiple_ito_integral(SimplexKernel::constant(5, 1.0), g, dx), ValidationError);
  EXPECT_NO_THROW(multiple_ito_integral(SimplexKernel::constant(5, 1.0), g, dx, 1, 5));
}

TEST(MultipleIto, IsometryAndOrthogonality) {
  TimeGrid g = TimeGrid::dyadic(7);
  BrownianGrid paths(g, 1, 20000, 11);
  auto k1 = SimplexKernel::constant(1, 1.0), k2 = SimplexKernel::constant(2, 1.0);
  auto m1 = ito_moments(k1, paths, 4), m2 = ito_moments(k2, paths, 4);
  EXPECT_DOUBLE_EQ(m1.isometry, 1.0);
  EXPECT_NEAR(m2.isometry, 0.5 * (1.0 - 1.0 / 128.0), 1e-15);
  EXPECT_LT(std::abs(m1.second_moment.z_score(m1.isometry)), 3.0);
  EXPECT_LT(std::abs(m2.second_moment.z_score(m2.isometry)), 3.0);
  auto cross = monte_carlo(paths, 1, [&](std::span<const double> dx, std::span<double> out) {
    out[0] = multiple_ito_integral(k1, g, dx) * multiple_ito_integral(k2, g, dx);
  });
  EXPECT_LT(std::abs(cross[0].z_score(0.0)), 3.0);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResult) {
  BrownianGrid paths(TimeGrid::dyadic(6), 1, 5000, 2);
  auto k = SimplexKernel::constant(2, 1.0);
  auto a = ito_moments(k, paths, 1), b = ito_moments(k, paths, 5);
  EXPECT_EQ(a.second_moment.mean, b.second_moment.mean);
  EXPECT_EQ(a.second_moment.std_error, b.second_moment.std_error);
}

TEST(InnerProduct, HermiteRouteMatchesMonteCarlo) {
  TimeGrid g = TimeGrid::dyadic(5);
  auto i2 = NoiseFunctional::brownian(g, BrownianProgram::ito(SimplexKernel::constant(2, 1.0)));
  // polynomial g = (sum dX)^2 + xi_3 xi_7
  BrownianProgram p;
  p.terms.push_back({1.0, {SimplexKernel::constant(1, 1.0), SimplexKernel::constant(1, 1.0)}});
  p.terms.push_back({1.0, {IncrementPolynomial{3, 0, {0, 1}}, IncrementPolynomial{7, 0, {0, 1}}}});
  auto poly = NoiseFunctional::brownian(g, p);
  const double exact = inner_product(i2, poly);
  // (sum dX)^2 = 2 I_2 + sum dX^2, so E[I_2 (sum dX)^2] = 2 E[I_2^2]; xi_3 xi_7 adds sqrt(h)^2 = h
  const double h = 1.0 / 32.0;
  EXPECT_NEAR(exact, 2.0 * 0.5 * (1.0 - h) + h, 1e-12);
  BrownianGrid paths(g, 1, 40000, 13);
  auto mc = mc_inner_product(i2, poly, paths, 4);
  EXPECT_LT(std::abs(mc.z_score(exact)), 3.5);
}

TEST(NPointDensity, FirstOrderUnitKernel) {
  auto f = ito_unit(1, 6);
  BrownianGrid paths(f.grid(), 1, 20000, 17);
  auto d = npoint_density_estimate(f, 1, paths, 4);
  EXPECT_NEAR(d.mean_density, 1.0, 0.05);
  EXPECT_EQ(d.entries.size(), 64u);
}

TEST(NPointDensity, SecondOrderUnitKernel) {
  auto f = ito_unit(2, 4);
  BrownianGrid paths(f.grid(), 1, 20000, 19);
  auto d = npoint_density_estimate(f, 2, paths, 4);
  EXPECT_EQ(d.entries.size(), 120u);
  EXPECT_NEAR(d.mean_density, 1.0, 0.1);
  auto other = npoint_density_estimate(f, 1, paths, 4);
  EXPECT_NEAR(other.total_mass, 0.0, 4.0 * other.total_stderr + 1e-3);
}

TEST(NPointDensity, ConstantHasNoPointMassBeyondNoise) {
  BrownianProgram p;
  p.constant = 2.0;
  auto f = NoiseFunctional::brownian(TimeGrid::dyadic(3), p);
  BrownianGrid paths(f.grid(), 1, 20000, 1);
  for (int n = 1; n <= 2; ++n) {
    auto d = npoint_density_estimate(f, n, paths);
    for (const auto& e : d.entries) EXPECT_NEAR(e.mass, 0.0, 4.0 * e.mass_stderr + 1e-12);
    EXPECT_NEAR(d.total_mass, 0.0, 4.0 * d.total_stderr);
  }
}

TEST(FiberDimension, CountsChannelAssignments) {
  for (int d = 1; d <= 3; ++d) {
    for (int n = 0; n <= 3; ++n) {
      auto r = fiber_dimension(d, n);
      EXPECT_EQ(r.count, static_cast<std::size_t>(std::pow(d, n)));
      EXPECT_LE(r.max_off_diagonal, 1e-10);
      EXPECT_LE(r.max_norm_error, 1e-10);
    }
  }
  EXPECT_EQ(fiber_dimension(1, 7).count, 1u);
  EXPECT_EQ(fiber_dimension(2, 2).count, 4u);
  EXPECT_THROW(fiber_dimension(0, 1), ValidationError);
}

TEST(EndpointMass, UnitIntegral) {
  auto f = ito_unit(1, 10);
  std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  auto profile = endpoint_mass_profile(f, Rational(1, 2), eps);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    EXPECT_NEAR(profile[i].mass, 2.0 * eps[i], 1e-12);
    if (i) EXPECT_LE(profile[i].mass, profile[i - 1].mass);
  }
}

TEST(EndpointMass, FarCellVanishes) {
  TimeGrid g = TimeGrid::dyadic(4);
  auto f = NoiseFunctional::chaos(ChaosCoefficients::rademacher(g, {{{2}, 1.0}}));
  std::vector<double> eps{0.1, 0.05};
  for (const auto& m : endpoint_mass_profile(f, Rational(3, 4), eps)) EXPECT_EQ(m.mass, 0.0);
  auto near = endpoint_mass_profile(f, Rational(3, 16), eps);
  EXPECT_DOUBLE_EQ(near[1].mass, 1.0);
}

TEST(EndpointMass, MonotoneForRandomLowOrder) {
  TimeGrid g = TimeGrid::dyadic(6);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<CellSet, double>> terms;
    for (int t = 0; t < 30; ++t) {
      std::uint32_t a = rng() % 64, b = rng() % 64;
      terms.push_back({a == b ? CellSet{a} : CellSet{std::min(a, b), std::max(a, b)}, normal(rng)});
    }
    auto f = NoiseFunctional::chaos(ChaosCoefficients::rademacher(g, terms));
    std::vector<double> eps{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    auto p = endpoint_mass_profile(f, Rational(5, 16), eps);
    for (std::size_t i = 1; i < p.size(); ++i) EXPECT_LE(p[i].mass, p[i - 1].mass + 1e-15);
  }
}
