#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "noisespec/brownian_program.hpp"
#include "noisespec/noise_functional.hpp"
#include "noisespec/time_grid.hpp"

namespace noisespec {

/// Gaussian increments of a d-channel Brownian motion on a grid, generated
/// on demand. Path p is drawn from substream(seed, p), so any path can be
/// regenerated independently and results do not depend on thread count.
class BrownianGrid {
 public:
  BrownianGrid(TimeGrid grid, int channels, std::size_t paths, std::uint64_t seed);

  const TimeGrid& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::size_t paths() const { return paths_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t path_size() const { return grid_.cell_count() * static_cast<std::size_t>(channels_); }

  /// Increments of path p, cell-major, each with variance = cell length.
  void path(std::size_t p, std::span<double> out) const;
  std::vector<double> path(std::size_t p) const;
  /// All paths, path-major (paths x cells x channels).
  std::vector<double> table() const;

 private:
  TimeGrid grid_;
  int channels_;
  std::size_t paths_;
  std::uint64_t seed_;
  double sigma_;
};

BrownianGrid sample_paths(const TimeGrid& grid, int channels, std::size_t paths, std::uint64_t seed);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  /// (mean - target) / std_error
  double z_score(double target) const;
};

/// Evaluates `stats(increments, out)` on every path and estimates the mean
/// of each of the `count` statistics. Per-chunk sums are reduced in a fixed
/// pairwise order.
std::vector<McEstimate> monte_carlo(const BrownianGrid& paths, std::size_t count,
                                    const std::function<void(std::span<const double>, std::span<double>)>& stats,
                                    std::size_t threads = 1);

inline constexpr int kDefaultMaxOrder = 4;

/// Iterated sum over i1 < ... < in of kernel * dX_{i1} ... dX_{in}.
double multiple_ito_integral(const SimplexKernel& kernel, const TimeGrid& grid,
                             std::span<const double> increments, int channels = 1,
                             int max_order = kDefaultMaxOrder);

struct ItoMoments {
  McEstimate mean;
  McEstimate second_moment;
  /// Exact discrete isometry value: sum over the simplex of kernel^2 * cell volumes.
  double isometry = 0.0;
};

ItoMoments ito_moments(const SimplexKernel& kernel, const BrownianGrid& paths, std::size_t threads = 1);

/// Monte Carlo estimate of E[f g] for Gaussian-backend functionals.
McEstimate mc_inner_product(const NoiseFunctional& f, const NoiseFunctional& g, const BrownianGrid& paths,
                            std::size_t threads = 1);

struct DensityEntry {
  CellSet cells;
  /// Estimated spectral mass of this cell tuple (squared Hermite projection).
  double mass = 0.0;
  double mass_stderr = 0.0;
  /// mass divided by the tuple's cell volume.
  double density = 0.0;
};

struct NPointDensity {
  int order = 0;
  std::vector<DensityEntry> entries;
  double total_mass = 0.0;
  double total_stderr = 0.0;
  /// total_mass divided by the simplex volume of the window.
  double mean_density = 0.0;
};

/// Estimates the n-point spectral mass of f per ordered cell tuple by Monte
/// Carlo Hermite projection c = E[f * xi_{i1} * ... * xi_{in}], summed over
/// channel assignments. Squared projections are debiased by their sampling
/// variance.
NPointDensity npoint_density_estimate(const NoiseFunctional& f, int order, const BrownianGrid& paths,
                                      std::size_t threads = 1);

struct FiberDimension {
  std::size_t count = 0;
  std::size_t expected = 0;
  /// Largest |<a, b>| between distinct channel-tagged characters.
  double max_off_diagonal = 0.0;
  /// Largest |<a, a> - 1|.
  double max_norm_error = 0.0;
};

/// Builds the d^n channel-tagged characters over an n-cell support and checks
/// orthonormality by Gauss-Hermite quadrature.
FiberDimension fiber_dimension(int channels, int points);

struct EndpointMass {
  double epsilon = 0.0;
  /// Cells meeting (t - eps, t + eps).
  CellRange covered;
  /// mu_f{C : C meets the covered cells}.
  double mass = 0.0;
};

/// Spectral mass of sets approaching t within each epsilon. Equals
/// ||f - E(f | F_{window minus (t-eps, t+eps)})||^2.
std::vector<EndpointMass> endpoint_mass_profile(const NoiseFunctional& f, const Rational& t,
                                                std::span<const double> epsilons);

}  // namespace noisespec
