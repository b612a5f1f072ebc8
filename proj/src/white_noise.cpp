#include "noisespec/white_noise.hpp"

#include <array>
#include <cmath>
#include <random>

#include "noisespec/chaos_transform.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/random.hpp"
#include "noisespec/spectral_measure.hpp"

namespace noisespec {

namespace {

constexpr std::size_t kPathChunk = 1024;

struct Sums {
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

McEstimate finish(double sum, double sum_sq, std::size_t n) {
  McEstimate e;
  e.samples = n;
  if (n == 0) return e;
  const double k = static_cast<double>(n);
  e.mean = sum / k;
  if (n > 1) {
    double var = std::max(0.0, (sum_sq / k - e.mean * e.mean) * k / (k - 1.0));
    e.std_error = std::sqrt(var / k);
  }
  return e;
}

// Strict ordered cell tuples i1 < ... < in.
std::vector<std::uint32_t> simplex_tuples(std::size_t cells, int order) {
  std::vector<std::uint32_t> out;
  const auto n = static_cast<std::size_t>(order);
  if (n > cells) return out;
  std::vector<std::uint32_t> pos(n);
  for (std::size_t j = 0; j < n; ++j) pos[j] = static_cast<std::uint32_t>(j);
  while (true) {
    out.insert(out.end(), pos.begin(), pos.end());
    std::size_t j = n;
    while (j > 0 && pos[j - 1] == cells - n + j - 1) --j;
    if (j == 0) break;
    ++pos[j - 1];
    for (std::size_t k = j; k < n; ++k) pos[k] = pos[k - 1] + 1;
  }
  return out;
}

double simplex_count(std::size_t cells, int order) {
  double out = 1.0;
  for (int i = 0; i < order; ++i) out *= static_cast<double>(cells - static_cast<std::size_t>(i)) / (i + 1);
  return out;
}

}  // namespace

double McEstimate::z_score(double target) const {
  if (std_error == 0.0) return mean == target ? 0.0 : std::copysign(INFINITY, mean - target);
  return (mean - target) / std_error;
}

BrownianGrid::BrownianGrid(TimeGrid grid, int channels, std::size_t paths, std::uint64_t seed)
    : grid_(std::move(grid)),
      channels_(channels),
      paths_(paths),
      seed_(seed),
      sigma_(std::sqrt(to_double(grid_.cell_width()))) {
  if (channels_ < 1) throw ValidationError("channel count must be positive");
  if (paths_ < 1) throw ValidationError("at least one path is required");
}

void BrownianGrid::path(std::size_t p, std::span<double> out) const {
  if (out.size() != path_size()) throw DimensionMismatch("path buffer has wrong size");
  auto rng = substream(seed_, p);
  std::normal_distribution<double> normal(0.0, sigma_);
  for (auto& x : out) x = normal(rng);
}

std::vector<double> BrownianGrid::path(std::size_t p) const {
  std::vector<double> out(path_size());
  path(p, out);
  return out;
}

std::vector<double> BrownianGrid::table() const {
  std::vector<double> out(paths_ * path_size());
  for (std::size_t p = 0; p < paths_; ++p) path(p, std::span(out).subspan(p * path_size(), path_size()));
  return out;
}

BrownianGrid sample_paths(const TimeGrid& grid, int channels, std::size_t paths, std::uint64_t seed) {
  return BrownianGrid(grid, channels, paths, seed);
}

std::vector<McEstimate> monte_carlo(const BrownianGrid& paths, std::size_t count,
                                    const std::function<void(std::span<const double>, std::span<double>)>& stats,
                                    std::size_t threads) {
  const std::size_t chunks = (paths.paths() + kPathChunk - 1) / kPathChunk;
  std::vector<Sums> parts(chunks);
  parallel_chunks(paths.paths(), kPathChunk, threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    Sums s{std::vector<double>(count, 0.0), std::vector<double>(count, 0.0)};
    std::vector<double> increments(paths.path_size());
    std::vector<double> values(count);
    for (std::size_t p = b; p < e; ++p) {
      paths.path(p, increments);
      stats(increments, values);
      for (std::size_t i = 0; i < count; ++i) {
        s.sum[i] += values[i];
        s.sum_sq[i] += values[i] * values[i];
      }
    }
    parts[chunk] = std::move(s);
  });
  Sums total = pairwise_reduce(std::move(parts), [count](const Sums& a, const Sums& b) {
    Sums out{std::vector<double>(count), std::vector<double>(count)};
    for (std::size_t i = 0; i < count; ++i) {
      out.sum[i] = a.sum[i] + b.sum[i];
      out.sum_sq[i] = a.sum_sq[i] + b.sum_sq[i];
    }
    return out;
  });
  std::vector<McEstimate> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(finish(total.sum[i], total.sum_sq[i], paths.paths()));
  return out;
}

double multiple_ito_integral(const SimplexKernel& kernel, const TimeGrid& grid,
                             std::span<const double> increments, int channels, int max_order) {
  if (kernel.order() > max_order) {
    throw ValidationError("kernel order " + std::to_string(kernel.order()) + " exceeds the maximum " +
                          std::to_string(max_order));
  }
  return kernel.integrate(increments, grid.cell_count(), channels);
}

ItoMoments ito_moments(const SimplexKernel& kernel, const BrownianGrid& paths, std::size_t threads) {
  auto est = monte_carlo(
      paths, 1,
      [&](std::span<const double> dx, std::span<double> out) {
        out[0] = multiple_ito_integral(kernel, paths.grid(), dx, paths.channels());
      },
      threads);
  auto sq = monte_carlo(
      paths, 1,
      [&](std::span<const double> dx, std::span<double> out) {
        double v = multiple_ito_integral(kernel, paths.grid(), dx, paths.channels());
        out[0] = v * v;
      },
      threads);
  return {est[0], sq[0], kernel.isometry_norm2(paths.grid())};
}

McEstimate mc_inner_product(const NoiseFunctional& f, const NoiseFunctional& g, const BrownianGrid& paths,
                            std::size_t threads) {
  if (!(f.grid() == paths.grid()) || !(g.grid() == paths.grid())) {
    throw GridMismatch("functionals and paths live on different grids");
  }
  return monte_carlo(
      paths, 1,
      [&](std::span<const double> dx, std::span<double> out) { out[0] = evaluate(f, dx) * evaluate(g, dx); },
      threads)[0];
}

NPointDensity npoint_density_estimate(const NoiseFunctional& f, int order, const BrownianGrid& paths,
                                      std::size_t threads) {
  if (!(f.grid() == paths.grid())) throw GridMismatch("functional and paths live on different grids");
  if (order < 0 || order > kDefaultMaxOrder) throw ValidationError("density order out of range");
  const std::size_t cells = paths.grid().cell_count();
  const auto d = static_cast<std::size_t>(paths.channels());
  const auto n = static_cast<std::size_t>(order);
  const std::vector<std::uint32_t> tuples = simplex_tuples(cells, order);
  const std::size_t tuple_count = n == 0 ? 1 : tuples.size() / n;
  std::size_t assignments = 1;
  for (std::size_t j = 0; j < n; ++j) assignments *= d;
  const std::size_t stats = tuple_count * assignments;
  const double inv_sigma = 1.0 / std::sqrt(to_double(paths.grid().cell_width()));

  auto accumulate_chunk = [&](std::size_t b, std::size_t e, Sums& s) {
    std::vector<double> dx(paths.path_size());
    for (std::size_t p = b; p < e; ++p) {
      paths.path(p, dx);
      const double fv = evaluate(f, dx);
      for (auto& x : dx) x *= inv_sigma;
      for (std::size_t t = 0; t < tuple_count; ++t) {
        for (std::size_t a = 0; a < assignments; ++a) {
          double v = fv;
          std::size_t code = a;
          for (std::size_t j = 0; j < n; ++j) {
            v *= dx[tuples[t * n + j] * d + code % d];
            code /= d;
          }
          s.sum[t * assignments + a] += v;
          s.sum_sq[t * assignments + a] += v * v;
        }
      }
    }
  };

  // Chunks are folded into the total in chunk order, whatever the thread count.
  Sums total{std::vector<double>(stats, 0.0), std::vector<double>(stats, 0.0)};
  const std::size_t chunks = (paths.paths() + kPathChunk - 1) / kPathChunk;
  const std::size_t wave = std::max<std::size_t>(1, threads);
  for (std::size_t first = 0; first < chunks; first += wave) {
    const std::size_t in_wave = std::min(wave, chunks - first);
    std::vector<Sums> parts(in_wave, Sums{std::vector<double>(stats, 0.0), std::vector<double>(stats, 0.0)});
    parallel_chunks(in_wave, 1, threads, [&](std::size_t c, std::size_t, std::size_t) {
      const std::size_t b = (first + c) * kPathChunk;
      accumulate_chunk(b, std::min(paths.paths(), b + kPathChunk), parts[c]);
    });
    for (const auto& part : parts) {
      for (std::size_t i = 0; i < stats; ++i) {
        total.sum[i] += part.sum[i];
        total.sum_sq[i] += part.sum_sq[i];
      }
    }
  }

  NPointDensity out;
  out.order = order;
  const double volume = std::pow(to_double(paths.grid().cell_width()), order);
  double total_var = 0.0;
  for (std::size_t t = 0; t < tuple_count; ++t) {
    DensityEntry entry;
    entry.cells.assign(tuples.begin() + static_cast<long>(t * n), tuples.begin() + static_cast<long>((t + 1) * n));
    double var = 0.0;
    for (std::size_t a = 0; a < assignments; ++a) {
      McEstimate c = finish(total.sum[t * assignments + a], total.sum_sq[t * assignments + a], paths.paths());
      entry.mass += c.mean * c.mean - c.std_error * c.std_error;
      const double se2 = c.std_error * c.std_error;
      var += 4.0 * c.mean * c.mean * se2 + 2.0 * se2 * se2;
    }
    entry.mass_stderr = std::sqrt(var);
    entry.density = entry.mass / volume;
    out.total_mass += entry.mass;
    total_var += var;
    out.entries.push_back(std::move(entry));
  }
  out.total_stderr = std::sqrt(total_var);
  const double window = to_double(paths.grid().end() - paths.grid().start());
  const double simplex_volume = simplex_count(cells, order) * volume;
  out.mean_density = order == 0 ? out.total_mass : out.total_mass / simplex_volume;
  (void)window;
  return out;
}

FiberDimension fiber_dimension(int channels, int points) {
  if (channels < 1 || points < 0) throw ValidationError("fiber dimension needs d >= 1 and n >= 0");
  const auto d = static_cast<std::size_t>(channels);
  const auto n = static_cast<std::size_t>(points);
  std::size_t count = 1;
  for (std::size_t j = 0; j < n; ++j) count *= d;

  // assignment code a -> channel of cell j is digit j of a in base d
  auto channel_of = [d](std::size_t code, std::size_t j) {
    for (std::size_t i = 0; i < j; ++i) code /= d;
    return code % d;
  };
  // three-point Gauss-Hermite rule, exact for polynomials of degree <= 5
  const std::array<double, 3> nodes{-std::sqrt(3.0), 0.0, std::sqrt(3.0)};
  const std::array<double, 3> weights{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  auto gaussian_moment = [&](int power) {
    double s = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) s += weights[q] * std::pow(nodes[q], power);
    return s;
  };

  FiberDimension out;
  out.expected = count;
  out.count = count;
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a; b < count; ++b) {
      double inner = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < d; ++c) {
          int power = (channel_of(a, j) == c ? 1 : 0) + (channel_of(b, j) == c ? 1 : 0);
          inner *= gaussian_moment(power);
        }
      }
      if (a == b) {
        out.max_norm_error = std::max(out.max_norm_error, std::abs(inner - 1.0));
      } else {
        out.max_off_diagonal = std::max(out.max_off_diagonal, std::abs(inner));
      }
    }
  }
  return out;
}

std::vector<EndpointMass> endpoint_mass_profile(const NoiseFunctional& f, const Rational& t,
                                                std::span<const double> epsilons) {
  const TimeGrid& grid = f.grid();
  if (t < grid.start() || t > grid.end()) throw ValidationError("endpoint outside the grid window");
  SpectralMeasure mu = spectral_measure_of(f);
  std::vector<EndpointMass> out;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw ValidationError("epsilon must be positive");
    Rational r = rational_from_double(eps);
    ElementarySet near = ElementarySet::covering(grid, t - r, t + r);
    EndpointMass m;
    m.epsilon = eps;
    m.covered = near.is_empty() ? CellRange{} : near.ranges().front();
    m.mass = mu.total_mass() - mass_of_subsets_of(mu, set_complement(near));
    out.push_back(m);
  }
  return out;
}

}  // namespace noisespec
