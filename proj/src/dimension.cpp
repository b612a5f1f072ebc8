#include "noisespec/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "noisespec/errors.hpp"
#include "noisespec/random.hpp"

namespace noisespec {

std::size_t box_count(const TimeGrid& grid, const CellSet& cells, int j) {
  if (!grid.level()) throw Unsupported("box counting needs a grid with a refinement level");
  const int level = *grid.level();
  if (j < 0 || j > level) throw ValidationError("box level must lie in [0, grid level]");
  std::size_t width = 1;
  for (int i = j; i < level; ++i) width *= static_cast<std::size_t>(grid.base());
  std::size_t count = 0;
  std::size_t last = SIZE_MAX;
  // cells are sorted, so boxes appear in nondecreasing order
  for (auto c : cells) {
    std::size_t box = c / width;
    if (box != last) {
      ++count;
      last = box;
    }
  }
  return count;
}

DimensionEstimate estimate_dimension(const RefinementFamily& family, int level, std::size_t samples,
                                     std::uint64_t seed, std::size_t threads) {
  if (samples == 0) throw ValidationError("at least one sample is required");
  const TimeGrid grid = family.grid_at(level);
  if (!grid.level()) throw Unsupported("family grid has no refinement level");
  const int depth = *grid.level();

  DimensionEstimate out;
  out.family = family.name;
  out.level = level;
  out.base = grid.base();
  out.seed = seed;
  out.fit_lo = 2;
  out.fit_hi = depth - 2;
  if (out.fit_hi - out.fit_lo < 1) {
    out.fit_lo = 1;
    out.fit_hi = depth - 1;
  }
  if (out.fit_hi - out.fit_lo < 1) {
    out.fit_lo = 0;
    out.fit_hi = depth;
  }
  if (out.fit_hi - out.fit_lo < 1) throw ValidationError("grid too coarse for a dimension fit");

  std::function<CellSet(std::mt19937_64&)> draw;
  if (family.sampler_at) {
    draw = [&family, level](std::mt19937_64& rng) { return family.sampler_at(level, rng); };
  } else {
    SpectralMeasure mu = family_measure(family, level);
    draw = [mu](std::mt19937_64& rng) { return sample_sets(mu, 1, rng()).front(); };
  }

  const std::size_t scale_count = static_cast<std::size_t>(out.fit_hi - out.fit_lo + 1);
  std::vector<std::vector<double>> logs(samples);
  std::vector<char> empty(samples, 0);
  parallel_chunks(samples, 256, threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      auto rng = substream(seed, s);
      CellSet set = draw(rng);
      if (set.empty()) {
        empty[s] = 1;
        continue;
      }
      std::sort(set.begin(), set.end());
      logs[s].resize(scale_count);
      std::size_t prev = 0;
      for (std::size_t i = 0; i < scale_count; ++i) {
        std::size_t count = box_count(grid, set, out.fit_lo + static_cast<int>(i));
        if (count < prev) throw std::logic_error("box count increased under coarsening");
        prev = count;
        logs[s][i] = std::log2(static_cast<double>(count));
      }
    }
  });

  std::size_t used = 0;
  std::vector<double> sum(scale_count, 0.0), sum_sq(scale_count, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    if (empty[s]) continue;
    ++used;
    for (std::size_t i = 0; i < scale_count; ++i) {
      sum[i] += logs[s][i];
      sum_sq[i] += logs[s][i] * logs[s][i];
    }
  }
  out.samples = used;
  out.empty_samples = samples - used;
  if (used == 0) throw ValidationError("all sampled spectral sets were empty");

  const double n = static_cast<double>(used);
  const double log2_base = std::log2(static_cast<double>(grid.base()));
  std::vector<double> xs;
  for (std::size_t i = 0; i < scale_count; ++i) {
    const int j = out.fit_lo + static_cast<int>(i);
    const double mean = sum[i] / n;
    const double var = used > 1 ? std::max(0.0, (sum_sq[i] / n - mean * mean) * n / (n - 1.0)) : 0.0;
    out.scales.push_back(j);
    out.mean_log2_counts.push_back(mean);
    out.stderrs.push_back(std::sqrt(var / n));
    xs.push_back(j * log2_base);
  }

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(out.mean_log2_counts.begin(), out.mean_log2_counts.end(), 0.0) /
                    static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = out.mean_log2_counts[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

std::vector<DimensionEstimate> estimate_dimension(const RefinementFamily& family, const std::vector<int>& levels,
                                                  std::size_t samples, std::uint64_t seed, std::size_t threads) {
  std::vector<DimensionEstimate> out;
  for (int level : levels) out.push_back(estimate_dimension(family, level, samples, seed, threads));
  return out;
}

}  // namespace noisespec
