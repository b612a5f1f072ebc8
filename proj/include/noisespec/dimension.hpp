#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "noisespec/families.hpp"
#include "noisespec/time_grid.hpp"

namespace noisespec {

/// Number of level-j boxes (base^j boxes of the grid's base) meeting S.
std::size_t box_count(const TimeGrid& grid, const CellSet& cells, int j);

struct DimensionEstimate {
  std::string family;
  int level = 0;
  int base = 2;
  /// Box levels j used in the fit, coarse to fine.
  std::vector<int> scales;
  /// Mean log2 box count per scale, and its standard error.
  std::vector<double> mean_log2_counts;
  std::vector<double> stderrs;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  std::size_t samples = 0;
  std::size_t empty_samples = 0;
  std::uint64_t seed = 0;
  int fit_lo = 0;
  int fit_hi = 0;
};

/// Samples `samples` spectral sets of the family member at `level` and fits
/// mean log2 box count against log2 of the inverse box size, over box levels
/// 2..level-2 (widened when the grid is too coarse for that window).
DimensionEstimate estimate_dimension(const RefinementFamily& family, int level, std::size_t samples,
                                     std::uint64_t seed, std::size_t threads = 1);

std::vector<DimensionEstimate> estimate_dimension(const RefinementFamily& family, const std::vector<int>& levels,
                                                  std::size_t samples, std::uint64_t seed, std::size_t threads = 1);

}  // namespace noisespec
