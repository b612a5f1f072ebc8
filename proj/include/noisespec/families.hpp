#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "noisespec/noise_functional.hpp"
#include "noisespec/spectral_measure.hpp"

namespace noisespec {

/// A sequence of functionals indexed by refinement level k.
///
/// Families may provide a direct spectral sampler and an exact cardinality
/// profile for levels where the functional itself is too large to expand.
struct RefinementFamily {
  std::string name;
  std::string description;
  std::map<std::string, std::string> metadata;
  std::map<std::string, double> params;

  std::function<TimeGrid(int)> grid_at;
  std::function<bool(int)> materializable;
  std::function<NoiseFunctional(int)> functional_at;
  /// Draws one spectral set at level k (optional).
  std::function<CellSet(int, std::mt19937_64&)> sampler_at;
  /// Exact mass per cardinality at level k (optional).
  std::function<CardinalityProfile(int)> exact_profile;
  /// Total spectral mass at level k.
  std::function<double(int)> total_mass_at;
};

/// single-coordinate, parity, level-one, white-noise-i1, white-noise-i2,
/// majority3, tribes, cantor-calibration.
std::vector<RefinementFamily> builtin_families();
RefinementFamily find_family(const std::string& name, const std::map<std::string, double>& params = {});

/// Family member as a lazily materialized functional.
NoiseFunctional family_functional(const std::string& name, int level,
                                  const std::map<std::string, double>& params = {});

/// Exact measure when the member can be expanded, sampler-backed otherwise.
SpectralMeasure family_measure(const RefinementFamily& family, int level);

/// Smallest ternary depth m with 3^m >= 2^k.
int majority_depth(int level);
/// Tribe width used at level k: the w whose tribes of w cells (as many as
/// fit in 2^k) make P(f = -1) closest to 1/2.
int tribes_width(int level);
/// 1 when all base-3 digits of the cell index avoid 1 (middle-thirds set).
bool is_cantor_cell(std::size_t cell, int depth);

}  // namespace noisespec
