#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisespec/chaos_coefficients.hpp"
#include "noisespec/families.hpp"
#include "noisespec/noise_functional.hpp"
#include "noisespec/spectral_measure.hpp"

namespace noisespec {

/// Part of f with spectral support on single points.
NoiseFunctional first_chaos_extract(const NoiseFunctional& f);

/// Interval-indexed family f_{s,t} obtained by restricting the first chaos
/// of a functional to the cells of (s,t). Boundaries are grid indices.
class AdditiveIntegral {
 public:
  static AdditiveIntegral of(const NoiseFunctional& f);

  const TimeGrid& grid() const { return first_chaos_.grid(); }
  /// No first-chaos content: every member is zero.
  bool empty() const { return first_chaos_.nonzero_count() == 0; }
  const ChaosCoefficients& first_chaos() const { return first_chaos_; }

  /// f_{s,t} for boundary indices s <= t.
  NoiseFunctional member(std::size_t s, std::size_t t) const;
  ChaosCoefficients member_coeffs(std::size_t s, std::size_t t) const;

 private:
  explicit AdditiveIntegral(ChaosCoefficients c) : first_chaos_(std::move(c)) {}
  ChaosCoefficients first_chaos_;
};

/// Distance from f - E f to L2(F_left) + L2(F_right) for the cut at
/// boundary index `boundary`: the norm of the chaos part whose support
/// straddles the cut.
double cut_distance(const NoiseFunctional& f, std::size_t boundary);
/// Same, for a cut given as a time; throws if t is not a grid point.
double cut_distance_at(const NoiseFunctional& f, const Rational& t);
/// Distances at every boundary 0..cell_count.
std::vector<double> cut_distances(const ChaosCoefficients& c);

struct CriterionResult {
  bool holds = false;
  double mean = 0.0;
  double max_cut_distance = 0.0;
  /// Interior boundary with the largest distance, when it exceeds tol.
  std::optional<std::size_t> failing_cut;
  /// sqrt of Hermite multiplicity mass; single-cell higher-degree terms
  /// straddle no grid cut but are not first chaos.
  double multiplicity_norm = 0.0;
  /// ||f - first_chaos_extract(f)||
  double residual_norm = 0.0;
};

/// f is first chaos iff it is centered and splits across every interior cut.
CriterionResult first_chaos_criterion(const NoiseFunctional& f, double tol);

/// Projection onto spectral sets with at most one point in each of the
/// intervals cut out by `cuts` (interior boundary indices).
NoiseFunctional finite_chaos_partition_span(const NoiseFunctional& f, std::vector<std::size_t> cuts);

/// Projection of g onto polynomials of degree <= `degree` in the additive
/// integrals of f (the discrete sigma-field generated by f's linear part).
NoiseFunctional linear_span_projection(const NoiseFunctional& g, const NoiseFunctional& f, int degree);

struct LevelRecord {
  int level = 0;
  std::size_t cells = 0;
  /// "exact-chaos", "exact-profile" or "sampled"
  std::string source;
  double total_mass = 0.0;
  double singleton_mass = 0.0;
  CardinalityProfile profile;
  std::optional<double> max_cut_distance;
  double singleton_fraction() const { return total_mass > 0 ? singleton_mass / total_mass : 0.0; }
  double low_cardinality_fraction(int max_cardinality) const;
};

struct ClassifyOptions {
  /// Cardinalities counted as "low" for the linearizable trend.
  int low_cardinality = 4;
  /// A trend "vanishes" once below this value and monotone over min_levels.
  double vanish_threshold = 0.01;
  int min_levels = 3;
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
};

/// Trend verdicts are heuristics over the measured sequence, always
/// reported with the raw per-level data.
struct ClassificationReport {
  std::string family;
  std::vector<LevelRecord> records;
  bool linearizable_like = false;
  bool black_like = false;
  std::string verdict;
};

ClassificationReport classify(const RefinementFamily& family, std::span<const int> levels,
                              const ClassifyOptions& options = {});

}  // namespace noisespec
