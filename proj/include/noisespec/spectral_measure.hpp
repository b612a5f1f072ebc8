#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "noisespec/chaos_coefficients.hpp"
#include "noisespec/elementary_set.hpp"
#include "noisespec/noise_functional.hpp"

namespace noisespec {

/// Mass per cardinality n (index n).
using CardinalityProfile = std::vector<double>;

/// Unnormalized spectral measure: nonnegative mass per spectral set, total
/// equal to the squared norm of the source functional.
///
/// Dense measures are keyed by cell bitmask (at most 24 cells). Sparse
/// measures map cell sets to masses and additionally track the part of each
/// mass carried by Hermite indices with multiplicity. Sampler-backed
/// measures only support drawing sets.
class SpectralMeasure {
 public:
  using SetSampler = std::function<CellSet(std::mt19937_64&)>;
  using MassMap = std::map<CellSet, double>;

  static SpectralMeasure dense(TimeGrid grid, std::vector<double> masses);
  static SpectralMeasure sparse(TimeGrid grid, MassMap masses, MassMap multiplicity = {});
  static SpectralMeasure sampled(TimeGrid grid, double total_mass, SetSampler sampler);

  const TimeGrid& grid() const { return grid_; }
  bool is_dense() const { return kind_ == Kind::dense; }
  bool is_sampled() const { return kind_ == Kind::sampled; }

  double total_mass() const { return total_; }
  /// Mass carried by Hermite indices with some per-cell degree >= 2.
  double multiplicity_mass() const { return multiplicity_total_; }
  /// Squared norm lost to degree-cap truncation in the source expansion.
  double residual() const { return residual_; }
  void set_residual(double r) { residual_ = r; }

  double mass(const CellSet& cells) const;
  double empty_mass() const { return mass(CellSet{}); }

  std::span<const double> dense_masses() const { return dense_; }
  const MassMap& sparse_masses() const { return sparse_; }
  const MassMap& multiplicity_masses() const { return multiplicity_; }
  const SetSampler& sampler() const { return sampler_; }

  /// Sets with positive mass, in canonical order.
  std::vector<std::pair<CellSet, double>> sorted_entries() const;

  /// Visits (cells, mass, multiplicity part) for every stored set.
  void for_each(const std::function<void(const CellSet&, double, double)>& fn) const;

 private:
  enum class Kind { dense, sparse, sampled };
  SpectralMeasure(TimeGrid grid, Kind kind) : grid_(std::move(grid)), kind_(kind) {}
  void require_exact(const char* op) const;
  friend SpectralMeasure restrict(const SpectralMeasure&, const ElementarySet&);
  friend double mass_of_subsets_of(const SpectralMeasure&, const ElementarySet&);

  TimeGrid grid_;
  Kind kind_;
  std::vector<double> dense_;
  MassMap sparse_;
  MassMap multiplicity_;
  SetSampler sampler_;
  double total_ = 0.0;
  double multiplicity_total_ = 0.0;
  double residual_ = 0.0;
};

/// mass(S) = sum of squared coefficients whose index has point support S.
SpectralMeasure spectral_measure_of(const ChaosCoefficients& c);
SpectralMeasure spectral_measure_of(const NoiseFunctional& f);

/// mu{C : C subset of A}.
double mass_of_subsets_of(const SpectralMeasure& mu, const ElementarySet& a);

/// Keeps the masses of sets contained in A.
SpectralMeasure restrict(const SpectralMeasure& mu, const ElementarySet& a);

/// Measure on the concatenated window with mass(C1 u C2) = mass1(C1) * mass2(C2).
SpectralMeasure product(const SpectralMeasure& left, const SpectralMeasure& right);

/// Sets whose mass exceeds a relative threshold of the total.
std::vector<CellSet> support(const SpectralMeasure& mu, double relative_threshold = 1e-24);

/// Discrete absolute continuity: support(g) is contained in support(f).
bool is_absolutely_continuous(const SpectralMeasure& mu_g, const SpectralMeasure& mu_f,
                              double relative_threshold = 1e-24);

/// Masses of sets of cardinality exactly n (multiplicity mass excluded).
SpectralMeasure::MassMap n_point_marginal(const SpectralMeasure& mu, int n);

double singleton_mass(const SpectralMeasure& mu);
/// Histogram of mass by cardinality, multiplicity mass excluded.
CardinalityProfile cardinality_profile(const SpectralMeasure& mu);
/// Profile estimated from k draws, scaled to the total mass. Works for
/// every representation.
CardinalityProfile estimate_cardinality_profile(const SpectralMeasure& mu, std::size_t k,
                                                std::uint64_t seed);

/// i.i.d. draws with P(S) = mass(S) / total_mass; inverse CDF for stored
/// measures, the measure's own sampler otherwise.
std::vector<CellSet> sample_sets(const SpectralMeasure& mu, std::size_t k, std::uint64_t seed,
                                 std::size_t threads = 1);

/// Draws directly from a value table by deciding one cell at a time; each
/// conditional probability is a ratio of restricted squared norms. Never
/// forms the full Walsh spectrum.
std::vector<CellSet> sample_sets_bitwise(const NoiseFunctional& f, std::size_t k, std::uint64_t seed);

}  // namespace noisespec
