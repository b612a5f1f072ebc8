#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "noisespec/elementary_set.hpp"
#include "noisespec/time_grid.hpp"

namespace noisespec {

enum class CellLaw { rademacher, gaussian };

/// One factor of a chaos index: orthonormal Hermite degree `degree` of the
/// standardized increment of `channel` on `cell`. Rademacher indices use
/// channel 0 and degree 1.
struct IndexFactor {
  std::uint32_t cell = 0;
  std::uint16_t channel = 0;
  std::uint16_t degree = 1;
  auto operator<=>(const IndexFactor&) const = default;
};

/// Sorted by (cell, channel); no zero degrees.
using SpectralIndex = std::vector<IndexFactor>;

SpectralIndex rademacher_index(const CellSet& cells);
CellSet support_of(const SpectralIndex& index);
/// Number of distinct cells.
std::size_t cardinality(const SpectralIndex& index);
int total_degree(const SpectralIndex& index);
/// Some cell carries total degree >= 2 (no single-point continuum analog).
bool has_multiplicity(const SpectralIndex& index);

CellSet cells_of_mask(std::uint32_t mask);
std::uint32_t mask_of(const CellSet& cells);

/// Ordering used for every serialized listing: cardinality, then lexicographic.
bool canonical_less(const SpectralIndex& a, const SpectralIndex& b);
bool canonical_less(const CellSet& a, const CellSet& b);

/// Chaos expansion f = sum over indices of coeff * (product of per-cell
/// characters or orthonormal Hermite polynomials).
///
/// Rademacher expansions on at most 24 cells may be stored densely as a
/// Walsh spectrum indexed by cell bitmask; everything else is sparse.
class ChaosCoefficients {
 public:
  using SparseMap = std::map<SpectralIndex, double>;

  static ChaosCoefficients dense(TimeGrid grid, std::vector<double> walsh);
  static ChaosCoefficients sparse(TimeGrid grid, CellLaw law, SparseMap entries, int channels = 1,
                                  int degree_cap = 1);
  static ChaosCoefficients rademacher(TimeGrid grid,
                                      const std::vector<std::pair<CellSet, double>>& entries);

  const TimeGrid& grid() const { return grid_; }
  CellLaw law() const { return law_; }
  int channels() const { return channels_; }
  int degree_cap() const { return degree_cap_; }

  bool is_dense() const { return dense_; }
  std::span<const double> dense_values() const { return walsh_; }
  const SparseMap& sparse_entries() const { return entries_; }

  /// Squared norm dropped by degree-cap truncation.
  double truncation_residual() const { return residual_; }
  void set_truncation_residual(double r) { residual_ = r; }

  double coefficient(const SpectralIndex& index) const;
  double coefficient(const CellSet& cells) const { return coefficient(rademacher_index(cells)); }
  double mean() const;
  double norm_squared() const;
  std::size_t nonzero_count() const;

  /// Visits every stored entry; dense entries in mask order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    if (dense_) {
      for (std::uint32_t m = 0; m < walsh_.size(); ++m) {
        if (walsh_[m] != 0.0) fn(rademacher_index(cells_of_mask(m)), walsh_[m]);
      }
    } else {
      for (const auto& [index, c] : entries_) fn(index, c);
    }
  }

  /// Nonzero entries in canonical order.
  std::vector<std::pair<SpectralIndex, double>> sorted_entries() const;

  ChaosCoefficients to_sparse() const;
  ChaosCoefficients to_dense() const;

  /// Keeps entries satisfying the predicate. Dense storage consults
  /// `keep_mask(mask)`, sparse storage `keep_index(index)`.
  template <class MaskPred, class IndexPred>
  ChaosCoefficients filter(MaskPred&& keep_mask, IndexPred&& keep_index) const {
    ChaosCoefficients out = *this;
    if (dense_) {
      for (std::uint32_t m = 0; m < out.walsh_.size(); ++m) {
        if (!keep_mask(m)) out.walsh_[m] = 0.0;
      }
    } else {
      std::erase_if(out.entries_, [&](const auto& e) { return !keep_index(e.first); });
    }
    return out;
  }

  /// Moves every cell index by `shift`. Cyclic mode wraps around the
  /// window; truncating mode throws if any index would leave it.
  ChaosCoefficients translated(long shift, bool cyclic) const;
  ChaosCoefficients scaled(double factor) const;
  /// Same coefficients relabeled onto a grid with the same cell count.
  ChaosCoefficients on_grid(const TimeGrid& grid) const;

 private:
  ChaosCoefficients(TimeGrid grid, CellLaw law, int channels, int degree_cap)
      : grid_(std::move(grid)), law_(law), channels_(channels), degree_cap_(degree_cap) {}

  TimeGrid grid_;
  CellLaw law_;
  int channels_;
  int degree_cap_;
  bool dense_ = false;
  std::vector<double> walsh_;
  SparseMap entries_;
  double residual_ = 0.0;
};

/// Requires equal grids and laws.
double dot(const ChaosCoefficients& a, const ChaosCoefficients& b);
ChaosCoefficients linear_combination(double alpha, const ChaosCoefficients& a, double beta,
                                     const ChaosCoefficients& b);
/// Expansion of g(left cells) * h(right cells) on the concatenated grid.
ChaosCoefficients outer_product(const ChaosCoefficients& left, const ChaosCoefficients& right);

}  // namespace noisespec
