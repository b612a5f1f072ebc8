#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "noisespec/chaos_coefficients.hpp"
#include "noisespec/time_grid.hpp"

namespace noisespec {

/// Kernel of a discretized multiple Ito integral, defined on the strict
/// ordered simplex i1 < ... < in of cells. Each slot carries a channel.
class SimplexKernel {
 public:
  struct Constant {
    double value = 1.0;
  };
  /// value(i1..in) = factors[0][i1] * ... * factors[n-1][in]
  struct Separable {
    std::vector<std::vector<double>> factors;
  };
  /// Explicit entries; keys are degree-1 indices with strictly increasing cells.
  struct Table {
    std::map<SpectralIndex, double> entries;
  };

  static SimplexKernel constant(int order, double value, std::vector<std::uint16_t> channels = {});
  static SimplexKernel separable(std::vector<std::vector<double>> factors,
                                 std::vector<std::uint16_t> channels = {});
  static SimplexKernel table(int order, std::map<SpectralIndex, double> entries);

  int order() const { return order_; }
  const std::vector<std::uint16_t>& channels() const { return channels_; }
  const std::variant<Constant, Separable, Table>& form() const { return form_; }
  int max_channel() const;

  /// Iterated sum over i1 < ... < in of value * dX_{i1} ... dX_{in}.
  /// `increments` is cell-major with `channels` values per cell.
  double integrate(std::span<const double> increments, std::size_t cells, int channels) const;

  /// Exact Ito isometry value: sum over the simplex of value^2 times cell volumes.
  double isometry_norm2(const TimeGrid& grid) const;

  /// Visits every simplex point with a nonzero value as (index, value).
  void for_each_entry(std::size_t cells,
                      const std::function<void(const SpectralIndex&, double)>& fn) const;

 private:
  SimplexKernel(int order, std::vector<std::uint16_t> channels,
                std::variant<Constant, Separable, Table> form);

  int order_;
  std::vector<std::uint16_t> channels_;
  std::variant<Constant, Separable, Table> form_;
};

/// sum_k coeffs[k] * xi^k with xi the standardized increment of one cell.
struct IncrementPolynomial {
  std::uint32_t cell = 0;
  std::uint16_t channel = 0;
  std::vector<double> coeffs;
};

using ProgramFactor = std::variant<SimplexKernel, IncrementPolynomial>;

struct ProgramTerm {
  double weight = 1.0;
  std::vector<ProgramFactor> factors;
};

/// Functional of Brownian increments: constant + sum of weighted products of
/// multiple Ito integrals and polynomials of single increments.
struct BrownianProgram {
  int channels = 1;
  /// Per-cell, per-channel Hermite degree kept by chaos().
  int degree_cap = 4;
  double constant = 0.0;
  std::vector<ProgramTerm> terms;

  static BrownianProgram ito(SimplexKernel kernel, int channels = 1, double weight = 1.0);

  double evaluate(const TimeGrid& grid, std::span<const double> increments) const;

  /// Exact Hermite chaos expansion. Indices with a per-cell degree above the
  /// cap are dropped; their squared mass is the truncation residual.
  ChaosCoefficients chaos(const TimeGrid& grid) const;
};

}  // namespace noisespec
