#include "noisespec/chaos_transform.hpp"

#include <bit>

#include "noisespec/errors.hpp"

namespace noisespec {

void fwht(std::span<double> values) {
  const std::size_t n = values.size();
  if (!std::has_single_bit(n)) throw DimensionMismatch("Walsh-Hadamard transform needs 2^n values");
  for (std::size_t half = 1; half < n; half <<= 1) {
    for (std::size_t block = 0; block < n; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        double a = values[i];
        double b = values[i + half];
        values[i] = a + b;
        values[i + half] = a - b;
      }
    }
  }
}

ChaosCoefficients decompose(const NoiseFunctional& f, const DecomposeOptions& options) {
  if (f.is_family()) return decompose(materialize(f), options);
  if (f.is_table()) {
    std::vector<double> walsh = f.values();
    fwht(walsh);
    const double scale = 1.0 / static_cast<double>(walsh.size());
    for (auto& c : walsh) c *= scale;
    return ChaosCoefficients::dense(f.grid(), std::move(walsh));
  }
  ChaosCoefficients c = f.is_chaos() ? f.coeffs() : f.program().chaos(f.grid());
  if (c.truncation_residual() > options.residual_tolerance) {
    throw ToleranceError("degree-cap truncation residual " + std::to_string(c.truncation_residual()) +
                         " exceeds tolerance " + std::to_string(options.residual_tolerance));
  }
  return c;
}

NoiseFunctional reconstruct(const ChaosCoefficients& c) {
  if (c.law() != CellLaw::rademacher) {
    throw Unsupported("Gaussian chaos has no dense value table");
  }
  ChaosCoefficients dense = c.to_dense();
  std::vector<double> values(dense.dense_values().begin(), dense.dense_values().end());
  fwht(values);
  return NoiseFunctional::table(c.grid(), std::move(values));
}

ChaosCoefficients conditional_expectation(const ChaosCoefficients& c, const ElementarySet& a) {
  if (!(c.grid() == a.grid())) throw GridMismatch("set and functional live on different grids");
  if (c.is_dense()) {
    const std::uint32_t outside = ~a.mask();
    return c.filter([&](std::uint32_t m) { return (m & outside) == 0; }, [](const auto&) { return true; });
  }
  return c.filter([](std::uint32_t) { return true; },
                  [&](const SpectralIndex& index) {
                    for (const auto& f : index) {
                      if (!a.contains(f.cell)) return false;
                    }
                    return true;
                  });
}

NoiseFunctional conditional_expectation(const NoiseFunctional& f, const ElementarySet& a) {
  auto c = conditional_expectation(decompose(f), a);
  if (f.is_table()) return reconstruct(c);
  return NoiseFunctional::chaos(std::move(c));
}

ChaosCoefficients level_projection(const ChaosCoefficients& c, int n) {
  return c.filter([&](std::uint32_t m) { return std::popcount(m) == n; },
                  [&](const SpectralIndex& index) { return total_degree(index) == n; });
}

NoiseFunctional level_projection(const NoiseFunctional& f, int n) {
  auto c = level_projection(decompose(f), n);
  if (f.is_table()) return reconstruct(c);
  return NoiseFunctional::chaos(std::move(c));
}

}  // namespace noisespec
