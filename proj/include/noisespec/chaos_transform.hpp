#pragma once

#include <limits>
#include <span>

#include "noisespec/chaos_coefficients.hpp"
#include "noisespec/elementary_set.hpp"
#include "noisespec/noise_functional.hpp"

namespace noisespec {

/// In-place unnormalized Walsh-Hadamard butterfly over a 2^n table in
/// natural bit order: out[S] = sum_x in[x] * (-1)^{|S & x|}.
void fwht(std::span<double> values);

struct DecomposeOptions {
  /// Throw ToleranceError when degree-cap truncation drops more squared
  /// norm than this.
  double residual_tolerance = std::numeric_limits<double>::infinity();
};

/// Chaos expansion; coefficients are expectations against characters, so
/// Parseval holds without extra factors.
ChaosCoefficients decompose(const NoiseFunctional& f, const DecomposeOptions& options = {});

/// Inverse of decompose for Rademacher expansions on at most 24 cells.
NoiseFunctional reconstruct(const ChaosCoefficients& c);

/// E(f | F_A): keeps exactly the chaos indices supported inside A.
ChaosCoefficients conditional_expectation(const ChaosCoefficients& c, const ElementarySet& a);
NoiseFunctional conditional_expectation(const NoiseFunctional& f, const ElementarySet& a);

/// Homogeneous chaos of order n (total degree n).
ChaosCoefficients level_projection(const ChaosCoefficients& c, int n);
NoiseFunctional level_projection(const NoiseFunctional& f, int n);

}  // namespace noisespec
