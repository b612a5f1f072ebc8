#pragma once

#include <utility>
#include <vector>

// Orthonormal probabilists' Hermite polynomials h_k = He_k / sqrt(k!),
// orthonormal under the standard Gaussian law.
namespace noisespec::hermite {

double orthonormal(int k, double x);
/// h_0(x) .. h_max(x).
std::vector<double> orthonormal_upto(int max_k, double x);

/// Linearization h_a * h_b = sum of (degree, coefficient) terms.
std::vector<std::pair<int, double>> product(int a, int b);

/// Coefficients c_k with x^m = sum_k c_k h_k(x).
std::vector<double> monomial(int m);

}  // namespace noisespec::hermite
