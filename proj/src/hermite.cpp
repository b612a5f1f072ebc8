#include "noisespec/hermite.hpp"

#include <cmath>

namespace noisespec::hermite {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

std::vector<double> orthonormal_upto(int max_k, double x) {
  std::vector<double> he(static_cast<std::size_t>(max_k) + 1);
  he[0] = 1.0;
  if (max_k >= 1) he[1] = x;
  for (int k = 1; k < max_k; ++k) he[k + 1] = x * he[k] - k * he[k - 1];
  for (int k = 0; k <= max_k; ++k) he[k] /= std::sqrt(std::exp(log_factorial(k)));
  return he;
}

double orthonormal(int k, double x) { return orthonormal_upto(k, x)[static_cast<std::size_t>(k)]; }

std::vector<std::pair<int, double>> product(int a, int b) {
  std::vector<std::pair<int, double>> out;
  for (int r = 0; r <= std::min(a, b); ++r) {
    int degree = a + b - 2 * r;
    // r! C(a,r) C(b,r) sqrt(degree!) / sqrt(a! b!)
    double log_c = log_factorial(r) + log_factorial(a) - log_factorial(r) - log_factorial(a - r) +
                   log_factorial(b) - log_factorial(r) - log_factorial(b - r) +
                   0.5 * (log_factorial(degree) - log_factorial(a) - log_factorial(b));
    out.emplace_back(degree, std::exp(log_c));
  }
  return out;
}

std::vector<double> monomial(int m) {
  std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
  for (int k = 0; 2 * k <= m; ++k) {
    int degree = m - 2 * k;
    double log_c = log_factorial(m) - log_factorial(k) - log_factorial(degree) - k * std::log(2.0) +
                   0.5 * log_factorial(degree);
    c[static_cast<std::size_t>(degree)] = std::exp(log_c);
  }
  return c;
}

}  // namespace noisespec::hermite
