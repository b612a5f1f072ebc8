#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Brute-force references that share no code with the library.
namespace oracle {

// Walsh coefficient by direct summation: 2^-n sum_x f(x) (-1)^{|S & x|}.
inline double walsh(const std::vector<double>& f, std::uint32_t s) {
  double acc = 0.0;
  for (std::uint32_t x = 0; x < f.size(); ++x) acc += (std::popcount(s & x) % 2 ? -1.0 : 1.0) * f[x];
  return acc / static_cast<double>(f.size());
}

inline std::vector<double> walsh_all(const std::vector<double>& f) {
  std::vector<double> out(f.size());
  for (std::uint32_t s = 0; s < f.size(); ++s) out[s] = walsh(f, s);
  return out;
}

// Normalized Walsh spectrum via an out-of-place radix-2 recursion.
inline std::vector<double> walsh_fast(std::vector<double> f) {
  for (std::size_t half = 1; half < f.size(); half *= 2) {
    std::vector<double> next(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) {
      next[x] = (x & half) ? f[x ^ half] - f[x] : f[x] + f[x | half];
    }
    f = std::move(next);
  }
  for (auto& v : f) v /= static_cast<double>(f.size());
  return f;
}

// E(f | cells in mask a) by averaging over the cells outside a.
inline std::vector<double> conditional(const std::vector<double>& f, std::uint32_t a) {
  const auto full = static_cast<std::uint32_t>(f.size() - 1);
  const std::uint32_t free = full & ~a;
  const double count = static_cast<double>(1u << std::popcount(free));
  std::vector<double> out(f.size());
  for (std::uint32_t x = 0; x < f.size(); ++x) {
    double acc = 0.0;
    // enumerate all submasks of `free`
    std::uint32_t sub = free;
    while (true) {
      acc += f[(x & a) | sub];
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
    out[x] = acc / count;
  }
  return out;
}

inline double mean_square(const std::vector<double>& f) {
  double acc = 0.0;
  for (double v : f) acc += v * v;
  return acc / static_cast<double>(f.size());
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline std::vector<double> random_table(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(std::size_t{1} << n);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline std::uint32_t random_mask(int n, std::mt19937_64& rng) {
  return static_cast<std::uint32_t>(rng() & ((std::uint64_t{1} << n) - 1));
}

// Value table of sum_S c_S chi_S, built point by point.
inline std::vector<double> table_of(int n, const std::vector<std::pair<std::uint32_t, double>>& terms) {
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::uint32_t x = 0; x < v.size(); ++x) {
    for (const auto& [s, c] : terms) v[x] += (std::popcount(s & x) % 2 ? -1.0 : 1.0) * c;
  }
  return v;
}

}  // namespace oracle
