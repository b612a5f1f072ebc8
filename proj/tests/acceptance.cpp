// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "noisespec/chaos_structure.hpp"
#include "noisespec/chaos_transform.hpp"
#include "noisespec/dimension.hpp"
#include "noisespec/families.hpp"
#include "noisespec/random.hpp"
#include "noisespec/spectral_measure.hpp"
#include "noisespec/white_noise.hpp"
#include "oracles.hpp"

using namespace noisespec;

namespace {

constexpr int kCells = 10;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body, double time_limit = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit > 0.0 && secs >= time_limit) {
    o.pass = false;
    o.detail += " [over time limit " + std::to_string(time_limit) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %-28s %s  %s  (%.2f s)\n", id, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

TimeGrid ten_cells() { return TimeGrid::uniform(Rational(0), Rational(1), kCells); }

ElementarySet set_of_mask(const TimeGrid& g, std::uint32_t mask) {
  return ElementarySet::from_cells(g, cells_of_mask(mask));
}

std::vector<double> dense_of(const SpectralMeasure& mu) {
  std::vector<double> out(std::size_t{1} << mu.grid().cell_count(), 0.0);
  mu.for_each([&](const CellSet& c, double m, double) { out[mask_of(c)] += m; });
  return out;
}

Outcome subset_mass_identity() {
  std::mt19937_64 rng(101);
  const TimeGrid g = ten_cells();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto values = oracle::random_table(kCells, rng);
    auto mu = spectral_measure_of(NoiseFunctional::table(g, values));
    for (int j = 0; j < 50; ++j) {
      const std::uint32_t a = oracle::random_mask(kCells, rng);
      const double lhs = mass_of_subsets_of(mu, set_of_mask(g, a));
      const double rhs = oracle::mean_square(oracle::conditional(values, a));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return {worst <= 1e-10, fmt("max |mu{C in A} - ||E_A f||^2| = %.3e", worst)};
}

Outcome projection_algebra() {
  std::mt19937_64 rng(101);
  const TimeGrid g = ten_cells();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto f = NoiseFunctional::table(g, oracle::random_table(kCells, rng));
    for (int j = 0; j < 50; ++j) {
      auto a = set_of_mask(g, oracle::random_mask(kCells, rng));
      auto b = set_of_mask(g, oracle::random_mask(kCells, rng));
      auto ab = conditional_expectation(conditional_expectation(f, b), a);
      worst = std::max(worst, distance(ab, conditional_expectation(f, set_intersection(a, b))));
    }
  }
  // chi on cells 0 and 1, A = {0}, B = {1}
  const TimeGrid g2 = TimeGrid::uniform(Rational(0), Rational(1), 2);
  auto chi = NoiseFunctional::chaos(ChaosCoefficients::rademacher(g2, {{{0, 1}, 1.0}}));
  auto a = ElementarySet::from_cells(g2, {0});
  auto b = ElementarySet::from_cells(g2, {1});
  auto lhs = linear_combination(1.0, conditional_expectation(chi, a), 1.0, conditional_expectation(chi, b));
  auto rhs = linear_combination(1.0, conditional_expectation(chi, set_union(a, b)), 1.0,
                                conditional_expectation(chi, set_intersection(a, b)));
  const double witness = distance(lhs, rhs);
  const bool ok = worst <= 1e-12 && std::abs(witness - 1.0) <= 1e-12;
  return {ok, fmt("max ||E_A E_B f - E_{A^B} f|| = %.3e", worst) + fmt(", witness = %.15f", witness)};
}

Outcome factorization() {
  std::mt19937_64 rng(303);
  const TimeGrid left = TimeGrid::uniform(Rational(0), Rational(1, 2), 5);
  const TimeGrid right = TimeGrid::uniform(Rational(1, 2), Rational(1), 5);
  const TimeGrid whole = ten_cells();
  double worst_product = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto g = oracle::random_table(5, rng);
    auto h = oracle::random_table(5, rng);
    std::vector<double> gh(1u << kCells);
    for (std::uint32_t x = 0; x < gh.size(); ++x) gh[x] = g[x & 31u] * h[x >> 5];
    auto lhs = dense_of(spectral_measure_of(NoiseFunctional::table(whole, gh)));
    auto rhs = product(spectral_measure_of(NoiseFunctional::table(left, g)),
                       spectral_measure_of(NoiseFunctional::table(right, h)));
    worst_product = std::max(worst_product, oracle::max_abs_diff(lhs, dense_of(rhs)));
  }
  double worst_restrict = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto f = NoiseFunctional::table(whole, oracle::random_table(kCells, rng));
    auto a = set_of_mask(whole, oracle::random_mask(kCells, rng));
    auto lhs = dense_of(restrict(spectral_measure_of(f), a));
    auto rhs = dense_of(spectral_measure_of(conditional_expectation(f, a)));
    worst_restrict = std::max(worst_restrict, oracle::max_abs_diff(lhs, rhs));
  }
  const bool ok = worst_product <= 1e-12 && worst_restrict <= 1e-12;
  return {ok, fmt("product max diff %.3e", worst_product) + fmt(", restriction max diff %.3e", worst_restrict)};
}

Outcome first_chaos() {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> normal;
  const TimeGrid g = ten_cells();
  double worst_cut = 0.0;
  int accepted = 0;
  double worst_additive = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<std::uint32_t, double>> terms;
    for (int c = 0; c < kCells; ++c) terms.push_back({1u << c, normal(rng)});
    auto f = NoiseFunctional::table(g, oracle::table_of(kCells, terms));
    for (std::size_t b = 1; b < kCells; ++b) worst_cut = std::max(worst_cut, cut_distance(f, b));
    if (first_chaos_criterion(f, 1e-10).holds) ++accepted;
    auto integral = AdditiveIntegral::of(f);
    for (std::size_t r = 0; r <= kCells; ++r) {
      for (std::size_t s = r; s <= kCells; ++s) {
        for (std::size_t t = s; t <= kCells; ++t) {
          auto sum = linear_combination(1.0, integral.member(r, s), 1.0, integral.member(s, t));
          worst_additive = std::max(worst_additive, distance(sum, integral.member(r, t)));
        }
      }
    }
    worst_additive = std::max(worst_additive, distance(integral.member(0, kCells), f));
  }
  int rejected = 0;
  int named = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<std::uint32_t, double>> terms;
    for (int c = 0; c < kCells; ++c) terms.push_back({1u << c, normal(rng)});
    // at least one higher term carrying >= 0.1 of the mass
    std::uint32_t s;
    do s = oracle::random_mask(kCells, rng); while (std::popcount(s) < 2);
    double total = 0.0;
    for (const auto& t : terms) total += t.second * t.second;
    terms.push_back({s, std::sqrt(0.2 * total) + 0.5});
    auto f = NoiseFunctional::table(g, oracle::table_of(kCells, terms));
    auto mu = spectral_measure_of(f);
    double above = mu.total_mass() - mu.empty_mass() - singleton_mass(mu);
    if (above < 0.1 * mu.total_mass()) return {false, "generator produced too little mass above level 1"};
    auto r = first_chaos_criterion(f, 1e-10);
    if (!r.holds) ++rejected;
    if (r.failing_cut && *r.failing_cut > 0 && *r.failing_cut < kCells) ++named;
  }
  const bool ok = worst_cut <= 1e-12 && accepted == 100 && rejected == 100 && named == 100 && worst_additive <= 1e-12;
  return {ok, "level-1 accepted " + std::to_string(accepted) + "/100" + fmt(" (max cut %.2e)", worst_cut) +
                  ", higher rejected " + std::to_string(rejected) + "/100 with named cut " + std::to_string(named) +
                  "/100" + fmt(", additive max %.2e", worst_additive)};
}

Outcome partition_span() {
  std::mt19937_64 rng(505);
  const TimeGrid g = ten_cells();
  std::vector<std::size_t> all(kCells - 1);
  std::iota(all.begin(), all.end(), 1);
  double worst_full = 0.0;
  int monotone = 0;
  for (int i = 0; i < 50; ++i) {
    auto f = NoiseFunctional::table(g, oracle::random_table(kCells, rng));
    worst_full = std::max(worst_full, distance(finite_chaos_partition_span(f, all), f));
    // nested random cut families: empty, then one cut at a time in random order
    std::vector<std::size_t> order = all;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> cuts;
    double prev = norm_squared(finite_chaos_partition_span(f, cuts));
    bool ok = true;
    for (std::size_t c : order) {
      auto coarse = finite_chaos_partition_span(f, cuts);
      cuts.push_back(c);
      auto fine = finite_chaos_partition_span(f, cuts);
      const double now = norm_squared(fine);
      if (now < prev - 1e-12) ok = false;
      // the coarser span sits inside the finer one
      if (distance(finite_chaos_partition_span(fine, std::vector<std::size_t>(cuts.begin(), cuts.end() - 1)),
                   coarse) > 1e-12)
        ok = false;
      prev = now;
    }
    if (ok) ++monotone;
  }
  const bool ok = worst_full <= 1e-12 && monotone == 50;
  return {ok, fmt("full-cut reproduction max %.3e", worst_full) + ", monotone " + std::to_string(monotone) + "/50"};
}

Outcome white_noise_lab() {
  const TimeGrid g = TimeGrid::dyadic(10);
  const std::size_t paths = 100000;
  BrownianGrid bm(g, 1, paths, 2024);
  const SimplexKernel k1 = SimplexKernel::constant(1, 1.0);
  const SimplexKernel k2 = SimplexKernel::constant(2, 1.0);
  auto stats = monte_carlo(
      bm, 4,
      [&](std::span<const double> dx, std::span<double> out) {
        const double i1 = multiple_ito_integral(k1, g, dx);
        const double i2 = multiple_ito_integral(k2, g, dx);
        out[0] = i1 * i1;
        out[1] = i2 * i2;
        out[2] = i1 * i2;
        out[3] = i1;
      },
      default_thread_count());
  auto f = NoiseFunctional::brownian(g, BrownianProgram::ito(k1));
  auto density = npoint_density_estimate(f, 1, bm, default_thread_count());
  const double z1 = stats[0].z_score(1.0);
  const double z2 = stats[1].z_score(0.5);
  const double z12 = stats[2].z_score(0.0);
  const double z01 = stats[3].z_score(0.0);
  const double rel = std::abs(density.mean_density - 1.0);
  const bool ok = std::abs(z1) <= 3 && std::abs(z2) <= 3 && std::abs(z12) <= 3 && std::abs(z01) <= 3 && rel <= 0.05;
  return {ok, fmt("E I1^2 = %.4f", stats[0].mean) + fmt(" (z %.2f)", z1) + fmt(", E I2^2 = %.4f", stats[1].mean) +
                  fmt(" (z %.2f)", z2) + fmt(", E I1 I2 z %.2f", z12) + fmt(", E I1 z %.2f", z01) +
                  fmt(", 1-point density %.4f", density.mean_density)};
}

Outcome endpoint_mass() {
  const TimeGrid g = TimeGrid::dyadic(10);
  auto f = NoiseFunctional::brownian(g, BrownianProgram::ito(SimplexKernel::constant(1, 1.0)));
  std::vector<double> eps;
  for (int p = 4; p <= 8; ++p) eps.push_back(std::ldexp(1.0, -p));
  auto profile = endpoint_mass_profile(f, Rational(1, 2), eps);
  double worst = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    worst = std::max(worst, std::abs(profile[i].mass / (2.0 * profile[i].epsilon) - 1.0));
    if (i > 0 && profile[i].mass > profile[i - 1].mass) monotone = false;
  }
  return {worst <= 0.1 && monotone, fmt("max relative error vs 2 eps %.3e", worst) + (monotone ? ", monotone" : ", NOT monotone")};
}

Outcome fiber() {
  bool ok = true;
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    for (int n = 0; n <= 3; ++n) {
      auto r = fiber_dimension(d, n);
      const auto expected = static_cast<std::size_t>(std::pow(d, n));
      if (r.count != expected) ok = false;
      worst = std::max({worst, r.max_off_diagonal, r.max_norm_error});
    }
  }
  return {ok && worst <= 1e-10, std::string(ok ? "counts d^n" : "count mismatch") + fmt(", max inner-product error %.3e", worst)};
}

Outcome calibration() {
  const int depth = 8;
  const TimeGrid tg = TimeGrid::ternary(depth);
  CellSet cantor;
  for (std::size_t c = 0; c < tg.cell_count(); ++c)
    if (is_cantor_cell(c, depth)) cantor.push_back(static_cast<std::uint32_t>(c));
  bool counts = true;
  for (int j = 0; j <= depth; ++j)
    if (box_count(tg, cantor, j) != (std::size_t{1} << j)) counts = false;
  const std::size_t threads = default_thread_count();
  const double c = estimate_dimension(find_family("cantor-calibration"), depth, 2000, 1, threads).slope;
  const double p = estimate_dimension(find_family("parity"), 10, 2000, 1, threads).slope;
  const double s = estimate_dimension(find_family("single-coordinate"), 10, 2000, 1, threads).slope;
  const bool ok = counts && std::abs(c - 0.6309) <= 0.05 && std::abs(p - 1.0) <= 0.02 && std::abs(s) <= 0.02;
  return {ok, std::string(counts ? "cantor box counts 2^j" : "cantor box counts wrong") + fmt(", cantor %.4f", c) +
                  fmt(", parity %.4f", p) + fmt(", single-coordinate %.4f", s)};
}

// Iterated 3-majority over 3^m inputs; bit set means the input is -1.
int iterated_majority(std::uint32_t x, int m) {
  std::uint32_t bits = x;
  int width = 1;
  for (int i = 0; i < m; ++i) width *= 3;
  for (int level = 0; level < m; ++level) {
    std::uint32_t next = 0;
    for (int g = 0; g < width / 3; ++g) next |= static_cast<std::uint32_t>(std::popcount((bits >> (3 * g)) & 7u) >= 2) << g;
    bits = next;
    width /= 3;
  }
  return bits ? -1 : 1;
}

// Sum over cells of the squared singleton coefficient E[f omega_i], by enumeration.
double brute_singleton_mass(int m) {
  int n = 1;
  for (int i = 0; i < m; ++i) n *= 3;
  const std::uint64_t points = std::uint64_t{1} << n;
  // minus[i] = #{x : f(x) = -1, bit i set}; negatives = #{x : f(x) = -1}
  std::vector<std::array<std::uint64_t, 256>> hist((n + 7) / 8);
  for (auto& h : hist) h.fill(0);
  std::uint64_t negatives = 0;
  for (std::uint64_t x = 0; x < points; ++x) {
    if (iterated_majority(static_cast<std::uint32_t>(x), m) < 0) {
      ++negatives;
      for (std::size_t b = 0; b < hist.size(); ++b) ++hist[b][(x >> (8 * b)) & 255u];
    }
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::uint64_t minus = 0;
    for (unsigned v = 0; v < 256; ++v)
      if (v >> (i % 8) & 1u) minus += hist[i / 8][v];
    // sum f * omega_i = (#f=+1, bit clear) + (#f=-1, bit set) - (#f=+1, bit set) - (#f=-1, bit clear)
    const double half = static_cast<double>(points / 2);
    const double plus_set = half - static_cast<double>(minus);
    const double minus_clear = static_cast<double>(negatives - minus);
    const double plus_clear = half - minus_clear;
    const double coeff = (plus_clear + static_cast<double>(minus) - plus_set - minus_clear) / static_cast<double>(points);
    total += coeff * coeff;
  }
  return total;
}

Outcome classification_trends() {
  std::vector<int> levels(10);
  std::iota(levels.begin(), levels.end(), 1);
  double parity_worst = 0.0;
  for (const auto& r : classify(find_family("parity"), levels).records) parity_worst = std::max(parity_worst, std::abs(r.singleton_mass));
  double level_one_worst = 0.0;
  for (const auto& r : classify(find_family("level-one"), levels).records)
    level_one_worst = std::max(level_one_worst, std::abs(r.singleton_mass - r.total_mass));

  std::vector<int> small{1, 2, 3, 4};
  auto majority = classify(find_family("majority3"), small).records;
  double majority_worst = 0.0;
  std::string seq;
  for (std::size_t i = 0; i < majority.size(); ++i) {
    const double expected = brute_singleton_mass(majority_depth(small[i]));
    majority_worst = std::max(majority_worst, std::abs(majority[i].singleton_mass - expected));
    seq += fmt(i ? ", %.6f" : "%.6f", majority[i].singleton_mass);
  }
  const bool ok = parity_worst <= 1e-12 && level_one_worst <= 1e-12 && majority_worst <= 1e-12;
  return {ok, fmt("parity max singleton %.1e", parity_worst) + fmt(", level-one max gap %.1e", level_one_worst) +
                  ", majority singleton " + seq + fmt(" (max diff vs enumeration %.1e)", majority_worst)};
}

}  // namespace

int main() {
  report(1, "subset-mass identity", subset_mass_identity, 10.0);
  report(2, "projection algebra", projection_algebra);
  report(3, "factorization/restriction", factorization);
  report(4, "first-chaos criterion", first_chaos);
  report(5, "partition span", partition_span);
  report(6, "white-noise lab", white_noise_lab, 300.0);
  report(7, "endpoint mass", endpoint_mass);
  report(8, "fiber dimension", fiber);
  report(9, "dimension calibration", calibration, 120.0);
  report(10, "classification trends", classification_trends);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
