#include "noisespec/families.hpp"

#include <cmath>
#include <numeric>

#include "noisespec/errors.hpp"

namespace noisespec {

namespace {

using SetMap = std::map<CellSet, double>;

CellSet all_cells(std::size_t n) {
  CellSet s(n);
  std::iota(s.begin(), s.end(), 0U);
  return s;
}

NoiseFunctional rademacher_functional(const TimeGrid& grid, const SetMap& coeffs) {
  std::vector<std::pair<CellSet, double>> entries(coeffs.begin(), coeffs.end());
  return NoiseFunctional::chaos(ChaosCoefficients::rademacher(grid, entries));
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

// (a + b + c)/2 - abc/2 applied to three copies of `child` on adjacent blocks.
SetMap majority_compose(const SetMap& child, std::uint32_t block) {
  auto moved = [&](std::uint32_t offset) {
    SetMap out;
    for (const auto& [cells, c] : child) {
      CellSet s = cells;
      for (auto& x : s) x += offset;
      out.emplace(std::move(s), c);
    }
    return out;
  };
  SetMap a = moved(0);
  SetMap b = moved(block);
  SetMap c = moved(2 * block);
  SetMap out;
  for (const auto* part : {&a, &b, &c}) {
    for (const auto& [cells, v] : *part) out[cells] += 0.5 * v;
  }
  for (const auto& [ca, va] : a) {
    for (const auto& [cb, vb] : b) {
      for (const auto& [cc, vc] : c) {
        CellSet s = ca;
        s.insert(s.end(), cb.begin(), cb.end());
        s.insert(s.end(), cc.begin(), cc.end());
        out[std::move(s)] -= 0.5 * va * vb * vc;
      }
    }
  }
  return out;
}

SetMap majority_chaos(int depth) {
  SetMap f{{CellSet{0}, 1.0}};
  std::uint32_t block = 1;
  for (int m = 1; m <= depth; ++m) {
    f = majority_compose(f, block);
    block *= 3;
  }
  return f;
}

// Spectral sample of iterated 3-majority: the top gate picks {i} with
// probability 1/4 each or all three children with probability 1/4; each
// chosen child recurses independently (children are balanced +-1 functions).
void majority_sample(int depth, std::uint32_t offset, std::mt19937_64& rng, CellSet& out) {
  if (depth == 0) {
    out.push_back(offset);
    return;
  }
  const auto block = static_cast<std::uint32_t>(ipow(3, depth - 1));
  std::uniform_int_distribution<int> pick(0, 3);
  int choice = pick(rng);
  if (choice < 3) {
    majority_sample(depth - 1, offset + static_cast<std::uint32_t>(choice) * block, rng, out);
  } else {
    for (std::uint32_t i = 0; i < 3; ++i) majority_sample(depth - 1, offset + i * block, rng, out);
  }
}

// P_m(z) = 3/4 P_{m-1}(z) + 1/4 P_{m-1}(z)^3, P_0(z) = z.
CardinalityProfile majority_profile(int depth) {
  CardinalityProfile p{0.0, 1.0};
  auto multiply = [](const CardinalityProfile& a, const CardinalityProfile& b) {
    CardinalityProfile out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  };
  for (int m = 1; m <= depth; ++m) {
    CardinalityProfile cube = multiply(multiply(p, p), p);
    CardinalityProfile next(cube.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) next[i] += 0.75 * p[i];
    for (std::size_t i = 0; i < cube.size(); ++i) next[i] += 0.25 * cube[i];
    p = std::move(next);
  }
  return p;
}

struct TribesShape {
  std::size_t cells;
  int width;
  std::size_t tribes;
};

TribesShape tribes_shape(int level, const std::map<std::string, double>& params) {
  TribesShape shape{ipow(2, level), tribes_width(level), 0};
  if (auto it = params.find("width"); it != params.end()) shape.width = static_cast<int>(it->second);
  if (shape.width < 1 || static_cast<std::size_t>(shape.width) > shape.cells) {
    throw ValidationError("tribes width must be between 1 and the cell count");
  }
  shape.tribes = shape.cells / static_cast<std::size_t>(shape.width);
  return shape;
}

// Tribes: f = -1 iff some tribe has all cells at -1. Writing f = 2*prod(g_j) - 1
// with g_j = 1 - AND_j gives mass(S) = 4 prod_j g_j^(S_j)^2 for S nonempty,
// g_j^(empty) = 1 - 2^-w, |g_j^(T)| = 2^-w otherwise.
double tribes_empty_mass(const TribesShape& s) {
  const double q = std::ldexp(1.0, -s.width);
  const double mean = 2.0 * std::pow(1.0 - q, static_cast<double>(s.tribes)) - 1.0;
  return mean * mean;
}

CardinalityProfile tribes_profile(const TribesShape& s) {
  const double q = std::ldexp(1.0, -s.width);
  CardinalityProfile tribe(static_cast<std::size_t>(s.width) + 1, 0.0);
  tribe[0] = (1.0 - q) * (1.0 - q);
  double binom = 1.0;
  for (int t = 1; t <= s.width; ++t) {
    binom = binom * (s.width - t + 1) / t;
    tribe[static_cast<std::size_t>(t)] = binom * q * q;
  }
  CardinalityProfile p{4.0};
  for (std::size_t j = 0; j < s.tribes; ++j) {
    CardinalityProfile next(p.size() + tribe.size() - 1, 0.0);
    for (std::size_t a = 0; a < p.size(); ++a) {
      for (std::size_t b = 0; b < tribe.size(); ++b) next[a + b] += p[a] * tribe[b];
    }
    p = std::move(next);
  }
  p[0] = tribes_empty_mass(s);
  return p;
}

CellSet tribes_sample(const TribesShape& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (uniform(rng) < tribes_empty_mass(s)) return {};
  const double q = std::ldexp(1.0, -s.width);
  // per tribe: empty with weight (1-q)^2, each nonempty subset with weight q^2
  const double p_empty = (1.0 - q) * (1.0 - q) / (1.0 - q);
  std::uniform_int_distribution<std::uint64_t> subset(1, (std::uint64_t{1} << s.width) - 1);
  while (true) {
    CellSet cells;
    for (std::size_t j = 0; j < s.tribes; ++j) {
      if (uniform(rng) < p_empty) continue;
      std::uint64_t bits = subset(rng);
      for (int b = 0; b < s.width; ++b) {
        if ((bits >> b) & 1U) cells.push_back(static_cast<std::uint32_t>(j * s.width + b));
      }
    }
    if (!cells.empty()) return cells;
  }
}

CellSet cantor_set(int depth) {
  CellSet cells;
  const std::size_t n = ipow(3, depth);
  for (std::size_t c = 0; c < n; ++c) {
    if (is_cantor_cell(c, depth)) cells.push_back(static_cast<std::uint32_t>(c));
  }
  return cells;
}

RefinementFamily single_coordinate() {
  RefinementFamily f;
  f.name = "single-coordinate";
  f.description = "f_k = x_0, the first cell's sign";
  f.metadata["expected_dimension"] = "0";
  f.grid_at = [](int k) { return TimeGrid::dyadic(k); };
  f.materializable = [](int) { return true; };
  f.functional_at = [](int k) { return rademacher_functional(TimeGrid::dyadic(k), {{CellSet{0}, 1.0}}); };
  f.sampler_at = [](int, std::mt19937_64&) { return CellSet{0}; };
  f.exact_profile = [](int) { return CardinalityProfile{0.0, 1.0}; };
  f.total_mass_at = [](int) { return 1.0; };
  return f;
}

RefinementFamily parity() {
  RefinementFamily f;
  f.name = "parity";
  f.description = "f_k = product of all 2^k cell signs";
  f.metadata["expected_dimension"] = "1";
  f.grid_at = [](int k) { return TimeGrid::dyadic(k); };
  f.materializable = [](int) { return true; };
  f.functional_at = [](int k) {
    return rademacher_functional(TimeGrid::dyadic(k), {{all_cells(ipow(2, k)), 1.0}});
  };
  f.sampler_at = [](int k, std::mt19937_64&) { return all_cells(ipow(2, k)); };
  f.exact_profile = [](int k) {
    CardinalityProfile p(ipow(2, k) + 1, 0.0);
    p.back() = 1.0;
    return p;
  };
  f.total_mass_at = [](int) { return 1.0; };
  return f;
}

RefinementFamily level_one() {
  RefinementFamily f;
  f.name = "level-one";
  f.description = "f_k = (sum of all cell signs) / sqrt(2^k)";
  f.metadata["expected_dimension"] = "0";
  f.grid_at = [](int k) { return TimeGrid::dyadic(k); };
  f.materializable = [](int k) { return k <= 16; };
  f.functional_at = [](int k) {
    const std::size_t n = ipow(2, k);
    SetMap coeffs;
    for (std::uint32_t c = 0; c < n; ++c) coeffs[CellSet{c}] = 1.0 / std::sqrt(static_cast<double>(n));
    return rademacher_functional(TimeGrid::dyadic(k), coeffs);
  };
  f.sampler_at = [](int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint32_t> cell(0, static_cast<std::uint32_t>(ipow(2, k) - 1));
    return CellSet{cell(rng)};
  };
  f.exact_profile = [](int) { return CardinalityProfile{0.0, 1.0}; };
  f.total_mass_at = [](int) { return 1.0; };
  return f;
}

RefinementFamily white_noise(int order) {
  RefinementFamily f;
  f.name = order == 1 ? "white-noise-i1" : "white-noise-i2";
  f.description = "multiple Ito integral of order " + std::to_string(order) +
                  " with unit kernel over [0,1) on 2^k cells";
  f.metadata["expected_dimension"] = "0";
  f.grid_at = [](int k) { return TimeGrid::dyadic(k); };
  f.materializable = [order](int k) { return order == 1 ? k <= 16 : k <= 10; };
  f.functional_at = [order](int k) {
    return NoiseFunctional::brownian(TimeGrid::dyadic(k),
                                     BrownianProgram::ito(SimplexKernel::constant(order, 1.0)));
  };
  f.sampler_at = [order](int k, std::mt19937_64& rng) {
    const auto n = static_cast<std::uint32_t>(ipow(2, k));
    std::uniform_int_distribution<std::uint32_t> cell(0, n - 1);
    if (order == 1) return CellSet{cell(rng)};
    while (true) {
      std::uint32_t a = cell(rng);
      std::uint32_t b = cell(rng);
      if (a != b) return a < b ? CellSet{a, b} : CellSet{b, a};
    }
  };
  f.total_mass_at = [order](int k) {
    const double n = std::ldexp(1.0, k);
    return order == 1 ? 1.0 : 0.5 * (1.0 - 1.0 / n);
  };
  f.exact_profile = [order, total = f.total_mass_at](int k) {
    CardinalityProfile p(static_cast<std::size_t>(order) + 1, 0.0);
    p.back() = total(k);
    return p;
  };
  return f;
}

RefinementFamily majority3() {
  RefinementFamily f;
  f.name = "majority3";
  f.description = "iterated 3-majority on a ternary tree of depth m = ceil(k log_3 2)";
  f.metadata["padding"] =
      "level k uses the ternary grid of 3^m cells, m the smallest depth with 3^m >= 2^k";
  f.metadata["grid_base"] = "3";
  f.grid_at = [](int k) { return TimeGrid::ternary(majority_depth(k)); };
  f.materializable = [](int k) { return majority_depth(k) <= 3; };
  f.functional_at = [](int k) {
    const int m = majority_depth(k);
    if (m > 3) throw CapExceeded("iterated majority expansion limited to depth 3");
    return rademacher_functional(TimeGrid::ternary(m), majority_chaos(m));
  };
  f.sampler_at = [](int k, std::mt19937_64& rng) {
    CellSet out;
    majority_sample(majority_depth(k), 0, rng, out);
    std::sort(out.begin(), out.end());
    return out;
  };
  f.exact_profile = [](int k) { return majority_profile(majority_depth(k)); };
  f.total_mass_at = [](int) { return 1.0; };
  return f;
}

RefinementFamily tribes(std::map<std::string, double> params) {
  RefinementFamily f;
  f.name = "tribes";
  f.description = "OR of ANDs over disjoint tribes of w consecutive cells; leftover cells unused";
  f.metadata["width_rule"] = "w minimizes |(1-2^-w)^floor(2^k/w) - 1/2|; override with param width";
  f.params = params;
  f.grid_at = [](int k) { return TimeGrid::dyadic(k); };
  f.materializable = [](int k) { return ipow(2, k) <= TimeGrid::kDenseCellCap; };
  f.functional_at = [params](int k) {
    TribesShape s = tribes_shape(k, params);
    return NoiseFunctional::tabulate(TimeGrid::dyadic(k), [s](std::span<const int> omega) {
      for (std::size_t j = 0; j < s.tribes; ++j) {
        bool all = true;
        for (int b = 0; b < s.width && all; ++b) all = omega[j * s.width + b] == -1;
        if (all) return -1.0;
      }
      return 1.0;
    });
  };
  f.sampler_at = [params](int k, std::mt19937_64& rng) { return tribes_sample(tribes_shape(k, params), rng); };
  f.exact_profile = [params](int k) { return tribes_profile(tribes_shape(k, params)); };
  f.total_mass_at = [](int) { return 1.0; };
  return f;
}

RefinementFamily cantor_calibration() {
  RefinementFamily f;
  f.name = "cantor-calibration";
  f.description = "character of the depth-k middle-thirds cells on a 3^k grid";
  f.metadata["expected_dimension"] = "ln2/ln3";
  f.metadata["grid_base"] = "3";
  f.grid_at = [](int k) { return TimeGrid::ternary(k); };
  f.materializable = [](int k) { return k <= 12; };
  f.functional_at = [](int k) {
    return rademacher_functional(TimeGrid::ternary(k), {{cantor_set(k), 1.0}});
  };
  f.sampler_at = [](int k, std::mt19937_64&) { return cantor_set(k); };
  f.exact_profile = [](int k) {
    CardinalityProfile p(ipow(2, k) + 1, 0.0);
    p.back() = 1.0;
    return p;
  };
  f.total_mass_at = [](int) { return 1.0; };
  return f;
}

}  // namespace

int majority_depth(int level) {
  if (level < 0) throw ValidationError("level must be nonnegative");
  int m = 0;
  std::size_t power3 = 1;
  const std::size_t target = ipow(2, level);
  while (power3 < target) {
    power3 *= 3;
    ++m;
  }
  return m;
}

int tribes_width(int level) {
  const std::size_t n = ipow(2, level);
  int best = 1;
  double best_gap = 2.0;
  for (int w = 1; static_cast<std::size_t>(w) <= n && w <= 62; ++w) {
    double p = std::pow(1.0 - std::ldexp(1.0, -w), static_cast<double>(n / static_cast<std::size_t>(w)));
    double gap = std::abs(p - 0.5);
    if (gap < best_gap) {
      best_gap = gap;
      best = w;
    }
  }
  return best;
}

bool is_cantor_cell(std::size_t cell, int depth) {
  for (int d = 0; d < depth; ++d) {
    if (cell % 3 == 1) return false;
    cell /= 3;
  }
  return true;
}

std::vector<RefinementFamily> builtin_families() {
  return {single_coordinate(), parity(),     level_one(), white_noise(1),
          white_noise(2),      majority3(), tribes({}),  cantor_calibration()};
}

RefinementFamily find_family(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "tribes") return tribes(params);
  for (auto& f : builtin_families()) {
    if (f.name == name) return f;
  }
  std::string known;
  for (const auto& f : builtin_families()) known += (known.empty() ? "" : ", ") + f.name;
  throw ValidationError("unknown family '" + name + "' (known: " + known + ")");
}

NoiseFunctional family_functional(const std::string& name, int level,
                                  const std::map<std::string, double>& params) {
  RefinementFamily family = find_family(name, params);
  return NoiseFunctional::family(family.grid_at(level), FamilyRef{name, level, params});
}

NoiseFunctional materialize(const NoiseFunctional& f) {
  if (!f.is_family()) return f;
  const auto& ref = f.family_ref();
  RefinementFamily family = find_family(ref.name, ref.params);
  if (!family.materializable(ref.level)) {
    throw CapExceeded("family '" + ref.name + "' cannot be expanded at level " + std::to_string(ref.level));
  }
  return family.functional_at(ref.level);
}

SpectralMeasure family_measure(const RefinementFamily& family, int level) {
  if (family.materializable(level)) return spectral_measure_of(family.functional_at(level));
  if (!family.sampler_at) {
    throw CapExceeded("family '" + family.name + "' has no sampler at level " + std::to_string(level));
  }
  auto sampler = family.sampler_at;
  return SpectralMeasure::sampled(family.grid_at(level), family.total_mass_at(level),
                                  [sampler, level](std::mt19937_64& rng) { return sampler(level, rng); });
}

}  // namespace noisespec
