#include "noisespec/chaos_structure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "noisespec/chaos_transform.hpp"
#include "noisespec/errors.hpp"

namespace noisespec {

namespace {

bool nonincreasing(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1] + 1e-12) return false;
  }
  return true;
}

NoiseFunctional like_input(const NoiseFunctional& f, ChaosCoefficients c) {
  if (f.is_table()) return reconstruct(c);
  return NoiseFunctional::chaos(std::move(c));
}

}  // namespace

NoiseFunctional first_chaos_extract(const NoiseFunctional& f) { return level_projection(f, 1); }

AdditiveIntegral AdditiveIntegral::of(const NoiseFunctional& f) {
  return AdditiveIntegral(level_projection(decompose(f), 1));
}

ChaosCoefficients AdditiveIntegral::member_coeffs(std::size_t s, std::size_t t) const {
  if (s > t || t > grid().cell_count()) throw ValidationError("additive integral needs s <= t within the grid");
  return conditional_expectation(first_chaos_, ElementarySet::from_ranges(grid(), {{s, t}}));
}

NoiseFunctional AdditiveIntegral::member(std::size_t s, std::size_t t) const {
  return NoiseFunctional::chaos(member_coeffs(s, t));
}

std::vector<double> cut_distances(const ChaosCoefficients& c) {
  const std::size_t n = c.grid().cell_count();
  std::vector<double> diff(n + 2, 0.0);
  auto add = [&](std::size_t lo, std::size_t hi, double mass) {
    // boundaries lo+1 .. hi separate cell lo from cell hi
    diff[lo + 1] += mass;
    diff[hi + 1] -= mass;
  };
  if (c.is_dense()) {
    auto w = c.dense_values();
    for (std::uint32_t m = 0; m < w.size(); ++m) {
      if (std::popcount(m) < 2 || w[m] == 0.0) continue;
      add(static_cast<std::size_t>(std::countr_zero(m)), static_cast<std::size_t>(31 - std::countl_zero(m)),
          w[m] * w[m]);
    }
  } else {
    for (const auto& [index, coeff] : c.sparse_entries()) {
      if (index.empty() || index.front().cell == index.back().cell) continue;
      add(index.front().cell, index.back().cell, coeff * coeff);
    }
  }
  std::vector<double> out(n + 1, 0.0);
  double running = 0.0;
  for (std::size_t b = 0; b <= n; ++b) {
    running += diff[b];
    out[b] = std::sqrt(std::max(0.0, running));
  }
  return out;
}

double cut_distance(const NoiseFunctional& f, std::size_t boundary) {
  if (boundary > f.grid().cell_count()) throw ValidationError("cut is not a grid point");
  return cut_distances(decompose(f))[boundary];
}

double cut_distance_at(const NoiseFunctional& f, const Rational& t) {
  auto boundary = f.grid().boundary_index(t);
  if (!boundary) throw ValidationError("cut at " + to_string(t) + " is not a grid point");
  return cut_distance(f, *boundary);
}

CriterionResult first_chaos_criterion(const NoiseFunctional& f, double tol) {
  ChaosCoefficients c = decompose(f);
  CriterionResult r;
  r.mean = c.mean();
  auto distances = cut_distances(c);
  const std::size_t n = c.grid().cell_count();
  for (std::size_t b = 1; b < n; ++b) {
    if (distances[b] > r.max_cut_distance) {
      r.max_cut_distance = distances[b];
      if (distances[b] > tol) r.failing_cut = b;
    }
  }
  double multiplicity = 0.0;
  double off_level_one = c.truncation_residual();
  c.for_each([&](const SpectralIndex& index, double coeff) {
    if (has_multiplicity(index)) multiplicity += coeff * coeff;
    if (total_degree(index) != 1) off_level_one += coeff * coeff;
  });
  r.multiplicity_norm = std::sqrt(multiplicity);
  r.residual_norm = std::sqrt(off_level_one);
  r.holds = std::abs(r.mean) <= tol && r.max_cut_distance <= tol && r.multiplicity_norm <= tol;
  return r;
}

NoiseFunctional finite_chaos_partition_span(const NoiseFunctional& f, std::vector<std::size_t> cuts) {
  ChaosCoefficients c = decompose(f);
  const std::size_t n = c.grid().cell_count();
  for (auto b : cuts) {
    if (b > n) throw ValidationError("cut " + std::to_string(b) + " is not a grid point");
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto interval_of = [&](std::uint32_t cell) {
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), cell) - cuts.begin());
  };
  std::vector<std::uint32_t> interval_masks;
  if (c.is_dense()) {
    interval_masks.assign(cuts.size() + 1, 0);
    for (std::uint32_t cell = 0; cell < n; ++cell) interval_masks[interval_of(cell)] |= std::uint32_t{1} << cell;
  }
  auto filtered = c.filter(
      [&](std::uint32_t m) {
        return std::all_of(interval_masks.begin(), interval_masks.end(),
                           [m](std::uint32_t iv) { return std::popcount(m & iv) <= 1; });
      },
      [&](const SpectralIndex& index) {
        if (has_multiplicity(index)) return false;
        std::set<std::size_t> seen;
        for (const auto& factor : index) {
          if (!seen.insert(interval_of(factor.cell)).second) return false;
        }
        return true;
      });
  return like_input(f, std::move(filtered));
}

NoiseFunctional linear_span_projection(const NoiseFunctional& g, const NoiseFunctional& f, int degree) {
  if (!(g.grid() == f.grid())) throw GridMismatch("functionals live on different grids");
  ChaosCoefficients linear = level_projection(decompose(f), 1);
  const double threshold = 1e-12 * std::sqrt(linear.norm_squared());
  std::set<std::pair<std::uint32_t, std::uint16_t>> active;
  std::set<std::uint32_t> active_cells;
  linear.for_each([&](const SpectralIndex& index, double coeff) {
    if (std::abs(coeff) <= threshold) return;
    if (!active_cells.insert(index.front().cell).second) {
      throw Unsupported("linear part mixes channels within one cell");
    }
    active.insert({index.front().cell, index.front().channel});
  });
  std::uint32_t active_mask = 0;
  if (g.grid().fits_dense()) {
    for (auto cell : active_cells) active_mask |= std::uint32_t{1} << cell;
  }
  auto kept = decompose(g).filter(
      [&](std::uint32_t m) { return (m & ~active_mask) == 0 && std::popcount(m) <= degree; },
      [&](const SpectralIndex& index) {
        if (total_degree(index) > degree) return false;
        return std::all_of(index.begin(), index.end(),
                           [&](const IndexFactor& x) { return active.contains({x.cell, x.channel}); });
      });
  return like_input(g, std::move(kept));
}

double LevelRecord::low_cardinality_fraction(int max_cardinality) const {
  if (!(total_mass > 0)) return 0.0;
  double low = 0.0;
  for (std::size_t n = 0; n < profile.size() && static_cast<int>(n) <= max_cardinality; ++n) low += profile[n];
  return low / total_mass;
}

ClassificationReport classify(const RefinementFamily& family, std::span<const int> levels,
                              const ClassifyOptions& options) {
  ClassificationReport report;
  report.family = family.name;
  for (int level : levels) {
    LevelRecord rec;
    rec.level = level;
    rec.cells = family.grid_at(level).cell_count();
    if (family.materializable(level)) {
      rec.source = "exact-chaos";
      ChaosCoefficients c = decompose(family.functional_at(level));
      SpectralMeasure mu = spectral_measure_of(c);
      rec.total_mass = mu.total_mass();
      rec.profile = cardinality_profile(mu);
      auto distances = cut_distances(c);
      double worst = 0.0;
      for (std::size_t b = 1; b + 1 < distances.size(); ++b) worst = std::max(worst, distances[b]);
      rec.max_cut_distance = worst;
    } else if (family.exact_profile) {
      rec.source = "exact-profile";
      rec.profile = family.exact_profile(level);
      rec.total_mass = family.total_mass_at(level);
    } else {
      rec.source = "sampled";
      rec.profile = estimate_cardinality_profile(family_measure(family, level), options.samples,
                                                 options.seed + static_cast<std::uint64_t>(level));
      rec.total_mass = family.total_mass_at(level);
    }
    rec.singleton_mass = rec.profile.size() > 1 ? rec.profile[1] : 0.0;
    report.records.push_back(std::move(rec));
  }

  std::vector<double> singleton;
  std::vector<double> high;
  for (const auto& r : report.records) {
    singleton.push_back(r.singleton_fraction());
    high.push_back(1.0 - r.low_cardinality_fraction(options.low_cardinality));
  }
  const bool enough = static_cast<int>(report.records.size()) >= options.min_levels;
  report.black_like = enough && nonincreasing(singleton) && singleton.back() < options.vanish_threshold;
  report.linearizable_like = enough && nonincreasing(high) && high.back() < options.vanish_threshold;
  if (!enough) {
    report.verdict = "insufficient-levels";
  } else if (report.linearizable_like) {
    report.verdict = "linearizable-like";
  } else if (report.black_like) {
    report.verdict = "black-like";
  } else {
    report.verdict = "undetermined";
  }
  return report;
}

}  // namespace noisespec
