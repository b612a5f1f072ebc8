#include "noisespec/spectral_measure.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "noisespec/chaos_transform.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/random.hpp"

namespace noisespec {

namespace {

constexpr std::size_t kSampleChunk = 1024;

double sum_of(const SpectralMeasure::MassMap& m) {
  double s = 0.0;
  for (const auto& [cells, mass] : m) s += mass;
  return s;
}

std::uint32_t outside_mask(const ElementarySet& a) { return ~a.mask(); }

}  // namespace

SpectralMeasure SpectralMeasure::dense(TimeGrid grid, std::vector<double> masses) {
  if (!grid.fits_dense() || masses.size() != (std::size_t{1} << grid.cell_count())) {
    throw DimensionMismatch("dense spectral measure needs 2^cells masses on at most 24 cells");
  }
  SpectralMeasure mu(std::move(grid), Kind::dense);
  mu.total_ = std::accumulate(masses.begin(), masses.end(), 0.0);
  mu.dense_ = std::move(masses);
  return mu;
}

SpectralMeasure SpectralMeasure::sparse(TimeGrid grid, MassMap masses, MassMap multiplicity) {
  SpectralMeasure mu(std::move(grid), Kind::sparse);
  mu.total_ = sum_of(masses);
  mu.multiplicity_total_ = sum_of(multiplicity);
  mu.sparse_ = std::move(masses);
  mu.multiplicity_ = std::move(multiplicity);
  return mu;
}

SpectralMeasure SpectralMeasure::sampled(TimeGrid grid, double total_mass, SetSampler sampler) {
  SpectralMeasure mu(std::move(grid), Kind::sampled);
  mu.total_ = total_mass;
  mu.sampler_ = std::move(sampler);
  return mu;
}

void SpectralMeasure::require_exact(const char* op) const {
  if (kind_ == Kind::sampled) {
    throw Unsupported(std::string(op) + " is not available for sampler-backed spectral measures");
  }
}

double SpectralMeasure::mass(const CellSet& cells) const {
  require_exact("mass lookup");
  if (kind_ == Kind::dense) return dense_[mask_of(cells)];
  auto it = sparse_.find(cells);
  return it == sparse_.end() ? 0.0 : it->second;
}

void SpectralMeasure::for_each(const std::function<void(const CellSet&, double, double)>& fn) const {
  require_exact("iteration");
  if (kind_ == Kind::dense) {
    for (std::uint32_t m = 0; m < dense_.size(); ++m) {
      if (dense_[m] != 0.0) fn(cells_of_mask(m), dense_[m], 0.0);
    }
    return;
  }
  for (const auto& [cells, mass] : sparse_) {
    auto it = multiplicity_.find(cells);
    fn(cells, mass, it == multiplicity_.end() ? 0.0 : it->second);
  }
}

std::vector<std::pair<CellSet, double>> SpectralMeasure::sorted_entries() const {
  std::vector<std::pair<CellSet, double>> out;
  for_each([&](const CellSet& cells, double mass, double) {
    if (mass > 0.0) out.emplace_back(cells, mass);
  });
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
  return out;
}

SpectralMeasure spectral_measure_of(const ChaosCoefficients& c) {
  if (c.is_dense()) {
    std::vector<double> masses(c.dense_values().size());
    for (std::size_t m = 0; m < masses.size(); ++m) masses[m] = c.dense_values()[m] * c.dense_values()[m];
    auto mu = SpectralMeasure::dense(c.grid(), std::move(masses));
    mu.set_residual(c.truncation_residual());
    return mu;
  }
  SpectralMeasure::MassMap masses;
  SpectralMeasure::MassMap multiplicity;
  for (const auto& [index, coeff] : c.sparse_entries()) {
    if (coeff == 0.0) continue;
    CellSet cells = support_of(index);
    const double m = coeff * coeff;
    if (has_multiplicity(index)) multiplicity[cells] += m;
    masses[std::move(cells)] += m;
  }
  auto mu = SpectralMeasure::sparse(c.grid(), std::move(masses), std::move(multiplicity));
  mu.set_residual(c.truncation_residual());
  return mu;
}

SpectralMeasure spectral_measure_of(const NoiseFunctional& f) { return spectral_measure_of(decompose(f)); }

double mass_of_subsets_of(const SpectralMeasure& mu, const ElementarySet& a) {
  mu.require_exact("mass_of_subsets_of");
  if (!(mu.grid() == a.grid())) throw GridMismatch("set and measure live on different grids");
  double s = 0.0;
  if (mu.is_dense()) {
    const std::uint32_t outside = outside_mask(a);
    for (std::uint32_t m = 0; m < mu.dense_.size(); ++m) {
      if ((m & outside) == 0) s += mu.dense_[m];
    }
    return s;
  }
  for (const auto& [cells, mass] : mu.sparse_) {
    if (a.contains_all(cells)) s += mass;
  }
  return s;
}

SpectralMeasure restrict(const SpectralMeasure& mu, const ElementarySet& a) {
  mu.require_exact("restrict");
  if (!(mu.grid() == a.grid())) throw GridMismatch("set and measure live on different grids");
  if (mu.is_dense()) {
    std::vector<double> masses = mu.dense_;
    const std::uint32_t outside = outside_mask(a);
    for (std::uint32_t m = 0; m < masses.size(); ++m) {
      if ((m & outside) != 0) masses[m] = 0.0;
    }
    return SpectralMeasure::dense(mu.grid(), std::move(masses));
  }
  SpectralMeasure::MassMap masses;
  SpectralMeasure::MassMap multiplicity;
  for (const auto& [cells, mass] : mu.sparse_) {
    if (a.contains_all(cells)) masses.emplace(cells, mass);
  }
  for (const auto& [cells, mass] : mu.multiplicity_) {
    if (a.contains_all(cells)) multiplicity.emplace(cells, mass);
  }
  return SpectralMeasure::sparse(mu.grid(), std::move(masses), std::move(multiplicity));
}

SpectralMeasure product(const SpectralMeasure& left, const SpectralMeasure& right) {
  if (left.is_sampled() || right.is_sampled()) {
    throw Unsupported("product of sampler-backed measures");
  }
  TimeGrid grid = left.grid().concat(right.grid());
  const auto offset = static_cast<std::uint32_t>(left.grid().cell_count());
  if (left.is_dense() && right.is_dense() && grid.fits_dense()) {
    auto l = left.dense_masses();
    auto r = right.dense_masses();
    std::vector<double> masses(std::size_t{1} << grid.cell_count(), 0.0);
    for (std::uint32_t mr = 0; mr < r.size(); ++mr) {
      if (r[mr] == 0.0) continue;
      for (std::uint32_t ml = 0; ml < l.size(); ++ml) masses[ml | (mr << offset)] = l[ml] * r[mr];
    }
    return SpectralMeasure::dense(std::move(grid), std::move(masses));
  }
  SpectralMeasure::MassMap masses;
  SpectralMeasure::MassMap multiplicity;
  left.for_each([&](const CellSet& lc, double lm, double lmult) {
    right.for_each([&](const CellSet& rc, double rm, double rmult) {
      CellSet cells = lc;
      for (auto c : rc) cells.push_back(c + offset);
      const double plain = (lm - lmult) * (rm - rmult);
      const double mult = lm * rm - plain;
      if (mult != 0.0) multiplicity[cells] += mult;
      masses[std::move(cells)] += lm * rm;
    });
  });
  return SpectralMeasure::sparse(std::move(grid), std::move(masses), std::move(multiplicity));
}

std::vector<CellSet> support(const SpectralMeasure& mu, double relative_threshold) {
  const double threshold = relative_threshold * mu.total_mass();
  std::vector<CellSet> out;
  mu.for_each([&](const CellSet& cells, double mass, double) {
    if (mass > threshold) out.push_back(cells);
  });
  return out;
}

bool is_absolutely_continuous(const SpectralMeasure& mu_g, const SpectralMeasure& mu_f,
                              double relative_threshold) {
  if (mu_g.is_sampled() || mu_f.is_sampled()) {
    throw Unsupported("absolute continuity needs stored (dense or sparse) measures");
  }
  if (!(mu_g.grid() == mu_f.grid())) throw GridMismatch("measures live on different grids");
  const double f_threshold = relative_threshold * mu_f.total_mass();
  for (const auto& cells : support(mu_g, relative_threshold)) {
    if (!(mu_f.mass(cells) > f_threshold)) return false;
  }
  return true;
}

SpectralMeasure::MassMap n_point_marginal(const SpectralMeasure& mu, int n) {
  SpectralMeasure::MassMap out;
  mu.for_each([&](const CellSet& cells, double mass, double mult) {
    if (static_cast<int>(cells.size()) == n && mass - mult != 0.0) out.emplace(cells, mass - mult);
  });
  return out;
}

CardinalityProfile cardinality_profile(const SpectralMeasure& mu) {
  CardinalityProfile profile(1, 0.0);
  mu.for_each([&](const CellSet& cells, double mass, double mult) {
    if (profile.size() <= cells.size()) profile.resize(cells.size() + 1, 0.0);
    profile[cells.size()] += mass - mult;
  });
  return profile;
}

double singleton_mass(const SpectralMeasure& mu) {
  auto profile = cardinality_profile(mu);
  return profile.size() > 1 ? profile[1] : 0.0;
}

CardinalityProfile estimate_cardinality_profile(const SpectralMeasure& mu, std::size_t k,
                                                std::uint64_t seed) {
  auto draws = sample_sets(mu, k, seed);
  CardinalityProfile profile(1, 0.0);
  const double weight = mu.total_mass() / static_cast<double>(k);
  for (const auto& s : draws) {
    if (profile.size() <= s.size()) profile.resize(s.size() + 1, 0.0);
    profile[s.size()] += weight;
  }
  return profile;
}

std::vector<CellSet> sample_sets(const SpectralMeasure& mu, std::size_t k, std::uint64_t seed,
                                 std::size_t threads) {
  if (!(mu.total_mass() > 0.0)) throw ValidationError("cannot sample from a zero spectral measure");
  std::vector<CellSet> out(k);
  if (mu.is_sampled()) {
    parallel_chunks(k, kSampleChunk, threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
      auto rng = substream(seed, chunk);
      for (std::size_t i = b; i < e; ++i) out[i] = mu.sampler()(rng);
    });
    return out;
  }
  // inverse CDF over the stored sets
  std::vector<CellSet> sets;
  std::vector<double> cdf;
  if (mu.is_dense()) {
    double acc = 0.0;
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 0; m < mu.dense_masses().size(); ++m) {
      if (mu.dense_masses()[m] <= 0.0) continue;
      acc += mu.dense_masses()[m];
      masks.push_back(m);
      cdf.push_back(acc);
    }
    sets.reserve(masks.size());
    for (auto m : masks) sets.push_back(cells_of_mask(m));
  } else {
    double acc = 0.0;
    for (const auto& [cells, mass] : mu.sorted_entries()) {
      acc += mass;
      sets.push_back(cells);
      cdf.push_back(acc);
    }
  }
  const double total = cdf.back();
  parallel_chunks(k, kSampleChunk, threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    auto rng = substream(seed, chunk);
    std::uniform_real_distribution<double> uniform(0.0, total);
    for (std::size_t i = b; i < e; ++i) {
      auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform(rng));
      if (it == cdf.end()) --it;
      out[i] = sets[static_cast<std::size_t>(it - cdf.begin())];
    }
  });
  return out;
}

std::vector<CellSet> sample_sets_bitwise(const NoiseFunctional& f, std::size_t k, std::uint64_t seed) {
  if (!f.is_table()) throw Unsupported("bitwise spectral sampling needs a value table");
  const std::size_t n = f.grid().cell_count();
  const auto& values = f.values();
  double norm2 = 0.0;
  for (double v : values) norm2 += v * v;
  if (!(norm2 > 0.0)) throw ValidationError("cannot sample from a zero spectral measure");

  std::vector<CellSet> out(k);
  std::vector<double> current;
  std::vector<double> keep;
  std::vector<double> flip;
  for (std::size_t chunk = 0; chunk * kSampleChunk < k; ++chunk) {
    auto rng = substream(seed, chunk);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = chunk * kSampleChunk; i < std::min(k, (chunk + 1) * kSampleChunk); ++i) {
      current = values;
      CellSet cells;
      for (std::size_t cell = 0; cell < n; ++cell) {
        const std::size_t half = current.size() / 2;
        keep.resize(half);
        flip.resize(half);
        double keep2 = 0.0;
        double flip2 = 0.0;
        for (std::size_t j = 0; j < half; ++j) {
          // bit 0 is the current cell: even index omega=+1, odd index omega=-1
          keep[j] = 0.5 * (current[2 * j] + current[2 * j + 1]);
          flip[j] = 0.5 * (current[2 * j] - current[2 * j + 1]);
          keep2 += keep[j] * keep[j];
          flip2 += flip[j] * flip[j];
        }
        if (uniform(rng) * (keep2 + flip2) < flip2) {
          cells.push_back(static_cast<std::uint32_t>(cell));
          current.swap(flip);
        } else {
          current.swap(keep);
        }
      }
      out[i] = std::move(cells);
    }
  }
  return out;
}

}  // namespace noisespec
