#include "noisespec/noise_functional.hpp"

#include <cmath>
#include <numeric>

#include "noisespec/chaos_transform.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/hermite.hpp"

namespace noisespec {

namespace {

void require_dense_grid(const TimeGrid& grid) {
  if (!grid.fits_dense()) {
    throw CapExceeded("value tables are limited to " + std::to_string(TimeGrid::kDenseCellCap) +
                      " cells (grid has " + std::to_string(grid.cell_count()) + ")");
  }
}

std::uint32_t sign_pattern(std::span<const double> omega, std::size_t cells) {
  if (omega.size() != cells) throw DimensionMismatch("sign vector length must equal the cell count");
  std::uint32_t x = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (omega[i] == -1.0) {
      x |= std::uint32_t{1} << i;
    } else if (omega[i] != 1.0) {
      throw ValidationError("Rademacher cells take values +1 or -1");
    }
  }
  return x;
}

double evaluate_chaos(const ChaosCoefficients& c, std::span<const double> omega) {
  const std::size_t cells = c.grid().cell_count();
  if (c.law() == CellLaw::rademacher) {
    if (c.is_dense()) {
      std::uint32_t x = sign_pattern(omega, cells);
      double s = 0.0;
      auto w = c.dense_values();
      for (std::uint32_t m = 0; m < w.size(); ++m) {
        s += (std::popcount(m & x) % 2 == 0) ? w[m] : -w[m];
      }
      return s;
    }
    if (omega.size() != cells) throw DimensionMismatch("sign vector length must equal the cell count");
    double s = 0.0;
    for (const auto& [index, coeff] : c.sparse_entries()) {
      double p = coeff;
      for (const auto& f : index) p *= omega[f.cell];
      s += p;
    }
    return s;
  }
  const auto d = static_cast<std::size_t>(c.channels());
  if (omega.size() != cells * d) throw DimensionMismatch("increment vector has wrong length");
  const double inv_sqrt_h = 1.0 / std::sqrt(to_double(c.grid().cell_width()));
  double s = 0.0;
  for (const auto& [index, coeff] : c.sparse_entries()) {
    double p = coeff;
    for (const auto& f : index) {
      p *= hermite::orthonormal(f.degree, omega[f.cell * d + f.channel] * inv_sqrt_h);
    }
    s += p;
  }
  return s;
}

}  // namespace

NoiseFunctional NoiseFunctional::table(TimeGrid grid, std::vector<double> values) {
  require_dense_grid(grid);
  if (values.size() != (std::size_t{1} << grid.cell_count())) {
    throw DimensionMismatch("value table size must be 2^cells");
  }
  return NoiseFunctional(std::move(grid), RademacherTable{std::move(values)});
}

NoiseFunctional NoiseFunctional::tabulate(TimeGrid grid,
                                          const std::function<double(std::span<const int>)>& fn) {
  require_dense_grid(grid);
  const std::size_t n = grid.cell_count();
  std::vector<double> values(std::size_t{1} << n);
  std::vector<int> omega(n);
  for (std::size_t x = 0; x < values.size(); ++x) {
    for (std::size_t i = 0; i < n; ++i) omega[i] = ((x >> i) & 1U) != 0U ? -1 : 1;
    values[x] = fn(omega);
  }
  return table(std::move(grid), std::move(values));
}

NoiseFunctional NoiseFunctional::chaos(ChaosCoefficients coeffs) {
  TimeGrid grid = coeffs.grid();
  return NoiseFunctional(std::move(grid), ChaosForm{std::move(coeffs)});
}

NoiseFunctional NoiseFunctional::brownian(TimeGrid grid, BrownianProgram program) {
  if (program.channels < 1) throw ValidationError("Brownian program needs at least one channel");
  return NoiseFunctional(std::move(grid), std::move(program));
}

NoiseFunctional NoiseFunctional::family(TimeGrid grid, FamilyRef ref) {
  return NoiseFunctional(std::move(grid), std::move(ref));
}

std::string NoiseFunctional::backend_name() const {
  switch (backend_.index()) {
    case 0: return "table";
    case 1: return "chaos";
    case 2: return "brownian";
    default: return "family";
  }
}

CellLaw NoiseFunctional::law() const {
  if (is_chaos()) return coeffs().law();
  if (is_brownian()) return CellLaw::gaussian;
  if (is_family()) return materialize(*this).law();
  return CellLaw::rademacher;
}

double evaluate(const NoiseFunctional& f, std::span<const double> omega) {
  if (f.is_table()) return f.values()[sign_pattern(omega, f.grid().cell_count())];
  if (f.is_chaos()) return evaluate_chaos(f.coeffs(), omega);
  if (f.is_brownian()) return f.program().evaluate(f.grid(), omega);
  return evaluate(materialize(f), omega);
}

double inner_product(const NoiseFunctional& f, const NoiseFunctional& g) {
  if (!(f.grid() == g.grid())) throw GridMismatch("functionals live on different grids");
  if (f.is_table() && g.is_table()) {
    const auto& a = f.values();
    const auto& b = g.values();
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / static_cast<double>(a.size());
  }
  return dot(decompose(f), decompose(g));
}

double expectation(const NoiseFunctional& f) {
  if (f.is_table()) {
    const auto& v = f.values();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }
  return decompose(f).mean();
}

double norm_squared(const NoiseFunctional& f) {
  if (f.is_table()) return inner_product(f, f);
  auto c = decompose(f);
  return c.norm_squared() + c.truncation_residual();
}

double distance(const NoiseFunctional& f, const NoiseFunctional& g) {
  return std::sqrt(std::max(0.0, norm_squared(linear_combination(1.0, f, -1.0, g))));
}

NoiseFunctional shift(const NoiseFunctional& f, long k, ShiftMode mode) {
  if (f.is_table() && mode == ShiftMode::cyclic) {
    const auto n = static_cast<long>(f.grid().cell_count());
    const auto& old_values = f.values();
    std::vector<double> values(old_values.size());
    for (std::size_t x = 0; x < values.size(); ++x) {
      std::size_t source = 0;
      for (long i = 0; i < n; ++i) {
        long from = (((i + k) % n) + n) % n;
        if ((x >> from) & 1U) source |= std::size_t{1} << i;
      }
      values[x] = old_values[source];
    }
    return NoiseFunctional::table(f.grid(), std::move(values));
  }
  if (f.is_table()) {
    return reconstruct(decompose(f).translated(k, false));
  }
  if (f.is_chaos()) {
    return NoiseFunctional::chaos(f.coeffs().translated(k, mode == ShiftMode::cyclic));
  }
  throw Unsupported("shift requires a table or chaos backend");
}

NoiseFunctional linear_combination(double alpha, const NoiseFunctional& f, double beta,
                                   const NoiseFunctional& g) {
  if (!(f.grid() == g.grid())) throw GridMismatch("functionals live on different grids");
  if (f.is_table() && g.is_table()) {
    std::vector<double> values(f.values().size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = alpha * f.values()[i] + beta * g.values()[i];
    }
    return NoiseFunctional::table(f.grid(), std::move(values));
  }
  auto c = linear_combination(alpha, decompose(f), beta, decompose(g));
  return NoiseFunctional::chaos(std::move(c));
}

NoiseFunctional tensor_product(const NoiseFunctional& g, const NoiseFunctional& h) {
  if (g.is_table() && h.is_table()) {
    TimeGrid grid = g.grid().concat(h.grid());
    require_dense_grid(grid);
    const std::size_t shift_bits = g.grid().cell_count();
    std::vector<double> values(std::size_t{1} << grid.cell_count());
    for (std::size_t xr = 0; xr < h.values().size(); ++xr) {
      for (std::size_t xl = 0; xl < g.values().size(); ++xl) {
        values[xl | (xr << shift_bits)] = g.values()[xl] * h.values()[xr];
      }
    }
    return NoiseFunctional::table(std::move(grid), std::move(values));
  }
  return NoiseFunctional::chaos(outer_product(decompose(g), decompose(h)));
}

NoiseFunctional to_table(const NoiseFunctional& f) {
  if (f.is_table()) return f;
  return reconstruct(decompose(f));
}

}  // namespace noisespec
