#include "noisespec/brownian_program.hpp"

#include <algorithm>
#include <cmath>

#include "noisespec/errors.hpp"
#include "noisespec/hermite.hpp"

namespace noisespec {

namespace {

std::vector<std::uint16_t> default_channels(int order, std::vector<std::uint16_t> channels) {
  if (channels.empty()) channels.assign(static_cast<std::size_t>(order), 0);
  if (static_cast<int>(channels.size()) != order) {
    throw ValidationError("kernel channel list must have one entry per slot");
  }
  return channels;
}

double binomial(std::size_t n, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > n) return 0.0;
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= static_cast<double>(n - static_cast<std::size_t>(i)) / (i + 1);
  return out;
}

using SparseMap = ChaosCoefficients::SparseMap;

// Multiplies two Hermite indices, accumulating coeff * h_a * h_b into `out`.
void multiply_into(const SpectralIndex& a, const SpectralIndex& b, double coeff, SparseMap& out) {
  SpectralIndex base;
  struct Shared {
    std::uint32_t cell;
    std::uint16_t channel;
    std::vector<std::pair<int, double>> options;
  };
  std::vector<Shared> shared;
  auto i = a.begin();
  auto j = b.begin();
  auto key = [](const IndexFactor& f) { return std::pair(f.cell, f.channel); };
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && key(*i) < key(*j))) {
      base.push_back(*i++);
    } else if (i == a.end() || key(*j) < key(*i)) {
      base.push_back(*j++);
    } else {
      shared.push_back({i->cell, i->channel, hermite::product(i->degree, j->degree)});
      ++i;
      ++j;
    }
  }
  if (shared.empty()) {
    out[std::move(base)] += coeff;
    return;
  }
  std::vector<std::size_t> choice(shared.size(), 0);
  while (true) {
    SpectralIndex index = base;
    double c = coeff;
    for (std::size_t s = 0; s < shared.size(); ++s) {
      auto [degree, weight] = shared[s].options[choice[s]];
      c *= weight;
      if (degree > 0) {
        index.push_back({shared[s].cell, shared[s].channel, static_cast<std::uint16_t>(degree)});
      }
    }
    std::sort(index.begin(), index.end());
    out[std::move(index)] += c;
    std::size_t s = 0;
    while (s < shared.size() && ++choice[s] == shared[s].options.size()) {
      choice[s] = 0;
      ++s;
    }
    if (s == shared.size()) break;
  }
}

SparseMap multiply(const SparseMap& a, const SparseMap& b) {
  SparseMap out;
  for (const auto& [ia, ca] : a) {
    for (const auto& [ib, cb] : b) multiply_into(ia, ib, ca * cb, out);
  }
  return out;
}

SparseMap factor_chaos(const ProgramFactor& factor, const TimeGrid& grid) {
  SparseMap out;
  const double sqrt_h = std::sqrt(to_double(grid.cell_width()));
  if (const auto* kernel = std::get_if<SimplexKernel>(&factor)) {
    const double scale = std::pow(sqrt_h, kernel->order());
    kernel->for_each_entry(grid.cell_count(), [&](const SpectralIndex& index, double v) {
      out[index] += v * scale;
    });
  } else {
    const auto& poly = std::get<IncrementPolynomial>(factor);
    if (poly.cell >= grid.cell_count()) throw ValidationError("increment polynomial cell outside grid");
    std::vector<double> h(poly.coeffs.size(), 0.0);
    for (std::size_t m = 0; m < poly.coeffs.size(); ++m) {
      auto mono = hermite::monomial(static_cast<int>(m));
      for (std::size_t k = 0; k < mono.size(); ++k) h[k] += poly.coeffs[m] * mono[k];
    }
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k] == 0.0) continue;
      SpectralIndex index;
      if (k > 0) index.push_back({poly.cell, poly.channel, static_cast<std::uint16_t>(k)});
      out[index] += h[k];
    }
  }
  return out;
}

}  // namespace

SimplexKernel::SimplexKernel(int order, std::vector<std::uint16_t> channels,
                             std::variant<Constant, Separable, Table> form)
    : order_(order), channels_(std::move(channels)), form_(std::move(form)) {
  if (order_ < 0) throw ValidationError("kernel order must be nonnegative");
}

SimplexKernel SimplexKernel::constant(int order, double value, std::vector<std::uint16_t> channels) {
  return SimplexKernel(order, default_channels(order, std::move(channels)), Constant{value});
}

SimplexKernel SimplexKernel::separable(std::vector<std::vector<double>> factors,
                                       std::vector<std::uint16_t> channels) {
  const int order = static_cast<int>(factors.size());
  for (const auto& f : factors) {
    if (f.size() != factors.front().size()) throw ValidationError("separable factors differ in length");
  }
  return SimplexKernel(order, default_channels(order, std::move(channels)),
                       Separable{std::move(factors)});
}

SimplexKernel SimplexKernel::table(int order, std::map<SpectralIndex, double> entries) {
  for (const auto& [index, v] : entries) {
    if (static_cast<int>(index.size()) != order) throw ValidationError("kernel entry has wrong order");
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i].degree != 1) throw ValidationError("kernel entries are degree-1 indices");
      if (i > 0 && index[i - 1].cell >= index[i].cell) {
        throw ValidationError("kernel entries must lie on the strict simplex");
      }
    }
  }
  return SimplexKernel(order, {}, Table{std::move(entries)});
}

int SimplexKernel::max_channel() const {
  int m = 0;
  for (auto c : channels_) m = std::max(m, static_cast<int>(c));
  if (const auto* t = std::get_if<Table>(&form_)) {
    for (const auto& [index, v] : t->entries) {
      for (const auto& f : index) m = std::max(m, static_cast<int>(f.channel));
    }
  }
  return m;
}

double SimplexKernel::integrate(std::span<const double> increments, std::size_t cells,
                                int channels) const {
  const auto d = static_cast<std::size_t>(channels);
  if (increments.size() != cells * d) throw DimensionMismatch("increment vector has wrong length");
  if (max_channel() >= channels) throw DimensionMismatch("kernel uses a channel beyond the path");
  if (const auto* t = std::get_if<Table>(&form_)) {
    double s = 0.0;
    for (const auto& [index, v] : t->entries) {
      double p = v;
      for (const auto& f : index) {
        if (f.cell >= cells) throw DimensionMismatch("kernel entry outside the grid");
        p *= increments[f.cell * d + f.channel];
      }
      s += p;
    }
    return s;
  }
  const auto* sep = std::get_if<Separable>(&form_);
  if (sep && !sep->factors.empty() && sep->factors.front().size() != cells) {
    throw DimensionMismatch("separable kernel length does not match the grid");
  }
  const double c = sep ? 1.0 : std::get<Constant>(form_).value;
  std::vector<double> partial(static_cast<std::size_t>(order_) + 1, 0.0);
  partial[0] = 1.0;
  for (std::size_t i = 0; i < cells; ++i) {
    for (auto j = static_cast<std::size_t>(order_); j >= 1; --j) {
      double g = sep ? sep->factors[j - 1][i] : 1.0;
      partial[j] += partial[j - 1] * g * increments[i * d + channels_[j - 1]];
    }
  }
  return c * partial.back();
}

double SimplexKernel::isometry_norm2(const TimeGrid& grid) const {
  const double h = to_double(grid.cell_width());
  const std::size_t cells = grid.cell_count();
  if (const auto* t = std::get_if<Table>(&form_)) {
    double s = 0.0;
    for (const auto& [index, v] : t->entries) s += v * v * std::pow(h, order_);
    return s;
  }
  if (const auto* c = std::get_if<Constant>(&form_)) {
    return c->value * c->value * std::pow(h, order_) * binomial(cells, order_);
  }
  const auto& sep = std::get<Separable>(form_);
  std::vector<double> partial(static_cast<std::size_t>(order_) + 1, 0.0);
  partial[0] = 1.0;
  for (std::size_t i = 0; i < cells; ++i) {
    for (auto j = static_cast<std::size_t>(order_); j >= 1; --j) {
      double g = sep.factors[j - 1][i];
      partial[j] += partial[j - 1] * g * g * h;
    }
  }
  return partial.back();
}

void SimplexKernel::for_each_entry(std::size_t cells,
                                   const std::function<void(const SpectralIndex&, double)>& fn) const {
  if (const auto* t = std::get_if<Table>(&form_)) {
    for (const auto& [index, v] : t->entries) {
      if (v != 0.0) fn(index, v);
    }
    return;
  }
  const auto* sep = std::get_if<Separable>(&form_);
  if (sep && !sep->factors.empty() && sep->factors.front().size() != cells) {
    throw DimensionMismatch("separable kernel length does not match the grid");
  }
  const double c = sep ? 1.0 : std::get<Constant>(form_).value;
  const auto n = static_cast<std::size_t>(order_);
  if (n > cells) return;
  SpectralIndex index(n);
  std::vector<std::uint32_t> pos(n);
  for (std::size_t j = 0; j < n; ++j) pos[j] = static_cast<std::uint32_t>(j);
  while (true) {
    double v = c;
    for (std::size_t j = 0; j < n; ++j) {
      index[j] = {pos[j], channels_[j], 1};
      if (sep) v *= sep->factors[j][pos[j]];
    }
    if (v != 0.0) fn(index, v);
    // next combination
    std::size_t j = n;
    while (j > 0 && pos[j - 1] == cells - n + j - 1) --j;
    if (j == 0) break;
    ++pos[j - 1];
    for (std::size_t k = j; k < n; ++k) pos[k] = pos[k - 1] + 1;
  }
}

BrownianProgram BrownianProgram::ito(SimplexKernel kernel, int channels, double weight) {
  BrownianProgram p;
  p.channels = channels;
  p.terms.push_back({weight, {std::move(kernel)}});
  return p;
}

double BrownianProgram::evaluate(const TimeGrid& grid, std::span<const double> increments) const {
  const std::size_t cells = grid.cell_count();
  const auto d = static_cast<std::size_t>(channels);
  if (increments.size() != cells * d) throw DimensionMismatch("increment vector has wrong length");
  const double inv_sqrt_h = 1.0 / std::sqrt(to_double(grid.cell_width()));
  double total = constant;
  for (const auto& term : terms) {
    double p = term.weight;
    for (const auto& factor : term.factors) {
      if (const auto* kernel = std::get_if<SimplexKernel>(&factor)) {
        p *= kernel->integrate(increments, cells, channels);
      } else {
        const auto& poly = std::get<IncrementPolynomial>(factor);
        if (poly.cell >= cells || poly.channel >= channels) {
          throw DimensionMismatch("increment polynomial outside the path");
        }
        double xi = increments[poly.cell * d + poly.channel] * inv_sqrt_h;
        double v = 0.0;
        for (auto it = poly.coeffs.rbegin(); it != poly.coeffs.rend(); ++it) v = v * xi + *it;
        p *= v;
      }
    }
    total += p;
  }
  return total;
}

ChaosCoefficients BrownianProgram::chaos(const TimeGrid& grid) const {
  SparseMap total;
  if (constant != 0.0) total[SpectralIndex{}] += constant;
  for (const auto& term : terms) {
    SparseMap acc{{SpectralIndex{}, term.weight}};
    for (const auto& factor : term.factors) acc = multiply(acc, factor_chaos(factor, grid));
    for (auto& [index, c] : acc) total[index] += c;
  }
  double residual = 0.0;
  std::erase_if(total, [&](const auto& e) {
    for (const auto& f : e.first) {
      if (f.degree > degree_cap) {
        residual += e.second * e.second;
        return true;
      }
    }
    return false;
  });
  std::erase_if(total, [](const auto& e) { return e.second == 0.0; });
  auto out = ChaosCoefficients::sparse(grid, CellLaw::gaussian, std::move(total), channels, degree_cap);
  out.set_truncation_residual(residual);
  return out;
}

}  // namespace noisespec
