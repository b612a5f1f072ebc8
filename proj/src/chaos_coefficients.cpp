#include "noisespec/chaos_coefficients.hpp"

#include <algorithm>
#include <numeric>

#include "noisespec/errors.hpp"

namespace noisespec {

SpectralIndex rademacher_index(const CellSet& cells) {
  SpectralIndex index;
  index.reserve(cells.size());
  for (auto c : cells) index.push_back({c, 0, 1});
  return index;
}

CellSet support_of(const SpectralIndex& index) {
  CellSet cells;
  for (const auto& f : index) {
    if (cells.empty() || cells.back() != f.cell) cells.push_back(f.cell);
  }
  return cells;
}

std::size_t cardinality(const SpectralIndex& index) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i == 0 || index[i].cell != index[i - 1].cell) ++n;
  }
  return n;
}

int total_degree(const SpectralIndex& index) {
  int d = 0;
  for (const auto& f : index) d += f.degree;
  return d;
}

bool has_multiplicity(const SpectralIndex& index) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i].degree >= 2) return true;
    if (i > 0 && index[i].cell == index[i - 1].cell) return true;
  }
  return false;
}

CellSet cells_of_mask(std::uint32_t mask) {
  CellSet cells;
  cells.reserve(static_cast<std::size_t>(std::popcount(mask)));
  while (mask != 0) {
    cells.push_back(static_cast<std::uint32_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return cells;
}

std::uint32_t mask_of(const CellSet& cells) {
  std::uint32_t m = 0;
  for (auto c : cells) {
    if (c >= 32) throw CapExceeded("cell index too large for a dense mask");
    m |= std::uint32_t{1} << c;
  }
  return m;
}

bool canonical_less(const SpectralIndex& a, const SpectralIndex& b) {
  auto ca = cardinality(a);
  auto cb = cardinality(b);
  if (ca != cb) return ca < cb;
  return a < b;
}

bool canonical_less(const CellSet& a, const CellSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

namespace {

void require_dense_index(const SpectralIndex& index) {
  for (const auto& f : index) {
    if (f.channel != 0 || f.degree != 1) {
      throw Unsupported("Hermite index in a Rademacher expansion");
    }
  }
}

void require_compatible(const ChaosCoefficients& a, const ChaosCoefficients& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("chaos expansions live on different grids");
  if (a.law() != b.law()) throw Unsupported("Rademacher and Gaussian expansions do not mix");
}

}  // namespace

ChaosCoefficients ChaosCoefficients::dense(TimeGrid grid, std::vector<double> walsh) {
  if (!grid.fits_dense()) {
    throw CapExceeded("dense Walsh spectrum limited to " +
                      std::to_string(TimeGrid::kDenseCellCap) + " cells");
  }
  if (walsh.size() != (std::size_t{1} << grid.cell_count())) {
    throw DimensionMismatch("Walsh spectrum size does not match 2^cells");
  }
  ChaosCoefficients out(std::move(grid), CellLaw::rademacher, 1, 1);
  out.dense_ = true;
  out.walsh_ = std::move(walsh);
  return out;
}

ChaosCoefficients ChaosCoefficients::sparse(TimeGrid grid, CellLaw law, SparseMap entries,
                                            int channels, int degree_cap) {
  if (channels < 1) throw ValidationError("channel count must be positive");
  for (const auto& [index, c] : entries) {
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto& f = index[i];
      if (f.cell >= grid.cell_count()) throw ValidationError("chaos index cell outside grid");
      if (f.channel >= channels) throw ValidationError("chaos index channel out of range");
      if (f.degree == 0) throw ValidationError("chaos index with zero degree");
      if (i > 0 && !(std::pair(index[i - 1].cell, index[i - 1].channel) <
                     std::pair(f.cell, f.channel))) {
        throw ValidationError("chaos index factors must be sorted and distinct");
      }
      if (law == CellLaw::rademacher && (f.degree != 1 || f.channel != 0)) {
        throw ValidationError("Rademacher chaos indices are plain cell sets");
      }
    }
  }
  ChaosCoefficients out(std::move(grid), law, channels, degree_cap);
  out.entries_ = std::move(entries);
  return out;
}

ChaosCoefficients ChaosCoefficients::rademacher(
    TimeGrid grid, const std::vector<std::pair<CellSet, double>>& entries) {
  SparseMap map;
  for (auto [cells, c] : entries) {
    std::sort(cells.begin(), cells.end());
    if (std::adjacent_find(cells.begin(), cells.end()) != cells.end()) {
      throw ValidationError("repeated cell in a Rademacher index");
    }
    map[rademacher_index(cells)] += c;
  }
  return sparse(std::move(grid), CellLaw::rademacher, std::move(map));
}

double ChaosCoefficients::coefficient(const SpectralIndex& index) const {
  if (dense_) {
    for (const auto& f : index) {
      if (f.channel != 0 || f.degree != 1) return 0.0;
    }
    return walsh_[mask_of(support_of(index))];
  }
  auto it = entries_.find(index);
  return it == entries_.end() ? 0.0 : it->second;
}

double ChaosCoefficients::mean() const { return dense_ ? walsh_[0] : coefficient(SpectralIndex{}); }

double ChaosCoefficients::norm_squared() const {
  double s = 0.0;
  if (dense_) {
    for (double c : walsh_) s += c * c;
  } else {
    for (const auto& [index, c] : entries_) s += c * c;
  }
  return s;
}

std::size_t ChaosCoefficients::nonzero_count() const {
  if (dense_) {
    return static_cast<std::size_t>(
        std::count_if(walsh_.begin(), walsh_.end(), [](double c) { return c != 0.0; }));
  }
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.second != 0.0; }));
}

std::vector<std::pair<SpectralIndex, double>> ChaosCoefficients::sorted_entries() const {
  std::vector<std::pair<SpectralIndex, double>> out;
  for_each([&](const SpectralIndex& index, double c) {
    if (c != 0.0) out.emplace_back(index, c);
  });
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
  return out;
}

ChaosCoefficients ChaosCoefficients::to_sparse() const {
  if (!dense_) return *this;
  SparseMap map;
  for_each([&](const SpectralIndex& index, double c) { map.emplace(index, c); });
  ChaosCoefficients out = sparse(grid_, law_, std::move(map), channels_, degree_cap_);
  out.residual_ = residual_;
  return out;
}

ChaosCoefficients ChaosCoefficients::to_dense() const {
  if (dense_) return *this;
  if (law_ != CellLaw::rademacher) throw Unsupported("only Rademacher expansions have a dense form");
  if (!grid_.fits_dense()) throw CapExceeded("grid too large for a dense Walsh spectrum");
  std::vector<double> walsh(std::size_t{1} << grid_.cell_count(), 0.0);
  for (const auto& [index, c] : entries_) {
    require_dense_index(index);
    walsh[mask_of(support_of(index))] += c;
  }
  ChaosCoefficients out = dense(grid_, std::move(walsh));
  out.residual_ = residual_;
  return out;
}

ChaosCoefficients ChaosCoefficients::translated(long shift, bool cyclic) const {
  const auto n = static_cast<long>(grid_.cell_count());
  auto move_cell = [&](std::uint32_t cell) -> std::uint32_t {
    long target = static_cast<long>(cell) + shift;
    if (cyclic) {
      target = ((target % n) + n) % n;
    } else if (target < 0 || target >= n) {
      throw ValidationError("shift moves spectral support outside the window");
    }
    return static_cast<std::uint32_t>(target);
  };
  if (dense_) {
    std::vector<double> walsh(walsh_.size(), 0.0);
    for (std::uint32_t m = 0; m < walsh_.size(); ++m) {
      if (walsh_[m] == 0.0) continue;
      std::uint32_t moved = 0;
      for (auto c : cells_of_mask(m)) moved |= std::uint32_t{1} << move_cell(c);
      walsh[moved] = walsh_[m];
    }
    ChaosCoefficients out = dense(grid_, std::move(walsh));
    out.residual_ = residual_;
    return out;
  }
  SparseMap map;
  for (const auto& [index, c] : entries_) {
    if (c == 0.0) continue;
    SpectralIndex moved = index;
    for (auto& f : moved) f.cell = move_cell(f.cell);
    std::sort(moved.begin(), moved.end());
    map.emplace(std::move(moved), c);
  }
  ChaosCoefficients out = sparse(grid_, law_, std::move(map), channels_, degree_cap_);
  out.residual_ = residual_;
  return out;
}

ChaosCoefficients ChaosCoefficients::scaled(double factor) const {
  ChaosCoefficients out = *this;
  for (auto& c : out.walsh_) c *= factor;
  for (auto& [index, c] : out.entries_) c *= factor;
  out.residual_ *= factor * factor;
  return out;
}

ChaosCoefficients ChaosCoefficients::on_grid(const TimeGrid& grid) const {
  if (grid.cell_count() != grid_.cell_count()) throw GridMismatch("relabeling needs equal cell counts");
  ChaosCoefficients out = *this;
  out.grid_ = grid;
  return out;
}

double dot(const ChaosCoefficients& a, const ChaosCoefficients& b) {
  require_compatible(a, b);
  if (a.is_dense() && b.is_dense()) {
    auto x = a.dense_values();
    auto y = b.dense_values();
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  }
  const ChaosCoefficients& walker = a.is_dense() ? b : a;
  const ChaosCoefficients& other = a.is_dense() ? a : b;
  double s = 0.0;
  for (const auto& [index, c] : walker.sparse_entries()) s += c * other.coefficient(index);
  return s;
}

ChaosCoefficients linear_combination(double alpha, const ChaosCoefficients& a, double beta,
                                     const ChaosCoefficients& b) {
  require_compatible(a, b);
  if (a.is_dense() && b.is_dense()) {
    std::vector<double> out(a.dense_values().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = alpha * a.dense_values()[i] + beta * b.dense_values()[i];
    }
    return ChaosCoefficients::dense(a.grid(), std::move(out));
  }
  ChaosCoefficients::SparseMap map;
  a.for_each([&](const SpectralIndex& index, double c) { map[index] += alpha * c; });
  b.for_each([&](const SpectralIndex& index, double c) { map[index] += beta * c; });
  return ChaosCoefficients::sparse(a.grid(), a.law(), std::move(map),
                                   std::max(a.channels(), b.channels()),
                                   std::max(a.degree_cap(), b.degree_cap()));
}

ChaosCoefficients outer_product(const ChaosCoefficients& left, const ChaosCoefficients& right) {
  if (left.law() != right.law()) throw Unsupported("Rademacher and Gaussian expansions do not mix");
  TimeGrid grid = left.grid().concat(right.grid());
  const auto offset = static_cast<std::uint32_t>(left.grid().cell_count());
  if (left.law() == CellLaw::rademacher && grid.fits_dense()) {
    auto l = left.to_dense();
    auto r = right.to_dense();
    std::vector<double> walsh(std::size_t{1} << grid.cell_count(), 0.0);
    for (std::uint32_t mr = 0; mr < r.dense_values().size(); ++mr) {
      double cr = r.dense_values()[mr];
      if (cr == 0.0) continue;
      for (std::uint32_t ml = 0; ml < l.dense_values().size(); ++ml) {
        walsh[ml | (mr << offset)] = l.dense_values()[ml] * cr;
      }
    }
    return ChaosCoefficients::dense(std::move(grid), std::move(walsh));
  }
  ChaosCoefficients::SparseMap map;
  left.for_each([&](const SpectralIndex& li, double cl) {
    right.for_each([&](const SpectralIndex& ri, double cr) {
      SpectralIndex index = li;
      for (auto f : ri) {
        f.cell += offset;
        index.push_back(f);
      }
      map.emplace(std::move(index), cl * cr);
    });
  });
  return ChaosCoefficients::sparse(std::move(grid), left.law(), std::move(map),
                                   std::max(left.channels(), right.channels()),
                                   std::max(left.degree_cap(), right.degree_cap()));
}

}  // namespace noisespec
