#include "noisespec/elementary_set.hpp"

#include <algorithm>
#include <sstream>

#include "noisespec/errors.hpp"

namespace noisespec {

namespace {

std::vector<CellRange> canonical(std::vector<CellRange> ranges) {
  std::erase_if(ranges, [](const CellRange& r) { return r.lo >= r.hi; });
  std::sort(ranges.begin(), ranges.end(),
            [](const CellRange& a, const CellRange& b) { return a.lo < b.lo; });
  std::vector<CellRange> out;
  for (const auto& r : ranges) {
    if (!out.empty() && r.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, r.hi);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

void require_same_grid(const ElementarySet& a, const ElementarySet& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("elementary sets live on different grids");
}

}  // namespace

ElementarySet ElementarySet::empty(const TimeGrid& grid) { return ElementarySet(grid, {}); }

ElementarySet ElementarySet::full(const TimeGrid& grid) {
  return ElementarySet(grid, {{0, grid.cell_count()}});
}

ElementarySet ElementarySet::interval(const TimeGrid& grid, std::size_t lo, std::size_t hi) {
  return from_ranges(grid, {{lo, hi}});
}

ElementarySet ElementarySet::from_ranges(const TimeGrid& grid, std::vector<CellRange> ranges) {
  for (const auto& r : ranges) {
    if (r.lo > r.hi || r.hi > grid.cell_count()) {
      throw ValidationError("cell range [" + std::to_string(r.lo) + "," + std::to_string(r.hi) +
                            ") outside grid of " + std::to_string(grid.cell_count()) + " cells");
    }
  }
  return ElementarySet(grid, canonical(std::move(ranges)));
}

ElementarySet ElementarySet::from_cells(const TimeGrid& grid, const CellSet& cells) {
  std::vector<CellRange> ranges;
  ranges.reserve(cells.size());
  for (auto c : cells) ranges.push_back({c, std::size_t{c} + 1});
  return from_ranges(grid, std::move(ranges));
}

ElementarySet ElementarySet::parse(const TimeGrid& grid, const std::string& text) {
  std::vector<CellRange> ranges;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::erase_if(item, [](char c) { return c == ' '; });
    if (item.empty()) continue;
    auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        std::size_t cell = std::stoul(item);
        ranges.push_back({cell, cell + 1});
      } else {
        ranges.push_back({std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1))});
      }
    } catch (const std::logic_error&) {
      throw ValidationError("malformed cell range '" + item + "' (expected lo:hi)");
    }
  }
  return from_ranges(grid, std::move(ranges));
}

ElementarySet ElementarySet::covering(const TimeGrid& grid, const Rational& a, const Rational& b) {
  Rational lo_t = std::max(a, grid.start());
  Rational hi_t = std::min(b, grid.end());
  if (!(lo_t < hi_t)) return empty(grid);
  Rational width = grid.cell_width();
  Rational lo_scaled = (lo_t - grid.start()) / width;
  Rational hi_scaled = (hi_t - grid.start()) / width;
  // open interval (a,b): first cell is floor(lo), last cell is ceil(hi) - 1
  auto lo = static_cast<std::size_t>(lo_scaled.numerator() / lo_scaled.denominator());
  auto hi = static_cast<std::size_t>((hi_scaled.numerator() + hi_scaled.denominator() - 1) /
                                     hi_scaled.denominator());
  return interval(grid, lo, std::min(hi, grid.cell_count()));
}

std::size_t ElementarySet::cell_count() const {
  std::size_t n = 0;
  for (const auto& r : ranges_) n += r.hi - r.lo;
  return n;
}

bool ElementarySet::contains(std::size_t cell) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), cell,
                             [](std::size_t c, const CellRange& r) { return c < r.hi; });
  return it != ranges_.end() && it->lo <= cell;
}

bool ElementarySet::contains_all(const CellSet& cells) const {
  return std::all_of(cells.begin(), cells.end(), [&](auto c) { return contains(c); });
}

bool ElementarySet::meets(const CellSet& cells) const {
  return std::any_of(cells.begin(), cells.end(), [&](auto c) { return contains(c); });
}

std::uint32_t ElementarySet::mask() const {
  if (grid_.cell_count() > 32) throw CapExceeded("mask requires at most 32 cells");
  std::uint32_t m = 0;
  for (const auto& r : ranges_) {
    for (std::size_t c = r.lo; c < r.hi; ++c) m |= std::uint32_t{1} << c;
  }
  return m;
}

CellSet ElementarySet::cells() const {
  CellSet out;
  for (const auto& r : ranges_) {
    for (std::size_t c = r.lo; c < r.hi; ++c) out.push_back(static_cast<std::uint32_t>(c));
  }
  return out;
}

std::string ElementarySet::to_string() const {
  std::string out;
  for (const auto& r : ranges_) {
    if (!out.empty()) out += ',';
    out += std::to_string(r.lo) + ":" + std::to_string(r.hi);
  }
  return out;
}

ElementarySet set_union(const ElementarySet& a, const ElementarySet& b) {
  require_same_grid(a, b);
  auto ranges = a.ranges();
  ranges.insert(ranges.end(), b.ranges().begin(), b.ranges().end());
  return ElementarySet::from_ranges(a.grid(), std::move(ranges));
}

ElementarySet set_intersection(const ElementarySet& a, const ElementarySet& b) {
  require_same_grid(a, b);
  std::vector<CellRange> out;
  auto i = a.ranges().begin();
  auto j = b.ranges().begin();
  while (i != a.ranges().end() && j != b.ranges().end()) {
    std::size_t lo = std::max(i->lo, j->lo);
    std::size_t hi = std::min(i->hi, j->hi);
    if (lo < hi) out.push_back({lo, hi});
    if (i->hi < j->hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return ElementarySet::from_ranges(a.grid(), std::move(out));
}

ElementarySet set_complement(const ElementarySet& a) {
  std::vector<CellRange> out;
  std::size_t cursor = 0;
  for (const auto& r : a.ranges()) {
    if (cursor < r.lo) out.push_back({cursor, r.lo});
    cursor = r.hi;
  }
  if (cursor < a.grid().cell_count()) out.push_back({cursor, a.grid().cell_count()});
  return ElementarySet::from_ranges(a.grid(), std::move(out));
}

ElementarySet set_difference(const ElementarySet& a, const ElementarySet& b) {
  return set_intersection(a, set_complement(b));
}

bool is_subset(const ElementarySet& a, const ElementarySet& b) {
  return set_intersection(a, b) == a;
}

}  // namespace noisespec
