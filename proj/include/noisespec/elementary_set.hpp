#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "noisespec/time_grid.hpp"

namespace noisespec {

/// Sorted set of cell indices. Doubles as the discrete spectral set.
using CellSet = std::vector<std::uint32_t>;

struct CellRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  friend bool operator==(const CellRange&, const CellRange&) = default;
};

/// Finite union of grid-aligned intervals, stored as sorted, disjoint,
/// non-adjacent cell ranges. Adjacent ranges are merged on construction so
/// that (r,s) u (s,t) and (r,t) have one representation.
class ElementarySet {
 public:
  static ElementarySet empty(const TimeGrid& grid);
  static ElementarySet full(const TimeGrid& grid);
  static ElementarySet interval(const TimeGrid& grid, std::size_t lo, std::size_t hi);
  static ElementarySet from_ranges(const TimeGrid& grid, std::vector<CellRange> ranges);
  static ElementarySet from_cells(const TimeGrid& grid, const CellSet& cells);
  /// "0:2,5:6" -> cells [0,2) u [5,6). The empty string is the empty set.
  static ElementarySet parse(const TimeGrid& grid, const std::string& text);
  /// Cells meeting the open time interval (a, b), clipped to the window.
  static ElementarySet covering(const TimeGrid& grid, const Rational& a, const Rational& b);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<CellRange>& ranges() const { return ranges_; }

  bool is_empty() const { return ranges_.empty(); }
  std::size_t cell_count() const;
  bool contains(std::size_t cell) const;
  /// Every cell of `cells` lies in the set.
  bool contains_all(const CellSet& cells) const;
  /// Some cell of `cells` lies in the set.
  bool meets(const CellSet& cells) const;
  /// Bit i set iff cell i is in the set; requires a dense-sized grid.
  std::uint32_t mask() const;
  CellSet cells() const;
  std::string to_string() const;

  friend bool operator==(const ElementarySet& a, const ElementarySet& b) {
    return a.grid_ == b.grid_ && a.ranges_ == b.ranges_;
  }

 private:
  ElementarySet(TimeGrid grid, std::vector<CellRange> ranges)
      : grid_(std::move(grid)), ranges_(std::move(ranges)) {}

  TimeGrid grid_;
  std::vector<CellRange> ranges_;
};

ElementarySet set_union(const ElementarySet& a, const ElementarySet& b);
ElementarySet set_intersection(const ElementarySet& a, const ElementarySet& b);
ElementarySet set_complement(const ElementarySet& a);
ElementarySet set_difference(const ElementarySet& a, const ElementarySet& b);
bool is_subset(const ElementarySet& a, const ElementarySet& b);

}  // namespace noisespec
