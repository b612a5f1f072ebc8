#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <boost/rational.hpp>

namespace noisespec {

using Rational = boost::rational<std::int64_t>;

/// Parses "3", "-1/4", "0.375" or "1e-3" into an exact rational.
Rational parse_rational(const std::string& text);
/// Exact conversion; every finite double is a dyadic rational.
Rational rational_from_double(double value);
double to_double(const Rational& r);
std::string to_string(const Rational& r);

/// Equal subdivision of [start, end) into independent noise cells.
///
/// Root grids have base^level cells (base 2, or base 3 for ternary-tree
/// families). Sub-window grids produced by window() keep the cell width of
/// their parent but carry no level.
class TimeGrid {
 public:
  static constexpr std::size_t kDenseCellCap = 24;

  TimeGrid(Rational start, Rational end, int level, int base = 2);

  static TimeGrid dyadic(int level) { return TimeGrid(Rational(0), Rational(1), level, 2); }
  static TimeGrid ternary(int level) { return TimeGrid(Rational(0), Rational(1), level, 3); }
  /// `cells` equal cells without a refinement level (like a window).
  static TimeGrid uniform(Rational start, Rational end, std::size_t cells, int base = 2);

  const Rational& start() const { return start_; }
  const Rational& end() const { return end_; }
  Rational cell_width() const { return (end_ - start_) / static_cast<std::int64_t>(cells_); }
  std::size_t cell_count() const { return cells_; }
  int base() const { return base_; }
  std::optional<int> level() const { return level_; }

  /// Time of boundary i, 0 <= i <= cell_count().
  Rational boundary(std::size_t i) const;
  /// Index of the boundary at time t, if t is a grid point.
  std::optional<std::size_t> boundary_index(const Rational& t) const;
  /// Cell containing t (t in [start, end)).
  std::size_t cell_of(const Rational& t) const;

  /// Each cell split into base^k equal cells.
  TimeGrid refine(int k) const;
  /// The contiguous sub-grid of cells [lo, hi).
  TimeGrid window(std::size_t lo, std::size_t hi) const;
  /// Whether `right` starts where this grid ends with the same cell width.
  bool adjacent_to(const TimeGrid& right) const;
  /// Concatenation of two adjacent grids.
  TimeGrid concat(const TimeGrid& right) const;

  bool fits_dense() const { return cells_ <= kDenseCellCap; }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.start_ == b.start_ && a.end_ == b.end_ && a.cells_ == b.cells_;
  }

 private:
  TimeGrid(Rational start, Rational end, std::size_t cells, int base, std::optional<int> level);

  Rational start_;
  Rational end_;
  std::size_t cells_;
  int base_;
  std::optional<int> level_;
};

}  // namespace noisespec
