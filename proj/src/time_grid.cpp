#include "noisespec/time_grid.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "noisespec/errors.hpp"

namespace noisespec {

namespace {

std::int64_t checked_pow(std::int64_t base, int exponent) {
  std::int64_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    if (out > std::numeric_limits<std::int64_t>::max() / base) {
      throw ValidationError("integer overflow in grid arithmetic");
    }
    out *= base;
  }
  return out;
}

std::int64_t parse_int(std::string_view text, const std::string& whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("not a rational number: '" + whole + "'");
  }
  return value;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ValidationError("empty rational");
  if (auto slash = text.find('/'); slash != std::string::npos) {
    std::int64_t num = parse_int(std::string_view(text).substr(0, slash), text);
    std::int64_t den = parse_int(std::string_view(text).substr(slash + 1), text);
    if (den == 0) throw ValidationError("zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  std::string_view rest(text);
  std::int64_t exponent = 0;
  if (auto e = rest.find_first_of("eE"); e != std::string_view::npos) {
    exponent = parse_int(rest.substr(e + 1), text);
    rest = rest.substr(0, e);
  }
  bool negative = false;
  if (!rest.empty() && (rest.front() == '-' || rest.front() == '+')) {
    negative = rest.front() == '-';
    rest.remove_prefix(1);
  }
  std::string digits;
  if (auto dot = rest.find('.'); dot != std::string_view::npos) {
    digits = std::string(rest.substr(0, dot)) + std::string(rest.substr(dot + 1));
    exponent -= static_cast<std::int64_t>(rest.size() - dot - 1);
  } else {
    digits = std::string(rest);
  }
  if (digits.empty()) throw ValidationError("not a rational number: '" + text + "'");
  Rational value(parse_int(digits, text));
  if (exponent >= 0) {
    value *= checked_pow(10, static_cast<int>(exponent));
  } else {
    value /= checked_pow(10, static_cast<int>(-exponent));
  }
  return negative ? -value : value;
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw ValidationError("non-finite time value");
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // mantissa * 2^53 is an exact integer.
  auto num = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  while (exponent < 0 && num % 2 == 0 && num != 0) {
    num /= 2;
    ++exponent;
  }
  if (num == 0) return Rational(0);
  if (exponent >= 0) return Rational(num * checked_pow(2, exponent));
  if (exponent < -62) throw ValidationError("time value needs more than 62 binary digits");
  return Rational(num, checked_pow(2, -exponent));
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

TimeGrid::TimeGrid(Rational start, Rational end, int level, int base)
    : TimeGrid(start, end, 0, base, level) {
  if (base != 2 && base != 3) throw ValidationError("grid base must be 2 or 3");
  if (level < 0) throw ValidationError("grid level must be nonnegative");
  cells_ = static_cast<std::size_t>(checked_pow(base, level));
  if (cells_ > (std::size_t{1} << 31)) throw CapExceeded("grid has too many cells");
}

TimeGrid::TimeGrid(Rational start, Rational end, std::size_t cells, int base,
                   std::optional<int> level)
    : start_(start), end_(end), cells_(cells), base_(base), level_(level) {
  if (!(start_ < end_)) throw ValidationError("grid start must precede end");
}

TimeGrid TimeGrid::uniform(Rational start, Rational end, std::size_t cells, int base) {
  if (base != 2 && base != 3) throw ValidationError("grid base must be 2 or 3");
  if (cells == 0) throw ValidationError("grid needs at least one cell");
  return TimeGrid(start, end, cells, base, std::nullopt);
}

Rational TimeGrid::boundary(std::size_t i) const {
  if (i > cells_) throw ValidationError("boundary index outside grid");
  return start_ + (end_ - start_) * Rational(static_cast<std::int64_t>(i),
                                             static_cast<std::int64_t>(cells_));
}

std::optional<std::size_t> TimeGrid::boundary_index(const Rational& t) const {
  if (t < start_ || t > end_) return std::nullopt;
  Rational scaled = (t - start_) / cell_width();
  if (scaled.denominator() != 1) return std::nullopt;
  return static_cast<std::size_t>(scaled.numerator());
}

std::size_t TimeGrid::cell_of(const Rational& t) const {
  if (t < start_ || !(t < end_)) throw ValidationError("time outside grid window");
  Rational scaled = (t - start_) / cell_width();
  return static_cast<std::size_t>(scaled.numerator() / scaled.denominator());
}

TimeGrid TimeGrid::refine(int k) const {
  if (k < 0) throw ValidationError("refinement must be nonnegative");
  auto factor = static_cast<std::size_t>(checked_pow(base_, k));
  std::optional<int> level;
  if (level_) level = *level_ + k;
  return TimeGrid(start_, end_, cells_ * factor, base_, level);
}

TimeGrid TimeGrid::window(std::size_t lo, std::size_t hi) const {
  if (lo >= hi || hi > cells_) throw ValidationError("invalid grid window");
  if (lo == 0 && hi == cells_) return *this;
  return TimeGrid(boundary(lo), boundary(hi), hi - lo, base_, std::nullopt);
}

bool TimeGrid::adjacent_to(const TimeGrid& right) const {
  return end_ == right.start_ && cell_width() == right.cell_width();
}

TimeGrid TimeGrid::concat(const TimeGrid& right) const {
  if (!adjacent_to(right)) throw GridMismatch("grids are not adjacent with equal cell width");
  std::size_t cells = cells_ + right.cells_;
  std::optional<int> level;
  std::size_t power = 1;
  for (int l = 0; power <= cells; ++l, power *= static_cast<std::size_t>(base_)) {
    if (power == cells) level = l;
  }
  return TimeGrid(start_, right.end_, cells, base_, level);
}

}  // namespace noisespec
