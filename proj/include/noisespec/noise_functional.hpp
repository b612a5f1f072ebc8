#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "noisespec/brownian_program.hpp"
#include "noisespec/chaos_coefficients.hpp"
#include "noisespec/time_grid.hpp"

namespace noisespec {

/// Values of f on the 2^n sign patterns. Table index x encodes the pattern
/// with omega_i = -1 exactly when bit i of x is set.
struct RademacherTable {
  std::vector<double> values;
};

struct ChaosForm {
  ChaosCoefficients coeffs;
};

/// A member of a named refinement family, materialized on demand.
struct FamilyRef {
  std::string name;
  int level = 0;
  std::map<std::string, double> params;
};

/// Square-integrable functional of the cell noise on a grid.
class NoiseFunctional {
 public:
  using Backend = std::variant<RademacherTable, ChaosForm, BrownianProgram, FamilyRef>;

  static NoiseFunctional table(TimeGrid grid, std::vector<double> values);
  /// Tabulates fn(omega) over all sign patterns, omega_i in {+1, -1}.
  static NoiseFunctional tabulate(TimeGrid grid, const std::function<double(std::span<const int>)>& fn);
  static NoiseFunctional chaos(ChaosCoefficients coeffs);
  static NoiseFunctional brownian(TimeGrid grid, BrownianProgram program);
  static NoiseFunctional family(TimeGrid grid, FamilyRef ref);

  const TimeGrid& grid() const { return grid_; }
  const Backend& backend() const { return backend_; }
  std::string backend_name() const;
  CellLaw law() const;

  bool is_table() const { return std::holds_alternative<RademacherTable>(backend_); }
  bool is_chaos() const { return std::holds_alternative<ChaosForm>(backend_); }
  bool is_brownian() const { return std::holds_alternative<BrownianProgram>(backend_); }
  bool is_family() const { return std::holds_alternative<FamilyRef>(backend_); }

  const std::vector<double>& values() const { return std::get<RademacherTable>(backend_).values; }
  const ChaosCoefficients& coeffs() const { return std::get<ChaosForm>(backend_).coeffs; }
  const BrownianProgram& program() const { return std::get<BrownianProgram>(backend_); }
  const FamilyRef& family_ref() const { return std::get<FamilyRef>(backend_); }

 private:
  NoiseFunctional(TimeGrid grid, Backend backend)
      : grid_(std::move(grid)), backend_(std::move(backend)) {}

  TimeGrid grid_;
  Backend backend_;
};

enum class ShiftMode { cyclic, truncating };

/// omega: signs (+-1 per cell) for Rademacher backends, increments
/// (cell-major, channels per cell) for Gaussian backends.
double evaluate(const NoiseFunctional& f, std::span<const double> omega);

/// Exact L2 inner product. Tables average over all 2^n patterns; other
/// backends use chaos coefficients (Parseval).
double inner_product(const NoiseFunctional& f, const NoiseFunctional& g);
double expectation(const NoiseFunctional& f);
double norm_squared(const NoiseFunctional& f);
/// ||f - g||
double distance(const NoiseFunctional& f, const NoiseFunctional& g);

/// Time shift by k cells: spectral index S moves to S + k.
NoiseFunctional shift(const NoiseFunctional& f, long k, ShiftMode mode = ShiftMode::cyclic);

NoiseFunctional linear_combination(double alpha, const NoiseFunctional& f, double beta,
                                   const NoiseFunctional& g);

/// (g tensor h)(omega) = g(omega_left) * h(omega_right) on the concatenated grid.
NoiseFunctional tensor_product(const NoiseFunctional& g, const NoiseFunctional& h);

/// Dense value table (Rademacher backends only, at most 24 cells).
NoiseFunctional to_table(const NoiseFunctional& f);

/// Resolves a family backend into a concrete one; identity otherwise.
NoiseFunctional materialize(const NoiseFunctional& f);

}  // namespace noisespec
