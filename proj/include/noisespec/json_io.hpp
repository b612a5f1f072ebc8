#pragma once

#include <string>

#include "json.hpp"
#include "noisespec/brownian_program.hpp"
#include "noisespec/noise_functional.hpp"
#include "noisespec/spectral_measure.hpp"
#include "noisespec/time_grid.hpp"

namespace noisespec {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json grid_to_json(const TimeGrid& grid);
TimeGrid grid_from_json(const Json& j);

Json kernel_to_json(const SimplexKernel& kernel);
SimplexKernel kernel_from_json(const Json& j);

Json program_to_json(const BrownianProgram& program);
BrownianProgram program_from_json(const Json& j);

/// Coefficient listing in canonical order.
Json coefficients_to_json(const ChaosCoefficients& c);
ChaosCoefficients coefficients_from_json(const TimeGrid& grid, const Json& data);

/// {schema_version, grid, backend, data}
Json functional_to_json(const NoiseFunctional& f);
NoiseFunctional functional_from_json(const Json& j);

/// {schema_version, grid, total_mass, multiplicity_mass, residual, entries}
Json measure_to_json(const SpectralMeasure& mu);
SpectralMeasure measure_from_json(const Json& j);

/// Parses a file; syntax errors name the file and byte offset.
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
/// Writes via a temporary file in the same directory and renames it.
void write_text_atomic(const std::string& path, const std::string& text);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

}  // namespace noisespec
