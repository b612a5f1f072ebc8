#include "noisespec/json_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "noisespec/errors.hpp"
#include "noisespec/families.hpp"

namespace noisespec {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

double finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
  return x;
}

Rational rational_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number()) return rational_from_double(finite(v.get<double>(), key));
  throw ValidationError(std::string("field '") + key + "' must be a number or rational string");
}

void check_version(const Json& j) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    throw ValidationError("unsupported schema_version " + j.at("schema_version").dump());
  }
}

CellSet cells_from_json(const Json& j, std::size_t cell_count) {
  CellSet cells;
  try {
    cells = j.get<CellSet>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("cells must be a list of nonnegative integers");
  }
  std::sort(cells.begin(), cells.end());
  if (std::adjacent_find(cells.begin(), cells.end()) != cells.end()) {
    throw ValidationError("repeated cell in index");
  }
  if (!cells.empty() && cells.back() >= cell_count) throw ValidationError("cell index outside grid");
  return cells;
}

Json index_to_json(const SpectralIndex& index) {
  Json out = Json::array();
  for (const auto& f : index) out.push_back(Json::array({f.cell, f.channel, f.degree}));
  return out;
}

SpectralIndex index_from_json(const Json& j, std::size_t cell_count) {
  if (!j.is_array()) throw ValidationError("index must be a list of [cell, channel, degree]");
  SpectralIndex index;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3) throw ValidationError("index factor must be [cell, channel, degree]");
    IndexFactor f;
    f.cell = t[0].get<std::uint32_t>();
    f.channel = t[1].get<std::uint16_t>();
    f.degree = t[2].get<std::uint16_t>();
    if (f.cell >= cell_count) throw ValidationError("cell index outside grid");
    if (f.degree == 0) continue;
    index.push_back(f);
  }
  std::sort(index.begin(), index.end());
  for (std::size_t i = 1; i < index.size(); ++i) {
    if (index[i].cell == index[i - 1].cell && index[i].channel == index[i - 1].channel) {
      throw ValidationError("repeated (cell, channel) in index");
    }
  }
  return index;
}

std::vector<std::uint16_t> channels_field(const Json& j) {
  return get_or<std::vector<std::uint16_t>>(j, "channels", {});
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json grid_to_json(const TimeGrid& grid) {
  Json j;
  j["start"] = to_string(grid.start());
  j["end"] = to_string(grid.end());
  j["cells"] = grid.cell_count();
  j["base"] = grid.base();
  if (grid.level()) j["level"] = *grid.level();
  return j;
}

TimeGrid grid_from_json(const Json& j) {
  const Rational start = j.contains("start") ? rational_field(j, "start") : Rational(0);
  const Rational end = j.contains("end") ? rational_field(j, "end") : Rational(1);
  const int base = get_or<int>(j, "base", 2);
  if (j.contains("level") && !j.at("level").is_null()) {
    TimeGrid grid(start, end, get<int>(j, "level"), base);
    if (j.contains("cells") && get<std::size_t>(j, "cells") != grid.cell_count()) {
      throw ValidationError("grid cell count disagrees with its level");
    }
    return grid;
  }
  return TimeGrid::uniform(start, end, get<std::size_t>(j, "cells"), base);
}

Json kernel_to_json(const SimplexKernel& kernel) {
  Json j;
  j["order"] = kernel.order();
  if (!kernel.channels().empty()) j["channels"] = kernel.channels();
  std::visit(
      [&](const auto& form) {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, SimplexKernel::Constant>) {
          j["type"] = "constant";
          j["value"] = form.value;
        } else if constexpr (std::is_same_v<T, SimplexKernel::Separable>) {
          j["type"] = "separable";
          j["factors"] = form.factors;
        } else {
          j["type"] = "table";
          Json entries = Json::array();
          for (const auto& [index, v] : form.entries) entries.push_back({{"index", index_to_json(index)}, {"value", v}});
          j["entries"] = entries;
        }
      },
      kernel.form());
  return j;
}

SimplexKernel kernel_from_json(const Json& j) {
  const std::string type = get_or<std::string>(j, "type", "constant");
  if (type == "constant") {
    return SimplexKernel::constant(get<int>(j, "order"), finite(get_or<double>(j, "value", 1.0), "value"),
                                   channels_field(j));
  }
  if (type == "separable") {
    auto factors = get<std::vector<std::vector<double>>>(j, "factors");
    if (j.contains("order") && get<int>(j, "order") != static_cast<int>(factors.size())) {
      throw ValidationError("separable kernel order disagrees with its factor count");
    }
    return SimplexKernel::separable(std::move(factors), channels_field(j));
  }
  if (type == "table") {
    std::map<SpectralIndex, double> entries;
    for (const auto& e : field(j, "entries")) {
      SpectralIndex index;
      if (e.contains("index")) {
        index = index_from_json(e.at("index"), SIZE_MAX);
      } else {
        index = rademacher_index(cells_from_json(field(e, "cells"), SIZE_MAX));
      }
      entries[index] += finite(get<double>(e, "value"), "kernel value");
    }
    return SimplexKernel::table(get<int>(j, "order"), std::move(entries));
  }
  throw ValidationError("unknown kernel type '" + type + "'");
}

Json program_to_json(const BrownianProgram& program) {
  Json j;
  j["channels"] = program.channels;
  j["degree_cap"] = program.degree_cap;
  j["constant"] = program.constant;
  Json terms = Json::array();
  for (const auto& term : program.terms) {
    Json factors = Json::array();
    for (const auto& f : term.factors) {
      if (const auto* k = std::get_if<SimplexKernel>(&f)) {
        factors.push_back({{"ito", kernel_to_json(*k)}});
      } else {
        const auto& p = std::get<IncrementPolynomial>(f);
        factors.push_back({{"poly", {{"cell", p.cell}, {"channel", p.channel}, {"coeffs", p.coeffs}}}});
      }
    }
    terms.push_back({{"weight", term.weight}, {"factors", factors}});
  }
  j["terms"] = terms;
  return j;
}

BrownianProgram program_from_json(const Json& j) {
  BrownianProgram p;
  p.channels = get_or<int>(j, "channels", 1);
  p.degree_cap = get_or<int>(j, "degree_cap", 4);
  p.constant = finite(get_or<double>(j, "constant", 0.0), "constant");
  if (p.channels < 1) throw ValidationError("channels must be positive");
  if (j.contains("terms")) {
    for (const auto& t : j.at("terms")) {
      ProgramTerm term;
      term.weight = finite(get_or<double>(t, "weight", 1.0), "weight");
      for (const auto& f : field(t, "factors")) {
        if (f.contains("ito")) {
          term.factors.emplace_back(kernel_from_json(f.at("ito")));
        } else if (f.contains("poly")) {
          const Json& q = f.at("poly");
          term.factors.emplace_back(IncrementPolynomial{get<std::uint32_t>(q, "cell"),
                                                        get_or<std::uint16_t>(q, "channel", 0),
                                                        get<std::vector<double>>(q, "coeffs")});
        } else {
          throw ValidationError("program factor must be {\"ito\": ...} or {\"poly\": ...}");
        }
      }
      p.terms.push_back(std::move(term));
    }
  }
  return p;
}

Json coefficients_to_json(const ChaosCoefficients& c) {
  Json j;
  j["law"] = c.law() == CellLaw::rademacher ? "rademacher" : "gaussian";
  j["channels"] = c.channels();
  j["degree_cap"] = c.degree_cap();
  j["truncation_residual"] = c.truncation_residual();
  Json entries = Json::array();
  for (const auto& [index, coeff] : c.sorted_entries()) {
    if (c.law() == CellLaw::rademacher) {
      entries.push_back({{"cells", support_of(index)}, {"coeff", coeff}});
    } else {
      entries.push_back({{"index", index_to_json(index)}, {"coeff", coeff}});
    }
  }
  j["entries"] = entries;
  return j;
}

ChaosCoefficients coefficients_from_json(const TimeGrid& grid, const Json& data) {
  const Json& entries = data.is_array() ? data : field(data, "entries");
  const std::string law = data.is_array() ? "rademacher" : get_or<std::string>(data, "law", "rademacher");
  if (law == "rademacher") {
    std::map<CellSet, double> acc;
    for (const auto& e : entries) {
      acc[cells_from_json(field(e, "cells"), grid.cell_count())] += finite(get<double>(e, "coeff"), "coeff");
    }
    return ChaosCoefficients::rademacher(grid, {acc.begin(), acc.end()});
  }
  if (law != "gaussian") throw ValidationError("unknown law '" + law + "'");
  const int channels = get_or<int>(data, "channels", 1);
  ChaosCoefficients::SparseMap map;
  int cap = 1;
  for (const auto& e : entries) {
    SpectralIndex index = e.contains("index") ? index_from_json(e.at("index"), grid.cell_count())
                                              : rademacher_index(cells_from_json(field(e, "cells"), grid.cell_count()));
    for (const auto& f : index) {
      if (f.channel >= channels) throw ValidationError("channel outside [0, channels)");
      cap = std::max<int>(cap, f.degree);
    }
    map[index] += finite(get<double>(e, "coeff"), "coeff");
  }
  auto out = ChaosCoefficients::sparse(grid, CellLaw::gaussian, std::move(map), channels,
                                       get_or<int>(data, "degree_cap", cap));
  out.set_truncation_residual(get_or<double>(data, "truncation_residual", 0.0));
  return out;
}

Json functional_to_json(const NoiseFunctional& f) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["grid"] = grid_to_json(f.grid());
  j["backend"] = f.backend_name();
  if (f.is_table()) {
    j["data"] = {{"values", f.values()}};
  } else if (f.is_chaos()) {
    j["data"] = coefficients_to_json(f.coeffs());
  } else if (f.is_brownian()) {
    j["data"] = program_to_json(f.program());
  } else {
    const auto& ref = f.family_ref();
    Json params = Json::object();
    for (const auto& [k, v] : ref.params) params[k] = v;
    j["data"] = {{"name", ref.name}, {"level", ref.level}, {"params", params}};
  }
  return j;
}

NoiseFunctional functional_from_json(const Json& j) {
  check_version(j);
  const std::string backend = get<std::string>(j, "backend");
  const Json& data = field(j, "data");
  if (backend == "family") {
    auto params = get_or<std::map<std::string, double>>(data, "params", {});
    return family_functional(get<std::string>(data, "name"), get<int>(data, "level"), params);
  }
  TimeGrid grid = grid_from_json(field(j, "grid"));
  if (backend == "table") {
    auto values = data.is_array() ? data.get<std::vector<double>>() : get<std::vector<double>>(data, "values");
    for (double v : values) finite(v, "table value");
    return NoiseFunctional::table(grid, std::move(values));
  }
  if (backend == "chaos") return NoiseFunctional::chaos(coefficients_from_json(grid, data));
  if (backend == "brownian") return NoiseFunctional::brownian(grid, program_from_json(data));
  throw ValidationError("unknown backend '" + backend + "'");
}

Json measure_to_json(const SpectralMeasure& mu) {
  if (mu.is_sampled()) throw Unsupported("sampler-backed measures cannot be serialized");
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["grid"] = grid_to_json(mu.grid());
  j["total_mass"] = mu.total_mass();
  j["multiplicity_mass"] = mu.multiplicity_mass();
  j["residual"] = mu.residual();
  Json entries = Json::array();
  const auto& mult = mu.multiplicity_masses();
  for (const auto& [cells, mass] : mu.sorted_entries()) {
    Json e{{"cells", cells}, {"mass", mass}};
    if (auto it = mult.find(cells); it != mult.end() && it->second != 0.0) e["multiplicity"] = it->second;
    entries.push_back(std::move(e));
  }
  j["entries"] = entries;
  return j;
}

SpectralMeasure measure_from_json(const Json& j) {
  check_version(j);
  TimeGrid grid = grid_from_json(field(j, "grid"));
  SpectralMeasure::MassMap masses, mult;
  for (const auto& e : field(j, "entries")) {
    CellSet cells = cells_from_json(field(e, "cells"), grid.cell_count());
    double m = finite(get<double>(e, "mass"), "mass");
    if (m < 0.0) throw ValidationError("spectral mass must be nonnegative");
    masses[cells] += m;
    if (e.contains("multiplicity")) mult[cells] += get<double>(e, "multiplicity");
  }
  SpectralMeasure mu = SpectralMeasure::sparse(grid, std::move(masses), std::move(mult));
  mu.set_residual(get_or<double>(j, "residual", 0.0));
  return mu;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(static_cast<unsigned long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ValidationError("cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace noisespec
