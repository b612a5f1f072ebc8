#include "noisespec/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "noisespec/chaos_structure.hpp"
#include "noisespec/chaos_transform.hpp"
#include "noisespec/dimension.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/families.hpp"
#include "noisespec/json_io.hpp"
#include "noisespec/random.hpp"
#include "noisespec/spectral_measure.hpp"
#include "noisespec/white_noise.hpp"

namespace noisespec::cli {

namespace {

struct Options {
  std::string in;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  int level = 10;
  double tol = 1e-10;
  bool tol_set = false;

  std::string set;
  int chaos_level = -1;
  std::string profile_out;
  std::size_t k = 1000;
  std::string method = "inverse-cdf";
  std::string cut;
  std::string family;
  std::string levels;
  std::vector<std::string> params;
  std::size_t samples = 20000;
  std::string kernel;
  // 0: 1 for ito, the point order for npoint
  int ito_order = 0;
  double kernel_value = 1.0;
  int channels = 1;
  std::size_t paths = 100000;
  bool check = false;
  int order = 1;
};

struct Run {
  std::vector<std::string> argv;
  std::string command;
  Options opt;
  std::ostream& out;
  std::vector<std::string> outputs;
  std::vector<std::uint64_t> seeds;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  std::size_t threads() const { return opt.threads > 0 ? opt.threads : default_thread_count(); }
  double tol(double fallback) const { return opt.tol_set ? opt.tol : fallback; }

  void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
      out << text;
      if (!text.empty() && text.back() != '\n') out << '\n';
      return;
    }
    write_text_atomic(path, text);
    outputs.push_back(path);
  }

  void write_manifests() {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json inputs = Json::array();
    for (const auto& path : {opt.in, opt.kernel}) {
      if (path.empty()) continue;
      inputs.push_back({{"path", path}, {"sha256", sha256_hex(read_text_file(path))}});
    }
    for (const auto& path : outputs) {
      Json m;
      m["schema_version"] = kSchemaVersion;
      m["command"] = command;
      m["argv"] = argv;
      m["seeds"] = seeds;
      m["version"] = kVersion;
      m["compiler"] = __VERSION__;
      m["inputs"] = inputs;
      m["output_sha256"] = sha256_hex(read_text_file(path));
      m["wall_time_seconds"] = wall;
      write_text_atomic(path + ".manifest.json", m.dump(2) + "\n");
    }
  }
};

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

std::string cells_text(const CellSet& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? " " : "") + std::to_string(cells[i]);
  return s;
}

NoiseFunctional input_functional(const Run& r) {
  if (r.opt.in.empty()) throw ValidationError("--in is required");
  return functional_from_json(read_json_file(r.opt.in));
}

std::map<std::string, double> family_params(const Run& r) {
  std::map<std::string, double> out;
  for (const auto& p : r.opt.params) {
    auto eq = p.find('=');
    if (eq == std::string::npos) throw ValidationError("--param expects name=value, got '" + p + "'");
    try {
      out[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("--param value is not a number: '" + p + "'");
    }
  }
  return out;
}

double measure_gap(const SpectralMeasure& a, const SpectralMeasure& b) {
  std::map<CellSet, double> diff;
  for (const auto& [cells, m] : a.sorted_entries()) diff[cells] += m;
  for (const auto& [cells, m] : b.sorted_entries()) diff[cells] -= m;
  double worst = std::abs(a.total_mass() - b.total_mass());
  for (const auto& [cells, d] : diff) worst = std::max(worst, std::abs(d));
  return worst;
}

// ---- commands --------------------------------------------------------------

int cmd_decompose(Run& r) {
  NoiseFunctional f = input_functional(r);
  DecomposeOptions options;
  if (r.opt.tol_set) options.residual_tolerance = r.opt.tol;
  ChaosCoefficients c = decompose(f, options);
  r.emit(r.opt.out, functional_to_json(NoiseFunctional::chaos(c)).dump(2));
  if (!r.opt.out.empty()) {
    r.out << "entries: " << c.nonzero_count() << "\n";
    r.out << "mean: " << format_double(c.mean()) << "\n";
    r.out << "norm_squared: " << format_double(c.norm_squared()) << "\n";
    r.out << "truncation_residual: " << format_double(c.truncation_residual()) << "\n";
  }
  return kOk;
}

int cmd_project(Run& r) {
  NoiseFunctional f = input_functional(r);
  NoiseFunctional g = f.is_family() ? materialize(f) : f;
  if (!r.opt.set.empty() || r.opt.chaos_level < 0) {
    g = conditional_expectation(g, ElementarySet::parse(g.grid(), r.opt.set));
  }
  if (r.opt.chaos_level >= 0) g = level_projection(g, r.opt.chaos_level);
  r.emit(r.opt.out, functional_to_json(g).dump(2));
  if (!r.opt.out.empty()) r.out << "norm_squared: " << format_double(norm_squared(g)) << "\n";
  return kOk;
}

int cmd_spectrum(Run& r) {
  NoiseFunctional f = input_functional(r);
  SpectralMeasure mu = spectral_measure_of(f);
  r.emit(r.opt.out, measure_to_json(mu).dump(2));
  CardinalityProfile profile = cardinality_profile(mu);
  if (!r.opt.profile_out.empty()) {
    std::string csv = "cardinality,mass\n";
    for (std::size_t n = 0; n < profile.size(); ++n) csv += std::to_string(n) + "," + format_double(profile[n]) + "\n";
    r.emit(r.opt.profile_out, csv);
  }
  if (!r.opt.out.empty()) {
    r.out << "total_mass: " << format_double(mu.total_mass()) << "\n";
    r.out << "empty_mass: " << format_double(mu.empty_mass()) << "\n";
    r.out << "singleton_mass: " << format_double(singleton_mass(mu)) << "\n";
    r.out << "multiplicity_mass: " << format_double(mu.multiplicity_mass()) << "\n";
    r.out << "profile: " << join(profile) << "\n";
  }
  return kOk;
}

int cmd_sample(Run& r) {
  NoiseFunctional f = input_functional(r);
  r.seeds.push_back(r.opt.seed);
  std::vector<CellSet> sets;
  if (r.opt.method == "bitwise") {
    sets = sample_sets_bitwise(to_table(f.is_family() ? materialize(f) : f), r.opt.k, r.opt.seed);
  } else if (r.opt.method == "inverse-cdf") {
    SpectralMeasure mu = f.is_family()
                             ? family_measure(find_family(f.family_ref().name, f.family_ref().params),
                                              f.family_ref().level)
                             : spectral_measure_of(f);
    sets = sample_sets(mu, r.opt.k, r.opt.seed, r.threads());
  } else {
    throw ValidationError("unknown --method '" + r.opt.method + "'");
  }
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = r.opt.method;
  j["seed"] = r.opt.seed;
  j["sets"] = sets;
  r.emit(r.opt.out, j.dump(1));
  if (!r.opt.out.empty()) {
    double mean = 0.0;
    for (const auto& s : sets) mean += static_cast<double>(s.size());
    r.out << "samples: " << sets.size() << "\n";
    r.out << "mean_cardinality: " << format_double(sets.empty() ? 0.0 : mean / static_cast<double>(sets.size()))
          << "\n";
  }
  return kOk;
}

int cmd_factor_check(Run& r) {
  NoiseFunctional f = input_functional(r);
  const Rational cut = parse_rational(r.opt.cut);
  auto boundary = f.grid().boundary_index(cut);
  if (!boundary) throw ValidationError("cut " + r.opt.cut + " is not a grid boundary");
  ChaosCoefficients c = decompose(f);
  // coefficient matrix M[left part][right part]; f = g * h across the cut iff rank M <= 1
  std::map<SpectralIndex, std::map<SpectralIndex, double>> rows;
  std::map<SpectralIndex, std::map<SpectralIndex, double>> cols;
  double pivot = 0.0;
  SpectralIndex pr, pc;
  c.for_each([&](const SpectralIndex& index, double v) {
    if (v == 0.0) return;
    SpectralIndex left, right;
    for (const auto& fac : index) (fac.cell < *boundary ? left : right).push_back(fac);
    rows[left][right] = v;
    cols[right][left] = v;
    if (std::abs(v) > std::abs(pivot)) {
      pivot = v;
      pr = left;
      pc = right;
    }
  });
  double max_error = 0.0;
  double scale = std::abs(pivot);
  if (pivot != 0.0) {
    const auto& row = rows[pr];
    const auto& col = cols[pc];
    for (const auto& [left, inner] : rows) {
      auto cl = col.find(left);
      const double a = cl == col.end() ? 0.0 : cl->second;
      for (const auto& [right, v] : inner) {
        auto rr = row.find(right);
        const double b = rr == row.end() ? 0.0 : rr->second;
        max_error = std::max(max_error, std::abs(v - a * b / pivot));
      }
    }
    // rank-one prediction may be nonzero where M is zero
    for (const auto& [left, a] : col) {
      for (const auto& [right, b] : row) {
        auto it = rows[left].find(right);
        if (it == rows[left].end()) max_error = std::max(max_error, std::abs(a * b / pivot));
      }
    }
  }
  const bool ok = max_error <= r.tol(1e-12) * std::max(1.0, scale);
  r.out << "cut: " << to_string(cut) << " (boundary " << *boundary << ")\n";
  r.out << "max_error: " << format_double(max_error) << "\n";
  r.out << "exact-product: " << (ok ? "true" : "false") << "\n";
  return ok ? kOk : kTolerance;
}

int cmd_cuts(Run& r) {
  NoiseFunctional f = input_functional(r);
  ChaosCoefficients c = decompose(f);
  std::vector<double> d = cut_distances(c);
  std::string csv = "boundary,time,distance\n";
  for (std::size_t b = 0; b < d.size(); ++b) {
    csv += std::to_string(b) + "," + to_string(f.grid().boundary(b)) + "," + format_double(d[b]) + "\n";
  }
  if (!r.opt.out.empty()) r.emit(r.opt.out, csv);
  CriterionResult res = first_chaos_criterion(f, r.tol(1e-12));
  r.out << "first-chaos: " << (res.holds ? "true" : "false") << "\n";
  r.out << "mean: " << format_double(res.mean) << "\n";
  r.out << "max_cut_distance: " << format_double(res.max_cut_distance) << "\n";
  r.out << "multiplicity_norm: " << format_double(res.multiplicity_norm) << "\n";
  r.out << "residual_norm: " << format_double(res.residual_norm) << "\n";
  if (res.failing_cut) {
    r.out << "failing_cut: " << *res.failing_cut << " (t = " << to_string(f.grid().boundary(*res.failing_cut))
          << ")\n";
  }
  if (r.opt.out.empty()) r.out << csv;
  return kOk;
}

int cmd_classify(Run& r) {
  if (r.opt.family.empty()) throw ValidationError("--family is required");
  RefinementFamily family = find_family(r.opt.family, family_params(r));
  std::vector<int> levels = parse_levels(r.opt.levels.empty() ? "1..6" : r.opt.levels);
  ClassifyOptions options;
  options.samples = r.opt.samples;
  options.seed = r.opt.seed;
  r.seeds.push_back(r.opt.seed);
  ClassificationReport report = classify(family, levels, options);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["family"] = report.family;
  j["metadata"] = family.metadata;
  Json records = Json::array();
  for (const auto& rec : report.records) {
    Json x{{"level", rec.level},
           {"cells", rec.cells},
           {"source", rec.source},
           {"total_mass", rec.total_mass},
           {"singleton_mass", rec.singleton_mass},
           {"singleton_fraction", rec.singleton_fraction()},
           {"profile", rec.profile}};
    if (rec.max_cut_distance) x["max_cut_distance"] = *rec.max_cut_distance;
    records.push_back(std::move(x));
  }
  j["records"] = records;
  j["linearizable_like"] = report.linearizable_like;
  j["black_like"] = report.black_like;
  j["verdict"] = report.verdict;
  if (!r.opt.out.empty()) r.emit(r.opt.out, j.dump(2));

  r.out << "family: " << report.family << "\n";
  r.out << "level,cells,source,total_mass,singleton_mass,singleton_fraction\n";
  for (const auto& rec : report.records) {
    r.out << rec.level << "," << rec.cells << "," << rec.source << "," << format_double(rec.total_mass) << ","
          << format_double(rec.singleton_mass) << "," << format_double(rec.singleton_fraction()) << "\n";
  }
  r.out << "verdict: " << report.verdict << "\n";
  return kOk;
}

int cmd_ito(Run& r) {
  SimplexKernel kernel = r.opt.kernel.empty() ? SimplexKernel::constant(std::max(r.opt.ito_order, 1), r.opt.kernel_value)
                                              : kernel_from_json(read_json_file(r.opt.kernel));
  TimeGrid grid = TimeGrid::dyadic(r.opt.level);
  const int channels = std::max(r.opt.channels, kernel.max_channel() + 1);
  BrownianGrid paths(grid, channels, r.opt.paths, r.opt.seed);
  r.seeds.push_back(r.opt.seed);
  ItoMoments m = ito_moments(kernel, paths, r.threads());
  const double z_mean = kernel.order() == 0 ? 0.0 : m.mean.z_score(0.0);
  const double z_second = m.second_moment.z_score(m.isometry);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kernel"] = kernel_to_json(kernel);
  j["grid"] = grid_to_json(grid);
  j["paths"] = r.opt.paths;
  j["seed"] = r.opt.seed;
  j["mean"] = {{"estimate", m.mean.mean}, {"stderr", m.mean.std_error}};
  j["second_moment"] = {{"estimate", m.second_moment.mean}, {"stderr", m.second_moment.std_error}};
  j["isometry"] = m.isometry;
  j["z_mean"] = z_mean;
  j["z_second_moment"] = z_second;
  if (!r.opt.out.empty()) r.emit(r.opt.out, j.dump(2));

  r.out << "order: " << kernel.order() << "\n";
  r.out << "mean: " << format_double(m.mean.mean) << " +- " << format_double(m.mean.std_error) << "\n";
  r.out << "second_moment: " << format_double(m.second_moment.mean) << " +- "
        << format_double(m.second_moment.std_error) << "\n";
  r.out << "isometry: " << format_double(m.isometry) << "\n";
  r.out << "z_second_moment: " << format_double(z_second) << "\n";
  if (r.opt.check && (std::abs(z_second) > 3.0 || std::abs(z_mean) > 3.0)) {
    r.out << "check: fail\n";
    return kTolerance;
  }
  if (r.opt.check) r.out << "check: pass\n";
  return kOk;
}

int cmd_npoint(Run& r) {
  NoiseFunctional f = r.opt.in.empty()
                          ? NoiseFunctional::brownian(TimeGrid::dyadic(r.opt.level),
                                                      BrownianProgram::ito(SimplexKernel::constant(
                                                          r.opt.ito_order > 0 ? r.opt.ito_order : r.opt.order, 1.0)))
                          : input_functional(r);
  const int channels = f.is_brownian() ? f.program().channels : std::max(1, r.opt.channels);
  BrownianGrid paths(f.grid(), channels, r.opt.paths, r.opt.seed);
  r.seeds.push_back(r.opt.seed);
  NPointDensity d = npoint_density_estimate(f, r.opt.order, paths, r.threads());
  std::string csv = "cells,mass,stderr,density\n";
  for (const auto& e : d.entries) {
    csv += cells_text(e.cells) + "," + format_double(e.mass) + "," + format_double(e.mass_stderr) + "," +
           format_double(e.density) + "\n";
  }
  if (!r.opt.out.empty()) r.emit(r.opt.out, csv);
  r.out << "order: " << d.order << "\n";
  r.out << "total_mass: " << format_double(d.total_mass) << " +- " << format_double(d.total_stderr) << "\n";
  r.out << "mean_density: " << format_double(d.mean_density) << "\n";
  return kOk;
}

std::string dimension_csv(const DimensionEstimate& e) {
  std::string csv = "scale,mean_log_count,stderr\n";
  for (std::size_t i = 0; i < e.scales.size(); ++i) {
    csv += std::to_string(e.scales[i]) + "," + format_double(e.mean_log2_counts[i]) + "," +
           format_double(e.stderrs[i]) + "\n";
  }
  return csv;
}

int cmd_dim(Run& r) {
  if (r.opt.family.empty()) throw ValidationError("--family is required");
  RefinementFamily family = find_family(r.opt.family, family_params(r));
  std::vector<int> levels = parse_levels(r.opt.levels.empty() ? "4..10" : r.opt.levels);
  r.seeds.push_back(r.opt.seed);
  auto estimates = estimate_dimension(family, levels, r.opt.samples, r.opt.seed, r.threads());
  r.out << "level,base,slope,intercept,r2,samples,fit_lo,fit_hi\n";
  for (const auto& e : estimates) {
    r.out << e.level << "," << e.base << "," << format_double(e.slope) << "," << format_double(e.intercept) << ","
          << format_double(e.r2) << "," << e.samples << "," << e.fit_lo << "," << e.fit_hi << "\n";
  }
  const DimensionEstimate& finest = estimates.back();
  if (!r.opt.out.empty()) {
    r.emit(r.opt.out, dimension_csv(finest));
  } else {
    r.out << dimension_csv(finest);
  }
  return kOk;
}

int cmd_calibrate(Run& r) {
  struct Target {
    const char* family;
    int level;
    double slope;
    double tol;
  };
  const Target targets[] = {{"cantor-calibration", 8, std::log(2.0) / std::log(3.0), 0.05},
                            {"parity", 10, 1.0, 0.02},
                            {"single-coordinate", 10, 0.0, 0.02}};
  r.seeds.push_back(r.opt.seed);
  bool ok = true;
  r.out << "family,level,slope,target,tolerance,status\n";
  for (const auto& t : targets) {
    RefinementFamily family = find_family(t.family);
    DimensionEstimate e = estimate_dimension(family, t.level, std::min<std::size_t>(r.opt.samples, 256), r.opt.seed,
                                             r.threads());
    const bool pass = std::abs(e.slope - t.slope) <= t.tol;
    ok = ok && pass;
    r.out << t.family << "," << t.level << "," << format_double(e.slope) << "," << format_double(t.slope) << ","
          << format_double(t.tol) << "," << (pass ? "pass" : "fail") << "\n";
  }
  // the middle-thirds construction has exactly 2^j boxes at ternary level j
  const TimeGrid ternary = TimeGrid::ternary(8);
  CellSet cantor;
  for (std::uint32_t c = 0; c < ternary.cell_count(); ++c) {
    if (is_cantor_cell(c, 8)) cantor.push_back(c);
  }
  bool counts_ok = true;
  for (int j = 0; j <= 8; ++j) counts_ok = counts_ok && box_count(ternary, cantor, j) == (std::size_t{1} << j);
  r.out << "cantor-box-counts: " << (counts_ok ? "pass" : "fail") << "\n";
  return ok && counts_ok ? kOk : kTolerance;
}

// ---- selftest --------------------------------------------------------------

NoiseFunctional random_table(const TimeGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(std::size_t{1} << grid.cell_count());
  for (auto& x : v) x = normal(rng);
  return NoiseFunctional::table(grid, std::move(v));
}

ElementarySet random_set(const TimeGrid& grid, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  CellSet cells;
  for (std::uint32_t c = 0; c < grid.cell_count(); ++c) {
    if (coin(rng)) cells.push_back(c);
  }
  return ElementarySet::from_cells(grid, cells);
}

NoiseFunctional random_sparse(const TimeGrid& grid, std::mt19937_64& rng, std::size_t terms) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::uint32_t> cell(0, static_cast<std::uint32_t>(grid.cell_count() - 1));
  std::uniform_int_distribution<int> size(0, 4);
  std::map<CellSet, double> acc;
  for (std::size_t t = 0; t < terms; ++t) {
    CellSet s;
    for (int i = size(rng); i > 0; --i) s.push_back(cell(rng));
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    acc[s] += normal(rng);
  }
  return NoiseFunctional::chaos(ChaosCoefficients::rademacher(grid, {acc.begin(), acc.end()}));
}

int cmd_selftest(Run& r) {
  r.seeds.push_back(r.opt.seed);
  const double tol = r.tol(1e-10);
  const std::size_t dense_cells = static_cast<std::size_t>(std::clamp(r.opt.level, 2, 12));
  const TimeGrid dense_grid = TimeGrid::uniform(Rational(0), Rational(1), dense_cells);
  const TimeGrid fine_grid = TimeGrid::dyadic(std::clamp(r.opt.level, 1, 20));
  const std::size_t functionals = 20, sets = 20;

  std::vector<std::pair<std::string, double>> report;
  auto record = [&](const std::string& name, double err) { report.emplace_back(name, err); };

  double subset = 0.0, algebra = 0.0, restriction = 0.0, parseval = 0.0, reconstruction = 0.0;
  for (std::size_t i = 0; i < functionals; ++i) {
    auto rng = substream(r.opt.seed, i);
    NoiseFunctional f = random_table(dense_grid, rng);
    ChaosCoefficients c = decompose(f);
    SpectralMeasure mu = spectral_measure_of(c);
    parseval = std::max(parseval, std::abs(mu.total_mass() - norm_squared(f)));
    reconstruction = std::max(reconstruction, distance(reconstruct(c), f));
    for (std::size_t s = 0; s < sets; ++s) {
      ElementarySet a = random_set(dense_grid, rng);
      ElementarySet b = random_set(dense_grid, rng);
      NoiseFunctional ea = conditional_expectation(f, a);
      subset = std::max(subset, std::abs(mass_of_subsets_of(mu, a) - norm_squared(ea)));
      NoiseFunctional eab = conditional_expectation(conditional_expectation(f, b), a);
      algebra = std::max(algebra, distance(eab, conditional_expectation(f, set_intersection(a, b))));
      restriction = std::max(restriction, measure_gap(restrict(mu, a), spectral_measure_of(ea)));
    }
  }
  record("subset-mass = ||E_A f||^2", subset);
  record("E_A E_B = E_(A n B)", algebra);
  record("restrict(mu_f, A) = mu_(E_A f)", restriction);
  record("parseval", parseval);
  record("reconstruct(decompose(f)) = f", reconstruction);

  double factor = 0.0;
  const std::size_t half = dense_cells / 2;
  const TimeGrid left = dense_grid.window(0, half);
  const TimeGrid right = dense_grid.window(half, dense_cells);
  for (std::size_t i = 0; i < functionals; ++i) {
    auto rng = substream(r.opt.seed, 1000 + i);
    NoiseFunctional g = random_table(left, rng);
    NoiseFunctional h = random_table(right, rng);
    factor = std::max(factor, measure_gap(spectral_measure_of(tensor_product(g, h)),
                                          product(spectral_measure_of(g), spectral_measure_of(h))));
  }
  record("mu_(g h) = mu_g x mu_h", factor);

  double sparse_subset = 0.0, first = 0.0;
  for (std::size_t i = 0; i < functionals; ++i) {
    auto rng = substream(r.opt.seed, 2000 + i);
    NoiseFunctional f = random_sparse(fine_grid, rng, 200);
    SpectralMeasure mu = spectral_measure_of(f);
    for (std::size_t s = 0; s < sets; ++s) {
      ElementarySet a = random_set(fine_grid, rng);
      sparse_subset = std::max(sparse_subset, std::abs(mass_of_subsets_of(mu, a) -
                                                      norm_squared(conditional_expectation(f, a))));
    }
    NoiseFunctional lin = level_projection(f, 1);
    CriterionResult res = first_chaos_criterion(lin, tol);
    first = std::max(first, res.holds ? res.max_cut_distance : INFINITY);
  }
  record("subset-mass (sparse, " + std::to_string(fine_grid.cell_count()) + " cells)", sparse_subset);
  record("first chaos splits at every cut", first);

  bool ok = true;
  r.out << "identity,max_error,status\n";
  for (const auto& [name, err] : report) {
    const bool pass = err <= tol;
    ok = ok && pass;
    r.out << name << "," << format_double(err) << "," << (pass ? "pass" : "fail") << "\n";
  }
  r.out << "selftest: " << (ok ? "pass" : "fail") << "\n";
  return ok ? kOk : kTolerance;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  try {
    if (auto dots = text.find(".."); dots != std::string::npos) {
      int lo = std::stoi(text.substr(0, dots));
      int hi = std::stoi(text.substr(dots + 2));
      if (lo > hi) throw ValidationError("empty level range '" + text + "'");
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    } else {
      std::stringstream ss(text);
      std::string part;
      while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError("cannot parse levels '" + text + "'");
  }
  if (out.empty()) throw ValidationError("no levels given");
  for (int k : out) {
    if (k < 0 || k > 30) throw ValidationError("level out of range in '" + text + "'");
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Run r{{}, {}, {}, out, {}, {}};
  r.argv = args;
  Options& o = r.opt;

  CLI::App app{"Spectral analysis of discretized noises", "noisespec"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads (default: NOISESPEC_THREADS or all cores)");
    sub->add_option("--tol", o.tol, "Numerical tolerance")->each([&](const std::string&) { o.tol_set = true; });
  };
  auto with_in = [&](CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("--in", o.in, "Input functional (JSON)");
    if (required) opt->required();
  };

  std::map<std::string, std::function<int(Run&)>> handlers;
  auto sub = [&](const char* name, const char* help, std::function<int(Run&)> fn) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s);
    s->add_option("--out", o.out, "Output file");
    handlers[name] = std::move(fn);
    return s;
  };

  auto* decompose_cmd = sub("decompose", "Chaos expansion of a functional", cmd_decompose);
  with_in(decompose_cmd);

  auto* project_cmd = sub("project", "Conditional expectation onto an elementary set", cmd_project);
  with_in(project_cmd);
  project_cmd->add_option("--set", o.set, "Cell ranges, e.g. \"0:2,5:6\"; empty string for the empty set");
  project_cmd->add_option("--chaos-level", o.chaos_level, "Keep only chaos of this total degree");

  auto* spectrum_cmd = sub("spectrum", "Spectral measure", cmd_spectrum);
  with_in(spectrum_cmd);
  spectrum_cmd->add_option("--profile-out", o.profile_out, "Cardinality profile CSV");

  auto* sample_cmd = sub("sample", "Draw spectral sets", cmd_sample);
  with_in(sample_cmd);
  sample_cmd->add_option("--k", o.k, "Number of draws");
  sample_cmd->add_option("--seed", o.seed);
  sample_cmd->add_option("--method", o.method, "inverse-cdf or bitwise");

  auto* factor_cmd = sub("factor-check", "Test whether f splits as a product across a cut", cmd_factor_check);
  with_in(factor_cmd);
  factor_cmd->add_option("--cut", o.cut, "Cut time, e.g. 0.5 or 1/2")->required();

  auto* cuts_cmd = sub("cuts", "Cut distances and the first-chaos criterion", cmd_cuts);
  with_in(cuts_cmd);

  auto* classify_cmd = sub("classify", "Spectral trends across refinement levels", cmd_classify);
  classify_cmd->add_option("--family", o.family)->required();
  classify_cmd->add_option("--levels", o.levels, "e.g. 1..6");
  classify_cmd->add_option("--param", o.params, "Family parameter name=value");
  classify_cmd->add_option("--samples", o.samples);
  classify_cmd->add_option("--seed", o.seed);

  auto* ito_cmd = sub("ito", "Monte Carlo check of the Ito isometry", cmd_ito);
  ito_cmd->add_option("--kernel", o.kernel, "Kernel JSON (default: constant kernel)");
  ito_cmd->add_option("--order", o.ito_order, "Order of the constant kernel");
  ito_cmd->add_option("--value", o.kernel_value, "Value of the constant kernel");
  ito_cmd->add_option("--channels", o.channels);
  ito_cmd->add_option("--paths", o.paths);
  ito_cmd->add_option("--seed", o.seed);
  ito_cmd->add_option("--level", o.level);
  ito_cmd->add_flag("--check", o.check, "Exit 3 unless moments are within 3 standard errors");

  auto* npoint_cmd = sub("npoint", "Monte Carlo n-point spectral density", cmd_npoint);
  with_in(npoint_cmd, false);
  npoint_cmd->add_option("--order", o.order, "Number of points");
  npoint_cmd->add_option("--ito-order", o.ito_order, "Without --in: order of the unit-kernel integral (default: --order)");
  npoint_cmd->add_option("--channels", o.channels);
  npoint_cmd->add_option("--paths", o.paths);
  npoint_cmd->add_option("--seed", o.seed);
  npoint_cmd->add_option("--level", o.level);

  auto* dim_cmd = sub("dim", "Box-counting dimension of spectral sets", cmd_dim);
  dim_cmd->add_option("--family", o.family)->required();
  dim_cmd->add_option("--levels", o.levels, "e.g. 4..10");
  dim_cmd->add_option("--param", o.params, "Family parameter name=value");
  dim_cmd->add_option("--samples", o.samples);
  dim_cmd->add_option("--seed", o.seed);

  auto* calibrate_cmd = sub("calibrate", "Dimension estimator on families with known slopes", cmd_calibrate);
  calibrate_cmd->add_option("--seed", o.seed);
  calibrate_cmd->add_option("--samples", o.samples);

  auto* selftest_cmd = sub("selftest", "Exact identity suite on random functionals", cmd_selftest);
  selftest_cmd->add_option("--level", o.level);
  selftest_cmd->add_option("--seed", o.seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    app.exit(e, out, err);
    return kValidation;
  }

  for (const auto* s : app.get_subcommands()) r.command = s->get_name();
  try {
    int code = handlers.at(r.command)(r);
    r.write_manifests();
    return code;
  } catch (const ToleranceError& e) {
    err << "tolerance failure: " << e.what() << "\n";
    return kTolerance;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace noisespec::cli
