#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "noisespec/cli.hpp"
#include "noisespec/errors.hpp"
#include "noisespec/families.hpp"
#include "noisespec/json_io.hpp"
#include "oracles.hpp"

using namespace noisespec;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("noisespec_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::string product_functional_json() {
  // g(x0, x1) * h(x2, x3) with generic g, h
  std::mt19937_64 rng(1);
  auto g = oracle::random_table(2, rng), h = oracle::random_table(2, rng);
  std::vector<double> v(16);
  for (std::uint32_t x = 0; x < 16; ++x) v[x] = g[x & 3] * h[x >> 2];
  return functional_to_json(NoiseFunctional::table(TimeGrid::dyadic(2), v)).dump();
}

}  // namespace

TEST(JsonIo, FunctionalRoundTrips) {
  std::mt19937_64 rng(2);
  auto t = NoiseFunctional::table(TimeGrid::dyadic(3), oracle::random_table(8, rng));
  EXPECT_EQ(functional_from_json(functional_to_json(t)).values(), t.values());

  auto c = NoiseFunctional::chaos(ChaosCoefficients::rademacher(TimeGrid::dyadic(6), {{{1, 4}, 0.25}, {{}, -1.0}}));
  auto back = functional_from_json(functional_to_json(c));
  EXPECT_EQ(distance(back, c), 0.0);

  BrownianProgram p = BrownianProgram::ito(SimplexKernel::separable({{1, 2, 3, 4}, {0, 1, 0, 1}}));
  p.terms.push_back({0.5, {IncrementPolynomial{2, 0, {1, 0, 1}}}});
  auto b = NoiseFunctional::brownian(TimeGrid::dyadic(2), p);
  auto b2 = functional_from_json(functional_to_json(b));
  EXPECT_NEAR(inner_product(b, b2), norm_squared(b), 1e-12);

  auto fam = family_functional("majority3", 2);
  EXPECT_TRUE(functional_from_json(functional_to_json(fam)).is_family());
}

TEST(JsonIo, WindowGridRoundTrips) {
  TimeGrid w = TimeGrid::dyadic(4).window(3, 8);
  EXPECT_EQ(grid_from_json(grid_to_json(w)), w);
  EXPECT_FALSE(grid_from_json(grid_to_json(w)).level().has_value());
}

TEST(JsonIo, ChaosEntriesAcceptBareList) {
  Json j = Json::parse(R"({"grid":{"start":"0","end":"1","level":2},"backend":"chaos",
                           "data":[{"cells":[0,1],"coeff":1.0},{"cells":[],"coeff":0.5}]})");
  auto f = functional_from_json(j);
  EXPECT_DOUBLE_EQ(f.coeffs().coefficient(CellSet{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(expectation(f), 0.5);
}

TEST(JsonIo, RejectsBadInput) {
  EXPECT_THROW(functional_from_json(Json::parse(R"({"backend":"table"})")), ValidationError);
  EXPECT_THROW(functional_from_json(Json::parse(R"({"schema_version":9,"backend":"table","data":[]})")),
               ValidationError);
  EXPECT_THROW(functional_from_json(Json::parse(
                   R"({"grid":{"level":1},"backend":"chaos","data":[{"cells":[5],"coeff":1}]})")),
               ValidationError);
}

TEST(JsonIo, MeasureEntriesCanonical) {
  auto f = NoiseFunctional::chaos(
      ChaosCoefficients::rademacher(TimeGrid::dyadic(2), {{{0, 1}, 1.0}, {{3}, 2.0}, {{1}, 1.0}, {{}, 1.0}}));
  Json j = measure_to_json(spectral_measure_of(f));
  std::vector<CellSet> order;
  for (const auto& e : j["entries"]) order.push_back(e["cells"].get<CellSet>());
  EXPECT_EQ(order, (std::vector<CellSet>{{}, {1}, {3}, {0, 1}}));
  auto mu = measure_from_json(j);
  EXPECT_DOUBLE_EQ(mu.total_mass(), 7.0);
}

TEST(JsonIo, ShortestRoundTripFormatting) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST_F(CliTest, MalformedJsonReportsPosition) {
  write("bad.json", "{\"grid\": [1, 2,, 3]}");
  EXPECT_EQ(run({"spectrum", "--in", path("bad.json")}), 2);
  EXPECT_NE(err_.str().find("bad.json"), std::string::npos);
  EXPECT_NE(err_.str().find("byte 16"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagIsValidationError) {
  EXPECT_EQ(run({"spectrum", "--bogus"}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({}), 2);
}

TEST_F(CliTest, ProjectOntoEmptySet) {
  write("f.json", R"({"schema_version":1,"grid":{"start":"0","end":"1","level":3},"backend":"chaos",
                     "data":[{"cells":[0],"coeff":1},{"cells":[2,5],"coeff":-2}]})");
  ASSERT_EQ(run({"project", "--set", "", "--in", path("f.json"), "--out", path("p.json")}), 0) << err_.str();
  auto p = functional_from_json(read_json_file(path("p.json")));
  EXPECT_EQ(norm_squared(p), 0.0);
  EXPECT_TRUE(fs::exists(path("p.json.manifest.json")));
  auto manifest = read_json_file(path("p.json.manifest.json"));
  EXPECT_EQ(manifest["command"], "project");
  EXPECT_EQ(manifest["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, ProjectKeepsContainedIndices) {
  write("f.json", R"({"grid":{"level":3},"backend":"chaos",
                     "data":[{"cells":[0],"coeff":1},{"cells":[2,5],"coeff":-2}]})");
  ASSERT_EQ(run({"project", "--set", "0:3,5:6", "--in", path("f.json"), "--out", path("p.json")}), 0);
  auto p = functional_from_json(read_json_file(path("p.json")));
  EXPECT_DOUBLE_EQ(norm_squared(p), 5.0);
}

TEST_F(CliTest, FactorCheckOnProduct) {
  write("prod.json", product_functional_json());
  ASSERT_EQ(run({"factor-check", "--cut", "0.5", "--in", path("prod.json")}), 0) << err_.str();
  EXPECT_NE(out_.str().find("exact-product: true"), std::string::npos);
  EXPECT_EQ(run({"factor-check", "--cut", "0.25", "--in", path("prod.json")}), 3);
  EXPECT_NE(out_.str().find("exact-product: false"), std::string::npos);
  EXPECT_EQ(run({"factor-check", "--cut", "0.3", "--in", path("prod.json")}), 2);
}

TEST_F(CliTest, DecomposeAndSpectrum) {
  write("f.json", R"({"grid":{"level":1},"backend":"table","data":{"values":[1,0,0,0]}})");
  ASSERT_EQ(run({"decompose", "--in", path("f.json"), "--out", path("c.json")}), 0);
  auto c = functional_from_json(read_json_file(path("c.json")));
  for (CellSet s : {CellSet{}, CellSet{0}, CellSet{1}, CellSet{0, 1}}) EXPECT_DOUBLE_EQ(c.coeffs().coefficient(s), 0.25);
  ASSERT_EQ(run({"spectrum", "--in", path("f.json"), "--out", path("mu.json"), "--profile-out", path("p.csv")}), 0);
  EXPECT_NE(out_.str().find("total_mass: 0.25"), std::string::npos);
  std::ifstream csv(path("p.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "cardinality,mass");
}

TEST_F(CliTest, SampleIsSeedReproducible) {
  write("f.json", R"({"grid":{"level":3},"backend":"chaos",
                     "data":[{"cells":[0],"coeff":1},{"cells":[2,5],"coeff":-2},{"cells":[1,2,3],"coeff":0.5}]})");
  ASSERT_EQ(run({"sample", "--in", path("f.json"), "--k", "500", "--seed", "4", "--out", path("a.json")}), 0);
  ASSERT_EQ(run({"sample", "--in", path("f.json"), "--k", "500", "--seed", "4", "--out", path("b.json"),
                 "--threads", "3"}),
            0);
  EXPECT_EQ(read_text_file(path("a.json")), read_text_file(path("b.json")));
  ASSERT_EQ(run({"sample", "--in", path("f.json"), "--k", "50", "--method", "bitwise", "--out", path("c.json")}), 0);
  EXPECT_EQ(run({"sample", "--in", path("f.json"), "--method", "magic"}), 2);
}

TEST_F(CliTest, CutsReportsFailingCut) {
  write("f.json", R"({"grid":{"level":2},"backend":"chaos","data":[{"cells":[1,2],"coeff":1}]})");
  ASSERT_EQ(run({"cuts", "--in", path("f.json"), "--out", path("cuts.csv")}), 0);
  EXPECT_NE(out_.str().find("first-chaos: false"), std::string::npos);
  EXPECT_NE(out_.str().find("failing_cut: 2"), std::string::npos);
}

TEST_F(CliTest, ClassifyWritesReport) {
  ASSERT_EQ(run({"classify", "--family", "majority3", "--levels", "1..4", "--out", path("r.json")}), 0) << err_.str();
  auto r = read_json_file(path("r.json"));
  ASSERT_EQ(r["records"].size(), 4u);
  EXPECT_NEAR(r["records"][0]["singleton_mass"].get<double>(), 0.75, 1e-12);
  EXPECT_EQ(run({"classify", "--family", "unknown"}), 2);
}

TEST_F(CliTest, DimWritesCsv) {
  ASSERT_EQ(run({"dim", "--family", "tribes", "--levels", "4..6", "--samples", "500", "--seed", "1", "--out",
                 path("dim.csv")}),
            0)
      << err_.str();
  std::ifstream csv(path("dim.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "scale,mean_log_count,stderr");
}

TEST_F(CliTest, ItoCheck) {
  ASSERT_EQ(run({"ito", "--order", "2", "--level", "6", "--paths", "20000", "--seed", "7", "--check"}), 0)
      << out_.str();
  write("k.json", R"({"order":1,"type":"constant","value":2})");
  ASSERT_EQ(run({"ito", "--kernel", path("k.json"), "--level", "5", "--paths", "20000", "--check"}), 0);
  EXPECT_NE(out_.str().find("isometry: 4"), std::string::npos);
}

TEST_F(CliTest, NpointDefaultIntegral) {
  ASSERT_EQ(run({"npoint", "--order", "1", "--level", "5", "--paths", "20000", "--out", path("d.csv")}), 0)
      << err_.str();
  std::ifstream csv(path("d.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "cells,mass,stderr,density");
}

TEST_F(CliTest, SelftestAndCalibrate) {
  EXPECT_EQ(run({"selftest", "--level", "10", "--seed", "1"}), 0) << out_.str();
  EXPECT_NE(out_.str().find("selftest: pass"), std::string::npos);
  EXPECT_EQ(run({"calibrate"}), 0) << out_.str();
}

TEST(CliHelpers, ParseLevels) {
  EXPECT_EQ(cli::parse_levels("4..7"), (std::vector<int>{4, 5, 6, 7}));
  EXPECT_EQ(cli::parse_levels("1,3"), (std::vector<int>{1, 3}));
  EXPECT_THROW(cli::parse_levels("5..2"), ValidationError);
  EXPECT_THROW(cli::parse_levels("a..b"), ValidationError);
}

TEST(CliHelpers, Sha256) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
