#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hslag/cli/run.hpp"

using namespace hslag;

namespace {

json base_spectrum_config() {
  json doc;
  doc["task"] = "spectrum";
  doc["manifold"] = {{"backend", "flat_torus"}, {"dim", 4}};
  doc["lagrangian"] = {{"type", "flat_fiber"}, {"y0", {0.3, 1.1}}};
  doc["discretization"] = {{"N", 16}, {"m", 5}};
  return doc;
}

}  // namespace

TEST_CASE("schema validation rejects bad configs") {
  SUBCASE("missing manifold block") {
    json doc;
    doc["task"] = "spectrum";
    CHECK_THROWS_WITH_AS(parse_config(doc),
                         "ConfigInvalid: missing key 'manifold'",
                         ConfigInvalid);
  }
  SUBCASE("unknown top-level key") {
    json doc = base_spectrum_config();
    doc["grit"] = 1;
    CHECK_THROWS_AS(parse_config(doc), ConfigInvalid);
  }
  SUBCASE("unknown nested key") {
    json doc = base_spectrum_config();
    doc["discretization"]["order"] = 4;
    CHECK_THROWS_AS(parse_config(doc), ConfigInvalid);
  }
  SUBCASE("unknown task") {
    json doc = base_spectrum_config();
    doc["task"] = "frobnicate";
    CHECK_THROWS_AS(parse_config(doc), ConfigInvalid);
  }
  SUBCASE("wrong value type") {
    json doc = base_spectrum_config();
    doc["discretization"]["N"] = "many";
    CHECK_THROWS_AS(parse_config(doc), ConfigInvalid);
  }
}

TEST_CASE("spectrum task reproduces the quartic oracle") {
  ExperimentConfig cfg = parse_config(base_spectrum_config());
  RunReport rep = run(cfg);
  CHECK(rep.pass);
  CHECK(rep.scalars.at("kernel_dimension") == 1.0);
  const Table& t = rep.tables.at("spectrum");
  REQUIRE(t.rows.size() == 121);  // (2*5+1)^2 modes
  // eigenvalues are the sorted fourth powers of the mode norms
  std::vector<double> oracle;
  for (int a = -5; a <= 5; ++a)
    for (int b = -5; b <= 5; ++b)
      oracle.push_back(std::pow(double(a * a + b * b), 2.0));
  std::sort(oracle.begin(), oracle.end());
  for (size_t i = 0; i < t.rows.size(); ++i)
    CHECK(std::abs(t.rows[i][1] - oracle[i]) < 1e-8);
}

TEST_CASE("hslag-check passes on the CP^2 barycenter fiber") {
  json doc;
  doc["task"] = "hslag-check";
  doc["manifold"] = {{"backend", "toric"}, {"n", 2}};
  doc["lagrangian"] = {{"type", "moment_fiber"},
                       {"x0", {1.0 / 3, 1.0 / 3}}};
  doc["discretization"] = {{"N", 16}};
  RunReport rep = run(parse_config(doc));
  CHECK(rep.pass);
  CHECK(rep.scalars.at("sup_residual") < 1e-8);
}

TEST_CASE("verdict failures are reported, not thrown") {
  json doc;
  doc["task"] = "hslag-check";
  doc["manifold"] = {{"backend", "sphere"}};
  doc["lagrangian"] = {{"type", "latitude_circle"}, {"u0", 0.4}};
  doc["discretization"] = {{"N", 24}};
  RunReport rep = run(parse_config(doc));  // a parallel is not stationary
  CHECK_FALSE(rep.pass);
  CHECK(rep.error_code.empty());
  CHECK_FALSE(rep.verdicts.at("stationary"));
}

TEST_CASE("module errors surface with their code") {
  json doc;
  doc["task"] = "hslag-check";
  doc["manifold"] = {{"backend", "toric"}, {"n", 1}};
  doc["lagrangian"] = {{"type", "moment_fiber"}, {"x0", {0.0}}};
  RunReport rep = run(parse_config(doc));
  CHECK_FALSE(rep.pass);
  CHECK(rep.error_code == "BoundaryPoint");
}

TEST_CASE("reports are deterministic and hashes track content") {
  ExperimentConfig cfg = parse_config(base_spectrum_config());
  RunReport r1 = run(cfg);
  RunReport r2 = run(cfg);
  CHECK(r1.report_hash == r2.report_hash);
  CHECK(r1.config_hash == r2.config_hash);
  CHECK(report_digest_material(r1) == report_digest_material(r2));

  json other = base_spectrum_config();
  other["discretization"]["m"] = 4;
  RunReport r3 = run(parse_config(other));
  CHECK(r3.config_hash != r1.config_hash);
  CHECK(r3.report_hash != r1.report_hash);
}

TEST_CASE("plot data lands as rfc-4180 csv") {
  ExperimentConfig cfg = parse_config(base_spectrum_config());
  RunReport rep = run(cfg);
  auto dir = std::filesystem::temp_directory_path() / "hslag_cli_test";
  std::filesystem::remove_all(dir);
  auto files = emit_plot_data(rep, dir, "demo");
  REQUIRE(files.size() == 1);
  std::ifstream in(files[0], std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  CHECK(body.rfind("index,eigenvalue\r\n", 0) == 0);
  CHECK(body.find("\r\n") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("validate task checks the scene only") {
  json doc;
  doc["task"] = "validate";
  doc["manifold"] = {{"backend", "projective"}, {"n", 2}};
  doc["lagrangian"] = {{"type", "clifford"}};
  doc["discretization"] = {{"N", 12}};
  RunReport rep = run(parse_config(doc));
  CHECK(rep.pass);
  CHECK(rep.scalars.at("lagrangian_defect") < 1e-8);
}

TEST_CASE("run_file exercises exit codes") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "hslag_cli_run";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto write = [&](const std::string& name, const json& doc) {
    std::ofstream os(dir / name);
    os << doc.dump();
    return (dir / name).string();
  };

  SUBCASE("pass gives exit 0 and a report file") {
    std::string p = write("ok.json", base_spectrum_config());
    CHECK(run_file(p, (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "run_report.json"));
    CHECK(fs::exists(dir / "out" / "run_spectrum.csv"));
  }
  SUBCASE("verdict failure gives exit 2") {
    json doc;
    doc["task"] = "hslag-check";
    doc["manifold"] = {{"backend", "sphere"}};
    doc["lagrangian"] = {{"type", "latitude_circle"}, {"u0", 0.4}};
    doc["discretization"] = {{"N", 24}};
    std::string p = write("fail.json", doc);
    CHECK(run_file(p, (dir / "out2").string()) == 2);
  }
  SUBCASE("config error gives exit 1") {
    json doc;
    doc["task"] = "spectrum";
    std::string p = write("bad.json", doc);
    CHECK(run_file(p, (dir / "out3").string()) == 1);
    CHECK(run_file((dir / "missing.json").string(), dir.string()) == 1);
  }
  fs::remove_all(dir);
}
