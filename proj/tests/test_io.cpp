#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cfloat>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetprobit/dgp.hpp"
#include "hetprobit/harness.hpp"
#include "hetprobit/io.hpp"
#include "hetprobit/types.hpp"
#include "support/testutil.hpp"
#include "support/validators.hpp"

using namespace hetprobit;
namespace fs = std::filesystem;
using hetprobit::io::IoError;

namespace {

fs::path tmpdir() {
  const fs::path p = fs::temp_directory_path() / "hetprobit_io_tests";
  fs::create_directories(p);
  return p;
}

std::string tmpfile_with(const std::string& name, const std::string& content) {
  const std::string path = (tmpdir() / name).string();
  io::write_text_file(path, content);
  return path;
}

nlohmann::json repo_schema(const std::string& name) {
  const std::string path = std::string(HETPROBIT_REPO_DIR) + "/schemas/" + name;
  return nlohmann::json::parse(io::read_text_file(path));
}

}  // namespace

TEST_CASE("doubles survive the 17-digit text round trip") {
  for (double v : {0.1, 1.0 / 3.0, 3.141592653589793, -2.5e-17, 1e-300, DBL_MAX, DBL_MIN,
                   2.2250738585072014e-308, -0.59383, 123456789.123456789}) {
    const std::string s = io::format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("dataset CSV round trip is lossless") {
  Rng rng(5150);
  Dataset d = testsupport::random_dataset(rng, 25, 3, 2);
  d.X(0, 1) = 1e-300;
  d.X(1, 2) = -DBL_MAX;
  d.X(2, 1) = 0.1 + 0.2;  // not representable exactly; must still round trip
  d.Z(3, 0) = 2.2250738585072014e-308;

  const std::string path = (tmpdir() / "roundtrip.csv").string();
  io::write_dataset_csv(path, d);
  const Dataset back = io::read_dataset_csv(path);
  CHECK(back.y == d.y);
  CHECK(back.X == d.X);
  CHECK(back.Z == d.Z);

  // a second write of the read-back data is byte-identical
  const std::string path2 = (tmpdir() / "roundtrip2.csv").string();
  io::write_dataset_csv(path2, back);
  CHECK(io::read_text_file(path) == io::read_text_file(path2));
}

TEST_CASE("header names fix the column split") {
  const std::string p =
      tmpfile_with("shape.csv", "y,x1,x2,x3,z1\n1,1,0.5,-2,1\n0,1,0.25,3,0\n");
  const Dataset d = io::read_dataset_csv(p);
  CHECK(d.n() == 2);
  CHECK(d.k1() == 3);
  CHECK(d.k2() == 1);
  CHECK(d.X(1, 2) == 3.0);
  CHECK(d.Z(0, 0) == 1.0);

  const std::string noz = tmpfile_with("noz.csv", "y,x1\n1,4\n0,5\n");
  const Dataset d2 = io::read_dataset_csv(noz);
  CHECK(d2.k1() == 1);
  CHECK(d2.k2() == 0);
}

TEST_CASE("CSV reader tolerates CRLF and blank lines") {
  const std::string p = tmpfile_with("crlf.csv", "y,x1\r\n1,2\r\n\r\n0,3\r\n");
  const Dataset d = io::read_dataset_csv(p);
  CHECK(d.n() == 2);
  CHECK(d.X(1, 0) == 3.0);
}

TEST_CASE("CSV errors carry the file and line number") {
  using Catch::Matchers::ContainsSubstring;
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f1.csv", "y,x1\n1,2.0,3.0\n")),
                    ContainsSubstring(":2:") && ContainsSubstring("fields"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f2.csv", "y,x1\n1,2\n2,1.0\n")),
                    ContainsSubstring(":3:") && ContainsSubstring("y must be 0 or 1"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f3.csv", "y,x1\n1,abc\n")),
                    ContainsSubstring(":2:") && ContainsSubstring("not a number"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f4.csv", "y,x1,w\n1,2,3\n")),
                    ContainsSubstring("unexpected column 'w'"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f5.csv", "y,x1,z1,x2\n1,2,3,4\n")),
                    ContainsSubstring("unexpected column 'x2'"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f6.csv", "y,z1\n1,2\n")),
                    ContainsSubstring("at least one x column"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f7.csv", "")),
                    ContainsSubstring("empty file"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f8.csv", "y,x1\n")),
                    ContainsSubstring("no data rows"));
  CHECK_THROWS_WITH(io::read_dataset_csv(tmpfile_with("f9.csv", "q,x1\n1,2\n")),
                    ContainsSubstring("header must start with column 'y'"));
  CHECK_THROWS_WITH(io::read_dataset_csv((tmpdir() / "does_not_exist.csv").string()),
                    ContainsSubstring("cannot open"));
}

TEST_CASE("parameter JSON round trips and accepts sidecar spellings") {
  ParamVector p;
  p.beta.resize(3);
  p.beta << 0.25, -1e-300, 7.0;
  p.gamma.resize(1);
  p.gamma << -0.125;
  const ParamVector back = io::params_from_json(io::params_json(p), "test");
  CHECK(back.beta == p.beta);
  CHECK(back.gamma == p.gamma);

  const io::ordered_json sidecar{{"beta0", {1.0, 2.0}}, {"gamma0", {3.0}}};
  const ParamVector side = io::params_from_json(sidecar, "test");
  CHECK(side.beta.size() == 2);
  CHECK(side.gamma[0] == 3.0);

  const io::ordered_json nogamma{{"beta", {1.0}}};
  CHECK(io::params_from_json(nogamma, "test").gamma.size() == 0);

  CHECK_THROWS_AS(io::params_from_json(io::ordered_json{{"gamma", {1.0}}}, "test"), IoError);
  CHECK_THROWS_AS(io::params_from_json(io::ordered_json{{"beta", "nope"}}, "test"), IoError);
  CHECK_THROWS_AS(io::params_from_json(io::ordered_json{{"beta", {1.0, "x"}}}, "test"), IoError);
}

TEST_CASE("method names parse with their aliases") {
  CHECK(io::method_from_string("bfgs") == Method::BFGS);
  CHECK(io::method_from_string("cg") == Method::CG);
  CHECK(io::method_from_string("neldermead") == Method::NelderMead);
  CHECK(io::method_from_string("nelder-mead") == Method::NelderMead);
  CHECK(io::method_from_string("nm") == Method::NelderMead);
  CHECK(io::method_from_string("sann") == Method::SANN);
  CHECK_THROWS_AS(io::method_from_string("newton"), IoError);
}

TEST_CASE("histogram CSV lists bins ascending with the pooled row last") {
  LogHistogram h{0.05, {}, 0};
  h.add(1.0, false);
  h.add(1.0, false);
  h.add(0.12, false);
  h.add(42.0, true);

  const std::string csv = io::histogram_csv(h);
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) lines.push_back(line);

  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "bin_left,bin_right,count");
  CHECK(lines[1].substr(lines[1].rfind(',') + 1) == "1");  // bin -19 first
  CHECK(lines[2].substr(lines[2].rfind(',') + 1) == "2");  // bin 0 second
  CHECK(lines[3] == "better_than_reference,,1");

  // the bin row edges match the histogram's own arithmetic
  CHECK(lines[2].rfind(io::format_double(h.bin_left(0)) + ",", 0) == 0);
}

TEST_CASE("multistart report JSON validates against the shipped schema") {
  DgpConfig dc = DgpConfig::het_paper(777);
  dc.n = 60;
  const SimulatedDataset sim = simulate_het(dc);

  MultiStartConfig cfg;
  cfg.num_starts = 4;
  cfg.seed = 3;
  cfg.threads = 1;
  cfg.reference = sim.params();
  OptimizerSpec bfgs;
  bfgs.method = Method::BFGS;
  OptimizerSpec sann;
  sann.method = Method::SANN;
  sann.sann.eval_budget = 200;
  cfg.methods = {bfgs, sann};

  const MultiStartReport report = run_multistart(sim.data, cfg);
  const nlohmann::json doc = nlohmann::json::parse(io::report_json(report).dump());
  std::string why;
  const bool ok = testsupport::schema_validate(doc, repo_schema("multistart_report.schema.json"), &why);
  INFO(why);
  CHECK(ok);

  // mutated documents must fail the same schema
  nlohmann::json broken = doc;
  broken["extra"] = 1;
  CHECK_FALSE(testsupport::schema_validate(broken, repo_schema("multistart_report.schema.json")));
  broken = doc;
  broken.erase("seed");
  CHECK_FALSE(testsupport::schema_validate(broken, repo_schema("multistart_report.schema.json")));
  broken = doc;
  broken["methods"][0]["records"][0]["terminated"] = "gave_up";
  CHECK_FALSE(testsupport::schema_validate(broken, repo_schema("multistart_report.schema.json")));
}

TEST_CASE("simulation sidecar JSON validates against the shipped schema") {
  DgpConfig dc = DgpConfig::het_paper(778);
  dc.n = 50;
  const SimulatedDataset sim = simulate_het(dc);
  const nlohmann::json doc = nlohmann::json::parse(io::sim_sidecar_json(sim, dc).dump());
  std::string why;
  const bool ok =
      testsupport::schema_validate(doc, repo_schema("simulation_params.schema.json"), &why);
  INFO(why);
  CHECK(ok);
  CHECK(doc.at("kind") == "simulation_params");
  CHECK(doc.at("crossover").get<double>() == sim.crossover);
}

TEST_CASE("single-fit JSON with a trace validates against the shipped schema") {
  OptimResult r;
  r.point.resize(2);
  r.point << 0.5, -0.25;
  r.value = -41.5;
  r.iterations = 12;
  r.evals = 30;
  r.grad_evals = 13;
  r.terminated = Termination::Converged;
  r.trace = {{0, -90.0}, {1, -55.0}, {12, -41.5}};

  io::ordered_json j = io::optim_result_json(Method::BFGS, r);
  j["normalized"] = r.value / 50.0;
  const nlohmann::json doc = nlohmann::json::parse(j.dump());
  std::string why;
  const bool ok = testsupport::schema_validate(doc, repo_schema("fit_result.schema.json"), &why);
  INFO(why);
  CHECK(ok);
  CHECK(doc.at("trace").size() == 3);
}

TEST_CASE("bundled reference point parses and validates") {
  const std::string path = std::string(HETPROBIT_REPO_DIR) + "/data/ab_reference.json";
  const nlohmann::json doc = nlohmann::json::parse(io::read_text_file(path));
  std::string why;
  const bool ok =
      testsupport::schema_validate(doc, repo_schema("reference_params.schema.json"), &why);
  INFO(why);
  CHECK(ok);

  const ParamVector p = io::params_from_json(io::ordered_json::parse(doc.dump()), path);
  CHECK(p.beta.size() == 8);
  CHECK(p.gamma.size() == 6);
  CHECK(p.beta[7] == 0.51);
  CHECK(p.gamma[4] == 0.68);
  CHECK(doc.at("normalized_reference").get<double>() == -0.59383);
}

TEST_CASE("profile grid mask round trips through CSV") {
  Rng rng(8);
  const Dataset d = testsupport::random_dataset(rng, 40, 2, 2);
  ParamVector base;
  base.beta.resize(2);
  base.beta << 2.0, -1.0;
  base.gamma = Eigen::VectorXd::Zero(2);

  const ProfileGrid grid = profile_grid(d, base, 0, 1, {-6.0, 6.0}, {-6.0, 6.0}, 8, -200.0);
  const auto mask = io::profile_mask_from_csv(io::profile_mask_csv(grid));
  REQUIRE(mask.rows() == grid.clipped.rows());
  REQUIRE(mask.cols() == grid.clipped.cols());
  CHECK((mask == grid.clipped).all());

  const std::string values = io::profile_values_csv(grid);
  CHECK(values.rfind("gamma1\\gamma2,", 0) == 0);
  // one header line plus one line per axis1 point
  CHECK(std::count(values.begin(), values.end(), '\n') ==
        static_cast<long>(grid.axis1.size()) + 1);

  CHECK_THROWS_AS(io::profile_mask_from_csv(""), IoError);
  CHECK_THROWS_AS(io::profile_mask_from_csv("clipped\n1,0\n1\n"), IoError);
}

TEST_CASE("text file writes report failures by path") {
  CHECK_THROWS_WITH(io::write_text_file("/nonexistent_dir_zz/file.txt", "x"),
                    Catch::Matchers::ContainsSubstring("/nonexistent_dir_zz/file.txt"));
  const std::string p = tmpfile_with("bytes.txt", "a\nb\r\nc");
  CHECK(io::read_text_file(p) == "a\nb\r\nc");
}
