#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "hetprobit/io.hpp"
#include "hetprobit/model.hpp"
#include "support/validators.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HETPROBIT_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  for (std::size_t got; (got = fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, got);
  const int rc = pclose(pipe);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

fs::path tmpdir() {
  const fs::path p = fs::temp_directory_path() / "hetprobit_cli_tests";
  fs::create_directories(p);
  return p;
}

std::string write_json(const std::string& name, const json& j) {
  const std::string path = (tmpdir() / name).string();
  hetprobit::io::write_text_file(path, j.dump(2) + "\n");
  return path;
}

std::string slurp(const fs::path& p) { return hetprobit::io::read_text_file(p.string()); }

json repo_schema(const std::string& name) {
  return json::parse(slurp(fs::path(HETPROBIT_REPO_DIR) / "schemas" / name));
}

// Shared simulated dataset for the fit/multistart/transform/compare cases.
struct Fixture {
  std::string data;
  std::string sidecar;
};

const Fixture& het_fixture() {
  static Fixture f = [] {
    Fixture fx;
    fx.data = (tmpdir() / "het.csv").string();
    fx.sidecar = fx.data + ".params.json";
    const std::string cfg = write_json(
        "het_config.json", json{{"preset", "het-paper"}, {"seed", 5151}, {"n", 150}});
    const CmdResult r = run_cli("simulate --config " + cfg + " --out " + fx.data);
    REQUIRE(r.status == 0);
    return fx;
  }();
  return f;
}

long histogram_csv_total(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));  // header
  long total = 0;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    REQUIRE(comma != std::string::npos);
    total += std::strtol(line.c_str() + comma + 1, nullptr, 10);
  }
  return total;
}

std::vector<std::string> extract_attr(const std::string& svg, const std::string& attr) {
  std::vector<std::string> values;
  const std::string needle = attr + "=\"";
  for (std::size_t pos = svg.find(needle); pos != std::string::npos;
       pos = svg.find(needle, pos + 1)) {
    const std::size_t start = pos + needle.size();
    const std::size_t end = svg.find('"', start);
    REQUIRE(end != std::string::npos);
    values.push_back(svg.substr(start, end - start));
  }
  return values;
}

}  // namespace

TEST_CASE("simulate is byte-deterministic and labels its columns") {
  const std::string cfg =
      write_json("sim_config.json", json{{"preset", "het-paper"}, {"seed", 17}, {"n", 80}});
  const std::string out1 = (tmpdir() / "sim1.csv").string();
  const std::string out2 = (tmpdir() / "sim2.csv").string();
  CHECK(run_cli("simulate --config " + cfg + " --out " + out1).status == 0);
  CHECK(run_cli("simulate --config " + cfg + " --out " + out2).status == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1 + ".params.json") == slurp(out2 + ".params.json"));

  const std::string header = slurp(out1).substr(0, slurp(out1).find('\n'));
  CHECK(header == "y,x1,x2,x3,z1,z2");

  const json sidecar = json::parse(slurp(out1 + ".params.json"));
  std::string why;
  CHECK(testsupport::schema_validate(sidecar, repo_schema("simulation_params.schema.json"), &why));
  INFO(why);
  CHECK(sidecar.at("k1") == 3);
  CHECK(sidecar.at("k2") == 2);
  const double crossover = sidecar.at("crossover").get<double>();
  CHECK(crossover >= 0.20);
  CHECK(crossover <= 0.30);
}

TEST_CASE("simulate handles the location-only preset") {
  const std::string cfg = write_json(
      "probit_config.json", json{{"preset", "probit-paper"}, {"seed", 29}, {"n", 200}});
  const std::string out = (tmpdir() / "probit.csv").string();
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + out).status == 0);
  const std::string header = slurp(out).substr(0, slurp(out).find('\n'));
  CHECK(header == "y,x1,x2,x3,x4,x5");
  const json sidecar = json::parse(slurp(out + ".params.json"));
  CHECK(sidecar.at("k2") == 0);
  CHECK(sidecar.at("gamma0").empty());
}

TEST_CASE("config files with unknown or missing keys are rejected") {
  const std::string bogus = write_json("bogus.json", json{{"seed", 1}, {"bogus", 2}});
  CmdResult r = run_cli("simulate --config " + bogus + " --out " + (tmpdir() / "x.csv").string());
  CHECK(r.status == 1);
  CHECK(r.output.find("unknown key 'bogus'") != std::string::npos);

  const std::string noseed = write_json("noseed.json", json{{"preset", "het-paper"}});
  r = run_cli("simulate --config " + noseed + " --out " + (tmpdir() / "x.csv").string());
  CHECK(r.status == 1);
  CHECK(r.output.find("'seed' is mandatory") != std::string::npos);
}

TEST_CASE("missing input files fail with the offending path in the message") {
  const CmdResult r = run_cli("fit --data /no/such/file.csv --method bfgs");
  CHECK(r.status == 1);
  CHECK(r.output.find("/no/such/file.csv") != std::string::npos);
}

TEST_CASE("running without a subcommand is an error") {
  CHECK(run_cli("").status != 0);
  CHECK(run_cli("frobnicate").status != 0);
}

TEST_CASE("fit emits schema-valid JSON and mirrors it to --out") {
  const Fixture& fx = het_fixture();
  const std::string out = (tmpdir() / "fit.json").string();
  const CmdResult r = run_cli("fit --data " + fx.data +
                              " --method bfgs --start random:9 --out " + out);
  REQUIRE(r.status == 0);
  const json doc = json::parse(r.output);
  std::string why;
  const bool ok = testsupport::schema_validate(doc, repo_schema("fit_result.schema.json"), &why);
  INFO(why);
  CHECK(ok);
  CHECK(doc.at("method") == "bfgs");
  CHECK(doc.at("point").size() == 5);  // k1 + k2 for the het preset
  CHECK(slurp(out) == r.output);

  // explicit starts must match the dataset dimension
  const CmdResult bad = run_cli("fit --data " + fx.data + " --method bfgs --start 0,0");
  CHECK(bad.status == 1);
  CHECK(bad.output.find("components") != std::string::npos);
}

TEST_CASE("annealing fits are reproducible through the seed flag") {
  const Fixture& fx = het_fixture();
  const std::string args = "fit --data " + fx.data +
                           " --method sann --seed 31 --budget 400 --start random:2";
  const CmdResult a = run_cli(args);
  const CmdResult b = run_cli(args);
  REQUIRE(a.status == 0);
  CHECK(a.output == b.output);
  const CmdResult c = run_cli("fit --data " + fx.data +
                              " --method sann --seed 32 --budget 400 --start random:2");
  CHECK(a.output != c.output);
}

TEST_CASE("multistart writes the full artifact set with conserved counts") {
  const Fixture& fx = het_fixture();
  const std::string cfg = write_json("ms_config.json",
                                     json{{"seed", 99},
                                          {"num_starts", 6},
                                          {"threads", 1},
                                          {"methods", json::array({json{{"method", "bfgs"}}})},
                                          {"reference_file", fx.sidecar}});
  const fs::path dir = tmpdir() / "ms_out";
  const CmdResult r =
      run_cli("multistart --data " + fx.data + " --config " + cfg + " --out-dir " + dir.string());
  REQUIRE(r.status == 0);
  CHECK(r.output.find("better_than_reference=") != std::string::npos);

  const json report = json::parse(slurp(dir / "report.json"));
  std::string why;
  const bool ok =
      testsupport::schema_validate(report, repo_schema("multistart_report.schema.json"), &why);
  INFO(why);
  CHECK(ok);
  CHECK(report.at("num_starts") == 6);
  CHECK(report.at("methods").size() == 1);

  CHECK(histogram_csv_total(slurp(dir / "bfgs_distance_hist.csv")) == 6);
  CHECK(histogram_csv_total(slurp(dir / "bfgs_valuegap_hist.csv")) == 6);

  for (const char* name : {"bfgs_distance_hist.svg", "bfgs_valuegap_hist.svg"}) {
    std::string err;
    INFO(name << ": " << err);
    CHECK(testsupport::xml_well_formed(slurp(dir / name), &err));
  }
}

TEST_CASE("multistart output is identical across thread counts") {
  const Fixture& fx = het_fixture();
  const std::string cfg = write_json(
      "ms_threads.json", json{{"seed", 123},
                              {"num_starts", 5},
                              {"methods", json::array({json{{"method", "neldermead"}}})},
                              {"reference_file", fx.sidecar}});
  const fs::path d1 = tmpdir() / "ms_t1";
  const fs::path d2 = tmpdir() / "ms_t2";
  REQUIRE(run_cli("multistart --data " + fx.data + " --config " + cfg + " --out-dir " +
                  d1.string() + " --threads 1")
              .status == 0);
  REQUIRE(run_cli("multistart --data " + fx.data + " --config " + cfg + " --out-dir " +
                  d2.string() + " --threads 2")
              .status == 0);
  CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
  CHECK(slurp(d1 / "neldermead_distance_hist.csv") == slurp(d2 / "neldermead_distance_hist.csv"));
  CHECK(slurp(d1 / "neldermead_valuegap_hist.svg") == slurp(d2 / "neldermead_valuegap_hist.svg"));
}

TEST_CASE("transform passes its own equality check and writes the shifted data") {
  const Fixture& fx = het_fixture();
  const std::string out = (tmpdir() / "shifted.csv").string();
  const CmdResult r =
      run_cli("transform --data " + fx.data + " --params " + fx.sidecar + " --out " + out);
  REQUIRE(r.status == 0);
  CHECK(r.output.find("equality check passed") != std::string::npos);

  const json sidecar = json::parse(slurp(out + ".params.json"));
  std::string why;
  const bool ok =
      testsupport::schema_validate(sidecar, repo_schema("transform_params.schema.json"), &why);
  INFO(why);
  CHECK(ok);
  const double lo = sidecar.at("original_value").get<double>();
  const double lt = sidecar.at("transformed_value").get<double>();
  CHECK(std::abs(lo - lt) <= 1e-9 * std::max(1.0, std::abs(lo)));

  // shifted dataset reads back with the same shape
  const hetprobit::Dataset td = hetprobit::io::read_dataset_csv(out);
  CHECK(td.n() == 150);
  CHECK(td.k2() == 2);
  CHECK(((td.Z.array() == -0.5) || (td.Z.array() == 0.5)).all());
}

TEST_CASE("compare pairs the original and transformed panels on one domain") {
  const Fixture& fx = het_fixture();
  const std::string cfg = write_json(
      "cmp_config.json", json{{"seed", 7},
                              {"num_starts", 4},
                              {"threads", 1},
                              {"methods", json::array({json{{"method", "bfgs"}}})}});
  const fs::path dir = tmpdir() / "cmp_out";
  const CmdResult r = run_cli("compare --data " + fx.data + " --params " + fx.sidecar +
                              " --config " + cfg + " --out-dir " + dir.string());
  REQUIRE(r.status == 0);
  CHECK(r.output.find("better_than_reference original=") != std::string::npos);

  for (const char* name : {"original_report.json", "transformed_report.json"}) {
    const json report = json::parse(slurp(dir / name));
    std::string why;
    INFO(name << ": " << why);
    CHECK(testsupport::schema_validate(report, repo_schema("multistart_report.schema.json"), &why));
  }

  for (const char* name : {"compare_bfgs_distance.svg", "compare_bfgs_valuegap.svg"}) {
    const std::string svg = slurp(dir / name);
    std::string err;
    INFO(name << ": " << err);
    CHECK(testsupport::xml_well_formed(svg, &err));
    const auto xmins = extract_attr(svg, "data-xmin");
    const auto xmaxs = extract_attr(svg, "data-xmax");
    REQUIRE(xmins.size() == 2);
    REQUIRE(xmaxs.size() == 2);
    CHECK(xmins[0] == xmins[1]);
    CHECK(xmaxs[0] == xmaxs[1]);
  }
}

TEST_CASE("profile writes the grid, mask, heatmap, and flatness readout") {
  const Fixture& fx = het_fixture();
  const fs::path dir = tmpdir() / "prof_out";
  const CmdResult r = run_cli("profile --data " + fx.data + " --params " + fx.sidecar +
                              " --j1 1 --j2 2 --range1 \"-5:15\" --range2 \"-5:15\""
                              " --resolution 6 --out-dir " +
                              dir.string());
  REQUIRE(r.status == 0);

  const json sidecar = json::parse(slurp(dir / "profile.json"));
  std::string why;
  const bool ok = testsupport::schema_validate(sidecar, repo_schema("profile.schema.json"), &why);
  INFO(why);
  CHECK(ok);
  REQUIRE_FALSE(sidecar.at("plateau_subgrid").is_null());
  CHECK(sidecar.at("plateau_subgrid").at("cells").get<long>() > 0);

  const std::string values = slurp(dir / "profile_values.csv");
  CHECK(std::count(values.begin(), values.end(), '\n') == 7);  // header + 6 rows
  CHECK_NOTHROW(hetprobit::io::profile_mask_from_csv(slurp(dir / "profile_mask.csv")));
  std::string err;
  INFO(err);
  CHECK(testsupport::xml_well_formed(slurp(dir / "profile.svg"), &err));
}

TEST_CASE("benchmark prints the -n ln 2 level") {
  const CmdResult r = run_cli("benchmark --n 100");
  REQUIRE(r.status == 0);
  const json doc = json::parse(r.output);
  std::string why;
  CHECK(testsupport::schema_validate(doc, repo_schema("benchmark.schema.json"), &why));
  INFO(why);
  CHECK(doc.at("n") == 100);
  CHECK(doc.at("benchmark").get<double>() == hetprobit::benchmark_value(100));
  CHECK(doc.at("normalized").get<double>() == -hetprobit::kLn2);

  CHECK(run_cli("benchmark").status == 1);

  const Fixture& fx = het_fixture();
  const CmdResult rd = run_cli("benchmark --data " + fx.data);
  REQUIRE(rd.status == 0);
  CHECK(json::parse(rd.output).at("n") == 150);
}
