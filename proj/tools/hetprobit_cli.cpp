// Command-line driver: simulation, single fits, multi-start batches,
// profile grids, the dataset transformation, before/after comparisons, and
// the -n ln 2 benchmark. Every command is deterministic given its inputs
// (seeds included); outputs are byte-identical across runs and --threads.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetprobit/dgp.hpp"
#include "hetprobit/harness.hpp"
#include "hetprobit/io.hpp"
#include "hetprobit/model.hpp"
#include "hetprobit/optimize.hpp"
#include "hetprobit/svg.hpp"
#include "hetprobit/types.hpp"

namespace fs = std::filesystem;
using hetprobit::io::IoError;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json load_json(const std::string& path) {
  try {
    return ordered_json::parse(hetprobit::io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void dump_json(const std::string& path, const ordered_json& j) {
  hetprobit::io::write_text_file(path, j.dump(2) + "\n");
}

void require_allowed_keys(const ordered_json& j, const std::set<std::string>& allowed,
                          const std::string& ctx) {
  if (!j.is_object()) throw IoError(ctx + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw IoError(ctx + ": unknown key '" + key + "'");
}

hetprobit::DgpConfig parse_dgp_config(const ordered_json& j, const std::string& ctx) {
  require_allowed_keys(j,
                       {"preset", "n", "k1", "k2", "z_kind", "param_box", "crossover_lo",
                        "crossover_hi", "max_resamples", "seed", "fixed_gamma0"},
                       ctx);
  if (!j.contains("seed")) throw IoError(ctx + ": 'seed' is mandatory");
  const auto seed = j.at("seed").get<std::uint64_t>();

  hetprobit::DgpConfig cfg;
  if (j.contains("preset")) {
    const auto p = j.at("preset").get<std::string>();
    if (p == "het-paper")
      cfg = hetprobit::DgpConfig::het_paper(seed);
    else if (p == "het-gamma6")
      cfg = hetprobit::DgpConfig::het_gamma6(seed);
    else if (p == "probit-paper")
      cfg = hetprobit::DgpConfig::probit_paper(seed);
    else
      throw IoError(ctx + ": unknown preset '" + p + "' (want het-paper|het-gamma6|probit-paper)");
  }
  cfg.seed = seed;
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("k1")) cfg.k1 = j.at("k1").get<int>();
  if (j.contains("k2")) cfg.k2 = j.at("k2").get<int>();
  if (j.contains("param_box")) cfg.param_box = j.at("param_box").get<double>();
  if (j.contains("crossover_lo")) cfg.crossover_lo = j.at("crossover_lo").get<double>();
  if (j.contains("crossover_hi")) cfg.crossover_hi = j.at("crossover_hi").get<double>();
  if (j.contains("max_resamples")) cfg.max_resamples = j.at("max_resamples").get<int>();
  if (j.contains("z_kind")) {
    const auto z = j.at("z_kind").get<std::string>();
    if (z == "bernoulli_half")
      cfg.z_kind = hetprobit::ZKind::BernoulliHalf;
    else if (z == "continuous_nonneg")
      cfg.z_kind = hetprobit::ZKind::ContinuousNonneg;
    else
      throw IoError(ctx + ": unknown z_kind '" + z + "'");
  }
  if (j.contains("fixed_gamma0"))
    cfg.fixed_gamma0 = hetprobit::io::vector_from_json(j.at("fixed_gamma0"), ctx + ".fixed_gamma0");
  return cfg;
}

hetprobit::OptimizerSpec parse_optimizer_spec(const ordered_json& j, const std::string& ctx) {
  require_allowed_keys(j, {"method", "max_iter", "f_tol", "g_tol", "record_trace", "sann"}, ctx);
  if (!j.contains("method")) throw IoError(ctx + ": 'method' is mandatory");
  hetprobit::OptimizerSpec spec;
  spec.method = hetprobit::io::method_from_string(j.at("method").get<std::string>());
  if (j.contains("max_iter")) spec.max_iter = j.at("max_iter").get<int>();
  if (j.contains("f_tol")) spec.f_tol = j.at("f_tol").get<double>();
  if (j.contains("g_tol")) spec.g_tol = j.at("g_tol").get<double>();
  if (j.contains("record_trace")) spec.record_trace = j.at("record_trace").get<bool>();
  if (j.contains("sann")) {
    const auto& s = j.at("sann");
    require_allowed_keys(s, {"initial_temp", "proposal_scale", "eval_budget"}, ctx + ".sann");
    if (s.contains("initial_temp")) spec.sann.initial_temp = s.at("initial_temp").get<double>();
    if (s.contains("proposal_scale"))
      spec.sann.proposal_scale = s.at("proposal_scale").get<double>();
    if (s.contains("eval_budget")) spec.sann.eval_budget = s.at("eval_budget").get<int>();
  }
  spec.validate();
  return spec;
}

// `reference` inline or `reference_file`; `fallback` (when set) covers
// commands that supply the reference themselves.
hetprobit::MultiStartConfig parse_multistart_config(
    const ordered_json& j, const std::string& ctx,
    const std::optional<hetprobit::ParamVector>& fallback) {
  require_allowed_keys(j,
                       {"num_starts", "start_box", "seed", "methods", "reference",
                        "reference_file", "threads", "plateau_delta", "plateau_tau",
                        "cluster_radius"},
                       ctx);
  if (!j.contains("seed")) throw IoError(ctx + ": 'seed' is mandatory");

  hetprobit::MultiStartConfig cfg;
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("num_starts")) cfg.num_starts = j.at("num_starts").get<int>();
  if (j.contains("start_box")) cfg.start_box = j.at("start_box").get<double>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("plateau_delta")) cfg.plateau_delta = j.at("plateau_delta").get<double>();
  if (j.contains("plateau_tau")) cfg.plateau_tau = j.at("plateau_tau").get<double>();
  if (j.contains("cluster_radius")) cfg.cluster_radius = j.at("cluster_radius").get<double>();

  if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty())
    throw IoError(ctx + ": 'methods' must be a nonempty array");
  int idx = 0;
  for (const auto& m : j.at("methods"))
    cfg.methods.push_back(parse_optimizer_spec(m, ctx + ".methods[" + std::to_string(idx++) + "]"));

  if (j.contains("reference") && j.contains("reference_file"))
    throw IoError(ctx + ": give 'reference' or 'reference_file', not both");
  if (j.contains("reference"))
    cfg.reference = hetprobit::io::params_from_json(j.at("reference"), ctx + ".reference");
  else if (j.contains("reference_file")) {
    const auto ref_path = j.at("reference_file").get<std::string>();
    cfg.reference = hetprobit::io::params_from_json(load_json(ref_path), ref_path);
  }
  else if (fallback)
    cfg.reference = *fallback;
  else
    throw IoError(ctx + ": 'reference' or 'reference_file' is mandatory");
  return cfg;
}

// Output-file labels per method entry; repeats get a numeric suffix.
std::vector<std::string> method_labels(const std::vector<hetprobit::OptimizerSpec>& methods) {
  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (const auto& m : methods) {
    std::string base = hetprobit::to_string(m.method);
    const int k = ++seen[base];
    labels.push_back(k == 1 ? base : base + "_" + std::to_string(k));
  }
  return labels;
}

void write_multistart_artifacts(const fs::path& dir, const hetprobit::MultiStartReport& report,
                                const std::string& prefix) {
  dump_json((dir / (prefix + "report.json")).string(), hetprobit::io::report_json(report));
  std::vector<hetprobit::OptimizerSpec> specs;
  for (const auto& m : report.methods) specs.push_back(m.spec);
  const std::vector<std::string> labels = method_labels(specs);
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const auto& mr = report.methods[m];
    const std::string stem = prefix + labels[m];
    hetprobit::io::write_text_file((dir / (stem + "_distance_hist.csv")).string(),
                                   hetprobit::io::histogram_csv(mr.distance_hist));
    hetprobit::io::write_text_file((dir / (stem + "_valuegap_hist.csv")).string(),
                                   hetprobit::io::histogram_csv(mr.value_gap_hist));
    hetprobit::io::write_text_file(
        (dir / (stem + "_distance_hist.svg")).string(),
        hetprobit::svg::histogram_svg(mr.distance_hist, labels[m] + ": distance to reference",
                                      "distance"));
    hetprobit::io::write_text_file(
        (dir / (stem + "_valuegap_hist.svg")).string(),
        hetprobit::svg::histogram_svg(mr.value_gap_hist,
                                      labels[m] + ": normalized value gap to reference",
                                      "value gap"));
  }
}

Eigen::VectorXd parse_start(const std::string& text, Eigen::Index dim, double box) {
  if (text.rfind("random:", 0) == 0) {
    const std::uint64_t seed = std::strtoull(text.c_str() + 7, nullptr, 10);
    hetprobit::Rng rng(seed);
    Eigen::VectorXd s(dim);
    for (Eigen::Index i = 0; i < dim; ++i) s[i] = rng.uniform(-box, box);
    return s;
  }
  std::vector<double> vals;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (cur.empty()) throw IoError("--start: empty component in '" + text + "'");
      char* end = nullptr;
      vals.push_back(std::strtod(cur.c_str(), &end));
      if (*end != '\0') throw IoError("--start: not a number: '" + cur + "'");
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (static_cast<Eigen::Index>(vals.size()) != dim)
    throw IoError("--start: got " + std::to_string(vals.size()) + " components, dataset needs " +
                  std::to_string(dim));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), dim);
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::string sidecar_path) {
  const hetprobit::DgpConfig cfg = parse_dgp_config(load_json(config_path), config_path);
  const hetprobit::SimulatedDataset sim =
      cfg.k2 == 0 ? hetprobit::simulate_probit(cfg) : hetprobit::simulate_het(cfg);
  hetprobit::io::write_dataset_csv(out_path, sim.data);
  if (sidecar_path.empty()) sidecar_path = out_path + ".params.json";
  dump_json(sidecar_path, hetprobit::io::sim_sidecar_json(sim, cfg));
  std::cout << "wrote " << out_path << " (n=" << sim.data.n() << ", k1=" << sim.data.k1()
            << ", k2=" << sim.data.k2() << ", crossover=" << sim.crossover << ")\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& method_name,
            const std::string& start_text, double start_box, int max_iter, double f_tol,
            double g_tol, std::uint64_t seed, double temp, double scale, int budget, bool trace,
            const std::string& out_path) {
  const hetprobit::Dataset d = hetprobit::io::read_dataset_csv(data_path);

  hetprobit::OptimizerSpec spec;
  spec.method = hetprobit::io::method_from_string(method_name);
  spec.max_iter = max_iter;
  spec.f_tol = f_tol;
  spec.g_tol = g_tol;
  spec.seed = seed;
  spec.sann.initial_temp = temp;
  spec.sann.proposal_scale = scale;
  spec.sann.eval_budget = budget;
  spec.record_trace = trace;
  spec.validate();

  const Eigen::VectorXd start = parse_start(start_text, d.k1() + d.k2(), start_box);
  const hetprobit::Objective obj = hetprobit::make_likelihood_objective(d);
  const hetprobit::OptimResult r = hetprobit::maximize(obj, spec, start);

  ordered_json j = hetprobit::io::optim_result_json(spec.method, r);
  j["normalized"] = r.value / static_cast<double>(d.n());
  const std::string text = j.dump(2) + "\n";
  if (!out_path.empty()) hetprobit::io::write_text_file(out_path, text);
  std::cout << text;
  return 0;
}

int cmd_multistart(const std::string& data_path, const std::string& config_path,
                   const std::string& out_dir, int threads_flag) {
  const hetprobit::Dataset d = hetprobit::io::read_dataset_csv(data_path);
  hetprobit::MultiStartConfig cfg =
      parse_multistart_config(load_json(config_path), config_path, std::nullopt);
  if (threads_flag > 0) cfg.threads = threads_flag;

  const hetprobit::MultiStartReport report = hetprobit::run_multistart(d, cfg);
  fs::create_directories(out_dir);
  write_multistart_artifacts(out_dir, report, "");

  for (const auto& mr : report.methods) {
    std::cout << hetprobit::to_string(mr.spec.method) << ": better_than_reference="
              << mr.summary.better_count << "/" << report.num_starts
              << " plateau=" << mr.summary.plateau_count
              << " clusters=" << mr.summary.stability.cluster_count
              << (mr.summary.stability.warning ? " [unstable: restarts scatter]" : "") << "\n";
  }
  std::cout << "wrote " << out_dir << "/report.json\n";
  return 0;
}

int cmd_profile(const std::string& data_path, const std::string& params_path, int j1, int j2,
                const std::string& range1, const std::string& range2, int resolution, double clip,
                const std::string& out_dir) {
  const hetprobit::Dataset d = hetprobit::io::read_dataset_csv(data_path);
  const hetprobit::ParamVector base =
      hetprobit::io::params_from_json(load_json(params_path), params_path);

  const auto parse_range = [](const std::string& text, const char* flag) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
      throw IoError(std::string(flag) + ": want lo:hi, got '" + text + "'");
    char *e1 = nullptr, *e2 = nullptr;
    const double lo = std::strtod(text.c_str(), &e1);
    const double hi = std::strtod(text.c_str() + colon + 1, &e2);
    if (e1 != text.c_str() + colon || *e2 != '\0')
      throw IoError(std::string(flag) + ": want lo:hi, got '" + text + "'");
    return std::make_pair(lo, hi);
  };

  const hetprobit::ProfileGrid grid =
      hetprobit::profile_grid(d, base, j1 - 1, j2 - 1, parse_range(range1, "--range1"),
                              parse_range(range2, "--range2"), resolution, clip);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  hetprobit::io::write_text_file((dir / "profile_values.csv").string(),
                                 hetprobit::io::profile_values_csv(grid));
  hetprobit::io::write_text_file((dir / "profile_mask.csv").string(),
                                 hetprobit::io::profile_mask_csv(grid));
  hetprobit::io::write_text_file(
      (dir / "profile.svg").string(),
      hetprobit::svg::heatmap_svg(grid, "log-likelihood profile"));

  // Flatness over the high-gamma subgrid (both coordinates >= 5): the
  // plateau diagnostic reported alongside the raw grid.
  long clipped_cells = 0;
  long cells = 0;
  double sub_min = 0.0, sub_max = 0.0;
  for (Eigen::Index a = 0; a < grid.axis1.size(); ++a)
    for (Eigen::Index b = 0; b < grid.axis2.size(); ++b) {
      if (grid.clipped(a, b)) ++clipped_cells;
      if (grid.axis1[a] >= 5.0 && grid.axis2[b] >= 5.0) {
        const double v = grid.values(a, b);
        if (cells == 0) {
          sub_min = sub_max = v;
        } else {
          sub_min = std::min(sub_min, v);
          sub_max = std::max(sub_max, v);
        }
        ++cells;
      }
    }
  ordered_json sidecar{
      {"kind", "profile"},
      {"j1", j1},
      {"j2", j2},
      {"resolution", resolution},
      {"clip_floor", clip},
      {"base", hetprobit::io::params_json(base)},
      {"clipped_cells", clipped_cells},
  };
  if (cells > 0) {
    sidecar["plateau_subgrid"] =
        ordered_json{{"threshold", 5.0},
                     {"cells", cells},
                     {"min", sub_min},
                     {"max", sub_max},
                     {"range", sub_max - sub_min}};
  } else {
    sidecar["plateau_subgrid"] = nullptr;
  }
  dump_json((dir / "profile.json").string(), sidecar);
  std::cout << "wrote " << out_dir << "/profile_values.csv (" << resolution << "x" << resolution
            << ", " << clipped_cells << " clipped cells)\n";
  return 0;
}

int cmd_transform(const std::string& data_path, const std::string& params_path,
                  const std::string& out_path, std::string sidecar_path) {
  const hetprobit::Dataset d = hetprobit::io::read_dataset_csv(data_path);
  const hetprobit::ParamVector p0 =
      hetprobit::io::params_from_json(load_json(params_path), params_path);
  p0.require_match(d);

  const auto [td, tp] = hetprobit::transform(d, p0);
  const double l_orig = hetprobit::log_likelihood(d, p0).value;
  const double l_trans = hetprobit::log_likelihood(td, tp).value;
  const double diff = std::abs(l_orig - l_trans);
  const double bound = 1e-9 * std::max(1.0, std::abs(l_orig));

  hetprobit::io::write_dataset_csv(out_path, td);
  if (sidecar_path.empty()) sidecar_path = out_path + ".params.json";
  dump_json(sidecar_path, ordered_json{{"kind", "transform_params"},
                                       {"beta", hetprobit::io::vector_json(tp.beta)},
                                       {"gamma", hetprobit::io::vector_json(tp.gamma)},
                                       {"original_value", l_orig},
                                       {"transformed_value", l_trans}});

  std::cout << "log-likelihood original " << hetprobit::io::format_double(l_orig)
            << ", transformed " << hetprobit::io::format_double(l_trans) << ", |diff| "
            << hetprobit::io::format_double(diff) << "\n";
  if (!(diff <= bound)) {
    std::cerr << "FAIL: transformed likelihood deviates beyond " << bound << "\n";
    return 1;
  }
  std::cout << "equality check passed (tolerance " << hetprobit::io::format_double(bound)
            << ")\n";
  return 0;
}

int cmd_compare(const std::string& data_path, const std::string& params_path,
                const std::string& config_path, const std::string& out_dir, int threads_flag) {
  const hetprobit::Dataset d = hetprobit::io::read_dataset_csv(data_path);
  const hetprobit::ParamVector p0 =
      hetprobit::io::params_from_json(load_json(params_path), params_path);
  p0.require_match(d);

  hetprobit::MultiStartConfig cfg =
      parse_multistart_config(load_json(config_path), config_path, p0);
  if (threads_flag > 0) cfg.threads = threads_flag;

  hetprobit::SimulatedDataset sim;
  sim.data = d;
  sim.beta0 = p0.beta;
  sim.gamma0 = p0.gamma;
  sim.crossover = hetprobit::crossover_fraction(d, p0.beta);

  const hetprobit::CompareReport pair = hetprobit::compare_transformed(sim, cfg);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_multistart_artifacts(dir, pair.original, "original_");
  write_multistart_artifacts(dir, pair.transformed, "transformed_");

  std::vector<hetprobit::OptimizerSpec> specs;
  for (const auto& m : pair.original.methods) specs.push_back(m.spec);
  const std::vector<std::string> labels = method_labels(specs);
  for (std::size_t m = 0; m < pair.original.methods.size(); ++m) {
    const auto& orig = pair.original.methods[m];
    const auto& trans = pair.transformed.methods[m];
    hetprobit::io::write_text_file(
        (dir / ("compare_" + labels[m] + "_distance.svg")).string(),
        hetprobit::svg::paired_histogram_svg(orig.distance_hist, "original",
                                             trans.distance_hist, "transformed",
                                             labels[m] + ": distance to reference"));
    hetprobit::io::write_text_file(
        (dir / ("compare_" + labels[m] + "_valuegap.svg")).string(),
        hetprobit::svg::paired_histogram_svg(orig.value_gap_hist, "original",
                                             trans.value_gap_hist, "transformed",
                                             labels[m] + ": normalized value gap"));
    std::cout << labels[m] << ": better_than_reference original=" << orig.summary.better_count
              << "/" << pair.original.num_starts << ", transformed="
              << trans.summary.better_count << "/" << pair.transformed.num_starts << "\n";
  }
  return 0;
}

int cmd_benchmark(const std::string& data_path, long n_flag) {
  long n = n_flag;
  if (!data_path.empty()) n = hetprobit::io::read_dataset_csv(data_path).n();
  if (n < 1) throw IoError("benchmark: give --data or --n with n >= 1");
  const ordered_json j{{"n", n},
                       {"benchmark", hetprobit::benchmark_value(static_cast<std::int64_t>(n))},
                       {"normalized", -hetprobit::kLn2}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heteroskedastic probit: simulation, estimation, and search diagnostics"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a seeded dataset and write CSV + sidecar");
  std::string sim_config, sim_out, sim_sidecar;
  sim->add_option("--config", sim_config, "JSON config (seed mandatory)")->required();
  sim->add_option("--out", sim_out, "output dataset CSV")->required();
  sim->add_option("--sidecar", sim_sidecar, "params sidecar path (default <out>.params.json)");

  // fit
  auto* fit = app.add_subcommand("fit", "maximize the log-likelihood from one start");
  std::string fit_data, fit_method, fit_start = "random:0", fit_out;
  double fit_box = 5.0, fit_ftol = 1e-8, fit_gtol = 1e-6, fit_temp = 10.0, fit_scale = 1.0;
  int fit_maxiter = 0, fit_budget = 10000;
  std::uint64_t fit_seed = 0;
  bool fit_trace = false;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--method", fit_method, "bfgs|cg|neldermead|sann")->required();
  fit->add_option("--start", fit_start, "comma-separated point or random:<seed>");
  fit->add_option("--start-box", fit_box, "half-width for random starts");
  fit->add_option("--max-iter", fit_maxiter, "0 = method default");
  fit->add_option("--f-tol", fit_ftol, "relative function tolerance");
  fit->add_option("--g-tol", fit_gtol, "gradient sup-norm tolerance");
  fit->add_option("--seed", fit_seed, "SANN proposal seed");
  fit->add_option("--temp", fit_temp, "SANN initial temperature");
  fit->add_option("--scale", fit_scale, "SANN proposal scale");
  fit->add_option("--budget", fit_budget, "SANN evaluation budget");
  fit->add_flag("--trace", fit_trace, "record best-so-far trace");
  fit->add_option("--out", fit_out, "also write the result JSON here");

  // multistart
  auto* ms = app.add_subcommand("multistart", "run every method from a shared random start set");
  std::string ms_data, ms_config, ms_out;
  int ms_threads = 0;
  ms->add_option("--data", ms_data, "dataset CSV")->required();
  ms->add_option("--config", ms_config, "JSON config (seed mandatory)")->required();
  ms->add_option("--out-dir", ms_out, "output directory")->required();
  ms->add_option("--threads", ms_threads, "worker threads (or HETPROBIT_THREADS)");

  // profile
  auto* prof = app.add_subcommand("profile", "log-likelihood grid over two gamma coordinates");
  std::string prof_data, prof_params, prof_r1 = "-5:15", prof_r2 = "-5:15", prof_out;
  int prof_j1 = 1, prof_j2 = 2, prof_res = 41;
  double prof_clip = -10000.0;
  prof->add_option("--data", prof_data, "dataset CSV")->required();
  prof->add_option("--params", prof_params, "base point JSON")->required();
  prof->add_option("--j1", prof_j1, "first gamma coordinate (1-based)");
  prof->add_option("--j2", prof_j2, "second gamma coordinate (1-based)");
  prof->add_option("--range1", prof_r1, "axis 1 range lo:hi");
  prof->add_option("--range2", prof_r2, "axis 2 range lo:hi");
  prof->add_option("--resolution", prof_res, "grid points per axis");
  prof->add_option("--clip", prof_clip, "clip floor");
  prof->add_option("--out-dir", prof_out, "output directory")->required();

  // transform
  auto* tr = app.add_subcommand("transform", "emit the plateau-shifting transformed dataset");
  std::string tr_data, tr_params, tr_out, tr_sidecar;
  tr->add_option("--data", tr_data, "dataset CSV")->required();
  tr->add_option("--params", tr_params, "parameter point JSON")->required();
  tr->add_option("--out", tr_out, "output dataset CSV")->required();
  tr->add_option("--sidecar", tr_sidecar, "params sidecar path (default <out>.params.json)");

  // compare
  auto* cmp = app.add_subcommand("compare", "paired multistart on original vs transformed data");
  std::string cmp_data, cmp_params, cmp_config, cmp_out;
  int cmp_threads = 0;
  cmp->add_option("--data", cmp_data, "dataset CSV")->required();
  cmp->add_option("--params", cmp_params, "model parameter JSON (reference point)")->required();
  cmp->add_option("--config", cmp_config, "JSON config (seed mandatory)")->required();
  cmp->add_option("--out-dir", cmp_out, "output directory")->required();
  cmp->add_option("--threads", cmp_threads, "worker threads (or HETPROBIT_THREADS)");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "print the all-half-probabilities level -n ln 2");
  std::string bench_data;
  long bench_n = 0;
  bench->add_option("--data", bench_data, "dataset CSV");
  bench->add_option("--n", bench_n, "observation count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(sim_config, sim_out, sim_sidecar);
    if (*fit)
      return cmd_fit(fit_data, fit_method, fit_start, fit_box, fit_maxiter, fit_ftol, fit_gtol,
                     fit_seed, fit_temp, fit_scale, fit_budget, fit_trace, fit_out);
    if (*ms) return cmd_multistart(ms_data, ms_config, ms_out, ms_threads);
    if (*prof)
      return cmd_profile(prof_data, prof_params, prof_j1, prof_j2, prof_r1, prof_r2, prof_res,
                         prof_clip, prof_out);
    if (*tr) return cmd_transform(tr_data, tr_params, tr_out, tr_sidecar);
    if (*cmp) return cmd_compare(cmp_data, cmp_params, cmp_config, cmp_out, cmp_threads);
    if (*bench) return cmd_benchmark(bench_data, bench_n);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
