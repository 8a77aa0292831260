#pragma once

// File formats: dataset CSV (header `y,x1..xk1,z1..zk2`), parameter and
// result JSON, report JSON, histogram and profile-grid CSV. Doubles go to
// CSV with 17 significant digits so a read-back is bit-exact; JSON uses the
// serializer's shortest round-trip form, which is equally lossless.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hetprobit/dgp.hpp"
#include "hetprobit/harness.hpp"
#include "hetprobit/optimize.hpp"
#include "hetprobit/types.hpp"

namespace hetprobit::io {

using ordered_json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& tok, const std::string& path, long line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError(path + ":" + std::to_string(line_no) + ": not a number: '" + tok + "'");
  return v;
}

}  // namespace detail

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
  std::ostringstream out;
  out << "y";
  for (Eigen::Index j = 0; j < d.k1(); ++j) out << ",x" << (j + 1);
  for (Eigen::Index j = 0; j < d.k2(); ++j) out << ",z" << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out << (d.y[i] != 0.0 ? '1' : '0');
    for (Eigen::Index j = 0; j < d.k1(); ++j) out << ',' << format_double(d.X(i, j));
    for (Eigen::Index j = 0; j < d.k2(); ++j) out << ',' << format_double(d.Z(i, j));
    out << "\n";
  }
  write_text_file(path, out.str());
}

// Header names are positional and strict: y, then x1..xk1, then z1..zk2.
inline Dataset read_dataset_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  ++line_no;
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "y")
    throw IoError(path + ":1: header must start with column 'y'");
  std::size_t pos = 1;
  Eigen::Index k1 = 0, k2 = 0;
  while (pos < header.size() && header[pos] == "x" + std::to_string(k1 + 1)) {
    ++k1;
    ++pos;
  }
  while (pos < header.size() && header[pos] == "z" + std::to_string(k2 + 1)) {
    ++k2;
    ++pos;
  }
  if (pos != header.size())
    throw IoError(path + ":1: unexpected column '" + header[pos] + "' (want y,x1..xk1,z1..zk2)");
  if (k1 < 1) throw IoError(path + ":1: need at least one x column");

  std::vector<double> ys;
  std::vector<double> xs, zs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> tok = detail::split_csv_line(line);
    if (static_cast<Eigen::Index>(tok.size()) != 1 + k1 + k2)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(1 + k1 + k2) + " fields, got " + std::to_string(tok.size()));
    const double y = detail::parse_double(tok[0], path, line_no);
    if (y != 0.0 && y != 1.0)
      throw IoError(path + ":" + std::to_string(line_no) + ": y must be 0 or 1, got '" + tok[0] +
                    "'");
    ys.push_back(y);
    for (Eigen::Index j = 0; j < k1; ++j)
      xs.push_back(detail::parse_double(tok[1 + static_cast<std::size_t>(j)], path, line_no));
    for (Eigen::Index j = 0; j < k2; ++j)
      zs.push_back(
          detail::parse_double(tok[1 + static_cast<std::size_t>(k1 + j)], path, line_no));
  }
  const auto n = static_cast<Eigen::Index>(ys.size());
  if (n == 0) throw IoError(path + ": no data rows");

  Dataset d;
  d.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  d.X = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, k1);
  d.Z.resize(n, k2);
  if (k2 > 0)
    d.Z = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        zs.data(), n, k2);
  d.validate();
  return d;
}

inline ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vector_from_json(const ordered_json& a, const std::string& what) {
  if (!a.is_array()) throw IoError(what + ": expected an array of numbers");
  Eigen::VectorXd v(a.size());
  Eigen::Index i = 0;
  for (const auto& e : a) {
    if (!e.is_number()) throw IoError(what + ": expected an array of numbers");
    v[i++] = e.get<double>();
  }
  return v;
}

inline ordered_json params_json(const ParamVector& p) {
  return ordered_json{{"beta", vector_json(p.beta)}, {"gamma", vector_json(p.gamma)}};
}

// Accepts {"beta","gamma"} or a simulation sidecar's {"beta0","gamma0"}.
inline ParamVector params_from_json(const ordered_json& j, const std::string& what) {
  const char* bkey = j.contains("beta") ? "beta" : "beta0";
  const char* gkey = j.contains("gamma") ? "gamma" : "gamma0";
  if (!j.contains(bkey)) throw IoError(what + ": missing 'beta' (or 'beta0')");
  ParamVector p;
  p.beta = vector_from_json(j.at(bkey), what + ".beta");
  p.gamma = j.contains(gkey) ? vector_from_json(j.at(gkey), what + ".gamma")
                             : Eigen::VectorXd(0);
  return p;
}

inline ordered_json sim_sidecar_json(const SimulatedDataset& sim, const DgpConfig& cfg) {
  return ordered_json{
      {"kind", "simulation_params"},
      {"seed", cfg.seed},
      {"n", cfg.n},
      {"k1", cfg.k1},
      {"k2", cfg.k2},
      {"z_kind", cfg.z_kind == ZKind::BernoulliHalf ? "bernoulli_half" : "continuous_nonneg"},
      {"beta0", vector_json(sim.beta0)},
      {"gamma0", vector_json(sim.gamma0)},
      {"crossover", sim.crossover},
      {"resamples_used", sim.resamples_used},
  };
}

inline ordered_json sann_json(const SannSettings& s) {
  return ordered_json{{"initial_temp", s.initial_temp},
                      {"proposal_scale", s.proposal_scale},
                      {"eval_budget", s.eval_budget}};
}

inline ordered_json spec_json(const OptimizerSpec& s) {
  return ordered_json{{"method", to_string(s.method)}, {"max_iter", s.max_iter},
                      {"f_tol", s.f_tol},              {"g_tol", s.g_tol},
                      {"seed", s.seed},                {"sann", sann_json(s.sann)}};
}

inline ordered_json optim_result_json(Method method, const OptimResult& r) {
  ordered_json j{
      {"method", to_string(method)},
      {"point", vector_json(r.point)},
      {"value", r.value},
      {"iterations", r.iterations},
      {"evals", r.evals},
      {"grad_evals", r.grad_evals},
      {"terminated", to_string(r.terminated)},
      {"degenerate_point", r.degenerate_point},
  };
  if (!r.trace.empty()) {
    ordered_json t = ordered_json::array();
    for (const auto& [it, val] : r.trace) t.push_back(ordered_json::array({it, val}));
    j["trace"] = std::move(t);
  }
  return j;
}

inline ordered_json histogram_json(const LogHistogram& h) {
  ordered_json bins = ordered_json::array();
  for (const auto& [k, c] : h.bins)
    bins.push_back(ordered_json{
        {"index", k}, {"left", h.bin_left(k)}, {"right", h.bin_right(k)}, {"count", c}});
  return ordered_json{
      {"step", h.step}, {"better_than_reference", h.better_than_reference}, {"bins", bins}};
}

inline ordered_json quantiles_json(const Quantiles& q) {
  return ordered_json{
      {"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

inline ordered_json summary_json(const MethodSummary& s) {
  ordered_json sizes = ordered_json::array();
  for (long c : s.stability.cluster_sizes) sizes.push_back(c);
  return ordered_json{
      {"method", s.method},
      {"distance", quantiles_json(s.distance)},
      {"value_gap", quantiles_json(s.value_gap)},
      {"plateau_count", s.plateau_count},
      {"better_count", s.better_count},
      {"converged_count", s.converged_count},
      {"degenerate_count", s.degenerate_count},
      {"stability",
       ordered_json{{"cluster_count", s.stability.cluster_count},
                    {"cluster_sizes", sizes},
                    {"warning", s.stability.warning}}},
  };
}

inline ordered_json record_json(const RunRecord& r) {
  return ordered_json{
      {"start_index", r.start_index},
      {"start", vector_json(r.start.to_flat())},
      {"point", vector_json(r.result.point)},
      {"value", r.result.value},
      {"normalized", r.normalized},
      {"distance", r.distance},
      {"value_gap", r.value_gap},
      {"better_than_reference", r.better_than_reference},
      {"plateau", r.plateau},
      {"terminated", to_string(r.result.terminated)},
      {"iterations", r.result.iterations},
      {"evals", r.result.evals},
      {"grad_evals", r.result.grad_evals},
  };
}

inline ordered_json report_json(const MultiStartReport& r) {
  ordered_json starts = ordered_json::array();
  for (const auto& s : r.starts) starts.push_back(vector_json(s));
  ordered_json methods = ordered_json::array();
  for (const auto& m : r.methods) {
    ordered_json records = ordered_json::array();
    for (const auto& rec : m.records) records.push_back(record_json(rec));
    methods.push_back(ordered_json{
        {"method", to_string(m.spec.method)},
        {"spec", spec_json(m.spec)},
        {"records", std::move(records)},
        {"distance_hist", histogram_json(m.distance_hist)},
        {"value_gap_hist", histogram_json(m.value_gap_hist)},
        {"summary", summary_json(m.summary)},
    });
  }
  return ordered_json{
      {"kind", "multistart_report"},
      {"num_starts", r.num_starts},
      {"start_box", r.start_box},
      {"seed", r.seed},
      {"reference", params_json(r.reference)},
      {"reference_value", r.reference_value},
      {"normalized_reference", r.normalized_reference},
      {"starts", std::move(starts)},
      {"methods", std::move(methods)},
  };
}

inline std::string histogram_csv(const LogHistogram& h) {
  std::ostringstream out;
  out << "bin_left,bin_right,count\n";
  for (const auto& [k, c] : h.bins)
    out << format_double(h.bin_left(k)) << ',' << format_double(h.bin_right(k)) << ',' << c
        << "\n";
  out << "better_than_reference,," << h.better_than_reference << "\n";
  return out.str();
}

// Values matrix, axis1 down the rows, axis2 across the columns.
inline std::string profile_values_csv(const ProfileGrid& g) {
  std::ostringstream out;
  out << "gamma" << (g.j1 + 1) << "\\gamma" << (g.j2 + 1);
  for (Eigen::Index b = 0; b < g.axis2.size(); ++b) out << ',' << format_double(g.axis2[b]);
  out << "\n";
  for (Eigen::Index a = 0; a < g.axis1.size(); ++a) {
    out << format_double(g.axis1[a]);
    for (Eigen::Index b = 0; b < g.axis2.size(); ++b) out << ',' << format_double(g.values(a, b));
    out << "\n";
  }
  return out.str();
}

inline std::string profile_mask_csv(const ProfileGrid& g) {
  std::ostringstream out;
  out << "clipped\n";
  for (Eigen::Index a = 0; a < g.axis1.size(); ++a) {
    for (Eigen::Index b = 0; b < g.axis2.size(); ++b)
      out << (g.clipped(a, b) ? '1' : '0') << (b + 1 < g.axis2.size() ? "," : "");
    out << "\n";
  }
  return out.str();
}

inline Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> profile_mask_from_csv(
    const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw IoError("mask csv: empty");
  std::vector<std::vector<bool>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<bool> row;
    for (const auto& tok : detail::split_csv_line(line)) row.push_back(tok == "1");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("mask csv: no rows");
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> m(rows.size(), rows[0].size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != rows[0].size()) throw IoError("mask csv: ragged rows");
    for (std::size_t b = 0; b < rows[a].size(); ++b)
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rows[a][b];
  }
  return m;
}

inline Method method_from_string(const std::string& s) {
  if (s == "bfgs") return Method::BFGS;
  if (s == "cg") return Method::CG;
  if (s == "neldermead" || s == "nelder-mead" || s == "nm") return Method::NelderMead;
  if (s == "sann") return Method::SANN;
  throw IoError("unknown method '" + s + "' (want bfgs|cg|neldermead|sann)");
}

}  // namespace hetprobit::io
