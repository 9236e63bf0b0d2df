#include "ndar/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ndar {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParameterError("cannot write " + path);
  out << text;
  if (!out) throw NumericError("short write to " + path);
}

std::uint64_t fnv1a(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t file_digest(const std::string& path) {
  const std::string text = read_text_file(path);
  return fnv1a(text.data(), text.size());
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(const std::string& s, double& out) {
  const char* c = s.c_str();
  char* end = nullptr;
  out = std::strtod(c, &end);
  return end != c && *end == '\0';
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

struct CsvTable {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;  // first row when it is not numeric
  int declared_n = -1;              // "# n = <count>" directive
};

CsvTable read_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first_content = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::size_t eq = t.find('=');
      if (eq != std::string::npos &&
          t.find('n') != std::string::npos && t.find('n') < eq) {
        double v;
        if (parse_double(trim(t.substr(eq + 1)), v))
          table.declared_n = static_cast<int>(v);
      }
      continue;
    }
    auto fields = split_csv(t);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k)
      if (!parse_double(fields[k], row[k])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (first_content) {
        table.header = fields;
        first_content = false;
        continue;
      }
      throw ParameterError("non-numeric value in " + path + ": " + t);
    }
    first_content = false;
    table.rows.push_back(std::move(row));
  }
  return table;
}

bool uniform_width(const CsvTable& t, std::size_t w) {
  for (const auto& r : t.rows)
    if (r.size() != w) return false;
  return true;
}

int as_node_id(double v, int limit, const char* what) {
  double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || r < 0 || r >= limit)
    throw ParameterError(std::string(what) + " out of range");
  return static_cast<int>(r);
}

}  // namespace

Network read_network(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.rows.empty()) throw ParameterError("no rows in " + path);
  const std::size_t nrows = table.rows.size();

  bool dense = table.header.empty() && uniform_width(table, nrows) && nrows >= 2;
  if (dense)
    for (const auto& r : table.rows)
      for (double v : r)
        if (v != 0.0 && v != 1.0) {
          dense = false;
          break;
        }

  using AdjMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
  if (dense) {
    const int n = static_cast<int>(nrows);
    AdjMat adj(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        adj(i, j) = table.rows[i][j] != 0.0 ? 1 : 0;
    return make_network(adj);
  }

  if (!uniform_width(table, 2))
    throw ParameterError(path + " is neither a square 0/1 matrix nor a two-column edge list");
  int n = table.declared_n;
  if (n < 0) {
    double top = 0;
    for (const auto& r : table.rows) top = std::max({top, r[0], r[1]});
    n = static_cast<int>(std::round(top)) + 1;
  }
  if (n < 2) throw ParameterError("edge list needs at least two nodes");
  AdjMat adj = AdjMat::Zero(n, n);
  for (const auto& r : table.rows) {
    int i = as_node_id(r[0], n, "edge source");
    int j = as_node_id(r[1], n, "edge target");
    if (i == j) throw ParameterError("self-loop in edge list");
    adj(i, j) = 1;
  }
  return make_network(adj);
}

void write_network_dense(const Network& net, const std::string& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(net.n) * (2 * net.n + 1));
  for (int i = 0; i < net.n; ++i) {
    for (int j = 0; j < net.n; ++j) {
      if (j) out += ',';
      out += net.adj(i, j) ? '1' : '0';
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_network_edges(const Network& net, const std::string& path) {
  std::string out = "# n = " + std::to_string(net.n) + "\nsrc,dst\n";
  for (int i = 0; i < net.n; ++i)
    for (int j : net.targets[static_cast<std::size_t>(i)])
      out += std::to_string(i) + "," + std::to_string(j) + "\n";
  write_text_file(path, out);
}

ordered_json network_summary(const Network& net) {
  auto degree_block = [](const Eigen::VectorXi& deg) {
    ordered_json block;
    block["min"] = deg.minCoeff();
    block["max"] = deg.maxCoeff();
    block["mean"] = deg.cast<double>().mean();
    ordered_json hist;
    for (const auto& [k, count] : degree_histogram(deg))
      hist[std::to_string(k)] = count;
    block["histogram"] = std::move(hist);
    return block;
  };
  ordered_json j;
  j["n"] = net.n;
  j["edges"] = net.out_degree.sum();
  j["density"] = density(net);
  j["repaired_nodes"] = net.repaired_nodes;
  j["out_degree"] = degree_block(net.out_degree);
  j["in_degree"] = degree_block(in_degrees(net));
  return j;
}

void write_panel(const Panel<double>& panel, const std::string& path) {
  panel.validate();
  const auto s = panel.stacked();
  std::string out;
  out.reserve(static_cast<std::size_t>(s.rows()) * s.cols() * 20);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (j) out += ',';
      out += format_double(s(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
  ordered_json meta;
  meta["m"] = panel.m();
  meta["n"] = panel.n();
  meta["rows"] = static_cast<int>(s.rows());
  write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

Panel<double> read_panel(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.rows.empty()) throw ParameterError("no rows in " + path);
  const std::size_t width = table.rows.front().size();
  if (!uniform_width(table, width))
    throw ParameterError("ragged rows in " + path);

  int m = 0;
  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    json meta = json::parse(meta_in);
    m = meta.value("m", 0);
    if (meta.contains("n") && meta["n"].get<int>() != static_cast<int>(width))
      throw ParameterError("panel column count disagrees with its sidecar");
    if (meta.contains("rows") &&
        meta["rows"].get<int>() != static_cast<int>(table.rows.size()))
      throw ParameterError("panel row count disagrees with its sidecar");
  }
  if (m < 0 || m >= static_cast<int>(table.rows.size()))
    throw ParameterError("presample row count out of range");

  Panel<double> panel;
  const int total = static_cast<int>(table.rows.size());
  const int n = static_cast<int>(width);
  Eigen::MatrixXd all(total, n);
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < n; ++j) all(i, j) = table.rows[i][j];
  panel.pre = all.topRows(m);
  panel.obs = all.bottomRows(total - m);
  panel.validate();
  return panel;
}

namespace {

std::vector<double> vec_to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd vec_from_json(const json& j, const char* key) {
  if (!j.contains(key)) return Eigen::VectorXd(0);
  auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ordered_json params_to_json(const NdarParams<double>& params) {
  ordered_json j;
  j["p"] = params.p();
  j["q"] = params.q();
  j["alpha"] = vec_to_std(params.alpha);
  j["beta"] = vec_to_std(params.beta);
  j["omega"] = params.omega;
  j["phi"] = vec_to_std(params.phi);
  j["psi"] = vec_to_std(params.psi);
  return j;
}

NdarParams<double> params_from_json(const json& j) {
  NdarParams<double> params;
  params.alpha = vec_from_json(j, "alpha");
  params.beta = vec_from_json(j, "beta");
  if (!j.contains("omega")) throw ParameterError("parameter file lacks omega");
  params.omega = j.at("omega").get<double>();
  params.phi = vec_from_json(j, "phi");
  params.psi = vec_from_json(j, "psi");
  if (j.contains("p") && j.at("p").get<int>() != params.p())
    throw ParameterError("declared p disagrees with the alpha length");
  if (j.contains("q") && j.at("q").get<int>() != params.q())
    throw ParameterError("declared q disagrees with the beta length");
  params.validate();
  return params;
}

NdarParams<double> read_params(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& ex) {
    throw ParameterError(path + ": " + ex.what());
  }
  try {
    return params_from_json(j);
  } catch (const json::exception& ex) {
    throw ParameterError(path + ": " + ex.what());
  }
}

void write_params(const NdarParams<double>& params, const std::string& path) {
  write_text_file(path, params_to_json(params).dump(2) + "\n");
}

ordered_json fit_to_json(const FitResult& fit, bool include_covariance) {
  ordered_json j;
  j["p"] = fit.p;
  j["q"] = fit.q;
  j["n"] = fit.n;
  j["t_len"] = fit.t_len;
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["grad_norm"] = fit.grad_norm;
  ordered_json coeffs = ordered_json::array();
  const bool have_inf = fit.std_errors.size() == fit.theta.size();
  for (int k = 0; k < fit.theta.size(); ++k) {
    ordered_json c;
    c["name"] = fit.names[static_cast<std::size_t>(k)];
    c["estimate"] = fit.theta[k];
    if (have_inf) {
      c["std_error"] = fit.std_errors[k];
      c["z"] = fit.z_values[k];
      c["p_value"] = fit.p_values[k];
    }
    coeffs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coeffs);
  if (have_inf) {
    j["d_hat"] = {{fit.d_hat(0, 0), fit.d_hat(0, 1)},
                  {fit.d_hat(1, 0), fit.d_hat(1, 1)}};
    if (include_covariance) {
      ordered_json cov = ordered_json::array();
      for (int r = 0; r < fit.covariance.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < fit.covariance.cols(); ++c)
          row.push_back(fit.covariance(r, c));
        cov.push_back(std::move(row));
      }
      j["covariance"] = std::move(cov);
    }
  }
  return j;
}

ordered_json selection_to_json(const SelectionResult& sel) {
  ordered_json j;
  j["r_max"] = sel.r_max;
  j["penalty"] = sel.penalty == PenaltyScale::log_t ? "log_t" : "log_nt";
  j["n"] = sel.n;
  j["t_len"] = sel.t_len;
  j["p"] = sel.p;
  j["q"] = sel.q;
  ordered_json cells = ordered_json::array();
  for (const SelectionCell& cell : sel.cells) {
    ordered_json c;
    c["p"] = cell.p;
    c["q"] = cell.q;
    c["valid"] = cell.valid;
    if (cell.valid) {
      c["loglik"] = cell.loglik;
      c["bic"] = cell.bic;
      c["converged"] = cell.converged;
    } else {
      c["note"] = cell.note;
    }
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  j["best"] = fit_to_json(sel.best, false);
  return j;
}

static ordered_json design_echo(const McReport& r) {
  ordered_json d;
  d["network_kind"] = r.network_kind;
  d["n"] = r.n;
  d["t_len"] = r.t_len;
  d["replications"] = r.replications;
  d["burn_in"] = r.burn_in;
  d["law"] = r.law;
  d["network_seed"] = r.network_seed;
  d["base_seed"] = r.base_seed;
  d["p"] = r.p;
  d["q"] = r.q;
  d["theta0"] = vec_to_std(r.theta0);
  return d;
}

ordered_json mc_report_to_json(const McReport& report) {
  ordered_json j;
  j["study"] = "qmle";
  j["design"] = design_echo(report);
  j["r_ok"] = report.r_ok;
  j["failures"] = report.failures;
  ordered_json coeffs = ordered_json::array();
  for (int k = 0; k < report.theta0.size(); ++k) {
    ordered_json c;
    c["name"] = report.names[static_cast<std::size_t>(k)];
    c["true"] = report.theta0[k];
    c["bias"] = report.bias[k];
    c["asd"] = report.asd[k];
    c["esd"] = report.esd[k];
    c["coverage"] = report.coverage[k];
    coeffs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coeffs);
  j["elapsed_seconds"] = report.elapsed_seconds;
  return j;
}

ordered_json bic_report_to_json(const BicReport& report) {
  ordered_json j;
  j["study"] = "bic";
  ordered_json d;
  d["network_kind"] = report.network_kind;
  d["n"] = report.n;
  d["t_len"] = report.t_len;
  d["replications"] = report.replications;
  d["burn_in"] = report.burn_in;
  d["r_max"] = report.r_max;
  d["law"] = report.law;
  d["penalty"] = report.penalty;
  d["network_seed"] = report.network_seed;
  d["base_seed"] = report.base_seed;
  d["p_true"] = report.p_true;
  d["q_true"] = report.q_true;
  j["design"] = std::move(d);
  j["r_ok"] = report.r_ok;
  j["failures"] = report.failures;
  j["counts"] = {{"lower", report.lower},
                 {"exact", report.exact},
                 {"higher", report.higher}};
  j["rates"] = {{"lower", report.rate_lower},
                {"exact", report.rate_exact},
                {"higher", report.rate_higher}};
  ordered_json chosen = ordered_json::array();
  for (const auto& [p, q] : report.chosen) chosen.push_back({p, q});
  j["chosen"] = std::move(chosen);
  j["elapsed_seconds"] = report.elapsed_seconds;
  return j;
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig cfg;
  cfg.kind = parse_network_kind(j.value("kind", std::string("uniform")));
  cfg.n = j.value("n", cfg.n);
  cfg.max_out_degree = j.value("max_out_degree", cfg.max_out_degree);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.n_blocks = j.value("n_blocks", cfg.n_blocks);
  cfg.p_within = j.value("p_within", cfg.p_within);
  cfg.p_between = j.value("p_between", cfg.p_between);
  return cfg;
}

McStudySpec read_mc_design(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& ex) {
    throw ParameterError(path + ": " + ex.what());
  }
  try {
    McStudySpec spec;
    const std::string study = j.value("study", std::string("qmle"));
    if (study == "bic")
      spec.bic = true;
    else if (study != "qmle")
      throw ParameterError("unknown study kind: " + study);
    if (j.contains("network")) {
      spec.design.network = network_config_from_json(j.at("network"));
      if (j.at("network").contains("seed"))
        spec.design.network_seed = j.at("network").at("seed").get<std::uint64_t>();
    }
    if (!j.contains("truth"))
      throw ParameterError("design lacks the true parameter block");
    spec.design.truth = params_from_json(j.at("truth"));
    const std::string law = j.value("law", std::string("normal"));
    if (law == "t5")
      spec.design.law = InnovationLaw::t5;
    else if (law != "normal")
      throw ParameterError("unknown innovation law: " + law);
    spec.design.t_len = j.value("t_len", spec.design.t_len);
    spec.design.replications = j.value("replications", spec.design.replications);
    spec.design.burn_in = j.value("burn_in", spec.design.burn_in);
    spec.design.network_seed = j.value("network_seed", spec.design.network_seed);
    spec.design.base_seed = j.value("base_seed", spec.design.base_seed);
    spec.design.threads = j.value("threads", spec.design.threads);
    if (j.contains("fit")) {
      const json& f = j.at("fit");
      spec.design.fit.max_iterations =
          f.value("max_iterations", spec.design.fit.max_iterations);
      spec.design.fit.grad_tol = f.value("grad_tol", spec.design.fit.grad_tol);
      spec.design.fit.multistart = f.value("multistart", spec.design.fit.multistart);
    }
    spec.r_max = j.value("r_max", spec.r_max);
    const std::string pen = j.value("penalty", std::string("log_t"));
    if (pen == "log_nt")
      spec.penalty = PenaltyScale::log_nt;
    else if (pen != "log_t")
      throw ParameterError("unknown penalty scale: " + pen);
    return spec;
  } catch (const json::exception& ex) {
    throw ParameterError(path + ": " + ex.what());
  }
}

}  // namespace ndar
