#include <CLI11.hpp>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ndar/io.hpp"
#include "ndar/stationarity.hpp"
#include "ndar/version.hpp"

namespace {

using ndar::FitConfig;
using ndar::InnovationLaw;
using ndar::Network;
using ndar::NetworkConfig;
using ndar::Panel;
using ndar::PenaltyScale;

InnovationLaw parse_law(const std::string& s) {
  if (s == "normal") return InnovationLaw::normal;
  if (s == "t5") return InnovationLaw::t5;
  throw ndar::ParameterError("unknown innovation law: " + s);
}

std::string hex_digest(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Provenance block attached to every JSON output: tool version, the seed a
// randomized command ran with, and digests of the input files.
nlohmann::ordered_json meta_block(
    const std::vector<std::pair<std::string, std::string>>& inputs,
    std::optional<std::uint64_t> seed = std::nullopt) {
  nlohmann::ordered_json meta;
  meta["version"] = ndar::version;
  if (seed) meta["seed"] = *seed;
  if (!inputs.empty()) {
    nlohmann::ordered_json files;
    for (const auto& [name, path] : inputs)
      files[name] = hex_digest(ndar::file_digest(path));
    meta["inputs"] = std::move(files);
  }
  return meta;
}

void emit(const nlohmann::ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    ndar::write_text_file(out_path, text);
}

// Ensures at least `depth` presample rows, moving leading observations over
// when the stored split is too shallow.
Panel<double> ensure_depth(Panel<double> panel, int depth) {
  if (panel.m() >= depth) return panel;
  std::cerr << "note: moved " << depth - panel.m()
            << " leading observation rows into the presample\n";
  return panel.with_presample_depth(depth);
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_p(double p) {
  if (p < 0.001) return "<.001";
  return fmt(p, "%.3f");
}

// Coefficient table in the estimate(SE) / p-value layout.
void print_fit_table(const ndar::FitResult& fr) {
  std::printf("%-10s %-18s %s\n", "parameter", "estimate(SE)", "p-value");
  for (int k = 0; k < fr.theta.size(); ++k) {
    const std::string est =
        fmt(fr.theta[k]) + "(" + fmt(fr.std_errors[k]) + ")";
    std::printf("%-10s %-18s %s\n", fr.names[static_cast<std::size_t>(k)].c_str(),
                est.c_str(), fmt_p(fr.p_values[k]).c_str());
  }
  std::printf("loglik %.6f  converged %s  iterations %d\n", fr.loglik,
              fr.converged ? "yes" : "no", fr.iterations);
}

void print_mc_table(const ndar::McReport& r) {
  std::printf("%s network, n=%d, T=%d, %s innovations, R=%d (ok %d, failed %d)\n",
              r.network_kind.c_str(), r.n, r.t_len, r.law.c_str(),
              r.replications, r.r_ok, r.failures);
  std::printf("%-10s %12s %10s %10s %6s\n", "parameter", "Bias(x1e3)",
              "ASD(x1e2)", "ESD(x1e2)", "CP");
  for (int k = 0; k < r.theta0.size(); ++k)
    std::printf("%-10s %12s %10s %10s %6s\n",
                r.names[static_cast<std::size_t>(k)].c_str(),
                fmt(r.bias[k] * 1e3, "%.2f").c_str(),
                fmt(r.asd[k] * 1e2, "%.2f").c_str(),
                fmt(r.esd[k] * 1e2, "%.2f").c_str(),
                fmt(r.coverage[k], "%.2f").c_str());
}

void print_bic_table(const ndar::BicReport& r) {
  std::printf("%s network, n=%d, T=%d, %s innovations, r_max=%d, R=%d (ok %d, failed %d)\n",
              r.network_kind.c_str(), r.n, r.t_len, r.law.c_str(), r.r_max,
              r.replications, r.r_ok, r.failures);
  std::printf("%-8s %-8s %-8s\n", "lower", "exact", "higher");
  std::printf("%-8d %-8d %-8d\n", r.lower, r.exact, r.higher);
  std::printf("%-8s %-8s %-8s\n", fmt(r.rate_lower, "%.3f").c_str(),
              fmt(r.rate_exact, "%.3f").c_str(),
              fmt(r.rate_higher, "%.3f").c_str());
}

std::string selection_grid_csv(const ndar::SelectionResult& sr) {
  std::string out = "p,q,loglik,bic,converged\n";
  for (const auto& cell : sr.cells) {
    out += std::to_string(cell.p) + "," + std::to_string(cell.q) + ",";
    if (cell.valid) {
      out += fmt(cell.loglik, "%.17g") + "," + fmt(cell.bic, "%.17g") + "," +
             (cell.converged ? "1" : "0");
    } else {
      out += "nan,nan,0";
    }
    out += "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"network vector autoregression with lagged volatility terms"};
  app.set_version_flag("--version", ndar::version);
  app.require_subcommand(1);
  std::function<void()> run;

  // gen-network
  auto* gen = app.add_subcommand("gen-network", "draw a random network");
  NetworkConfig net_cfg;
  std::string gen_kind = "uniform", gen_out, gen_format = "edges";
  std::uint64_t gen_seed = 1;
  gen->add_option("--kind", gen_kind, "uniform, powerlaw, or sbm");
  gen->add_option("--n", net_cfg.n, "node count");
  gen->add_option("--max-deg", net_cfg.max_out_degree,
                  "largest out-degree (uniform, powerlaw)");
  gen->add_option("--gamma", net_cfg.gamma, "power-law exponent");
  gen->add_option("--blocks", net_cfg.n_blocks,
                  "block count (sbm; nonpositive: n/10)");
  gen->add_option("--p-within", net_cfg.p_within,
                  "within-block edge probability (negative: 28/n)");
  gen->add_option("--p-between", net_cfg.p_between,
                  "between-block edge probability (negative: 0.01/n)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "adjacency output file")->required();
  gen->add_option("--format", gen_format, "edges (csv) or dense");
  gen->callback([&] {
    run = [&] {
      net_cfg.kind = ndar::parse_network_kind(gen_kind);
      Network net = net_cfg.generate(gen_seed);
      if (gen_format == "edges" || gen_format == "csv")
        ndar::write_network_edges(net, gen_out);
      else if (gen_format == "dense")
        ndar::write_network_dense(net, gen_out);
      else
        throw ndar::ParameterError("unknown network format: " + gen_format);
      nlohmann::ordered_json j = ndar::network_summary(net);
      j["kind"] = ndar::network_kind_name(net_cfg.kind);
      j["meta"] = meta_block({}, gen_seed);
      emit(j, "");
    };
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a panel from the model");
  std::string sim_net, sim_params, sim_law = "normal", sim_out;
  int sim_t = 100, sim_burn = 500, sim_pre = -1;
  std::uint64_t sim_seed = 1;
  sim->add_option("--network", sim_net, "adjacency file")->required();
  sim->add_option("--params", sim_params, "parameter JSON")->required();
  sim->add_option("--law", sim_law, "innovation law: normal or t5");
  sim->add_option("--t-len", sim_t, "observation rows");
  sim->add_option("--burn-in", sim_burn, "warm-up steps dropped");
  sim->add_option("--presample-rows", sim_pre,
                  "presample rows kept ahead of the sample (default: max lag)");
  sim->add_option("--seed", sim_seed, "simulation seed");
  sim->add_option("--out", sim_out, "panel output file")->required();
  sim->callback([&] {
    run = [&] {
      Network net = ndar::read_network(sim_net);
      auto params = ndar::read_params(sim_params);
      InnovationLaw law = parse_law(sim_law);
      Panel<double> panel =
          ndar::simulate(net, params, law, sim_t, sim_burn, sim_seed, sim_pre);
      ndar::write_panel(panel, sim_out);
      nlohmann::ordered_json j;
      j["n"] = panel.n();
      j["t_len"] = panel.t_len();
      j["presample_rows"] = panel.m();
      j["stationarity_margin"] = ndar::stationarity_margin(net, params, law);
      j["meta"] = meta_block({{"network", sim_net}, {"params", sim_params}},
                             sim_seed);
      emit(j, "");
    };
  });

  // fit
  auto* fitcmd = app.add_subcommand("fit", "estimate fixed lag orders");
  std::string fit_net, fit_panel, fit_out, fit_format = "table";
  int fit_p = 1, fit_q = 1, fit_pre = -1;
  FitConfig fit_cfg;
  fitcmd->add_option("--network", fit_net, "adjacency file")->required();
  fitcmd->add_option("--panel", fit_panel, "panel CSV")->required();
  fitcmd->add_option("--p", fit_p, "network lag order");
  fitcmd->add_option("--q", fit_q, "own lag order");
  fitcmd->add_option("--presample-rows", fit_pre,
                     "override the panel's stored presample split");
  fitcmd->add_option("--max-iterations", fit_cfg.max_iterations);
  fitcmd->add_option("--multistart", fit_cfg.multistart,
                     "extra deterministic starting points");
  fitcmd->add_option("--format", fit_format, "stdout format: table or json");
  fitcmd->add_option("--out", fit_out, "write the fit JSON here");
  fitcmd->callback([&] {
    run = [&] {
      if (fit_format != "table" && fit_format != "json")
        throw ndar::ParameterError("unknown format: " + fit_format);
      Network net = ndar::read_network(fit_net);
      Panel<double> panel = ndar::read_panel(fit_panel);
      if (fit_pre >= 0) panel = panel.with_presample_depth(fit_pre);
      panel = ensure_depth(std::move(panel), std::max(fit_p, fit_q));
      auto fr = ndar::fit(net, panel, fit_p, fit_q, fit_cfg);
      nlohmann::ordered_json j = ndar::fit_to_json(fr);
      j["meta"] = meta_block({{"network", fit_net}, {"panel", fit_panel}});
      if (!fit_out.empty()) emit(j, fit_out);
      if (fit_format == "json")
        emit(j, "");
      else
        print_fit_table(fr);
    };
  });

  // select
  auto* sel = app.add_subcommand("select", "choose lag orders on a grid");
  std::string sel_net, sel_panel, sel_out, sel_pen = "lnT";
  int sel_pre = -1;
  ndar::SelectConfig sel_cfg;
  sel->add_option("--network", sel_net, "adjacency file")->required();
  sel->add_option("--panel", sel_panel, "panel CSV")->required();
  sel->add_option("--rmax", sel_cfg.r_max, "largest lag order tried");
  sel->add_option("--penalty-scale", sel_pen, "criterion penalty: lnT or lnNT");
  sel->add_option("--presample-rows", sel_pre,
                  "override the panel's stored presample split");
  sel->add_option("--out", sel_out, "write the selection JSON here");
  sel->callback([&] {
    run = [&] {
      if (sel_pen == "lnT" || sel_pen == "log_t")
        sel_cfg.penalty = PenaltyScale::log_t;
      else if (sel_pen == "lnNT" || sel_pen == "log_nt")
        sel_cfg.penalty = PenaltyScale::log_nt;
      else
        throw ndar::ParameterError("unknown penalty scale: " + sel_pen);
      Network net = ndar::read_network(sel_net);
      Panel<double> panel = ndar::read_panel(sel_panel);
      if (sel_pre >= 0) panel = panel.with_presample_depth(sel_pre);
      auto sr = ndar::select_order(net, panel, sel_cfg);
      std::cout << selection_grid_csv(sr);
      nlohmann::ordered_json j = ndar::selection_to_json(sr);
      j["meta"] = meta_block({{"network", sel_net}, {"panel", sel_panel}});
      if (!sel_out.empty())
        emit(j, sel_out);
      else
        std::cout << "\n" << j.dump(2) << "\n";
    };
  });

  // mc
  auto* mc = app.add_subcommand("mc", "replicated simulation studies");
  std::string mc_design, mc_out;
  int mc_threads = 0;
  mc->add_option("--design", mc_design, "study description JSON")->required();
  auto* mc_threads_opt =
      mc->add_option("--threads", mc_threads, "worker threads");
  mc->add_option("--out", mc_out, "write the report JSON here");
  mc->callback([&] {
    run = [&] {
      ndar::McStudySpec spec = ndar::read_mc_design(mc_design);
      if (mc_threads_opt->count()) spec.design.threads = mc_threads;
      nlohmann::ordered_json j;
      if (spec.bic) {
        ndar::BicDesign bd{spec.design, spec.r_max, spec.penalty};
        auto rpt = ndar::run_bic_study(bd);
        print_bic_table(rpt);
        j = ndar::bic_report_to_json(rpt);
      } else {
        auto rpt = ndar::run_qmle_study(spec.design);
        print_mc_table(rpt);
        j = ndar::mc_report_to_json(rpt);
      }
      j["meta"] = meta_block({{"design", mc_design}});
      if (!mc_out.empty()) emit(j, mc_out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    run();
  } catch (const ndar::ParameterError& e) {
    std::cerr << "error: parameter: " << e.what() << "\n";
    return 2;
  } catch (const ndar::DivergenceError& e) {
    std::cerr << "error: divergence: " << e.what() << "\n";
    return 1;
  } catch (const ndar::SingularInformationError& e) {
    std::cerr << "error: singular_information: " << e.what() << "\n";
    return 1;
  } catch (const ndar::DegenerateInferenceError& e) {
    std::cerr << "error: degenerate_inference: " << e.what() << "\n";
    return 1;
  } catch (const ndar::SelectionError& e) {
    std::cerr << "error: selection: " << e.what() << "\n";
    return 1;
  } catch (const ndar::NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
