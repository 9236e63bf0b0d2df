#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <string>

#include "ndar/io.hpp"

using ndar::NdarParams;
using ndar::Network;
using ndar::Panel;
using ndar::Rng;

namespace {

namespace fs = std::filesystem;

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("ndar_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& leaf) const {
    return (dir / leaf).string();
  }
};

Network ring(int n) {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj(n, n);
  adj.setZero();
  for (int i = 0; i < n; ++i) adj(i, (i + 1) % n) = 1;
  return ndar::make_network(adj);
}

}  // namespace

TEST_CASE("fnv-1a matches the published test vectors") {
  CHECK(ndar::fnv1a("", 0) == 14695981039346656037ULL);
  CHECK(ndar::fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(ndar::fnv1a("foobar", 6) == 0x85944171f73967e8ULL);
}

TEST_CASE("text files round trip and digests track content") {
  Scratch tmp("text");
  const std::string path = tmp / "blob.txt";
  const std::string body = "line one\nline two\n";
  ndar::write_text_file(path, body);
  CHECK(ndar::read_text_file(path) == body);
  CHECK(ndar::file_digest(path) == ndar::fnv1a(body.data(), body.size()));
  CHECK_THROWS_AS(ndar::read_text_file(tmp / "absent.txt"),
                  ndar::ParameterError);
}

TEST_CASE("dense adjacency round trips byte for byte") {
  Scratch tmp("dense");
  Network net = ring(5);
  const std::string path = tmp / "net.csv";
  ndar::write_network_dense(net, path);
  Network again = ndar::read_network(path);
  CHECK(again.n == 5);
  CHECK((again.adj.array() == net.adj.array()).all());

  ndar::write_network_dense(again, tmp / "net2.csv");
  CHECK(ndar::read_text_file(path) == ndar::read_text_file(tmp / "net2.csv"));
}

TEST_CASE("edge lists round trip through the declared node count") {
  Scratch tmp("edges");
  Network net = ring(4);
  const std::string path = tmp / "net.edges";
  ndar::write_network_edges(net, path);

  const std::string text = ndar::read_text_file(path);
  CHECK(text.rfind("# n = 4\nsrc,dst\n", 0) == 0);

  Network again = ndar::read_network(path);
  CHECK(again.n == 4);
  CHECK((again.adj.array() == net.adj.array()).all());
}

TEST_CASE("edge lists without a directive infer the node count") {
  Scratch tmp("infer");
  const std::string path = tmp / "tri.csv";
  ndar::write_text_file(path, "0,1\n1,2\n2,0\n");
  Network net = ndar::read_network(path);
  CHECK(net.n == 3);
  CHECK(net.out_degree.sum() == 3);

  // a header alone is enough to force the edge interpretation
  const std::string two = tmp / "two.csv";
  ndar::write_text_file(two, "src,dst\n0,1\n1,0\n");
  Network pair = ndar::read_network(two);
  CHECK(pair.n == 2);
  CHECK(pair.adj(0, 1) == 1);
  CHECK(pair.adj(1, 0) == 1);
}

TEST_CASE("square 0/1 blocks read as dense adjacency") {
  Scratch tmp("sniff");
  const std::string path = tmp / "dense2.csv";
  ndar::write_text_file(path, "0,1\n1,0\n");
  Network net = ndar::read_network(path);
  CHECK(net.n == 2);
  CHECK(net.adj(0, 1) == 1);
  CHECK(net.adj(1, 0) == 1);
  CHECK(net.adj(0, 0) == 0);
}

TEST_CASE("malformed network files are rejected") {
  Scratch tmp("badnet");
  const std::string self = tmp / "self.csv";
  ndar::write_text_file(self, "# n = 3\nsrc,dst\n0,0\n1,2\n");
  CHECK_THROWS_AS(ndar::read_network(self), ndar::ParameterError);

  const std::string oob = tmp / "oob.csv";
  ndar::write_text_file(oob, "# n = 2\nsrc,dst\n0,1\n1,5\n");
  CHECK_THROWS_AS(ndar::read_network(oob), ndar::ParameterError);

  const std::string ragged = tmp / "ragged.csv";
  ndar::write_text_file(ragged, "0,1,0\n1,0\n");
  CHECK_THROWS_AS(ndar::read_network(ragged), ndar::ParameterError);

  const std::string empty = tmp / "empty.csv";
  ndar::write_text_file(empty, "\n\n");
  CHECK_THROWS_AS(ndar::read_network(empty), ndar::ParameterError);
}

TEST_CASE("panel files round trip bit for bit") {
  Scratch tmp("panel");
  Rng rng(7);
  Panel<double> panel;
  panel.pre.resize(2, 3);
  panel.obs.resize(5, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) panel.pre(i, j) = rng.normal();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) panel.obs(i, j) = rng.normal() * 1e-7;

  const std::string path = tmp / "panel.csv";
  ndar::write_panel(panel, path);
  Panel<double> again = ndar::read_panel(path);
  CHECK(again.m() == 2);
  CHECK(again.t_len() == 5);
  CHECK((again.pre.array() == panel.pre.array()).all());
  CHECK((again.obs.array() == panel.obs.array()).all());

  // rewriting the reread panel reproduces the files exactly
  ndar::write_panel(again, tmp / "panel2.csv");
  CHECK(ndar::read_text_file(path) == ndar::read_text_file(tmp / "panel2.csv"));
  CHECK(ndar::read_text_file(path + ".meta.json") ==
        ndar::read_text_file(tmp / "panel2.csv" + std::string(".meta.json")));
}

TEST_CASE("a panel without its sidecar is all observation") {
  Scratch tmp("nosidecar");
  Panel<double> panel;
  panel.pre = Eigen::MatrixXd::Ones(1, 2);
  panel.obs = Eigen::MatrixXd::Zero(4, 2);
  const std::string path = tmp / "panel.csv";
  ndar::write_panel(panel, path);
  std::filesystem::remove(path + ".meta.json");
  Panel<double> again = ndar::read_panel(path);
  CHECK(again.m() == 0);
  CHECK(again.t_len() == 5);
}

TEST_CASE("sidecar disagreements are rejected") {
  Scratch tmp("sidecar");
  Panel<double> panel;
  panel.obs = Eigen::MatrixXd::Zero(4, 2);
  const std::string path = tmp / "panel.csv";
  ndar::write_panel(panel, path);
  ndar::write_text_file(path + ".meta.json",
                        "{\"m\": 0, \"n\": 3, \"rows\": 4}\n");
  CHECK_THROWS_AS(ndar::read_panel(path), ndar::ParameterError);
  ndar::write_text_file(path + ".meta.json",
                        "{\"m\": 9, \"n\": 2, \"rows\": 4}\n");
  CHECK_THROWS_AS(ndar::read_panel(path), ndar::ParameterError);
}

TEST_CASE("parameter files round trip exactly") {
  Scratch tmp("params");
  NdarParams<double> th;
  th.alpha = Eigen::VectorXd::Constant(2, 0.1);
  th.alpha[1] = -0.044;
  th.beta = Eigen::VectorXd::Constant(1, 0.2);
  th.omega = 0.015;
  th.phi = Eigen::VectorXd::Constant(2, 0.3);
  th.psi = Eigen::VectorXd::Constant(1, 0.12345678901234567);

  const std::string path = tmp / "params.json";
  ndar::write_params(th, path);
  NdarParams<double> again = ndar::read_params(path);
  CHECK(again.p() == 2);
  CHECK(again.q() == 1);
  CHECK((again.alpha.array() == th.alpha.array()).all());
  CHECK((again.beta.array() == th.beta.array()).all());
  CHECK(again.omega == th.omega);
  CHECK((again.phi.array() == th.phi.array()).all());
  CHECK((again.psi.array() == th.psi.array()).all());

  auto j = ndar::params_to_json(th);
  CHECK(j["p"] == 2);
  CHECK(j["q"] == 1);
}

TEST_CASE("white-noise parameter files carry empty lag blocks") {
  Scratch tmp("wnparams");
  NdarParams<double> th;
  th.omega = 2.5;
  const std::string path = tmp / "wn.json";
  ndar::write_params(th, path);
  NdarParams<double> again = ndar::read_params(path);
  CHECK(again.p() == 0);
  CHECK(again.q() == 0);
  CHECK(again.omega == 2.5);
}

TEST_CASE("parameter schema violations are rejected") {
  Scratch tmp("badparams");
  auto write_and_expect_throw = [&](const char* leaf, const std::string& body) {
    const std::string path = tmp / leaf;
    ndar::write_text_file(path, body);
    CHECK_THROWS_AS(ndar::read_params(path), ndar::ParameterError);
  };
  write_and_expect_throw("noomega.json", "{\"alpha\": [0.1], \"phi\": [0.1]}");
  write_and_expect_throw("declared.json",
                         "{\"p\": 2, \"alpha\": [0.1], \"beta\": [], "
                         "\"omega\": 1.0, \"phi\": [0.1], \"psi\": []}");
  write_and_expect_throw("negphi.json",
                         "{\"alpha\": [0.1], \"beta\": [], \"omega\": 1.0, "
                         "\"phi\": [-0.1], \"psi\": []}");
  write_and_expect_throw("lengths.json",
                         "{\"alpha\": [0.1], \"beta\": [], \"omega\": 1.0, "
                         "\"phi\": [0.1, 0.2], \"psi\": []}");
  write_and_expect_throw("syntax.json", "{not json");
  write_and_expect_throw("types.json",
                         "{\"alpha\": \"x\", \"beta\": [], \"omega\": 1.0, "
                         "\"phi\": [0.1], \"psi\": []}");
}

TEST_CASE("network summary reports the degree structure") {
  auto j = ndar::network_summary(ring(5));
  CHECK(j["n"] == 5);
  CHECK(j["edges"] == 5);
  CHECK(j["density"].get<double>() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(j["repaired_nodes"] == 0);
  CHECK(j["out_degree"]["min"] == 1);
  CHECK(j["out_degree"]["max"] == 1);
  CHECK(j["out_degree"]["histogram"]["1"] == 5);
  CHECK(j["in_degree"]["mean"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("fit views include inference only when it was computed") {
  ndar::FitResult fr;
  fr.p = 0;
  fr.q = 0;
  fr.n = 4;
  fr.t_len = 10;
  fr.names = {"omega"};
  fr.theta = Eigen::VectorXd::Constant(1, 0.5);
  fr.loglik = -12.5;
  fr.converged = true;

  auto bare = ndar::fit_to_json(fr);
  CHECK(bare["coefficients"][0]["name"] == "omega");
  CHECK(bare["coefficients"][0]["estimate"] == 0.5);
  CHECK(!bare["coefficients"][0].contains("std_error"));
  CHECK(!bare.contains("covariance"));

  fr.std_errors = Eigen::VectorXd::Constant(1, 0.1);
  fr.z_values = Eigen::VectorXd::Constant(1, 5.0);
  fr.p_values = Eigen::VectorXd::Constant(1, 1e-7);
  fr.covariance = Eigen::MatrixXd::Constant(1, 1, 0.01);
  auto full = ndar::fit_to_json(fr);
  CHECK(full["coefficients"][0]["std_error"] == 0.1);
  CHECK(full["covariance"][0][0] == 0.01);
  auto no_cov = ndar::fit_to_json(fr, false);
  CHECK(!no_cov.contains("covariance"));
  CHECK(no_cov["d_hat"][0][0] == 1.0);
}

TEST_CASE("study descriptions parse with defaults and overrides") {
  Scratch tmp("design");
  const std::string path = tmp / "design.json";
  ndar::write_text_file(path, R"({
    "study": "bic",
    "network": {"kind": "powerlaw", "n": 30, "max_out_degree": 4,
                "gamma": 2.1, "seed": 9},
    "truth": {"alpha": [0.1], "beta": [0.2], "omega": 0.1,
              "phi": [0.15], "psi": [0.1]},
    "law": "t5",
    "t_len": 120,
    "replications": 7,
    "burn_in": 250,
    "base_seed": 4242,
    "threads": 2,
    "fit": {"max_iterations": 150, "multistart": 2},
    "r_max": 2,
    "penalty": "log_nt"
  })");

  ndar::McStudySpec spec = ndar::read_mc_design(path);
  CHECK(spec.bic);
  CHECK(spec.design.network.kind == ndar::NetworkConfig::Kind::power_law);
  CHECK(spec.design.network.n == 30);
  CHECK(spec.design.network.gamma == 2.1);
  CHECK(spec.design.network_seed == 9);
  CHECK(spec.design.truth.p() == 1);
  CHECK(spec.design.law == ndar::InnovationLaw::t5);
  CHECK(spec.design.t_len == 120);
  CHECK(spec.design.replications == 7);
  CHECK(spec.design.burn_in == 250);
  CHECK(spec.design.base_seed == 4242);
  CHECK(spec.design.threads == 2);
  CHECK(spec.design.fit.max_iterations == 150);
  CHECK(spec.design.fit.multistart == 2);
  CHECK(spec.r_max == 2);
  CHECK(spec.penalty == ndar::PenaltyScale::log_nt);

  // minimal: only the truth block is mandatory
  const std::string minimal = tmp / "minimal.json";
  ndar::write_text_file(minimal, R"({"truth": {"omega": 1.0}})");
  ndar::McStudySpec m = ndar::read_mc_design(minimal);
  CHECK(!m.bic);
  CHECK(m.design.truth.p() == 0);
  CHECK(m.design.network.kind == ndar::NetworkConfig::Kind::uniform);

  const std::string bad_study = tmp / "bad1.json";
  ndar::write_text_file(bad_study, R"({"study": "zzz", "truth": {"omega": 1}})");
  CHECK_THROWS_AS(ndar::read_mc_design(bad_study), ndar::ParameterError);

  const std::string no_truth = tmp / "bad2.json";
  ndar::write_text_file(no_truth, R"({"study": "qmle"})");
  CHECK_THROWS_AS(ndar::read_mc_design(no_truth), ndar::ParameterError);

  const std::string bad_law = tmp / "bad3.json";
  ndar::write_text_file(bad_law,
                        R"({"truth": {"omega": 1}, "law": "cauchy"})");
  CHECK_THROWS_AS(ndar::read_mc_design(bad_law), ndar::ParameterError);
}

TEST_CASE("selection views carry the grid and the refit") {
  ndar::NetworkConfig ncfg;
  ncfg.n = 6;
  ncfg.max_out_degree = 3;
  Network net = ncfg.generate(3);
  NdarParams<double> th;
  th.alpha = Eigen::VectorXd::Constant(1, 0.1);
  th.beta = Eigen::VectorXd::Constant(1, 0.2);
  th.omega = 0.2;
  th.phi = Eigen::VectorXd::Constant(1, 0.1);
  th.psi = Eigen::VectorXd::Constant(1, 0.1);
  auto panel = ndar::simulate(net, th, ndar::InnovationLaw::normal, 60, 120, 5);

  ndar::SelectConfig cfg;
  cfg.r_max = 1;
  auto res = ndar::select_order(net, panel, cfg);
  auto j = ndar::selection_to_json(res);
  CHECK(j["r_max"] == 1);
  CHECK(j["penalty"] == "log_t");
  CHECK(j["cells"].size() == 4);
  CHECK(j["best"]["p"] == res.p);
  CHECK(j["cells"][0].contains("bic"));
}
