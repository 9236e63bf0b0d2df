#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ndar/simulate.hpp"
#include "ndar/stationarity.hpp"

using namespace ndar;
using AdjMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

namespace {

NdarParams<double> dgp1() {
  NdarParams<double> th;
  th.alpha.resize(1);
  th.beta.resize(1);
  th.phi.resize(1);
  th.psi.resize(1);
  th.alpha << 0.05;
  th.beta << -0.1;
  th.omega = 0.05;
  th.phi << 0.05;
  th.psi << 0.1;
  return th;
}

Network two_ring() {
  AdjMat a = AdjMat::Zero(2, 2);
  a(0, 1) = 1;
  a(1, 0) = 1;
  return make_network(a);
}

}  // namespace

TEST_CASE("pack and unpack round trip") {
  NdarParams<double> th;
  th.alpha.resize(2);
  th.alpha << 0.1, -0.2;
  th.beta.resize(1);
  th.beta << 0.3;
  th.omega = 1.5;
  th.phi.resize(2);
  th.phi << 0.4, 0.5;
  th.psi.resize(1);
  th.psi << 0.6;
  Eigen::VectorXd theta = th.pack();
  REQUIRE(theta.size() == 7);
  CHECK(theta[0] == 0.1);
  CHECK(theta[1] == -0.2);
  CHECK(theta[2] == 0.3);
  CHECK(theta[3] == 1.5);
  CHECK(theta[4] == 0.4);
  CHECK(theta[5] == 0.5);
  CHECK(theta[6] == 0.6);
  auto back = NdarParams<double>::unpack(2, 1, theta);
  CHECK((back.pack().array() == theta.array()).all());

  CHECK_THROWS_AS(NdarParams<double>::unpack(1, 1, theta), ParameterError);
}

TEST_CASE("parameter validation") {
  auto th = dgp1();
  CHECK_NOTHROW(th.validate());
  th.omega = 0.0;
  CHECK_THROWS_AS(th.validate(), ParameterError);
  th = dgp1();
  th.phi[0] = -0.01;
  CHECK_THROWS_AS(th.validate(), ParameterError);
  th = dgp1();
  th.phi.resize(2);
  CHECK_THROWS_AS(th.validate(), ParameterError);
}

TEST_CASE("embedding preserves the coefficients and pads with zeros") {
  auto th = dgp1();
  auto big = th.embedded(2, 3);
  CHECK(big.p() == 2);
  CHECK(big.q() == 3);
  CHECK(big.alpha[0] == th.alpha[0]);
  CHECK(big.alpha[1] == 0.0);
  CHECK(big.psi[2] == 0.0);
  CHECK_THROWS_AS(th.embedded(0, 1), ParameterError);
}

TEST_CASE("parameter names follow the packed order") {
  auto names = param_names(2, 1);
  REQUIRE(names.size() == 7);
  CHECK(names[0] == "alpha1");
  CHECK(names[1] == "alpha2");
  CHECK(names[2] == "beta1");
  CHECK(names[3] == "omega");
  CHECK(names[4] == "phi1");
  CHECK(names[5] == "phi2");
  CHECK(names[6] == "psi1");
}

TEST_CASE("panel windows and presample reshaping") {
  Panel<double> panel;
  panel.pre.resize(2, 3);
  panel.obs.resize(5, 3);
  int v = 0;
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 3; ++i) panel.pre(t, i) = v++;
  for (int t = 0; t < 5; ++t)
    for (int i = 0; i < 3; ++i) panel.obs(t, i) = v++;

  auto s = panel.stacked();
  CHECK(s.rows() == 7);
  CHECK(s(2, 0) == panel.obs(0, 0));

  Panel<double> w = panel.window(1, 3, 2);
  CHECK(w.m() == 2);
  CHECK(w.t_len() == 3);
  CHECK(w.pre(0, 0) == panel.pre(1, 0));
  CHECK(w.obs(0, 0) == panel.obs(1, 0));

  Panel<double> deeper = panel.with_presample_depth(4);
  CHECK(deeper.m() == 4);
  CHECK(deeper.t_len() == 3);
  CHECK(deeper.obs(0, 1) == panel.obs(2, 1));

  Panel<double> shallower = panel.with_presample_depth(0);
  CHECK(shallower.m() == 0);
  CHECK(shallower.t_len() == 5);

  CHECK_THROWS_AS(panel.window(0, 6, 0), ParameterError);
  CHECK_THROWS_AS(panel.window(0, 5, 3), ParameterError);
  CHECK_THROWS_AS(panel.with_presample_depth(7), ParameterError);
}

TEST_CASE("stationarity margin on the two-node ring") {
  // both columns carry c_j = d_j = 1:
  //   0.05 + 0.1 + sqrt(2/pi) * (sqrt(0.05) + sqrt(0.1)) = 0.5807257
  double margin = stationarity_margin(two_ring(), dgp1(), InnovationLaw::normal);
  CHECK(margin == doctest::Approx(0.5807257).epsilon(1e-6));

  // heavier tails shrink E|eta|, so the t5 margin is smaller
  double margin_t5 = stationarity_margin(two_ring(), dgp1(), InnovationLaw::t5);
  CHECK(margin_t5 < margin);
  CHECK(margin_t5 == doctest::Approx(0.15 + 0.73510519389572273268 *
                                                (std::sqrt(0.05) + std::sqrt(0.1)))
                         .epsilon(1e-12));
}

TEST_CASE("stationarity load peaks at a hub column") {
  // nodes 1..9 all reference node 0; node 0 references node 1
  AdjMat a = AdjMat::Zero(10, 10);
  for (int i = 1; i < 10; ++i) a(i, 0) = 1;
  a(0, 1) = 1;
  Network net = make_network(a);
  auto th = dgp1();
  Eigen::VectorXd load = stationarity_load(net, th, InnovationLaw::normal);

  // column 0 receives nine unit-weight edges: c_0 = d_0 = 9
  const double e_abs = 0.79788456080286535588;
  double expect_hub =
      0.05 * 9 + 0.1 + e_abs * (std::sqrt(0.05) * 9 + std::sqrt(0.1));
  CHECK(load[0] == doctest::Approx(expect_hub).epsilon(1e-12));
  int arg = 0;
  load.maxCoeff(&arg);
  CHECK(arg == 0);

  // column 2 receives nothing: only the intercept terms survive
  double expect_leaf = 0.1 + e_abs * std::sqrt(0.1);
  CHECK(load[2] == doctest::Approx(expect_leaf).epsilon(1e-12));
}

TEST_CASE("conditional moments match the definition on a hand example") {
  // 0 -> {1,2}, 1 -> {0}, 2 -> {0,1}
  AdjMat a = AdjMat::Zero(3, 3);
  a(0, 1) = a(0, 2) = 1;
  a(1, 0) = 1;
  a(2, 0) = a(2, 1) = 1;
  Network net = make_network(a);

  NdarParams<double> th;
  th.alpha.resize(2);
  th.alpha << 0.2, -0.1;
  th.beta.resize(1);
  th.beta << 0.3;
  th.omega = 0.7;
  th.phi.resize(2);
  th.phi << 0.15, 0.05;
  th.psi.resize(1);
  th.psi << 0.25;

  Eigen::MatrixXd hist(2, 3);
  hist << 1.0, -2.0, 0.5,   // y_{t-2}
      0.4, 1.2, -0.8;       // y_{t-1}
  Eigen::VectorXd mean, var;
  conditional_moments<double>(net, th, hist, mean, var);

  // node 0: lag-1 neighbors mean (1.2 + -0.8)/2 = 0.2, lag-2: (-2 + 0.5)/2
  double m0 = 0.2 * 0.2 + (-0.1) * (-0.75) + 0.3 * 0.4;
  CHECK(mean[0] == doctest::Approx(m0).epsilon(1e-14));
  double v0 = 0.7 + 0.15 * ((1.2 * 1.2 + 0.8 * 0.8) / 2) +
              0.05 * ((4.0 + 0.25) / 2) + 0.25 * (0.4 * 0.4);
  CHECK(var[0] == doctest::Approx(v0).epsilon(1e-14));

  // node 1 follows only node 0
  double m1 = 0.2 * 0.4 + (-0.1) * 1.0 + 0.3 * 1.2;
  CHECK(mean[1] == doctest::Approx(m1).epsilon(1e-14));

  CHECK_THROWS_AS(conditional_moments<double>(net, th, hist.topRows(1), mean, var),
                  ParameterError);
}

TEST_CASE("simulate_step equals moments plus scaled innovation") {
  Network net = two_ring();
  auto th = dgp1();
  Eigen::MatrixXd hist(1, 2);
  hist << 0.3, -0.6;
  Eigen::VectorXd eta(2);
  eta << 1.0, -2.0;
  Eigen::VectorXd y = simulate_step<double>(net, th, hist, eta);
  Eigen::VectorXd mean, var;
  conditional_moments<double>(net, th, hist, mean, var);
  CHECK(y[0] == doctest::Approx(mean[0] + std::sqrt(var[0])).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(mean[1] - 2.0 * std::sqrt(var[1])).epsilon(1e-15));
}

TEST_CASE("simulate shapes, determinism, and presample stitching") {
  Network net = gen_uniform_random(12, 4, 3);
  auto th = dgp1();
  Panel<double> p1 = simulate(net, th, InnovationLaw::normal, 50, 100, 77, 5);
  CHECK(p1.m() == 5);
  CHECK(p1.t_len() == 50);
  CHECK(p1.n() == 12);

  Panel<double> p2 = simulate(net, th, InnovationLaw::normal, 50, 100, 77, 5);
  CHECK((p1.stacked().array() == p2.stacked().array()).all());

  // same path, different slicing: moving 5 rows from burn-in to observations
  Panel<double> p3 = simulate(net, th, InnovationLaw::normal, 55, 95, 77, 0);
  CHECK((p3.obs.topRows(5).array() == p1.pre.array()).all());
  CHECK((p3.obs.bottomRows(50).array() == p1.obs.array()).all());

  Panel<double> other = simulate(net, th, InnovationLaw::normal, 50, 100, 78, 5);
  CHECK((other.obs.array() != p1.obs.array()).any());

  CHECK_THROWS_AS(simulate(net, th, InnovationLaw::normal, 0, 100, 1),
                  ParameterError);
  CHECK_THROWS_AS(simulate(net, th, InnovationLaw::normal, 10, 0, 1, 5),
                  ParameterError);
}

TEST_CASE("explosive volatility trips the divergence guard") {
  Network net = two_ring();
  auto th = dgp1();
  th.psi[0] = 6.0;  // E log(6 eta^2) > 0: almost surely explosive
  try {
    simulate(net, th, InnovationLaw::normal, 100, 500, 9);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step >= 1);
    CHECK(e.step < 500);
  }
}

TEST_CASE("default presample depth equals the largest lag") {
  Network net = two_ring();
  NdarParams<double> th;
  th.alpha.resize(2);
  th.alpha << 0.05, 0.02;
  th.beta.resize(1);
  th.beta << 0.1;
  th.omega = 0.3;
  th.phi = Eigen::VectorXd::Zero(2);
  th.psi = Eigen::VectorXd::Zero(1);
  Panel<double> p = simulate(net, th, InnovationLaw::normal, 20, 50, 4);
  CHECK(p.m() == 2);

  NdarParams<double> white;
  white.alpha.resize(0);
  white.beta.resize(0);
  white.phi.resize(0);
  white.psi.resize(0);
  white.omega = 2.0;
  Panel<double> w = simulate(net, white, InnovationLaw::normal, 30, 10, 4);
  CHECK(w.m() == 0);
  // pure noise: sample second moment near omega
  CHECK(w.obs.array().square().mean() == doctest::Approx(2.0).epsilon(0.5));
}
