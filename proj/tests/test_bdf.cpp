#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ksmz/bdf.hpp"
#include "support/oracles.hpp"

using namespace ksmz;

namespace {

const SpectralParams kParams(0.085, 24);

/// Scalar linear test problem y' = lambda y.
class ScalarLinear final : public OdeSystem {
 public:
  explicit ScalarLinear(double lambda) : lambda_(lambda) {}
  int size() const override { return 1; }
  void eval(const Eigen::VectorXd& y, Eigen::VectorXd& dydt) override {
    dydt.resize(1);
    dydt[0] = lambda_ * y[0];
  }
  void jacobian(const Eigen::VectorXd&, Eigen::MatrixXd& jac) override {
    jac.resize(1, 1);
    jac(0, 0) = lambda_;
  }

 private:
  double lambda_;
};

/// Two decoupled decaying modes, used for the order-convergence checks.
class DiagLinear final : public OdeSystem {
 public:
  int size() const override { return 2; }
  void eval(const Eigen::VectorXd& y, Eigen::VectorXd& dydt) override {
    dydt.resize(2);
    dydt[0] = -1.0 * y[0];
    dydt[1] = -4.0 * y[1];
  }
  void jacobian(const Eigen::VectorXd&, Eigen::MatrixXd& jac) override {
    jac = Eigen::MatrixXd::Zero(2, 2);
    jac(0, 0) = -1.0;
    jac(1, 1) = -4.0;
  }
};

}  // namespace

TEST_CASE("ks_jacobian at the zero state is the diagonal of linear rates") {
  const ModeState s(kParams);
  const Eigen::MatrixXd jac = ks_jacobian(s, kParams);
  for (int k = 1; k <= kParams.max_pos(); ++k) {
    const double rate = linear_growth_rate(k, kParams.nu);
    CHECK(jac(2 * (k - 1), 2 * (k - 1)) == doctest::Approx(rate).epsilon(1e-14));
    CHECK(jac(2 * (k - 1) + 1, 2 * (k - 1) + 1) == doctest::Approx(rate).epsilon(1e-14));
  }
  CHECK((jac - jac.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ks_jacobian matches central finite differences") {
  KsOde sys(kParams);
  for (int trial = 0; trial < 3; ++trial) {
    const ModeState s = testing::random_reality_state(kParams, 11 + static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd y = sys.from_state(s);
    const Eigen::MatrixXd analytic = ks_jacobian(s, kParams);
    const Eigen::MatrixXd fd = testing::fd_jacobian(sys, y, 1e-6);
    const double rel = (analytic - fd).cwiseAbs().maxCoeff() / analytic.cwiseAbs().maxCoeff();
    CHECK(rel <= 1e-5);
  }
}

TEST_CASE("ks_jacobian mode-2/mode-1 coupling equals -2 i eps") {
  const double eps = 0.25;
  ModeState s(kParams);
  s.at(1, kParams) = eps;
  s.at(-1, kParams) = eps;
  const Eigen::MatrixXd jac = ks_jacobian(s, kParams);
  // complex block [(k=2, l=1)]: A = -2i eps, B = 0
  CHECK(jac(2, 0) == doctest::Approx(0.0));
  CHECK(jac(2, 1) == doctest::Approx(2.0 * eps).epsilon(1e-14));
  CHECK(jac(3, 0) == doctest::Approx(-2.0 * eps).epsilon(1e-14));
  CHECK(jac(3, 1) == doctest::Approx(0.0));
}

TEST_CASE("controller-accepted step on y' = -1e6 y satisfies the exponential oracle") {
  ScalarLinear sys(-1e6);
  BdfConfig cfg;
  cfg.tol = 1e-7;
  cfg.dt_init = 1e-9;
  cfg.dt_min = 1e-16;
  cfg.dt_max = 1.0;
  cfg.newton_tol = 1e-9;
  Eigen::VectorXd y0(1);
  y0[0] = 1.0;
  BdfIntegrator bdf(sys, y0, 0.0, cfg);
  BdfIntegrator::StepResult res;
  do {
    res = bdf.step();
  } while (!res.accepted);
  const double t = bdf.state().t;
  CHECK(std::abs(bdf.current()[0] - std::exp(-1e6 * t)) <= cfg.tol);
  CHECK(res.error_estimate <= cfg.tol);
}

TEST_CASE("fixed-step BDF1 is backward Euler") {
  ScalarLinear sys(-5.0);
  BdfConfig cfg;
  cfg.tol = 1e-7;
  cfg.max_order = 1;
  cfg.dt_init = cfg.dt_min = cfg.dt_max = 0.01;  // degenerate controller
  cfg.newton_tol = 1e-14;
  Eigen::VectorXd y0(1);
  y0[0] = 1.0;
  BdfIntegrator bdf(sys, y0, 0.0, cfg);
  const int n = 50;
  for (int i = 0; i < n; ++i) CHECK(bdf.step().accepted);
  const double be = std::pow(1.0 / (1.0 + 5.0 * 0.01), n);
  CHECK(std::abs(bdf.current()[0] - be) <= 1e-12);
  CHECK(bdf.state().t == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixed-step convergence order for BDF1 and BDF2") {
  for (int order : {1, 2}) {
    auto run = [&](double h) {
      DiagLinear sys;
      BdfConfig cfg;
      cfg.tol = 1e-7;
      cfg.max_order = order;
      cfg.dt_init = cfg.dt_min = cfg.dt_max = h;
      cfg.newton_tol = 1e-13;
      Eigen::VectorXd y0(2);
      y0 << 1.0, 1.0;
      BdfIntegrator bdf(sys, y0, 0.0, cfg);
      const long n = std::lround(1.0 / h);
      for (long i = 0; i < n; ++i) bdf.step();
      Eigen::VectorXd exact(2);
      exact << std::exp(-1.0), std::exp(-4.0);
      return (bdf.current() - exact).cwiseAbs().maxCoeff();
    };
    const double e1 = run(1e-3);
    const double e2 = run(5e-4);
    const double ratio = e1 / e2;
    const double expected = std::pow(2.0, order);
    CHECK(ratio > 0.75 * expected);
    CHECK(ratio < 1.3 * expected);
  }
}

TEST_CASE("KS step at tol 1e-7: accepted error estimates stay within tolerance") {
  KsOde sys(kParams);
  const ModeState ic = testing::random_reality_state(kParams, 21, 0.5);
  BdfConfig cfg;
  cfg.tol = 1e-7;
  cfg.dt_init = 1e-6;
  BdfIntegrator bdf(sys, sys.from_state(ic), 0.0, cfg);
  int accepted = 0;
  while (bdf.state().t < 0.5) {
    const auto res = bdf.step();
    if (res.accepted) {
      ++accepted;
      CHECK(res.error_estimate <= cfg.tol);
    }
  }
  CHECK(accepted > 10);
}

TEST_CASE("integrate_full reproduces the linear growth factors at tiny amplitude") {
  ModeState ic(kParams);
  for (int k = 1; k <= 5; ++k) {
    ic.at(k, kParams) = 1e-8;
    ic.at(-k, kParams) = 1e-8;
  }
  BdfConfig cfg;
  cfg.tol = 1e-14;
  cfg.dt_init = 1e-6;
  cfg.newton_tol = 1e-16;
  const Trajectory traj = integrate_full(ic, 0.1, cfg, kParams, 0.1);
  REQUIRE(traj.states.size() == 2);
  const ModeState& end = traj.states.back();
  for (int k = 1; k <= 5; ++k) {
    const double growth = std::exp(linear_growth_rate(k, kParams.nu) * 0.1);
    const double rel = std::abs(end.at(k, kParams) - Complex(1e-8 * growth, 0.0)) / (1e-8 * growth);
    CHECK(rel <= 1e-4);
  }
}

TEST_CASE("integrate_full stays bounded from a random order-one IC") {
  const ModeState ic = testing::random_reality_state(kParams, 33);
  BdfConfig cfg;
  cfg.tol = 1e-7;
  cfg.dt_init = 1e-6;
  const Trajectory traj = integrate_full(ic, 5.0, cfg, kParams, 0.25);
  REQUIRE(traj.states.size() == 21);
  for (const ModeState& s : traj.states) {
    const double e = energy(s);
    CHECK(std::isfinite(e));
    CHECK(e < 1e4);
  }
  // reality at every output sample
  for (const ModeState& s : traj.states) {
    for (int k = 1; k <= kParams.max_pos(); ++k)
      CHECK(std::abs(s.at(-k, kParams) - std::conj(s.at(k, kParams))) <= 1e-12);
    CHECK(s.at(0, kParams) == Complex{0, 0});
  }
}

TEST_CASE("tolerance robustness: tol 1e-7 vs 1e-10 agree at t = 1") {
  ModeState ic(kParams);
  for (int k = 1; k <= 3; ++k) {
    ic.at(k, kParams) = 0.1;
    ic.at(-k, kParams) = 0.1;
  }
  auto run = [&](double tol) {
    BdfConfig cfg;
    cfg.tol = tol;
    cfg.dt_init = 1e-6;
    cfg.newton_tol = tol / 10.0;
    return integrate_to(ic, 1.0, cfg, kParams);
  };
  const ModeState a = run(1e-7);
  const ModeState b = run(1e-10);
  for (int k = 1; k <= kParams.max_pos(); ++k)
    CHECK(std::abs(a.at(k, kParams) - b.at(k, kParams)) <= 1e-4);
}

TEST_CASE("BDF matches a fine RK4 reference at t = 1") {
  ModeState ic(kParams);
  for (int k = 1; k <= 3; ++k) {
    ic.at(k, kParams) = 0.1;
    ic.at(-k, kParams) = 0.1;
  }
  BdfConfig cfg;
  cfg.tol = 1e-7;
  cfg.dt_init = 1e-6;
  const ModeState bdf_end = integrate_to(ic, 1.0, cfg, kParams);

  KsOde sys(kParams);
  const Eigen::VectorXd rk_end = rk4_integrate(sys, sys.from_state(ic), 0.0, 1.0, 1e-5);
  const ModeState rk_state = sys.to_state(rk_end, 1.0);
  for (int k = 1; k <= kParams.max_pos(); ++k)
    CHECK(std::abs(bdf_end.at(k, kParams) - rk_state.at(k, kParams)) <= 100.0 * cfg.tol);
}

TEST_CASE("error-test failure at the minimum step is a hard failure") {
  ScalarLinear sys(-40.0);
  BdfConfig cfg;
  cfg.tol = 1e-16;  // unattainable
  cfg.dt_init = 0.1;
  cfg.dt_min = 0.1;
  cfg.dt_max = 0.2;
  Eigen::VectorXd y0(1);
  y0[0] = 1.0;
  BdfIntegrator bdf(sys, y0, 0.0, cfg);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100; ++i) bdf.step();
      }(),
      BdfFailure);
}
