#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ksmz/reduced.hpp"
#include "support/oracles.hpp"

using namespace ksmz;

namespace {
const SpectralParams kParams(0.085, 24);

DiagonalGaussian density_with(double mean_scale) {
  std::vector<Complex> mu;
  std::vector<double> a;
  for (int k = 1; k <= kParams.max_pos(); ++k) {
    mu.emplace_back(mean_scale / k, -mean_scale / (2 * k));
    a.push_back(0.4 / (k * k));
  }
  return DiagonalGaussian(kParams, mu, a);
}

/// Synthetic smooth linear-projection kernel K_{j,i}(s) on the given grid.
MemoryKernel synthetic_kernel(const Partition& p, double ds, double t0) {
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  MemoryKernel kern = MemoryKernel::zero(density_with(0.0), p, spec, ds, t0);
  for (int g = 0; g < kern.n_grid(); ++g) {
    const double s = g * ds;
    for (int j = 0; j < p.m(); ++j)
      for (int i = 0; i < p.m(); ++i)
        kern.K[static_cast<std::size_t>(g)](j, i) =
            Complex(std::cos(1.2 * s + 0.4 * j) * std::exp(-s), 0.2 * std::sin(s + 0.3 * i)) /
            static_cast<double>(1 + i + j);
  }
  return kern;
}

NoiseModel zero_noise(const DiagonalGaussian& g, const Partition& p, double dt) {
  NoiseModel nm;
  nm.dt = dt;
  nm.params = g.params;
  nm.modes = p.unresolved_pos();
  for (int k : nm.modes) {
    NoiseModel::Component comp;
    comp.n_w = 0;
    comp.weights = {0.0};
    comp.r0 = 0.0;
    nm.components[{k, 'r'}] = comp;
    nm.components[{k, 'i'}] = comp;
    nm.means[k] = g.mean(k);
  }
  return nm;
}

std::vector<Complex> smooth_history_value(double t, std::size_t half) {
  std::vector<Complex> v(half);
  for (std::size_t i = 0; i < half; ++i)
    v[i] = Complex(std::sin(0.8 * t + 0.5 * static_cast<double>(i)), 0.3 * std::cos(0.6 * t));
  return v;
}
}  // namespace

TEST_CASE("memory integral of a zero kernel vanishes") {
  const Partition p = make_set1(kParams);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  const MemoryKernel kern = MemoryKernel::zero(density_with(0.1), p, spec, 0.01, 1.0);
  CHECK(kern.is_zero());
  HistoryBuffer history(0.001, 1.1);
  for (int i = 0; i <= 1200; ++i)
    history.push(i * 0.001, std::vector<Complex>(5, Complex(0.7, -0.1)));
  const Eigen::VectorXcd v = memory_integral(history, std::vector<Complex>(5, Complex(0.7, -0.1)), 1.2,
                                             kern, nullptr, ReducedRunConfig::Quadrature::Simpson, 1.0);
  CHECK(v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("memory integral of a constant kernel over constant history") {
  const Partition p = make_set1(kParams);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  MemoryKernel kern = MemoryKernel::zero(density_with(0.1), p, spec, 0.01, 1.0);
  for (auto& K : kern.K) K.setConstant(Complex(0.3, -0.2));

  const std::vector<Complex> c(5, Complex(0.5, 0.25));
  std::vector<Complex> basis(10);
  for (int i = 0; i < 5; ++i) {
    basis[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)];
    basis[static_cast<std::size_t>(i + 5)] = std::conj(c[static_cast<std::size_t>(i)]);
  }
  Complex bsum{0, 0};
  for (const Complex& b : basis) bsum += b;

  HistoryBuffer history(0.001, 1.1);
  for (int i = 0; i <= 2000; ++i) history.push(i * 0.001, c);

  for (double t : {0.35, 2.0}) {
    const Eigen::VectorXcd v =
        memory_integral(history, c, t, kern, nullptr, ReducedRunConfig::Quadrature::Trapezoid, 1.0);
    const Complex expected = Complex(0.3, -0.2) * bsum * std::min(t, 1.0);
    for (int j = 0; j < p.m(); ++j) CHECK(std::abs(v(j) - expected) <= 1e-12 * std::abs(expected));
  }
}

TEST_CASE("Simpson memory integral agrees with a 10x-refined trapezoid reference") {
  const Partition p = make_set1(kParams);
  const double t = 2.0, t0 = 1.0;
  const MemoryKernel coarse = synthetic_kernel(p, 0.01, t0);
  const MemoryKernel fine = synthetic_kernel(p, 0.001, t0);

  HistoryBuffer history(0.0005, t0 + 0.01);
  for (int i = 0; i <= 4200; ++i) {
    const double ht = i * 0.0005;
    history.push(ht, smooth_history_value(ht, 5));
  }
  const std::vector<Complex> current = smooth_history_value(t, 5);
  const Eigen::VectorXcd simpson =
      memory_integral(history, current, t, coarse, nullptr, ReducedRunConfig::Quadrature::Simpson, t0);
  const Eigen::VectorXcd reference =
      memory_integral(history, current, t, fine, nullptr, ReducedRunConfig::Quadrature::Trapezoid, t0);
  const double rel = (simpson - reference).cwiseAbs().maxCoeff() / reference.cwiseAbs().maxCoeff();
  CHECK(rel <= 1e-6);
}

TEST_CASE("quadrature gap between trapezoid and Simpson shrinks ~4x when the grid halves") {
  const Partition p = make_set1(kParams);
  const double t = 2.0, t0 = 1.0;
  HistoryBuffer history(0.0005, t0 + 0.01);
  for (int i = 0; i <= 4200; ++i) {
    const double ht = i * 0.0005;
    history.push(ht, smooth_history_value(ht, 5));
  }
  const std::vector<Complex> current = smooth_history_value(t, 5);
  auto gap = [&](double ds) {
    const MemoryKernel kern = synthetic_kernel(p, ds, t0);
    const Eigen::VectorXcd a =
        memory_integral(history, current, t, kern, nullptr, ReducedRunConfig::Quadrature::Trapezoid, t0);
    const Eigen::VectorXcd b =
        memory_integral(history, current, t, kern, nullptr, ReducedRunConfig::Quadrature::Simpson, t0);
    return (a - b).cwiseAbs().maxCoeff();
  };
  const double ratio = gap(0.02) / gap(0.01);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.5);
}

TEST_CASE("galerkin run: zero IC stays zero, fixed seed bit-identical") {
  const Partition p = make_set1(kParams);
  ReducedRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.3;
  cfg.sample_dt = 0.05;
  cfg.variant = ReducedRunConfig::Variant::Galerkin;
  const std::vector<Complex> zero_ic(5, Complex{0, 0});
  const ReducedTrajectory z = run_galerkin(zero_ic, p, cfg, kParams);
  for (const auto& row : z.values)
    for (const Complex& v : row) CHECK(v == Complex{0, 0});

  std::vector<Complex> ic(5, Complex{0, 0});
  ic[0] = Complex(1.0, 0.0);
  ic[1] = Complex(1.0, 0.0);
  const ReducedTrajectory a = run_galerkin(ic, p, cfg, kParams);
  const ReducedTrajectory b = run_galerkin(ic, p, cfg, kParams);
  for (std::size_t ti = 0; ti < a.values.size(); ++ti) CHECK(a.values[ti] == b.values[ti]);
}

TEST_CASE("galerkin on set1 equals the full system of the halved truncation") {
  // zeroing modes |k| > 5 in the N = 24 system is exactly the N = 12 system
  const Partition p = make_set1(kParams);
  std::vector<Complex> ic(5, Complex{0, 0});
  for (int i = 0; i < 3; ++i) ic[static_cast<std::size_t>(i)] = Complex(1.0, 0.0);

  ReducedRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.sample_dt = 0.5;
  cfg.variant = ReducedRunConfig::Variant::Galerkin;
  const ReducedTrajectory galerkin = run_galerkin(ic, p, cfg, kParams);

  const SpectralParams small(kParams.nu, 12);
  ModeState small_ic(small);
  for (int k = 1; k <= 3; ++k) {
    small_ic.at(k, small) = 1.0;
    small_ic.at(-k, small) = 1.0;
  }
  BdfConfig bdf;
  bdf.tol = 1e-9;
  bdf.dt_init = 1e-6;
  bdf.newton_tol = 1e-10;
  const ModeState full_end = integrate_to(small_ic, 1.0, bdf, small);
  for (std::size_t i = 0; i < 5; ++i) {
    const int k = p.resolved_pos[i];
    CHECK(std::abs(galerkin.values.back()[i] - full_end.at(k, small)) <= 1e-5);
  }
}

TEST_CASE("galerkin blow-up aborts with a diagnostic") {
  const Partition p = make_set1(kParams);
  ReducedRunConfig cfg;
  cfg.dt = 0.05;  // recklessly large step
  cfg.t_end = 5.0;
  cfg.sample_dt = 0.05;
  cfg.blowup_energy = 1e6;
  const std::vector<Complex> ic(5, Complex(50.0, 0.0));
  CHECK_THROWS_AS(run_galerkin(ic, p, cfg, kParams), std::runtime_error);
}

TEST_CASE("short-memory run with zero kernel and no noise is the Markovian flow") {
  const DiagonalGaussian g = density_with(0.2);
  const Partition p = make_set1(kParams);
  const MarkovianModel mm(g, p);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  const MemoryKernel zero_kern = MemoryKernel::zero(g, p, spec, 0.01, 1.0);
  const NoiseModel nm = zero_noise(g, p, 0.01);

  ReducedRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.sample_dt = 0.05;
  cfg.seed = 5;
  std::vector<Complex> ic(5, Complex{0, 0});
  ic[0] = Complex(0.8, 0.1);

  ReducedRunConfig markov_only = cfg;
  markov_only.use_noise = false;
  markov_only.use_memory = false;
  const ReducedTrajectory a = run_op_realization(ic, mm, zero_kern, nm, cfg);
  const ReducedTrajectory b = run_op_realization(ic, mm, zero_kern, nm, markov_only);
  for (std::size_t ti = 0; ti < a.values.size(); ++ti)
    for (std::size_t mi = 0; mi < a.values[ti].size(); ++mi)
      CHECK(std::abs(a.values[ti][mi] - b.values[ti][mi]) <= 1e-14);
}

TEST_CASE("short-memory realization is bit-identical for a fixed seed") {
  const DiagonalGaussian g = density_with(0.15);
  const Partition p = make_set1(kParams);
  const MarkovianModel mm(g, p);
  const MemoryKernel kern = synthetic_kernel(p, 0.01, 0.5);

  // a mild moving-average model so the noise path is exercised
  AutocorrTable r;
  r.dtau = 0.01;
  for (int l = 0; l <= 50; ++l) r.r.push_back(1e-4 * std::exp(-3.0 * l * 0.01));
  AutocorrSet acs;
  acs.dtau = 0.01;
  for (int k : p.unresolved_pos()) {
    acs.tables[{k, 'r'}] = r;
    acs.tables[{k, 'i'}] = r;
  }
  const NoiseModel nm = build_noise_model(acs, g, p, 0.01);

  ReducedRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.4;
  cfg.t0 = 0.5;
  cfg.sample_dt = 0.05;
  cfg.seed = 99;
  std::vector<Complex> ic(5, Complex(0.5, 0.0));
  const ReducedTrajectory a = run_op_realization(ic, mm, kern, nm, cfg);
  const ReducedTrajectory b = run_op_realization(ic, mm, kern, nm, cfg);
  for (std::size_t ti = 0; ti < a.values.size(); ++ti) CHECK(a.values[ti] == b.values[ti]);

  ReducedRunConfig other = cfg;
  other.seed = 100;
  const ReducedTrajectory c = run_delta_realization(ic, mm, kern, nm, cfg);
  const ReducedTrajectory d = run_delta_realization(ic, mm, kern, nm, cfg);
  for (std::size_t ti = 0; ti < c.values.size(); ++ti) CHECK(c.values[ti] == d.values[ti]);
}

TEST_CASE("delta variant with zero kernel equals the memory-free flow") {
  const DiagonalGaussian g = density_with(0.1);
  const Partition p = make_set1(kParams);
  const MarkovianModel mm(g, p);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  const MemoryKernel zero_kern = MemoryKernel::zero(g, p, spec, 0.01, 1.0);
  const NoiseModel nm = zero_noise(g, p, 0.01);

  ReducedRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.3;
  cfg.sample_dt = 0.05;
  ReducedRunConfig no_mem = cfg;
  no_mem.use_memory = false;
  std::vector<Complex> ic(5, Complex(0.4, -0.2));
  const ReducedTrajectory a = run_delta_realization(ic, mm, zero_kern, nm, cfg);
  const ReducedTrajectory b = run_op_realization(ic, mm, zero_kern, nm, no_mem);
  for (std::size_t ti = 0; ti < a.values.size(); ++ti)
    for (std::size_t mi = 0; mi < a.values[ti].size(); ++mi)
      CHECK(std::abs(a.values[ti][mi] - b.values[ti][mi]) <= 1e-14);
}

TEST_CASE("delta weight table integrates the kernel") {
  const Partition p = make_set1(kParams);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  MemoryKernel kern = MemoryKernel::zero(density_with(0.0), p, spec, 0.01, 1.0);
  for (auto& K : kern.K) K.setConstant(Complex(0.25, 0.5));
  const Eigen::MatrixXcd w = kern.integrated();
  CHECK(std::abs(w(0, 0) - Complex(0.25, 0.5)) <= 1e-12);  // constant over [0, 1]
}

TEST_CASE("memory-free Markovian flow converges at fourth order") {
  const DiagonalGaussian g = density_with(0.25);
  const Partition p = make_set1(kParams);
  const MarkovianModel mm(g, p);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  const MemoryKernel zero_kern = MemoryKernel::zero(g, p, spec, 0.01, 1.0);
  const NoiseModel nm = zero_noise(g, p, 0.01);
  std::vector<Complex> ic(5, Complex(0.6, 0.2));

  auto run_with_dt = [&](double dt) {
    ReducedRunConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.4;
    cfg.sample_dt = 0.4;
    cfg.use_noise = false;
    cfg.use_memory = false;
    return run_op_realization(ic, mm, zero_kern, nm, cfg).values.back();
  };
  const auto ref = run_with_dt(1e-4);
  auto err = [&](double dt) {
    const auto v = run_with_dt(dt);
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e = std::max(e, std::abs(v[i] - ref[i]));
    return e;
  };
  const double ratio = err(4e-3) / err(2e-3);
  CHECK(ratio > 10.0);
  CHECK(ratio < 24.0);
}

TEST_CASE("reduced-config validation") {
  ReducedRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.sample_dt = 0.0015;  // not an integer multiple
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
