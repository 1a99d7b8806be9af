#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "ksmz/density.hpp"
#include "support/oracles.hpp"

using namespace ksmz;

namespace {
const SpectralParams kParams(0.085, 24);

SampleSet two_point_set() {
  // mode 1 takes real values {0, 2}; every other mode takes {-1, 1} so the fit
  // stays non-degenerate
  SampleSet set;
  set.params = kParams;
  set.samples.assign(2, std::vector<Complex>(static_cast<std::size_t>(kParams.N)));
  for (int s = 0; s < 2; ++s) {
    for (int k = 1; k <= kParams.max_pos(); ++k) {
      const double v = (k == 1) ? (s == 0 ? 0.0 : 2.0) : (s == 0 ? -1.0 : 1.0);
      set.samples[static_cast<std::size_t>(s)][static_cast<std::size_t>(kParams.index(k))] = v;
      set.samples[static_cast<std::size_t>(s)][static_cast<std::size_t>(kParams.index(-k))] = v;
    }
  }
  return set;
}

DiagonalGaussian test_density(double mean_scale = 0.1, std::uint64_t = 0) {
  std::vector<Complex> mu;
  std::vector<double> a;
  for (int k = 1; k <= kParams.max_pos(); ++k) {
    mu.emplace_back(mean_scale / k, -mean_scale / (2 * k));
    a.push_back(1.0 / (k * k));
  }
  return DiagonalGaussian(kParams, mu, a);
}
}  // namespace

TEST_CASE("fit on a two-point sample reproduces the closed form") {
  const DiagonalGaussian g = fit_diagonal_gaussian(two_point_set());
  CHECK(g.mean(1) == Complex(1.0, 0.0));
  CHECK(g.variance(1) == 1.0);
  CHECK(g.mean(-1) == Complex(1.0, 0.0));
  CHECK(g.variance(-1) == 1.0);
}

TEST_CASE("degenerate sample set is rejected") {
  SampleSet set;
  set.params = kParams;
  set.samples.assign(3, std::vector<Complex>(static_cast<std::size_t>(kParams.N), Complex(0.5, 0.0)));
  CHECK_THROWS_AS(fit_diagonal_gaussian(set), std::invalid_argument);
}

TEST_CASE("fit is consistent on synthetic Gaussian samples") {
  const DiagonalGaussian truth = test_density(0.3);
  const std::size_t n = 4000;
  SampleSet set;
  set.params = kParams;
  set.samples.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    RandomStream rng(stream_seed(31, "fit", s));
    set.samples[s] = truth.draw_full(rng).coeffs;
  }
  const DiagonalGaussian fitted = fit_diagonal_gaussian(set);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int k = 1; k <= kParams.max_pos(); ++k) {
    const double scale = std::sqrt(truth.variance(k));
    CHECK(std::abs(fitted.mean(k) - truth.mean(k)) <= 5.0 * scale / root_n);
    CHECK(std::abs(fitted.variance(k) - truth.variance(k)) <= 5.0 * truth.variance(k) / root_n);
  }
}

TEST_CASE("partition bookkeeping for the two experiment sets") {
  const Partition set1 = make_set1(kParams);
  CHECK(set1.resolved_pos == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(set1.m() == 10);
  CHECK(set1.unresolved_pos() == std::vector<int>{6, 7, 8, 9, 10, 11});
  CHECK(set1.is_resolved(-3));
  CHECK(!set1.is_resolved(6));

  const Partition set2 = make_set2(kParams);
  CHECK(set2.resolved_pos == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(set2.unresolved_pos() == std::vector<int>{1, 7, 8, 9, 10, 11});

  CHECK_THROWS_AS(Partition(kParams, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Partition(kParams, {0}), std::invalid_argument);
  CHECK_THROWS_AS(Partition(kParams, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}), std::invalid_argument);
}

TEST_CASE("sample_conditional pins resolved values and is deterministic") {
  const DiagonalGaussian g = test_density();
  const Partition p = make_set1(kParams);
  std::vector<Complex> vals(static_cast<std::size_t>(p.m()));
  for (std::size_t i = 0; i < 5; ++i) {
    vals[i] = Complex(0.5 + static_cast<double>(i), -0.25);
    vals[i + 5] = std::conj(vals[i]);
  }
  RandomStream r1(99), r2(99);
  const ModeState a = sample_conditional(g, p, vals, r1);
  const ModeState b = sample_conditional(g, p, vals, r2);
  CHECK(a.coeffs == b.coeffs);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.at(p.resolved_pos[i], kParams) == vals[i]);
    CHECK(a.at(-p.resolved_pos[i], kParams) == std::conj(vals[i]));
  }
  for (int k = 1; k <= kParams.max_pos(); ++k)
    CHECK(a.at(-k, kParams) == std::conj(a.at(k, kParams)));

  std::vector<Complex> bad = vals;
  bad[5] = Complex(1.0, 1.0);
  RandomStream r3(99);
  CHECK_THROWS_AS(sample_conditional(g, p, bad, r3), std::invalid_argument);
}

TEST_CASE("conditional sampler moments converge to the density parameters") {
  const DiagonalGaussian g = test_density(0.2);
  const Partition p = make_set1(kParams);
  std::vector<Complex> vals(static_cast<std::size_t>(p.m()), Complex{1.0, 0.0});
  const std::size_t n = 10000;
  for (int k : {6, 11}) {
    Complex mean{0, 0};
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream rng(stream_seed(17, "cond", i));
      const ModeState s = sample_conditional(g, p, vals, rng);
      mean += s.at(k, kParams);
    }
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream rng(stream_seed(17, "cond", i));
      const ModeState s = sample_conditional(g, p, vals, rng);
      var += std::norm(s.at(k, kParams) - mean);
    }
    var /= static_cast<double>(n);
    const double band = 5.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - g.mean(k)) <= band * std::sqrt(g.variance(k)));
    CHECK(std::abs(var - g.variance(k)) <= band * g.variance(k));
  }
}

TEST_CASE("diagonal conditional affine has the exact closed form") {
  const DiagonalGaussian g = test_density(0.15);
  const Partition p = make_set1(kParams);
  const ConditionalAffine aff = conditional_affine(g, p);
  for (int k : p.resolved()) {
    const int row = g.density_index(k);
    CHECK(aff.c(row) == Complex{0, 0});
    for (int l = 0; l < p.m(); ++l)
      CHECK(aff.Q(row, l) == (l == p.resolved_index(k) ? Complex{1, 0} : Complex{0, 0}));
  }
  for (int k : p.unresolved()) {
    const int row = g.density_index(k);
    CHECK(aff.c(row) == g.mean(k));
    for (int l = 0; l < p.m(); ++l) CHECK(aff.Q(row, l) == Complex{0, 0});
  }
}

TEST_CASE("single resolved mode: Q is the selection") {
  const DiagonalGaussian g = test_density();
  const Partition p(kParams, {1});
  const ConditionalAffine aff = conditional_affine(g, p);
  CHECK(aff.Q(g.density_index(1), 0) == Complex{1, 0});
  CHECK(aff.Q(g.density_index(-1), 1) == Complex{1, 0});
  for (int k : p.unresolved()) {
    for (int l = 0; l < 2; ++l) CHECK(aff.Q(g.density_index(k), l) == Complex{0, 0});
  }
}

TEST_CASE("general-covariance path matches the 2x2 closed form") {
  const double a1 = 2.0, a2 = 0.5;
  const Complex rho(0.3, -0.4);
  Eigen::MatrixXcd c(2, 2);
  c << a1, rho, std::conj(rho), a2;
  Eigen::VectorXcd mu(2);
  mu << Complex(1.0, 0.5), Complex(-0.2, 0.1);
  Eigen::MatrixXcd gsel(1, 2);
  gsel << 1.0, 0.0;

  const ConditionalAffine aff = conditional_affine_general(c, mu, gsel);
  CHECK(std::abs(aff.Q(0, 0) - Complex{1, 0}) <= 1e-12);
  CHECK(std::abs(aff.Q(1, 0) - std::conj(rho) / a1) <= 1e-12);
  CHECK(std::abs(aff.c(0)) <= 1e-12);
  CHECK(std::abs(aff.c(1) - (mu(1) - std::conj(rho) / a1 * mu(0))) <= 1e-12);

  const ConditionalCov cov = conditional_covariance_general(c, gsel);
  CHECK(std::abs(cov.V(0, 0)) <= 1e-12);
  CHECK(std::abs(cov.V(0, 1)) <= 1e-12);
  CHECK(std::abs(cov.V(1, 0)) <= 1e-12);
  CHECK(std::abs(cov.V(1, 1) - (a2 - std::norm(rho) / a1)) <= 1e-12);  // Schur complement

  // conditioning on everything leaves no variance
  const ConditionalCov all = conditional_covariance_general(c, Eigen::MatrixXcd::Identity(2, 2));
  CHECK(all.V.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("diagonal conditional covariance structure") {
  const DiagonalGaussian g = test_density();
  const Partition p = make_set1(kParams);
  const ConditionalCov cov = conditional_covariance(g, p);
  for (int i = 0; i < g.d(); ++i) {
    for (int j = 0; j < g.d(); ++j) {
      const int ki = g.wavenumber(i);
      const int kj = g.wavenumber(j);
      if (i == j && !p.is_resolved(ki))
        CHECK(cov.V(i, j) == Complex(g.variance(ki), 0.0));
      else
        CHECK(cov.V(i, j) == Complex{0, 0});
      // any entry touching a resolved index vanishes exactly
      if (p.is_resolved(ki) || p.is_resolved(kj)) CHECK(cov.V(i, j) == Complex{0, 0});
    }
  }
}

TEST_CASE("wick moments") {
  const DiagonalGaussian g = test_density();
  const Partition p = make_set1(kParams);

  SUBCASE("odd P vanishes") {
    CHECK(wick_moment(g, p, {{6, false}, {7, false}, {8, true}}) == Complex{0, 0});
    CHECK(wick_moment(g, p, {{6, false}}) == Complex{0, 0});
  }
  SUBCASE("P = 2 recovers the conditional variance") {
    CHECK(wick_moment(g, p, {{6, false}, {6, true}}) == Complex(g.variance(6), 0.0));
    CHECK(wick_moment(g, p, {{6, false}, {7, true}}) == Complex{0, 0});
    CHECK(wick_moment(g, p, {{6, false}, {-6, false}}) == Complex(g.variance(6), 0.0));
    CHECK(wick_moment(g, p, {{6, false}, {6, false}}) == Complex{0, 0});
  }
  SUBCASE("P = 4 gives 2 a^2 and matches Monte Carlo") {
    const double a6 = g.variance(6);
    const Complex w = wick_moment(g, p, {{6, false}, {6, true}, {6, false}, {6, true}});
    CHECK(w == Complex(2.0 * a6 * a6, 0.0));

    const std::size_t n = 1000000;
    double mc = 0.0;
    RandomStream rng(4242);
    const double sd = std::sqrt(0.5 * a6);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex z(rng.normal(0.0, sd), rng.normal(0.0, sd));
      mc += std::norm(z) * std::norm(z);
    }
    mc /= static_cast<double>(n);
    CHECK(std::abs(mc - w.real()) <= 0.01 * w.real());
  }
  SUBCASE("resolved factors are rejected") {
    CHECK_THROWS_AS(wick_moment(g, p, {{1, false}, {1, true}}), std::invalid_argument);
  }
  SUBCASE("P above the cap is rejected") {
    const std::vector<WickFactor> ten(10, WickFactor{6, false});
    CHECK_THROWS_AS(wick_moment(g, p, ten), std::invalid_argument);
  }
}

TEST_CASE("affine formula matches empirical conditional means") {
  const DiagonalGaussian g = test_density(0.25);
  const Partition p = make_set1(kParams);
  std::vector<Complex> vals(static_cast<std::size_t>(p.m()));
  for (std::size_t i = 0; i < 5; ++i) {
    vals[i] = Complex(0.8 - 0.1 * static_cast<double>(i), 0.3);
    vals[i + 5] = std::conj(vals[i]);
  }
  const std::size_t n = 10000;
  std::vector<Complex> sums(static_cast<std::size_t>(g.d()), Complex{0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(stream_seed(8, "mcband", i));
    const ModeState s = sample_conditional(g, p, vals, rng);
    for (int idx = 0; idx < g.d(); ++idx)
      sums[static_cast<std::size_t>(idx)] += s.at(g.wavenumber(idx), kParams);
  }
  const ConditionalAffine aff = conditional_affine(g, p);
  Eigen::VectorXcd hat(p.m());
  for (int l = 0; l < p.m(); ++l) hat(l) = vals[static_cast<std::size_t>(l)];
  const Eigen::VectorXcd predicted = aff.Q * hat + aff.c;
  for (int idx = 0; idx < g.d(); ++idx) {
    const Complex emp = sums[static_cast<std::size_t>(idx)] / static_cast<double>(n);
    const double band =
        5.0 * std::sqrt(g.variance(g.wavenumber(idx)) / static_cast<double>(n));
    CHECK(std::abs(emp - predicted(idx)) <= std::max(band, 1e-12));
  }
}

TEST_CASE("conditional second moments assemble from covariance plus means") {
  const DiagonalGaussian g = test_density(0.2);
  const Partition p = make_set1(kParams);
  std::vector<Complex> vals(static_cast<std::size_t>(p.m()), Complex{0.5, -0.5});
  for (std::size_t i = 0; i < 5; ++i) vals[i + 5] = std::conj(vals[i]);
  const ConditionalCov cov = conditional_covariance(g, p);

  const std::size_t n = 200000;
  for (const auto& [ka, kb] : std::vector<std::pair<int, int>>{{6, -6}, {6, 7}, {8, -9}, {11, 11}}) {
    Complex mc{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream rng(stream_seed(55, "wick-mc", i));
      const ModeState s = sample_conditional(g, p, vals, rng);
      mc += s.at(ka, kParams) * s.at(kb, kParams);
    }
    mc /= static_cast<double>(n);
    const Complex predicted =
        cov.V(g.density_index(ka), g.density_index(-kb)) + g.mean(ka) * g.mean(kb);
    const double band = 5.0 * std::sqrt(g.variance(ka) * g.variance(kb) / static_cast<double>(n)) +
                        5.0 / static_cast<double>(n);
    CHECK(std::abs(mc - predicted) <= std::max(band, 2e-3));
  }
}
