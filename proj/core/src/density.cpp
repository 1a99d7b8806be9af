#include "ksmz/density.hpp"

#include <algorithm>
#include <cmath>

namespace ksmz {

int density_index(const SpectralParams& params, int k) {
  const int half = params.n() / 2;
  if (k >= 1 && k <= half) return k - 1;
  if (k <= -1 && k >= -half) return half + (-k - 1);
  throw std::invalid_argument("density_index: wavenumber out of range");
}

int density_wavenumber(const SpectralParams& params, int i) {
  const int half = params.n() / 2;
  if (i < 0 || i >= params.n()) throw std::invalid_argument("density_wavenumber: index out of range");
  return i < half ? i + 1 : -(i - half + 1);
}

DiagonalGaussian::DiagonalGaussian(const SpectralParams& p, std::vector<Complex> mu_pos,
                                   std::vector<double> a_pos)
    : params(p) {
  const std::size_t half = static_cast<std::size_t>(p.n() / 2);
  if (mu_pos.size() != half || a_pos.size() != half)
    throw std::invalid_argument("DiagonalGaussian: positive-half vectors must have length n/2");
  for (double v : a_pos)
    if (v < 0.0) throw std::invalid_argument("DiagonalGaussian: negative variance");
  mu.resize(2 * half);
  a.resize(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    mu[i] = mu_pos[i];
    mu[i + half] = std::conj(mu_pos[i]);
    a[i] = a_pos[i];
    a[i + half] = a_pos[i];
  }
}

ModeState DiagonalGaussian::draw_full(RandomStream& rng) const {
  ModeState state(params);
  for (int k = 1; k <= params.max_pos(); ++k) {
    const Complex m = mean(k);
    const double sd = std::sqrt(0.5 * variance(k));
    const double re = rng.normal(m.real(), sd);
    const double im = rng.normal(m.imag(), sd);
    state.at(k, params) = Complex(re, im);
    state.at(-k, params) = Complex(re, -im);
  }
  return state;
}

Partition::Partition(const SpectralParams& p, std::vector<int> resolved_positive)
    : params(p), resolved_pos(std::move(resolved_positive)) {
  std::sort(resolved_pos.begin(), resolved_pos.end());
  if (resolved_pos.empty()) throw std::invalid_argument("Partition: empty resolved set");
  if (std::adjacent_find(resolved_pos.begin(), resolved_pos.end()) != resolved_pos.end())
    throw std::invalid_argument("Partition: duplicate resolved wavenumber");
  for (int k : resolved_pos)
    if (k < 1 || k > p.max_pos()) throw std::invalid_argument("Partition: resolved wavenumber out of range");
  if (m() >= p.n()) throw std::invalid_argument("Partition: resolved set must be a strict subset");

  for (int k : resolved_pos) resolved_signed_.push_back(k);
  for (int k : resolved_pos) resolved_signed_.push_back(-k);
  for (int k = 1; k <= p.max_pos(); ++k)
    if (!std::binary_search(resolved_pos.begin(), resolved_pos.end(), k)) unresolved_pos_.push_back(k);
  for (int k : unresolved_pos_) unresolved_signed_.push_back(k);
  for (int k : unresolved_pos_) unresolved_signed_.push_back(-k);
}

bool Partition::is_resolved(int k) const {
  return std::binary_search(resolved_pos.begin(), resolved_pos.end(), std::abs(k));
}

int Partition::resolved_index(int k) const {
  const auto it = std::lower_bound(resolved_pos.begin(), resolved_pos.end(), std::abs(k));
  if (it == resolved_pos.end() || *it != std::abs(k))
    throw std::invalid_argument("Partition: wavenumber not resolved");
  const int pos = static_cast<int>(it - resolved_pos.begin());
  return k > 0 ? pos : pos + static_cast<int>(resolved_pos.size());
}

Eigen::MatrixXcd Partition::selection_matrix() const {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m(), params.n());
  for (int r = 0; r < m(); ++r)
    g(r, density_index(params, resolved_signed_[static_cast<std::size_t>(r)])) = 1.0;
  return g;
}

Partition make_set1(const SpectralParams& params) {
  const int top = params.N / 4 - 1;  // positive modes of the half-size truncation
  if (top < 1) throw std::invalid_argument("make_set1: N too small");
  std::vector<int> pos;
  for (int k = 1; k <= top; ++k) pos.push_back(k);
  return Partition(params, pos);
}

Partition make_set2(const SpectralParams& params) {
  const int top = params.N / 4;
  if (top < 2) throw std::invalid_argument("make_set2: N too small");
  std::vector<int> pos;
  for (int k = 2; k <= top; ++k) pos.push_back(k);
  return Partition(params, pos);
}

DiagonalGaussian fit_diagonal_gaussian(const SampleSet& s) {
  if (s.n_samples() < 2) throw std::invalid_argument("fit_diagonal_gaussian: need at least 2 samples");
  const SpectralParams& p = s.params;
  const int half = p.n() / 2;
  std::vector<Complex> mu_pos(static_cast<std::size_t>(half));
  std::vector<double> a_pos(static_cast<std::size_t>(half));
  const double inv_n = 1.0 / static_cast<double>(s.n_samples());
  for (int k = 1; k <= half; ++k) {
    Complex mean{0.0, 0.0};
    for (const auto& w : s.samples) mean += w[static_cast<std::size_t>(p.index(k))];
    mean *= inv_n;
    double var = 0.0;
    for (const auto& w : s.samples) var += std::norm(w[static_cast<std::size_t>(p.index(k))] - mean);
    var *= inv_n;
    if (var == 0.0) throw std::invalid_argument("fit_diagonal_gaussian: degenerate density (zero variance)");
    mu_pos[static_cast<std::size_t>(k - 1)] = mean;
    a_pos[static_cast<std::size_t>(k - 1)] = var;
  }
  return DiagonalGaussian(p, std::move(mu_pos), std::move(a_pos));
}

ModeState sample_conditional(const DiagonalGaussian& g, const Partition& p,
                             const std::vector<Complex>& resolved_values, RandomStream& rng) {
  const std::size_t half = p.resolved_pos.size();
  if (resolved_values.size() != static_cast<std::size_t>(p.m()))
    throw std::invalid_argument("sample_conditional: resolved_values must have length m");
  for (std::size_t i = 0; i < half; ++i) {
    const Complex diff = resolved_values[i + half] - std::conj(resolved_values[i]);
    if (std::abs(diff) > 1e-12 * (1.0 + std::abs(resolved_values[i])))
      throw std::invalid_argument("sample_conditional: resolved_values not conjugate-consistent");
  }
  ModeState state(g.params);
  for (std::size_t i = 0; i < half; ++i) {
    const int k = p.resolved_pos[i];
    state.at(k, g.params) = resolved_values[i];
    state.at(-k, g.params) = std::conj(resolved_values[i]);
  }
  for (int k : p.unresolved_pos()) {
    const Complex m = g.mean(k);
    const double sd = std::sqrt(0.5 * g.variance(k));
    const double re = rng.normal(m.real(), sd);
    const double im = rng.normal(m.imag(), sd);
    state.at(k, g.params) = Complex(re, im);
    state.at(-k, g.params) = Complex(re, -im);
  }
  return state;
}

ConditionalAffine conditional_affine(const DiagonalGaussian& g, const Partition& p) {
  ConditionalAffine out;
  out.Q = Eigen::MatrixXcd::Zero(g.d(), p.m());
  out.c = Eigen::VectorXcd::Zero(g.d());
  for (int k : p.resolved()) out.Q(g.density_index(k), p.resolved_index(k)) = 1.0;
  for (int k : p.unresolved()) out.c(g.density_index(k)) = g.mean(k);
  return out;
}

ConditionalAffine conditional_affine_general(const Eigen::MatrixXcd& C, const Eigen::VectorXcd& mu,
                                             const Eigen::MatrixXcd& G) {
  ConditionalAffine out;
  const Eigen::MatrixXcd cg = C * G.adjoint();
  const Eigen::MatrixXcd gcg = G * C * G.adjoint();
  out.Q = cg * gcg.inverse();
  out.c = mu - out.Q * (G * mu);
  return out;
}

ConditionalCov conditional_covariance(const DiagonalGaussian& g, const Partition& p) {
  ConditionalCov out;
  out.V = Eigen::MatrixXcd::Zero(g.d(), g.d());
  for (int k : p.unresolved()) {
    const int i = g.density_index(k);
    out.V(i, i) = g.variance(k);
  }
  return out;
}

ConditionalCov conditional_covariance_general(const Eigen::MatrixXcd& C, const Eigen::MatrixXcd& G) {
  ConditionalCov out;
  const Eigen::MatrixXcd cg = C * G.adjoint();
  const Eigen::MatrixXcd gcg = G * C * G.adjoint();
  out.V = C - cg * gcg.inverse() * (G * C);
  return out;
}

namespace {
// Covariance of centered factors after folding conjugation into the sign of
// the wavenumber (conj(u_k) = u_{-k} under the reality constraint):
// E[(u_w1 - mu)(u_w2 - mu)] = a_{|w1|} iff w1 + w2 = 0, else 0.
double pair_cov(const DiagonalGaussian& g, int w1, int w2) {
  return w1 + w2 == 0 ? g.variance(std::abs(w1)) : 0.0;
}

double sum_pairings(const DiagonalGaussian& g, std::vector<int>& ws) {
  if (ws.empty()) return 1.0;
  const int first = ws[0];
  double total = 0.0;
  for (std::size_t j = 1; j < ws.size(); ++j) {
    const double c = pair_cov(g, first, ws[j]);
    if (c == 0.0) continue;
    std::vector<int> rest;
    rest.reserve(ws.size() - 2);
    for (std::size_t i = 1; i < ws.size(); ++i)
      if (i != j) rest.push_back(ws[i]);
    total += c * sum_pairings(g, rest);
  }
  return total;
}
}  // namespace

Complex wick_moment(const DiagonalGaussian& g, const Partition& p, const std::vector<WickFactor>& factors) {
  if (factors.size() > 8) throw std::invalid_argument("wick_moment: P capped at 8");
  for (const WickFactor& f : factors)
    if (p.is_resolved(f.k))
      throw std::invalid_argument("wick_moment: resolved factors are constants; pull them out first");
  if (factors.size() % 2 == 1) return Complex{0.0, 0.0};
  std::vector<int> ws;
  ws.reserve(factors.size());
  for (const WickFactor& f : factors) ws.push_back(f.conjugated ? -f.k : f.k);
  return Complex{sum_pairings(g, ws), 0.0};
}

}  // namespace ksmz
