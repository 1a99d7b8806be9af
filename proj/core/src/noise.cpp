#include "ksmz/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ksmz {

AutocorrTable autocorrelation_from_series(const std::vector<std::vector<double>>& series, double mean,
                                          double dtau) {
  if (series.empty()) throw std::invalid_argument("autocorrelation_from_series: empty ensemble");
  const std::size_t len = series.front().size();
  for (const auto& s : series)
    if (s.size() != len) throw std::invalid_argument("autocorrelation_from_series: ragged ensemble");
  AutocorrTable table;
  table.dtau = dtau;
  table.r.assign(len, 0.0);
  table.low_ensemble_warning = series.size() < 100;
  for (const auto& s : series) {
    const double x0 = s[0] - mean;
    for (std::size_t l = 0; l < len; ++l) table.r[l] += (s[l] - mean) * x0;
  }
  for (double& v : table.r) v /= static_cast<double>(series.size());
  return table;
}

std::pair<AutocorrTable, AutocorrTable> estimate_autocorrelation(const std::vector<Trajectory>& ensemble,
                                                                 int k, const DiagonalGaussian& g) {
  if (ensemble.empty()) throw std::invalid_argument("estimate_autocorrelation: empty ensemble");
  const SpectralParams& params = g.params;
  const std::size_t len = ensemble.front().states.size();
  if (len < 2) throw std::invalid_argument("estimate_autocorrelation: trajectories too short");
  const double dtau = ensemble.front().states[1].time - ensemble.front().states[0].time;

  std::vector<std::vector<double>> re(ensemble.size()), im(ensemble.size());
  for (std::size_t e = 0; e < ensemble.size(); ++e) {
    if (ensemble[e].states.size() != len)
      throw std::invalid_argument("estimate_autocorrelation: trajectories not on a common grid");
    re[e].resize(len);
    im[e].resize(len);
    for (std::size_t l = 0; l < len; ++l) {
      const Complex u = ensemble[e].states[l].at(k, params);
      re[e][l] = u.real();
      im[e][l] = u.imag();
    }
  }
  const Complex mu = g.mean(k);
  return {autocorrelation_from_series(re, mu.real(), dtau),
          autocorrelation_from_series(im, mu.imag(), dtau)};
}

NoiseModel::Component factor_component(const AutocorrTable& r, double dt, int n_w) {
  if (r.r.empty() || r.r[0] <= 0.0) throw std::invalid_argument("factor_component: R(0) must be positive");
  if (std::abs(r.dtau - dt) > 1e-12 * std::max(1.0, dt))
    throw std::invalid_argument("factor_component: lag grid must equal the path grid");
  const int L = static_cast<int>(r.r.size()) - 1;
  const int M = 2 * L + 1;

  // Symmetrized circular arrangement; the spectrum of a real even sequence is
  // real, and clipping keeps the square root defined for finite-sample R.
  std::vector<double> phi(static_cast<std::size_t>(M), 0.0);
  const double w0 = 2.0 * std::numbers::pi / M;
  for (int m = 0; m < M; ++m) {
    double acc = r.r[0];
    for (int l = 1; l <= L; ++l) acc += 2.0 * r.r[static_cast<std::size_t>(l)] * std::cos(w0 * l * m);
    phi[static_cast<std::size_t>(m)] = std::max(acc, 0.0);
  }

  std::vector<double> h(static_cast<std::size_t>(L) + 1, 0.0);
  for (int i = 0; i <= L; ++i) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += std::sqrt(phi[static_cast<std::size_t>(m)] / dt) * std::cos(w0 * i * m);
    h[static_cast<std::size_t>(i)] = acc / M;
  }

  if (n_w < 0) {
    double hmax = 0.0;
    for (double v : h) hmax = std::max(hmax, std::abs(v));
    n_w = 0;
    for (int i = L; i >= 1; --i) {
      if (std::abs(h[static_cast<std::size_t>(i)]) > 1e-3 * hmax) {
        n_w = i;
        break;
      }
    }
  }
  n_w = std::min(n_w, L);

  NoiseModel::Component comp;
  comp.n_w = n_w;
  comp.r0 = r.r[0];
  comp.weights.assign(static_cast<std::size_t>(2 * n_w + 1), 0.0);
  for (int i = -n_w; i <= n_w; ++i)
    comp.weights[static_cast<std::size_t>(i + n_w)] = h[static_cast<std::size_t>(std::abs(i))];
  return comp;
}

const NoiseModel::Component& NoiseModel::component(int k, char c) const {
  const auto it = components.find({k, c});
  if (it == components.end()) throw std::invalid_argument("NoiseModel: unknown component");
  return it->second;
}

NoiseModel build_noise_model(const AutocorrSet& acs, const DiagonalGaussian& g, const Partition& p,
                             double dt, int n_w) {
  NoiseModel nm;
  nm.dt = dt;
  nm.params = g.params;
  nm.modes = p.unresolved_pos();
  for (int k : nm.modes) {
    for (char c : {'r', 'i'}) {
      const auto it = acs.tables.find({k, c});
      if (it == acs.tables.end())
        throw std::invalid_argument("build_noise_model: missing autocorrelation for an unresolved mode");
      nm.components[{k, c}] = factor_component(it->second, dt, n_w);
    }
    nm.means[k] = g.mean(k);
  }
  return nm;
}

std::vector<double> simulate_component_path(const NoiseModel::Component& comp, double dt, double mean,
                                            std::size_t n_steps, RandomStream& rng) {
  const int n_w = comp.n_w;
  const double sd = std::sqrt(dt);
  std::vector<double> rho(n_steps + 1 + 2 * static_cast<std::size_t>(n_w));
  for (double& v : rho) v = rng.normal(0.0, sd);
  std::vector<double> x(n_steps + 1, mean);
  for (std::size_t j = 0; j <= n_steps; ++j) {
    double acc = 0.0;
    for (int i = -n_w; i <= n_w; ++i)
      acc += comp.weights[static_cast<std::size_t>(i + n_w)] * rho[static_cast<std::size_t>(static_cast<long>(j) + i + n_w)];
    x[j] += acc;
  }
  return x;
}

UnresolvedPaths simulate_unresolved_paths(const NoiseModel& nm, double horizon, std::uint64_t seed) {
  if (horizon <= 0.0) throw std::invalid_argument("simulate_unresolved_paths: horizon must be positive");
  RandomStream rng(seed);
  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(horizon / nm.dt - 1e-9));
  UnresolvedPaths paths;
  paths.dt = nm.dt;
  paths.modes = nm.modes;
  paths.values.assign(n_steps + 1, std::vector<Complex>(nm.modes.size()));
  for (std::size_t mi = 0; mi < nm.modes.size(); ++mi) {
    const int k = nm.modes[mi];
    const Complex mean = nm.means.at(k);
    const std::vector<double> re =
        simulate_component_path(nm.component(k, 'r'), nm.dt, mean.real(), n_steps, rng);
    const std::vector<double> im =
        simulate_component_path(nm.component(k, 'i'), nm.dt, mean.imag(), n_steps, rng);
    for (std::size_t j = 0; j <= n_steps; ++j) paths.values[j][mi] = Complex(re[j], im[j]);
  }
  return paths;
}

}  // namespace ksmz
