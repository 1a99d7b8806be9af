#ifndef KSMZ_NOISE_HPP
#define KSMZ_NOISE_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "ksmz/density.hpp"
#include "ksmz/types.hpp"

namespace ksmz {

/// Autocorrelation R(tau) of one real component on a uniform lag grid.
struct AutocorrTable {
  double dtau = 0.0;
  std::vector<double> r;  // r[l] = R(l * dtau), l = 0 ... L
  bool low_ensemble_warning = false;
};

/// Per-component autocorrelation tables for the unresolved modes, keyed by
/// (positive wavenumber, component 'r'/'i').
struct AutocorrSet {
  double dtau = 0.0;
  std::map<std::pair<int, char>, AutocorrTable> tables;
};

/// Ensemble autocorrelation of a single real series against its value at the
/// initial time, centered on `mean` (the stationary reference from the fitted
/// density): R(l) = avg_e (x_e(l) - mean)(x_e(0) - mean).
AutocorrTable autocorrelation_from_series(const std::vector<std::vector<double>>& series, double mean,
                                          double dtau);

/// Autocorrelation of mode k (both components) from an ensemble of full
/// trajectories whose ICs were drawn from the fitted density. Fewer than 100
/// trajectories sets the warning flag.
std::pair<AutocorrTable, AutocorrTable> estimate_autocorrelation(const std::vector<Trajectory>& ensemble,
                                                                 int k, const DiagonalGaussian& g);

/// Moving-average representation of the unresolved modes: per positive mode,
/// per component, real weights h(t_i) for |i| <= n_w with increment variance
/// dt, from the square root of the (clipped) spectral density of R.
struct NoiseModel {
  struct Component {
    std::vector<double> weights;  // index 0 <-> tap -n_w, size 2 n_w + 1
    int n_w = 0;
    double r0 = 0.0;  // target R(0), kept for diagnostics
  };
  double dt = 0.0;
  SpectralParams params;
  std::vector<int> modes;                        // positive unresolved wavenumbers
  std::map<std::pair<int, char>, Component> components;
  std::map<int, Complex> means;                  // density means of the modes

  const Component& component(int k, char c) const;
};

/// Spectral factorization of one component: phi = DFT of the symmetrized R,
/// clipped at 0, weights = inverse transform of sqrt(phi/dt), truncated to the
/// window. n_w < 0 selects the window automatically (smallest window keeping
/// every discarded |h| <= 1e-3 max|h|).
NoiseModel::Component factor_component(const AutocorrTable& r, double dt, int n_w = -1);

/// Assembles the model for every unresolved mode of the partition.
NoiseModel build_noise_model(const AutocorrSet& acs, const DiagonalGaussian& g, const Partition& p,
                             double dt, int n_w = -1);

/// One realization of all unresolved-mode paths on t_j = j dt, j = 0 ... n_steps.
/// Each component is an independent moving average of iid Normal(0, dt)
/// increments shifted by the mode mean.
struct UnresolvedPaths {
  double dt = 0.0;
  std::vector<int> modes;                      // positive unresolved wavenumbers
  std::vector<std::vector<Complex>> values;    // values[j][mode_index]
  Complex value(std::size_t j, std::size_t mode_index) const { return values[j][mode_index]; }
};

UnresolvedPaths simulate_unresolved_paths(const NoiseModel& nm, double horizon, std::uint64_t seed);

/// Single-component path, for the round-trip oracles.
std::vector<double> simulate_component_path(const NoiseModel::Component& comp, double dt, double mean,
                                            std::size_t n_steps, RandomStream& rng);

}  // namespace ksmz

#endif
