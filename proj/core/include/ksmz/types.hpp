#ifndef KSMZ_TYPES_HPP
#define KSMZ_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <vector>

namespace ksmz {

using Complex = std::complex<double>;

/// Parameters of the Fourier-Galerkin truncated KS system on [0, 2pi].
/// Wavenumbers run -N/2 ... N/2-1; modes k = 0 and k = -N/2 are pinned to
/// zero, leaving n = N-2 effective complex modes (conjugate pairs +-1 ... +-(N/2-1)).
struct SpectralParams {
  double nu = 0.085;
  int N = 24;

  SpectralParams() = default;
  SpectralParams(double nu_, int N_) : nu(nu_), N(N_) {
    if (N < 4 || N % 2 != 0) throw std::invalid_argument("SpectralParams: N must be even and >= 4");
    if (nu <= 0.0) throw std::invalid_argument("SpectralParams: nu must be positive");
  }

  int n() const { return N - 2; }                 // effective mode count
  int max_pos() const { return N / 2 - 1; }       // largest retained positive wavenumber
  int index(int k) const { return k + N / 2; }    // storage index of wavenumber k
  int wavenumber(int idx) const { return idx - N / 2; }
  bool in_range(int k) const { return k >= -N / 2 && k <= N / 2 - 1; }
};

/// Truncated Fourier state: full length-N complex vector indexed by wavenumber
/// (negatives stored redundantly so convolution indexing is direct).
struct ModeState {
  std::vector<Complex> coeffs;  // coeffs[params.index(k)] = u_k
  double time = 0.0;

  ModeState() = default;
  explicit ModeState(const SpectralParams& p, double t = 0.0)
      : coeffs(static_cast<std::size_t>(p.N), Complex{0.0, 0.0}), time(t) {}

  Complex& at(int k, const SpectralParams& p) { return coeffs[static_cast<std::size_t>(p.index(k))]; }
  const Complex& at(int k, const SpectralParams& p) const {
    return coeffs[static_cast<std::size_t>(p.index(k))];
  }
};

/// Right-hand side du_k/dt, same indexing as ModeState.
struct RhsVector {
  std::vector<Complex> values;
};

/// Dense-output samples of a full-system integration.
struct Trajectory {
  std::vector<ModeState> states;  // states[i].time is the sample time
};

}  // namespace ksmz

#endif
