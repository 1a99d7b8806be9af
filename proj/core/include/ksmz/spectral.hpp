#ifndef KSMZ_SPECTRAL_HPP
#define KSMZ_SPECTRAL_HPP

#include <memory>
#include <vector>

#include "ksmz/types.hpp"

namespace ksmz {

/// Linear growth rate of mode k: k^2 - nu k^4.
double linear_growth_rate(int k, double nu);

/// Energy E = (1/2) sum_k |u_k|^2 (Parseval form of (1/4pi) \int v^2 dx).
double energy(const ModeState& state);

/// Zeroes modes k = 0 and k = -N/2 and overwrites every negative mode with the
/// conjugate of its positive partner. Throws if raw.size() != N.
ModeState enforce_reality(const std::vector<Complex>& raw, const SpectralParams& params, double time = 0.0);

/// Dealiased quadratic convolution and the KS right-hand side.
///
/// Owns FFTW buffers/plans for the 3/2-rule padded transforms (M = 3N/2 real
/// space points). Transform convention: synthesis (spectral -> real) is
/// unnormalized, analysis (real -> spectral) carries 1/M; with that pairing
/// the convolution S_k = sum_{k'} u_{k'} u_{k-k'} comes out with no extra
/// factors. One instance per thread; all methods are deterministic.
class Convolver {
 public:
  explicit Convolver(const SpectralParams& params);
  ~Convolver();
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  const SpectralParams& params() const { return params_; }

  /// S_k = sum_{k'=-N/2}^{N/2-1} u_{k'} u_{k-k'}, free of aliasing error.
  std::vector<Complex> convolve(const ModeState& state);

  /// R_k = -(ik/2) S_k + (k^2 - nu k^4) u_k, with R_0 = R_{-N/2} = 0.
  RhsVector rhs(const ModeState& state);

  /// Real-space field v(x_j) = sum_k u_k e^{i k x_j} on the padded grid.
  std::vector<Complex> real_space_field(const ModeState& state);

 private:
  SpectralParams params_;
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

/// One-shot wrappers (construct a Convolver internally; fine outside hot loops).
std::vector<Complex> convolve_dealiased(const ModeState& state, const SpectralParams& params);
RhsVector ks_rhs(const ModeState& state, const SpectralParams& params);

// ---- independent real unknowns ------------------------------------------
// The integrators work on y in R^{N-2}: y[2(k-1)] = Re u_k, y[2(k-1)+1] = Im u_k
// for k = 1 ... N/2-1. Negative modes are reconstructed by conjugation, so the
// reality constraint is eliminated rather than projected.

int packed_size(const SpectralParams& params);
std::vector<double> pack_state(const ModeState& state, const SpectralParams& params);
ModeState unpack_state(const std::vector<double>& y, const SpectralParams& params, double time = 0.0);

}  // namespace ksmz

#endif
