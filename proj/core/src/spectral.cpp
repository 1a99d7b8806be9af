#include "ksmz/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace ksmz {

namespace {
// FFTW's planner is not thread-safe; plan creation/destruction is serialized.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

double linear_growth_rate(int k, double nu) {
  const double k2 = static_cast<double>(k) * k;
  return k2 - nu * k2 * k2;
}

double energy(const ModeState& state) {
  double sum = 0.0;
  for (const Complex& u : state.coeffs) sum += std::norm(u);
  return 0.5 * sum;
}

ModeState enforce_reality(const std::vector<Complex>& raw, const SpectralParams& params, double time) {
  if (static_cast<int>(raw.size()) != params.N)
    throw std::invalid_argument("enforce_reality: input length does not match N");
  ModeState out(params, time);
  for (int k = 1; k <= params.max_pos(); ++k) {
    const Complex uk = raw[static_cast<std::size_t>(params.index(k))];
    out.at(k, params) = uk;
    out.at(-k, params) = std::conj(uk);
  }
  // k = 0 and k = -N/2 stay zero.
  return out;
}

struct Convolver::Fft {
  int M = 0;
  fftw_complex* buf = nullptr;
  fftw_plan synthesis = nullptr;  // spectral -> real, unnormalized, e^{+ikx}
  fftw_plan analysis = nullptr;   // real -> spectral, carries 1/M, e^{-ikx}
};

Convolver::Convolver(const SpectralParams& params) : params_(params), fft_(std::make_unique<Fft>()) {
  fft_->M = 3 * params.N / 2;  // exact dealiasing size for a quadratic term
  fft_->buf = fftw_alloc_complex(static_cast<std::size_t>(fft_->M));
  std::lock_guard<std::mutex> lock(planner_mutex());
  fft_->synthesis = fftw_plan_dft_1d(fft_->M, fft_->buf, fft_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fft_->analysis = fftw_plan_dft_1d(fft_->M, fft_->buf, fft_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
}

Convolver::~Convolver() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(fft_->synthesis);
  fftw_destroy_plan(fft_->analysis);
  fftw_free(fft_->buf);
}

namespace {
inline int padded_slot(int k, int M) { return k >= 0 ? k : M + k; }
}  // namespace

std::vector<Complex> Convolver::real_space_field(const ModeState& state) {
  const int M = fft_->M;
  for (int i = 0; i < M; ++i) fft_->buf[i][0] = fft_->buf[i][1] = 0.0;
  for (int k = -params_.N / 2; k <= params_.N / 2 - 1; ++k) {
    const Complex u = state.at(k, params_);
    const int slot = padded_slot(k, M);
    fft_->buf[slot][0] = u.real();
    fft_->buf[slot][1] = u.imag();
  }
  fftw_execute(fft_->synthesis);
  std::vector<Complex> field(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) field[static_cast<std::size_t>(i)] = Complex(fft_->buf[i][0], fft_->buf[i][1]);
  return field;
}

std::vector<Complex> Convolver::convolve(const ModeState& state) {
  const int M = fft_->M;
  std::vector<Complex> field = real_space_field(state);
  for (int i = 0; i < M; ++i) {
    const Complex w = field[static_cast<std::size_t>(i)] * field[static_cast<std::size_t>(i)];
    fft_->buf[i][0] = w.real();
    fft_->buf[i][1] = w.imag();
  }
  fftw_execute(fft_->analysis);
  std::vector<Complex> conv(static_cast<std::size_t>(params_.N));
  const double inv_m = 1.0 / M;
  for (int k = -params_.N / 2; k <= params_.N / 2 - 1; ++k) {
    const int slot = padded_slot(k, M);
    conv[static_cast<std::size_t>(params_.index(k))] =
        Complex(fft_->buf[slot][0], fft_->buf[slot][1]) * inv_m;
  }
  return conv;
}

RhsVector Convolver::rhs(const ModeState& state) {
  std::vector<Complex> conv = convolve(state);
  RhsVector out;
  out.values.assign(static_cast<std::size_t>(params_.N), Complex{0.0, 0.0});
  for (int k = -params_.N / 2; k <= params_.N / 2 - 1; ++k) {
    if (k == 0 || k == -params_.N / 2) continue;  // pinned modes do not move
    const std::size_t i = static_cast<std::size_t>(params_.index(k));
    out.values[i] = Complex(0.0, -0.5 * k) * conv[i] + linear_growth_rate(k, params_.nu) * state.coeffs[i];
  }
  return out;
}

std::vector<Complex> convolve_dealiased(const ModeState& state, const SpectralParams& params) {
  Convolver c(params);
  return c.convolve(state);
}

RhsVector ks_rhs(const ModeState& state, const SpectralParams& params) {
  Convolver c(params);
  return c.rhs(state);
}

int packed_size(const SpectralParams& params) { return params.N - 2; }

std::vector<double> pack_state(const ModeState& state, const SpectralParams& params) {
  std::vector<double> y(static_cast<std::size_t>(packed_size(params)));
  for (int k = 1; k <= params.max_pos(); ++k) {
    const Complex u = state.at(k, params);
    y[static_cast<std::size_t>(2 * (k - 1))] = u.real();
    y[static_cast<std::size_t>(2 * (k - 1) + 1)] = u.imag();
  }
  return y;
}

ModeState unpack_state(const std::vector<double>& y, const SpectralParams& params, double time) {
  if (static_cast<int>(y.size()) != packed_size(params))
    throw std::invalid_argument("unpack_state: length does not match 2(N/2-1)");
  ModeState state(params, time);
  for (int k = 1; k <= params.max_pos(); ++k) {
    const Complex u(y[static_cast<std::size_t>(2 * (k - 1))], y[static_cast<std::size_t>(2 * (k - 1) + 1)]);
    state.at(k, params) = u;
    state.at(-k, params) = std::conj(u);
  }
  return state;
}

}  // namespace ksmz
