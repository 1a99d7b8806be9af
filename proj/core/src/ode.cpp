#include "ksmz/ode.hpp"

namespace ksmz {

KsOde::KsOde(const SpectralParams& params) : params_(params), conv_(params), scratch_(params) {}

ModeState KsOde::to_state(const Eigen::VectorXd& y, double time) const {
  ModeState s(params_, time);
  for (int k = 1; k <= params_.max_pos(); ++k) {
    const Complex u(y[2 * (k - 1)], y[2 * (k - 1) + 1]);
    s.at(k, params_) = u;
    s.at(-k, params_) = std::conj(u);
  }
  return s;
}

Eigen::VectorXd KsOde::from_state(const ModeState& state) const {
  Eigen::VectorXd y(size());
  for (int k = 1; k <= params_.max_pos(); ++k) {
    const Complex u = state.at(k, params_);
    y[2 * (k - 1)] = u.real();
    y[2 * (k - 1) + 1] = u.imag();
  }
  return y;
}

void KsOde::eval(const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
  for (int k = 1; k <= params_.max_pos(); ++k) {
    const Complex u(y[2 * (k - 1)], y[2 * (k - 1) + 1]);
    scratch_.at(k, params_) = u;
    scratch_.at(-k, params_) = std::conj(u);
  }
  const RhsVector r = conv_.rhs(scratch_);
  dydt.resize(size());
  for (int k = 1; k <= params_.max_pos(); ++k) {
    const Complex rk = r.values[static_cast<std::size_t>(params_.index(k))];
    dydt[2 * (k - 1)] = rk.real();
    dydt[2 * (k - 1) + 1] = rk.imag();
  }
}

void KsOde::jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& jac) {
  jac = ks_jacobian(to_state(y), params_);
}

Eigen::MatrixXd ks_jacobian(const ModeState& state, const SpectralParams& params) {
  const int P = params.max_pos();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * P, 2 * P);
  for (int k = 1; k <= P; ++k) {
    for (int l = 1; l <= P; ++l) {
      // dR_k/du_l and dR_k/du_{-l}; the convolution contributes both orderings,
      // hence -ik u_{k-l} rather than -(ik/2) 2 u_{k-l} written out.
      Complex a = Complex(0.0, -static_cast<double>(k)) * state.at(k - l, params);
      if (k == l) a += linear_growth_rate(k, params.nu);
      Complex b{0.0, 0.0};
      if (params.in_range(k + l)) b = Complex(0.0, -static_cast<double>(k)) * state.at(k + l, params);
      const int r = 2 * (k - 1);
      const int c = 2 * (l - 1);
      jac(r, c) = (a + b).real();
      jac(r, c + 1) = (b - a).imag();
      jac(r + 1, c) = (a + b).imag();
      jac(r + 1, c + 1) = (a - b).real();
    }
  }
  return jac;
}

Eigen::VectorXd rk4_integrate(OdeSystem& sys, Eigen::VectorXd y, double t0, double t_end, double h) {
  if (h <= 0.0) throw std::invalid_argument("rk4_integrate: h must be positive");
  Eigen::VectorXd k1, k2, k3, k4, tmp;
  auto step = [&](double dt) {
    sys.eval(y, k1);
    tmp = y + 0.5 * dt * k1;
    sys.eval(tmp, k2);
    tmp = y + 0.5 * dt * k2;
    sys.eval(tmp, k3);
    tmp = y + dt * k3;
    sys.eval(tmp, k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  const double span = t_end - t0;
  const long n_full = static_cast<long>(std::floor(span / h + 1e-9));
  for (long i = 0; i < n_full; ++i) step(h);
  const double rem = span - static_cast<double>(n_full) * h;
  if (rem > 1e-12 * std::max(1.0, std::abs(t_end))) step(rem);
  return y;
}

}  // namespace ksmz
