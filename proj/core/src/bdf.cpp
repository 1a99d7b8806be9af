#include "ksmz/bdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksmz {

namespace {

constexpr int kMaxStepsPerJacobian = 20;

std::vector<double> bdf_ell(int q) {
  // Coefficients of Lambda(x) = prod_{i=1..q} (1 + x/i); l[0] = 1, l[1] = H_q.
  std::vector<double> l(static_cast<std::size_t>(q) + 1, 0.0);
  l[0] = 1.0;
  for (int i = 1; i <= q; ++i)
    for (int j = i; j >= 1; --j) l[static_cast<std::size_t>(j)] += l[static_cast<std::size_t>(j - 1)] / i;
  return l;
}

void pascal_predict(Eigen::MatrixXd& z, int q) {
  for (int k = 0; k < q; ++k)
    for (int j = q - 1; j >= k; --j) z.col(j) += z.col(j + 1);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

BdfIntegrator::BdfIntegrator(OdeSystem& sys, const Eigen::VectorXd& y0, double t0, const BdfConfig& cfg)
    : sys_(sys), cfg_(cfg) {
  cfg_.validate();
  fixed_step_ = (cfg_.dt_min == cfg_.dt_max);
  const int n = sys_.size();
  if (y0.size() != n) throw std::invalid_argument("BdfIntegrator: initial state size mismatch");
  ns_.t = t0;
  ns_.h = std::clamp(cfg_.dt_init, cfg_.dt_min, cfg_.dt_max);
  ns_.order = 1;
  ell_ = bdf_ell(1);
  ns_.z.resize(n, 2);
  ns_.z.col(0) = y0;
  Eigen::VectorXd f0(n);
  sys_.eval(y0, f0);
  ns_.z.col(1) = ns_.h * f0;
  y_ = y0;
  delta_ = Eigen::VectorXd::Zero(n);
  delta_prev_ = Eigen::VectorXd::Zero(n);
}

double BdfIntegrator::wrms(const Eigen::VectorXd& v) const {
  return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

void BdfIntegrator::rescale(double ratio) {
  ns_.h *= ratio;
  double r = 1.0;
  for (int j = 1; j <= ns_.order; ++j) {
    r *= ratio;
    ns_.z.col(j) *= r;
  }
}

void BdfIntegrator::set_order(int q) {
  const int old = ns_.order;
  if (q == old) return;
  if (q == old - 1) {
    ns_.z.conservativeResize(Eigen::NoChange, q + 1);
  } else if (q == old + 1) {
    // The correction estimates h^{q+1} y^{(q+1)}; the new scaled column is
    // that over (q+1)!.
    ns_.z.conservativeResize(Eigen::NoChange, q + 1);
    ns_.z.col(q) = delta_ / factorial(q);
  } else {
    ns_.z.conservativeResize(Eigen::NoChange, q + 1);
    for (int j = old + 1; j <= q; ++j) ns_.z.col(j).setZero();
  }
  ns_.order = q;
  ell_ = bdf_ell(q);
}

void BdfIntegrator::refresh_jacobian_matrix() {
  const double gamma = ns_.h / ell_[1];
  Eigen::MatrixXd m = -gamma * jac_;
  m.diagonal().array() += 1.0;
  lu_.compute(m);
  gamma_fact_ = gamma;
}

bool BdfIntegrator::newton_solve(const Eigen::VectorXd& pred0, const Eigen::VectorXd& rhs_const,
                                 Eigen::VectorXd& y) {
  const double gamma = ns_.h / ell_[1];
  double prev_norm = std::numeric_limits<double>::infinity();
  y = pred0;
  for (int it = 0; it < cfg_.newton_max_iter; ++it) {
    sys_.eval(y, f_);
    resid_ = y - gamma * f_ - rhs_const;
    dy_ = lu_.solve(-resid_);
    y += dy_;
    const double nrm = wrms(dy_);
    if (nrm <= cfg_.newton_tol) return true;
    if (it >= 1 && nrm > 2.0 * prev_norm) return false;  // diverging
    prev_norm = nrm;
  }
  return false;
}

BdfIntegrator::StepResult BdfIntegrator::step() {
  const int q = ns_.order;
  const int n = static_cast<int>(y_.size());
  const double gamma = ns_.h / ell_[1];

  z_pred_ = ns_.z;
  pascal_predict(z_pred_, q);
  const Eigen::VectorXd pred0 = z_pred_.col(0);
  const Eigen::VectorXd rhs_const = pred0 - z_pred_.col(1) / ell_[1];

  bool jac_at_pred = false;
  if (!jac_fresh_ || std::abs(gamma - gamma_fact_) > 1e-12 * gamma || ++jac_age_ > kMaxStepsPerJacobian) {
    sys_.jacobian(pred0, jac_);
    refresh_jacobian_matrix();
    jac_fresh_ = true;
    jac_age_ = 0;
    jac_at_pred = true;
  }

  Eigen::VectorXd y(n);
  bool converged = newton_solve(pred0, rhs_const, y);
  if (!converged && !jac_at_pred) {
    sys_.jacobian(pred0, jac_);
    refresh_jacobian_matrix();
    jac_age_ = 0;
    converged = newton_solve(pred0, rhs_const, y);
  }
  if (!converged) {
    if (fixed_step_ || ns_.h <= cfg_.dt_min * (1.0 + 1e-12))
      throw BdfFailure("BDF: Newton iteration failed at the minimum step size");
    ++n_rejected_;
    const double h_new = std::max(0.25 * ns_.h, cfg_.dt_min);
    rescale(h_new / ns_.h);
    jac_fresh_ = false;
    steps_at_current_ = 0;
    have_delta_prev_ = false;
    return {false, std::numeric_limits<double>::infinity()};
  }

  const Eigen::VectorXd corr = y - pred0;
  const double est = wrms(corr) / (ell_[1] * (q + 1));

  if (est <= cfg_.tol || fixed_step_) {
    delta_prev_ = delta_;
    have_delta_prev_ = steps_at_current_ >= 1;
    delta_ = corr;
    ns_.z = z_pred_;
    for (int j = 0; j <= q; ++j) ns_.z.col(j) += ell_[static_cast<std::size_t>(j)] * corr;
    ns_.t += ns_.h;
    y_ = ns_.z.col(0);
    ++n_accepted_;
    ++steps_at_current_;
    error_failures_ = 0;
    // With dt_min == dt_max the clamp keeps h fixed but the order may still
    // adapt up to max_order.
    consider_adjustment();
    return {true, est};
  }

  // error-test failure
  ++n_rejected_;
  ++error_failures_;
  double ratio;
  if (error_failures_ >= 3) {
    set_order(1);
    ratio = 0.1;
  } else {
    ratio = std::clamp(std::pow(0.9 * cfg_.tol / est, 1.0 / (q + 1)), 0.1, 0.5);
  }
  const double h_new = std::max(ns_.h * ratio, cfg_.dt_min);
  if (h_new >= ns_.h * (1.0 - 1e-12))
    throw BdfFailure("BDF: error test failed at the minimum step size");
  rescale(h_new / ns_.h);
  jac_fresh_ = false;
  steps_at_current_ = 0;
  have_delta_prev_ = false;
  return {false, est};
}

void BdfIntegrator::consider_adjustment() {
  const int q = ns_.order;
  if (steps_at_current_ < q + 1) return;
  constexpr double kTiny = 1e-300;
  const double safety = 0.9;

  const double est_q = wrms(delta_) / (ell_[1] * (q + 1));
  double best_r = std::pow(safety * cfg_.tol / std::max(est_q, kTiny), 1.0 / (q + 1));
  int best_q = q;

  if (q > 1) {
    const double l1_down = ell_[1] - 1.0 / q;
    const double est_down = wrms(ns_.z.col(q)) * factorial(q - 1) / l1_down;
    const double r = std::pow(safety * cfg_.tol / std::max(est_down, kTiny), 1.0 / q);
    if (r > best_r) {
      best_r = r;
      best_q = q - 1;
    }
  }
  if (q < cfg_.max_order && have_delta_prev_) {
    const double l1_up = ell_[1] + 1.0 / (q + 1);
    const double est_up = wrms(delta_ - delta_prev_) / (l1_up * (q + 2));
    const double r = std::pow(safety * cfg_.tol / std::max(est_up, kTiny), 1.0 / (q + 2));
    if (r > best_r) {
      best_r = r;
      best_q = q + 1;
    }
  }

  if (best_q == q && best_r < 1.1) return;  // not worth disturbing the history

  if (best_q != q) set_order(best_q);
  const double ratio = std::clamp(best_r, 0.2, 10.0);
  const double h_new = std::clamp(ns_.h * ratio, cfg_.dt_min, cfg_.dt_max);
  if (h_new != ns_.h) rescale(h_new / ns_.h);
  jac_fresh_ = false;
  steps_at_current_ = 0;
  have_delta_prev_ = false;
}

Eigen::VectorXd BdfIntegrator::interpolate(double t_query) const {
  const double x = (t_query - ns_.t) / ns_.h;
  Eigen::VectorXd acc = ns_.z.col(ns_.order);
  for (int j = ns_.order - 1; j >= 0; --j) acc = ns_.z.col(j) + x * acc;
  return acc;
}

void BdfIntegrator::advance_to(double t_end) {
  while (ns_.t < t_end) step();
}

Trajectory integrate_full(const ModeState& ic, double t_end, const BdfConfig& cfg,
                          const SpectralParams& params, double sample_dt) {
  if (t_end <= ic.time) throw std::invalid_argument("integrate_full: t_end must exceed ic.time");
  if (sample_dt <= 0.0) throw std::invalid_argument("integrate_full: sample_dt must be positive");
  KsOde sys(params);
  BdfIntegrator bdf(sys, sys.from_state(ic), ic.time, cfg);

  Trajectory out;
  ModeState first = ic;
  out.states.push_back(first);
  long next_i = 1;
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end));
  while (bdf.state().t < t_end) {
    const auto res = bdf.step();
    if (!res.accepted) continue;
    for (;;) {
      const double next_t = ic.time + static_cast<double>(next_i) * sample_dt;
      if (next_t > bdf.state().t + slack || next_t > t_end + slack) break;
      out.states.push_back(sys.to_state(bdf.interpolate(std::min(next_t, bdf.state().t)), next_t));
      ++next_i;
    }
  }
  return out;
}

ModeState integrate_to(const ModeState& ic, double t_end, const BdfConfig& cfg, const SpectralParams& params) {
  if (t_end == ic.time) return ic;
  if (t_end < ic.time) throw std::invalid_argument("integrate_to: t_end must be >= ic.time");
  KsOde sys(params);
  BdfIntegrator bdf(sys, sys.from_state(ic), ic.time, cfg);
  bdf.advance_to(t_end);
  return sys.to_state(bdf.interpolate(t_end), t_end);
}

}  // namespace ksmz
