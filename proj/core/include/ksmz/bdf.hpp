#ifndef KSMZ_BDF_HPP
#define KSMZ_BDF_HPP

#include <Eigen/Dense>
#include <stdexcept>

#include "ksmz/ode.hpp"
#include "ksmz/types.hpp"

namespace ksmz {

struct BdfConfig {
  double tol = 1e-7;        // per-step local error tolerance (RMS norm)
  int max_order = 5;        // BDF order cap; order 6 is weakly stable and avoided
  double dt_init = 1e-6;
  double dt_min = 1e-12;
  double dt_max = 1.0;
  double newton_tol = 1e-8;  // harness default: tol / 10
  int newton_max_iter = 8;

  void validate() const {
    if (tol <= 0.0) throw std::invalid_argument("BdfConfig: tol must be positive");
    if (max_order < 1 || max_order > 5) throw std::invalid_argument("BdfConfig: max_order must be in 1..5");
    if (!(dt_min <= dt_init && dt_init <= dt_max)) throw std::invalid_argument("BdfConfig: need dt_min <= dt_init <= dt_max");
  }
};

/// Scaled-derivative (Nordsieck) history: column j holds h^j y^(j) / j!.
struct NordsieckState {
  Eigen::MatrixXd z;
  double h = 0.0;
  int order = 1;
  double t = 0.0;
};

/// Raised when the step size would have to drop below dt_min or Newton cannot
/// be salvaged at the minimum step.
struct BdfFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Variable-step, variable-order BDF with a Newton inner iteration.
///
/// Fixed-coefficient formulation: the BDF corrector coefficients l_j come from
/// Lambda(x) = prod_{i=1..q} (1 + x/i), and any step-size change rescales the
/// Nordsieck columns (z_j *= r^j). Per step: predict with the Pascal matrix,
/// solve y - (h/l_1) f(y) = y_pred - z1_pred/l_1 by Newton, correct
/// z_j += l_j (y - y_pred), and test |y - y_pred|_rms / (l_1 (q+1)) <= tol.
/// Order changes compare error estimates at q-1, q, q+1 and the step factor
/// follows (0.9 tol / est)^(1/(order+1)).
///
/// dt_min == dt_max degenerates to a fixed-step method: the controller is
/// inert and every Newton-converged step is accepted.
class BdfIntegrator {
 public:
  BdfIntegrator(OdeSystem& sys, const Eigen::VectorXd& y0, double t0, const BdfConfig& cfg);

  struct StepResult {
    bool accepted = false;
    double error_estimate = 0.0;
  };

  /// One step attempt. On acceptance t advances by h; on rejection the
  /// solution is unchanged and h has been reduced for the retry.
  StepResult step();

  /// Steps until t >= t_end (dense output covers the overshoot).
  void advance_to(double t_end);

  /// Nordsieck polynomial evaluation for t_query in [t - h_last, t].
  Eigen::VectorXd interpolate(double t_query) const;

  const Eigen::VectorXd& current() const { return y_; }
  const NordsieckState& state() const { return ns_; }
  long accepted_steps() const { return n_accepted_; }
  long rejected_steps() const { return n_rejected_; }

 private:
  void rescale(double ratio);
  void set_order(int q);
  void refresh_jacobian_matrix();
  bool newton_solve(const Eigen::VectorXd& pred0, const Eigen::VectorXd& rhs_const, Eigen::VectorXd& y);
  double wrms(const Eigen::VectorXd& v) const;
  void consider_adjustment();

  OdeSystem& sys_;
  BdfConfig cfg_;
  bool fixed_step_ = false;
  NordsieckState ns_;
  Eigen::VectorXd y_;        // current solution (z column 0)
  std::vector<double> ell_;  // corrector coefficients for the current order

  Eigen::MatrixXd jac_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;  // I - gamma J
  double gamma_fact_ = -1.0;                 // gamma baked into lu_
  bool jac_fresh_ = false;
  int jac_age_ = 0;  // accepted steps since the Jacobian was evaluated

  Eigen::VectorXd delta_;       // last accepted correction
  Eigen::VectorXd delta_prev_;  // correction one accepted step earlier
  bool have_delta_prev_ = false;
  int steps_at_current_ = 0;  // accepted steps since last h/order change
  int error_failures_ = 0;
  long n_accepted_ = 0;
  long n_rejected_ = 0;

  // scratch
  Eigen::VectorXd f_, resid_, dy_;
  Eigen::MatrixXd z_pred_;
};

/// Integrates the full KS system from `ic` to t_end, with dense output at
/// ic.time + i * sample_dt (including i = 0). Every emitted state satisfies
/// the reality constraints by construction.
Trajectory integrate_full(const ModeState& ic, double t_end, const BdfConfig& cfg,
                          const SpectralParams& params, double sample_dt);

/// Same, but only the final state at t_end.
ModeState integrate_to(const ModeState& ic, double t_end, const BdfConfig& cfg, const SpectralParams& params);

}  // namespace ksmz

#endif
