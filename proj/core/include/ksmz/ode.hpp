#ifndef KSMZ_ODE_HPP
#define KSMZ_ODE_HPP

#include <Eigen/Dense>

#include "ksmz/spectral.hpp"
#include "ksmz/types.hpp"

namespace ksmz {

/// Autonomous ODE y' = f(y) over a real unknown vector. Implementations own
/// whatever scratch they need; one instance per thread.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;
  virtual int size() const = 0;
  virtual void eval(const Eigen::VectorXd& y, Eigen::VectorXd& dydt) = 0;
  virtual void jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& jac) = 0;
};

/// KS system over the independent real unknowns (re/im of positive modes).
class KsOde final : public OdeSystem {
 public:
  explicit KsOde(const SpectralParams& params);
  int size() const override { return packed_size(params_); }
  void eval(const Eigen::VectorXd& y, Eigen::VectorXd& dydt) override;
  void jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& jac) override;

  const SpectralParams& params() const { return params_; }
  ModeState to_state(const Eigen::VectorXd& y, double time = 0.0) const;
  Eigen::VectorXd from_state(const ModeState& state) const;

 private:
  SpectralParams params_;
  Convolver conv_;
  ModeState scratch_;
};

/// d R_k / d u_l over the independent real unknowns, from the analytic complex
/// blocks dR_k/du_l = -ik u_{k-l} + delta_{kl}(k^2 - nu k^4) and
/// dR_k/du_{-l} = -ik u_{k+l} with u_{-l} = conj(u_l) eliminated.
Eigen::MatrixXd ks_jacobian(const ModeState& state, const SpectralParams& params);

/// Classic fixed-step RK4, used as the cross-validation reference.
Eigen::VectorXd rk4_integrate(OdeSystem& sys, Eigen::VectorXd y, double t0, double t_end, double h);

}  // namespace ksmz

#endif
