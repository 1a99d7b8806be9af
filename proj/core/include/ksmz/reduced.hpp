#ifndef KSMZ_REDUCED_HPP
#define KSMZ_REDUCED_HPP

#include <cstdint>
#include <deque>

#include "ksmz/memory_kernel.hpp"
#include "ksmz/noise.hpp"

namespace ksmz {

struct ReducedRunConfig {
  enum class Quadrature { Trapezoid, Simpson };
  enum class Variant { Galerkin, ShortMemory, Delta };

  double dt = 1e-3;       // fixed RK4 step
  double t_end = 5.0;
  double t0 = 1.0;        // memory window
  Quadrature quadrature = Quadrature::Simpson;
  Variant variant = Variant::ShortMemory;
  std::uint64_t seed = 0;
  double sample_dt = 0.05;
  bool use_noise = true;
  bool use_memory = true;
  double blowup_energy = 1e6;

  void validate() const;
};

/// Sampled resolved positive-mode values of one realization; negative modes
/// are conjugates by construction.
struct ReducedTrajectory {
  std::vector<int> modes;  // positive resolved wavenumbers
  std::vector<double> times;
  std::vector<std::vector<Complex>> values;  // values[time][mode]
  std::uint64_t seed = 0;
};

/// Ring of resolved-mode vectors at the last ceil(span/dt)+2 accepted steps,
/// with linear interpolation between entries.
class HistoryBuffer {
 public:
  HistoryBuffer(double dt, double span);
  void push(double t, const std::vector<Complex>& positive_values);
  void interpolate(double t_query, std::vector<Complex>& out) const;
  double latest_time() const;
  std::size_t size() const { return buf_.size(); }

 private:
  double dt_;
  std::size_t capacity_;
  std::deque<std::pair<double, std::vector<Complex>>> buf_;
};

/// Truncated memory integral for every resolved equation:
/// int_0^{min(t, t0)} sum_i K_{j,i}(s) basis_i(u_hat(t - s)) ds
/// by the configured quadrature on the kernel grid. The lag-0 basis value
/// comes from `current` (the integrand touches the state being stepped);
/// older values come from the history buffer. `basis` must be non-null for a
/// finite-rank kernel.
Eigen::VectorXcd memory_integral(const HistoryBuffer& history, const std::vector<Complex>& current,
                                 double t, const MemoryKernel& kernel, const HermiteBasis* basis,
                                 ReducedRunConfig::Quadrature quadrature, double t0);

/// RK4 on the resolved modes with every unresolved mode pinned to zero.
ReducedTrajectory run_galerkin(const std::vector<Complex>& ic_positive, const Partition& p,
                               const ReducedRunConfig& cfg, const SpectralParams& params);

/// One realization of the short-memory equations: Markovian term + noise
/// (moving-average unresolved paths, sampled-and-held per RK4 step) + memory
/// integral over the history buffer.
ReducedTrajectory run_op_realization(const std::vector<Complex>& ic_positive, const MarkovianModel& mm,
                                     const MemoryKernel& kernel, const NoiseModel& nm,
                                     const ReducedRunConfig& cfg);

/// Delta-function variant: the memory integral collapses to
/// sum_i [int_0^{t0} K_{j,i}(s) ds] basis_i(u_hat(t)); the system is a random
/// ODE with no history.
ReducedTrajectory run_delta_realization(const std::vector<Complex>& ic_positive, const MarkovianModel& mm,
                                        const MemoryKernel& kernel, const NoiseModel& nm,
                                        const ReducedRunConfig& cfg);

/// Pointwise mean of realizations sharing one grid.
ReducedTrajectory mean_trajectory(const std::vector<ReducedTrajectory>& members);

}  // namespace ksmz

#endif
