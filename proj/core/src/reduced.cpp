#include "ksmz/reduced.hpp"

#include <cmath>
#include <memory>
#include <optional>

namespace ksmz {

void ReducedRunConfig::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("ReducedRunConfig: dt must be positive");
  if (t_end <= 0.0) throw std::invalid_argument("ReducedRunConfig: t_end must be positive");
  if (t0 < 0.0) throw std::invalid_argument("ReducedRunConfig: t0 must be >= 0");
  const double ratio = sample_dt / dt;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9)
    throw std::invalid_argument("ReducedRunConfig: sample_dt must be an integer multiple of dt");
}

HistoryBuffer::HistoryBuffer(double dt, double span) : dt_(dt) {
  capacity_ = static_cast<std::size_t>(std::ceil(span / dt)) + 2;
}

void HistoryBuffer::push(double t, const std::vector<Complex>& positive_values) {
  buf_.emplace_back(t, positive_values);
  while (buf_.size() > capacity_) buf_.pop_front();
}

double HistoryBuffer::latest_time() const {
  if (buf_.empty()) throw std::logic_error("HistoryBuffer: empty");
  return buf_.back().first;
}

void HistoryBuffer::interpolate(double t_query, std::vector<Complex>& out) const {
  if (buf_.empty()) throw std::logic_error("HistoryBuffer: empty");
  const double t_front = buf_.front().first;
  const double pos = (t_query - t_front) / dt_;
  if (pos <= 0.0) {
    out = buf_.front().second;
    return;
  }
  const std::size_t i0 = static_cast<std::size_t>(pos);
  if (i0 + 1 >= buf_.size()) {
    out = buf_.back().second;
    return;
  }
  const double w = pos - static_cast<double>(i0);
  const std::vector<Complex>& a = buf_[i0].second;
  const std::vector<Complex>& b = buf_[i0 + 1].second;
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
}

namespace {

// Basis values at resolved positive-mode values: the resolved coordinates in
// partition order (linear kernel) or the Hermite set.
void eval_basis(const std::vector<Complex>& positive, const HermiteBasis* basis,
                std::vector<Complex>& out) {
  if (basis == nullptr) {
    const std::size_t half = positive.size();
    out.resize(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
      out[i] = positive[i];
      out[i + half] = std::conj(positive[i]);
    }
  } else {
    basis->values(ResolvedVec(basis->partition(), positive), out);
  }
}

Eigen::VectorXcd to_eigen(const std::vector<Complex>& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

struct IntegrandSample {
  double s = 0.0;
  Eigen::VectorXcd f;
};

Eigen::VectorXcd quadrature_sum(const std::vector<IntegrandSample>& samples,
                                ReducedRunConfig::Quadrature quad) {
  const Eigen::Index m = samples.front().f.size();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(m);
  const std::size_t n = samples.size();
  std::size_t i = 0;
  if (quad == ReducedRunConfig::Quadrature::Simpson) {
    // composite Simpson over equal-width interval pairs; leftover intervals
    // fall through to the trapezoid loop
    while (i + 2 < n) {
      const double h1 = samples[i + 1].s - samples[i].s;
      const double h2 = samples[i + 2].s - samples[i + 1].s;
      if (std::abs(h1 - h2) > 1e-12 * (h1 + h2)) break;
      acc += (h1 / 3.0) * (samples[i].f + 4.0 * samples[i + 1].f + samples[i + 2].f);
      i += 2;
    }
  }
  for (; i + 1 < n; ++i)
    acc += 0.5 * (samples[i + 1].s - samples[i].s) * (samples[i].f + samples[i + 1].f);
  return acc;
}

}  // namespace

Eigen::VectorXcd memory_integral(const HistoryBuffer& history, const std::vector<Complex>& current,
                                 double t, const MemoryKernel& kernel, const HermiteBasis* basis,
                                 ReducedRunConfig::Quadrature quadrature, double t0) {
  const double span = std::min(t, t0);
  const Eigen::Index m = kernel.K.front().rows();
  if (span <= 0.0) return Eigen::VectorXcd::Zero(m);
  if (kernel.spec.kind == ProjectionSpec::Kind::FiniteRank && basis == nullptr)
    throw std::invalid_argument("memory_integral: finite-rank kernel needs the Hermite basis");

  const double ds = kernel.ds;
  const int n_whole = static_cast<int>(std::floor(span / ds + 1e-9));

  std::vector<IntegrandSample> samples;
  samples.reserve(static_cast<std::size_t>(n_whole) + 2);
  std::vector<Complex> hist_vals, basis_vals;

  for (int gidx = 0; gidx <= n_whole; ++gidx) {
    const double lag = gidx * ds;
    if (gidx == 0) {
      eval_basis(current, basis, basis_vals);
    } else {
      history.interpolate(t - lag, hist_vals);
      eval_basis(hist_vals, basis, basis_vals);
    }
    samples.push_back({lag, kernel.K[static_cast<std::size_t>(gidx)] * to_eigen(basis_vals)});
  }
  if (span - n_whole * ds > 1e-12) {  // partial tail cell
    history.interpolate(t - span, hist_vals);
    eval_basis(hist_vals, basis, basis_vals);
    samples.push_back({span, kernel.at(span) * to_eigen(basis_vals)});
  }
  return quadrature_sum(samples, quadrature);
}

namespace {

// Shared fixed-step RK4 driver over the positive resolved modes.
template <class Rhs>
ReducedTrajectory rk4_reduced(const std::vector<Complex>& ic_positive, const Partition& p,
                              const ReducedRunConfig& cfg, Rhs&& rhs, HistoryBuffer* history,
                              std::uint64_t seed) {
  cfg.validate();
  const std::size_t half = p.resolved_pos.size();
  if (ic_positive.size() != half)
    throw std::invalid_argument("reduced run: one IC value per positive resolved mode expected");

  ReducedTrajectory out;
  out.modes = p.resolved_pos;
  out.seed = seed;
  const long sample_every = std::lround(cfg.sample_dt / cfg.dt);
  const long n_steps = std::lround(cfg.t_end / cfg.dt);

  std::vector<Complex> y = ic_positive;
  if (history != nullptr) history->push(0.0, y);
  out.times.push_back(0.0);
  out.values.push_back(y);

  std::vector<Complex> k1(half), k2(half), k3(half), k4(half), tmp(half);
  for (long step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    rhs(t, y, step, k1);
    for (std::size_t i = 0; i < half; ++i) tmp[i] = y[i] + 0.5 * cfg.dt * k1[i];
    rhs(t + 0.5 * cfg.dt, tmp, step, k2);
    for (std::size_t i = 0; i < half; ++i) tmp[i] = y[i] + 0.5 * cfg.dt * k2[i];
    rhs(t + 0.5 * cfg.dt, tmp, step, k3);
    for (std::size_t i = 0; i < half; ++i) tmp[i] = y[i] + cfg.dt * k3[i];
    rhs(t + cfg.dt, tmp, step, k4);
    for (std::size_t i = 0; i < half; ++i)
      y[i] += (cfg.dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    double e = 0.0;
    for (const Complex& v : y) e += std::norm(v);
    if (!std::isfinite(e) || e > cfg.blowup_energy)
      throw std::runtime_error("reduced run: energy blow-up at t = " + std::to_string(t + cfg.dt));

    const double t_new = static_cast<double>(step + 1) * cfg.dt;
    if (history != nullptr) history->push(t_new, y);
    if ((step + 1) % sample_every == 0) {
      out.times.push_back(t_new);
      out.values.push_back(y);
    }
  }
  return out;
}

}  // namespace

ReducedTrajectory run_galerkin(const std::vector<Complex>& ic_positive, const Partition& p,
                               const ReducedRunConfig& cfg, const SpectralParams& params) {
  Convolver conv(params);
  ModeState full(params);
  auto rhs = [&](double, const std::vector<Complex>& y, long, std::vector<Complex>& dy) {
    for (std::size_t i = 0; i < p.resolved_pos.size(); ++i) {
      const int k = p.resolved_pos[i];
      full.at(k, params) = y[i];
      full.at(-k, params) = std::conj(y[i]);
    }
    const RhsVector r = conv.rhs(full);
    for (std::size_t i = 0; i < p.resolved_pos.size(); ++i)
      dy[i] = r.values[static_cast<std::size_t>(params.index(p.resolved_pos[i]))];
  };
  return rk4_reduced(ic_positive, p, cfg, rhs, nullptr, cfg.seed);
}

namespace {

ReducedTrajectory run_realization_impl(const std::vector<Complex>& ic_positive, const MarkovianModel& mm,
                                       const MemoryKernel& kernel, const NoiseModel& nm,
                                       const ReducedRunConfig& cfg, bool delta_variant) {
  const Partition& p = mm.partition;
  const std::size_t half = p.resolved_pos.size();

  std::unique_ptr<HermiteBasis> basis;
  if (kernel.spec.kind == ProjectionSpec::Kind::FiniteRank)
    basis = std::make_unique<HermiteBasis>(kernel.spec, mm.density, p);

  UnresolvedPaths paths;
  if (cfg.use_noise) paths = simulate_unresolved_paths(nm, cfg.t_end + cfg.dt, cfg.seed);

  Eigen::MatrixXcd delta_weights;
  if (delta_variant && cfg.use_memory) delta_weights = kernel.integrated();

  HistoryBuffer history(cfg.dt, cfg.t0 + 2.0 * cfg.dt);
  HistoryBuffer* hist_ptr = (!delta_variant && cfg.use_memory) ? &history : nullptr;

  // equation rows of the kernel corresponding to positive resolved modes
  std::vector<int> eq_row(half);
  for (std::size_t i = 0; i < half; ++i) eq_row[i] = p.resolved_index(p.resolved_pos[i]);

  std::vector<Complex> basis_vals;

  auto rhs = [&](double t, const std::vector<Complex>& y, long step, std::vector<Complex>& dy) {
    const ResolvedVec hat(p, y);

    std::optional<UnresolvedVec> held;
    if (cfg.use_noise) {
      // sample-and-hold: all four stages of the step starting at step*dt see
      // the path value at that step's start
      const double t_step = static_cast<double>(step) * cfg.dt;
      const std::size_t j = std::min(static_cast<std::size_t>(std::floor(t_step / nm.dt + 1e-9)),
                                     paths.values.size() - 1);
      held.emplace(p, paths.values[j]);
    }

    Eigen::VectorXcd mem;
    if (cfg.use_memory) {
      if (delta_variant) {
        eval_basis(y, basis.get(), basis_vals);
        mem = delta_weights * to_eigen(basis_vals);
      } else {
        mem = memory_integral(history, y, t, kernel, basis.get(), cfg.quadrature, cfg.t0);
      }
    }

    for (std::size_t i = 0; i < half; ++i) {
      const int j = p.resolved_pos[i];
      Complex v = markovian_rhs(mm, hat, j);
      if (cfg.use_noise) v += noise_term_A(hat, *held, mm, j);
      if (cfg.use_memory) v += mem[eq_row[i]];
      dy[i] = v;
    }
  };

  return rk4_reduced(ic_positive, p, cfg, rhs, hist_ptr, cfg.seed);
}

}  // namespace

ReducedTrajectory run_op_realization(const std::vector<Complex>& ic_positive, const MarkovianModel& mm,
                                     const MemoryKernel& kernel, const NoiseModel& nm,
                                     const ReducedRunConfig& cfg) {
  return run_realization_impl(ic_positive, mm, kernel, nm, cfg, false);
}

ReducedTrajectory run_delta_realization(const std::vector<Complex>& ic_positive, const MarkovianModel& mm,
                                        const MemoryKernel& kernel, const NoiseModel& nm,
                                        const ReducedRunConfig& cfg) {
  return run_realization_impl(ic_positive, mm, kernel, nm, cfg, true);
}

ReducedTrajectory mean_trajectory(const std::vector<ReducedTrajectory>& members) {
  if (members.empty()) throw std::invalid_argument("mean_trajectory: empty ensemble");
  ReducedTrajectory out = members.front();
  for (std::size_t e = 1; e < members.size(); ++e) {
    const ReducedTrajectory& tr = members[e];
    if (tr.times.size() != out.times.size() || tr.modes != out.modes)
      throw std::invalid_argument("mean_trajectory: members not on a common grid");
    for (std::size_t ti = 0; ti < out.values.size(); ++ti)
      for (std::size_t mi = 0; mi < out.values[ti].size(); ++mi)
        out.values[ti][mi] += tr.values[ti][mi];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (auto& row : out.values)
    for (Complex& v : row) v *= inv;
  return out;
}

}  // namespace ksmz
