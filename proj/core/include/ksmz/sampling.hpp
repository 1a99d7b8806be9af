#ifndef KSMZ_SAMPLING_HPP
#define KSMZ_SAMPLING_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ksmz/bdf.hpp"
#include "ksmz/types.hpp"

namespace ksmz {

/// Snapshots of the full system at the end of the burn-in, one per member.
struct SampleSet {
  SpectralParams params;
  std::vector<std::vector<Complex>> samples;  // full length-N coefficient vectors, time-stripped
  double burn_time = 0.0;
  std::uint64_t seed = 0;

  std::size_t n_samples() const { return samples.size(); }
};

/// Per-mode, per-component (re/im) standardized moments. Flatness is excess
/// kurtosis, so the Gaussian baseline is 0; it is absent when the component
/// variance vanishes.
struct MomentReport {
  struct Entry {
    int k = 0;
    char component = 'r';  // 'r' or 'i'
    double mean = 0.0;
    double var = 0.0;  // 1/n central moment, matching the MLE fit exactly
    double skew = 0.0;
    std::optional<double> flat;
  };
  std::vector<Entry> entries;
};

/// Uniform random initial condition: re/im of modes k = 1 ... N/2-1 each
/// uniform on [-1, 1], negatives by conjugation, u_0 = u_{-N/2} = 0.
ModeState draw_uniform_ic(std::uint64_t seed, const SpectralParams& params);

/// n_samples independent full-system integrations from independent uniform
/// ICs, each recorded at t = burn_time. Member i consumes the substream
/// stream_seed(seed, "sample-ic", i), so the set is reproducible and
/// independent of the job count. Any integrator failure aborts the whole
/// collection (a resampled member would bias the density).
SampleSet collect_samples(std::size_t n_samples, double burn_time, const BdfConfig& cfg,
                          const SpectralParams& params, std::uint64_t seed, int jobs = 1);

/// Standardized central moments per positive mode and component.
MomentReport sample_moments(const SampleSet& s);

/// Off-diagonal diagnostic: max_{i != j} |Cov_ij| / min_i Cov_ii over the
/// positive modes, with the 1/(n-1) covariance normalizer. Logged, not gated.
double covariance_offdiag_ratio(const SampleSet& s);

}  // namespace ksmz

#endif
