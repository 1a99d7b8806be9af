#ifndef KSMZ_IO_HPP
#define KSMZ_IO_HPP

#include <string>

#include "ksmz/density.hpp"
#include "ksmz/memory_kernel.hpp"
#include "ksmz/noise.hpp"
#include "ksmz/reduced.hpp"
#include "ksmz/sampling.hpp"

namespace ksmz {

// All files are CSV with full double precision (17 significant digits);
// metadata rides in leading '# key = value' lines.

/// `k,re,im`, one row per wavenumber, ordered -N/2 ... N/2-1.
void write_mode_state(const std::string& path, const ModeState& state, const SpectralParams& params);
ModeState read_mode_state(const std::string& path, const SpectralParams& params);

/// `t,k,re,im`.
void write_trajectory(const std::string& path, const Trajectory& traj, const SpectralParams& params);

/// `sample,k,re,im`.
void write_sample_set(const std::string& path, const SampleSet& set);
SampleSet read_sample_set(const std::string& path, const SpectralParams& params);

/// `k,component,mean,var,skew,flat`; a missing flatness prints as nan.
void write_moment_report(const std::string& path, const MomentReport& report);

/// `k,mu_re,mu_im,var`, positive wavenumbers only (negatives implied).
void write_density(const std::string& path, const DiagonalGaussian& g);
DiagonalGaussian read_density(const std::string& path, const SpectralParams& params);

/// `k,component,lag,R` over all tabulated components.
void write_autocorr(const std::string& path, const AutocorrSet& acs);
AutocorrSet read_autocorr(const std::string& path);

/// `k,component,tap_index,weight` plus the target R(0) per component.
void write_noise_model(const std::string& path, const NoiseModel& nm);
NoiseModel read_noise_model(const std::string& path, const DiagonalGaussian& g, const Partition& p);

/// `s,j,i,re,im` with j the signed equation wavenumber and i the basis index;
/// the metadata block pins projection kind, grid, n_mc, seed and basis labels.
void write_kernel(const std::string& path, const MemoryKernel& kernel);
MemoryKernel read_kernel(const std::string& path, const Partition& p);

/// `t,k,re,im,realization`; realization -1 denotes an ensemble mean.
void write_reduced_trajectory(const std::string& path, const ReducedTrajectory& traj,
                              long realization = -1);
ReducedTrajectory read_reduced_trajectory(const std::string& path);

}  // namespace ksmz

#endif
