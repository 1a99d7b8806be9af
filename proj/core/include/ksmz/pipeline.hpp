#ifndef KSMZ_PIPELINE_HPP
#define KSMZ_PIPELINE_HPP

#include <map>
#include <string>

#include "ksmz/config.hpp"
#include "ksmz/io.hpp"

namespace ksmz {

/// Everything one experiment needs, resolved from a config file. All knobs
/// carry the desk-scale defaults; the manifest records the resolved values.
struct ExperimentConfig {
  SpectralParams params;
  BdfConfig bdf;
  Partition partition;
  std::vector<Complex> ic_positive;  // per positive resolved mode

  std::uint64_t master_seed = 1;
  std::size_t n_samples = 10000;
  double burn_time = 5.0;
  std::size_t n_truth = 1000;
  std::size_t n_real = 1000;
  std::size_t n_autocorr = 10000;
  double autocorr_t_max = 2.0;  // longer than the memory window so the tap window sits strictly inside
  std::size_t n_kernel = 10000;

  ReducedRunConfig reduced;
  ProjectionSpec::Kind projection = ProjectionSpec::Kind::Linear;
  double kernel_ds = 0.01;
  int noise_window = -1;  // -1: pick the smallest window with |h| <= 1e-3 max|h| outside
  double compare_t_max = 3.0;

  std::string out_dir = "out";
  std::map<std::string, std::string> files;  // samples, density, autocorr, noise, kernel, truth

  static ExperimentConfig load(const Config& raw);
  std::string file(const std::string& name) const;
  std::string variant_name() const;
  std::string estimate_file(const std::string& variant) const;
};

ReducedRunConfig::Variant parse_variant(const std::string& name);
std::string variant_to_string(ReducedRunConfig::Variant v);

/// Restriction of a full trajectory to the resolved positive modes.
ReducedTrajectory restrict_to_resolved(const Trajectory& traj, const Partition& p);

/// Per-mode pointwise and time-averaged L2 errors of estimates against truth.
struct ErrorReport {
  struct VariantErrors {
    std::string name;
    std::map<int, double> mode_l2;              // time-averaged L2 per positive mode
    double total = 0.0;                         // sqrt(sum of per-mode squares)
    std::vector<std::vector<double>> pointwise; // [mode][time] |estimate - truth|
  };
  std::vector<double> times;
  std::vector<int> modes;
  std::vector<VariantErrors> variants;
  double horizon = 0.0;
  /// True when variants named "short-memory" and "galerkin" are both present
  /// and the short-memory error is smaller for every unstable resolved mode.
  bool ordering_checked = false;
  bool ordering_holds = true;
};

ErrorReport compare_trajectories(const ReducedTrajectory& truth,
                                 const std::vector<std::pair<std::string, ReducedTrajectory>>& estimates,
                                 double horizon, const SpectralParams& params);

// Pipeline commands. Each writes its outputs plus a manifest into out_dir and
// returns the in-memory result.
SampleSet cmd_sample(const ExperimentConfig& cfg, int jobs);
DiagonalGaussian cmd_fit_density(const ExperimentConfig& cfg);
AutocorrSet cmd_autocorr(const ExperimentConfig& cfg, int jobs);
NoiseModel cmd_noise_model(const ExperimentConfig& cfg);
MemoryKernel cmd_kernel(const ExperimentConfig& cfg, int jobs);
ReducedTrajectory cmd_truth(const ExperimentConfig& cfg, int jobs);
ReducedTrajectory cmd_estimate(const ExperimentConfig& cfg, ReducedRunConfig::Variant variant, int jobs);
ErrorReport cmd_compare(const ExperimentConfig& cfg, const std::string& truth_path,
                        const std::vector<std::pair<std::string, std::string>>& named_estimates);

}  // namespace ksmz

#endif
