#ifndef KSMZ_DENSITY_HPP
#define KSMZ_DENSITY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ksmz/rng.hpp"
#include "ksmz/sampling.hpp"
#include "ksmz/types.hpp"

namespace ksmz {

/// Density ordering over the n = N-2 effective modes: positive wavenumbers
/// 1 ... n/2 first, then negatives -1 ... -n/2.
int density_index(const SpectralParams& params, int k);
int density_wavenumber(const SpectralParams& params, int i);

/// Reality-constrained diagonal complex Gaussian over the n = N-2 effective
/// modes, in density ordering. Constraints mu_{i+d/2} = conj(mu_i) and
/// a_{i+d/2} = a_i hold by construction. Convention: E|w - mu|^2 = a_i with
/// independent re/im parts of variance a_i/2 each.
struct DiagonalGaussian {
  SpectralParams params;
  std::vector<Complex> mu;  // length d = n
  std::vector<double> a;    // complex variances, length d

  DiagonalGaussian() = default;
  /// Builds from positive-half statistics (index 0 <-> k = 1).
  DiagonalGaussian(const SpectralParams& p, std::vector<Complex> mu_pos, std::vector<double> a_pos);

  int d() const { return params.n(); }
  int density_index(int k) const { return ksmz::density_index(params, k); }
  int wavenumber(int i) const { return ksmz::density_wavenumber(params, i); }
  const Complex& mean(int k) const { return mu[static_cast<std::size_t>(density_index(k))]; }
  double variance(int k) const { return a[static_cast<std::size_t>(density_index(k))]; }

  /// Draws a full state (every mode from its marginal), conjugate-filled.
  ModeState draw_full(RandomStream& rng) const;
};

/// Conjugate-closed split of the n modes into resolved and unresolved.
/// Partition ordering: positive resolved wavenumbers ascending, then their
/// negatives in the same relative order (m entries in total).
struct Partition {
  SpectralParams params;
  std::vector<int> resolved_pos;  // sorted positive wavenumbers

  Partition() = default;
  Partition(const SpectralParams& p, std::vector<int> resolved_positive);

  int m() const { return 2 * static_cast<int>(resolved_pos.size()); }
  bool is_resolved(int k) const;
  const std::vector<int>& resolved() const { return resolved_signed_; }      // partition ordering
  const std::vector<int>& unresolved() const { return unresolved_signed_; }  // positives then negatives
  const std::vector<int>& unresolved_pos() const { return unresolved_pos_; }
  int resolved_index(int k) const;  // position of wavenumber k in resolved()

  /// m x n selection matrix G with G u = u_resolved (density ordering on columns).
  Eigen::MatrixXcd selection_matrix() const;

 private:
  std::vector<int> resolved_signed_;
  std::vector<int> unresolved_signed_;
  std::vector<int> unresolved_pos_;
};

Partition make_set1(const SpectralParams& params);  // all linearly unstable modes resolved
Partition make_set2(const SpectralParams& params);  // modes +-1 moved to the unresolved set

/// E[u_i | u_hat] = sum_k Q_ik u_hat_k + c_i (rows in density ordering,
/// columns in partition ordering).
struct ConditionalAffine {
  Eigen::MatrixXcd Q;  // n x m
  Eigen::VectorXcd c;  // n
};

/// V = C - Q G C, the conditional covariance Cov[u_i, u_j^*| u_hat].
struct ConditionalCov {
  Eigen::MatrixXcd V;  // n x n
};

/// Maximum-likelihood fit: mu_i = (1/n) sum_j w_ji, a_i = (1/n) sum_j |w_ji - mu_i|^2,
/// computed from positive-wavenumber statistics so the conjugate-pair
/// constraints hold exactly. Throws on a zero variance.
DiagonalGaussian fit_diagonal_gaussian(const SampleSet& s);

/// Resolved coordinates set exactly to `resolved_values` (partition ordering,
/// conjugate-consistent); each unresolved positive mode drawn with independent
/// re/im ~ Normal(Re/Im mu_i, a_i/2), negatives by conjugation.
ModeState sample_conditional(const DiagonalGaussian& g, const Partition& p,
                             const std::vector<Complex>& resolved_values, RandomStream& rng);

/// Closed form for the diagonal density: resolved rows select exactly,
/// unresolved rows are zero with c_i = mu_i.
ConditionalAffine conditional_affine(const DiagonalGaussian& g, const Partition& p);

/// General-covariance path, Q = (C G*)(G C G*)^{-1}, c = mu - Q G mu.
/// Exercised by the injected-correlation oracle tests; the production path
/// above is the diagonal special case.
ConditionalAffine conditional_affine_general(const Eigen::MatrixXcd& C, const Eigen::VectorXcd& mu,
                                             const Eigen::MatrixXcd& G);

ConditionalCov conditional_covariance(const DiagonalGaussian& g, const Partition& p);
ConditionalCov conditional_covariance_general(const Eigen::MatrixXcd& C, const Eigen::MatrixXcd& G);

/// A factor u_k or conj(u_k) inside a conditional Wick moment.
struct WickFactor {
  int k = 0;           // signed wavenumber, must be unresolved
  bool conjugated = false;
};

/// Conditional moment E[prod_p (w_p - E[w_p|u_hat]) | u_hat] of centered
/// unresolved factors: 0 for odd P, the sum over pairings of conditional
/// covariances for even P. P is capped at 8.
Complex wick_moment(const DiagonalGaussian& g, const Partition& p, const std::vector<WickFactor>& factors);

}  // namespace ksmz

#endif
