#ifndef KSMZ_MEMORY_KERNEL_HPP
#define KSMZ_MEMORY_KERNEL_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "ksmz/bdf.hpp"
#include "ksmz/hermite.hpp"
#include "ksmz/markovian.hpp"

namespace ksmz {

/// Gram matrix of the resolved coordinate functions under the density:
/// B_ij = E[u_i conj(u_j)] = delta_ij a_i + mu_i conj(mu_j) (partition order).
Eigen::MatrixXcd gram_matrix(const DiagonalGaussian& g, const Partition& p);

/// Coefficients alpha with P g = sum_k alpha_k u_k, i.e. the solution of
/// sum_k alpha_k (u_k, u_i) = v_i where v_i = (g, u_i) = E[g conj(u_i)].
Eigen::VectorXcd linear_projection_coefficients(const Eigen::MatrixXcd& gram, const Eigen::VectorXcd& v);

/// Time-tabulated projection coefficients of the memory integrand. K[g] holds
/// the folded coefficients K_{j,i}(s_g): the memory integrand for equation j
/// at lag s is sum_i K_{j,i}(s) basis_i(u_hat(t - s)), where the basis is the
/// resolved coordinates (linear) or the orthonormal Hermite set (finite-rank).
struct MemoryKernel {
  ProjectionSpec spec;
  double ds = 0.0;
  double t0 = 0.0;
  std::vector<int> equations;          // signed resolved wavenumbers, partition order
  std::vector<std::string> basis_labels;
  std::vector<Eigen::MatrixXcd> K;     // per grid point, m x n_basis
  std::vector<Eigen::MatrixXcd> lqa;   // unfolded inner products (LQA_j(s), basis_i)
  Eigen::MatrixXcd gram;               // linear case; identity for finite-rank
  Eigen::MatrixXcd gram_inv;
  std::size_t n_mc = 0;
  std::uint64_t seed = 0;

  int n_grid() const { return static_cast<int>(K.size()); }
  std::size_t n_basis() const { return K.empty() ? 0 : static_cast<std::size_t>(K.front().cols()); }

  /// Linear interpolation of the coefficient table at lag s in [0, t0].
  Eigen::MatrixXcd at(double s) const;

  /// Per-equation integral over [0, t0] of each coefficient (trapezoid),
  /// the weight table of the delta-function variant.
  Eigen::MatrixXcd integrated() const;

  /// True when every coefficient is identically zero (memory switched off).
  bool is_zero() const;

  /// An all-zero kernel with the right shape, for term-isolation runs.
  static MemoryKernel zero(const DiagonalGaussian& g, const Partition& p, const ProjectionSpec& spec,
                           double ds, double t0);
};

struct KernelEstimationConfig {
  std::size_t n_mc = 1000;
  double ds = 0.01;
  double t0 = 1.0;
  BdfConfig bdf;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Monte-Carlo estimate of the kernel: draws u0 from the full density, evolves
/// the full system over [0, t0], and averages
///   (L A_j(s), basis_i)  and  (A_j(s), basis_l)
/// over the ensemble; the projected subtraction
///   (LQ A_j(s), basis_i) = (L A_j(s), basis_i) - sum_l proj[A_j(s)]_l (R_l(u0), basis_i)
/// reuses the same ensemble for both passes. The linear case folds in the
/// inverse Gram matrix; the finite-rank case projects on the orthonormal set
/// using the analytic basis gradients.
MemoryKernel estimate_memory_kernel(const DiagonalGaussian& g, const Partition& p,
                                    const ProjectionSpec& spec, const KernelEstimationConfig& cfg);

}  // namespace ksmz

#endif
