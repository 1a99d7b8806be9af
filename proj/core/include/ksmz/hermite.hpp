#ifndef KSMZ_HERMITE_HPP
#define KSMZ_HERMITE_HPP

#include <string>
#include <utility>
#include <vector>

#include "ksmz/markovian.hpp"

namespace ksmz {

/// Normalized probabilists' Hermite polynomial H_k (weight e^{-x^2/2}),
/// H_0 = 1, H_1 = x, H_k = (x H_{k-1} - sqrt(k-1) H_{k-2}) / sqrt(k).
double hermite_normalized(int k, double x);

/// Modified one-dimensional factor
/// Htilde_k(x) = (1/sqrt2) (1+2b)^{1/4} H_k(sqrt(1+2b) x) e^{-b x^2 / 2}.
double hermite_tilde(int k, double x, double beta = 0.0);

/// d/dx Htilde_k = sqrt(k (1+2b)) Htilde_{k-1}(x) - b x Htilde_k(x).
double hermite_tilde_derivative(int k, double x, double beta = 0.0);

/// One product function: nonzero multi-index entries as (signed wavenumber,
/// order). A factor on wavenumber -k is the complex conjugate of the factor on
/// +k; entries of a conjugate pair are never simultaneously nonzero.
struct BasisFunction {
  std::vector<std::pair<int, int>> factors;
  std::string label() const;
};

struct ProjectionSpec {
  enum class Kind { Linear, FiniteRank };
  Kind kind = Kind::Linear;
  double beta = 0.0;                      // applied to every order >= 1 factor
  std::vector<BasisFunction> functions;   // finite-rank only
};

/// Default finite-rank set: all products of per-pair states
/// {const, H1(+k), H1(-k), H2(+k), H2(-k)} on the two most unstable resolved
/// conjugate pairs (24 nonconstant combinations) plus the first-order function
/// on every remaining resolved mode. For the m = 10 partitions this is the
/// 30-function set; beta = 0 throughout.
ProjectionSpec make_default_finite_rank(const DiagonalGaussian& g, const Partition& p);

/// Evaluable orthonormal basis over the resolved modes under the fitted
/// density. Arguments are standardized per positive mode:
/// x_k = sqrt(2/a_k) (Re u_k - Re mu_k), y_k likewise for the imaginary part.
/// Order-zero modes contribute the constant phase (1+i)/sqrt2.
class HermiteBasis {
 public:
  HermiteBasis(const ProjectionSpec& spec, const DiagonalGaussian& g, const Partition& p);

  std::size_t size() const { return functions_.size(); }
  const std::vector<BasisFunction>& functions() const { return functions_; }
  const Partition& partition() const { return *partition_; }

  void values(const ResolvedVec& hat, std::vector<Complex>& out) const;

  /// Values plus d/d(Re u_q) and d/d(Im u_q) for every positive resolved mode
  /// q; derivative slot f * P + qi with P = number of positive resolved modes.
  void values_and_gradients(const ResolvedVec& hat, std::vector<Complex>& vals,
                            std::vector<Complex>& d_re, std::vector<Complex>& d_im) const;

  /// sum_{i resolved} R_i dh/du_i = dh/dt along the resolved flow, given the
  /// right-hand side values of the positive resolved modes.
  void flow_derivative(const ResolvedVec& hat, const std::vector<Complex>& rhs_pos,
                       std::vector<Complex>& out) const;

 private:
  const Partition* partition_;
  std::vector<BasisFunction> functions_;
  double beta_ = 0.0;
  std::vector<double> scale_;          // sqrt(2/a_k) per positive resolved mode
  std::vector<Complex> mu_;            // density mean per positive resolved mode
  std::vector<Complex> phase_powers_;  // ((1+i)/sqrt2)^z
  int max_order_ = 0;
};

}  // namespace ksmz

#endif
