#ifndef KSMZ_MARKOVIAN_HPP
#define KSMZ_MARKOVIAN_HPP

#include <vector>

#include "ksmz/density.hpp"
#include "ksmz/types.hpp"

namespace ksmz {

/// Resolved-mode values stored as the positive half; signed lookup fills the
/// conjugates, so the reality constraint cannot drift.
class ResolvedVec {
 public:
  ResolvedVec(const Partition& p, std::vector<Complex> positive_values);
  const Partition& partition() const { return *p_; }
  Complex value(int k) const;  // k must be resolved (either sign)
  const std::vector<Complex>& positive() const { return pos_; }
  /// Values in partition ordering (positives, then conjugate negatives).
  std::vector<Complex> partition_ordered() const;

 private:
  const Partition* p_;
  std::vector<Complex> pos_;
};

/// Unresolved-mode values (one complex value per positive unresolved mode).
class UnresolvedVec {
 public:
  UnresolvedVec(const Partition& p, std::vector<Complex> positive_values);
  Complex value(int k) const;  // k must be unresolved (either sign)

 private:
  const Partition* p_;
  std::vector<Complex> pos_;
};

/// Density + partition + the precomputed conditional machinery entering the
/// projected right-hand side.
struct MarkovianModel {
  DiagonalGaussian density;
  Partition partition;
  ConditionalAffine affine;
  ConditionalCov cov;

  MarkovianModel(const DiagonalGaussian& g, const Partition& p)
      : density(g), partition(p), affine(conditional_affine(g, p)), cov(conditional_covariance(g, p)) {
    if (g.params.N != p.params.N) throw std::invalid_argument("MarkovianModel: dimension mismatch");
  }

  /// E[u_k | u_hat] for an unresolved mode k at the given resolved values.
  Complex conditional_mean(int k, const ResolvedVec& resolved) const;
};

/// Projected right-hand side E[R_j(u) | u_hat]: resolved-resolved pairs taken
/// literally, mixed pairs through the conditional mean, unresolved-unresolved
/// pairs through the conditional second moment, plus the linear term.
Complex markovian_rhs(const MarkovianModel& mm, const ResolvedVec& resolved, int j);

/// Noise function A_j = -(ij/2) sum over mixed pairs of
/// u_{k1} (u_{k2} - E[u_{k2}|u_hat]), both orderings counted. The
/// unresolved-unresolved part B_j is excluded here (it stays only inside the
/// Markovian term).
Complex noise_term_A(const ResolvedVec& resolved, const UnresolvedVec& unresolved,
                     const MarkovianModel& mm, int j);

/// A_j evaluated on a full state (used along Monte-Carlo trajectories).
Complex a_value(const MarkovianModel& mm, const ModeState& u, int j);

/// Formal holomorphic partials dA_j/du_l over all signed modes l, as a dense
/// vector in density ordering. A_j is a polynomial in the mode coordinates, so
/// these partials chain exactly along the flow.
std::vector<Complex> a_gradient(const MarkovianModel& mm, const ModeState& u, int j);

/// L A_j = sum_l R_l dA_j/du_l evaluated at u, i.e. the time derivative of
/// A_j along the flow with du/dt = R.
Complex a_flow_derivative(const MarkovianModel& mm, const ModeState& u, const RhsVector& r, int j);

}  // namespace ksmz

#endif
