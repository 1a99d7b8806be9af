#include "ksmz/markovian.hpp"

#include <algorithm>
#include <cmath>

namespace ksmz {

ResolvedVec::ResolvedVec(const Partition& p, std::vector<Complex> positive_values)
    : p_(&p), pos_(std::move(positive_values)) {
  if (pos_.size() != p.resolved_pos.size())
    throw std::invalid_argument("ResolvedVec: one value per positive resolved mode expected");
}

Complex ResolvedVec::value(int k) const {
  const int idx = p_->resolved_index(std::abs(k));
  const Complex v = pos_[static_cast<std::size_t>(idx)];
  return k > 0 ? v : std::conj(v);
}

std::vector<Complex> ResolvedVec::partition_ordered() const {
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(p_->m()));
  for (const Complex& v : pos_) out.push_back(v);
  for (const Complex& v : pos_) out.push_back(std::conj(v));
  return out;
}

UnresolvedVec::UnresolvedVec(const Partition& p, std::vector<Complex> positive_values)
    : p_(&p), pos_(std::move(positive_values)) {
  if (pos_.size() != p.unresolved_pos().size())
    throw std::invalid_argument("UnresolvedVec: one value per positive unresolved mode expected");
}

Complex UnresolvedVec::value(int k) const {
  const auto& pos_modes = p_->unresolved_pos();
  const auto it = std::lower_bound(pos_modes.begin(), pos_modes.end(), std::abs(k));
  if (it == pos_modes.end() || *it != std::abs(k))
    throw std::invalid_argument("UnresolvedVec: wavenumber not unresolved");
  const Complex v = pos_[static_cast<std::size_t>(it - pos_modes.begin())];
  return k > 0 ? v : std::conj(v);
}

Complex MarkovianModel::conditional_mean(int k, const ResolvedVec& resolved) const {
  const int row = density.density_index(k);
  Complex val = affine.c(row);
  const std::vector<Complex> hat = resolved.partition_ordered();
  for (int l = 0; l < partition.m(); ++l) val += affine.Q(row, l) * hat[static_cast<std::size_t>(l)];
  return val;
}

namespace {
// Classification of a wavenumber within the truncation: pinned modes (0 and
// -N/2) contribute nothing to any sum.
enum class Slot { Pinned, Resolved, Unresolved };

Slot classify(int k, const SpectralParams& params, const Partition& p) {
  if (k == 0 || k == -params.N / 2) return Slot::Pinned;
  return p.is_resolved(k) ? Slot::Resolved : Slot::Unresolved;
}
}  // namespace

Complex markovian_rhs(const MarkovianModel& mm, const ResolvedVec& resolved, int j) {
  const SpectralParams& params = mm.density.params;
  const Partition& p = mm.partition;
  if (!p.is_resolved(j)) throw std::invalid_argument("markovian_rhs: j must be resolved");

  // Conditional means of the unresolved modes at these resolved values.
  const std::vector<int>& unres = p.unresolved();
  std::vector<Complex> cmean(unres.size());
  for (std::size_t i = 0; i < unres.size(); ++i) cmean[i] = mm.conditional_mean(unres[i], resolved);
  auto cond_mean = [&](int k) {
    const auto it = std::find(unres.begin(), unres.end(), k);
    return cmean[static_cast<std::size_t>(it - unres.begin())];
  };

  Complex sum{0.0, 0.0};
  for (int k1 = -params.N / 2; k1 <= params.N / 2 - 1; ++k1) {
    const int k2 = j - k1;
    if (!params.in_range(k2)) continue;
    const Slot s1 = classify(k1, params, p);
    const Slot s2 = classify(k2, params, p);
    if (s1 == Slot::Pinned || s2 == Slot::Pinned) continue;
    if (s1 == Slot::Resolved && s2 == Slot::Resolved) {
      sum += resolved.value(k1) * resolved.value(k2);
    } else if (s1 == Slot::Resolved && s2 == Slot::Unresolved) {
      sum += resolved.value(k1) * cond_mean(k2);
    } else if (s1 == Slot::Unresolved && s2 == Slot::Resolved) {
      sum += cond_mean(k1) * resolved.value(k2);
    } else {
      // E[u_{k1} u_{k2} | u_hat] = V(k1, -k2) + E[u_{k1}|u_hat] E[u_{k2}|u_hat]
      sum += mm.cov.V(mm.density.density_index(k1), mm.density.density_index(-k2)) +
             cond_mean(k1) * cond_mean(k2);
    }
  }
  return Complex(0.0, -0.5 * j) * sum + linear_growth_rate(j, params.nu) * resolved.value(j);
}

Complex noise_term_A(const ResolvedVec& resolved, const UnresolvedVec& unresolved,
                     const MarkovianModel& mm, int j) {
  const SpectralParams& params = mm.density.params;
  const Partition& p = mm.partition;
  if (!p.is_resolved(j)) throw std::invalid_argument("noise_term_A: j must be resolved");
  Complex sum{0.0, 0.0};
  for (int k1 : p.resolved()) {
    const int k2 = j - k1;
    if (!params.in_range(k2)) continue;
    if (classify(k2, params, p) != Slot::Unresolved) continue;
    // both orderings of the mixed pair
    sum += 2.0 * resolved.value(k1) * (unresolved.value(k2) - mm.conditional_mean(k2, resolved));
  }
  return Complex(0.0, -0.5 * j) * sum;
}

namespace {
ResolvedVec resolved_part(const MarkovianModel& mm, const ModeState& u) {
  std::vector<Complex> pos;
  pos.reserve(mm.partition.resolved_pos.size());
  for (int k : mm.partition.resolved_pos) pos.push_back(u.at(k, mm.density.params));
  return ResolvedVec(mm.partition, std::move(pos));
}
}  // namespace

Complex a_value(const MarkovianModel& mm, const ModeState& u, int j) {
  const SpectralParams& params = mm.density.params;
  const Partition& p = mm.partition;
  const ResolvedVec hat = resolved_part(mm, u);
  Complex sum{0.0, 0.0};
  for (int k1 : p.resolved()) {
    const int k2 = j - k1;
    if (!params.in_range(k2)) continue;
    if (classify(k2, params, p) != Slot::Unresolved) continue;
    sum += 2.0 * u.at(k1, params) * (u.at(k2, params) - mm.conditional_mean(k2, hat));
  }
  return Complex(0.0, -0.5 * j) * sum;
}

std::vector<Complex> a_gradient(const MarkovianModel& mm, const ModeState& u, int j) {
  const SpectralParams& params = mm.density.params;
  const Partition& p = mm.partition;
  const ResolvedVec hat = resolved_part(mm, u);
  const Complex pref(0.0, -0.5 * j);
  std::vector<Complex> grad(static_cast<std::size_t>(params.n()), Complex{0.0, 0.0});

  auto add = [&](int k, Complex v) { grad[static_cast<std::size_t>(mm.density.density_index(k))] += v; };

  for (int k1 : p.resolved()) {
    const int k2 = j - k1;
    if (!params.in_range(k2)) continue;
    if (classify(k2, params, p) != Slot::Unresolved) continue;
    // The diagonal density makes E[u_{k2}|u_hat] a constant (= mu_{k2}), so
    // only the resolved and unresolved slots of the bilinear form contribute.
    add(k1, pref * 2.0 * (u.at(k2, params) - mm.conditional_mean(k2, hat)));
    add(k2, pref * 2.0 * u.at(k1, params));
  }
  return grad;
}

Complex a_flow_derivative(const MarkovianModel& mm, const ModeState& u, const RhsVector& r, int j) {
  const SpectralParams& params = mm.density.params;
  const Partition& p = mm.partition;
  const ResolvedVec hat = resolved_part(mm, u);
  const Complex pref(0.0, -0.5 * j);

  auto rhs_at = [&](int k) { return r.values[static_cast<std::size_t>(params.index(k))]; };

  Complex sum{0.0, 0.0};
  for (int k1 : p.resolved()) {
    const int k2 = j - k1;
    if (!params.in_range(k2)) continue;
    if (classify(k2, params, p) != Slot::Unresolved) continue;
    // product rule along the flow; the conditional mean is constant in time
    // for the diagonal density
    sum += 2.0 * (rhs_at(k1) * (u.at(k2, params) - mm.conditional_mean(k2, hat)) +
                  u.at(k1, params) * rhs_at(k2));
  }
  return pref * sum;
}

}  // namespace ksmz
