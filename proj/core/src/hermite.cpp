#include "ksmz/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ksmz {

double hermite_normalized(int k, double x) {
  if (k < 0) throw std::invalid_argument("hermite_normalized: negative order");
  if (k == 0) return 1.0;
  if (k == 1) return x;
  double hm2 = 1.0, hm1 = x, h = 0.0;
  for (int i = 2; i <= k; ++i) {
    h = (x * hm1 - std::sqrt(static_cast<double>(i - 1)) * hm2) / std::sqrt(static_cast<double>(i));
    hm2 = hm1;
    hm1 = h;
  }
  return h;
}

double hermite_tilde(int k, double x, double beta) {
  if (beta <= -0.5) throw std::invalid_argument("hermite_tilde: beta must exceed -1/2");
  if (k == 0) beta = 0.0;  // order-zero factors carry no Gaussian taper
  const double c = 1.0 + 2.0 * beta;
  return (1.0 / std::sqrt(2.0)) * std::pow(c, 0.25) * hermite_normalized(k, std::sqrt(c) * x) *
         std::exp(-0.5 * beta * x * x);
}

double hermite_tilde_derivative(int k, double x, double beta) {
  if (k == 0) return 0.0;
  const double c = 1.0 + 2.0 * beta;
  return std::sqrt(static_cast<double>(k) * c) * hermite_tilde(k - 1, x, beta) -
         beta * x * hermite_tilde(k, x, beta);
}

std::string BasisFunction::label() const {
  if (factors.empty()) return "const";
  std::ostringstream os;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) os << '*';
    os << 'k' << factors[i].first << '^' << factors[i].second;
  }
  return os.str();
}

ProjectionSpec make_default_finite_rank(const DiagonalGaussian& g, const Partition& p) {
  // The two most unstable resolved conjugate pairs by linear growth rate.
  std::vector<int> pos = p.resolved_pos;
  std::sort(pos.begin(), pos.end(), [&](int a, int b) {
    return linear_growth_rate(a, g.params.nu) > linear_growth_rate(b, g.params.nu);
  });
  if (pos.size() < 2) throw std::invalid_argument("make_default_finite_rank: need at least two resolved pairs");
  std::vector<int> block = {pos[0], pos[1]};
  std::sort(block.begin(), block.end());

  // Per-pair states: order 0, or order p in {1, 2} carried on +k or -k.
  auto pair_states = [](int k) {
    std::vector<std::vector<std::pair<int, int>>> states;
    states.push_back({});
    for (int order : {1, 2}) {
      states.push_back({{k, order}});
      states.push_back({{-k, order}});
    }
    return states;
  };

  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::FiniteRank;
  spec.beta = 0.0;
  for (const auto& s1 : pair_states(block[0])) {
    for (const auto& s2 : pair_states(block[1])) {
      if (s1.empty() && s2.empty()) continue;  // the constant is omitted
      BasisFunction f;
      f.factors = s1;
      f.factors.insert(f.factors.end(), s2.begin(), s2.end());
      spec.functions.push_back(std::move(f));
    }
  }
  for (int k : p.resolved_pos) {
    if (k == block[0] || k == block[1]) continue;
    spec.functions.push_back(BasisFunction{{{k, 1}}});
    spec.functions.push_back(BasisFunction{{{-k, 1}}});
  }
  return spec;
}

HermiteBasis::HermiteBasis(const ProjectionSpec& spec, const DiagonalGaussian& g, const Partition& p)
    : partition_(&p), functions_(spec.functions), beta_(spec.beta) {
  if (spec.kind != ProjectionSpec::Kind::FiniteRank)
    throw std::invalid_argument("HermiteBasis: spec must be finite-rank");
  if (spec.beta <= -0.5) throw std::invalid_argument("HermiteBasis: beta must exceed -1/2");
  const std::size_t P = p.resolved_pos.size();
  scale_.resize(P);
  mu_.resize(P);
  for (std::size_t i = 0; i < P; ++i) {
    const int k = p.resolved_pos[i];
    scale_[i] = std::sqrt(2.0 / g.variance(k));
    mu_[i] = g.mean(k);
  }
  for (const BasisFunction& f : functions_) {
    std::vector<int> seen;
    for (const auto& [k, order] : f.factors) {
      if (order < 1) throw std::invalid_argument("HermiteBasis: factor orders must be >= 1");
      if (!p.is_resolved(k)) throw std::invalid_argument("HermiteBasis: factor on an unresolved mode");
      if (std::find(seen.begin(), seen.end(), std::abs(k)) != seen.end())
        throw std::invalid_argument(
            "HermiteBasis: conjugate-pair entries cannot be simultaneously nonzero");
      seen.push_back(std::abs(k));
      max_order_ = std::max(max_order_, order);
    }
  }
  const Complex phase = Complex(1.0, 1.0) / std::sqrt(2.0);
  phase_powers_.resize(P + 1);
  phase_powers_[0] = Complex(1.0, 0.0);
  for (std::size_t z = 1; z <= P; ++z) phase_powers_[z] = phase_powers_[z - 1] * phase;
}

void HermiteBasis::values(const ResolvedVec& hat, std::vector<Complex>& out) const {
  const std::size_t P = partition_->resolved_pos.size();
  out.assign(functions_.size(), Complex{0.0, 0.0});
  std::vector<double> x(P), y(P);
  for (std::size_t i = 0; i < P; ++i) {
    const Complex u = hat.positive()[i];
    x[i] = scale_[i] * (u.real() - mu_[i].real());
    y[i] = scale_[i] * (u.imag() - mu_[i].imag());
  }
  for (std::size_t f = 0; f < functions_.size(); ++f) {
    const auto& factors = functions_[f].factors;
    Complex prod = phase_powers_[P - factors.size()];
    for (const auto& [k, order] : factors) {
      const std::size_t qi = static_cast<std::size_t>(partition_->resolved_index(std::abs(k)));
      const double hr = hermite_tilde(order, x[qi], beta_);
      const double hi = hermite_tilde(order, y[qi], beta_);
      prod *= (k > 0) ? Complex(hr, hi) : Complex(hr, -hi);
    }
    out[f] = prod;
  }
}

void HermiteBasis::values_and_gradients(const ResolvedVec& hat, std::vector<Complex>& vals,
                                        std::vector<Complex>& d_re, std::vector<Complex>& d_im) const {
  const std::size_t P = partition_->resolved_pos.size();
  const std::size_t F = functions_.size();
  vals.assign(F, Complex{0.0, 0.0});
  d_re.assign(F * P, Complex{0.0, 0.0});
  d_im.assign(F * P, Complex{0.0, 0.0});
  std::vector<double> x(P), y(P);
  for (std::size_t i = 0; i < P; ++i) {
    const Complex u = hat.positive()[i];
    x[i] = scale_[i] * (u.real() - mu_[i].real());
    y[i] = scale_[i] * (u.imag() - mu_[i].imag());
  }
  for (std::size_t f = 0; f < F; ++f) {
    const auto& factors = functions_[f].factors;
    const Complex phase = phase_powers_[P - factors.size()];
    // factor values and their x/y partials
    std::vector<Complex> fv(factors.size()), fdx(factors.size()), fdy(factors.size());
    std::vector<std::size_t> fqi(factors.size());
    for (std::size_t a = 0; a < factors.size(); ++a) {
      const auto& [k, order] = factors[a];
      const std::size_t qi = static_cast<std::size_t>(partition_->resolved_index(std::abs(k)));
      fqi[a] = qi;
      const double hr = hermite_tilde(order, x[qi], beta_);
      const double hi = hermite_tilde(order, y[qi], beta_);
      const double dr = hermite_tilde_derivative(order, x[qi], beta_);
      const double di = hermite_tilde_derivative(order, y[qi], beta_);
      const double sign = k > 0 ? 1.0 : -1.0;
      fv[a] = Complex(hr, sign * hi);
      fdx[a] = scale_[qi] * Complex(dr, 0.0);
      fdy[a] = scale_[qi] * Complex(0.0, sign * di);
    }
    Complex prod = phase;
    for (const Complex& v : fv) prod *= v;
    vals[f] = prod;
    for (std::size_t a = 0; a < factors.size(); ++a) {
      Complex rest = phase;
      for (std::size_t b = 0; b < factors.size(); ++b)
        if (b != a) rest *= fv[b];
      d_re[f * P + fqi[a]] += rest * fdx[a];
      d_im[f * P + fqi[a]] += rest * fdy[a];
    }
  }
}

void HermiteBasis::flow_derivative(const ResolvedVec& hat, const std::vector<Complex>& rhs_pos,
                                   std::vector<Complex>& out) const {
  const std::size_t P = partition_->resolved_pos.size();
  if (rhs_pos.size() != P) throw std::invalid_argument("HermiteBasis: one RHS value per positive mode");
  std::vector<Complex> vals, d_re, d_im;
  values_and_gradients(hat, vals, d_re, d_im);
  out.assign(functions_.size(), Complex{0.0, 0.0});
  for (std::size_t f = 0; f < functions_.size(); ++f) {
    Complex acc{0.0, 0.0};
    for (std::size_t q = 0; q < P; ++q)
      acc += rhs_pos[q].real() * d_re[f * P + q] + rhs_pos[q].imag() * d_im[f * P + q];
    out[f] = acc;
  }
}

}  // namespace ksmz
