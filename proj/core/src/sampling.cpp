#include "ksmz/sampling.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ksmz/parallel.hpp"
#include "ksmz/rng.hpp"

namespace ksmz {

ModeState draw_uniform_ic(std::uint64_t seed, const SpectralParams& params) {
  RandomStream rng(seed);
  ModeState state(params);
  for (int k = 1; k <= params.max_pos(); ++k) {
    const double re = rng.uniform(-1.0, 1.0);
    const double im = rng.uniform(-1.0, 1.0);
    state.at(k, params) = Complex(re, im);
    state.at(-k, params) = Complex(re, -im);
  }
  return state;
}

SampleSet collect_samples(std::size_t n_samples, double burn_time, const BdfConfig& cfg,
                          const SpectralParams& params, std::uint64_t seed, int jobs) {
  if (n_samples < 1) throw std::invalid_argument("collect_samples: n_samples must be >= 1");
  SampleSet set;
  set.params = params;
  set.burn_time = burn_time;
  set.seed = seed;
  set.samples.resize(n_samples);

  parallel_for(n_samples, jobs, [&](std::size_t i) {
    const ModeState ic = draw_uniform_ic(stream_seed(seed, "sample-ic", i), params);
    if (burn_time == 0.0) {
      set.samples[i] = ic.coeffs;
      return;
    }
    try {
      set.samples[i] = integrate_to(ic, burn_time, cfg, params).coeffs;
    } catch (const BdfFailure& e) {
      std::ostringstream msg;
      msg << "collect_samples: member " << i << " (stream seed " << stream_seed(seed, "sample-ic", i)
          << ") failed: " << e.what();
      throw BdfFailure(msg.str());
    }
  });
  return set;
}

namespace {
struct ComponentAccum {
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

ComponentAccum component_moments(const std::vector<double>& x) {
  ComponentAccum a;
  const double n = static_cast<double>(x.size());
  for (double v : x) a.mean += v;
  a.mean /= n;
  for (double v : x) {
    const double d = v - a.mean;
    const double d2 = d * d;
    a.m2 += d2;
    a.m3 += d2 * d;
    a.m4 += d2 * d2;
  }
  a.m2 /= n;
  a.m3 /= n;
  a.m4 /= n;
  return a;
}
}  // namespace

MomentReport sample_moments(const SampleSet& s) {
  if (s.n_samples() < 4) throw std::invalid_argument("sample_moments: need at least 4 samples");
  const SpectralParams& p = s.params;
  MomentReport report;
  std::vector<double> x(s.n_samples());
  for (int k = 1; k <= p.max_pos(); ++k) {
    for (char comp : {'r', 'i'}) {
      for (std::size_t j = 0; j < s.n_samples(); ++j) {
        const Complex u = s.samples[j][static_cast<std::size_t>(p.index(k))];
        x[j] = comp == 'r' ? u.real() : u.imag();
      }
      const ComponentAccum a = component_moments(x);
      MomentReport::Entry e;
      e.k = k;
      e.component = comp;
      e.mean = a.mean;
      e.var = a.m2;
      if (a.m2 > 0.0) {
        e.skew = a.m3 / std::pow(a.m2, 1.5);
        e.flat = a.m4 / (a.m2 * a.m2) - 3.0;
      } else {
        e.skew = 0.0;
        e.flat = std::nullopt;
      }
      report.entries.push_back(e);
    }
  }
  return report;
}

double covariance_offdiag_ratio(const SampleSet& s) {
  const SpectralParams& p = s.params;
  const std::size_t n = s.n_samples();
  if (n < 2) throw std::invalid_argument("covariance_offdiag_ratio: need at least 2 samples");
  const int P = p.max_pos();
  std::vector<Complex> mean(static_cast<std::size_t>(P), Complex{0, 0});
  for (const auto& w : s.samples)
    for (int k = 1; k <= P; ++k) mean[static_cast<std::size_t>(k - 1)] += w[static_cast<std::size_t>(p.index(k))];
  for (auto& m : mean) m /= static_cast<double>(n);

  double min_diag = std::numeric_limits<double>::infinity();
  double max_off = 0.0;
  for (int i = 1; i <= P; ++i) {
    for (int j = i; j <= P; ++j) {
      Complex cov{0, 0};
      for (const auto& w : s.samples) {
        const Complex di = w[static_cast<std::size_t>(p.index(i))] - mean[static_cast<std::size_t>(i - 1)];
        const Complex dj = w[static_cast<std::size_t>(p.index(j))] - mean[static_cast<std::size_t>(j - 1)];
        cov += di * std::conj(dj);
      }
      cov /= static_cast<double>(n - 1);
      if (i == j)
        min_diag = std::min(min_diag, cov.real());
      else
        max_off = std::max(max_off, std::abs(cov));
    }
  }
  return max_off / min_diag;
}

}  // namespace ksmz
