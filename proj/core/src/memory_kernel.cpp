#include "ksmz/memory_kernel.hpp"

#include <cmath>

#include "ksmz/parallel.hpp"
#include "ksmz/rng.hpp"

namespace ksmz {

Eigen::MatrixXcd gram_matrix(const DiagonalGaussian& g, const Partition& p) {
  const int m = p.m();
  Eigen::MatrixXcd b(m, m);
  for (int i = 0; i < m; ++i) {
    const int ki = p.resolved()[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j) {
      const int kj = p.resolved()[static_cast<std::size_t>(j)];
      // Cov[u_i, u_j^*] is strictly diagonal for the constrained density: the
      // +-k pair correlates only without conjugation (E[(u_k-mu)^2] = 0 by the
      // independent-component convention), so only the rank-one mean term
      // couples distinct modes.
      Complex v = g.mean(ki) * std::conj(g.mean(kj));
      if (i == j) v += g.variance(ki);
      b(i, j) = v;
    }
  }
  return b;
}

Eigen::VectorXcd linear_projection_coefficients(const Eigen::MatrixXcd& gram, const Eigen::VectorXcd& v) {
  // sum_k alpha_k (u_k, u_i) = v_i with (u_k, u_i) = E[u_k conj(u_i)] = B_{ki}.
  return gram.transpose().partialPivLu().solve(v);
}

Eigen::MatrixXcd MemoryKernel::at(double s) const {
  if (K.empty()) throw std::logic_error("MemoryKernel: empty table");
  if (s <= 0.0) return K.front();
  if (s >= t0) return K.back();
  const double pos = s / ds;
  const int g0 = static_cast<int>(pos);
  const int g1 = std::min(g0 + 1, n_grid() - 1);
  const double w = pos - g0;
  return (1.0 - w) * K[static_cast<std::size_t>(g0)] + w * K[static_cast<std::size_t>(g1)];
}

Eigen::MatrixXcd MemoryKernel::integrated() const {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(K.front().rows(), K.front().cols());
  for (int g = 0; g + 1 < n_grid(); ++g)
    acc += 0.5 * ds * (K[static_cast<std::size_t>(g)] + K[static_cast<std::size_t>(g + 1)]);
  return acc;
}

bool MemoryKernel::is_zero() const {
  for (const auto& k : K)
    if (k.cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

MemoryKernel MemoryKernel::zero(const DiagonalGaussian& g, const Partition& p, const ProjectionSpec& spec,
                                double ds, double t0) {
  MemoryKernel kern;
  kern.spec = spec;
  kern.ds = ds;
  kern.t0 = t0;
  for (int k : p.resolved()) kern.equations.push_back(k);
  std::size_t nb;
  if (spec.kind == ProjectionSpec::Kind::Linear) {
    nb = static_cast<std::size_t>(p.m());
    for (int k : p.resolved()) kern.basis_labels.push_back("u_k" + std::to_string(k));
    kern.gram = gram_matrix(g, p);
    kern.gram_inv = kern.gram.inverse();
  } else {
    nb = spec.functions.size();
    for (const auto& f : spec.functions) kern.basis_labels.push_back(f.label());
    kern.gram = Eigen::MatrixXcd::Identity(static_cast<int>(nb), static_cast<int>(nb));
    kern.gram_inv = kern.gram;
  }
  const int n_grid = static_cast<int>(std::lround(t0 / ds)) + 1;
  kern.K.assign(static_cast<std::size_t>(n_grid),
                Eigen::MatrixXcd::Zero(p.m(), static_cast<int>(nb)));
  kern.lqa = kern.K;
  return kern;
}

MemoryKernel estimate_memory_kernel(const DiagonalGaussian& g, const Partition& p,
                                    const ProjectionSpec& spec, const KernelEstimationConfig& cfg) {
  if (cfg.n_mc < 1) throw std::invalid_argument("estimate_memory_kernel: n_mc must be >= 1");
  if (cfg.ds <= 0.0 || cfg.t0 <= 0.0) throw std::invalid_argument("estimate_memory_kernel: bad grid");

  const MarkovianModel mm(g, p);
  const bool linear = spec.kind == ProjectionSpec::Kind::Linear;
  const HermiteBasis* basis = nullptr;
  std::unique_ptr<HermiteBasis> basis_storage;
  if (!linear) {
    basis_storage = std::make_unique<HermiteBasis>(spec, g, p);
    basis = basis_storage.get();
  }

  const int m = p.m();
  const std::size_t nb = linear ? static_cast<std::size_t>(m) : basis->size();
  const int n_grid = static_cast<int>(std::lround(cfg.t0 / cfg.ds)) + 1;
  const std::size_t half = p.resolved_pos.size();

  struct Partial {
    std::vector<Eigen::MatrixXcd> c, m1;  // per grid point, m x nb
    Eigen::MatrixXcd d;                   // m x nb (linear) or nb x nb (finite)
  };

  constexpr std::size_t kBlock = 16;  // fixed block structure keeps sums job-count independent
  const std::size_t n_blocks = (cfg.n_mc + kBlock - 1) / kBlock;
  std::vector<Partial> partials(n_blocks);

  parallel_blocks(cfg.n_mc, kBlock, cfg.jobs, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Partial& part = partials[b];
    part.c.assign(static_cast<std::size_t>(n_grid), Eigen::MatrixXcd::Zero(m, static_cast<int>(nb)));
    part.m1 = part.c;
    part.d = Eigen::MatrixXcd::Zero(linear ? m : static_cast<int>(nb), static_cast<int>(nb));

    Convolver conv(g.params);
    std::vector<Complex> b0(nb), lb0;
    for (std::size_t q = begin; q < end; ++q) {
      RandomStream rng(stream_seed(cfg.seed, "kernel-mc", q));
      const ModeState u0 = g.draw_full(rng);

      std::vector<Complex> hat0_pos(half);
      for (std::size_t i = 0; i < half; ++i) hat0_pos[i] = u0.at(p.resolved_pos[i], g.params);
      const ResolvedVec hat0(p, hat0_pos);

      const RhsVector r0 = conv.rhs(u0);
      if (linear) {
        const std::vector<Complex> ordered = hat0.partition_ordered();
        for (std::size_t i = 0; i < nb; ++i) b0[i] = ordered[i];
        for (int k = 0; k < m; ++k) {
          const Complex rk =
              r0.values[static_cast<std::size_t>(g.params.index(p.resolved()[static_cast<std::size_t>(k)]))];
          for (std::size_t i = 0; i < nb; ++i) part.d(k, static_cast<int>(i)) += rk * std::conj(b0[i]);
        }
      } else {
        basis->values(hat0, b0);
        std::vector<Complex> rhs_pos(half);
        for (std::size_t i = 0; i < half; ++i)
          rhs_pos[i] = r0.values[static_cast<std::size_t>(g.params.index(p.resolved_pos[i]))];
        basis->flow_derivative(hat0, rhs_pos, lb0);
        for (std::size_t l = 0; l < nb; ++l)
          for (std::size_t i = 0; i < nb; ++i)
            part.d(static_cast<int>(l), static_cast<int>(i)) += lb0[l] * std::conj(b0[i]);
      }

      // one full-system trajectory, sampled on the kernel grid
      KsOde sys(g.params);
      BdfIntegrator bdf(sys, sys.from_state(u0), 0.0, cfg.bdf);
      for (int gi = 0; gi < n_grid; ++gi) {
        const double s = gi * cfg.ds;
        ModeState us = u0;
        if (gi > 0) {
          bdf.advance_to(s);
          us = sys.to_state(bdf.interpolate(s), s);
        }
        const RhsVector rs = conv.rhs(us);
        for (int j = 0; j < m; ++j) {
          const int jk = p.resolved()[static_cast<std::size_t>(j)];
          const Complex aj = a_value(mm, us, jk);
          const Complex t1 = a_flow_derivative(mm, us, rs, jk);
          for (std::size_t i = 0; i < nb; ++i) {
            const Complex cb = std::conj(b0[i]);
            part.c[static_cast<std::size_t>(gi)](j, static_cast<int>(i)) += aj * cb;
            part.m1[static_cast<std::size_t>(gi)](j, static_cast<int>(i)) += t1 * cb;
          }
        }
      }
    }
  });

  // deterministic reduction in block order
  std::vector<Eigen::MatrixXcd> c(static_cast<std::size_t>(n_grid),
                                  Eigen::MatrixXcd::Zero(m, static_cast<int>(nb)));
  std::vector<Eigen::MatrixXcd> m1 = c;
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(linear ? m : static_cast<int>(nb), static_cast<int>(nb));
  for (const Partial& part : partials) {
    for (int gi = 0; gi < n_grid; ++gi) {
      c[static_cast<std::size_t>(gi)] += part.c[static_cast<std::size_t>(gi)];
      m1[static_cast<std::size_t>(gi)] += part.m1[static_cast<std::size_t>(gi)];
    }
    d += part.d;
  }
  const double inv_n = 1.0 / static_cast<double>(cfg.n_mc);
  for (int gi = 0; gi < n_grid; ++gi) {
    c[static_cast<std::size_t>(gi)] *= inv_n;
    m1[static_cast<std::size_t>(gi)] *= inv_n;
  }
  d *= inv_n;

  MemoryKernel kern;
  kern.spec = spec;
  kern.ds = cfg.ds;
  kern.t0 = cfg.t0;
  kern.n_mc = cfg.n_mc;
  kern.seed = cfg.seed;
  for (int k : p.resolved()) kern.equations.push_back(k);
  kern.K.resize(static_cast<std::size_t>(n_grid));
  kern.lqa.resize(static_cast<std::size_t>(n_grid));

  if (linear) {
    for (int k : p.resolved()) kern.basis_labels.push_back("u_k" + std::to_string(k));
    kern.gram = gram_matrix(g, p);
    kern.gram_inv = kern.gram.inverse();
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(kern.gram.transpose());
    for (int gi = 0; gi < n_grid; ++gi) {
      Eigen::MatrixXcd lqa(m, m);
      for (int j = 0; j < m; ++j) {
        const Eigen::VectorXcd alpha = lu.solve(c[static_cast<std::size_t>(gi)].row(j).transpose());
        lqa.row(j) = m1[static_cast<std::size_t>(gi)].row(j) - (d.transpose() * alpha).transpose();
      }
      kern.lqa[static_cast<std::size_t>(gi)] = lqa;
      Eigen::MatrixXcd folded(m, m);
      for (int j = 0; j < m; ++j) folded.row(j) = lu.solve(lqa.row(j).transpose()).transpose();
      kern.K[static_cast<std::size_t>(gi)] = folded;
    }
  } else {
    for (const auto& f : spec.functions) kern.basis_labels.push_back(f.label());
    kern.gram = Eigen::MatrixXcd::Identity(static_cast<int>(nb), static_cast<int>(nb));
    kern.gram_inv = kern.gram;
    for (int gi = 0; gi < n_grid; ++gi) {
      kern.lqa[static_cast<std::size_t>(gi)] = m1[static_cast<std::size_t>(gi)] - c[static_cast<std::size_t>(gi)] * d;
      kern.K[static_cast<std::size_t>(gi)] = kern.lqa[static_cast<std::size_t>(gi)];
    }
  }
  return kern;
}

}  // namespace ksmz
