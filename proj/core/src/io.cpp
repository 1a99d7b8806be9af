#include "ksmz/io.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ksmz/csv.hpp"

namespace ksmz {

namespace {
std::string fmt_complex_row_prefix(int k) { return std::to_string(k); }

std::map<std::string, std::string> parse_metadata(const std::vector<std::string>& comments) {
  std::map<std::string, std::string> meta;
  for (const std::string& c : comments) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    meta[trim(c.substr(0, eq))] = trim(c.substr(eq + 1));
  }
  return meta;
}
}  // namespace

void write_mode_state(const std::string& path, const ModeState& state, const SpectralParams& params) {
  CsvWriter w(path);
  w.raw_line("k,re,im");
  for (int k = -params.N / 2; k <= params.N / 2 - 1; ++k) {
    const Complex u = state.at(k, params);
    w.row({fmt_complex_row_prefix(k), fmt_double(u.real()), fmt_double(u.imag())});
  }
  w.close();
}

ModeState read_mode_state(const std::string& path, const SpectralParams& params) {
  const CsvContent c = read_csv(path);
  ModeState state(params);
  for (const auto& row : c.rows) {
    const int k = static_cast<int>(to_long(row.at(0)));
    state.at(k, params) = Complex(to_double(row.at(1)), to_double(row.at(2)));
  }
  return state;
}

void write_trajectory(const std::string& path, const Trajectory& traj, const SpectralParams& params) {
  CsvWriter w(path);
  w.raw_line("t,k,re,im");
  for (const ModeState& s : traj.states) {
    for (int k = -params.N / 2; k <= params.N / 2 - 1; ++k) {
      const Complex u = s.at(k, params);
      w.row({fmt_double(s.time), std::to_string(k), fmt_double(u.real()), fmt_double(u.imag())});
    }
  }
  w.close();
}

void write_sample_set(const std::string& path, const SampleSet& set) {
  const SpectralParams& p = set.params;
  CsvWriter w(path);
  w.comment("burn_time = " + fmt_double(set.burn_time));
  w.comment("seed = " + std::to_string(set.seed));
  w.comment("ic_convention = re/im of each positive mode uniform on [-1,1]");
  w.raw_line("sample,k,re,im");
  for (std::size_t s = 0; s < set.samples.size(); ++s) {
    for (int k = -p.N / 2; k <= p.N / 2 - 1; ++k) {
      const Complex u = set.samples[s][static_cast<std::size_t>(p.index(k))];
      w.row({std::to_string(s), std::to_string(k), fmt_double(u.real()), fmt_double(u.imag())});
    }
  }
  w.close();
}

SampleSet read_sample_set(const std::string& path, const SpectralParams& params) {
  const CsvContent c = read_csv(path);
  const auto meta = parse_metadata(c.comments);
  SampleSet set;
  set.params = params;
  if (meta.count("burn_time")) set.burn_time = to_double(meta.at("burn_time"));
  if (meta.count("seed")) set.seed = static_cast<std::uint64_t>(std::stoull(meta.at("seed")));
  for (const auto& row : c.rows) {
    const std::size_t s = static_cast<std::size_t>(to_long(row.at(0)));
    if (set.samples.size() <= s) set.samples.resize(s + 1, std::vector<Complex>(static_cast<std::size_t>(params.N)));
    const int k = static_cast<int>(to_long(row.at(1)));
    set.samples[s][static_cast<std::size_t>(params.index(k))] =
        Complex(to_double(row.at(2)), to_double(row.at(3)));
  }
  return set;
}

void write_moment_report(const std::string& path, const MomentReport& report) {
  CsvWriter w(path);
  w.raw_line("k,component,mean,var,skew,flat");
  for (const auto& e : report.entries) {
    w.row({std::to_string(e.k), std::string(1, e.component == 'r' ? 'r' : 'i'), fmt_double(e.mean),
           fmt_double(e.var), fmt_double(e.skew),
           e.flat ? fmt_double(*e.flat) : std::string("nan")});
  }
  w.close();
}

void write_density(const std::string& path, const DiagonalGaussian& g) {
  CsvWriter w(path);
  w.comment("nu = " + fmt_double(g.params.nu));
  w.comment("N = " + std::to_string(g.params.N));
  w.comment("convention = E|w-mu|^2 = var, re/im independent with variance var/2");
  w.raw_line("k,mu_re,mu_im,var");
  for (int k = 1; k <= g.params.max_pos(); ++k) {
    const Complex m = g.mean(k);
    w.row({std::to_string(k), fmt_double(m.real()), fmt_double(m.imag()), fmt_double(g.variance(k))});
  }
  w.close();
}

DiagonalGaussian read_density(const std::string& path, const SpectralParams& params) {
  const CsvContent c = read_csv(path);
  const int half = params.n() / 2;
  std::vector<Complex> mu(static_cast<std::size_t>(half));
  std::vector<double> a(static_cast<std::size_t>(half), -1.0);
  for (const auto& row : c.rows) {
    const int k = static_cast<int>(to_long(row.at(0)));
    if (k < 1 || k > half) throw std::runtime_error("density file: wavenumber out of range");
    mu[static_cast<std::size_t>(k - 1)] = Complex(to_double(row.at(1)), to_double(row.at(2)));
    a[static_cast<std::size_t>(k - 1)] = to_double(row.at(3));
  }
  for (double v : a)
    if (v < 0.0) throw std::runtime_error("density file: missing mode row");
  return DiagonalGaussian(params, std::move(mu), std::move(a));
}

void write_autocorr(const std::string& path, const AutocorrSet& acs) {
  CsvWriter w(path);
  w.comment("dtau = " + fmt_double(acs.dtau));
  w.raw_line("k,component,lag,R");
  for (const auto& [key, table] : acs.tables) {
    for (std::size_t l = 0; l < table.r.size(); ++l) {
      w.row({std::to_string(key.first), std::string(1, key.second),
             fmt_double(static_cast<double>(l) * table.dtau), fmt_double(table.r[l])});
    }
  }
  w.close();
}

AutocorrSet read_autocorr(const std::string& path) {
  const CsvContent c = read_csv(path);
  const auto meta = parse_metadata(c.comments);
  AutocorrSet acs;
  if (!meta.count("dtau")) throw std::runtime_error("autocorr file: missing dtau metadata");
  acs.dtau = to_double(meta.at("dtau"));
  for (const auto& row : c.rows) {
    const int k = static_cast<int>(to_long(row.at(0)));
    const char comp = row.at(1).at(0);
    AutocorrTable& t = acs.tables[{k, comp}];
    t.dtau = acs.dtau;
    t.r.push_back(to_double(row.at(3)));
  }
  return acs;
}

void write_noise_model(const std::string& path, const NoiseModel& nm) {
  CsvWriter w(path);
  w.comment("dt = " + fmt_double(nm.dt));
  w.comment("components = independent re/im moving averages, increments N(0, dt)");
  w.raw_line("k,component,tap_index,weight");
  for (const auto& [key, comp] : nm.components) {
    for (int i = -comp.n_w; i <= comp.n_w; ++i) {
      w.row({std::to_string(key.first), std::string(1, key.second), std::to_string(i),
             fmt_double(comp.weights[static_cast<std::size_t>(i + comp.n_w)])});
    }
  }
  w.close();
}

NoiseModel read_noise_model(const std::string& path, const DiagonalGaussian& g, const Partition& p) {
  const CsvContent c = read_csv(path);
  const auto meta = parse_metadata(c.comments);
  if (!meta.count("dt")) throw std::runtime_error("noise model file: missing dt metadata");
  NoiseModel nm;
  nm.dt = to_double(meta.at("dt"));
  nm.params = g.params;
  nm.modes = p.unresolved_pos();
  std::map<std::pair<int, char>, std::map<int, double>> taps;
  for (const auto& row : c.rows) {
    const int k = static_cast<int>(to_long(row.at(0)));
    const char comp = row.at(1).at(0);
    taps[{k, comp}][static_cast<int>(to_long(row.at(2)))] = to_double(row.at(3));
  }
  for (int k : nm.modes) {
    for (char comp : {'r', 'i'}) {
      const auto it = taps.find({k, comp});
      if (it == taps.end()) throw std::runtime_error("noise model file: missing component for mode");
      const int n_w = -it->second.begin()->first;
      NoiseModel::Component nc;
      nc.n_w = n_w;
      nc.weights.assign(static_cast<std::size_t>(2 * n_w + 1), 0.0);
      for (const auto& [idx, wgt] : it->second) nc.weights[static_cast<std::size_t>(idx + n_w)] = wgt;
      nc.r0 = 0.0;
      for (double wgt : nc.weights) nc.r0 += wgt * wgt * nm.dt;
      nm.components[{k, comp}] = nc;
    }
    nm.means[k] = g.mean(k);
  }
  return nm;
}

namespace {
BasisFunction parse_basis_label(const std::string& label) {
  BasisFunction f;
  std::size_t pos = 0;
  while (pos < label.size()) {
    std::size_t end = label.find('*', pos);
    if (end == std::string::npos) end = label.size();
    const std::string part = label.substr(pos, end - pos);
    // "k<signed>^<order>"
    const std::size_t caret = part.find('^');
    if (part.empty() || part[0] != 'k' || caret == std::string::npos)
      throw std::runtime_error("kernel file: bad basis label " + label);
    f.factors.emplace_back(std::stoi(part.substr(1, caret - 1)), std::stoi(part.substr(caret + 1)));
    pos = end + 1;
  }
  return f;
}
}  // namespace

void write_kernel(const std::string& path, const MemoryKernel& kernel) {
  CsvWriter w(path);
  w.comment(std::string("projection = ") +
            (kernel.spec.kind == ProjectionSpec::Kind::Linear ? "linear" : "finite-rank"));
  w.comment("ds = " + fmt_double(kernel.ds));
  w.comment("t0 = " + fmt_double(kernel.t0));
  w.comment("n_mc = " + std::to_string(kernel.n_mc));
  w.comment("seed = " + std::to_string(kernel.seed));
  w.comment("beta = " + fmt_double(kernel.spec.beta));
  {
    std::string eqs = "equations =";
    for (int k : kernel.equations) eqs += " " + std::to_string(k);
    w.comment(eqs);
  }
  for (std::size_t i = 0; i < kernel.basis_labels.size(); ++i)
    w.comment("basis " + std::to_string(i) + " = " + kernel.basis_labels[i]);
  w.raw_line("s,j,i,re,im");
  for (int g = 0; g < kernel.n_grid(); ++g) {
    const double s = g * kernel.ds;
    const Eigen::MatrixXcd& K = kernel.K[static_cast<std::size_t>(g)];
    for (int j = 0; j < K.rows(); ++j) {
      for (int i = 0; i < K.cols(); ++i) {
        w.row({fmt_double(s), std::to_string(kernel.equations[static_cast<std::size_t>(j)]),
               std::to_string(i), fmt_double(K(j, i).real()), fmt_double(K(j, i).imag())});
      }
    }
  }
  w.close();
}

MemoryKernel read_kernel(const std::string& path, const Partition& p) {
  const CsvContent c = read_csv(path);
  const auto meta = parse_metadata(c.comments);
  MemoryKernel kern;
  const std::string kind = meta.at("projection");
  kern.spec.kind = kind == "linear" ? ProjectionSpec::Kind::Linear : ProjectionSpec::Kind::FiniteRank;
  kern.ds = to_double(meta.at("ds"));
  kern.t0 = to_double(meta.at("t0"));
  kern.n_mc = static_cast<std::size_t>(std::stoull(meta.at("n_mc")));
  kern.seed = static_cast<std::uint64_t>(std::stoull(meta.at("seed")));
  if (meta.count("beta")) kern.spec.beta = to_double(meta.at("beta"));
  for (int k : p.resolved()) kern.equations.push_back(k);

  // basis labels in index order
  std::map<int, std::string> labels;
  for (const std::string& comment : c.comments) {
    if (comment.rfind("basis ", 0) != 0) continue;
    const auto eq = comment.find('=');
    labels[std::stoi(comment.substr(6, eq - 6))] = comment.substr(eq + 2);
  }
  for (const auto& [idx, label] : labels) {
    kern.basis_labels.push_back(label);
    if (kern.spec.kind == ProjectionSpec::Kind::FiniteRank)
      kern.spec.functions.push_back(parse_basis_label(label));
  }
  const std::size_t nb = kern.basis_labels.size();
  if (nb == 0) throw std::runtime_error("kernel file: no basis metadata");

  const int n_grid = static_cast<int>(std::lround(kern.t0 / kern.ds)) + 1;
  kern.K.assign(static_cast<std::size_t>(n_grid), Eigen::MatrixXcd::Zero(p.m(), static_cast<int>(nb)));
  std::map<int, int> eq_row;
  for (int j = 0; j < p.m(); ++j) eq_row[kern.equations[static_cast<std::size_t>(j)]] = j;
  for (const auto& row : c.rows) {
    const double s = to_double(row.at(0));
    const int gi = static_cast<int>(std::lround(s / kern.ds));
    const int j = eq_row.at(static_cast<int>(to_long(row.at(1))));
    const int i = static_cast<int>(to_long(row.at(2)));
    kern.K[static_cast<std::size_t>(gi)](j, i) = Complex(to_double(row.at(3)), to_double(row.at(4)));
  }
  kern.lqa = kern.K;  // raw tables are not persisted
  kern.gram = Eigen::MatrixXcd::Identity(static_cast<int>(nb), static_cast<int>(nb));
  kern.gram_inv = kern.gram;
  return kern;
}

void write_reduced_trajectory(const std::string& path, const ReducedTrajectory& traj, long realization) {
  CsvWriter w(path);
  w.comment("seed = " + std::to_string(traj.seed));
  w.raw_line("t,k,re,im,realization");
  for (std::size_t ti = 0; ti < traj.times.size(); ++ti) {
    for (std::size_t mi = 0; mi < traj.modes.size(); ++mi) {
      const Complex v = traj.values[ti][mi];
      w.row({fmt_double(traj.times[ti]), std::to_string(traj.modes[mi]), fmt_double(v.real()),
             fmt_double(v.imag()), std::to_string(realization)});
    }
  }
  w.close();
}

ReducedTrajectory read_reduced_trajectory(const std::string& path) {
  const CsvContent c = read_csv(path);
  ReducedTrajectory traj;
  std::set<int> modes;
  std::vector<double> times;
  for (const auto& row : c.rows) modes.insert(static_cast<int>(to_long(row.at(1))));
  traj.modes.assign(modes.begin(), modes.end());
  std::map<double, std::vector<Complex>> by_time;
  for (const auto& row : c.rows) {
    const double t = to_double(row.at(0));
    const int k = static_cast<int>(to_long(row.at(1)));
    auto& slot = by_time[t];
    if (slot.empty()) slot.resize(traj.modes.size());
    const auto it = std::lower_bound(traj.modes.begin(), traj.modes.end(), k);
    slot[static_cast<std::size_t>(it - traj.modes.begin())] =
        Complex(to_double(row.at(2)), to_double(row.at(3)));
  }
  for (const auto& [t, vals] : by_time) {
    traj.times.push_back(t);
    traj.values.push_back(vals);
  }
  return traj;
}

}  // namespace ksmz
