#include "dpplab/sampler.hpp"

#define EIGEN_FFTW_DEFAULT
#include <fftw3.h>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dpplab {

Window::Window(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size())
    throw std::invalid_argument("Window: lower and upper must share a positive dimension");
  for (Eigen::Index i = 0; i < lower_.size(); ++i)
    if (!(upper_(i) > lower_(i))) throw std::invalid_argument("Window: upper must exceed lower on every axis");
}

Window Window::cube(int dimension, double side) {
  return {Eigen::VectorXd::Zero(dimension), Eigen::VectorXd::Constant(dimension, side)};
}

double Window::volume() const { return sides().prod(); }

bool Window::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  for (Eigen::Index i = 0; i < lower_.size(); ++i)
    if (x(i) < lower_(i) || x(i) > upper_(i)) return false;
  return true;
}

std::optional<Window> Window::eroded(double r) const {
  if (r < 0.0) throw std::invalid_argument("Window::eroded: r must be non-negative");
  const Eigen::VectorXd lo = lower_.array() + r;
  const Eigen::VectorXd hi = upper_.array() - r;
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(hi(i) > lo(i))) return std::nullopt;
  return Window(lo, hi);
}

PointPattern restrict_to(const PointPattern& pattern, const Window& sub) {
  const Window& w = pattern.window;
  if (sub.dimension() != w.dimension())
    throw std::invalid_argument("restrict_to: dimension mismatch");
  for (int a = 0; a < w.dimension(); ++a)
    if (sub.lower()(a) < w.lower()(a) || sub.upper()(a) > w.upper()(a))
      throw std::invalid_argument("restrict_to: sub-window leaves the pattern window");
  PointPattern out;
  out.window = sub;
  out.provenance = pattern.provenance;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < pattern.size(); ++i)
    if (sub.contains(pattern.points.row(i).transpose())) keep.push_back(i);
  out.points.resize(static_cast<Eigen::Index>(keep.size()), w.dimension());
  for (std::size_t i = 0; i < keep.size(); ++i) out.points.row(i) = pattern.points.row(keep[i]);
  return out;
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ mix(index + 0x632BE59BD9B4E019ULL));
}

PointPattern sample_poisson(double rho, const Window& window, std::uint64_t seed) {
  if (!(rho > 0.0)) throw std::invalid_argument("sample_poisson: rho must be positive");
  std::mt19937_64 rng(seed);
  std::poisson_distribution<long long> count_dist(rho * window.volume());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const long long n = count_dist(rng);
  const int d = window.dimension();
  PointPattern out;
  out.window = window;
  out.points.resize(n, d);
  const Eigen::VectorXd sides = window.sides();
  for (long long i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) out.points(i, a) = window.lower()(a) + sides(a) * unif(rng);
  out.provenance.generator = "poisson";
  out.provenance.seed = seed;
  return out;
}

PointPattern sample_model(const KernelModel& model, const Window& window, std::uint64_t seed,
                          const SamplerOptions& opts) {
  if (model.family() == Family::PoissonDegenerate) {
    auto p = sample_poisson(model.rho(), window, seed);
    p.provenance.model_label = model.label();
    return p;
  }
  return sample_dpp(model, window, seed, opts);
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cd = std::complex<double>;

int smooth_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

int wrap(long long k, int n) {
  const long long r = k % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

// Real Fourier functions selected on the torus; kind 0 constant, 1 cosine, 2 sine.
struct Basis {
  int d = 0;
  Eigen::VectorXd sides;
  double volume = 0.0;
  std::vector<int> kmax;
  Eigen::MatrixXi k;  // one row per function
  std::vector<int> kind;
  int size() const { return static_cast<int>(kind.size()); }
};

// Values of every basis function at x (torus coordinates) written into `out`.
void eval_basis(const Basis& basis, const double* x, std::vector<std::vector<cd>>& phase,
                double* out) {
  const double s = std::sqrt(2.0 / basis.volume);
  const double c0 = 1.0 / std::sqrt(basis.volume);
  for (int a = 0; a < basis.d; ++a) {
    auto& ph = phase[a];
    const int km = basis.kmax[a];
    ph.resize(2 * km + 1);
    for (int k = 0; k <= km; ++k) {
      const double th = kTwoPi * k * x[a] / basis.sides(a);
      ph[km + k] = cd(std::cos(th), std::sin(th));
      ph[km - k] = std::conj(ph[km + k]);
    }
  }
  const int n = basis.size();
  for (int j = 0; j < n; ++j) {
    if (basis.kind[j] == 0) {
      out[j] = c0;
      continue;
    }
    cd z = phase[0][basis.kmax[0] + basis.k(j, 0)];
    for (int a = 1; a < basis.d; ++a) z *= phase[a][basis.kmax[a] + basis.k(j, a)];
    out[j] = basis.kind[j] == 1 ? s * z.real() : s * z.imag();
  }
}

// Residual K(x, x) minus squared projections, tracked on a periodic grid of cell corners.
class ResidualGrid {
 public:
  ResidualGrid(const Basis& basis, std::vector<int> dims) : basis_(basis), dims_(std::move(dims)) {
    total_ = 1;
    for (int n : dims_) total_ *= n;
    values_.assign(total_, 0.0);
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
    plus_.resize(basis_.size());
    minus_.resize(basis_.size());
    for (int j = 0; j < basis_.size(); ++j) {
      plus_[j] = index_of(j, 1);
      minus_[j] = index_of(j, -1);
    }
    std::vector<cd> coef(total_, cd(0.0, 0.0));
    const double inv_v = 1.0 / basis_.volume;
    coef[0] += basis_.size() * inv_v;
    for (int j = 0; j < basis_.size(); ++j) {
      if (basis_.kind[j] == 0) continue;
      const double sign = basis_.kind[j] == 1 ? 1.0 : -1.0;
      coef[index_of(j, 2)] += 0.5 * sign * inv_v;
      coef[index_of(j, -2)] += 0.5 * sign * inv_v;
    }
    transform(coef);
    for (long long g = 0; g < total_; ++g) values_[g] = coef[g].real();
  }

  // Subtract the squares of the functions with coefficient columns `cols`.
  void subtract(const Eigen::Ref<const Eigen::MatrixXd>& cols) {
    const double s = std::sqrt(2.0 / basis_.volume);
    const double c0 = 1.0 / std::sqrt(basis_.volume);
    std::vector<cd> coef(total_);
    for (Eigen::Index c = 0; c < cols.cols(); c += 2) {
      std::fill(coef.begin(), coef.end(), cd(0.0, 0.0));
      for (int part = 0; part < 2 && c + part < cols.cols(); ++part) {
        const cd unit = part == 0 ? cd(1.0, 0.0) : cd(0.0, 1.0);
        for (int j = 0; j < basis_.size(); ++j) {
          const double e = cols(j, c + part);
          if (basis_.kind[j] == 0) {
            coef[0] += unit * (c0 * e);
            continue;
          }
          // Hermitian split of s * (q_cos - i q_sin) so the transform stays real per part.
          const cd h = basis_.kind[j] == 1 ? cd(0.5 * s * e, 0.0) : cd(0.0, -0.5 * s * e);
          coef[plus_[j]] += unit * h;
          coef[minus_[j]] += unit * std::conj(h);
        }
      }
      transform(coef);
      for (long long g = 0; g < total_; ++g) {
        const double g1 = coef[g].real();
        const double g2 = coef[g].imag();
        values_[g] -= g1 * g1 + g2 * g2;
      }
    }
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<int>& dims() const { return dims_; }
  long long total() const { return total_; }

 private:
  long long index_of(int j, int scale) const {
    long long flat = 0, stride = 1;
    for (int a = 0; a < basis_.d; ++a) {
      flat += stride * wrap(static_cast<long long>(scale) * basis_.k(j, a), dims_[a]);
      stride *= dims_[a];
    }
    return flat;
  }

  void transform(std::vector<cd>& data) {
    long long stride = 1;
    for (int a = 0; a < basis_.d; ++a) {
      const int n = dims_[a];
      std::vector<cd> line(n), out(n);
      const long long block = stride * n;
      for (long long base = 0; base < total_; base += block)
        for (long long off = 0; off < stride; ++off) {
          for (int i = 0; i < n; ++i) line[i] = data[base + off + i * stride];
          fft_.inv(out, line);
          for (int i = 0; i < n; ++i) data[base + off + i * stride] = out[i];
        }
      stride *= n;
    }
  }

  const Basis& basis_;
  std::vector<int> dims_;
  long long total_ = 0;
  std::vector<double> values_;
  std::vector<long long> plus_, minus_;
  Eigen::FFT<double> fft_;
};

// Smallest factor s >= 1 for which the torus with sides s * sides carries exactly rho * volume
// lattice frequencies inside the ball of the given radius.
double ball_count_scale(const Eigen::VectorXd& sides, double radius, double rho) {
  const int d = static_cast<int>(sides.size());
  const double reach = 1.5 * radius;
  std::vector<int> kmax(d);
  long long lattice = 1;
  for (int a = 0; a < d; ++a) {
    kmax[a] = static_cast<int>(std::ceil(reach * sides(a)));
    lattice *= 2LL * kmax[a] + 1;
  }
  std::vector<double> norms;
  for (long long flat = 0; flat < lattice; ++flat) {
    long long rest = flat;
    double xi2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const int span = 2 * kmax[a] + 1;
      const double xi = static_cast<double>(rest % span - kmax[a]) / sides(a);
      rest /= span;
      xi2 += xi * xi;
    }
    const double nu = std::sqrt(xi2);
    if (nu <= reach) norms.push_back(nu);
  }
  std::sort(norms.begin(), norms.end());
  const double volume = sides.prod();
  // Between consecutive distinct norms the count is constant; solve count = rho * volume * s^d there.
  for (std::size_t i = 0; i < norms.size();) {
    std::size_t j = i;
    while (j < norms.size() && norms[j] == norms[i]) ++j;
    const double count = static_cast<double>(j);
    const double s = std::pow(count / (rho * volume), 1.0 / d);
    const double lo = norms[i] / radius * (1.0 + 1e-9);
    const double hi = (j < norms.size() ? norms[j] / radius : reach / radius) * (1.0 - 1e-9);
    if (s >= 1.0 && s > lo && s < hi) return s;
    i = j;
  }
  return 1.0;
}

}  // namespace

PointPattern sample_dpp(const KernelModel& model, const Window& window, std::uint64_t seed,
                        const SamplerOptions& opts) {
  if (model.family() == Family::PoissonDegenerate)
    throw InvalidModel("sample_dpp: the degenerate kernel is sampled by sample_poisson");
  require_valid(model);
  const int d = model.dimension();
  if (window.dimension() != d) throw std::invalid_argument("sample_dpp: window dimension mismatch");
  if (opts.block < 1) throw std::invalid_argument("sample_dpp: block must be positive");

  Basis basis;
  basis.d = d;
  basis.sides = window.sides().array() + opts.margin_factor * effective_range(model);
  if (model.family() == Family::Bessel)
    basis.sides *= ball_count_scale(basis.sides, model.spectral_radius(0.5), model.rho());
  basis.volume = basis.sides.prod();
  const double band = model.spectral_radius(opts.truncation);
  basis.kmax.resize(d);
  long long lattice = 1;
  for (int a = 0; a < d; ++a) {
    basis.kmax[a] = static_cast<int>(std::floor(band * basis.sides(a)));
    lattice *= 2LL * basis.kmax[a] + 1;
  }

  // Half lattice: k = 0 plus vectors whose first nonzero coordinate is positive.
  struct Candidate {
    std::vector<int> k;
    double spectrum;
  };
  std::vector<Candidate> modes;
  std::vector<int> k(d);
  for (long long flat = 0; flat < lattice; ++flat) {
    long long rest = flat;
    for (int a = 0; a < d; ++a) {
      const int span = 2 * basis.kmax[a] + 1;
      k[a] = static_cast<int>(rest % span) - basis.kmax[a];
      rest /= span;
    }
    int first = 0;
    for (int a = 0; a < d; ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first < 0) continue;
    double xi2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xi = k[a] / basis.sides(a);
      xi2 += xi * xi;
    }
    const double f = model.spectrum_radial(std::sqrt(xi2));
    if (f >= opts.truncation) modes.push_back({k, std::min(f, 1.0)});
  }
  auto multiplicity = [](const Candidate& c) {
    return std::all_of(c.k.begin(), c.k.end(), [](int v) { return v == 0; }) ? 1 : 2;
  };
  long long functions = 0;
  for (const auto& m : modes) functions += multiplicity(m);
  if (functions > opts.modes_cap) {
    std::vector<std::size_t> order(modes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return modes[a].spectrum > modes[b].spectrum; });
    double mass = 0.0, kept_mass = 0.0;
    for (const auto& m : modes) mass += multiplicity(m) * m.spectrum;
    std::vector<char> keep(modes.size(), 0);
    long long kept = 0;
    for (std::size_t i : order) {
      if (kept + multiplicity(modes[i]) > opts.modes_cap) break;
      keep[i] = 1;
      kept += multiplicity(modes[i]);
      kept_mass += multiplicity(modes[i]) * modes[i].spectrum;
    }
    if (kept_mass < (1.0 - 1e-6) * mass) {
      std::ostringstream os;
      os << "modes cap exceeded: " << functions << " Fourier functions needed, cap " << opts.modes_cap
         << " captures only " << kept_mass / mass << " of the spectral mass; raise modes_cap";
      throw std::runtime_error(os.str());
    }
    std::vector<Candidate> trimmed;
    for (std::size_t i = 0; i < modes.size(); ++i)
      if (keep[i]) trimmed.push_back(modes[i]);
    modes.swap(trimmed);
    functions = kept;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<int>> chosen_k;
  for (const auto& m : modes) {
    if (multiplicity(m) == 1) {
      if (unif(rng) < m.spectrum) {
        chosen_k.push_back(m.k);
        basis.kind.push_back(0);
      }
      continue;
    }
    for (int kind = 1; kind <= 2; ++kind)
      if (unif(rng) < m.spectrum) {
        chosen_k.push_back(m.k);
        basis.kind.push_back(kind);
      }
  }
  const int n_total = basis.size();
  basis.k.resize(n_total, d);
  for (int j = 0; j < n_total; ++j)
    for (int a = 0; a < d; ++a) basis.k(j, a) = chosen_k[j][a];

  PointPattern out;
  out.window = window;
  out.provenance.generator = "dpp";
  out.provenance.seed = seed;
  out.provenance.model_label = model.label();
  out.provenance.margin_factor = opts.margin_factor;
  out.provenance.torus_sides.assign(basis.sides.data(), basis.sides.data() + d);
  out.provenance.modes_retained = functions;
  out.provenance.modes_selected = n_total;
  if (n_total == 0) {
    out.points.resize(0, d);
    return out;
  }

  // Proposal grid.
  const double sup_f = model.spectrum_radial(0.0);
  const double main_band = model.spectral_radius(0.1 * sup_f);
  const double per_length =
      std::max(opts.grid_density * std::pow(model.rho(), 1.0 / d), 3.0 * main_band);
  std::vector<int> dims(d);
  Eigen::VectorXd cell(d);
  double cell_volume = 1.0;
  for (int a = 0; a < d; ++a) {
    dims[a] = smooth_size(std::max(16, static_cast<int>(std::ceil(per_length * basis.sides(a)))));
    cell(a) = basis.sides(a) / dims[a];
    cell_volume *= cell(a);
  }
  ResidualGrid grid(basis, dims);
  const long long cells = grid.total();

  const int N = n_total;
  const int block = opts.block;
  Eigen::MatrixXd E(N, N);
  int m0 = 0;
  Eigen::MatrixXd pend_u(N, block), pend_c(N, block), pend_d(block, block);
  Eigen::VectorXd pend_n(block);
  int npend = 0;
  std::vector<Eigen::VectorXd> accepted;
  accepted.reserve(N);
  double inflation = 1.2;
  std::vector<std::vector<cd>> phase(d);
  std::vector<double> cdf(cells);
  std::vector<int> corner(d);

  auto flush = [&]() {
    if (npend == 0) return;
    Eigen::MatrixXd T = pend_u.leftCols(npend);
    if (m0 > 0) {
      T.noalias() -= E.leftCols(m0) * pend_c.topLeftCorner(m0, npend);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(T);
    E.middleCols(m0, npend) = qr.householderQ() * Eigen::MatrixXd::Identity(N, npend);
    grid.subtract(E.middleCols(m0, npend));
    m0 += npend;
    npend = 0;
  };

  long long proposals = 0, overflows = 0;
  while (m0 + npend < N) {
    // Cell envelope from the corner maxima of the tracked residual.
    const auto& vals = grid.values();
    const double remaining = N - m0;
    const double floor_density = 0.02 * remaining / basis.volume;
    double acc = 0.0;
    for (long long c = 0; c < cells; ++c) {
      long long rest = c;
      for (int a = 0; a < d; ++a) {
        corner[a] = static_cast<int>(rest % dims[a]);
        rest /= dims[a];
      }
      double vmax = 0.0;
      for (int mask = 0; mask < (1 << d); ++mask) {
        long long flat = 0, stride = 1;
        for (int a = 0; a < d; ++a) {
          const int idx = (corner[a] + ((mask >> a) & 1)) % dims[a];
          flat += stride * idx;
          stride *= dims[a];
        }
        vmax = std::max(vmax, vals[flat]);
      }
      acc += inflation * vmax + floor_density;
      cdf[c] = acc;
    }
    const double envelope_mass = acc * cell_volume;
    const int want = std::min(block, N - m0);
    const double rate = std::clamp(remaining / envelope_mass, 1e-3, 1.0);
    const int pool = std::clamp(static_cast<int>(std::ceil(1.3 * want / rate)) + 4, 8, 8192);

    Eigen::MatrixXd X(d, pool);
    Eigen::VectorXd weight(pool);
    Eigen::MatrixXd V(N, pool);
    for (int i = 0; i < pool; ++i) {
      const double u = unif(rng) * acc;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const long long c = std::min<long long>(it - cdf.begin(), cells - 1);
      const double before = c == 0 ? 0.0 : cdf[c - 1];
      weight(i) = cdf[c] - before;
      long long rest = c;
      for (int a = 0; a < d; ++a) {
        const int idx = static_cast<int>(rest % dims[a]);
        rest /= dims[a];
        X(a, i) = (idx + unif(rng)) * cell(a);
      }
      eval_basis(basis, X.col(i).data(), phase, V.col(i).data());
    }
    Eigen::MatrixXd A;
    if (m0 > 0) A.noalias() = E.leftCols(m0).transpose() * V;
    const Eigen::VectorXd vnorm = V.colwise().squaredNorm().transpose();
    Eigen::VectorXd proj(block);
    for (int i = 0; i < pool && m0 + npend < N; ++i) {
      ++proposals;
      const auto v = V.col(i);
      double r = vnorm(i);
      if (m0 > 0) r -= A.col(i).squaredNorm();
      for (int q = 0; q < npend; ++q) {
        double p = pend_u.col(q).dot(v);
        if (m0 > 0) p -= pend_c.col(q).head(m0).dot(A.col(i));
        for (int q2 = 0; q2 < q; ++q2) p -= pend_d(q, q2) * proj(q2);
        p /= pend_n(q);
        proj(q) = p;
        r -= p * p;
      }
      if (r <= 0.0) continue;
      if (r > weight(i)) {
        ++overflows;
        inflation *= 1.5;
      } else if (unif(rng) * weight(i) >= r) {
        continue;
      }
      pend_u.col(npend) = v;
      if (m0 > 0) pend_c.col(npend).head(m0) = A.col(i);
      for (int q2 = 0; q2 < npend; ++q2) pend_d(npend, q2) = proj(q2);
      pend_n(npend) = std::sqrt(r);
      ++npend;
      accepted.emplace_back(X.col(i));
      if (npend == block) break;
    }
    flush();
  }
  out.provenance.proposals = proposals;
  out.provenance.envelope_overflows = overflows;

  const Eigen::VectorXd sides = window.sides();
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    bool inside = true;
    for (int a = 0; a < d; ++a)
      if (accepted[i](a) >= sides(a)) inside = false;
    if (inside) keep.push_back(static_cast<Eigen::Index>(i));
  }
  out.points.resize(static_cast<Eigen::Index>(keep.size()), d);
  for (std::size_t i = 0; i < keep.size(); ++i)
    out.points.row(i) = (window.lower() + accepted[keep[i]]).transpose();
  return out;
}

}  // namespace dpplab
