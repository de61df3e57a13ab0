#include "dpplab/estimators.hpp"

#include "dpplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace dpplab {

namespace {

// Integral of f over [a, b] by order-8 Gauss-Legendre panels split at `breaks`.
template <class F>
double piecewise_integral(F&& f, double a, double b, const std::vector<double>& breaks) {
  Eigen::VectorXd bp(static_cast<Eigen::Index>(breaks.size()));
  for (std::size_t i = 0; i < breaks.size(); ++i) bp(static_cast<Eigen::Index>(i)) = breaks[i];
  const auto q = composite_gauss_legendre(bp, 1, 8, a, b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) acc += q.weights(i) * f(q.nodes(i));
  return acc;
}

template <class F>
double simpson_integral(F&& f, double a, double b, int n = 1025) {
  const Eigen::VectorXd w = simpson_weights(n, a, b);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += w(i) * f(a + (b - a) * i / (n - 1));
  return acc;
}

// Calls visit(i, j, z, dist) for every unordered pair closer than `radius`.
template <class Visit>
void for_each_close_pair(const PointPattern& pattern, double radius, Visit&& visit) {
  const Eigen::Index n = pattern.size();
  const int d = pattern.window.dimension();
  if (n < 2) return;
  const Eigen::VectorXd lo = pattern.window.lower();
  const Eigen::VectorXd sides = pattern.window.sides();
  std::vector<int> cells(d);
  std::vector<long long> stride(d);
  long long total = 1;
  for (int a = 0; a < d; ++a) {
    cells[a] = std::max(1, std::min(4096, static_cast<int>(std::floor(sides(a) / radius))));
    stride[a] = total;
    total *= cells[a];
  }
  auto cell_coord = [&](Eigen::Index i, int a) {
    const int c = static_cast<int>(std::floor((pattern.points(i, a) - lo(a)) / sides(a) * cells[a]));
    return std::clamp(c, 0, cells[a] - 1);
  };
  std::unordered_map<long long, std::vector<Eigen::Index>> bins;
  for (Eigen::Index i = 0; i < n; ++i) {
    long long key = 0;
    for (int a = 0; a < d; ++a) key += stride[a] * cell_coord(i, a);
    bins[key].push_back(i);
  }
  const double r2 = radius * radius;
  Eigen::VectorXd z(d);
  std::vector<int> own(d), off(d);
  const int neighbours = static_cast<int>(std::pow(3, d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) own[a] = cell_coord(i, a);
    for (int m = 0; m < neighbours; ++m) {
      int rest = m;
      long long key = 0;
      bool ok = true;
      for (int a = 0; a < d; ++a) {
        const int c = own[a] + rest % 3 - 1;
        rest /= 3;
        if (c < 0 || c >= cells[a]) {
          ok = false;
          break;
        }
        key += stride[a] * c;
      }
      if (!ok) continue;
      const auto it = bins.find(key);
      if (it == bins.end()) continue;
      for (Eigen::Index j : it->second) {
        if (j <= i) continue;
        z = pattern.points.row(j) - pattern.points.row(i);
        const double dist2 = z.squaredNorm();
        if (dist2 <= r2) visit(i, j, z, std::sqrt(dist2));
      }
    }
  }
}

}  // namespace

std::string smoothing_name(SmoothingFamily family) {
  switch (family) {
    case SmoothingFamily::Epanechnikov:
      return "epanechnikov";
    case SmoothingFamily::Box:
      return "box";
    case SmoothingFamily::Triangular:
      return "triangular";
  }
  return "unknown";
}

SmoothingFamily parse_smoothing(const std::string& name) {
  if (name == "epanechnikov") return SmoothingFamily::Epanechnikov;
  if (name == "box") return SmoothingFamily::Box;
  if (name == "triangular") return SmoothingFamily::Triangular;
  throw std::invalid_argument("unknown smoothing kernel: " + name);
}

SmoothingKernel::SmoothingKernel(SmoothingFamily family, double half_width)
    : family_(family), half_width_(half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("SmoothingKernel: half width must be positive");
  const double T = half_width_;
  const std::vector<double> mid{0.0};
  auto self = [this](double t) { return (*this)(t); };
  mass_ = piecewise_integral(self, -T, T, mid);
  first_ = piecewise_integral([&](double t) { return t * self(t); }, -T, T, mid);
  second_ = piecewise_integral([&](double t) { return t * t * std::abs(self(t)); }, -T, T, mid);
  l2_ = piecewise_integral([&](double t) { return self(t) * self(t); }, -T, T, mid);
  const std::vector<double> conv_breaks{-T, 0.0, T};
  conv_l2_ = piecewise_integral(
      [&](double s) {
        const double c = self_convolution(s);
        return c * c;
      },
      -2.0 * T, 2.0 * T, conv_breaks);
}

double SmoothingKernel::operator()(double t) const {
  const double u = t / half_width_;
  if (std::abs(u) > 1.0) return 0.0;
  switch (family_) {
    case SmoothingFamily::Epanechnikov:
      return 0.75 * (1.0 - u * u) / half_width_;
    case SmoothingFamily::Box:
      return 0.5 / half_width_;
    case SmoothingFamily::Triangular:
      return (1.0 - std::abs(u)) / half_width_;
  }
  return 0.0;
}

double SmoothingKernel::self_convolution(double s) const {
  const double T = half_width_;
  const double lo = std::max(-T, s - T);
  const double hi = std::min(T, s + T);
  if (!(hi > lo)) return 0.0;
  return piecewise_integral([&](double t) { return (*this)(t) * (*this)(s - t); }, lo, hi, {0.0, s});
}

double intensity_hat(const PointPattern& pattern) {
  const double vol = pattern.window.volume();
  if (!(vol > 0.0)) throw std::invalid_argument("intensity_hat: window volume must be positive");
  return static_cast<double>(pattern.size()) / vol;
}

double sigma2_intensity(const KernelModel& model) {
  require_valid(model);
  const double value = model.rho() - l2_norm_sq(model);
  if (value < -1e-9 * std::max(1.0, model.rho()))
    throw std::logic_error("sigma2_intensity: integral of C^2 exceeds rho for a valid kernel");
  return std::max(0.0, value);
}

double translation_correction(const Window& window, const Eigen::Ref<const Eigen::VectorXd>& z) {
  const Eigen::VectorXd sides = window.sides();
  double vol = 1.0;
  for (Eigen::Index a = 0; a < sides.size(); ++a) vol *= std::max(0.0, sides(a) - std::abs(z(a)));
  return vol;
}

double sigma_d(int dimension) { return sphere_area(dimension); }

Eigen::VectorXd uniform_grid(double r_min, double r_max, int n) {
  if (n < 2 || !(r_max > r_min)) throw std::invalid_argument("uniform_grid: need n >= 2 and r_max > r_min");
  return Eigen::VectorXd::LinSpaced(n, r_min, r_max);
}

PcfEstimate pcf_hat_grid(const PointPattern& pattern, const Eigen::VectorXd& r, double bandwidth,
                         const SmoothingKernel& k) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("pcf_hat: bandwidth must be positive");
  if (r.size() == 0) throw std::invalid_argument("pcf_hat: empty r grid");
  if (r.minCoeff() <= 0.0) throw std::invalid_argument("pcf_hat: r must be positive");
  const int d = pattern.window.dimension();
  PcfEstimate est;
  est.r = r;
  est.bandwidth = bandwidth;
  est.window = pattern.window;
  est.rho_hat = intensity_hat(pattern);
  if (est.rho_hat == 0.0) throw std::domain_error("pcf_hat: undefined estimate for an empty pattern");
  est.ghat = Eigen::VectorXd::Zero(r.size());
  const double reach = k.half_width() * bandwidth;
  const double r_lo = r.minCoeff() - reach;
  const double radius = r.maxCoeff() + reach;
  for_each_close_pair(pattern, radius, [&](Eigen::Index, Eigen::Index, const Eigen::VectorXd& z, double dist) {
    if (dist < r_lo) return;
    bool used = false;
    double corr = -1.0;
    for (Eigen::Index m = 0; m < r.size(); ++m) {
      const double u = (r(m) - dist) / bandwidth;
      if (std::abs(u) > k.half_width()) continue;
      const double kv = k(u);
      if (kv == 0.0) continue;
      if (corr < 0.0) {
        corr = translation_correction(pattern.window, z);
        if (corr <= 0.0) throw std::domain_error("pcf_hat: pair separation exceeds window");
      }
      est.ghat(m) += 2.0 * kv / (bandwidth * corr);
      used = true;
    }
    if (used) ++est.pairs_used;
  });
  const double sd = sigma_d(d);
  for (Eigen::Index m = 0; m < r.size(); ++m)
    est.ghat(m) /= sd * std::pow(r(m), d - 1) * est.rho_hat * est.rho_hat;
  return est;
}

double pcf_hat(const PointPattern& pattern, double r, double bandwidth, const SmoothingKernel& k) {
  Eigen::VectorXd grid(1);
  grid << r;
  return pcf_hat_grid(pattern, grid, bandwidth, k).ghat(0);
}

double default_bandwidth(double rho, int dimension, double volume, double factor) {
  return factor * std::pow(rho, -1.0 / dimension) * std::pow(volume, -0.25);
}

BiasBound bias_bound(const KernelModel& model, double r_min, double r_max, double bandwidth,
                     const SmoothingKernel& k) {
  if (!(r_min > 0.0)) throw std::invalid_argument("bias_bound: the interval must stay away from 0");
  if (!(r_max >= r_min)) throw std::invalid_argument("bias_bound: r_max below r_min");
  const double lo = r_min - k.half_width() * bandwidth;
  const double hi = r_max + k.half_width() * bandwidth;
  if (!(lo > 0.0)) throw std::invalid_argument("bias_bound: the enlarged interval touches 0");
  const int d = model.dimension();
  auto f = [&](double s) { return std::pow(s, d - 1) * pcf(model, s); };
  const int n = 4001;
  const double h = std::max((hi - lo) / (n - 1), 1e-6);
  double sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = lo + (hi - lo) * i / (n - 1);
    const double second = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
    sup = std::max(sup, std::abs(second));
  }
  BiasBound out;
  out.m_sup = sup / std::pow(r_min, d - 1);
  out.bound = bandwidth * bandwidth * out.m_sup * model.rho() * model.rho() * k.second_abs_moment();
  return out;
}

double tau2_pointwise(const KernelModel& model, double r, const SmoothingKernel& k, Tau2Variant variant) {
  if (!(r > 0.0)) throw std::invalid_argument("tau2_pointwise: r must be positive");
  const int d = model.dimension();
  const double rho = model.rho();
  const double shape = pcf(model, r) / (sigma_d(d) * std::pow(r, d - 1));
  switch (variant) {
    case Tau2Variant::Printed:
      return 2.0 / (rho * rho) * shape * std::sqrt(k.l2_sq());
    case Tau2Variant::NoSqrt:
      return 2.0 / (rho * rho) * shape * k.l2_sq();
    case Tau2Variant::KappaOverRho4: {
      const double kappa2 = 2.0 * rho * rho * shape * std::sqrt(k.l2_sq());
      return kappa2 / std::pow(rho, 4);
    }
  }
  return 0.0;
}

double ise_from_estimate(const PcfEstimate& est, double rho_ref, const PcfFunction& g_ref) {
  const Eigen::Index n = est.r.size();
  const Eigen::VectorXd w = simpson_weights(static_cast<int>(n), est.r(0), est.r(n - 1));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double diff = est.rho_hat * est.rho_hat * est.ghat(i) - rho_ref * rho_ref * g_ref(est.r(i));
    acc += w(i) * diff * diff;
  }
  return acc;
}

double ise(const PointPattern& pattern, double rho_ref, const PcfFunction& g_ref, double r_min,
           double r_max, double bandwidth, const SmoothingKernel& k, int grid_n) {
  if (!(r_min > 0.0)) throw std::invalid_argument("ise: the interval must stay away from 0");
  const auto est = pcf_hat_grid(pattern, uniform_grid(r_min, r_max, grid_n), bandwidth, k);
  return ise_from_estimate(est, rho_ref, g_ref);
}

double ise(const PointPattern& pattern, const KernelModel& model, double r_min, double r_max,
           double bandwidth, const SmoothingKernel& k, int grid_n) {
  return ise(pattern, model.rho(), [&](double r) { return pcf(model, r); }, r_min, r_max, bandwidth, k,
             grid_n);
}

double ise_leading_constant(double rho, int dimension, const PcfFunction& g0, double r_min,
                            double r_max, const SmoothingKernel& k) {
  if (!(r_min > 0.0)) throw std::invalid_argument("ise_leading_constant: the interval must stay away from 0");
  const double sd = sigma_d(dimension);
  const double integral = simpson_integral(
      [&](double r) { return g0(r) / (sd * std::pow(r, dimension - 1)); }, r_min, r_max);
  return 2.0 * rho * rho * integral * k.l2_sq();
}

double ise_leading_constant(const KernelModel& model, double r_min, double r_max, const SmoothingKernel& k) {
  return ise_leading_constant(model.rho(), model.dimension(), [&](double r) { return pcf(model, r); },
                              r_min, r_max, k);
}

double tau2_ise(const KernelModel& model, double r_min, double r_max, const SmoothingKernel& k) {
  if (!(r_min > 0.0)) throw std::invalid_argument("tau2_ise: the interval must stay away from 0");
  const int d = model.dimension();
  const double sd = sigma_d(d);
  const double integral = simpson_integral(
      [&](double r) {
        const double v = pcf(model, r) / (sd * std::pow(r, d - 1));
        return v * v;
      },
      r_min, r_max);
  return 8.0 * std::pow(model.rho(), 4) * integral * k.conv_l2_sq();
}

}  // namespace dpplab
