#include "dpplab/kernel_models.hpp"

#include "dpplab/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <iomanip>
#include <sstream>

namespace dpplab {

namespace {

constexpr double kPi = std::numbers::pi;

// J_nu(z) / z^nu, with the power series near the origin.
double bessel_ratio(double nu, double z) {
  if (z < 1e-4) {
    const double z2 = z * z;
    const double lead = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
    return lead * (1.0 - z2 / (4.0 * (nu + 1.0)) + z2 * z2 / (32.0 * (nu + 1.0) * (nu + 2.0)));
  }
  if (nu == 0.5) return std::sqrt(2.0 / kPi) * std::sin(z) / z;
  if (nu == 1.0) return boost::math::cyl_bessel_j(1, z) / z;
  return std::cyl_bessel_j(nu, z) / std::pow(z, nu);
}

double hermite_eval(const RadialTable& t, double r) {
  const auto& xs = t.r;
  auto it = std::upper_bound(xs.begin(), xs.end(), r);
  std::size_t i = (it == xs.begin()) ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  if (i >= xs.size() - 1) i = xs.size() - 2;
  const double h = xs[i + 1] - xs[i];
  const double s = (r - xs[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * t.c[i] + h10 * h * t.slope[i] + h01 * t.c[i + 1] + h11 * h * t.slope[i + 1];
}

// Fritsch-Carlson slopes keep the interpolant monotone between monotone data.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> delta(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    m[i] = (delta[i - 1] * delta[i] <= 0.0) ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / delta[i], b = m[i + 1] / delta[i];
    const double norm = a * a + b * b;
    if (norm > 9.0) {
      const double tau = 3.0 / std::sqrt(norm);
      m[i] = tau * a * delta[i];
      m[i + 1] = tau * b * delta[i];
    }
  }
  return m;
}

// Radial Fourier transform of a tabulated kernel by per-interval Gauss-Legendre.
double hankel_transform(const RadialTable& t, int d, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.r.size(); ++i) {
    const double lo = t.r[i], hi = t.r[i + 1];
    const int order = 6 + static_cast<int>(std::ceil(4.0 * s * (hi - lo)));
    const auto q = gauss_legendre(order, lo, hi);
    for (int j = 0; j < order; ++j) {
      const double r = q.nodes(j);
      const double c = hermite_eval(t, r);
      double integrand;
      if (s == 0.0) {
        integrand = sphere_area(d) * std::pow(r, d - 1) * c;
      } else if (d == 1) {
        integrand = 2.0 * c * std::cos(2.0 * kPi * s * r);
      } else if (d == 3) {
        const double arg = 2.0 * kPi * s * r;
        integrand = 4.0 * kPi * r * r * c * (arg == 0.0 ? 1.0 : std::sin(arg) / arg);
      } else {
        const double nu = 0.5 * d - 1.0;
        integrand = 2.0 * kPi * std::pow(s, 1.0 - 0.5 * d) * std::pow(r, 0.5 * d) * c *
                    std::cyl_bessel_j(nu, 2.0 * kPi * s * r);
      }
      acc += q.weights(j) * integrand;
    }
  }
  return acc;
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::Gaussian: return "gaussian";
    case Family::Bessel: return "bessel";
    case Family::PoissonDegenerate: return "poisson";
    case Family::Tabulated: return "tabulated";
  }
  return "unknown";
}

double unit_ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

double gaussian_alpha_max(int d, double rho) {
  return 1.0 / (std::sqrt(kPi) * std::pow(rho, 1.0 / d));
}

KernelModel KernelModel::gaussian(int dimension, double rho, double alpha) {
  if (dimension < 1) throw InvalidModel("dimension must be positive");
  if (!(rho > 0.0)) throw InvalidModel("rho must be positive");
  if (!(alpha > 0.0)) throw InvalidModel("alpha must be positive");
  KernelModel m;
  m.dimension_ = dimension;
  m.family_ = Family::Gaussian;
  m.rho_ = rho;
  m.alpha_ = alpha;
  std::ostringstream os;
  os << "gaussian:rho=" << rho << ",alpha=" << alpha << ",d=" << dimension;
  m.label_ = os.str();
  return m;
}

KernelModel KernelModel::bessel(int dimension, double rho) {
  if (dimension < 1) throw InvalidModel("dimension must be positive");
  if (!(rho > 0.0)) throw InvalidModel("rho must be positive");
  KernelModel m;
  m.dimension_ = dimension;
  m.family_ = Family::Bessel;
  m.rho_ = rho;
  const double nu = 0.5 * dimension;
  const double g = std::tgamma(nu + 1.0);
  m.bessel_scale_ = 2.0 * std::sqrt(kPi) * std::pow(g, 1.0 / dimension) * std::pow(rho, 1.0 / dimension);
  m.bessel_amp_ = std::sqrt(rho * g) / std::pow(kPi, 0.25 * dimension) * std::pow(m.bessel_scale_, nu);
  std::ostringstream os;
  os << "bessel:rho=" << rho << ",d=" << dimension;
  m.label_ = os.str();
  return m;
}

KernelModel KernelModel::poisson(int dimension, double rho) {
  if (dimension < 1) throw InvalidModel("dimension must be positive");
  if (!(rho > 0.0)) throw InvalidModel("rho must be positive");
  KernelModel m;
  m.dimension_ = dimension;
  m.family_ = Family::PoissonDegenerate;
  m.rho_ = rho;
  std::ostringstream os;
  os << "poisson:rho=" << rho << ",d=" << dimension;
  m.label_ = os.str();
  return m;
}

KernelModel KernelModel::tabulated(int dimension, double rho, std::vector<double> r,
                                   std::vector<double> c) {
  if (dimension < 1) throw InvalidModel("dimension must be positive");
  if (!(rho > 0.0)) throw InvalidModel("rho must be positive");
  if (r.size() != c.size() || r.size() < 3)
    throw InvalidModel("tabulated kernel needs at least three (r, c) rows");
  if (r.front() != 0.0) throw InvalidModel("tabulated radii must start at 0");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1])) throw InvalidModel("tabulated radii must be strictly increasing");
  if (std::abs(c.front() - rho) > 1e-6 * rho)
    throw InvalidModel("tabulated kernel violates C(0) = rho");
  for (std::size_t i = 1; i < c.size(); ++i)
    if (std::abs(c[i] - c[i - 1]) > 0.1 * rho) {
      std::ostringstream os;
      os << "tabulated kernel is not continuous: jump " << std::abs(c[i] - c[i - 1])
         << " between r=" << r[i - 1] << " and r=" << r[i] << " exceeds 10% of rho";
      throw InvalidModel(os.str());
    }
  auto table = std::make_shared<RadialTable>();
  table->slope = monotone_slopes(r, c);
  table->r = std::move(r);
  table->c = std::move(c);

  double h_min = table->r.back();
  for (std::size_t i = 1; i < table->r.size(); ++i)
    h_min = std::min(h_min, table->r[i] - table->r[i - 1]);
  const double xi_max = 0.5 / h_min;
  int count = static_cast<int>(std::ceil(8.0 * table->r.back() * xi_max));
  count = std::clamp(count, 64, 1024);
  table->xi_step = xi_max / count;
  table->spectrum.resize(count + 1);
  for (int i = 0; i <= count; ++i)
    table->spectrum[i] = hankel_transform(*table, dimension, i * table->xi_step);

  KernelModel m;
  m.dimension_ = dimension;
  m.family_ = Family::Tabulated;
  m.rho_ = rho;
  m.table_ = std::move(table);
  std::ostringstream os;
  os << "tabulated:rho=" << rho << ",d=" << dimension << ",nodes=" << m.table_->r.size();
  m.label_ = os.str();
  return m;
}

double KernelModel::radial(double r) const {
  r = std::abs(r);
  switch (family_) {
    case Family::Gaussian: {
      const double u = r / alpha_;
      return rho_ * std::exp(-u * u);
    }
    case Family::Bessel: {
      return bessel_amp_ * bessel_ratio(0.5 * dimension_, bessel_scale_ * r);
    }
    case Family::PoissonDegenerate:
      return r == 0.0 ? rho_ : 0.0;
    case Family::Tabulated: {
      const auto& t = *table_;
      if (r > t.r.back() * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "out of tabulated range: r=" << r << " beyond " << t.r.back();
        throw OutOfRange(os.str());
      }
      return hermite_eval(t, std::min(r, t.r.back()));
    }
  }
  return 0.0;
}

double KernelModel::spectrum_radial(double s) const {
  s = std::abs(s);
  switch (family_) {
    case Family::Gaussian:
      return rho_ * std::pow(kPi * alpha_ * alpha_, 0.5 * dimension_) *
             std::exp(-kPi * kPi * alpha_ * alpha_ * s * s);
    case Family::Bessel: {
      const double radius = std::pow(rho_ / unit_ball_volume(dimension_), 1.0 / dimension_);
      return s <= radius * (1.0 + 1e-12) ? 1.0 : 0.0;
    }
    case Family::PoissonDegenerate:
      return rho_;
    case Family::Tabulated: {
      const auto& t = *table_;
      const double pos = s / t.xi_step;
      const std::size_t i = static_cast<std::size_t>(pos);
      if (i + 1 >= t.spectrum.size()) return hankel_transform(t, dimension_, s);
      const double f = pos - static_cast<double>(i);
      return (1.0 - f) * t.spectrum[i] + f * t.spectrum[i + 1];
    }
  }
  return 0.0;
}

double KernelModel::spectral_radius(double level) const {
  switch (family_) {
    case Family::Gaussian: {
      const double peak = spectrum_radial(0.0);
      if (peak <= level) return 0.0;
      return std::sqrt(std::log(peak / level)) / (kPi * alpha_);
    }
    case Family::Bessel:
      return level < 1.0 ? std::pow(rho_ / unit_ball_volume(dimension_), 1.0 / dimension_) : 0.0;
    case Family::PoissonDegenerate:
      throw InvalidModel("the degenerate Poisson kernel has no bounded spectral support");
    case Family::Tabulated: {
      const auto& t = *table_;
      double last = 0.0;
      for (std::size_t i = 0; i < t.spectrum.size(); ++i)
        if (std::abs(t.spectrum[i]) >= level) last = (i + 1) * t.xi_step;
      return std::min(last, t.xi_step * (t.spectrum.size() - 1));
    }
  }
  return 0.0;
}

double eval_kernel(const KernelModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dimension()) throw std::invalid_argument("eval_kernel: dimension mismatch");
  return model.radial(x.norm());
}

double fourier_transform(const KernelModel& model, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (xi.size() != model.dimension())
    throw std::invalid_argument("fourier_transform: dimension mismatch");
  return model.spectrum_radial(xi.norm());
}

ExistenceReport check_existence(const KernelModel& model) {
  ExistenceReport rep;
  switch (model.family()) {
    case Family::PoissonDegenerate:
      rep.valid = true;
      rep.degenerate = true;
      rep.sup_spectrum = model.rho();
      rep.reason = "degenerate Poisson kernel";
      return rep;
    case Family::Gaussian:
      rep.sup_spectrum = model.spectrum_radial(0.0);
      break;
    case Family::Bessel:
      rep.sup_spectrum = 1.0;
      break;
    case Family::Tabulated: {
      const auto& spec = model.table()->spectrum;
      rep.sup_spectrum = *std::max_element(spec.begin(), spec.end());
      const double low = *std::min_element(spec.begin(), spec.end());
      // Quadrature of the interpolant rings at a level proportional to the spectral peak.
      if (low < -std::max(kExistenceTolerance, kSpectrumNoiseFloor * rep.sup_spectrum)) {
        std::ostringstream os;
        os << "negative spectral density: min F(C) = " << low;
        rep.reason = os.str();
        rep.valid = false;
        return rep;
      }
      break;
    }
  }
  rep.valid = rep.sup_spectrum <= 1.0 + kExistenceTolerance;
  if (!rep.valid) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << "spectral density exceeds 1: sup F(C) = "
       << rep.sup_spectrum;
    if (model.family() == Family::Gaussian)
      os << " (alpha must not exceed " << gaussian_alpha_max(model.dimension(), model.rho())
         << ")";
    rep.reason = os.str();
  }
  return rep;
}

void require_valid(const KernelModel& model) {
  const auto rep = check_existence(model);
  if (!rep.valid) throw InvalidModel(rep.reason);
}

double pcf(const KernelModel& model, double r) {
  if (r < 0.0) throw std::invalid_argument("pcf: r must be non-negative");
  const double c = model.radial(r) / model.rho();
  return std::clamp(1.0 - c * c, 0.0, 1.0);
}

double cumulant_density2(const KernelModel& model, double u) {
  if (model.family() == Family::PoissonDegenerate) return 0.0;
  const double c = model.radial(u);
  return -c * c;
}

double cumulant_density(const KernelModel& model, int order,
                        const std::vector<Eigen::VectorXd>& args) {
  if (order < 2 || order > 4)
    throw std::invalid_argument("cumulant_density: unsupported order " + std::to_string(order));
  if (static_cast<int>(args.size()) != order - 1)
    throw std::invalid_argument("cumulant_density: expected order-1 arguments");
  for (const auto& a : args)
    if (a.size() != model.dimension())
      throw std::invalid_argument("cumulant_density: dimension mismatch");
  if (model.family() == Family::PoissonDegenerate) return 0.0;
  auto C = [&](const Eigen::VectorXd& x) { return model.radial(x.norm()); };
  if (order == 2) {
    const double c = C(args[0]);
    return -c * c;
  }
  if (order == 3) {
    const auto& u = args[0];
    const auto& v = args[1];
    return 2.0 * C(u) * C(v) * C(v - u);
  }
  const auto& u = args[0];
  const auto& v = args[1];
  const auto& w = args[2];
  const double cu = C(u), cv = C(v), cw = C(w);
  const double cuv = C(u - v), cuw = C(u - w), cvw = C(v - w);
  return -2.0 * (cu * cv * cuw * cvw + cu * cw * cuv * cvw + cv * cw * cuv * cuw);
}

double l2_norm_sq(const KernelModel& model) {
  const int d = model.dimension();
  const double rho = model.rho();
  switch (model.family()) {
    case Family::Gaussian:
      return rho * rho * std::pow(0.5 * kPi * model.alpha() * model.alpha(), 0.5 * d);
    case Family::Bessel:
      return rho;
    case Family::PoissonDegenerate:
      return 0.0;
    case Family::Tabulated: {
      const auto& t = *model.table();
      if (std::abs(t.c.back()) > 1e-3 * rho)
        throw InvalidModel("non-integrable tabulated tail: |C| at the last node exceeds 1e-3 rho");
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < t.r.size(); ++i) {
        const auto q = gauss_legendre(8, t.r[i], t.r[i + 1]);
        for (int j = 0; j < 8; ++j) {
          const double c = hermite_eval(t, q.nodes(j));
          acc += q.weights(j) * std::pow(q.nodes(j), d - 1) * c * c;
        }
      }
      return sphere_area(d) * acc;
    }
  }
  return 0.0;
}

double effective_range(const KernelModel& model) {
  const double rho = model.rho();
  switch (model.family()) {
    case Family::PoissonDegenerate:
      return 0.0;
    case Family::Gaussian:
      return model.alpha() * std::sqrt(std::log(1000.0));
    case Family::Bessel:
    case Family::Tabulated: {
      double scale, limit;
      if (model.family() == Family::Bessel) {
        scale = 1.0 / model.spectral_radius(0.5);
        limit = 1e3 * scale;
      } else {
        scale = model.table()->r.back();
        limit = scale;
      }
      const double step = scale / 2000.0;
      for (double r = step; r <= limit; r += step) {
        const double c = model.radial(r);
        if (std::abs(c) < 1e-3 * rho || c <= 0.0) return r;
      }
      return limit;
    }
  }
  return 0.0;
}

HeinrichBounds check_heinrich_bounds(const KernelModel& model, double r_min, double r_max,
                                     double eps, int grid_n) {
  if (grid_n < 8) throw std::invalid_argument("check_heinrich_bounds: grid_n must be at least 8");
  if (!(r_max >= r_min) || r_min < 0.0)
    throw std::invalid_argument("check_heinrich_bounds: invalid interval");
  HeinrichBounds out;
  if (model.family() == Family::PoissonDegenerate) return out;
  const int d = model.dimension();
  const double lo = std::max(0.0, r_min - eps), hi = r_max + eps;
  auto radius = [&](int i, int n) { return lo + (hi - lo) * i / (n - 1); };

  // Lag pairs (u, v) with |u|, |v| in the widened interval; the angle between them spans [0, pi].
  auto lag_pair = [&](double a, double b, double theta) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d), v = Eigen::VectorXd::Zero(d);
    u(0) = a;
    if (d == 1) {
      v(0) = theta < 0.5 * kPi ? b : -b;
    } else {
      v(0) = b * std::cos(theta);
      v(1) = b * std::sin(theta);
    }
    return std::pair{u, v};
  };
  const int angles = d == 1 ? 2 : grid_n;
  auto angle = [&](int k) { return d == 1 ? (k == 0 ? 0.0 : kPi) : kPi * k / (angles - 1); };

  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j)
      for (int k = 0; k < angles; ++k) {
        auto [u, v] = lag_pair(radius(i, grid_n), radius(j, grid_n), angle(k));
        out.sup3 = std::max(out.sup3, std::abs(cumulant_density(model, 3, {u, v})));
      }

  // w-integral of |c4(u, w, v + w)| over a box large enough for the kernel to decay.
  const double reach = hi + 6.0 * std::max(effective_range(model), 1e-12);
  const int panels = 24;
  const auto q = composite_gauss_legendre(panels, 6, -reach, reach);
  const int nq = static_cast<int>(q.nodes.size());
  const int coarse = std::max(4, grid_n / 2);
  const int coarse_angles = d == 1 ? 2 : coarse;
  auto coarse_angle = [&](int k) {
    return d == 1 ? (k == 0 ? 0.0 : kPi) : kPi * k / (coarse_angles - 1);
  };
  if (d > 2) {
    // Tensor w-integration beyond two dimensions is out of desk scale; report sup3 only.
    out.sup_int4 = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  for (int i = 0; i < coarse; ++i)
    for (int j = 0; j < coarse; ++j)
      for (int k = 0; k < coarse_angles; ++k) {
        auto [u, v] = lag_pair(radius(i, coarse), radius(j, coarse), coarse_angle(k));
        double acc = 0.0;
        Eigen::VectorXd w(d);
        if (d == 1) {
          for (int a = 0; a < nq; ++a) {
            w(0) = q.nodes(a);
            acc += q.weights(a) * std::abs(cumulant_density(model, 4, {u, w, v + w}));
          }
        } else {
          for (int a = 0; a < nq; ++a)
            for (int b = 0; b < nq; ++b) {
              w << q.nodes(a), q.nodes(b);
              acc += q.weights(a) * q.weights(b) *
                     std::abs(cumulant_density(model, 4, {u, w, v + w}));
            }
        }
        out.sup_int4 = std::max(out.sup_int4, acc);
      }
  return out;
}

}  // namespace dpplab
