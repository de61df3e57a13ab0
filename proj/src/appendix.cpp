#include "dpplab/appendix.hpp"

#include "dpplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpplab {

namespace {

// Composite Gauss-Legendre on [lo, hi] with uniform panels no wider than `panel`,
// split additionally at every break inside the interval.
class LineRule {
 public:
  LineRule(int order, double panel) : base_(gauss_legendre(order, -1.0, 1.0)), panel_(panel) {}

  void build(double lo, double hi, const std::vector<double>& breaks, std::vector<double>& x,
             std::vector<double>& w) const {
    x.clear();
    w.clear();
    if (!(hi > lo)) return;
    edges_.clear();
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel_)));
    for (int p = 0; p <= panels; ++p) edges_.push_back(lo + (hi - lo) * p / panels);
    for (double b : breaks)
      if (b > lo && b < hi) edges_.push_back(b);
    std::sort(edges_.begin(), edges_.end());
    const double tiny = 1e-13 * std::max(1.0, hi - lo);
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
      const double a = edges_[i], b = edges_[i + 1];
      if (b - a <= tiny) continue;
      for (Eigen::Index j = 0; j < base_.nodes.size(); ++j) {
        x.push_back(0.5 * (a + b) + 0.5 * (b - a) * base_.nodes(j));
        w.push_back(0.5 * (b - a) * base_.weights(j));
      }
    }
  }

 private:
  QuadratureRule base_;
  double panel_;
  mutable std::vector<double> edges_;
};

struct Level {
  std::vector<double> x, w, breaks;
};

double kernel_cutoff(const KernelModel& model) {
  if (model.family() == Family::PoissonDegenerate) return 0.0;
  const double range = effective_range(model);
  const double step = range / 8.0;
  double last = range;
  for (double r = range; r <= 200.0 * range; r += step)
    if (std::abs(model.radial(r)) > 1e-9 * model.rho()) last = r;
  return last + step;
}

class Densities {
 public:
  explicit Densities(const KernelModel& model) : model_(model) {}
  double C(double u) const { return model_.radial(std::abs(u)); }
  double c2(double u) const {
    const double c = C(u);
    return -c * c;
  }
  double c3(double u, double v) const { return 2.0 * C(u) * C(v) * C(v - u); }
  double c4(double u, double v, double w) const {
    const double cu = C(u), cv = C(v), cw = C(w);
    const double cuw = C(u - w), cvw = C(v - w), cuv = C(u - v);
    return -2.0 * (cu * cv * cuw * cvw + cu * cw * cuv * cvw + cv * cw * cuv * cuw);
  }

 private:
  const KernelModel& model_;
};

void shifted(const std::vector<double>& base, double shift, std::vector<double>& out,
             std::initializer_list<double> extra) {
  out.clear();
  for (double b : base) out.push_back(b - shift);
  for (double e : extra) out.push_back(e);
}

double panel_width(const KernelModel& model, double lag, const QuadratureControl& ctl) {
  double scale = lag;
  if (model.family() != Family::PoissonDegenerate) scale = std::min(scale, effective_range(model));
  return ctl.panel_scale * scale;
}

}  // namespace

double var_linear_statistic(const KernelModel& model, const LinearTestFunction& f,
                            const QuadratureControl& ctl) {
  const int d = model.dimension();
  if (f.support.dimension() != d) throw std::invalid_argument("var_linear_statistic: dimension mismatch");
  const Eigen::VectorXd lo = f.support.lower(), hi = f.support.upper();
  double min_side = f.support.sides().minCoeff();
  double scale = min_side;
  if (model.family() != Family::PoissonDegenerate) scale = std::min(scale, effective_range(model));
  const LineRule rule(ctl.order, ctl.panel_scale * scale);

  // Tensor rule over the support.
  std::vector<std::vector<double>> ax(d), aw(d);
  long long count = 1;
  for (int a = 0; a < d; ++a) {
    rule.build(lo(a), hi(a), {}, ax[a], aw[a]);
    count *= static_cast<long long>(ax[a].size());
  }
  Eigen::VectorXd x(d), y(d);
  std::vector<int> idx(d);
  auto node = [&](long long flat, const std::vector<std::vector<double>>& nx,
                  const std::vector<std::vector<double>>& nw, Eigen::VectorXd& pt) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const int n = static_cast<int>(nx[a].size());
      const int i = static_cast<int>(flat % n);
      flat /= n;
      pt(a) = nx[a][i];
      w *= nw[a][i];
    }
    return w;
  };
  double diag = 0.0;
  for (long long i = 0; i < count; ++i) {
    const double w = node(i, ax, aw, x);
    const double v = f.f(x);
    diag += w * v * v;
  }
  double result = model.rho() * diag;
  if (model.family() == Family::PoissonDegenerate) return result;

  const double cut = kernel_cutoff(model);
  std::vector<std::vector<double>> yx(d), yw(d);
  double cross = 0.0;
  for (long long i = 0; i < count; ++i) {
    const double wx = node(i, ax, aw, x);
    const double fx = f.f(x);
    if (fx == 0.0) continue;
    long long inner = 1;
    bool empty = false;
    for (int a = 0; a < d; ++a) {
      const double ylo = std::max(-cut, lo(a) - x(a)), yhi = std::min(cut, hi(a) - x(a));
      rule.build(ylo, yhi, {0.0}, yx[a], yw[a]);
      if (yx[a].empty()) empty = true;
      inner *= static_cast<long long>(yx[a].size());
    }
    if (empty) continue;
    if (count * inner > 2'000'000'000LL)
      throw std::invalid_argument("var_linear_statistic: quadrature grid too large for this dimension");
    double acc = 0.0;
    for (long long j = 0; j < inner; ++j) {
      const double wy = node(j, yx, yw, y);
      const double c = model.radial(y.norm());
      acc += wy * f.f(x + y) * (-c * c);
    }
    cross += wx * fx * acc;
  }
  return result + cross;
}

double var_pair_statistic(const KernelModel& model, const PairTestFunction& f, const QuadratureControl& ctl) {
  if (model.dimension() != 1)
    throw std::invalid_argument("var_pair_statistic: quadrature dimension too large; use d=1");
  if (!(f.hi > f.lo) || !(f.lag > 0.0)) throw std::invalid_argument("var_pair_statistic: empty support");
  const bool poisson = model.family() == Family::PoissonDegenerate;
  const double rho = model.rho();
  const double L = f.lag;
  const double cut = kernel_cutoff(model);
  const Densities c(model);
  const LineRule rule(ctl.order, panel_width(model, L, ctl));
  auto F = [&](double a, double b) { return 0.5 * (f.f(a, b) + f.f(b, a)); };
  std::vector<double> B = f.breaks;
  B.push_back(f.lo);
  B.push_back(f.hi);

  Level lx, l2, l3, l4;
  rule.build(f.lo, f.hi, B, lx.x, lx.w);
  double total = 0.0;

  // Two-dimensional terms.
  double t1 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < lx.x.size(); ++i) {
    const double x = lx.x[i];
    shifted(B, x, l2.breaks, {0.0});
    rule.build(-L, L, l2.breaks, l2.x, l2.w);
    for (std::size_t j = 0; j < l2.x.size(); ++j) {
      const double s = l2.x[j];
      const double a = F(x, x + s), b = F(x + s, x);
      const double sq = a * a + a * b;
      if (!poisson) t1 += lx.w[i] * l2.w[j] * sq * c.c2(s);
      t2 += lx.w[i] * l2.w[j] * sq;
    }
  }
  total += t1 + rho * rho * t2;

  // Three-dimensional terms.
  double t3 = 0.0, t4 = 0.0, t5 = 0.0, t6 = 0.0;
  for (std::size_t i = 0; i < lx.x.size(); ++i) {
    const double x = lx.x[i];
    shifted(B, x, l2.breaks, {0.0});
    rule.build(-L, L, l2.breaks, l2.x, l2.w);
    for (std::size_t j = 0; j < l2.x.size(); ++j) {
      const double s = l2.x[j], y = x + s;
      const double wxy = lx.w[i] * l2.w[j];
      const double pxy = F(x, y) + F(y, x);
      if (pxy == 0.0) continue;
      // u = y + w with |w| <= L: terms T3 (u as lag from x), T5, T6.
      shifted(B, y, l3.breaks, {0.0, -s});
      rule.build(-L, L, l3.breaks, l3.x, l3.w);
      for (std::size_t k = 0; k < l3.x.size(); ++k) {
        const double w = l3.x[k];
        const double pu = y + w;
        const double wt = wxy * l3.w[k];
        const double q = F(y, pu) + F(pu, y);
        t6 += wt * pxy * q;
        if (poisson) continue;
        // T3 in lag form: f(x, x+s) with u = s + w.
        t3 += wt * pxy * q * c.c3(s, s + w);
        // T5: [f(x,y)+f(y,x)][f(y,x+u)+f(x+u,y)] c2(u) with x + u = y + w.
        t5 += wt * pxy * q * c.c2(s + w);
      }
      if (poisson) continue;
      // T4: u is a lag from y within the kernel cut.
      const double ulo = -std::min(cut, L), uhi = std::min(cut, L);
      shifted(B, y, l3.breaks, {0.0});
      rule.build(ulo, uhi, l3.breaks, l3.x, l3.w);
      for (std::size_t k = 0; k < l3.x.size(); ++k) {
        const double u = l3.x[k];
        const double q = F(y, y + u) + F(y + u, y);
        t4 += wxy * l3.w[k] * pxy * q * c.c2(u);
      }
    }
  }
  total += t3 + 2.0 * rho * t4 + rho * t5 + rho * rho * rho * t6;
  if (poisson) return total;

  // Four-dimensional terms.
  double t7 = 0.0, t8 = 0.0, t9 = 0.0, t10 = 0.0;
  for (std::size_t i = 0; i < lx.x.size(); ++i) {
    const double x = lx.x[i];
    shifted(B, x, l2.breaks, {0.0});
    rule.build(-L, L, l2.breaks, l2.x, l2.w);
    for (std::size_t j = 0; j < l2.x.size(); ++j) {
      const double s = l2.x[j], y = x + s;
      const double fxy = F(x, y);
      if (fxy == 0.0) continue;
      const double wxy = lx.w[i] * l2.w[j];

      // T7: f(x, x+s) f(x+u, x+v) c4(s, u, v), v = u + w.
      {
        const double reach = cut + 2.0 * L;
        shifted(B, x, l3.breaks, {0.0, s});
        rule.build(std::max(-reach, f.lo - x), std::min(reach, f.hi - x), l3.breaks, l3.x, l3.w);
        for (std::size_t k = 0; k < l3.x.size(); ++k) {
          const double u = l3.x[k];
          shifted(B, x + u, l4.breaks, {0.0, s - u});
          rule.build(-L, L, l4.breaks, l4.x, l4.w);
          double acc = 0.0;
          for (std::size_t m = 0; m < l4.x.size(); ++m) {
            const double v = u + l4.x[m];
            acc += l4.w[m] * F(x + u, x + v) * c.c4(s, u, v);
          }
          t7 += wxy * l3.w[k] * fxy * acc;
        }
      }
      // T8: f(x,y) f(y+u, y+v) c3(u, v), v = u + w.
      {
        shifted(B, y, l3.breaks, {0.0, -s});
        rule.build(std::max(-cut, f.lo - y), std::min(cut, f.hi - y), l3.breaks, l3.x, l3.w);
        for (std::size_t k = 0; k < l3.x.size(); ++k) {
          const double u = l3.x[k];
          shifted(B, y + u, l4.breaks, {0.0, -u});
          rule.build(-L, L, l4.breaks, l4.x, l4.w);
          double acc = 0.0;
          for (std::size_t m = 0; m < l4.x.size(); ++m) {
            const double v = u + l4.x[m];
            acc += l4.w[m] * F(y + u, y + v) * c.c3(u, v);
          }
          t8 += wxy * l3.w[k] * fxy * acc;
        }
      }
      // T9: f(x,y) f(x+u, y+v) c2(u) c2(v).
      {
        shifted(B, x, l3.breaks, {0.0});
        rule.build(std::max(-cut, f.lo - x), std::min(cut, f.hi - x), l3.breaks, l3.x, l3.w);
        for (std::size_t k = 0; k < l3.x.size(); ++k) {
          const double u = l3.x[k];
          const double c2u = c.c2(u);
          const double vlo = std::max({-cut, f.lo - y, u - s - L});
          const double vhi = std::min({cut, f.hi - y, u - s + L});
          shifted(B, y, l4.breaks, {0.0, u - s});
          rule.build(vlo, vhi, l4.breaks, l4.x, l4.w);
          double acc = 0.0;
          for (std::size_t m = 0; m < l4.x.size(); ++m) {
            const double v = l4.x[m];
            acc += l4.w[m] * F(x + u, y + v) * c.c2(v);
          }
          t9 += wxy * l3.w[k] * fxy * c2u * acc;
        }
      }
      // T10: f(x,y) f(x+u, v) c2(u), v = x + u + w.
      {
        shifted(B, x, l3.breaks, {0.0});
        rule.build(std::max(-cut, f.lo - x), std::min(cut, f.hi - x), l3.breaks, l3.x, l3.w);
        for (std::size_t k = 0; k < l3.x.size(); ++k) {
          const double u = l3.x[k];
          const double xu = x + u;
          shifted(B, xu, l4.breaks, {0.0});
          rule.build(-L, L, l4.breaks, l4.x, l4.w);
          double acc = 0.0;
          for (std::size_t m = 0; m < l4.x.size(); ++m) acc += l4.w[m] * F(xu, xu + l4.x[m]);
          t10 += wxy * l3.w[k] * fxy * c.c2(u) * acc;
        }
      }
    }
  }
  total += t7 + 4.0 * rho * t8 + 2.0 * t9 + 4.0 * rho * rho * t10;
  return total;
}

double cov_pair_linear(const KernelModel& model, const PairTestFunction& f, const LineFunction& h,
                       const QuadratureControl& ctl) {
  if (model.dimension() != 1)
    throw std::invalid_argument("cov_pair_linear: quadrature dimension too large; use d=1");
  // The covariance expression assumes a symmetric pair function.
  for (int i = 0; i <= 24; ++i)
    for (int j = 0; j <= 24; ++j) {
      const double a = f.lo + (f.hi - f.lo) * (i + 0.37) / 25.0;
      const double b = a + f.lag * (2.0 * (j + 0.41) / 25.0 - 1.0);
      if (std::abs(f.f(a, b) - f.f(b, a)) > 1e-12)
        throw std::invalid_argument("cov_pair_linear: f must be symmetric");
    }
  const bool poisson = model.family() == Family::PoissonDegenerate;
  const double rho = model.rho();
  const double L = f.lag;
  const double cut = kernel_cutoff(model);
  const Densities c(model);
  const LineRule rule(ctl.order, panel_width(model, L, ctl));
  std::vector<double> B = f.breaks;
  B.push_back(f.lo);
  B.push_back(f.hi);
  std::vector<double> H = h.breaks;
  H.push_back(h.lo);
  H.push_back(h.hi);
  std::vector<double> BH = B;
  BH.insert(BH.end(), H.begin(), H.end());

  Level lx, l2, l3;
  rule.build(f.lo, f.hi, BH, lx.x, lx.w);
  double c1 = 0.0, c2t = 0.0, c3t = 0.0, c4 = 0.0, c5 = 0.0;
  for (std::size_t i = 0; i < lx.x.size(); ++i) {
    const double x = lx.x[i];
    l2.breaks.clear();
    for (double b : BH) l2.breaks.push_back(b - x);
    l2.breaks.push_back(0.0);
    rule.build(-L, L, l2.breaks, l2.x, l2.w);
    for (std::size_t j = 0; j < l2.x.size(); ++j) {
      const double s = l2.x[j], y = x + s;
      const double fxy = f.f(x, y);
      if (fxy == 0.0) continue;
      const double wxy = lx.w[i] * l2.w[j];
      c5 += wxy * fxy * (h.h(x) + h.h(y));
      if (poisson) continue;
      c4 += wxy * fxy * (h.h(x) + h.h(y)) * c.c2(s);
      // C1: h at z = x + u, c3(s, z - x).
      l3.breaks = H;
      l3.breaks.push_back(x);
      l3.breaks.push_back(y);
      rule.build(std::max(h.lo, x - cut - L), std::min(h.hi, x + cut + L), l3.breaks, l3.x, l3.w);
      for (std::size_t k = 0; k < l3.x.size(); ++k) {
        const double z = l3.x[k];
        c1 += wxy * l3.w[k] * fxy * h.h(z) * c.c3(s, z - x);
      }
      // C2: h(x + u) c2(u).
      rule.build(std::max(h.lo, x - cut), std::min(h.hi, x + cut), l3.breaks, l3.x, l3.w);
      for (std::size_t k = 0; k < l3.x.size(); ++k) {
        const double z = l3.x[k];
        c2t += wxy * l3.w[k] * fxy * h.h(z) * c.c2(z - x);
      }
      // C3: h(y + u) c2(u).
      rule.build(std::max(h.lo, y - cut), std::min(h.hi, y + cut), l3.breaks, l3.x, l3.w);
      for (std::size_t k = 0; k < l3.x.size(); ++k) {
        const double z = l3.x[k];
        c3t += wxy * l3.w[k] * fxy * h.h(z) * c.c2(z - y);
      }
    }
  }
  return c1 + rho * c2t + rho * c3t + c4 + rho * rho * c5;
}

PairTestFunction pair_indicator(double a, double b, double lag) {
  PairTestFunction p;
  p.f = [a, b, lag](double x, double y) {
    return (x >= a && x <= b && std::abs(x - y) <= lag) ? 1.0 : 0.0;
  };
  p.lo = a - lag;
  p.hi = b + lag;
  p.lag = lag;
  p.breaks = {a, b};
  return p;
}

PairTestFunction symmetric_pair_indicator(double a, double b, double lag) {
  PairTestFunction p;
  p.f = [a, b, lag](double x, double y) {
    return (x >= a && x <= b && y >= a && y <= b && std::abs(x - y) <= lag) ? 1.0 : 0.0;
  };
  p.lo = a;
  p.hi = b;
  p.lag = lag;
  p.breaks = {a, b};
  return p;
}

LineFunction line_indicator(double a, double b) {
  LineFunction l;
  l.h = [a, b](double x) { return (x >= a && x <= b) ? 1.0 : 0.0; };
  l.lo = a;
  l.hi = b;
  l.breaks = {a, b};
  return l;
}

double pair_sum(const PointPattern& pattern, const PairTestFunction& f) {
  if (pattern.window.dimension() != 1) throw std::invalid_argument("pair_sum: one-dimensional patterns only");
  std::vector<double> xs(pattern.points.col(0).data(), pattern.points.col(0).data() + pattern.size());
  std::sort(xs.begin(), xs.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size() && xs[j] - xs[i] <= f.lag; ++j)
      acc += f.f(xs[i], xs[j]) + f.f(xs[j], xs[i]);
  return acc;
}

double linear_sum(const PointPattern& pattern, const LinearTestFunction& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pattern.size(); ++i) acc += f.f(pattern.points.row(i).transpose());
  return acc;
}

}  // namespace dpplab
