#include "dpplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dpplab {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        double q0 = 1.0, q1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double q2 = q1;
          q1 = q0;
          q0 = ((2.0 * j - 1.0) * x * q1 - (j - 1.0) * q2) / j;
        }
        dp = n * (x * q0 - q1) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = mid - half * x;
    rule.nodes(n - 1 - i) = mid + half * x;
    rule.weights(i) = half * w;
    rule.weights(n - 1 - i) = half * w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = mid;
  return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
  return composite_gauss_legendre(Eigen::VectorXd(), panels, order, a, b);
}

QuadratureRule composite_gauss_legendre(const Eigen::VectorXd& breakpoints, int panels, int order,
                                        double a, double b) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels must be positive");
  std::vector<double> edges;
  for (int p = 0; p <= panels; ++p) edges.push_back(a + (b - a) * p / panels);
  for (Eigen::Index i = 0; i < breakpoints.size(); ++i)
    if (breakpoints(i) > a && breakpoints(i) < b) edges.push_back(breakpoints(i));
  std::sort(edges.begin(), edges.end());
  const double tiny = 1e-12 * std::max(1.0, std::abs(b - a));
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [tiny](double u, double v) { return std::abs(u - v) < tiny; }),
              edges.end());
  const auto base = gauss_legendre(order, -1.0, 1.0);
  const int count = static_cast<int>(edges.size()) - 1;
  QuadratureRule rule{Eigen::VectorXd(count * order), Eigen::VectorXd(count * order)};
  for (int p = 0; p < count; ++p) {
    const double lo = edges[p], hi = edges[p + 1];
    for (int j = 0; j < order; ++j) {
      rule.nodes(p * order + j) = 0.5 * (lo + hi) + 0.5 * (hi - lo) * base.nodes(j);
      rule.weights(p * order + j) = 0.5 * (hi - lo) * base.weights(j);
    }
  }
  return rule;
}

Eigen::VectorXd simpson_weights(int n, double a, double b) {
  if (n < 2) throw std::invalid_argument("simpson_weights: need at least two samples");
  const double h = (b - a) / (n - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  if (n == 2) {
    w << 0.5 * h, 0.5 * h;
    return w;
  }
  if (n == 4) {
    w << 3.0, 9.0, 9.0, 3.0;
    return w * (h / 8.0);
  }
  // Simpson on the first `last` intervals (even count), 3/8 on the final three when needed.
  const int intervals = n - 1;
  const int simpson_intervals = (intervals % 2 == 0) ? intervals : intervals - 3;
  for (int i = 0; i < simpson_intervals; i += 2) {
    w(i) += h / 3.0;
    w(i + 1) += 4.0 * h / 3.0;
    w(i + 2) += h / 3.0;
  }
  if (simpson_intervals != intervals) {
    const int s = simpson_intervals;
    w(s) += 3.0 * h / 8.0;
    w(s + 1) += 9.0 * h / 8.0;
    w(s + 2) += 9.0 * h / 8.0;
    w(s + 3) += 3.0 * h / 8.0;
  }
  return w;
}

}  // namespace dpplab
