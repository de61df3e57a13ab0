#include "dpplab/appendix.hpp"
#include "dpplab/estimators.hpp"

#include <doctest.h>

#include <cmath>

using namespace dpplab;

namespace {

const double kPi = 3.14159265358979323846;

template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

LinearTestFunction indicator_1d(double a, double b) {
  const Window w = Window::box(Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b));
  return {[w](const Eigen::VectorXd& x) { return w.contains(x) ? 1.0 : 0.0; }, w};
}

}  // namespace

TEST_CASE("poisson closed forms") {
  const double rho = 2.0, L = 4.0, h = 0.3;
  const auto pois = KernelModel::poisson(1, rho);
  CHECK(var_linear_statistic(pois, indicator_1d(0.0, L)) == doctest::Approx(rho * L).epsilon(1e-10));
  // F symmetric: Var = 2 rho^2 int int F^2 + 4 rho^3 int (int F dy)^2 dx.
  const double ff = 2.0 * L * h - h * h;
  const double g2 = (L - 2.0 * h) * 4.0 * h * h + 2.0 * (8.0 * h * h * h - h * h * h) / 3.0;
  const auto f = symmetric_pair_indicator(0.0, L, h);
  CHECK(var_pair_statistic(pois, f) ==
        doctest::Approx(2.0 * rho * rho * ff + 4.0 * rho * rho * rho * g2).epsilon(1e-4));
  CHECK(cov_pair_linear(pois, f, line_indicator(0.0, L)) == doctest::Approx(2.0 * rho * rho * ff).epsilon(1e-4));
}

TEST_CASE("linear statistic against direct quadrature") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const double L = 4.0;
  const double direct =
      L - 2.0 * simpson([&](double u) { return (L - u) * std::exp(-2.0 * u * u / 0.09); }, 0.0, L, 4000);
  CHECK(var_linear_statistic(g, indicator_1d(0.0, L)) == doctest::Approx(direct).epsilon(1e-4));

  // Unit square in the plane: Var = rho - rho^2 (2 int_0^1 exp(-2u^2/a^2)(1-u) du)^2.
  const auto g2 = KernelModel::gaussian(2, 100.0, 0.05);
  const double a = 0.05;
  const double s = 2.0 * simpson([&](double u) { return std::exp(-2.0 * u * u / (a * a)) * (1.0 - u); }, 0.0, 1.0, 4000);
  const Window w = Window::cube(2, 1.0);
  const LinearTestFunction sq{[w](const Eigen::VectorXd& x) { return w.contains(x) ? 1.0 : 0.0; }, w};
  CHECK(var_linear_statistic(g2, sq) == doctest::Approx(100.0 - 1e4 * s * s).epsilon(1e-4));
}

TEST_CASE("per-volume variance approaches sigma2") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const double s2 = sigma2_intensity(g);
  const double v4 = var_linear_statistic(g, indicator_1d(0.0, 4.0)) / 4.0;
  const double v8 = var_linear_statistic(g, indicator_1d(0.0, 8.0)) / 8.0;
  CHECK(v4 > s2);
  CHECK(v8 > s2);
  CHECK(v8 - s2 < v4 - s2);
  CHECK((v8 - s2) / (v4 - s2) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("pair statistic invariants") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const auto f = pair_indicator(0.0, 4.0, 0.3);
  PairTestFunction swapped = f;
  swapped.f = [inner = f.f](double x, double y) { return inner(y, x); };
  const double v = var_pair_statistic(g, f);
  CHECK(v > 0.0);
  CHECK(var_pair_statistic(g, swapped) == doctest::Approx(v).epsilon(1e-8));
  PairTestFunction scaled = f;
  scaled.f = [inner = f.f](double x, double y) { return 3.0 * inner(x, y); };
  CHECK(var_pair_statistic(g, scaled) == doctest::Approx(9.0 * v).epsilon(1e-8));
}

TEST_CASE("pair-linear covariance") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  CHECK_THROWS_AS(cov_pair_linear(g, pair_indicator(0.0, 4.0, 0.3), line_indicator(0.0, 4.0)), std::invalid_argument);
  const auto f = symmetric_pair_indicator(0.0, 4.0, 0.3);
  LineFunction zero = line_indicator(0.0, 4.0);
  zero.h = [](double) { return 0.0; };
  CHECK(std::abs(cov_pair_linear(g, f, zero)) < 1e-14);
  const double c = cov_pair_linear(g, f, line_indicator(0.0, 4.0));
  LineFunction doubled = line_indicator(0.0, 4.0);
  doubled.h = [](double x) { return (x >= 0.0 && x <= 4.0) ? 2.0 : 0.0; };
  CHECK(cov_pair_linear(g, f, doubled) == doctest::Approx(2.0 * c).epsilon(1e-10));
  // Cauchy-Schwarz against the two variances.
  const double vp = var_pair_statistic(g, f);
  const double vl = var_linear_statistic(g, indicator_1d(0.0, 4.0));
  CHECK(c * c <= vp * vl);
}

TEST_CASE("empirical sums") {
  PointPattern p;
  p.window = Window::cube(1, 4.0);
  p.points.resize(4, 1);
  p.points << 0.5, 0.7, 2.0, 3.9;
  const auto f = pair_indicator(0.0, 4.0, 0.3);
  // Ordered pairs within 0.3: (0.5, 0.7) and (0.7, 0.5).
  CHECK(pair_sum(p, f) == 2.0);
  CHECK(linear_sum(p, indicator_1d(0.6, 4.0)) == 3.0);
}
