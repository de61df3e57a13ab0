#include "dpplab/spectral_operator.hpp"

#include <doctest.h>

#include <cmath>

using namespace dpplab;

namespace {

const double kPi = 3.14159265358979323846;

// Direct midpoint double integral of C(x - y)^2 over [-t, t]^2 (d = 1).
double i2_midpoint(const KernelModel& m, double t, int n) {
  const double h = 2.0 * t / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double c = m.radial(std::abs((i - j) * h));
      acc += c * c;
    }
  return acc * h * h;
}

}  // namespace

TEST_CASE("trace identity and eigenvalue range") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const auto spec = build_operator(g, 1.0, 64);
  CHECK(spec.weights.sum() == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(power_trace(spec, 1) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(spec.eigenvalues.maxCoeff() <= 1.0 + 1e-6);
  CHECK(spec.eigenvalues.minCoeff() >= -1e-6);
  for (int i = 1; i < spec.eigenvalues.size(); ++i) CHECK(spec.eigenvalues(i) <= spec.eigenvalues(i - 1));

  const auto b = KernelModel::bessel(2, 100.0);
  const auto sb = build_operator(b, 0.5, 24);
  CHECK(sb.eigenvalues.sum() == doctest::Approx(100.0).epsilon(1e-8));
}

TEST_CASE("odd node counts use the full matrix and agree with parity blocks") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const auto even = build_operator(g, 1.0, 48);
  const auto odd = build_operator(g, 1.0, 49);
  CHECK(power_trace(odd, 1) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(power_trace(odd, 2) == doctest::Approx(power_trace(even, 2)).epsilon(1e-8));
  const auto g2 = KernelModel::gaussian(2, 100.0, 0.05);
  const auto e2 = build_operator(g2, 0.2, 20);
  const auto o2 = build_operator(g2, 0.2, 21);
  CHECK(power_trace(o2, 3) == doctest::Approx(power_trace(e2, 3)).epsilon(1e-6));
}

TEST_CASE("power sums are monotone in k") {
  const auto spec = build_operator(KernelModel::gaussian(1, 1.0, 0.3), 2.0);
  double prev = power_trace(spec, 1);
  for (int k = 2; k <= 12; ++k) {
    const double cur = power_trace(spec, k);
    CHECK(cur <= prev);
    prev = cur;
  }
  CHECK(power_trace(spec, 400) < 1e-3 * power_trace(spec, 2));
}

TEST_CASE("power traces against direct quadrature") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const auto spec = build_operator(g, 1.0, 48);
  const double i2 = ik_quadrature(g, 1.0, 2);
  CHECK(std::abs(power_trace(spec, 2) - i2) / i2 <= 1e-2);
  CHECK(i2 == doctest::Approx(i2_midpoint(g, 1.0, 2000)).epsilon(1e-4));
  const double i3 = ik_quadrature(g, 1.0, 3);
  CHECK(std::abs(power_trace(spec, 3) - i3) / i3 <= 2e-2);
  CHECK(i3 > 0.0);
  CHECK(i3 < i2);

  const auto g2 = KernelModel::gaussian(2, 100.0, 0.05);
  const auto s2 = build_operator(g2, 0.25, 24);
  const double q2 = ik_quadrature(g2, 0.25, 2);
  CHECK(std::abs(power_trace(s2, 2) - q2) / q2 <= 1e-2);
  CHECK(ik_quadrature(KernelModel::poisson(1, 1.0), 1.0, 2) == 0.0);
  CHECK_THROWS(ik_quadrature(g, 1.0, 4));
}

TEST_CASE("factorial cumulant signs and bounds") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const auto spec = build_operator(g, 1.0);
  const double i1 = power_trace(spec, 1);
  CHECK(factorial_cumulant_cube(g, 1.0, 2, spec) == doctest::Approx(-power_trace(spec, 2)));
  CHECK(factorial_cumulant_cube(g, 1.0, 2, spec) <= 0.0);
  CHECK(factorial_cumulant_cube(g, 1.0, 3, spec) == doctest::Approx(2.0 * power_trace(spec, 3)));
  const double g4 = factorial_cumulant_cube(g, 1.0, 4, spec);
  CHECK(g4 == doctest::Approx(-6.0 * power_trace(spec, 4)));
  CHECK(std::abs(g4) <= 6.0 * i1);
  CHECK_THROWS(factorial_cumulant_cube(g, 2.0, 2, spec));
}

TEST_CASE("brillinger trend") {
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  const double closed = 0.3 * std::sqrt(kPi / 2.0);
  const auto k2 = brillinger_trend(g, 2, {1.0, 2.0, 4.0});
  CHECK(k2.back().ratio == doctest::Approx(closed).epsilon(0.02));
  const auto k3 = brillinger_trend(g, 3, {1.0, 2.0, 4.0});
  for (std::size_t i = 0; i < k2.size(); ++i) CHECK(k3[i].ratio <= 2.0 * k2[i].ratio * 1.0);
  for (int k = 2; k <= 4; ++k) {
    const auto tr = brillinger_trend(g, k, {1.0, 2.0, 4.0});
    CHECK(std::abs(tr[2].ratio - tr[1].ratio) / tr[1].ratio < 0.05);
  }
  const auto p = brillinger_trend(KernelModel::poisson(1, 1.0), 2, {1.0, 2.0});
  CHECK(p[0].ratio == 0.0);
  CHECK(p[1].ratio == 0.0);
  CHECK_THROWS(brillinger_trend(g, 2, {2.0, 1.0}));
}

TEST_CASE("operator preconditions") {
  CHECK_THROWS_AS(build_operator(KernelModel::poisson(1, 1.0), 1.0, 16), InvalidModel);
  CHECK_THROWS(build_operator(KernelModel::gaussian(1, 1.0, 0.3), 1.0, 3));
  CHECK_THROWS(build_operator(KernelModel::gaussian(2, 100.0, 0.05), 1.0, 200));
  CHECK_THROWS_AS(build_operator(KernelModel::gaussian(1, 1.0, 0.6), 1.0, 16), InvalidModel);
}
