#include "dpplab/estimators.hpp"
#include "dpplab/mc_harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace dpplab;

namespace {

const double kPi = 3.14159265358979323846;

PointPattern pattern_of(const std::vector<Eigen::Vector2d>& pts, const Window& w) {
  PointPattern p;
  p.window = w;
  p.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) p.points.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return p;
}

template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("smoothing kernel moments") {
  const SmoothingKernel ep(SmoothingFamily::Epanechnikov);
  CHECK(ep.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ep.first_moment()) < 1e-14);
  CHECK(ep.l2_sq() == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
  CHECK(ep.second_abs_moment() == doctest::Approx(1.0 / 5.0).epsilon(1e-12));
  const SmoothingKernel box(SmoothingFamily::Box);
  CHECK(box.second_abs_moment() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(box.l2_sq() == doctest::Approx(0.5).epsilon(1e-12));
  // Self-convolution of the unit box is the triangle (2 - |s|) / 4; its square integrates to 1/3.
  CHECK(box.self_convolution(0.5) == doctest::Approx(1.5 / 4.0).epsilon(1e-12));
  CHECK(box.conv_l2_sq() == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  const SmoothingKernel tri(SmoothingFamily::Triangular);
  CHECK(tri.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tri.l2_sq() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  for (const auto& k : {ep, box, tri}) {
    const double brute = simpson(
        [&](double s) {
          const double conv = simpson([&](double t) { return k(t) * k(s - t); }, -1.0, 1.0, 4000);
          return conv * conv;
        },
        -2.0, 2.0, 800);
    CHECK(k.conv_l2_sq() == doctest::Approx(brute).epsilon(2e-3));
    CHECK(k(1.5) == 0.0);
    CHECK(k(0.3) == k(-0.3));
  }
  CHECK(parse_smoothing("box") == SmoothingFamily::Box);
  CHECK_THROWS(parse_smoothing("gaussian"));
}

TEST_CASE("intensity estimator") {
  const Window w = Window::cube(2, 1.0);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 9; ++i) pts.emplace_back(0.1 * i + 0.05, 0.5);
  CHECK(intensity_hat(pattern_of(pts, w)) == 9.0);
  CHECK(intensity_hat(pattern_of({}, w)) == 0.0);
}

TEST_CASE("asymptotic intensity variance") {
  CHECK(sigma2_intensity(KernelModel::gaussian(2, 100.0, 0.05)) ==
        doctest::Approx(100.0 - 1e4 * kPi * 0.0025 / 2.0).epsilon(1e-10));
  CHECK(sigma2_intensity(KernelModel::gaussian(2, 100.0, 0.05)) == doctest::Approx(60.730).epsilon(1e-4));
  CHECK(std::abs(sigma2_intensity(KernelModel::bessel(2, 100.0))) < 1e-4);
  CHECK(sigma2_intensity(KernelModel::poisson(2, 7.0)) == 7.0);
  for (int d = 1; d <= 3; ++d)
    for (double frac : {0.1, 0.5, 0.9, 1.0}) {
      const auto m = KernelModel::gaussian(d, 20.0, frac * gaussian_alpha_max(d, 20.0));
      const double s2 = sigma2_intensity(m);
      CHECK(s2 >= 0.0);
      CHECK(s2 <= 20.0);
    }
}

TEST_CASE("translation correction") {
  const Window w = Window::box(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(2.0, 3.0));
  CHECK(translation_correction(w, Eigen::Vector2d(0.0, 0.0)) == 6.0);
  CHECK(translation_correction(w, Eigen::Vector2d(2.5, 0.0)) == 0.0);
  // Brute-force cell count of D intersected with its translate.
  const int n = 400;
  long long inside = 0;
  const Eigen::Vector2d z(0.5, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = (i + 0.5) * 2.0 / n, y = (j + 0.5) * 3.0 / n;
      if (x - z(0) >= 0.0 && x - z(0) <= 2.0 && y - z(1) >= 0.0 && y - z(1) <= 3.0) ++inside;
    }
  CHECK(translation_correction(w, z) == doctest::Approx(inside * 6.0 / (n * n)).epsilon(1e-3));
  CHECK(translation_correction(w, z) == doctest::Approx(3.0));
}

TEST_CASE("pcf estimator by hand") {
  const double L = 2.0, r = 0.3, b = 0.05;
  const Window w = Window::cube(2, L);
  const auto p = pattern_of({Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5 + r, 0.5)}, w);
  const SmoothingKernel box(SmoothingFamily::Box);
  const double rho_hat = 2.0 / (L * L);
  const double corr = (L - r) * L;
  const double expected = 2.0 * 0.5 / (2.0 * kPi * r * rho_hat * rho_hat * b * corr);
  CHECK(pcf_hat(p, r, b, box) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(pcf_hat(p, 0.6, b, box) == 0.0);
  CHECK_THROWS(pcf_hat(pattern_of({}, w), r, b, box));
  CHECK_THROWS(pcf_hat(p, -0.1, b, box));

  // Integrating the estimate against sigma_d r recovers 2 / (rho_hat^2 |D cap D^z|).
  const SmoothingKernel ep;
  const double integral = simpson([&](double s) { return pcf_hat(p, s, b, ep) * 2.0 * kPi * s; }, r - b, r + b, 400);
  CHECK(integral == doctest::Approx(2.0 / (rho_hat * rho_hat * corr)).epsilon(1e-6));
}

TEST_CASE("poisson pcf is flat") {
  const Window w = Window::cube(2, 2.0);
  const SmoothingKernel k;
  const Eigen::VectorXd r = uniform_grid(0.05, 0.25, 5);
  const int R = 200;
  Eigen::MatrixXd g(R, r.size());
  for (int i = 0; i < R; ++i) g.row(i) = pcf_hat_grid(sample_poisson(100.0, w, replicate_seed(2, i)), r, 0.02, k).ghat;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const double mean = g.col(j).mean();
    const double sd = std::sqrt((g.col(j).array() - mean).square().sum() / (R - 1));
    CHECK(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(double(R)));
  }
}

TEST_CASE("bias bound") {
  const auto m = KernelModel::gaussian(2, 100.0, 0.05);
  const SmoothingKernel k;
  const double big = bias_bound(m, 0.05, 0.15, 0.01, k).bound;
  const double small = bias_bound(m, 0.05, 0.15, 0.005, k).bound;
  CHECK(big > 0.0);
  CHECK(small / big == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS(bias_bound(m, 0.0, 0.15, 0.01, k));
  CHECK_THROWS(bias_bound(m, 0.005, 0.15, 0.01, k));
  CHECK(bias_bound(KernelModel::poisson(2, 100.0), 0.05, 0.15, 0.01, k).bound == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("pointwise variance variants") {
  const auto m = KernelModel::gaussian(2, 100.0, 0.05);
  const SmoothingKernel k;
  const double r = 0.1;
  const double base = 2.0 / 1e4 * pcf(m, r) / (2.0 * kPi * r);
  CHECK(tau2_pointwise(m, r, k, Tau2Variant::Printed) == doctest::Approx(base * std::sqrt(0.6)).epsilon(1e-12));
  CHECK(tau2_pointwise(m, r, k, Tau2Variant::NoSqrt) == doctest::Approx(base * 0.6).epsilon(1e-12));
  CHECK(tau2_pointwise(m, r, k, Tau2Variant::KappaOverRho4) ==
        doctest::Approx(tau2_pointwise(m, r, k, Tau2Variant::Printed)).epsilon(1e-12));
  CHECK(tau2_pointwise(m, 1e-9, k) < 1e-6 * tau2_pointwise(m, r, k));
}

TEST_CASE("integrated squared error") {
  const auto m = KernelModel::gaussian(2, 100.0, 0.05);
  PcfEstimate est;
  est.r = uniform_grid(0.05, 0.15, 64);
  est.rho_hat = 100.0;
  est.ghat.resize(est.r.size());
  for (Eigen::Index i = 0; i < est.r.size(); ++i) est.ghat(i) = pcf(m, est.r(i));
  const PcfFunction g0 = [&](double s) { return pcf(m, s); };
  CHECK(ise_from_estimate(est, 100.0, g0) == doctest::Approx(0.0));
  const double c = 7.0;
  for (Eigen::Index i = 0; i < est.r.size(); ++i) est.ghat(i) += c / 1e4;
  CHECK(ise_from_estimate(est, 100.0, g0) == doctest::Approx(c * c * 0.1).epsilon(1e-10));

  const SmoothingKernel k;
  const double lead = ise_leading_constant(m, 0.05, 0.15, k);
  const double oracle = 2.0 * 1e4 * simpson([&](double s) { return pcf(m, s) / (2.0 * kPi * s); }, 0.05, 0.15, 2000) * 0.6;
  CHECK(lead == doctest::Approx(oracle).epsilon(1e-8));
  const double t2 = tau2_ise(m, 0.05, 0.15, k);
  const double t2_oracle =
      8.0 * 1e8 * simpson([&](double s) { return std::pow(pcf(m, s) / (2.0 * kPi * s), 2); }, 0.05, 0.15, 2000) *
      k.conv_l2_sq();
  CHECK(t2 > 0.0);
  CHECK(t2 == doctest::Approx(t2_oracle).epsilon(1e-8));
  // Poisson reference: constant g0 = 1 gives a logarithm.
  const double pois = ise_leading_constant(KernelModel::poisson(2, 100.0), 0.05, 0.15, k);
  CHECK(pois == doctest::Approx(2.0 * 1e4 * std::log(3.0) / (2.0 * kPi) * 0.6).epsilon(1e-8));
}

TEST_CASE("default bandwidth rates") {
  double prev3 = 0.0, prev5 = 1e300;
  for (double side : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double vol = side * side;
    const double b = default_bandwidth(100.0, 2, vol);
    CHECK(b == doctest::Approx(0.15 * 0.1 * std::pow(vol, -0.25)));
    CHECK(b * b * b * vol > prev3);
    CHECK(std::pow(b, 5) * vol < prev5);
    prev3 = b * b * b * vol;
    prev5 = std::pow(b, 5) * vol;
  }
}
