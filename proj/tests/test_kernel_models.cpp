#include "dpplab/io.hpp"
#include "dpplab/kernel_models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dpplab;

namespace {

const double kPi = 3.14159265358979323846;

// Midpoint-rule Fourier integral of a radial 2-d kernel at xi = (s, 0).
double fourier_2d_oracle(const KernelModel& m, double s, double half, int n) {
  const double h = 2.0 * half / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -half + (i + 0.5) * h;
    const double cx = std::cos(2.0 * kPi * x * s);
    for (int j = 0; j < n; ++j) {
      const double y = -half + (j + 0.5) * h;
      acc += m.radial(std::hypot(x, y)) * cx;
    }
  }
  return acc * h * h;
}

// Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("gaussian kernel values") {
  const auto m = KernelModel::gaussian(2, 100.0, 0.05);
  CHECK(eval_kernel(m, Eigen::Vector2d(0.0, 0.0)) == 100.0);
  CHECK(eval_kernel(m, Eigen::Vector2d(0.03, 0.04)) == doctest::Approx(100.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(eval_kernel(m, Eigen::Vector2d(0.05, 0.0)) == doctest::Approx(36.78794).epsilon(1e-6));
}

TEST_CASE("kernel symmetry") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (const auto& m : {KernelModel::gaussian(2, 100.0, 0.05), KernelModel::bessel(2, 100.0)})
    for (int i = 0; i < 20; ++i) {
      Eigen::Vector2d x(0.1 * n01(rng), 0.1 * n01(rng));
      CHECK(eval_kernel(m, x) == eval_kernel(m, Eigen::Vector2d(-x)));
    }
}

TEST_CASE("bessel kernel near zero and away from it") {
  const auto m = KernelModel::bessel(2, 100.0);
  CHECK(m.radial(0.0) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(m.radial(1e-9) == doctest::Approx(100.0).epsilon(1e-12));
  // C(r) = rho * 2 J1(z) / z with z = 2 sqrt(pi rho) r; J1 from its power series.
  const double r = 0.07;
  const double z = 2.0 * std::sqrt(kPi * 100.0) * r;
  double j1 = 0.0, term = z / 2.0;
  for (int k = 0; k < 40; ++k) {
    j1 += term;
    term *= -(z * z / 4.0) / ((k + 1.0) * (k + 2.0));
  }
  CHECK(m.radial(r) == doctest::Approx(100.0 * 2.0 * j1 / z).epsilon(1e-10));
  // Continuity across the series switch.
  CHECK(m.radial(0.9e-4 / (2.0 * std::sqrt(kPi * 100.0))) ==
        doctest::Approx(m.radial(1.1e-4 / (2.0 * std::sqrt(kPi * 100.0)))).epsilon(1e-8));
}

TEST_CASE("poisson degenerate kernel") {
  const auto m = KernelModel::poisson(2, 50.0);
  CHECK(eval_kernel(m, Eigen::Vector2d(0.0, 0.0)) == 50.0);
  CHECK(eval_kernel(m, Eigen::Vector2d(1e-6, 0.0)) == 0.0);
  const auto rep = check_existence(m);
  CHECK(rep.valid);
  CHECK(rep.degenerate);
  CHECK(l2_norm_sq(m) == 0.0);
}

TEST_CASE("fourier transform closed forms") {
  const auto g = KernelModel::gaussian(2, 100.0, 0.05);
  CHECK(fourier_transform(g, Eigen::Vector2d(0.0, 0.0)) == doctest::Approx(100.0 * kPi * 0.0025).epsilon(1e-12));
  const auto b = KernelModel::bessel(2, 100.0);
  CHECK(fourier_transform(b, Eigen::Vector2d(5.0, 0.0)) == 1.0);
  CHECK(fourier_transform(b, Eigen::Vector2d(0.0, 6.0)) == 0.0);
}

TEST_CASE("gaussian fourier transform agrees with quadrature") {
  const auto g = KernelModel::gaussian(2, 100.0, 0.05);
  const double band = g.spectral_radius(1e-6);
  for (double s : {0.0, 0.5 * band, band, 2.0 * band}) {
    const double oracle = fourier_2d_oracle(g, s, 0.4, 400);
    const double value = fourier_transform(g, Eigen::Vector2d(s, 0.0));
    CHECK(std::abs(value - oracle) <= 1e-6 * std::max(std::abs(oracle), 1e-3));
  }
}

TEST_CASE("existence boundary") {
  const auto ok = check_existence(KernelModel::gaussian(2, 100.0, 0.056));
  CHECK(ok.valid);
  CHECK(ok.sup_spectrum == doctest::Approx(0.9852).epsilon(1e-3));
  const auto bad = check_existence(KernelModel::gaussian(2, 100.0, 0.06));
  CHECK_FALSE(bad.valid);
  CHECK(bad.sup_spectrum == doctest::Approx(1.1310).epsilon(1e-3));
  CHECK(bad.reason.find("1.1310") != std::string::npos);
  CHECK(check_existence(KernelModel::bessel(2, 100.0)).valid);
  CHECK(check_existence(KernelModel::bessel(2, 100.0)).sup_spectrum == 1.0);
  CHECK_THROWS_AS(require_valid(KernelModel::gaussian(2, 100.0, 0.06)), InvalidModel);
}

TEST_CASE("existence boundary tracks the alpha bound in every dimension") {
  for (int d = 1; d <= 3; ++d)
    for (double rho : {0.5, 1.0, 100.0}) {
      const double amax = 1.0 / (std::sqrt(kPi) * std::pow(rho, 1.0 / d));
      CHECK(gaussian_alpha_max(d, rho) == doctest::Approx(amax).epsilon(1e-12));
      CHECK(check_existence(KernelModel::gaussian(d, rho, amax * (1.0 - 1e-12))).valid);
      CHECK(check_existence(KernelModel::gaussian(d, rho, amax)).valid);
      CHECK_FALSE(check_existence(KernelModel::gaussian(d, rho, amax * (1.0 + 1e-6))).valid);
    }
}

TEST_CASE("pair correlation function") {
  const auto g = KernelModel::gaussian(2, 100.0, 0.05);
  CHECK(pcf(g, 0.0) == 0.0);
  CHECK(pcf(g, 0.05 * std::sqrt(std::log(2.0))) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::abs(pcf(g, 1.0) - 1.0) < 1e-12);
  const auto b = KernelModel::bessel(2, 100.0);
  for (double r = 0.0; r < 1.0; r += 0.0137) {
    CHECK(pcf(g, r) >= 0.0);
    CHECK(pcf(g, r) <= 1.0);
    CHECK(pcf(b, r) >= 0.0);
    CHECK(pcf(b, r) <= 1.0);
  }
}

TEST_CASE("cumulant densities at the origin and symmetry") {
  const auto g = KernelModel::gaussian(2, 100.0, 0.05);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  CHECK(cumulant_density(g, 2, {z}) == doctest::Approx(-1e4));
  CHECK(cumulant_density(g, 3, {z, z}) == doctest::Approx(2e6));
  CHECK(cumulant_density(g, 4, {z, z, z}) == doctest::Approx(-6e8));
  CHECK_THROWS(cumulant_density(g, 5, {z, z, z, z}));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  auto rv = [&] { return Eigen::VectorXd(Eigen::Vector2d(0.04 * n01(rng), 0.04 * n01(rng))); };
  for (int i = 0; i < 25; ++i) {
    const auto u = rv(), v = rv(), w = rv();
    CHECK(cumulant_density(g, 3, {u, v}) == doctest::Approx(cumulant_density(g, 3, {v, u})).epsilon(1e-12));
    const double base = cumulant_density(g, 4, {u, v, w});
    CHECK(cumulant_density(g, 4, {v, u, w}) == doctest::Approx(base).epsilon(1e-12));
    // Cyclic relabelling of the three printed product terms.
    const double c = cumulant_density(g, 4, {u, w, v});
    CHECK(c == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("l2 norms and Parseval") {
  const auto g = KernelModel::gaussian(2, 100.0, 0.05);
  CHECK(l2_norm_sq(g) == doctest::Approx(1e4 * kPi * 0.0025 / 2.0).epsilon(1e-10));
  // Radial quadrature of C^2 in the plane.
  const double direct = simpson([&](double r) { return 2.0 * kPi * r * std::pow(g.radial(r), 2); }, 0.0, 0.5, 2000);
  CHECK(l2_norm_sq(g) == doctest::Approx(direct).epsilon(1e-8));
  // Parseval through the spectrum.
  const double spectral =
      simpson([&](double s) { return 2.0 * kPi * s * std::pow(g.spectrum_radial(s), 2); }, 0.0, 40.0, 4000);
  CHECK(l2_norm_sq(g) == doctest::Approx(spectral).epsilon(1e-4));
  const auto b = KernelModel::bessel(2, 100.0);
  CHECK(l2_norm_sq(b) == doctest::Approx(100.0).epsilon(1e-4));
  const double ball = simpson([&](double s) { return 2.0 * kPi * s * std::pow(b.spectrum_radial(s), 2); }, 0.0,
                              std::sqrt(100.0 / kPi), 2000);
  CHECK(l2_norm_sq(b) == doctest::Approx(ball).epsilon(1e-4));
}

TEST_CASE("heinrich bounds") {
  const auto g = KernelModel::gaussian(2, 100.0, 0.05);
  const auto hb = check_heinrich_bounds(g, 0.02, 0.1, 0.01, 16);
  CHECK(hb.sup3 <= 2e6);
  CHECK(hb.sup3 > 0.0);
  CHECK(std::isfinite(hb.sup_int4));
  CHECK(hb.sup_int4 <= 6.0 * 1e4 * l2_norm_sq(g) * 1e4);
  const auto hp = check_heinrich_bounds(KernelModel::poisson(2, 100.0), 0.02, 0.1, 0.01, 16);
  CHECK(hp.sup3 == 0.0);
  CHECK(hp.sup_int4 == 0.0);
}

TEST_CASE("tabulated kernels") {
  std::vector<double> r, c;
  const auto g = KernelModel::gaussian(1, 1.0, 0.3);
  for (int i = 0; i <= 400; ++i) {
    r.push_back(i * 0.005);
    c.push_back(g.radial(r.back()));
  }
  const auto t = KernelModel::tabulated(1, 1.0, r, c);
  CHECK(t.radial(0.0) == doctest::Approx(1.0));
  CHECK(t.radial(0.1234) == doctest::Approx(g.radial(0.1234)).epsilon(1e-5));
  CHECK_THROWS_AS(t.radial(2.5), OutOfRange);
  const auto rep = check_existence(t);
  CHECK(rep.valid);
  CHECK(rep.sup_spectrum == doctest::Approx(g.spectrum_radial(0.0)).epsilon(1e-3));
  CHECK(l2_norm_sq(t) == doctest::Approx(l2_norm_sq(g)).epsilon(1e-4));

  // A jump of more than 10% of rho between nodes is rejected.
  std::vector<double> cj = c;
  for (std::size_t i = 100; i < cj.size(); ++i) cj[i] = 0.0;
  cj[99] = 0.5;
  CHECK_THROWS_AS(KernelModel::tabulated(1, 1.0, r, cj), InvalidModel);
  // Radii must start at zero and increase.
  CHECK_THROWS_AS(KernelModel::tabulated(1, 1.0, {0.1, 0.2, 0.3}, {1.0, 0.5, 0.1}), InvalidModel);
  // Negative spectral density: a box-like kernel has an oscillating transform.
  std::vector<double> cb;
  for (double x : r) cb.push_back(x < 0.5 ? 1.0 - 0.05 * x : std::max(0.0, 0.975 - 1.0 * (x - 0.5) * 10.0));
  const auto box = KernelModel::tabulated(1, 1.0, r, cb);
  const auto brep = check_existence(box);
  CHECK_FALSE(brep.valid);
  CHECK(brep.reason.find("negative spectral density") != std::string::npos);
}

TEST_CASE("model spec parsing") {
  const auto m = parse_model_spec("gaussian:rho=100,alpha=0.05", 2);
  CHECK(m.family() == Family::Gaussian);
  CHECK(m.dimension() == 2);
  CHECK(m.alpha() == 0.05);
  CHECK(parse_model_spec("bessel:rho=100,d=2").family() == Family::Bessel);
  CHECK(parse_model_spec("poisson:rho=3,d=1").dimension() == 1);
  CHECK_THROWS(parse_model_spec("gaussian:rho=100"));
  CHECK_THROWS(parse_model_spec("cauchy:rho=100"));
  CHECK_THROWS(parse_model_spec("gaussian:rho=100,alpha=0.05,beta=1"));
}
