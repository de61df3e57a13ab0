#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpplab {

enum class Family { Gaussian, Bessel, PoissonDegenerate, Tabulated };

std::string family_name(Family family);

// Raised when a model or its parameters cannot be used.
class InvalidModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a tabulated kernel is evaluated outside its radial grid.
class OutOfRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RadialTable {
  std::vector<double> r;
  std::vector<double> c;
  std::vector<double> slope;  // monotone cubic Hermite slopes
  // Fourier transform sampled on a uniform |xi| grid, filled at construction.
  double xi_step = 0.0;
  std::vector<double> spectrum;
};

// Stationary isotropic kernel C. Immutable once built.
class KernelModel {
 public:
  static KernelModel gaussian(int dimension, double rho, double alpha);
  static KernelModel bessel(int dimension, double rho);
  static KernelModel poisson(int dimension, double rho);
  static KernelModel tabulated(int dimension, double rho, std::vector<double> r,
                               std::vector<double> c);

  int dimension() const { return dimension_; }
  Family family() const { return family_; }
  double rho() const { return rho_; }
  double alpha() const { return alpha_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  const RadialTable* table() const { return table_.get(); }

  // C evaluated at |x| = r.
  double radial(double r) const;
  // F(C) evaluated at |xi| = s.
  double spectrum_radial(double s) const;
  // Radius beyond which F(C) stays below `level` (0 when F is nowhere that large).
  double spectral_radius(double level) const;

 private:
  KernelModel() = default;

  int dimension_ = 1;
  Family family_ = Family::Gaussian;
  double rho_ = 1.0;
  double alpha_ = 0.0;
  double bessel_amp_ = 0.0;
  double bessel_scale_ = 0.0;
  std::string label_;
  std::shared_ptr<const RadialTable> table_;
};

struct ExistenceReport {
  bool valid = false;
  double sup_spectrum = 0.0;
  bool degenerate = false;
  std::string reason;
};

inline constexpr double kExistenceTolerance = 1e-9;
// Relative level below which a negative tabulated spectrum is treated as quadrature noise.
inline constexpr double kSpectrumNoiseFloor = 1e-6;

double eval_kernel(const KernelModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
double fourier_transform(const KernelModel& model, const Eigen::Ref<const Eigen::VectorXd>& xi);
ExistenceReport check_existence(const KernelModel& model);
// Throws InvalidModel carrying the existence reason when the model is not a valid DPP kernel.
void require_valid(const KernelModel& model);

double pcf(const KernelModel& model, double r);

// Reduced factorial cumulant densities of orders 2, 3 and 4; args holds order-1 lag vectors.
double cumulant_density(const KernelModel& model, int order,
                        const std::vector<Eigen::VectorXd>& args);
double cumulant_density2(const KernelModel& model, double u);

double l2_norm_sq(const KernelModel& model);

struct HeinrichBounds {
  double sup3 = 0.0;
  double sup_int4 = 0.0;
};
HeinrichBounds check_heinrich_bounds(const KernelModel& model, double r_min, double r_max,
                                     double eps, int grid_n);

// Largest alpha admitted for a Gaussian kernel with the given rho and dimension.
double gaussian_alpha_max(int dimension, double rho);
// Volume of the unit ball and surface area of the unit sphere in R^d.
double unit_ball_volume(int dimension);
double sphere_area(int dimension);
// Distance at which |C| first drops below 1e-3 rho or first changes sign.
double effective_range(const KernelModel& model);

}  // namespace dpplab
