#pragma once

#include "dpplab/kernel_models.hpp"
#include "dpplab/sampler.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace dpplab {

enum class SmoothingFamily { Epanechnikov, Box, Triangular };

std::string smoothing_name(SmoothingFamily family);
SmoothingFamily parse_smoothing(const std::string& name);

// Symmetric unit-mass density supported on [-T, T], with cached moments.
class SmoothingKernel {
 public:
  explicit SmoothingKernel(SmoothingFamily family = SmoothingFamily::Epanechnikov,
                           double half_width = 1.0);

  double operator()(double t) const;
  SmoothingFamily family() const { return family_; }
  double half_width() const { return half_width_; }
  double mass() const { return mass_; }                  // integral of k
  double first_moment() const { return first_; }         // integral of t k
  double second_abs_moment() const { return second_; }   // integral of t^2 |k|
  double l2_sq() const { return l2_; }                   // integral of k^2
  double conv_l2_sq() const { return conv_l2_; }         // integral of (k*k)^2
  // Self-convolution (k*k)(s), supported on [-2T, 2T].
  double self_convolution(double s) const;

 private:
  SmoothingFamily family_;
  double half_width_;
  double mass_ = 0.0, first_ = 0.0, second_ = 0.0, l2_ = 0.0, conv_l2_ = 0.0;
};

struct PcfEstimate {
  Eigen::VectorXd r;
  Eigen::VectorXd ghat;
  double bandwidth = 0.0;
  double rho_hat = 0.0;
  Window window;
  long long pairs_used = 0;  // unordered pairs with a nonzero kernel weight at some r
};

double intensity_hat(const PointPattern& pattern);
double sigma2_intensity(const KernelModel& model);
double translation_correction(const Window& window, const Eigen::Ref<const Eigen::VectorXd>& z);
// Surface area of the unit sphere in R^d.
double sigma_d(int dimension);

double pcf_hat(const PointPattern& pattern, double r, double bandwidth, const SmoothingKernel& k);
PcfEstimate pcf_hat_grid(const PointPattern& pattern, const Eigen::VectorXd& r, double bandwidth,
                         const SmoothingKernel& k);
// 64 (by default) uniform r values on [r_min, r_max].
Eigen::VectorXd uniform_grid(double r_min, double r_max, int n = 64);

// Bandwidth c * |D|^{-1/4} with c = factor * rho^{-1/d}.
double default_bandwidth(double rho, int dimension, double volume, double factor = 0.15);

struct BiasBound {
  double bound = 0.0;   // b^2 M rho^2 integral t^2|k|
  double m_sup = 0.0;   // grid supremum standing in for M
};
BiasBound bias_bound(const KernelModel& model, double r_min, double r_max, double bandwidth,
                     const SmoothingKernel& k);

enum class Tau2Variant { Printed, NoSqrt, KappaOverRho4 };
double tau2_pointwise(const KernelModel& model, double r, const SmoothingKernel& k,
                      Tau2Variant variant = Tau2Variant::Printed);

using PcfFunction = std::function<double(double)>;

// Simpson integral of (rho_hat^2 ghat - rho_ref^2 g_ref)^2 over [r_min, r_max] on grid_n nodes.
double ise(const PointPattern& pattern, double rho_ref, const PcfFunction& g_ref, double r_min,
           double r_max, double bandwidth, const SmoothingKernel& k, int grid_n = 64);
double ise(const PointPattern& pattern, const KernelModel& model, double r_min, double r_max,
           double bandwidth, const SmoothingKernel& k, int grid_n = 64);
// Same discrepancy from a precomputed estimate on its own grid.
double ise_from_estimate(const PcfEstimate& est, double rho_ref, const PcfFunction& g_ref);

// 2 rho^2 integral_I g0 / (sigma_d r^{d-1}) dr * integral k^2.
double ise_leading_constant(double rho, int dimension, const PcfFunction& g0, double r_min,
                            double r_max, const SmoothingKernel& k);
double ise_leading_constant(const KernelModel& model, double r_min, double r_max,
                            const SmoothingKernel& k);
// 8 rho^4 integral_I (g0 / (sigma_d r^{d-1}))^2 dr * integral (k*k)^2.
double tau2_ise(const KernelModel& model, double r_min, double r_max, const SmoothingKernel& k);

}  // namespace dpplab
