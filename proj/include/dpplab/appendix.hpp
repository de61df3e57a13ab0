#pragma once

#include "dpplab/kernel_models.hpp"
#include "dpplab/sampler.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace dpplab {

// Bounded scalar field vanishing outside `support`; jumps only on the support faces.
struct LinearTestFunction {
  std::function<double(const Eigen::VectorXd&)> f;
  Window support;
};

// Bounded function of two points on the line: zero unless both arguments lie in [lo, hi]
// and |x - y| <= lag. `breaks` lists coordinates where f may jump in either argument.
struct PairTestFunction {
  std::function<double(double, double)> f;
  double lo = 0.0;
  double hi = 0.0;
  double lag = 0.0;
  std::vector<double> breaks;
};

// Scalar field on the line, zero outside [lo, hi], jumps only at `breaks`.
struct LineFunction {
  std::function<double(double)> h;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breaks;
};

struct QuadratureControl {
  int order = 6;           // Gauss-Legendre nodes per panel
  double panel_scale = 1.0;  // panel width as a fraction of min(kernel range, lag)
};

// Var(sum f(x)) = double integral of f(x) f(x+y) c2(y) + rho * integral of f^2.
double var_linear_statistic(const KernelModel& model, const LinearTestFunction& f,
                            const QuadratureControl& ctl = {});

// Var of the sum of f over ordered distinct pairs, the ten-term expression in c2, c3, c4.
// f is replaced by its symmetrization, which leaves the statistic unchanged. d = 1 only.
double var_pair_statistic(const KernelModel& model, const PairTestFunction& f,
                          const QuadratureControl& ctl = {});

// Cov(sum over ordered distinct pairs of f, sum of h), five terms. f must be symmetric. d = 1 only.
double cov_pair_linear(const KernelModel& model, const PairTestFunction& f, const LineFunction& h,
                       const QuadratureControl& ctl = {});

// Pair indicator f(x, y) = 1{x in [a, b]} 1{|x - y| <= lag}.
PairTestFunction pair_indicator(double a, double b, double lag);
// Symmetric pair indicator 1{x in [a, b]} 1{y in [a, b]} 1{|x - y| <= lag}.
PairTestFunction symmetric_pair_indicator(double a, double b, double lag);
LineFunction line_indicator(double a, double b);

// Sum of f over ordered distinct pairs of a one-dimensional pattern.
double pair_sum(const PointPattern& pattern, const PairTestFunction& f);
double linear_sum(const PointPattern& pattern, const LinearTestFunction& f);

}  // namespace dpplab
