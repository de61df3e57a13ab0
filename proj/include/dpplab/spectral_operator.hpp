#pragma once

#include "dpplab/kernel_models.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dpplab {

struct OperatorOptions {
  // Upper bound on the size of each dense symmetric eigenproblem.
  int node_cap = 4096;
};

// Nystrom discretization of C on [-t, t]^d.
struct SpectralApprox {
  double half_width = 0.0;
  int dimension = 1;
  int nodes_per_axis = 0;
  Eigen::MatrixXd nodes;     // one row per node
  Eigen::VectorXd weights;   // tensor Gauss-Legendre weights
  Eigen::VectorXd eigenvalues;  // raw, sorted descending
  Eigen::VectorXd clamped;      // clipped to [0, 1]
  std::string model_label;
  double rho = 0.0;
  bool resolved = true;  // false when the cap prevented the resolution rule from being met
};

// Nodes per axis needed to resolve the kernel's band on [-t, t]^d, never below the
// 48 (d=1) / 24 (d>=2) floor, rounded up to an even count and limited by the cap.
int default_nodes_per_axis(const KernelModel& model, double t, const OperatorOptions& opts = {});

SpectralApprox build_operator(const KernelModel& model, double t, int nodes_per_axis,
                              const OperatorOptions& opts = {});
SpectralApprox build_operator(const KernelModel& model, double t);

double power_trace(const SpectralApprox& spec, int k);

// Cyclic product integral over [-t, t]^{dk} by tensor Gauss-Legendre, k in {2, 3}.
double ik_quadrature(const KernelModel& model, double t, int k);

double factorial_cumulant_cube(const KernelModel& model, double t, int k,
                               const SpectralApprox& spec);

struct TrendPoint {
  double t = 0.0;
  double power_trace = 0.0;
  double gamma_fact = 0.0;
  double ratio = 0.0;
};

// nodes_per_axis <= 0 selects the default rule for every t.
std::vector<TrendPoint> brillinger_trend(const KernelModel& model, int k,
                                         const std::vector<double>& t_list, int nodes_per_axis = 0);

}  // namespace dpplab
