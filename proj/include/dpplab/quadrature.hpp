#pragma once

#include <Eigen/Dense>

namespace dpplab {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Gauss-Legendre rule with n nodes on [a, b], nodes ascending.
QuadratureRule gauss_legendre(int n, double a, double b);

// Gauss-Legendre of the given order on each of `panels` equal sub-intervals.
QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b);

// Composite rule whose panel edges include every breakpoint inside (a, b).
QuadratureRule composite_gauss_legendre(const Eigen::VectorXd& breakpoints, int panels, int order,
                                        double a, double b);

// Simpson weights for equally spaced samples; an even sample count closes with a 3/8 panel.
Eigen::VectorXd simpson_weights(int n, double a, double b);

}  // namespace dpplab
