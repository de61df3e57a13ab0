#include "dpplab/spectral_operator.hpp"

#include "dpplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dpplab {

namespace {

long long ipow(long long base, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Multi-index of a flat tensor position, axis 0 fastest.
void unflatten(long long flat, int per_axis, int d, std::vector<int>& idx) {
  for (int a = 0; a < d; ++a) {
    idx[a] = static_cast<int>(flat % per_axis);
    flat /= per_axis;
  }
}

}  // namespace

int default_nodes_per_axis(const KernelModel& model, double t, const OperatorOptions& opts) {
  const int d = model.dimension();
  const int floor_nodes = d == 1 ? 48 : 24;
  int n = floor_nodes;
  if (model.family() != Family::PoissonDegenerate) {
    const double band = model.spectral_radius(1e-10);
    n = std::max(n, static_cast<int>(std::ceil(4.25 * 2.0 * t * band)));
  }
  if (n % 2) ++n;
  const int half_cap = static_cast<int>(std::floor(std::pow(opts.node_cap, 1.0 / d) + 1e-9));
  n = std::min(n, 2 * half_cap);
  return std::max(n, 4);
}

SpectralApprox build_operator(const KernelModel& model, double t) {
  return build_operator(model, t, default_nodes_per_axis(model, t));
}

SpectralApprox build_operator(const KernelModel& model, double t, int nodes_per_axis,
                              const OperatorOptions& opts) {
  if (model.family() == Family::PoissonDegenerate)
    throw InvalidModel(
        "the degenerate Poisson kernel is not continuous; no Mercer expansion to discretize");
  require_valid(model);
  if (!(t > 0.0)) throw std::invalid_argument("build_operator: t must be positive");
  if (nodes_per_axis < 4) throw std::invalid_argument("build_operator: need at least 4 nodes per axis");
  const int d = model.dimension();
  const int n = nodes_per_axis;
  const bool split = (n % 2 == 0);
  const int h = split ? n / 2 : n;
  const long long block = ipow(h, d);
  if (block > opts.node_cap) {
    std::ostringstream os;
    const int max_half = static_cast<int>(std::floor(std::pow(opts.node_cap, 1.0 / d) + 1e-9));
    os << "node cap exceeded: " << block << " nodes per eigenproblem > " << opts.node_cap
       << "; use at most " << 2 * max_half << " (even) nodes per axis, or shrink t";
    throw std::invalid_argument(os.str());
  }

  const auto rule = gauss_legendre(n, -t, t);
  SpectralApprox out;
  out.half_width = t;
  out.dimension = d;
  out.nodes_per_axis = n;
  out.model_label = model.label();
  out.rho = model.rho();
  const long long total = ipow(n, d);
  out.nodes.resize(total, d);
  out.weights.resize(total);
  std::vector<int> idx(d);
  for (long long f = 0; f < total; ++f) {
    unflatten(f, n, d, idx);
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      out.nodes(f, a) = rule.nodes(idx[a]);
      w *= rule.weights(idx[a]);
    }
    out.weights(f) = w;
  }
  const double band = model.spectral_radius(1e-10);
  out.resolved = n >= static_cast<int>(std::ceil(4.25 * 2.0 * t * band)) - 1;

  std::vector<double> all;
  all.reserve(total);
  if (!split) {
    Eigen::MatrixXd A(total, total);
    const Eigen::VectorXd sw = out.weights.cwiseSqrt();
    for (long long i = 0; i < total; ++i)
      for (long long j = 0; j <= i; ++j) {
        const double v = sw(i) * sw(j) * model.radial((out.nodes.row(i) - out.nodes.row(j)).norm());
        A(i, j) = v;
        A(j, i) = v;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) all.push_back(es.eigenvalues()(i));
  } else {
    // Parity blocks: the grid is symmetric and C is even in every coordinate.
    Eigen::MatrixXd half_nodes(block, d);
    Eigen::VectorXd half_sw(block);
    for (long long f = 0; f < block; ++f) {
      unflatten(f, h, d, idx);
      double w = 1.0;
      for (int a = 0; a < d; ++a) {
        half_nodes(f, a) = rule.nodes(h + idx[a]);
        w *= rule.weights(h + idx[a]);
      }
      half_sw(f) = std::sqrt(w);
    }
    const int patterns = 1 << d;
    std::vector<Eigen::MatrixXd> blocks(patterns, Eigen::MatrixXd(block, block));
    std::vector<double> kv(patterns);
    Eigen::VectorXd diff(d);
    for (long long i = 0; i < block; ++i)
      for (long long j = 0; j <= i; ++j) {
        for (int sigma = 0; sigma < patterns; ++sigma) {
          for (int a = 0; a < d; ++a) {
            const double q = (sigma >> a) & 1 ? -half_nodes(j, a) : half_nodes(j, a);
            diff(a) = half_nodes(i, a) - q;
          }
          kv[sigma] = model.radial(diff.norm());
        }
        const double scale = half_sw(i) * half_sw(j);
        for (int s = 0; s < patterns; ++s) {
          double acc = 0.0;
          for (int sigma = 0; sigma < patterns; ++sigma)
            acc += (__builtin_popcount(s & sigma) % 2 ? -1.0 : 1.0) * kv[sigma];
          blocks[s](i, j) = scale * acc;
          blocks[s](j, i) = scale * acc;
        }
      }
    for (int s = 0; s < patterns; ++s) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blocks[s], Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) all.push_back(es.eigenvalues()(i));
      blocks[s].resize(0, 0);
    }
  }
  std::sort(all.begin(), all.end(), std::greater<>());
  out.eigenvalues = Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
  out.clamped = out.eigenvalues.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

double power_trace(const SpectralApprox& spec, int k) {
  if (k < 1) throw std::invalid_argument("power_trace: k must be at least 1");
  if (k == 1) return spec.clamped.sum();
  return spec.clamped.array().pow(static_cast<double>(k)).sum();
}

double ik_quadrature(const KernelModel& model, double t, int k) {
  if (k < 2 || k > 3) throw std::invalid_argument("ik_quadrature: k must be 2 or 3 (use power_trace)");
  if (model.family() == Family::PoissonDegenerate) return 0.0;
  const int d = model.dimension();
  const double range = std::max(effective_range(model), 1e-12);
  const int order = 8;
  const int panels = std::max(4, static_cast<int>(std::ceil(2.0 * t / (0.5 * range))));
  if (d == 1) {
    const auto q = composite_gauss_legendre(panels, order, -t, t);
    const int m = static_cast<int>(q.nodes.size());
    Eigen::MatrixXd c(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = model.radial(q.nodes(i) - q.nodes(j));
    double acc = 0.0;
    if (k == 2) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) acc += q.weights(i) * q.weights(j) * c(i, j) * c(i, j);
    } else {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          const double wij = q.weights(i) * q.weights(j) * c(j, i);
          for (int l = 0; l < m; ++l) acc += wij * q.weights(l) * c(l, j) * c(i, l);
        }
    }
    return acc;
  }
  if (k == 2) {
    // Lag form: integral of C(z)^2 times the overlap volume of the cube with its shift.
    const auto q = composite_gauss_legendre(Eigen::VectorXd::Zero(1), 2 * panels, order, -2.0 * t,
                                            2.0 * t);
    const long long m = q.nodes.size();
    const long long count = ipow(m, d);
    if (count > 200'000'000LL)
      throw std::invalid_argument("ik_quadrature: grid too large for this dimension");
    std::vector<int> idx(d);
    Eigen::VectorXd z(d);
    double acc = 0.0;
    for (long long f = 0; f < count; ++f) {
      unflatten(f, static_cast<int>(m), d, idx);
      double w = 1.0;
      for (int a = 0; a < d; ++a) {
        z(a) = q.nodes(idx[a]);
        w *= q.weights(idx[a]) * (2.0 * t - std::abs(z(a)));
      }
      const double c = model.radial(z.norm());
      acc += w * c * c;
    }
    return acc;
  }
  throw std::invalid_argument("ik_quadrature: k=3 tensor quadrature is limited to d=1");
}

double factorial_cumulant_cube(const KernelModel& model, double t, int k,
                               const SpectralApprox& spec) {
  if (k < 1) throw std::invalid_argument("factorial_cumulant_cube: k must be at least 1");
  if (std::abs(spec.half_width - t) > 1e-12 * std::max(1.0, t))
    throw std::invalid_argument("factorial_cumulant_cube: spectral approximation built on another t");
  if (spec.model_label != model.label())
    throw std::invalid_argument("factorial_cumulant_cube: spectral approximation built for another model");
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return sign * factorial(k - 1) * power_trace(spec, k);
}

std::vector<TrendPoint> brillinger_trend(const KernelModel& model, int k,
                                         const std::vector<double>& t_list, int nodes_per_axis) {
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (!(t_list[i] > t_list[i - 1]))
      throw std::invalid_argument("brillinger_trend: t_list must be increasing");
  std::vector<TrendPoint> out;
  for (double t : t_list) {
    TrendPoint p;
    p.t = t;
    if (model.family() == Family::PoissonDegenerate) {
      p.power_trace = k == 1 ? model.rho() * std::pow(2.0 * t, model.dimension()) : 0.0;
      p.gamma_fact = k == 1 ? p.power_trace : 0.0;
    } else {
      const int n = nodes_per_axis > 0 ? nodes_per_axis : default_nodes_per_axis(model, t);
      const auto spec = build_operator(model, t, n);
      p.power_trace = power_trace(spec, k);
      p.gamma_fact = factorial_cumulant_cube(model, t, k, spec);
    }
    p.ratio = std::abs(p.gamma_fact) / std::pow(2.0 * t, model.dimension());
    out.push_back(p);
  }
  return out;
}

}  // namespace dpplab
