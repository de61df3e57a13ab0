#pragma once

#include "dpplab/kernel_models.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpplab {

// Axis-aligned box [lower, upper].
class Window {
 public:
  Window() = default;
  Window(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static Window cube(int dimension, double side);
  static Window box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) { return {lower, upper}; }

  int dimension() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd sides() const { return upper_ - lower_; }
  double volume() const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Inner parallel box at distance r; empty when 2r reaches a side.
  std::optional<Window> eroded(double r) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

struct PatternProvenance {
  std::string generator;  // "dpp" or "poisson"
  std::uint64_t seed = 0;
  std::string model_label;
  double margin_factor = 0.0;
  std::vector<double> torus_sides;
  long long modes_retained = 0;  // real basis functions after truncation
  long long modes_selected = 0;  // Bernoulli-included functions (torus point count)
  long long envelope_overflows = 0;
  long long proposals = 0;
};

struct PointPattern {
  Eigen::MatrixXd points;  // one row per point
  Window window;
  PatternProvenance provenance;

  Eigen::Index size() const { return points.rows(); }
};

// Points of `pattern` inside `sub`, which must lie within the pattern's window.
PointPattern restrict_to(const PointPattern& pattern, const Window& sub);

struct SamplerOptions {
  long long modes_cap = 2'000'000;
  // Torus side = window side + margin_factor * effective kernel range.
  double margin_factor = 5.0;
  double truncation = 1e-8;
  // Accepted points orthonormalized together.
  int block = 32;
  // Proposal grid points per mean inter-point distance along each axis.
  double grid_density = 3.0;
};

PointPattern sample_dpp(const KernelModel& model, const Window& window, std::uint64_t seed,
                        const SamplerOptions& opts = {});
PointPattern sample_poisson(double rho, const Window& window, std::uint64_t seed);
// Draws from the model family: Poisson for the degenerate kernel, sample_dpp otherwise.
PointPattern sample_model(const KernelModel& model, const Window& window, std::uint64_t seed,
                          const SamplerOptions& opts = {});

// Independent stream seed for replicate `index` under `master`.
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index);

}  // namespace dpplab
