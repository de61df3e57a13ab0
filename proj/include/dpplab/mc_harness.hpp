#pragma once

#include "dpplab/estimators.hpp"
#include "dpplab/kernel_models.hpp"
#include "dpplab/sampler.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace dpplab {

enum class Experiment { Intensity, CumulantDecay, Pcf, Ise };

std::string experiment_name(Experiment e);
// Throws std::invalid_argument for unknown names.
Experiment parse_experiment(const std::string& name);

inline constexpr int kCltMinReplicates = 100;

struct ExperimentConfig {
  std::string model;                 // model spec string
  std::vector<Window> windows;       // nested, smallest first
  int replicates = 500;
  std::uint64_t seed = 1;
  int cumulant_order = 3;            // cumulant-decay
  std::vector<double> r;             // pcf evaluation points
  double r_min = 0.0, r_max = 0.0;   // ise interval
  double bandwidth = 0.0;            // fixed bandwidth; 0 selects the default rule
  double bandwidth_factor = 0.15;    // factor of default_bandwidth
  SmoothingFamily smoothing = SmoothingFamily::Epanechnikov;
  int ise_grid = 64;
  double margin_factor = 5.0;        // sampler periodization margin
  std::string reference;             // ise: reference model spec; empty means the sampled model
};

nlohmann::ordered_json config_json(const ExperimentConfig& config);
// Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);

// One (window, r) combination and its named summary values.
struct ReportCell {
  std::size_t window_index = 0;
  Window window;
  std::optional<double> r;
  std::vector<std::pair<std::string, double>> values;

  double get(const std::string& name) const;  // throws when absent
  bool has(const std::string& name) const;
  void set(const std::string& name, double value);
};

struct McReport {
  Experiment experiment = Experiment::Intensity;
  ExperimentConfig config;
  std::vector<ReportCell> cells;
  std::vector<std::string> warnings;
  nlohmann::ordered_json summary;        // experiment-level results and flags
  std::vector<std::uint64_t> seeds;      // per replicate
  Eigen::MatrixXd replicate_values;      // replicates x cells, raw statistic per cell
  std::string value_name;                // name of the raw statistic
  double runtime_seconds = 0.0;          // not serialized
};

nlohmann::ordered_json report_json(const McReport& report);
// "# dpp-lab v1" then replicate,seed,window,r,<value_name>.
void write_replicates_csv(const McReport& report, std::ostream& out);

// Worker count: DPP_LAB_THREADS when set, else the hardware concurrency.
int worker_count();

McReport run_intensity_clt(const ExperimentConfig& config);
McReport run_cumulant_decay(const ExperimentConfig& config);
McReport run_pcf_clt(const ExperimentConfig& config);
McReport run_ise_clt(const ExperimentConfig& config);
McReport run_experiment(Experiment experiment, const ExperimentConfig& config);

// Descriptive statistics used in reports.
struct SampleSummary {
  double mean = 0.0, sd = 0.0, variance = 0.0;
  double k2 = 0.0, k3 = 0.0, k4 = 0.0;
  double skewness = 0.0, excess_kurtosis = 0.0;
};
SampleSummary summarize(const std::vector<double>& values);
// Kolmogorov-Smirnov distance between the empirical law of `values` and N(0, 1).
double ks_normal(std::vector<double> values);
// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dpplab
