#include "dpplab/estimators.hpp"
#include "dpplab/io.hpp"
#include "dpplab/kernel_models.hpp"
#include "dpplab/mc_harness.hpp"
#include "dpplab/sampler.hpp"
#include "dpplab/spectral_operator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dpplab;
using Json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kInvalid = 2, kIo = 3, kMalformed = 4 };

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

KernelModel valid_model(const std::string& spec, int dimension) {
  KernelModel m = parse_model_spec(spec, dimension);
  if (m.dimension() != dimension) throw InvalidInput("model dimension differs from the window dimension");
  const auto rep = check_existence(m);
  if (!rep.valid) throw InvalidModel("invalid model: " + rep.reason);
  return m;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed " << s << " (drawn)\n";
  return s;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- sample ----
struct SampleArgs {
  std::string model, window, out;
  std::optional<std::uint64_t> seed;
  double margin = SamplerOptions{}.margin_factor;
};

int cmd_sample(const SampleArgs& a) {
  const Window window = parse_window(a.window);
  const KernelModel model = valid_model(a.model, window.dimension());
  const std::uint64_t seed = resolve_seed(a.seed);
  SamplerOptions opts;
  opts.margin_factor = a.margin;
  const PointPattern p = sample_model(model, window, seed, opts);
  write_pattern_csv(p, a.out);
  Json meta = pattern_metadata(p, a.model);
  meta["command"] = {{"subcommand", "sample"}, {"model", a.model}, {"window", a.window}, {"seed", seed},
                     {"margin_factor", a.margin}};
  write_text(sidecar_path(a.out), dump(meta));
  std::cerr << p.size() << " points written to " << a.out << "\n";
  return kOk;
}

// ---- estimate ----
struct EstimateArgs {
  std::string pattern, model, window, kernel = "epanechnikov", out;
  double r_min = 0.0, r_max = 0.0, bandwidth = 0.0;
  int grid = 64;
};

int cmd_estimate(const EstimateArgs& a) {
  Window window;
  if (!a.window.empty()) {
    window = parse_window(a.window);
  } else {
    const std::string meta_path = sidecar_path(a.pattern);
    Json meta;
    try {
      meta = Json::parse(read_text(meta_path));
    } catch (const IoFailure&) {
      throw InvalidInput("no --window given and no metadata file " + meta_path);
    } catch (const Json::exception& e) {
      throw MalformedData(meta_path + ": " + e.what());
    }
    window = window_from_json(meta.at("window"));
  }
  const PointPattern p = read_pattern_csv(a.pattern, window);
  const SmoothingKernel kern(parse_smoothing(a.kernel));
  if (!(a.r_min > 0.0 && a.r_max > a.r_min)) throw InvalidInput("need 0 < r-min < r-max");
  if (a.grid < 2) throw InvalidInput("grid must have at least two points");
  const double rho_hat = intensity_hat(p);
  const double b = a.bandwidth > 0.0 ? a.bandwidth
                                     : default_bandwidth(std::max(rho_hat, 1e-300), window.dimension(), window.volume());
  const double reach = a.r_max + kern.half_width() * b;
  if (!(reach < window.sides().minCoeff()))
    throw InvalidInput("r grid infeasible: r-max + T*b = " + format_double(reach) +
                       " is not below the smallest window side " + format_double(window.sides().minCoeff()));
  const Eigen::VectorXd r = uniform_grid(a.r_min, a.r_max, a.grid);
  const PcfEstimate est = pcf_hat_grid(p, r, b, kern);

  std::optional<KernelModel> model;
  if (!a.model.empty()) model = valid_model(a.model, window.dimension());
  std::optional<BiasBound> bias;
  std::vector<std::string> warnings;
  if (model) {
    try {
      bias = bias_bound(*model, a.r_min, a.r_max, b, kern);
    } catch (const std::invalid_argument& e) {
      warnings.push_back(std::string("bias bound unavailable: ") + e.what());
    }
  }
  std::ostringstream csv;
  csv << kCsvVersionLine << "\nr,ghat,g0,bias_bound\n";
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    csv << format_double(r(i)) << "," << format_double(est.ghat(i)) << ",";
    if (model) csv << format_double(pcf(*model, r(i)));
    csv << ",";
    if (bias) csv << format_double(bias->bound / (model->rho() * model->rho()));
    csv << "\n";
  }
  write_text(a.out + ".csv", csv.str());
  Json j;
  j["format"] = "dpp-lab v1";
  j["command"] = {{"subcommand", "estimate"}, {"pattern", a.pattern}, {"model", a.model},
                  {"window", window_string(window)}, {"r_min", a.r_min}, {"r_max", a.r_max},
                  {"bandwidth", a.bandwidth}, {"kernel", a.kernel}, {"grid", a.grid}};
  j["points"] = p.size();
  j["rho_hat"] = rho_hat;
  j["sigma2_intensity"] = model ? Json(sigma2_intensity(*model)) : Json(nullptr);
  j["bandwidth"] = b;
  j["pairs_used"] = est.pairs_used;
  if (bias) {
    j["bias_bound"] = bias->bound;
    j["bias_bound_g"] = bias->bound / (model->rho() * model->rho());
    j["bias_m_sup"] = bias->m_sup;
  }
  j["warnings"] = warnings;
  write_text(a.out + ".json", dump(j));
  return kOk;
}

// ---- verify-mixing ----
struct MixingArgs {
  std::string model = "gaussian:rho=1,alpha=0.3,d=1", out;
  std::vector<int> k{2, 3, 4};
  std::vector<double> t{1.0, 2.0, 4.0};
  int nodes = 0;
};

int cmd_verify_mixing(const MixingArgs& a) {
  for (int k : a.k)
    if (k < 2) throw InvalidInput("k=" + std::to_string(k) + " refused: ratios for k=1 are trivially rho");
  const KernelModel model = valid_model(a.model, parse_model_spec(a.model, 1).dimension());
  std::ostringstream csv;
  csv << kCsvVersionLine << "\nt,k,I_k,gamma_fact_k,ratio\n";
  Json verdict = Json::object();
  for (int k : a.k) {
    const auto trend = brillinger_trend(model, k, a.t, a.nodes);
    for (const auto& p : trend)
      csv << format_double(p.t) << "," << k << "," << format_double(p.power_trace) << ","
          << format_double(p.gamma_fact) << "," << format_double(p.ratio) << "\n";
    if (trend.size() >= 2) {
      const double last = trend.back().ratio, prev = trend[trend.size() - 2].ratio;
      const double change = std::abs(last - prev) / std::max(std::abs(prev), 1e-300);
      verdict["k" + std::to_string(k)] = {{"relative_change_last_step", change}, {"stabilizing", change < 0.05}};
    }
  }
  write_text(a.out, csv.str());
  Json j;
  j["format"] = "dpp-lab v1";
  j["command"] = {{"subcommand", "verify-mixing"}, {"model", a.model}, {"k", a.k}, {"t", a.t}, {"nodes", a.nodes}};
  if (a.t.size() >= 2) j["trend"] = verdict;
  else j["trend"] = "single t value: no trend verdict";
  write_text(sidecar_path(a.out), dump(j));
  return kOk;
}

// ---- clt / gof ----
struct CltArgs {
  std::string experiment, config, out, reference;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load_config(const CltArgs& a) {
  Json j;
  try {
    j = Json::parse(read_text(a.config));
  } catch (const Json::parse_error& e) {
    throw MalformedData(a.config + ": " + e.what());
  }
  ExperimentConfig c;
  try {
    c = config_from_json(j);
  } catch (const Json::exception& e) {
    throw InvalidInput(a.config + ": " + e.what());
  }
  if (a.replicates) c.replicates = *a.replicates;
  if (a.seed) c.seed = *a.seed;
  return c;
}

void write_report(const McReport& rep, const std::string& out, Json extra = {}) {
  Json j = report_json(rep);
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_text(out + ".json", dump(j));
  std::ostringstream csv;
  write_replicates_csv(rep, csv);
  write_text(out + "_replicates.csv", csv.str());
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "runtime " << rep.runtime_seconds << " s\n";
}

int cmd_clt(const CltArgs& a) {
  Experiment e;
  try {
    e = parse_experiment(a.experiment);
  } catch (const std::invalid_argument& ex) {
    throw InvalidInput(ex.what());
  }
  const ExperimentConfig c = load_config(a);
  write_report(run_experiment(e, c), a.out);
  return kOk;
}

int cmd_gof(const CltArgs& a) {
  ExperimentConfig c = load_config(a);
  if (!a.reference.empty()) c.reference = a.reference;
  if (c.reference.empty()) {
    const KernelModel truth = parse_model_spec(c.model, c.windows.front().dimension());
    c.reference = "poisson:rho=" + format_double(truth.rho()) + ",d=" + std::to_string(truth.dimension());
  }
  const McReport rep = run_ise_clt(c);
  Json verdicts = Json::array();
  for (const auto& cell : rep.cells)
    verdicts.push_back({{"window_index", cell.window_index},
                        {"separation_se", cell.get("separation_se")},
                        {"reject_reference", cell.get("separation_se") >= 3.0}});
  write_report(rep, a.out, Json{{"gof", verdicts}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpp-lab: stationary determinantal point process laboratory"};
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw a pattern on a window");
  sample->add_option("--model", sa.model, "family:key=value,...")->required();
  sample->add_option("--window", sa.window, "l1,...,ld,u1,...,ud")->required();
  sample->add_option("--seed", sa.seed, "Random seed (drawn and logged when absent)");
  sample->add_option("--out", sa.out, "Pattern CSV path")->required();
  sample->add_option("--margin-factor", sa.margin, "Periodization margin in kernel ranges");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Estimate intensity and pair correlation");
  estimate->add_option("--pattern", ea.pattern, "Pattern CSV")->required();
  estimate->add_option("--model", ea.model, "Reference model for g0 and the bias bound");
  estimate->add_option("--window", ea.window, "Observation window (default: metadata sidecar)");
  estimate->add_option("--r-min", ea.r_min)->required();
  estimate->add_option("--r-max", ea.r_max)->required();
  estimate->add_option("--bandwidth", ea.bandwidth, "Bandwidth (default rule when absent)");
  estimate->add_option("--kernel", ea.kernel, "epanechnikov|box|triangular");
  estimate->add_option("--grid", ea.grid, "Number of r values");
  estimate->add_option("--out", ea.out, "Output prefix")->required();

  MixingArgs ma;
  auto* mixing = app.add_subcommand("verify-mixing", "Factorial cumulant masses on growing cubes");
  mixing->add_option("--model", ma.model);
  mixing->add_option("--k", ma.k, "Cumulant orders")->delimiter(',');
  mixing->add_option("--t", ma.t, "Half-widths, increasing")->delimiter(',');
  mixing->add_option("--nodes", ma.nodes, "Nodes per axis (0: default rule)");
  mixing->add_option("--out", ma.out, "CSV path")->required();

  CltArgs ca;
  auto* clt = app.add_subcommand("clt", "Replicated limit-theorem experiment");
  clt->add_option("--experiment", ca.experiment, "intensity|cumulant-decay|pcf|ise")->required();
  clt->add_option("--config", ca.config, "Experiment JSON")->required();
  clt->add_option("--replicates", ca.replicates);
  clt->add_option("--seed", ca.seed);
  clt->add_option("--out", ca.out, "Output prefix")->required();

  CltArgs ga;
  auto* gof = app.add_subcommand("gof", "ISE goodness of fit against a reference model");
  gof->add_option("--config", ga.config, "Experiment JSON (sampled model and windows)")->required();
  gof->add_option("--reference", ga.reference, "Reference model spec (default: Poisson, same rho)");
  gof->add_option("--replicates", ga.replicates);
  gof->add_option("--seed", ga.seed);
  gof->add_option("--out", ga.out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (sample->parsed()) return cmd_sample(sa);
    if (estimate->parsed()) return cmd_estimate(ea);
    if (mixing->parsed()) return cmd_verify_mixing(ma);
    if (clt->parsed()) return cmd_clt(ca);
    if (gof->parsed()) return cmd_gof(ga);
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const MalformedData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
