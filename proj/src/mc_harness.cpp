#include "dpplab/mc_harness.hpp"

#include "dpplab/cumulant_lab.hpp"
#include "dpplab/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dpplab {

namespace {

using Json = nlohmann::ordered_json;

struct Context {
  KernelModel model;
  Window hull;
};

Context prepare(const ExperimentConfig& config) {
  if (config.windows.empty()) throw std::invalid_argument("experiment: at least one window is required");
  const int d = config.windows.front().dimension();
  for (std::size_t i = 0; i < config.windows.size(); ++i) {
    const Window& w = config.windows[i];
    if (w.dimension() != d) throw std::invalid_argument("experiment: windows differ in dimension");
    if (i > 0) {
      const Window& prev = config.windows[i - 1];
      if ((prev.lower().array() < w.lower().array()).any() || (prev.upper().array() > w.upper().array()).any())
        throw std::invalid_argument("experiment: windows must be nested, smallest first");
    }
  }
  if (config.replicates < 2) throw std::invalid_argument("experiment: at least two replicates are required");
  if (!(config.margin_factor >= 0.0)) throw std::invalid_argument("experiment: margin_factor must be non-negative");
  Context ctx{parse_model_spec(config.model, d), config.windows.back()};
  if (ctx.model.dimension() != d) throw std::invalid_argument("experiment: model and window dimensions differ");
  require_valid(ctx.model);
  return ctx;
}

// Replicate `fn(seed)` for every index; rows land in index order whatever the scheduling.
template <class Fn>
Eigen::MatrixXd run_replicates(const ExperimentConfig& config, int columns, std::vector<std::uint64_t>& seeds,
                               Fn fn) {
  const int R = config.replicates;
  seeds.resize(R);
  for (int i = 0; i < R; ++i) seeds[i] = replicate_seed(config.seed, static_cast<std::uint64_t>(i));
  Eigen::MatrixXd out(R, columns);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  int error_index = R;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= R) return;
      try {
        const std::vector<double> row = fn(seeds[i]);
        for (int c = 0; c < columns; ++c) out(i, c) = row[c];
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  const int workers = std::max(1, std::min(worker_count(), R));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<PointPattern> sample_nested(const Context& ctx, const ExperimentConfig& config, std::uint64_t seed) {
  SamplerOptions opts;
  opts.margin_factor = config.margin_factor;
  const PointPattern full = sample_model(ctx.model, ctx.hull, seed, opts);
  std::vector<PointPattern> out;
  out.reserve(config.windows.size());
  for (std::size_t w = 0; w + 1 < config.windows.size(); ++w) out.push_back(restrict_to(full, config.windows[w]));
  out.push_back(full);
  return out;
}

std::vector<double> column(const Eigen::MatrixXd& m, int c) {
  return std::vector<double>(m.col(c).data(), m.col(c).data() + m.rows());
}

void add_shape(ReportCell& cell, const std::vector<double>& standardized) {
  const SampleSummary s = summarize(standardized);
  cell.set("k2", s.k2);
  cell.set("k3", s.k3);
  cell.set("k4", s.k4);
  cell.set("skewness", s.skewness);
  cell.set("excess_kurtosis", s.excess_kurtosis);
  cell.set("ks_distance", ks_normal(standardized));
}

std::vector<double> empirically_standardized(const std::vector<double>& x) {
  const SampleSummary s = summarize(x);
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = s.sd > 0.0 ? (x[i] - s.mean) / s.sd : 0.0;
  return z;
}

McReport start_report(Experiment e, const ExperimentConfig& config) {
  McReport rep;
  rep.experiment = e;
  rep.config = config;
  if (config.replicates < kCltMinReplicates)
    rep.warnings.push_back("below CLT suite minimum: " + std::to_string(config.replicates) + " replicates < " +
                           std::to_string(kCltMinReplicates));
  rep.summary["hypotheses_note"] =
      "ergodicity and Brillinger mixing are assumed; the report checks their consequences only";
  return rep;
}

double window_bandwidth(const ExperimentConfig& config, const KernelModel& model, const Window& w) {
  if (config.bandwidth > 0.0) return config.bandwidth;
  return default_bandwidth(model.rho(), model.dimension(), w.volume(), config.bandwidth_factor);
}

void check_reach(double r_top, double b, const SmoothingKernel& k, const Window& w) {
  if (!(r_top + k.half_width() * b < w.sides().minCoeff()))
    throw std::invalid_argument("r grid infeasible: r + T*b = " + format_double(r_top + k.half_width() * b) +
                                " is not below the smallest window side " + format_double(w.sides().minCoeff()));
}

template <class Fn>
McReport timed(Fn fn) {
  const auto t0 = std::chrono::steady_clock::now();
  McReport rep = fn();
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Intensity: return "intensity";
    case Experiment::CumulantDecay: return "cumulant-decay";
    case Experiment::Pcf: return "pcf";
    case Experiment::Ise: return "ise";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  if (name == "intensity") return Experiment::Intensity;
  if (name == "cumulant-decay") return Experiment::CumulantDecay;
  if (name == "pcf") return Experiment::Pcf;
  if (name == "ise") return Experiment::Ise;
  throw std::invalid_argument("unknown experiment '" + name + "' (intensity, cumulant-decay, pcf, ise)");
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["model"] = c.model;
  Json ws = Json::array();
  for (const auto& w : c.windows) {
    std::vector<double> v(w.lower().data(), w.lower().data() + w.dimension());
    v.insert(v.end(), w.upper().data(), w.upper().data() + w.dimension());
    ws.push_back(v);
  }
  j["windows"] = ws;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["cumulant_order"] = c.cumulant_order;
  j["r"] = c.r;
  j["r_min"] = c.r_min;
  j["r_max"] = c.r_max;
  j["bandwidth"] = c.bandwidth;
  j["bandwidth_factor"] = c.bandwidth_factor;
  j["smoothing"] = smoothing_name(c.smoothing);
  j["ise_grid"] = c.ise_grid;
  j["margin_factor"] = c.margin_factor;
  j["reference"] = c.reference;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "model") c.model = v.get<std::string>();
    else if (key == "windows") {
      c.windows.clear();
      for (const auto& w : v) c.windows.push_back(window_from_json(w));
    } else if (key == "replicates") c.replicates = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "cumulant_order") c.cumulant_order = v.get<int>();
    else if (key == "r") c.r = v.get<std::vector<double>>();
    else if (key == "r_min") c.r_min = v.get<double>();
    else if (key == "r_max") c.r_max = v.get<double>();
    else if (key == "bandwidth") c.bandwidth = v.get<double>();
    else if (key == "bandwidth_factor") c.bandwidth_factor = v.get<double>();
    else if (key == "smoothing") c.smoothing = parse_smoothing(v.get<std::string>());
    else if (key == "ise_grid") c.ise_grid = v.get<int>();
    else if (key == "margin_factor") c.margin_factor = v.get<double>();
    else if (key == "reference") c.reference = v.get<std::string>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  if (c.model.empty()) throw std::invalid_argument("config: 'model' is required");
  if (c.windows.empty()) throw std::invalid_argument("config: 'windows' is required");
  return c;
}

double ReportCell::get(const std::string& name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  throw std::out_of_range("report cell has no value '" + name + "'");
}

bool ReportCell::has(const std::string& name) const {
  return std::any_of(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
}

void ReportCell::set(const std::string& name, double value) {
  for (auto& kv : values)
    if (kv.first == name) {
      kv.second = value;
      return;
    }
  values.emplace_back(name, value);
}

Json report_json(const McReport& rep) {
  Json j;
  j["format"] = "dpp-lab v1";
  j["experiment"] = experiment_name(rep.experiment);
  j["config"] = config_json(rep.config);
  j["statistic"] = rep.value_name;
  j["warnings"] = rep.warnings;
  j["summary"] = rep.summary;
  Json cells = Json::array();
  for (const auto& c : rep.cells) {
    Json cj;
    cj["window_index"] = c.window_index;
    cj["window"] = window_json(c.window);
    cj["volume"] = c.window.volume();
    if (c.r) cj["r"] = *c.r;
    for (const auto& [k, v] : c.values) cj[k] = v;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  j["seeds"] = rep.seeds;
  return j;
}

void write_replicates_csv(const McReport& rep, std::ostream& out) {
  out << kCsvVersionLine << "\n";
  out << "replicate,seed,window,r," << rep.value_name << "\n";
  for (Eigen::Index i = 0; i < rep.replicate_values.rows(); ++i)
    for (std::size_t c = 0; c < rep.cells.size(); ++c) {
      const auto& cell = rep.cells[c];
      out << i << "," << rep.seeds[i] << "," << cell.window_index << ","
          << (cell.r ? format_double(*cell.r) : std::string()) << ","
          << format_double(rep.replicate_values(i, static_cast<Eigen::Index>(c))) << "\n";
    }
}

int worker_count() {
  if (const char* env = std::getenv("DPP_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 1024));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

SampleSummary summarize(const std::vector<double>& values) {
  if (values.size() < 4) throw std::invalid_argument("summarize: need at least four values");
  const auto k = empirical_cumulants(values, 4);
  SampleSummary s;
  s.mean = k[0];
  s.k2 = k[1];
  s.k3 = k[2];
  s.k4 = k[3];
  s.variance = k[1];
  s.sd = std::sqrt(std::max(0.0, k[1]));
  s.skewness = s.k2 > 0.0 ? s.k3 / std::pow(s.k2, 1.5) : 0.0;
  s.excess_kurtosis = s.k2 > 0.0 ? s.k4 / (s.k2 * s.k2) : 0.0;
  return s;
}

double ks_normal(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("ks_normal: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-values[i] / std::sqrt(2.0));
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  return d;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: need matching sizes >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) throw std::invalid_argument("ls_slope: x values are all equal");
  return sxy / sxx;
}

McReport run_intensity_clt(const ExperimentConfig& config) {
  return timed([&] {
    const Context ctx = prepare(config);
    McReport rep = start_report(Experiment::Intensity, config);
    rep.value_name = "sqrt_volume_times_rho_error";
    const int W = static_cast<int>(config.windows.size());
    const double rho = ctx.model.rho();
    rep.replicate_values = run_replicates(config, W, rep.seeds, [&](std::uint64_t seed) {
      const auto patterns = sample_nested(ctx, config, seed);
      std::vector<double> row(W);
      for (int w = 0; w < W; ++w) {
        const double vol = config.windows[w].volume();
        row[w] = std::sqrt(vol) * (static_cast<double>(patterns[w].size()) / vol - rho);
      }
      return row;
    });
    const double sigma2 = sigma2_intensity(ctx.model);
    const bool trend = sigma2 <= 1e-6 * rho;
    rep.summary["mode"] = trend ? "variance-trend" : "standardized";
    rep.summary["sigma2"] = sigma2;
    if (trend)
      rep.summary["mode_reason"] =
          "asymptotic variance rho - integral C^2 vanishes; values are reported unstandardized";
    std::vector<double> variances;
    for (int w = 0; w < W; ++w) {
      ReportCell cell;
      cell.window_index = static_cast<std::size_t>(w);
      cell.window = config.windows[w];
      const auto x = column(rep.replicate_values, w);
      const SampleSummary s = summarize(x);
      cell.set("mean", s.mean);
      cell.set("sd", s.sd);
      cell.set("empirical_variance", s.variance);
      cell.set("mean_count", rho * cell.window.volume() + s.mean * std::sqrt(cell.window.volume()));
      variances.push_back(s.variance);
      if (trend) {
        cell.set("count_variance_per_volume", s.variance);
        add_shape(cell, empirically_standardized(x));
      } else {
        cell.set("sigma2", sigma2);
        cell.set("variance_ratio", s.variance / sigma2);
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] / std::sqrt(sigma2);
        add_shape(cell, z);
      }
      rep.cells.push_back(cell);
    }
    if (trend) {
      bool decreasing = true;
      for (std::size_t i = 1; i < variances.size(); ++i) decreasing = decreasing && variances[i] < variances[i - 1];
      rep.summary["strictly_decreasing"] = decreasing;
    }
    return rep;
  });
}

McReport run_cumulant_decay(const ExperimentConfig& config) {
  return timed([&] {
    const int k = config.cumulant_order;
    if (k != 3 && k != 4) throw std::invalid_argument("cumulant-decay: cumulant_order must be 3 or 4");
    if (config.windows.size() < 3) throw std::invalid_argument("cumulant-decay: at least three windows are required");
    if (k == 3 && config.replicates < 1000)
      throw std::invalid_argument("cumulant-decay: k=3 needs at least 1000 replicates");
    const Context ctx = prepare(config);
    McReport rep = start_report(Experiment::CumulantDecay, config);
    rep.value_name = "sqrt_volume_times_rho_error";
    const int W = static_cast<int>(config.windows.size());
    const double rho = ctx.model.rho();
    rep.replicate_values = run_replicates(config, W, rep.seeds, [&](std::uint64_t seed) {
      const auto patterns = sample_nested(ctx, config, seed);
      std::vector<double> row(W);
      for (int w = 0; w < W; ++w) {
        const double vol = config.windows[w].volume();
        row[w] = (static_cast<double>(patterns[w].size()) - rho * vol) / std::sqrt(vol);
      }
      return row;
    });
    std::vector<double> logv, logk, absk;
    bool any_signal = false;
    const double R = config.replicates;
    for (int w = 0; w < W; ++w) {
      ReportCell cell;
      cell.window_index = static_cast<std::size_t>(w);
      cell.window = config.windows[w];
      const SampleSummary s = summarize(column(rep.replicate_values, w));
      const double kk = k == 3 ? s.k3 : s.k4;
      const double se = k == 3 ? std::sqrt(6.0 * std::pow(s.k2, 3) / R) : std::sqrt(24.0 * std::pow(s.k2, 4) / R);
      cell.set("mean", s.mean);
      cell.set("k2", s.k2);
      cell.set("k3", s.k3);
      cell.set("k4", s.k4);
      cell.set("k_statistic", kk);
      cell.set("k_statistic_se", se);
      cell.set("standardized_k", s.k2 > 0.0 ? kk / std::pow(s.k2, k / 2.0) : 0.0);
      if (std::abs(kk) > 2.0 * se) any_signal = true;
      logv.push_back(std::log(cell.window.volume()));
      logk.push_back(std::log(std::max(std::abs(kk), 1e-300)));
      absk.push_back(std::abs(kk));
      rep.cells.push_back(cell);
    }
    rep.summary["cumulant_order"] = k;
    rep.summary["expected_slope"] = 1.0 - k / 2.0;
    if (any_signal) rep.summary["slope"] = ls_slope(logv, logk);
    else rep.summary["slope"] = "below noise floor";
    int inversions = 0;
    for (std::size_t i = 1; i < absk.size(); ++i)
      if (absk[i] > absk[i - 1]) ++inversions;
    rep.summary["trend_inversions"] = inversions;
    return rep;
  });
}

McReport run_pcf_clt(const ExperimentConfig& config) {
  return timed([&] {
    if (config.r.empty()) throw std::invalid_argument("pcf: at least one r value is required");
    const Context ctx = prepare(config);
    const SmoothingKernel kern(config.smoothing);
    const int W = static_cast<int>(config.windows.size());
    const int nr = static_cast<int>(config.r.size());
    const Eigen::VectorXd rvec = Eigen::Map<const Eigen::VectorXd>(config.r.data(), nr);
    if (rvec.minCoeff() <= 0.0) throw std::invalid_argument("pcf: r values must be positive");
    std::vector<double> bw(W);
    for (int w = 0; w < W; ++w) {
      bw[w] = window_bandwidth(config, ctx.model, config.windows[w]);
      check_reach(rvec.maxCoeff(), bw[w], kern, config.windows[w]);
    }
    McReport rep = start_report(Experiment::Pcf, config);
    rep.value_name = "ghat";
    const int cells = W * nr;
    const Eigen::MatrixXd raw = run_replicates(config, cells + W, rep.seeds, [&](std::uint64_t seed) {
      const auto patterns = sample_nested(ctx, config, seed);
      std::vector<double> row(cells + W);
      for (int w = 0; w < W; ++w) {
        const PcfEstimate est = pcf_hat_grid(patterns[w], rvec, bw[w], kern);
        for (int j = 0; j < nr; ++j) row[w * nr + j] = est.ghat(j);
        row[cells + w] = static_cast<double>(est.pairs_used);
      }
      return row;
    });
    rep.replicate_values = raw.leftCols(cells);
    long long low_pairs = 0;
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
      for (int w = 0; w < W; ++w)
        if (raw(i, cells + w) < 30.0) ++low_pairs;
    rep.summary["low_pair_replicates"] = low_pairs;
    if (low_pairs > 0)
      rep.warnings.push_back("fewer than 30 contributing pairs in " + std::to_string(low_pairs) +
                             " replicate-window combinations");
    const double rho = ctx.model.rho();
    const double R = config.replicates;
    for (int w = 0; w < W; ++w)
      for (int j = 0; j < nr; ++j) {
        ReportCell cell;
        cell.window_index = static_cast<std::size_t>(w);
        cell.window = config.windows[w];
        const double r = config.r[j];
        cell.r = r;
        const auto x = column(rep.replicate_values, w * nr + j);
        const SampleSummary s = summarize(x);
        const double scale = bw[w] * cell.window.volume();
        const double bias = bias_bound(ctx.model, r, r, bw[w], kern).bound;
        cell.set("bandwidth", bw[w]);
        cell.set("mean", s.mean);
        cell.set("sd", s.sd);
        cell.set("mc_se", s.sd / std::sqrt(R));
        cell.set("empirical_variance", s.variance);
        cell.set("scaled_empirical_variance", scale * s.variance);
        cell.set("g0", pcf(ctx.model, r));
        cell.set("bias_bound", bias);
        cell.set("bias_bound_g", bias / (rho * rho));
        cell.set("tau2_printed", tau2_pointwise(ctx.model, r, kern, Tau2Variant::Printed));
        cell.set("tau2_no_sqrt", tau2_pointwise(ctx.model, r, kern, Tau2Variant::NoSqrt));
        cell.set("tau2_kappa_over_rho4", tau2_pointwise(ctx.model, r, kern, Tau2Variant::KappaOverRho4));
        add_shape(cell, empirically_standardized(x));
        rep.cells.push_back(cell);
      }
    return rep;
  });
}

McReport run_ise_clt(const ExperimentConfig& config) {
  return timed([&] {
    if (!(config.r_min > 0.0 && config.r_max > config.r_min))
      throw std::invalid_argument("ise: need 0 < r_min < r_max");
    if (config.ise_grid < 3) throw std::invalid_argument("ise: ise_grid must be at least 3");
    const Context ctx = prepare(config);
    const int d = ctx.model.dimension();
    const KernelModel reference =
        config.reference.empty() ? ctx.model : parse_model_spec(config.reference, d);
    if (reference.dimension() != d) throw std::invalid_argument("ise: reference dimension differs");
    require_valid(reference);
    const SmoothingKernel kern(config.smoothing);
    const int W = static_cast<int>(config.windows.size());
    std::vector<double> bw(W);
    for (int w = 0; w < W; ++w) {
      bw[w] = window_bandwidth(config, ctx.model, config.windows[w]);
      check_reach(config.r_max, bw[w], kern, config.windows[w]);
    }
    const Eigen::VectorXd grid = uniform_grid(config.r_min, config.r_max, config.ise_grid);
    const PcfFunction g_ref = [&reference](double r) { return pcf(reference, r); };
    McReport rep = start_report(Experiment::Ise, config);
    rep.value_name = "ise";
    const Eigen::MatrixXd raw = run_replicates(config, 2 * W, rep.seeds, [&](std::uint64_t seed) {
      const auto patterns = sample_nested(ctx, config, seed);
      std::vector<double> row(2 * W);
      for (int w = 0; w < W; ++w) {
        const PcfEstimate est = pcf_hat_grid(patterns[w], grid, bw[w], kern);
        row[w] = ise_from_estimate(est, reference.rho(), g_ref);
        row[W + w] = static_cast<double>(est.pairs_used);
      }
      return row;
    });
    rep.replicate_values = raw.leftCols(W);
    long long low_pairs = 0;
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
      for (int w = 0; w < W; ++w)
        if (raw(i, W + w) < 30.0) ++low_pairs;
    rep.summary["low_pair_replicates"] = low_pairs;
    if (low_pairs > 0)
      rep.warnings.push_back("fewer than 30 contributing pairs in " + std::to_string(low_pairs) +
                             " replicate-window combinations");
    rep.summary["reference"] = config.reference.empty() ? config.model : config.reference;
    rep.summary["wrong_model_mode"] = !config.reference.empty();
    const double leading = ise_leading_constant(ctx.model, config.r_min, config.r_max, kern);
    const double null_constant = ise_leading_constant(reference, config.r_min, config.r_max, kern);
    const double tau2 = tau2_ise(ctx.model, config.r_min, config.r_max, kern);
    const double R = config.replicates;
    for (int w = 0; w < W; ++w) {
      ReportCell cell;
      cell.window_index = static_cast<std::size_t>(w);
      cell.window = config.windows[w];
      const auto x = column(rep.replicate_values, w);
      const SampleSummary s = summarize(x);
      const double vol = cell.window.volume();
      const double scale = bw[w] * vol;
      const double scaled_se = scale * s.sd / std::sqrt(R);
      cell.set("bandwidth", bw[w]);
      cell.set("mean", s.mean);
      cell.set("sd", s.sd);
      cell.set("empirical_variance", s.variance);
      cell.set("scaled_mean", scale * s.mean);
      cell.set("scaled_mean_se", scaled_se);
      cell.set("leading_constant", leading);
      cell.set("ratio_to_leading", scale * s.mean / leading);
      cell.set("null_constant", null_constant);
      cell.set("separation_se", scaled_se > 0.0 ? (scale * s.mean - null_constant) / scaled_se : 0.0);
      cell.set("tau2_ise", tau2);
      cell.set("scaled_fluctuation_variance", bw[w] * vol * vol * s.variance);
      cell.set("fluctuation_ratio", bw[w] * vol * vol * s.variance / tau2);
      add_shape(cell, empirically_standardized(x));
      rep.cells.push_back(cell);
    }
    return rep;
  });
}

McReport run_experiment(Experiment experiment, const ExperimentConfig& config) {
  switch (experiment) {
    case Experiment::Intensity: return run_intensity_clt(config);
    case Experiment::CumulantDecay: return run_cumulant_decay(config);
    case Experiment::Pcf: return run_pcf_clt(config);
    case Experiment::Ise: return run_ise_clt(config);
  }
  throw std::invalid_argument("unknown experiment");
}

}  // namespace dpplab
