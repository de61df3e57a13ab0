#include "dpplab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dpplab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool parse_number(const std::string& text, double& value) {
  if (text.empty()) return false;
  const char* first = text.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, text.data() + text.size(), value);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

double number_or_throw(const std::string& text, const std::string& what) {
  double v = 0.0;
  if (!parse_number(text, v)) throw std::invalid_argument("cannot parse " + what + " '" + text + "'");
  return v;
}

std::string axis_name(int a) {
  static const char* names[] = {"x", "y", "z"};
  return a < 3 ? names[a] : "x" + std::to_string(a + 1);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

KernelModel parse_model_spec(const std::string& spec, int default_dimension) {
  const auto colon = spec.find(':');
  const std::string family = trim(spec.substr(0, colon));
  double rho = -1.0, alpha = -1.0;
  int d = default_dimension;
  std::string file;
  if (colon != std::string::npos) {
    for (const auto& item : split(spec.substr(colon + 1), ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("model spec: expected key=value, got '" + item + "'");
      const std::string key = trim(item.substr(0, eq)), val = trim(item.substr(eq + 1));
      if (key == "rho") {
        rho = number_or_throw(val, "rho");
      } else if (key == "alpha") {
        alpha = number_or_throw(val, "alpha");
      } else if (key == "d") {
        const double dv = number_or_throw(val, "d");
        if (dv != std::floor(dv) || dv < 1) throw std::invalid_argument("model spec: d must be a positive integer");
        d = static_cast<int>(dv);
      } else if (key == "file") {
        file = val;
      } else {
        throw std::invalid_argument("model spec: unknown key '" + key + "'");
      }
    }
  }
  if (rho <= 0.0) throw std::invalid_argument("model spec: rho=<positive> is required");
  if (family == "gaussian") {
    if (alpha <= 0.0) throw std::invalid_argument("model spec: gaussian needs alpha=<positive>");
    return KernelModel::gaussian(d, rho, alpha);
  }
  if (family == "bessel") return KernelModel::bessel(d, rho);
  if (family == "poisson") return KernelModel::poisson(d, rho);
  if (family == "tabulated") {
    if (file.empty()) throw std::invalid_argument("model spec: tabulated needs file=<csv>");
    auto [r, c] = read_radial_table(file);
    return KernelModel::tabulated(d, rho, std::move(r), std::move(c));
  }
  throw std::invalid_argument("model spec: unknown family '" + family + "'");
}

Window parse_window(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.empty() || parts.size() % 2)
    throw std::invalid_argument("window: expected l1,...,ld,u1,...,ud");
  const int d = static_cast<int>(parts.size() / 2);
  Eigen::VectorXd lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo(a) = number_or_throw(parts[a], "window coordinate");
    hi(a) = number_or_throw(parts[a + d], "window coordinate");
  }
  return Window(lo, hi);
}

std::string window_string(const Window& window) {
  std::string s;
  const int d = window.dimension();
  for (int a = 0; a < d; ++a) s += format_double(window.lower()(a)) + ",";
  for (int a = 0; a < d; ++a) s += format_double(window.upper()(a)) + (a + 1 < d ? "," : "");
  return s;
}

nlohmann::ordered_json window_json(const Window& window) {
  nlohmann::ordered_json j;
  j["lower"] = std::vector<double>(window.lower().data(), window.lower().data() + window.dimension());
  j["upper"] = std::vector<double>(window.upper().data(), window.upper().data() + window.dimension());
  return j;
}

Window window_from_json(const nlohmann::ordered_json& j) {
  if (j.is_string()) return parse_window(j.get<std::string>());
  if (j.is_array()) {
    const auto v = j.get<std::vector<double>>();
    if (v.empty() || v.size() % 2) throw std::invalid_argument("window: expected an even number of coordinates");
    const int d = static_cast<int>(v.size() / 2);
    return Window(Eigen::Map<const Eigen::VectorXd>(v.data(), d), Eigen::Map<const Eigen::VectorXd>(v.data() + d, d));
  }
  const auto lo = j.at("lower").get<std::vector<double>>();
  const auto hi = j.at("upper").get<std::vector<double>>();
  if (lo.size() != hi.size()) throw std::invalid_argument("window: lower/upper size mismatch");
  return Window(Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size()),
                Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size()));
}

std::pair<std::vector<double>, std::vector<double>> read_radial_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<double> r, c;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header) {
      if (t != "r,c") throw MalformedData(path + ": line " + std::to_string(lineno) + ": expected header 'r,c'");
      header = true;
      continue;
    }
    const auto cols = split(t, ',');
    double rv = 0.0, cv = 0.0;
    if (cols.size() != 2 || !parse_number(cols[0], rv) || !parse_number(cols[1], cv))
      throw MalformedData(path + ": line " + std::to_string(lineno) + ": expected two numbers");
    r.push_back(rv);
    c.push_back(cv);
  }
  if (!header) throw MalformedData(path + ": line " + std::to_string(lineno + 1) + ": missing header 'r,c'");
  return {r, c};
}

void write_pattern_csv(const PointPattern& pattern, const std::string& path) {
  std::ostringstream os;
  const int d = pattern.window.dimension();
  os << kCsvVersionLine << "\n";
  for (int a = 0; a < d; ++a) os << axis_name(a) << (a + 1 < d ? "," : "\n");
  for (Eigen::Index i = 0; i < pattern.size(); ++i)
    for (int a = 0; a < d; ++a) os << format_double(pattern.points(i, a)) << (a + 1 < d ? "," : "\n");
  write_text(path, os.str());
}

PointPattern read_pattern_csv(const std::string& path, const Window& window) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  const int d = window.dimension();
  std::string expected;
  for (int a = 0; a < d; ++a) expected += axis_name(a) + (a + 1 < d ? "," : "");
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = path + ": line " + std::to_string(lineno) + ": ";
    if (!header) {
      if (t != expected) throw MalformedData(where + "expected header '" + expected + "'");
      header = true;
      continue;
    }
    const auto cols = split(t, ',');
    if (static_cast<int>(cols.size()) != d)
      throw MalformedData(where + "expected " + std::to_string(d) + " columns");
    Eigen::VectorXd p(d);
    for (int a = 0; a < d; ++a)
      if (!parse_number(cols[a], p(a))) throw MalformedData(where + "cannot parse '" + cols[a] + "'");
    if (!window.contains(p)) throw MalformedData(where + "point outside the window");
    for (int a = 0; a < d; ++a) flat.push_back(p(a));
  }
  if (!header) throw MalformedData(path + ": line " + std::to_string(lineno + 1) + ": missing header '" + expected + "'");
  PointPattern out;
  out.window = window;
  const Eigen::Index n = static_cast<Eigen::Index>(flat.size()) / d;
  out.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), n, d);
  out.provenance.generator = "file";
  return out;
}

nlohmann::ordered_json pattern_metadata(const PointPattern& pattern, const std::string& model_spec) {
  const auto& p = pattern.provenance;
  nlohmann::ordered_json j;
  j["format"] = "dpp-lab v1";
  j["model"] = model_spec;
  j["model_label"] = p.model_label;
  j["window"] = window_json(pattern.window);
  j["seed"] = p.seed;
  j["generator"] = p.generator;
  j["points"] = pattern.size();
  j["margin_factor"] = p.margin_factor;
  j["torus_sides"] = p.torus_sides;
  j["modes_retained"] = p.modes_retained;
  j["modes_selected"] = p.modes_selected;
  j["envelope_overflows"] = p.envelope_overflows;
  j["proposals"] = p.proposals;
  return j;
}

std::string sidecar_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return csv_path.substr(0, dot) + ".json";
  return csv_path + ".json";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoFailure("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace dpplab
