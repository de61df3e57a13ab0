#pragma once

#include "dpplab/kernel_models.hpp"
#include "dpplab/sampler.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpplab {

// Data file contents violate the expected format; message carries the line number.
class MalformedData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvVersionLine = "# dpp-lab v1";

// "family:key=value,..." with family in {gaussian, bessel, poisson, tabulated} and keys
// rho, alpha, d, file. `default_dimension` applies when d is absent. The model is built
// but not validated; call require_valid before use.
KernelModel parse_model_spec(const std::string& spec, int default_dimension = 2);

// "l1,...,ld,u1,...,ud".
Window parse_window(const std::string& text);
std::string window_string(const Window& window);
nlohmann::ordered_json window_json(const Window& window);
Window window_from_json(const nlohmann::ordered_json& j);

// Shortest round-trip decimal form.
std::string format_double(double value);

// Two-column "r,c" table.
std::pair<std::vector<double>, std::vector<double>> read_radial_table(const std::string& path);

void write_pattern_csv(const PointPattern& pattern, const std::string& path);
// Reads points; the window comes from the caller.
PointPattern read_pattern_csv(const std::string& path, const Window& window);

nlohmann::ordered_json pattern_metadata(const PointPattern& pattern, const std::string& model_spec);
// Sidecar path: the CSV path with its extension replaced by ".json".
std::string sidecar_path(const std::string& csv_path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace dpplab
