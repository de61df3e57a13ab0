#include "dpplab/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace dpplab;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dpplab_test_" + name)).string();
}

void write_raw(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("window text forms") {
  const Window w = parse_window("0,1,2,3");
  CHECK(w.dimension() == 2);
  CHECK(w.lower()(1) == 1.0);
  CHECK(w.upper()(0) == 2.0);
  CHECK(parse_window(window_string(w)).lower() == w.lower());
  CHECK(window_from_json(window_json(w)).upper() == w.upper());
  CHECK(window_from_json(nlohmann::ordered_json("0,1,2,3")).volume() == 4.0);
  CHECK(window_from_json(nlohmann::ordered_json::array({0, 0, 1, 1})).volume() == 1.0);
  CHECK_THROWS(parse_window("0,1,2"));
  CHECK_THROWS(parse_window("0,x"));
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 100.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("pattern csv round trip") {
  PointPattern p;
  p.window = Window::cube(2, 1.0);
  p.points.resize(3, 2);
  p.points << 0.1, 0.2, 1.0 / 3.0, 0.9, 0.0, 1.0;
  const std::string path = temp_path("pattern.csv");
  write_pattern_csv(p, path);
  const auto q = read_pattern_csv(path, p.window);
  CHECK(q.points == p.points);
  CHECK(read_text(path).rfind(kCsvVersionLine, 0) == 0);
  CHECK(sidecar_path(path) == temp_path("pattern.json"));
  CHECK(sidecar_path("dir.v2/pts") == "dir.v2/pts.json");
  std::filesystem::remove(path);
}

TEST_CASE("malformed pattern files") {
  const Window w = Window::cube(2, 1.0);
  const std::string path = temp_path("bad.csv");
  write_raw(path, "0.1,0.2\n0.3,0.4\n");
  try {
    read_pattern_csv(path, w);
    CHECK(false);
  } catch (const MalformedData& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  write_raw(path, "# dpp-lab v1\nx,y\n0.1,0.2\n0.3\n");
  try {
    read_pattern_csv(path, w);
    CHECK(false);
  } catch (const MalformedData& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  write_raw(path, "x,y\n1.5,0.2\n");
  CHECK_THROWS_AS(read_pattern_csv(path, w), MalformedData);
  write_raw(path, "");
  CHECK_THROWS_AS(read_pattern_csv(path, w), MalformedData);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_pattern_csv(temp_path("absent.csv"), w), IoFailure);
}

TEST_CASE("radial tables") {
  const std::string path = temp_path("table.csv");
  write_raw(path, "r,c\n0,1\n0.5,0.25\n");
  const auto [r, c] = read_radial_table(path);
  CHECK(r.size() == 2);
  CHECK(c[1] == 0.25);
  write_raw(path, "radius,value\n0,1\n");
  CHECK_THROWS_AS(read_radial_table(path), MalformedData);
  std::filesystem::remove(path);
}
