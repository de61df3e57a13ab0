#include "dpplab/cumulant_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace dpplab {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Stirling table overflow");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Stirling table overflow");
  return r;
}

}  // namespace

StirlingTable stirling_tables(int K) {
  if (K < 0) throw std::invalid_argument("stirling_tables: K must be non-negative");
  if (K > kStirlingMaxOrder)
    throw std::overflow_error("stirling_tables: exact integer tables are limited to K <= 20");
  StirlingTable t;
  t.max_order = K;
  const std::size_t w = K + 1;
  t.first_kind.assign(w * w, 0);
  t.second_kind.assign(w * w, 0);
  auto at = [w](std::vector<std::int64_t>& v, int j, int k) -> std::int64_t& { return v[j * w + k]; };
  at(t.first_kind, 0, 0) = 1;
  at(t.second_kind, 0, 0) = 1;
  for (int k = 1; k <= K; ++k)
    for (int j = 1; j <= k; ++j) {
      at(t.first_kind, j, k) = checked_add(at(t.first_kind, j - 1, k - 1),
                                           checked_mul(k - 1, at(t.first_kind, j, k - 1)));
      at(t.second_kind, j, k) = checked_add(at(t.second_kind, j - 1, k - 1),
                                            checked_mul(j, at(t.second_kind, j, k - 1)));
    }
  return t;
}

std::vector<SetPartition> enumerate_partitions(int n) {
  if (n < 1 || n > kPartitionMaxOrder)
    throw std::invalid_argument("enumerate_partitions: n must lie in 1..8");
  std::vector<SetPartition> all;
  SetPartition current;
  std::function<void(int)> place = [&](int element) {
    if (element > n) {
      all.push_back(current);
      return;
    }
    for (std::size_t b = 0; b < current.size(); ++b) {
      current[b].push_back(element);
      place(element + 1);
      current[b].pop_back();
    }
    current.push_back({element});
    place(element + 1);
    current.pop_back();
  };
  place(1);
  std::stable_sort(all.begin(), all.end(),
                   [](const SetPartition& a, const SetPartition& b) { return a.size() < b.size(); });
  return all;
}

std::vector<std::int64_t> partition_counts_by_blocks(int n) {
  std::vector<std::int64_t> counts(n + 1, 0);
  for (const auto& p : enumerate_partitions(n)) ++counts[p.size()];
  return counts;
}

std::vector<double> empirical_cumulants(const std::vector<double>& samples, int max_order) {
  if (max_order < 2 || max_order > 4)
    throw std::invalid_argument("empirical_cumulants: max_order must be 2, 3 or 4");
  const std::size_t size = samples.size();
  if (size < static_cast<std::size_t>(max_order) + 1)
    throw std::invalid_argument("empirical_cumulants: need at least max_order + 1 samples");
  const double n = static_cast<double>(size);
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  std::vector<double> out(max_order, 0.0);
  out[0] = mean;
  bool constant = true;
  for (double x : samples)
    if (x != samples.front()) constant = false;
  if (constant) {
    out[0] = samples.front();
    return out;
  }
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double c = x - mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out[1] = n / (n - 1.0) * m2;
  if (max_order >= 3) out[2] = n * n / ((n - 1.0) * (n - 2.0)) * m3;
  if (max_order >= 4)
    out[3] = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) /
             ((n - 1.0) * (n - 2.0) * (n - 3.0));
  return out;
}

ShapeStats shape_statistics(const std::vector<double>& samples) {
  const auto k = empirical_cumulants(samples, 4);
  ShapeStats s;
  if (k[1] > 0.0) {
    s.skewness = k[2] / std::pow(k[1], 1.5);
    s.excess_kurtosis = k[3] / (k[1] * k[1]);
  }
  return s;
}

}  // namespace dpplab
