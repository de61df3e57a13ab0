#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dpplab {

// Unsigned Stirling numbers of the first kind D(j, k) and second kind Delta(j, k), 1 <= j, k <= K,
// with x^[k] = sum_j (-1)^(k-j) D(j,k) x^j and x^k = sum_j Delta(j,k) x^[j].
struct StirlingTable {
  int max_order = 0;
  std::vector<std::int64_t> first_kind;   // row-major (K+1) x (K+1), index 0 unused
  std::vector<std::int64_t> second_kind;

  std::int64_t D(int j, int k) const { return first_kind[index(j, k)]; }
  std::int64_t Delta(int j, int k) const { return second_kind[index(j, k)]; }

 private:
  std::size_t index(int j, int k) const {
    if (j < 0 || k < 0 || j > max_order || k > max_order)
      throw std::out_of_range("StirlingTable: index beyond max_order");
    return static_cast<std::size_t>(j) * (max_order + 1) + k;
  }
};

inline constexpr int kStirlingMaxOrder = 20;
inline constexpr int kPartitionMaxOrder = 8;

// Throws std::overflow_error for K > 20.
StirlingTable stirling_tables(int K);

// Element 0 holds order 1.
template <class Scalar>
std::vector<Scalar> fact_cumulants_from_cumulants(const std::vector<Scalar>& gamma) {
  const int K = static_cast<int>(gamma.size());
  const auto table = stirling_tables(K);
  std::vector<Scalar> out(K, Scalar(0));
  for (int k = 1; k <= K; ++k)
    for (int j = 1; j <= k; ++j) {
      const Scalar term = Scalar(table.D(j, k)) * gamma[j - 1];
      if ((k - j) % 2) out[k - 1] -= term;
      else out[k - 1] += term;
    }
  return out;
}

template <class Scalar>
std::vector<Scalar> cumulants_from_fact_cumulants(const std::vector<Scalar>& gamma_fact) {
  const int K = static_cast<int>(gamma_fact.size());
  const auto table = stirling_tables(K);
  std::vector<Scalar> out(K, Scalar(0));
  for (int k = 1; k <= K; ++k)
    for (int j = 1; j <= k; ++j) out[k - 1] += Scalar(table.Delta(j, k)) * gamma_fact[j - 1];
  return out;
}

// Plain moments E[N^k] from factorial moments E[N^[k]].
template <class Scalar>
std::vector<Scalar> moments_from_fact_moments(const std::vector<Scalar>& alpha) {
  return cumulants_from_fact_cumulants(alpha);
}

// Cumulants from raw moments by the recursion kappa_n = mu_n - sum C(n-1, m-1) kappa_m mu_{n-m}.
template <class Scalar>
std::vector<Scalar> cumulants_from_moments(const std::vector<Scalar>& mu) {
  const int K = static_cast<int>(mu.size());
  std::vector<Scalar> kappa(K, Scalar(0));
  for (int n = 1; n <= K; ++n) {
    Scalar acc = mu[n - 1];
    std::int64_t binom = 1;  // C(n-1, m-1)
    for (int m = 1; m < n; ++m) {
      acc -= Scalar(binom) * kappa[m - 1] * mu[n - m - 1];
      binom = binom * (n - m) / m;
    }
    kappa[n - 1] = acc;
  }
  return kappa;
}

using SetPartition = std::vector<std::vector<int>>;

// All set partitions of {1..n}, ordered by block count; blocks hold sorted elements.
std::vector<SetPartition> enumerate_partitions(int n);
// Number of partitions of {1..n} per block count, element j for j blocks.
std::vector<std::int64_t> partition_counts_by_blocks(int n);

// Partition-sum factorial cumulants from factorial moment masses on the diagonal, K <= 4.
template <class Scalar>
std::vector<Scalar> fact_cumulants_from_fact_moments(const std::vector<Scalar>& alpha) {
  const int K = static_cast<int>(alpha.size());
  if (K > 4) throw std::invalid_argument("fact_cumulants_from_fact_moments: orders above 4 unsupported");
  std::vector<Scalar> out(K, Scalar(0));
  for (int k = 1; k <= K; ++k) {
    for (const auto& part : enumerate_partitions(k)) {
      const int j = static_cast<int>(part.size());
      std::int64_t coef = 1;
      for (int i = 2; i < j; ++i) coef *= i;
      Scalar prod(1);
      for (const auto& block : part) prod *= alpha[block.size() - 1];
      if ((j - 1) % 2) out[k - 1] -= Scalar(coef) * prod;
      else out[k - 1] += Scalar(coef) * prod;
    }
  }
  return out;
}

// Unbiased k-statistics: element 0 is the mean, then k2..k_max_order.
std::vector<double> empirical_cumulants(const std::vector<double>& samples, int max_order);

// Sample skewness and excess kurtosis from the k-statistics.
struct ShapeStats {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};
ShapeStats shape_statistics(const std::vector<double>& samples);

}  // namespace dpplab
