#ifndef PARTGIBBS_MEASURE_HPP
#define PARTGIBBS_MEASURE_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "partgibbs/weights.hpp"

namespace partgibbs {

using BigInt = boost::multiprecision::cpp_int;

/// Bose: f_k(z) = (1 - z)^{-b_k}.  Fermi: f_k(z) = (1 + z)^{b_k}.
enum class Statistics { Bose, Fermi };

std::string to_string(Statistics kind);
Statistics parse_statistics(const std::string& text);

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr std::int64_t kDefaultHorizonCap = 1'000'000'000;
inline constexpr std::int64_t kDefaultCountBudget = 60;

/// A multiplicative measure mu_x on all partitions: occupation numbers r_k are
/// independent with P(r_k = j) = s_k(j) x^{kj} / f_k(x^k).
class MultiplicativeMeasure {
 public:
  MultiplicativeMeasure(WeightSequence weights, Statistics kind, double x);

  const WeightSequence& weights() const { return weights_; }
  Statistics kind() const { return kind_; }
  double x() const { return x_; }
  double log_x() const { return log_x_; }

  /// log f_k(x^k) for weight b.
  double log_factor(double b, std::int64_t k) const;

  /// Human-readable description, e.g. "bose power:c=1,beta=0 x=0.99".
  std::string describe() const;

 private:
  WeightSequence weights_;
  Statistics kind_;
  double x_;
  double log_x_;
};

/// Sparse occupation map k -> r_k (only r_k >= 1 stored).
class Partition {
 public:
  Partition() = default;

  static Partition from_parts(std::span<const std::int64_t> parts);

  /// Adds r copies of summand k.
  void add(std::int64_t k, std::int64_t r = 1);

  const std::map<std::int64_t, std::int64_t>& occupations() const { return occupations_; }
  std::int64_t occupation(std::int64_t k) const;

  std::int64_t weight() const;
  std::int64_t length() const;
  std::int64_t max() const { return occupations_.empty() ? 0 : occupations_.rbegin()->first; }
  bool empty() const { return occupations_.empty(); }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::map<std::int64_t, std::int64_t> occupations_;
};

/// Weighted partition counts Q(0..N): coefficients of prod_k (1 - z^k)^{-b_k}.
struct CountTable {
  std::string seq;
  std::vector<double> q;
  /// Exact values, filled when all b_k (k <= N) are integers.
  std::vector<BigInt> exact;

  bool is_exact() const { return !exact.empty(); }
};

/// log s_k(j): Bose s_k(j) = Gamma(j + b)/(Gamma(b) j!), Fermi s_k(j) = C(b, j).
double log_occupation_coefficient(Statistics kind, double b, std::int64_t j);

double occupation_pmf(const MultiplicativeMeasure& m, std::int64_t k, std::int64_t j);
double occupation_mean(const MultiplicativeMeasure& m, std::int64_t k);

/// Smallest horizon K at which the certified remainder of sum_{k>K} b_k k^p t(x^k)
/// drops below tol, where t is log f (p = 0) or the mean term (p = 1).
std::int64_t truncation_level(const MultiplicativeMeasure& m, double tol, int p = 0,
                              std::int64_t cap = kDefaultHorizonCap);

double expected_weight(const MultiplicativeMeasure& m, double tol = kDefaultTailTol);

/// L(M) = sum_{k>M} log f_k(x^k), so that P(max <= M) = exp(-L(M)).
double log_tail_product(const MultiplicativeMeasure& m, std::int64_t M,
                        double tol = kDefaultTailTol);

/// Batched L(M) for many levels with one backward pass.
std::vector<double> log_tail_products(const MultiplicativeMeasure& m,
                                      std::span<const std::int64_t> levels,
                                      double tol = kDefaultTailTol);

double max_cdf(const MultiplicativeMeasure& m, std::int64_t M, double tol = kDefaultTailTol);
std::vector<double> max_cdfs(const MultiplicativeMeasure& m, std::span<const std::int64_t> levels,
                             double tol = kDefaultTailTol);

/// Probability that r_{k_i} = 1 for the strictly decreasing levels k_1 > ... > k_d
/// and every other level above k_d is empty.
double exact_top_levels_pmf(const MultiplicativeMeasure& m, std::span<const std::int64_t> levels,
                            double tol = kDefaultTailTol);

CountTable weighted_counts(const WeightSequence& seq, std::int64_t N);
CountTable weighted_counts(const MultiplicativeMeasure& m, std::int64_t N);

/// Counts restricted to parts k <= max_part.
CountTable restricted_counts(const WeightSequence& seq, std::int64_t N, std::int64_t max_part);

/// mu^n{max <= M} = Q_{<=M}(n) / Q(n) in the small canonical ensemble.
double small_canonical_max_cdf(const WeightSequence& seq, std::int64_t n, std::int64_t M,
                               std::int64_t budget = kDefaultCountBudget);

/// Whole law of the maximum on P(n): entry M is mu^n{max <= M}, M = 0..n.
std::vector<double> small_canonical_max_law(const WeightSequence& seq, std::int64_t n,
                                            std::int64_t budget = kDefaultCountBudget);

}  // namespace partgibbs

#endif  // PARTGIBBS_MEASURE_HPP
