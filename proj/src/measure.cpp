#include "partgibbs/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "partgibbs/errors.hpp"

namespace partgibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// log of the certified remainder bound for sum_{k>K} b_k k^p t(x^k).
double log_remainder_bound(const MultiplicativeMeasure& m, std::int64_t K, int p) {
  const double maj = m.weights().log_tail_majorant(K, static_cast<double>(p), m.log_x());
  if (m.kind() == Statistics::Fermi) return maj;
  // -log(1-y) <= y/(1-y) and y/(1-y) <= y/(1-x^{K+1}) for k > K.
  const double y1 = std::exp((static_cast<double>(K) + 1.0) * m.log_x());
  return maj - std::log1p(-y1);
}

double occupation_mean_term(Statistics kind, double b, double y) {
  return kind == Statistics::Bose ? b * y / (1.0 - y) : b * y / (1.0 + y);
}

template <class T>
std::vector<T> counts_by_recurrence(const std::vector<T>& b, std::int64_t N,
                                    std::int64_t max_part) {
  const auto n_max = static_cast<std::size_t>(N);
  const auto top = static_cast<std::size_t>(std::min(N, max_part));
  std::vector<T> sigma(n_max + 1, T(0));
  for (std::size_t k = 1; k <= top; ++k) {
    if (b[k] == T(0)) continue;
    const T term = T(static_cast<long long>(k)) * b[k];
    for (std::size_t mm = k; mm <= n_max; mm += k) sigma[mm] += term;
  }
  std::vector<T> q(n_max + 1, T(0));
  q[0] = T(1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    T acc(0);
    for (std::size_t mm = 1; mm <= n; ++mm) {
      if (sigma[mm] != T(0)) acc += sigma[mm] * q[n - mm];
    }
    if constexpr (std::is_same_v<T, BigInt>) {
      BigInt quotient, remainder;
      boost::multiprecision::divide_qr(acc, BigInt(static_cast<long long>(n)), quotient,
                                       remainder);
      if (remainder != 0) {
        throw std::logic_error("weighted count recurrence produced a non-integer");
      }
      q[n] = std::move(quotient);
    } else {
      q[n] = acc / static_cast<double>(n);
    }
  }
  return q;
}

double big_ratio(const BigInt& num, const BigInt& den) {
  return static_cast<double>(boost::multiprecision::cpp_rational(num, den));
}

}  // namespace

std::string to_string(Statistics kind) { return kind == Statistics::Bose ? "bose" : "fermi"; }

Statistics parse_statistics(const std::string& text) {
  if (text == "bose") return Statistics::Bose;
  if (text == "fermi") return Statistics::Fermi;
  throw ValidationError(fmt::format("unknown statistics kind '{}' (bose|fermi)", text));
}

MultiplicativeMeasure::MultiplicativeMeasure(WeightSequence weights, Statistics kind, double x)
    : weights_(std::move(weights)), kind_(kind), x_(x), log_x_(std::log(x)) {
  if (!(x > 0.0 && x < 1.0)) {
    throw ValidationError(fmt::format("activity x must lie in (0,1), got {}", x));
  }
}

double MultiplicativeMeasure::log_factor(double b, std::int64_t k) const {
  if (b == 0.0) return 0.0;
  const double y = std::exp(static_cast<double>(k) * log_x_);
  return kind_ == Statistics::Bose ? -b * std::log1p(-y) : b * std::log1p(y);
}

std::string MultiplicativeMeasure::describe() const {
  return fmt::format("{} {} x={}", to_string(kind_), weights_.spec(), x_);
}

Partition Partition::from_parts(std::span<const std::int64_t> parts) {
  Partition p;
  for (auto k : parts) p.add(k, 1);
  return p;
}

void Partition::add(std::int64_t k, std::int64_t r) {
  if (k < 1) throw ValidationError(fmt::format("partition summands must be >= 1, got {}", k));
  if (r < 0) throw ValidationError("occupation numbers are nonnegative");
  if (r == 0) return;
  occupations_[k] += r;
}

std::int64_t Partition::occupation(std::int64_t k) const {
  auto it = occupations_.find(k);
  return it == occupations_.end() ? 0 : it->second;
}

std::int64_t Partition::weight() const {
  std::int64_t w = 0;
  for (const auto& [k, r] : occupations_) w += k * r;
  return w;
}

std::int64_t Partition::length() const {
  std::int64_t len = 0;
  for (const auto& [k, r] : occupations_) len += r;
  return len;
}

double log_occupation_coefficient(Statistics kind, double b, std::int64_t j) {
  if (j < 0) return -kInf;
  if (j == 0) return 0.0;
  const auto jj = static_cast<double>(j);
  if (kind == Statistics::Bose) {
    if (b == 0.0) return -kInf;
    return std::lgamma(jj + b) - std::lgamma(b) - std::lgamma(jj + 1.0);
  }
  if (b != std::floor(b)) {
    throw ValidationError(fmt::format("Fermi statistics needs integer b_k, got {}", b));
  }
  if (jj > b) return -kInf;
  return std::lgamma(b + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(b - jj + 1.0);
}

double occupation_pmf(const MultiplicativeMeasure& m, std::int64_t k, std::int64_t j) {
  if (k < 1) throw ValidationError(fmt::format("level must be >= 1, got {}", k));
  const double b = m.weights().at(k);
  if (m.kind() == Statistics::Fermi && b != std::floor(b)) {
    throw ValidationError(fmt::format("Fermi statistics needs integer b_{}, got {}", k, b));
  }
  if (j < 0) return 0.0;
  const double log_s = log_occupation_coefficient(m.kind(), b, j);
  if (log_s == -kInf) return 0.0;
  return std::exp(log_s + static_cast<double>(j * k) * m.log_x() - m.log_factor(b, k));
}

double occupation_mean(const MultiplicativeMeasure& m, std::int64_t k) {
  if (k < 1) throw ValidationError(fmt::format("level must be >= 1, got {}", k));
  const double b = m.weights().at(k);
  if (b == 0.0) return 0.0;
  return occupation_mean_term(m.kind(), b, std::exp(static_cast<double>(k) * m.log_x()));
}

std::int64_t truncation_level(const MultiplicativeMeasure& m, double tol, int p,
                              std::int64_t cap) {
  if (!(tol > 0.0)) throw ValidationError("truncation tolerance must be positive");
  const double log_tol = std::log(tol);
  auto ok = [&](std::int64_t K) { return log_remainder_bound(m, K, p) < log_tol; };
  std::int64_t hi = 16;
  while (!ok(hi)) {
    if (hi > cap) {
      throw ResourceError(fmt::format("truncation horizon for {} exceeds cap {} at tol {}",
                                      m.describe(), cap, tol));
    }
    hi *= 2;
  }
  std::int64_t lo = hi / 2;
  if (ok(lo)) return lo;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double expected_weight(const MultiplicativeMeasure& m, double tol) {
  const std::int64_t K = truncation_level(m, tol, 1);
  const auto b = m.weights().values(K);
  CompensatedSum sum;
  for (std::int64_t k = K; k >= 1; --k) {
    const double bk = b[static_cast<std::size_t>(k)];
    if (bk == 0.0) continue;
    const double y = std::exp(static_cast<double>(k) * m.log_x());
    sum.add(static_cast<double>(k) * occupation_mean_term(m.kind(), bk, y));
  }
  return sum.value();
}

std::vector<double> log_tail_products(const MultiplicativeMeasure& m,
                                      std::span<const std::int64_t> levels, double tol) {
  std::vector<double> out(levels.size(), 0.0);
  if (levels.empty()) return out;
  const std::int64_t K = truncation_level(m, tol, 0);

  std::vector<std::size_t> order(levels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return levels[a] > levels[b]; });

  // Only levels in (lowest requested, K] contribute to any requested value.
  const std::int64_t lowest = std::max<std::int64_t>(levels[order.back()], 0);
  if (lowest >= K) return out;
  const auto b = m.weights().values(K);

  CompensatedSum sum;
  std::int64_t k = K;
  for (std::size_t idx : order) {
    const std::int64_t target = std::max<std::int64_t>(levels[idx], 0);
    for (; k > target; --k) {
      const double bk = b[static_cast<std::size_t>(k)];
      if (bk != 0.0) sum.add(m.log_factor(bk, k));
    }
    out[idx] = levels[idx] < 0 ? kInf : sum.value();
  }
  return out;
}

double log_tail_product(const MultiplicativeMeasure& m, std::int64_t M, double tol) {
  const std::int64_t level[] = {M};
  return log_tail_products(m, level, tol).front();
}

std::vector<double> max_cdfs(const MultiplicativeMeasure& m, std::span<const std::int64_t> levels,
                             double tol) {
  auto logs = log_tail_products(m, levels, tol);
  for (auto& v : logs) v = std::exp(-v);
  return logs;
}

double max_cdf(const MultiplicativeMeasure& m, std::int64_t M, double tol) {
  return std::exp(-log_tail_product(m, M, tol));
}

double exact_top_levels_pmf(const MultiplicativeMeasure& m, std::span<const std::int64_t> levels,
                            double tol) {
  if (levels.empty()) throw ValidationError("top-level event needs at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw ValidationError("levels must be positive");
    if (i > 0 && levels[i] >= levels[i - 1]) {
      throw ValidationError("levels must be strictly decreasing");
    }
  }
  double log_p = 0.0;
  for (auto k : levels) {
    const double b = m.weights().at(k);
    if (b == 0.0) return 0.0;
    if (m.kind() == Statistics::Fermi && b != std::floor(b)) {
      throw ValidationError(fmt::format("Fermi statistics needs integer b_{}, got {}", k, b));
    }
    log_p += std::log(b) + static_cast<double>(k) * m.log_x();
  }
  const std::int64_t bottom = levels.back();
  log_p -= m.log_factor(m.weights().at(bottom), bottom);
  log_p -= log_tail_product(m, bottom, tol);
  return std::exp(log_p);
}

CountTable restricted_counts(const WeightSequence& seq, std::int64_t N, std::int64_t max_part) {
  if (N < 0) throw ValidationError(fmt::format("count table size must be >= 0, got {}", N));
  CountTable table;
  table.seq = seq.spec();
  const auto b = seq.values(N);
  if (seq.integral_up_to(N)) {
    std::vector<BigInt> bi(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) bi[k] = BigInt(static_cast<long long>(b[k]));
    table.exact = counts_by_recurrence(bi, N, max_part);
    table.q.reserve(table.exact.size());
    for (const auto& v : table.exact) table.q.push_back(static_cast<double>(v));
  } else {
    table.q = counts_by_recurrence(b, N, max_part);
  }
  return table;
}

CountTable weighted_counts(const WeightSequence& seq, std::int64_t N) {
  return restricted_counts(seq, N, N);
}

CountTable weighted_counts(const MultiplicativeMeasure& m, std::int64_t N) {
  if (m.kind() != Statistics::Bose) {
    throw ValidationError("weighted counts are implemented for Bose statistics only");
  }
  return weighted_counts(m.weights(), N);
}

std::vector<double> small_canonical_max_law(const WeightSequence& seq, std::int64_t n,
                                            std::int64_t budget) {
  if (n < 0) throw ValidationError("n must be >= 0");
  if (n > budget) {
    throw ResourceError(fmt::format("n = {} exceeds the small-canonical budget {}", n, budget));
  }
  const auto full = weighted_counts(seq, n);
  const auto idx = static_cast<std::size_t>(n);
  if (full.q[idx] == 0.0) {
    throw ValidationError(fmt::format("Q({}) = 0 for {}: P(n) carries no mass", n, seq.spec()));
  }
  std::vector<double> law(idx + 1, 1.0);
  for (std::int64_t M = 0; M < n; ++M) {
    const auto part = restricted_counts(seq, n, M);
    law[static_cast<std::size_t>(M)] = full.is_exact()
                                           ? big_ratio(part.exact[idx], full.exact[idx])
                                           : part.q[idx] / full.q[idx];
  }
  return law;
}

double small_canonical_max_cdf(const WeightSequence& seq, std::int64_t n, std::int64_t M,
                               std::int64_t budget) {
  if (n < 0) throw ValidationError("n must be >= 0");
  if (n > budget) {
    throw ResourceError(fmt::format("n = {} exceeds the small-canonical budget {}", n, budget));
  }
  const auto full = weighted_counts(seq, n);
  const auto idx = static_cast<std::size_t>(n);
  if (full.q[idx] == 0.0) {
    throw ValidationError(fmt::format("Q({}) = 0 for {}: P(n) carries no mass", n, seq.spec()));
  }
  if (M >= n) return 1.0;
  if (M < 0) return 0.0;
  const auto part = restricted_counts(seq, n, M);
  return full.is_exact() ? big_ratio(part.exact[idx], full.exact[idx])
                         : part.q[idx] / full.q[idx];
}

}  // namespace partgibbs
