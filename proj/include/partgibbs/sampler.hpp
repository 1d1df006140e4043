#ifndef PARTGIBBS_SAMPLER_HPP
#define PARTGIBBS_SAMPLER_HPP

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "partgibbs/measure.hpp"
#include "partgibbs/weights.hpp"

namespace partgibbs {

struct SamplerConfig {
  std::uint64_t seed = 0;
  /// Upper bound on P(max > horizon), the mass discarded by truncation.
  double tail_tol = 1e-9;
  std::int64_t level_cap = 50'000'000;
  /// Rejection attempts allowed per accepted small-canonical sample.
  std::int64_t attempt_cap = 10'000'000;
  int threads = 1;
};

using Rng = std::mt19937_64;

/// Generator for sample `index` of a run seeded with `seed`; independent of
/// the order in which samples are produced.
Rng make_rng(std::uint64_t seed, std::uint64_t index);

/// Calls fn(i) for i in [0, count) on `threads` workers. Each index is handled
/// exactly once; the first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const auto workers = static_cast<std::size_t>(threads) < count ? static_cast<std::size_t>(threads)
                                                                 : count;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Draws partitions from a grand canonical measure level by level, from the
/// horizon K_max downwards. Levels above the horizon are never populated.
class PartitionSampler {
 public:
  /// Horizon chosen so that P(max > K_max) < cfg.tail_tol, unless `horizon` is given.
  PartitionSampler(const MultiplicativeMeasure& m, const SamplerConfig& cfg,
                   std::optional<std::int64_t> horizon = std::nullopt);

  const MultiplicativeMeasure& measure() const { return measure_; }
  std::int64_t horizon() const { return horizon_; }
  /// 1 - P(max <= horizon).
  double truncation_bias() const { return truncation_bias_; }

  Partition sample(Rng& rng) const;

  /// The d largest summands counted with multiplicity, zero padded.
  std::vector<std::int64_t> sample_top(Rng& rng, int d) const;

  /// Visits occupied levels in decreasing order as visit(k, r_k); stops early
  /// when visit returns false.
  void traverse(Rng& rng, const std::function<bool(std::int64_t, std::int64_t)>& visit) const;

 private:
  std::int64_t draw_full(Rng& rng, std::int64_t k) const;
  std::int64_t draw_occupied(Rng& rng, std::int64_t k) const;

  MultiplicativeMeasure measure_;
  std::int64_t horizon_ = 0;
  double truncation_bias_ = 0.0;
  std::vector<double> b_;
  std::vector<double> y_;
  std::vector<double> occupied_;  // P(r_k >= 1)
  std::vector<double> block_max_;
};

Partition sample_partition(const MultiplicativeMeasure& m, const SamplerConfig& cfg);

/// N partitions; sample i uses make_rng(cfg.seed, i).
std::vector<Partition> sample_partitions(const MultiplicativeMeasure& m, const SamplerConfig& cfg,
                                         std::size_t count);

/// Rejection sampler for mu^n: grand canonical draws at the calibrated activity
/// conditioned on weight n.
class SmallCanonicalSampler {
 public:
  SmallCanonicalSampler(const WeightSequence& seq, std::int64_t n, const SamplerConfig& cfg);

  double activity() const { return sampler_.measure().x(); }
  std::int64_t n() const { return n_; }

  /// Returns the accepted partition and the number of attempts it took.
  std::pair<Partition, std::int64_t> sample(Rng& rng) const;

 private:
  std::int64_t n_;
  std::int64_t attempt_cap_;
  PartitionSampler sampler_;
};

Partition sample_small_canonical(const WeightSequence& seq, std::int64_t n,
                                 const SamplerConfig& cfg);

inline constexpr std::int64_t kDefaultEnumerationBudget = 30;

struct WeightedPartition {
  Partition partition;
  double probability;
};

/// All partitions of n with positive mu^n probability prod_k s_k(r_k) / Q(n).
std::vector<WeightedPartition> enumerate_partitions(const WeightSequence& seq, std::int64_t n,
                                                    std::int64_t budget = kDefaultEnumerationBudget);

std::vector<std::int64_t> top_order_statistics(const Partition& p, int d);

}  // namespace partgibbs

#endif  // PARTGIBBS_SAMPLER_HPP
