#include "partgibbs/sampler.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "partgibbs/asymptotics.hpp"
#include "partgibbs/errors.hpp"

namespace partgibbs {

namespace {

constexpr std::int64_t kBlock = 64;
// Blocks whose largest P(r_k >= 1) is below this are sampled by skipping.
constexpr double kSparseThreshold = 0.1;

// Uniform on [0, 1).
double uniform01(Rng& rng) {
  const double u = std::generate_canonical<double, 64>(rng);
  return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

// Uniform on (0, 1].
double uniform_open01(Rng& rng) { return 1.0 - uniform01(rng); }

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

PartitionSampler::PartitionSampler(const MultiplicativeMeasure& m, const SamplerConfig& cfg,
                                   std::optional<std::int64_t> horizon)
    : measure_(m) {
  if (!(cfg.tail_tol > 0.0 && cfg.tail_tol < 1.0)) {
    throw ValidationError(fmt::format("tail_tol must lie in (0,1), got {}", cfg.tail_tol));
  }
  if (horizon) {
    if (*horizon < 0) throw ValidationError("sampler horizon must be >= 0");
    horizon_ = *horizon;
    truncation_bias_ = -std::expm1(-log_tail_product(m, horizon_));
  } else {
    // Smallest K with L(K) < -log(1 - tail_tol); L is summed downwards from a
    // horizon whose own remainder is charged against the threshold.
    const double remainder = 1e-3 * cfg.tail_tol;
    const double threshold = -std::log1p(-cfg.tail_tol) - remainder;
    const std::int64_t top = truncation_level(m, remainder, 0, cfg.level_cap * 4);
    const auto b = m.weights().values(top);
    double sum = 0.0;  // L(k) on entry to iteration k
    std::int64_t K = 0;
    for (std::int64_t k = top; k >= 1; --k) {
      const double bk = b[static_cast<std::size_t>(k)];
      if (bk != 0.0) sum += m.log_factor(bk, k);
      if (sum >= threshold) {
        K = k;
        break;
      }
    }
    horizon_ = K;
    truncation_bias_ = -std::expm1(-log_tail_product(m, horizon_));
  }
  if (horizon_ > cfg.level_cap) {
    throw ResourceError(fmt::format("sampler horizon {} for {} exceeds level cap {}", horizon_,
                                    m.describe(), cfg.level_cap));
  }

  b_ = m.weights().values(horizon_);
  const auto size = static_cast<std::size_t>(horizon_) + 1;
  y_.assign(size, 0.0);
  occupied_.assign(size, 0.0);
  block_max_.assign(static_cast<std::size_t>((horizon_ + kBlock - 1) / kBlock) + 1, 0.0);
  for (std::int64_t k = 1; k <= horizon_; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double b = b_[i];
    if (m.kind() == Statistics::Fermi && b != std::floor(b)) {
      throw ValidationError(fmt::format("Fermi statistics needs integer b_{}, got {}", k, b));
    }
    y_[i] = std::exp(static_cast<double>(k) * m.log_x());
    if (b == 0.0) continue;
    occupied_[i] = -std::expm1(-m.log_factor(b, k));
    auto& block = block_max_[static_cast<std::size_t>((k - 1) / kBlock)];
    block = std::max(block, occupied_[i]);
  }
}

std::int64_t PartitionSampler::draw_full(Rng& rng, std::int64_t k) const {
  const auto i = static_cast<std::size_t>(k);
  const double b = b_[i];
  const double y = y_[i];
  if (b == 0.0) return 0;
  if (measure_.kind() == Statistics::Fermi) {
    std::binomial_distribution<std::int64_t> binomial(static_cast<std::int64_t>(b), y / (1.0 + y));
    return binomial(rng);
  }
  if (b == 1.0) {
    // Geometric: P(r >= j) = y^j.
    return static_cast<std::int64_t>(std::floor(std::log(uniform_open01(rng)) / std::log(y)));
  }
  std::gamma_distribution<double> gamma(b, y / (1.0 - y));
  const double rate = gamma(rng);
  if (!(rate > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> poisson(rate);
  return poisson(rng);
}

std::int64_t PartitionSampler::draw_occupied(Rng& rng, std::int64_t k) const {
  const auto i = static_cast<std::size_t>(k);
  const double b = b_[i];
  const double y = y_[i];
  const double target = uniform01(rng) * occupied_[i];
  double pmf = 0.0;
  double ratio_scale = 0.0;
  if (measure_.kind() == Statistics::Bose) {
    pmf = b * y * std::exp(b * std::log1p(-y));
    ratio_scale = y;
  } else {
    const double p = y / (1.0 + y);
    pmf = b * p * std::exp((b - 1.0) * std::log1p(-p));
    ratio_scale = p / (1.0 - p);
  }
  double cumulative = pmf;
  std::int64_t j = 1;
  while (cumulative < target) {
    const double jj = static_cast<double>(j);
    if (measure_.kind() == Statistics::Bose) {
      pmf *= (jj + b) / (jj + 1.0) * ratio_scale;
    } else {
      if (jj >= b) break;
      pmf *= (b - jj) / (jj + 1.0) * ratio_scale;
    }
    if (pmf == 0.0) break;
    cumulative += pmf;
    ++j;
  }
  return j;
}

void PartitionSampler::traverse(Rng& rng,
                                const std::function<bool(std::int64_t, std::int64_t)>& visit) const {
  if (horizon_ < 1) return;
  for (std::int64_t block = (horizon_ - 1) / kBlock; block >= 0; --block) {
    const std::int64_t lo = block * kBlock + 1;
    const std::int64_t hi = std::min(horizon_, lo + kBlock - 1);
    const double qbar = block_max_[static_cast<std::size_t>(block)];
    if (qbar == 0.0) continue;
    if (qbar > kSparseThreshold) {
      for (std::int64_t k = hi; k >= lo; --k) {
        const std::int64_t r = draw_full(rng, k);
        if (r > 0 && !visit(k, r)) return;
      }
      continue;
    }
    // Candidates arrive as Bernoulli(qbar) trials found by geometric skips and
    // are thinned to Bernoulli(P(r_k >= 1)).
    const double log_miss = std::log1p(-qbar);
    std::int64_t pos = hi;
    while (pos >= lo) {
      const double skip = std::floor(std::log(uniform_open01(rng)) / log_miss);
      if (skip > static_cast<double>(pos - lo)) break;
      pos -= static_cast<std::int64_t>(skip);
      if (uniform01(rng) * qbar < occupied_[static_cast<std::size_t>(pos)]) {
        if (!visit(pos, draw_occupied(rng, pos))) return;
      }
      --pos;
    }
  }
}

Partition PartitionSampler::sample(Rng& rng) const {
  Partition p;
  traverse(rng, [&](std::int64_t k, std::int64_t r) {
    p.add(k, r);
    return true;
  });
  return p;
}

std::vector<std::int64_t> PartitionSampler::sample_top(Rng& rng, int d) const {
  if (d < 1) throw ValidationError("order statistics need d >= 1");
  std::vector<std::int64_t> top;
  top.reserve(static_cast<std::size_t>(d));
  traverse(rng, [&](std::int64_t k, std::int64_t r) {
    for (std::int64_t i = 0; i < r && static_cast<int>(top.size()) < d; ++i) top.push_back(k);
    return static_cast<int>(top.size()) < d;
  });
  top.resize(static_cast<std::size_t>(d), 0);
  return top;
}

Partition sample_partition(const MultiplicativeMeasure& m, const SamplerConfig& cfg) {
  PartitionSampler sampler(m, cfg);
  auto rng = make_rng(cfg.seed, 0);
  return sampler.sample(rng);
}

std::vector<Partition> sample_partitions(const MultiplicativeMeasure& m, const SamplerConfig& cfg,
                                         std::size_t count) {
  PartitionSampler sampler(m, cfg);
  std::vector<Partition> out(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    auto rng = make_rng(cfg.seed, i);
    out[i] = sampler.sample(rng);
  });
  return out;
}

SmallCanonicalSampler::SmallCanonicalSampler(const WeightSequence& seq, std::int64_t n,
                                             const SamplerConfig& cfg)
    : n_(n),
      attempt_cap_(cfg.attempt_cap),
      // Levels above n can only cause rejection, so truncating at n is exact.
      sampler_(MultiplicativeMeasure(seq, Statistics::Bose,
                                     calibrate_x(seq, static_cast<double>(n),
                                                 CalibrationMode::Numeric)),
               cfg, n) {
  if (n < 1) throw ValidationError("small canonical sampling needs n >= 1");
}

std::pair<Partition, std::int64_t> SmallCanonicalSampler::sample(Rng& rng) const {
  for (std::int64_t attempt = 1; attempt <= attempt_cap_; ++attempt) {
    Partition p;
    std::int64_t weight = 0;
    sampler_.traverse(rng, [&](std::int64_t k, std::int64_t r) {
      weight += k * r;
      if (weight > n_) return false;
      p.add(k, r);
      return true;
    });
    if (weight == n_) return {std::move(p), attempt};
  }
  throw ResourceError(fmt::format("no partition of weight {} accepted within {} attempts", n_,
                                  attempt_cap_));
}

Partition sample_small_canonical(const WeightSequence& seq, std::int64_t n,
                                 const SamplerConfig& cfg) {
  SmallCanonicalSampler sampler(seq, n, cfg);
  auto rng = make_rng(cfg.seed, 0);
  return sampler.sample(rng).first;
}

namespace {

void enumerate_rec(std::int64_t remaining, std::int64_t max_part, std::vector<std::int64_t>& parts,
                   const std::function<void(const std::vector<std::int64_t>&)>& emit) {
  if (remaining == 0) {
    emit(parts);
    return;
  }
  for (std::int64_t k = std::min(remaining, max_part); k >= 1; --k) {
    parts.push_back(k);
    enumerate_rec(remaining - k, k, parts, emit);
    parts.pop_back();
  }
}

}  // namespace

std::vector<WeightedPartition> enumerate_partitions(const WeightSequence& seq, std::int64_t n,
                                                    std::int64_t budget) {
  if (n < 0) throw ValidationError("n must be >= 0");
  if (n > budget) {
    throw ResourceError(fmt::format("n = {} exceeds the enumeration budget {}", n, budget));
  }
  const auto counts = weighted_counts(seq, n);
  const double q = counts.q[static_cast<std::size_t>(n)];
  if (q == 0.0) {
    throw ValidationError(fmt::format("Q({}) = 0 for {}: P(n) carries no mass", n, seq.spec()));
  }
  const auto b = seq.values(n);
  std::vector<WeightedPartition> out;
  std::vector<std::int64_t> parts;
  enumerate_rec(n, n, parts, [&](const std::vector<std::int64_t>& ps) {
    auto p = Partition::from_parts(ps);
    double log_w = 0.0;
    for (const auto& [k, r] : p.occupations()) {
      log_w += log_occupation_coefficient(Statistics::Bose, b[static_cast<std::size_t>(k)], r);
    }
    if (std::isinf(log_w)) return;
    out.push_back({std::move(p), std::exp(log_w) / q});
  });
  return out;
}

std::vector<std::int64_t> top_order_statistics(const Partition& p, int d) {
  if (d < 1) throw ValidationError("order statistics need d >= 1");
  std::vector<std::int64_t> top;
  top.reserve(static_cast<std::size_t>(d));
  for (auto it = p.occupations().rbegin(); it != p.occupations().rend(); ++it) {
    for (std::int64_t i = 0; i < it->second && static_cast<int>(top.size()) < d; ++i) {
      top.push_back(it->first);
    }
    if (static_cast<int>(top.size()) == d) break;
  }
  top.resize(static_cast<std::size_t>(d), 0);
  return top;
}

}  // namespace partgibbs
