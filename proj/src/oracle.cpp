#include "partgibbs/oracle.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "partgibbs/errors.hpp"

namespace partgibbs::oracle {

namespace {

void lattice_rec(int dims_left, std::int64_t norm, std::int64_t K,
                 std::vector<std::int64_t>& counts) {
  if (dims_left == 0) {
    ++counts[static_cast<std::size_t>(norm)];
    return;
  }
  for (std::int64_t v = 0; norm + v * v <= K; ++v) {
    const int copies = v == 0 ? 1 : 2;
    for (int c = 0; c < copies; ++c) lattice_rec(dims_left - 1, norm + v * v, K, counts);
  }
}

// Appends rows below `prev`: each row is nonincreasing and bounded entrywise by prev.
void plane_rows(const std::vector<std::int64_t>& prev, std::int64_t total, std::int64_t N,
                std::vector<std::int64_t>& counts) {
  ++counts[static_cast<std::size_t>(total)];
  std::vector<std::int64_t> row;
  // Depth-first over rows: entry i ranges over 1..min(prev[i], row[i-1]).
  auto extend = [&](auto&& self, std::int64_t sum) -> void {
    const std::size_t i = row.size();
    if (i >= prev.size()) return;
    const std::int64_t bound = std::min(prev[i], i == 0 ? prev[0] : row[i - 1]);
    for (std::int64_t v = 1; v <= bound && total + sum + v <= N; ++v) {
      row.push_back(v);
      plane_rows(row, total + sum + v, N, counts);
      self(self, sum + v);
      row.pop_back();
    }
  };
  extend(extend, 0);
}

BigInt binomial_multiset(std::int64_t b, std::int64_t r) {
  // C(b + r - 1, r)
  BigInt value = 1;
  for (std::int64_t i = 0; i < r; ++i) {
    value *= BigInt(b + i);
    value /= BigInt(i + 1);
  }
  return value;
}

}  // namespace

std::vector<std::int64_t> lattice_counts(int d, std::int64_t K) {
  if (d < 1 || K < 0) throw ValidationError("lattice oracle needs d >= 1 and K >= 0");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(K) + 1, 0);
  lattice_rec(d, 0, K, counts);
  return counts;
}

std::vector<std::int64_t> plane_partition_counts(std::int64_t N) {
  if (N < 0) throw ValidationError("N must be >= 0");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(N) + 1, 0);
  // The first row is bounded only by N; model it as a row below an all-N row.
  const std::vector<std::int64_t> unbounded(static_cast<std::size_t>(N), N);
  plane_rows(unbounded, 0, N, counts);
  return counts;
}

std::vector<std::int64_t> partition_numbers(std::int64_t N) {
  if (N < 0) throw ValidationError("N must be >= 0");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(N) + 1, 0);
  for (std::int64_t n = 0; n <= N; ++n) {
    for_each_partition(n, [&](const std::vector<std::int64_t>&) { ++counts[static_cast<std::size_t>(n)]; });
  }
  return counts;
}

std::vector<BigInt> weighted_counts(const WeightSequence& seq, std::int64_t N) {
  if (N < 0) throw ValidationError("N must be >= 0");
  std::vector<std::int64_t> b(static_cast<std::size_t>(N) + 1, 0);
  for (std::int64_t k = 1; k <= N; ++k) {
    const double v = seq.at(k);
    if (v != std::floor(v)) throw ValidationError("weighted-count oracle needs integer weights");
    b[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(v);
  }
  std::vector<BigInt> q(static_cast<std::size_t>(N) + 1, 0);
  for (std::int64_t n = 0; n <= N; ++n) {
    BigInt total = 0;
    for_each_partition(n, [&](const std::vector<std::int64_t>& parts) {
      BigInt w = 1;
      std::size_t i = 0;
      while (i < parts.size()) {
        std::size_t j = i;
        while (j < parts.size() && parts[j] == parts[i]) ++j;
        w *= binomial_multiset(b[static_cast<std::size_t>(parts[i])],
                               static_cast<std::int64_t>(j - i));
        i = j;
      }
      total += w;
    });
    q[static_cast<std::size_t>(n)] = total;
  }
  return q;
}

std::vector<double> small_canonical_max_law(const WeightSequence& seq, std::int64_t n) {
  if (n < 0) throw ValidationError("n must be >= 0");
  std::vector<double> mass(static_cast<std::size_t>(n) + 1, 0.0);
  double total = 0.0;
  for_each_partition(n, [&](const std::vector<std::int64_t>& parts) {
    double w = 1.0;
    std::size_t i = 0;
    while (i < parts.size()) {
      std::size_t j = i;
      while (j < parts.size() && parts[j] == parts[i]) ++j;
      const double b = seq.at(parts[i]);
      for (std::size_t r = 0; r < j - i; ++r) w *= (b + static_cast<double>(r)) / static_cast<double>(r + 1);
      i = j;
    }
    const std::int64_t top = parts.empty() ? 0 : parts.front();
    mass[static_cast<std::size_t>(top)] += w;
    total += w;
  });
  if (total == 0.0) throw ValidationError("P(n) carries no mass");
  std::vector<double> law(mass.size());
  double running = 0.0;
  for (std::size_t M = 0; M < mass.size(); ++M) {
    running += mass[M];
    law[M] = running / total;
  }
  return law;
}

}  // namespace partgibbs::oracle
