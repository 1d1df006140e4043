#ifndef PARTGIBBS_ORACLE_HPP
#define PARTGIBBS_ORACLE_HPP

// Brute-force enumerators used to cross-check the fast routes. None of them
// shares code with the recurrences or convolutions they validate.

#include <cstdint>
#include <vector>

#include "partgibbs/measure.hpp"
#include "partgibbs/weights.hpp"

namespace partgibbs::oracle {

/// j_d(0..K) by enumerating integer points with squared norm <= K.
std::vector<std::int64_t> lattice_counts(int d, std::int64_t K);

/// Number of plane partitions of n for n = 0..N, by enumerating row stacks.
std::vector<std::int64_t> plane_partition_counts(std::int64_t N);

/// Number of ordinary partitions of n for n = 0..N, by listing them.
std::vector<std::int64_t> partition_numbers(std::int64_t N);

/// Q(0..N) by summing prod_k C(b_k + r_k - 1, r_k) over every partition of n.
/// Requires integer weights.
std::vector<BigInt> weighted_counts(const WeightSequence& seq, std::int64_t N);

/// mu^n{max <= M}, M = 0..n, summed over the partitions of n.
std::vector<double> small_canonical_max_law(const WeightSequence& seq, std::int64_t n);

/// Calls visit(parts) for every partition of n, parts in nonincreasing order.
template <class Visit>
void for_each_partition(std::int64_t n, Visit&& visit);

}  // namespace partgibbs::oracle

#include "partgibbs/oracle_impl.hpp"

#endif  // PARTGIBBS_ORACLE_HPP
