#ifndef PARTGIBBS_ORACLE_IMPL_HPP
#define PARTGIBBS_ORACLE_IMPL_HPP

#include <algorithm>
#include <vector>

namespace partgibbs::oracle {

namespace detail {

template <class Visit>
void partitions_rec(std::int64_t remaining, std::int64_t max_part, std::vector<std::int64_t>& parts,
                    Visit& visit) {
  if (remaining == 0) {
    visit(static_cast<const std::vector<std::int64_t>&>(parts));
    return;
  }
  for (std::int64_t k = std::min(remaining, max_part); k >= 1; --k) {
    parts.push_back(k);
    partitions_rec(remaining - k, k, parts, visit);
    parts.pop_back();
  }
}

}  // namespace detail

template <class Visit>
void for_each_partition(std::int64_t n, Visit&& visit) {
  std::vector<std::int64_t> parts;
  detail::partitions_rec(n, n, parts, visit);
}

}  // namespace partgibbs::oracle

#endif  // PARTGIBBS_ORACLE_IMPL_HPP
