#include <doctest.h>

#include <cmath>
#include <numbers>

#include "partgibbs/asymptotics.hpp"
#include "partgibbs/errors.hpp"
#include "partgibbs/measure.hpp"
#include "partgibbs/oracle.hpp"
#include "partgibbs/sampler.hpp"

using namespace partgibbs;

namespace {

const auto ones = WeightSequence::power(1.0, 0.0);

MultiplicativeMeasure bose(const WeightSequence& seq, double x) {
  return MultiplicativeMeasure(seq, Statistics::Bose, x);
}

// prod_{k >= from} (1 - x^k), summed directly.
double euler_tail(double x, int from) {
  double p = 1.0;
  for (int k = from; k <= 200; ++k) p *= 1.0 - std::pow(x, k);
  return p;
}

}  // namespace

TEST_CASE("measure rejects activities outside (0,1)") {
  for (double x : {0.0, 1.0, -0.5, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(bose(ones, x), ValidationError);
  }
  CHECK(parse_statistics("fermi") == Statistics::Fermi);
  CHECK(parse_statistics("bose") == Statistics::Bose);
  CHECK_THROWS_AS(parse_statistics("boltzmann"), ValidationError);
}

TEST_CASE("partition bookkeeping") {
  const std::vector<std::int64_t> parts{3, 1, 1};
  auto p = Partition::from_parts(parts);
  CHECK(p.weight() == 5);
  CHECK(p.length() == 3);
  CHECK(p.max() == 3);
  CHECK(p.occupation(1) == 2);
  CHECK(p.occupation(2) == 0);
  p.add(4, 2);
  CHECK(p.weight() == 13);
  CHECK(p.max() == 4);
  CHECK(Partition{}.max() == 0);
  CHECK(Partition{}.empty());
}

TEST_CASE("occupation laws") {
  CHECK(occupation_pmf(bose(ones, 0.5), 1, 0) == doctest::Approx(0.5));
  CHECK(occupation_pmf(bose(ones, 0.5), 1, 2) == doctest::Approx(0.125));
  CHECK(occupation_pmf(bose(WeightSequence::power(2, 0), 0.5), 1, 1) == doctest::Approx(0.25));

  CHECK(occupation_mean(bose(ones, 0.5), 1) == doctest::Approx(1.0));
  const MultiplicativeMeasure fermi(WeightSequence::power(3, 0), Statistics::Fermi, 0.5);
  CHECK(occupation_mean(fermi, 2) == doctest::Approx(0.6));
  const auto sparse = WeightSequence::tabulated({1.0, 0.0, 1.0});
  CHECK(occupation_mean(bose(sparse, 0.7), 2) == 0.0);
  CHECK(occupation_pmf(bose(sparse, 0.7), 2, 0) == 1.0);
  CHECK(occupation_pmf(fermi, 1, 4) == 0.0);  // at most b_k = 3 fermions

  const MultiplicativeMeasure half_fermi(WeightSequence::power(1, 0.5), Statistics::Fermi, 0.5);
  CHECK_THROWS_AS(occupation_pmf(half_fermi, 2, 1), ValidationError);
}

TEST_CASE("occupation pmf sums to one") {
  const std::vector<MultiplicativeMeasure> measures{
      bose(ones, 0.9), bose(WeightSequence::power(1.5, 0.5), 0.95), bose(WeightSequence::lattice(3), 0.8),
      MultiplicativeMeasure(WeightSequence::lattice(3), Statistics::Fermi, 0.8)};
  for (const auto& m : measures) {
    CAPTURE(m.describe());
    for (std::int64_t k : {1, 2, 5, 9}) {
      double total = 0.0;
      double mean = 0.0;
      for (std::int64_t j = 0; j <= 3000; ++j) {
        const double p = occupation_pmf(m, k, j);
        total += p;
        mean += j * p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(mean == doctest::Approx(occupation_mean(m, k)).epsilon(1e-9));
    }
  }
}

TEST_CASE("expected weight") {
  double direct = 0.0;
  for (int k = 1; k <= 200; ++k) direct += k * std::pow(0.5, k) / (1.0 - std::pow(0.5, k));
  CHECK(expected_weight(bose(ones, 0.5)) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(direct == doctest::Approx(2.744).epsilon(1e-3));

  // Near x = 1: sum_n sigma(n) x^n = zeta(2)/e^2 - 1/(2e) + 1/24 + O(e), e = |log x|.
  for (double x : {0.99, 0.999}) {
    const double eps = -std::log(x);
    const double two_terms = std::numbers::pi * std::numbers::pi / 6 / (eps * eps) - 0.5 / eps + 1.0 / 24;
    CHECK(expected_weight(bose(ones, x)) == doctest::Approx(two_terms).epsilon(1e-2 * eps));
  }
  // The leading-order calibration at n = 600 undershoots by about 7%.
  const double x600 = 1.0 - std::numbers::pi / 60.0;
  const double w600 = expected_weight(bose(ones, x600));
  CHECK(w600 == doctest::Approx(559.47).epsilon(1e-4));

  // x -> 0: only b_1 x survives.
  const auto lat = WeightSequence::lattice(3);
  CHECK(expected_weight(bose(lat, 1e-6)) == doctest::Approx(6e-6).epsilon(1e-4));
}

TEST_CASE("log tail products and max CDF") {
  const auto m = bose(ones, 0.5);
  CHECK(log_tail_product(m, 1) == doctest::Approx(-std::log(euler_tail(0.5, 2))).epsilon(1e-12));
  CHECK(log_tail_product(m, 1) == doctest::Approx(0.549).epsilon(1e-3));
  CHECK(log_tail_product(m, 10'000) == 0.0);

  double fermi_sum = 0.0;
  for (int k = 1; k <= 60; ++k) fermi_sum += std::log1p(std::pow(0.5, k));
  const MultiplicativeMeasure fermi(ones, Statistics::Fermi, 0.5);
  CHECK(log_tail_product(fermi, 0) == doctest::Approx(fermi_sum).epsilon(1e-12));
  CHECK(fermi_sum == doctest::Approx(0.8688).epsilon(1e-4));

  CHECK(max_cdf(m, 1) == doctest::Approx(0.5776).epsilon(1e-4));
  CHECK(max_cdf(m, 0) == doctest::Approx(euler_tail(0.5, 1)).epsilon(1e-12));
  CHECK(max_cdf(m, 0) == doctest::Approx(0.2888).epsilon(1e-3));
  CHECK(max_cdf(m, 5000) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_cdf(m, -1) == 0.0);
}

TEST_CASE("batched tail products agree with single evaluations") {
  const auto m = bose(WeightSequence::power(1, 1), 0.999);
  const std::vector<std::int64_t> levels{0, 5, 100, 4000, 9000, 20'000, 100'000};
  const auto batch = log_tail_products(m, levels);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    CHECK(batch[i] == doctest::Approx(log_tail_product(m, levels[i])).epsilon(1e-12));
  }
}

TEST_CASE("max CDF is a CDF") {
  for (const auto& m : {bose(ones, 0.99), bose(WeightSequence::lattice(3), 0.95),
                        MultiplicativeMeasure(WeightSequence::lattice(2), Statistics::Fermi, 0.97),
                        bose(WeightSequence::power(0.5, -0.5), 0.99)}) {
    CAPTURE(m.describe());
    std::vector<std::int64_t> levels(3000);
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = static_cast<std::int64_t>(i);
    const auto tails = log_tail_products(m, levels);
    const auto cdf = max_cdfs(m, levels);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      REQUIRE(cdf[i] >= 0.0);
      REQUIRE(cdf[i] <= 1.0);
      if (i) {
        REQUIRE(cdf[i] >= cdf[i - 1]);
        REQUIRE(tails[i] <= tails[i - 1]);
      }
    }
  }
}

TEST_CASE("top level probabilities") {
  const auto m = bose(ones, 0.5);
  const std::vector<std::int64_t> two{2};
  CHECK(exact_top_levels_pmf(m, two) == doctest::Approx(0.1875 * euler_tail(0.5, 3)).epsilon(1e-12));
  CHECK(exact_top_levels_pmf(m, two) == doctest::Approx(0.1444).epsilon(1e-3));

  // Leading order as x -> 0.
  const auto lat = bose(WeightSequence::lattice(3), 1e-4);
  const std::vector<std::int64_t> three{3};
  CHECK(exact_top_levels_pmf(lat, three) == doctest::Approx(8e-12).epsilon(1e-3));

  const std::vector<std::int64_t> unordered{2, 5};
  CHECK_THROWS_AS(exact_top_levels_pmf(m, unordered), ValidationError);
  const std::vector<std::int64_t> repeated{3, 3};
  CHECK_THROWS_AS(exact_top_levels_pmf(m, repeated), ValidationError);
}

TEST_CASE("max increments dominate the simple-occupancy event") {
  for (const auto& m : {bose(ones, 0.9), bose(WeightSequence::plane_diagonal(), 0.95),
                        MultiplicativeMeasure(WeightSequence::lattice(3), Statistics::Fermi, 0.9)}) {
    CAPTURE(m.describe());
    for (std::int64_t M = 1; M <= 120; ++M) {
      const std::vector<std::int64_t> level{M};
      const double increment = max_cdf(m, M) - max_cdf(m, M - 1);
      REQUIRE(increment >= exact_top_levels_pmf(m, level) - 1e-15);
    }
  }
  // Fermi with b_k = 1 cannot repeat a level, so the two coincide.
  const MultiplicativeMeasure f(ones, Statistics::Fermi, 0.8);
  for (std::int64_t M = 1; M <= 40; ++M) {
    const std::vector<std::int64_t> level{M};
    CHECK(max_cdf(f, M) - max_cdf(f, M - 1) == doctest::Approx(exact_top_levels_pmf(f, level)).epsilon(1e-10));
  }
}

TEST_CASE("two-level probabilities against a direct product") {
  const auto m = bose(ones, 0.7);
  const std::vector<std::int64_t> levels{4, 2};
  double p = std::pow(0.7, 4) * (1 - std::pow(0.7, 4)) * std::pow(0.7, 2) * (1 - std::pow(0.7, 2));
  p *= 1 - std::pow(0.7, 3);
  for (int k = 5; k <= 300; ++k) p *= 1 - std::pow(0.7, k);
  CHECK(exact_top_levels_pmf(m, levels) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("truncation level is certified") {
  const auto m = bose(WeightSequence::power(1, 1), 0.99);
  const auto K = truncation_level(m, 1e-12);
  double rest = 0.0;
  for (std::int64_t k = K + 1; k <= K + 200'000; ++k) rest += -k * std::log1p(-std::pow(0.99, k));
  CHECK(rest < 1e-12);
  CHECK(truncation_level(m, 1e-12) >= truncation_level(m, 1e-6));
  CHECK_THROWS_AS(truncation_level(bose(ones, 1 - 1e-12), 1e-12, 0, 1000), ResourceError);
}

TEST_CASE("weighted counts") {
  const auto q = weighted_counts(ones, 5);
  REQUIRE(q.is_exact());
  CHECK(q.q == std::vector<double>{1, 1, 2, 3, 5, 7});
  CHECK(weighted_counts(WeightSequence::plane_diagonal(), 4).q == std::vector<double>{1, 1, 3, 6, 13});
  CHECK(weighted_counts(WeightSequence::power(2, 0), 2).q == std::vector<double>{1, 2, 5});
  CHECK(weighted_counts(ones, 0).q == std::vector<double>{1});

  const auto p = weighted_counts(ones, 50);
  const auto numbers = oracle::partition_numbers(50);
  for (std::size_t n = 0; n <= 50; ++n) CHECK(p.exact[n] == numbers[n]);
  CHECK(p.exact[50] == 204226);

  // Big-integer path stays exact past double precision.
  const auto big = weighted_counts(ones, 1000);
  CHECK(big.exact[1000].str() == "24061467864032622473692149727991");

  const MultiplicativeMeasure fermi(ones, Statistics::Fermi, 0.5);
  CHECK_THROWS_AS(weighted_counts(fermi, 5), ValidationError);
  CHECK_THROWS_AS(weighted_counts(ones, -1), ValidationError);
}

TEST_CASE("non-integer weights use real arithmetic") {
  const auto seq = WeightSequence::power(0.5, 0.0);
  const auto q = weighted_counts(seq, 3);
  CHECK_FALSE(q.is_exact());
  // (1-z)^{-1/2} (1-z^2)^{-1/2} (1-z^3)^{-1/2}: 1, 1/2, 3/8 + 1/2, 5/16 + 1/4 + 1/2.
  CHECK(q.q[1] == doctest::Approx(0.5));
  CHECK(q.q[2] == doctest::Approx(0.875));
  CHECK(q.q[3] == doctest::Approx(1.0625));
}

TEST_CASE("lattice and plane counts against enumeration") {
  for (const auto& seq : {WeightSequence::lattice(2), WeightSequence::lattice(3), WeightSequence::plane_diagonal(),
                          WeightSequence::power(3, 0)}) {
    CAPTURE(seq.spec());
    const auto fast = weighted_counts(seq, 18);
    CHECK(fast.exact == oracle::weighted_counts(seq, 18));
  }
  const auto plane = oracle::plane_partition_counts(15);
  const auto fast = weighted_counts(WeightSequence::plane_diagonal(), 15);
  for (std::size_t n = 0; n <= 15; ++n) CHECK(fast.exact[n] == plane[n]);
}

TEST_CASE("restricted counts") {
  const auto r = restricted_counts(ones, 6, 2);
  CHECK(r.q == std::vector<double>{1, 1, 2, 2, 3, 3, 4});
  CHECK(restricted_counts(ones, 4, 0).q == std::vector<double>{1, 0, 0, 0, 0});
}

TEST_CASE("small canonical max law") {
  CHECK(small_canonical_max_cdf(ones, 5, 2) == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  CHECK(small_canonical_max_cdf(ones, 5, 1) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(small_canonical_max_cdf(ones, 5, 5) == 1.0);
  CHECK(small_canonical_max_cdf(ones, 5, 9) == 1.0);
  CHECK(small_canonical_max_cdf(ones, 0, 0) == 1.0);
  CHECK_THROWS_AS(small_canonical_max_cdf(ones, 61, 3), ResourceError);
  CHECK_THROWS_AS(small_canonical_max_cdf(WeightSequence::tabulated({0.0, 1.0}), 3, 2), ValidationError);

  for (const auto& seq : {ones, WeightSequence::plane_diagonal(), WeightSequence::lattice(3)}) {
    for (std::int64_t n = 1; n <= 16; ++n) {
      const auto fast = small_canonical_max_law(seq, n);
      const auto brute = oracle::small_canonical_max_law(seq, n);
      REQUIRE(fast.size() == brute.size());
      for (std::size_t M = 0; M < fast.size(); ++M) REQUIRE(fast[M] == doctest::Approx(brute[M]).epsilon(1e-12));
      REQUIRE(fast.back() == 1.0);
    }
  }
}

TEST_CASE("conditional measure does not depend on x") {
  for (const auto& seq : {ones, WeightSequence::plane_diagonal()}) {
    CAPTURE(seq.spec());
    for (std::int64_t n = 1; n <= 20; ++n) {
      const auto listed = enumerate_partitions(seq, n);
      std::vector<std::vector<double>> per_x;
      for (double x : {0.3, 0.5, 0.7}) {
        const auto m = bose(seq, x);
        const double log_F = log_tail_product(m, 0);
        std::vector<double> p;
        double total = 0.0;
        for (const auto& wp : listed) {
          double lp = n * std::log(x) - log_F;
          for (const auto& [k, r] : wp.partition.occupations()) {
            lp += log_occupation_coefficient(Statistics::Bose, seq.at(k), r);
          }
          p.push_back(std::exp(lp));
          total += p.back();
        }
        for (auto& v : p) v /= total;
        per_x.push_back(p);
      }
      for (std::size_t i = 0; i < listed.size(); ++i) {
        REQUIRE(std::abs(per_x[0][i] - per_x[1][i]) < 1e-9);
        REQUIRE(std::abs(per_x[0][i] - per_x[2][i]) < 1e-9);
        REQUIRE(std::abs(per_x[1][i] - per_x[2][i]) < 1e-9);
        REQUIRE(std::abs(per_x[0][i] - listed[i].probability) < 1e-9);
      }
    }
  }
}

TEST_CASE("Bose and Fermi maxima share the limit") {
  // The gap between the two rescaled laws shrinks as x -> 1.
  const auto seq = WeightSequence::lattice(3);
  double previous = 1.0;
  for (double x : {0.9, 0.99, 0.999}) {
    const auto r = rescaling_gas(3, x);
    const MultiplicativeMeasure b(seq, Statistics::Bose, x);
    const MultiplicativeMeasure f(seq, Statistics::Fermi, x);
    double gap = 0.0;
    for (int i = 0; i <= 120; ++i) {
      const auto M = r.floor_level(-4.0 + 0.1 * i);
      gap = std::max(gap, std::abs(max_cdf(b, M) - max_cdf(f, M)));
    }
    CAPTURE(x);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 0.05);
}
