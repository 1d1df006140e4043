#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "partgibbs/asymptotics.hpp"
#include "partgibbs/errors.hpp"
#include "partgibbs/measure.hpp"

using namespace partgibbs;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double e = std::numbers::e;

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("power rescaling shifts") {
  CHECK(rescaling_power(1, 0, 1 - std::exp(-1.0)).shift == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rescaling_power(1, 1, 1 - std::exp(-2.0)).shift ==
        doctest::Approx(4 + 2 * std::log(2.0)).epsilon(1e-14));
  CHECK(rescaling_power(1, 1, 1 - std::exp(-2.0)).shift == doctest::Approx(5.3863).epsilon(1e-4));
  for (double x : {0.1, 0.5, 0.99, 0.999999}) {
    CHECK(rescaling_power(e, 0, x).shift == doctest::Approx(-std::log1p(-x) + 1).epsilon(1e-13));
    CHECK(rescaling_power(1, 0, x).scale == doctest::Approx(1 - x));
  }
  // |log(1-x)| < 1 gives a negative log|log(1-x)|, which is allowed.
  CHECK(std::isfinite(rescaling_power(1, 2, 0.3).shift));
  CHECK_THROWS_AS(rescaling_power(1, 0, 1.0), ValidationError);
  CHECK_THROWS_AS(rescaling_power(1, -1, 0.5), ValidationError);
  CHECK_THROWS_AS(rescaling_power(0, 0, 0.5), ValidationError);
}

TEST_CASE("gas rescaling shifts") {
  CHECK(rescaling_gas(2, 1 - std::exp(-1.0)).shift == doctest::Approx(1 + std::log(pi)).epsilon(1e-14));
  CHECK(rescaling_gas(2, 1 - std::exp(-1.0)).shift == doctest::Approx(2.1447).epsilon(1e-4));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.999999);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    CHECK(rescaling_gas(2, x).shift + std::log1p(-x) == doctest::Approx(std::log(pi)).epsilon(1e-12));
  }
  const double d3 = 3 + 0.5 * std::log(2.0) + 1.5 * std::log(1.5) + std::log(4 * pi / 3);
  CHECK(rescaling_gas(3, 1 - std::exp(-2.0)).shift == doctest::Approx(d3).epsilon(1e-13));
  CHECK_THROWS_AS(rescaling_gas(0, 0.5), ValidationError);
}

TEST_CASE("plane rescaling") {
  CHECK(rescaling_plane(1 - std::exp(-2.0)).shift == doctest::Approx(5.3863).epsilon(1e-4));
  CHECK(rescaling_plane(1 - std::exp(-1.0)).shift == doctest::Approx(2 + std::log(2.0)).epsilon(1e-14));
  for (double x : {0.2, 0.9, 0.99999}) {
    CHECK(rescaling_plane(x).shift == rescaling_power(1, 1, x).shift);
    CHECK(rescaling_plane(x).scale == rescaling_power(1, 1, x).scale);
  }
  CHECK(rescaling_for(WeightSequence::plane_diagonal(), 0.9).shift == rescaling_plane(0.9).shift);
  CHECK_THROWS_AS(rescaling_for(WeightSequence::tabulated({1.0}), 0.9), ValidationError);
}

TEST_CASE("rescale and level map are inverse") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(0.05, 0.99999);
  std::uniform_real_distribution<double> ut(-10, 10);
  for (int i = 0; i < 10'000; ++i) {
    const auto r = rescaling_power(1.0, 0.5, ux(rng));
    const double t = ut(rng);
    REQUIRE(std::abs(r.rescale(r.level(t)) - t) < 1e-12 * std::max(1.0, std::abs(r.shift)));
    REQUIRE(r.scale > 0.0);
    REQUIRE(r.scale < 1.0);
  }
  const RescalingSpec r{0.5, 1.0};
  CHECK(r.floor_level(0.2) == 2);
  CHECK(r.floor_level(-1.5) == -1);
}

TEST_CASE("calibration") {
  const auto ones = WeightSequence::power(1, 0);
  const double x = calibrate_x(ones, 600);
  CHECK(x == doctest::Approx(1 - std::sqrt(pi * pi / 6 / 600)).epsilon(1e-14));
  CHECK(x == doctest::Approx(0.94765).epsilon(1e-5));
  double previous = 0.0;
  for (double n : {10.0, 100.0, 1e3, 1e4, 1e6}) {
    const double xn = calibrate_x(ones, n);
    CHECK(xn > previous);
    CHECK(xn < 1.0);
    previous = xn;
  }
  CHECK_THROWS_AS(calibrate_x(ones, 0.5), ValidationError);  // 1 - 1.8 < 0
  CHECK_THROWS_AS(calibrate_x(ones, -3), ValidationError);

  const auto lat = WeightSequence::lattice(3);
  const double xl = calibrate_x(lat, 1e4, CalibrationMode::Numeric);
  const double w = expected_weight(MultiplicativeMeasure(lat, Statistics::Bose, xl));
  CHECK(std::abs(w - 1e4) <= 1.0);
  // The closed form is the leading-order answer; the two agree to a few percent.
  CHECK(1 - calibrate_x(lat, 1e4) == doctest::Approx(1 - xl).epsilon(0.05));

  const double xp = calibrate_x(WeightSequence::plane_diagonal(), 5000, CalibrationMode::Numeric);
  CHECK(std::abs(expected_weight(MultiplicativeMeasure(WeightSequence::plane_diagonal(), Statistics::Bose, xp)) -
                 5000) <= 1.0);
}

TEST_CASE("small canonical shift and scale") {
  const auto ones = WeightSequence::power(1, 0);
  const auto n = static_cast<std::int64_t>(std::exp(e));  // 15; check the formula at this n
  const double expected = 0.5 * std::log(static_cast<double>(n)) - 0.5 * std::log(pi * pi / 6);
  CHECK(shift_small_canonical(ones, n) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(scale_small_canonical(ones, 600) == doctest::Approx(std::sqrt(pi * pi / 6 / 600)).epsilon(1e-13));

  // beta = 1: (2/3) log n + log log n + (1/3) log c - (2/3) log(Gamma(3) zeta(3)) + log(2/3).
  const double n6 = 1e6;
  const double beta1 = 2.0 / 3 * std::log(n6) + std::log(std::log(n6)) -
                       2.0 / 3 * std::log(2 * std::riemann_zeta(3.0)) + std::log(2.0 / 3);
  const double a = shift_small_canonical(WeightSequence::power(1, 1), 1'000'000);
  CHECK(std::isfinite(a));
  CHECK(a == doctest::Approx(beta1).epsilon(1e-13));
  CHECK(shift_small_canonical(WeightSequence::plane_diagonal(), 1'000'000) == a);
  CHECK_THROWS_AS(shift_small_canonical(ones, 2), ValidationError);

  // Lattice d = 2 collapses to the power law c = pi, beta = 0.
  CHECK(shift_small_canonical(WeightSequence::lattice(2), 1000) ==
        doctest::Approx(shift_small_canonical(WeightSequence::power(pi, 0), 1000)).epsilon(1e-12));
  CHECK(scale_small_canonical(WeightSequence::lattice(2), 1000) ==
        doctest::Approx(scale_small_canonical(WeightSequence::power(pi, 0), 1000)).epsilon(1e-12));
}

TEST_CASE("Gumbel functions") {
  CHECK(gumbel_cdf(0) == doctest::Approx(1 / e).epsilon(1e-15));
  CHECK(gumbel_quantile(1 / e) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gumbel_quantile(0.5) == doctest::Approx(0.366513).epsilon(1e-6));
  CHECK(gumbel_pdf(0) == doctest::Approx(1 / e).epsilon(1e-15));
  CHECK_THROWS_AS(gumbel_quantile(0.0), ValidationError);
  CHECK_THROWS_AS(gumbel_quantile(1.0), ValidationError);
  double previous = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = -3 + 0.05 * i;
    REQUIRE(gumbel_cdf(t) > previous);
    previous = gumbel_cdf(t);
    REQUIRE(gumbel_quantile(gumbel_cdf(t)) == doctest::Approx(t).epsilon(1e-9));
  }
}

TEST_CASE("order statistic limit density") {
  const std::vector<double> zero{0.0};
  CHECK(order_joint_density(zero) == doctest::Approx(1 / e));
  const std::vector<double> wrong{0.0, 1.0};
  CHECK(order_joint_density(wrong) == 0.0);
  const std::vector<double> tie{1.0, 1.0};
  CHECK(order_joint_density(tie) == 0.0);
  CHECK_THROWS_AS(order_joint_density(std::vector<double>{}), ValidationError);

  const double lo = -6.0, width = 36.0;
  auto d1 = [](double t) { return order_joint_density(std::vector<double>{t}); };
  auto d2_inner = [&](double t2) {
    return simpson([&](double t1) { return order_joint_density(std::vector<double>{t1 + 1e-12, t2}); },
                   t2, t2 + width, 400);
  };
  auto d3_inner = [&](double t3) {
    return simpson([&](double t2) {
      return simpson([&](double t1) { return order_joint_density(std::vector<double>{t1 + 2e-12, t2 + 1e-12, t3}); },
                     t2, t2 + width, 240);
    }, t3, t3 + width, 240);
  };
  CHECK(simpson(d1, lo, lo + 2 * width, 800) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(simpson(d2_inner, lo, lo + width, 400) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(simpson(d3_inner, lo, lo + width, 240) == doctest::Approx(1.0).epsilon(1e-4));

  // Marginal of the second coordinate by quadrature of the joint density.
  for (double t : {-1.0, 0.0, 0.7, 2.5}) {
    CAPTURE(t);
    CHECK(simpson(d2_inner, lo, t, 400) == doctest::Approx(order_marginal_cdf(2, t)).epsilon(1e-5));
  }
}

TEST_CASE("order statistic marginals") {
  CHECK(order_marginal_cdf(1, 0) == doctest::Approx(1 / e));
  CHECK(order_marginal_cdf(2, 0) == doctest::Approx(2 / e));
  CHECK(order_marginal_cdf(3, 50) == doctest::Approx(1.0));
  CHECK_THROWS_AS(order_marginal_cdf(0, 0), ValidationError);
  for (int i = 1; i <= 5; ++i) {
    double previous = 0.0;
    for (int s = 0; s <= 300; ++s) {
      const double t = -5 + 0.05 * s;
      const double g = order_marginal_cdf(i, t);
      REQUIRE(g >= previous - 1e-15);
      REQUIRE(g <= 1.0);
      REQUIRE(order_marginal_cdf(i + 1, t) >= g);
      REQUIRE(order_marginal_cdf(2, t) == doctest::Approx(gumbel_cdf(t) * (1 + std::exp(-t))).epsilon(1e-12));
      previous = g;
    }
  }
}

TEST_CASE("continuous KS distance") {
  const std::vector<double> median{0.0};
  CHECK(ks_distance(median, [](double t) { return t < 0 ? 0.0 : 0.5; }) == doctest::Approx(0.5));
  CHECK(ks_distance(std::vector<double>{gumbel_quantile(0.5)}, gumbel_cdf) == doctest::Approx(0.5));

  const int N = 1000;
  std::vector<double> grid(N);
  for (int i = 0; i < N; ++i) grid[i] = gumbel_quantile((i + 0.5) / N);
  CHECK(ks_distance(grid, gumbel_cdf) == doctest::Approx(0.5 / N).epsilon(1e-9));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> sample(100'000);
  for (auto& v : sample) v = gumbel_quantile(u(rng));
  std::sort(sample.begin(), sample.end());
  CHECK(ks_distance(sample, gumbel_cdf) < 1.95 / std::sqrt(1e5));

  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, gumbel_cdf), ValidationError);
  CHECK_THROWS_AS(ks_distance(std::vector<double>{1.0, 0.0}, gumbel_cdf), ValidationError);
}

TEST_CASE("discrete KS distance matches a brute-force sup") {
  // Geometric law on {0,1,...} against a sample that is off on purpose.
  auto cdf = [](std::int64_t v) { return v < 0 ? 0.0 : 1.0 - std::pow(0.6, v + 1); };
  std::mt19937_64 rng(5);
  std::geometric_distribution<std::int64_t> geo(0.5);
  std::vector<std::int64_t> sample(300);
  for (auto& v : sample) v = geo(rng);
  std::sort(sample.begin(), sample.end());

  double brute = 0.0;
  for (double t = -2.0; t <= static_cast<double>(sample.back()) + 2.0; t += 0.25) {
    const auto below = std::upper_bound(sample.begin(), sample.end(), static_cast<std::int64_t>(std::floor(t)));
    const double emp = static_cast<double>(below - sample.begin()) / sample.size();
    brute = std::max(brute, std::abs(emp - cdf(static_cast<std::int64_t>(std::floor(t)))));
  }
  CHECK(ks_distance_discrete(sample, cdf) == doctest::Approx(brute).epsilon(1e-14));

  const std::vector<std::int64_t> exact{0, 0, 1, 1};
  CHECK(ks_distance_discrete(exact, [](std::int64_t v) { return v < 0 ? 0.0 : v == 0 ? 0.5 : 1.0; }) ==
        doctest::Approx(0.0));
}

TEST_CASE("sup distance of a step CDF to Gumbel") {
  // One atom at 0 carrying all mass: the gap is max(G(0), 1 - G(0)).
  const std::vector<double> atoms{0.0};
  const std::vector<double> values{1.0};
  CHECK(sup_distance_to_gumbel(atoms, values) == doctest::Approx(1 - 1 / e));
  CHECK_THROWS_AS(sup_distance_to_gumbel(atoms, std::vector<double>{}), ValidationError);
}
