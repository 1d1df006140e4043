#include "partgibbs/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "partgibbs/errors.hpp"

namespace partgibbs {

namespace {

void check_activity(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw ValidationError(fmt::format("activity x must lie in (0,1), got {}", x));
  }
}

// |log(1 - x)|
double abs_log_gap(double x) { return -std::log1p(-x); }

double zeta(double s) { return std::riemann_zeta(s); }

}  // namespace

std::int64_t RescalingSpec::floor_level(double t) const {
  return static_cast<std::int64_t>(std::floor(level(t)));
}

RescalingSpec rescaling_power(double c, double beta, double x) {
  check_activity(x);
  if (!(c > 0.0)) throw ValidationError(fmt::format("rescaling needs c > 0, got {}", c));
  if (!(beta > -1.0)) throw ValidationError(fmt::format("rescaling needs beta > -1, got {}", beta));
  const double L = abs_log_gap(x);
  double shift = (beta + 1.0) * L + std::log(c);
  if (beta != 0.0) shift += beta * std::log(L) + beta * std::log(beta + 1.0);
  return {1.0 - x, shift};
}

RescalingSpec rescaling_gas(int d, double x) {
  check_activity(x);
  if (d < 1) throw ValidationError(fmt::format("gas dimension must be >= 1, got {}", d));
  const double L = abs_log_gap(x);
  const double half = 0.5 * d;
  double shift = half * L + half * std::log(half) + std::log(ball_volume_coefficient(d));
  if (d != 2) shift += (half - 1.0) * std::log(L);
  return {1.0 - x, shift};
}

RescalingSpec rescaling_plane(double x) { return rescaling_power(1.0, 1.0, x); }

RescalingSpec rescaling_for(const WeightSequence& seq, double x) {
  if (const auto* p = std::get_if<PowerWeights>(&seq.kind())) return rescaling_power(p->c, p->beta, x);
  if (const auto* l = std::get_if<LatticeWeights>(&seq.kind())) return rescaling_gas(l->d, x);
  if (seq.is_plane_diagonal()) return rescaling_plane(x);
  throw ValidationError(fmt::format("no natural rescaling for {}", seq.spec()));
}

PowerLaw effective_power_law(const WeightSequence& seq) {
  if (const auto* p = std::get_if<PowerWeights>(&seq.kind())) return {p->c, p->beta};
  if (seq.is_plane_diagonal()) return {1.0, 1.0};
  if (const auto* l = std::get_if<LatticeWeights>(&seq.kind())) {
    // j_d(k) ~ (d/2) C_d k^{d/2 - 1} on average.
    return {0.5 * l->d * ball_volume_coefficient(l->d), 0.5 * l->d - 1.0};
  }
  throw ValidationError(fmt::format("{} has no power-law asymptotics", seq.spec()));
}

double scale_small_canonical(const WeightSequence& seq, std::int64_t n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  const auto nn = static_cast<double>(n);
  if (const auto* l = std::get_if<LatticeWeights>(&seq.kind())) {
    const double d = l->d;
    return std::pow(d * std::pow(std::numbers::pi, 0.5 * d) * zeta(0.5 * d + 1.0) / (2.0 * nn),
                    2.0 / (d + 2.0));
  }
  const auto [c, beta] = effective_power_law(seq);
  return std::pow(c * std::tgamma(beta + 2.0) * zeta(beta + 2.0) / nn, 1.0 / (beta + 2.0));
}

double calibrate_x(const WeightSequence& seq, double n, CalibrationMode mode,
                   int max_iterations) {
  if (!(n > 0.0)) throw ValidationError(fmt::format("target weight must be positive, got {}", n));
  if (mode == CalibrationMode::ClosedForm) {
    double gap = 0.0;
    if (const auto* l = std::get_if<LatticeWeights>(&seq.kind())) {
      const double d = l->d;
      gap = std::pow(d * std::pow(std::numbers::pi, 0.5 * d) * zeta(0.5 * d + 1.0) / (2.0 * n),
                     1.0 / (0.5 * d + 1.0));
    } else {
      const auto [c, beta] = effective_power_law(seq);
      gap = std::pow(c * std::tgamma(beta + 2.0) * zeta(beta + 2.0) / n, 1.0 / (beta + 2.0));
    }
    const double x = 1.0 - gap;
    if (!(x > 0.0 && x < 1.0)) {
      throw ValidationError(fmt::format("closed-form x(n) = {} for n = {} is outside (0,1)", x, n));
    }
    return x;
  }

  const double tolerance = std::max(1.0, 1e-6 * n);
  auto weight = [&](double x) {
    return expected_weight(MultiplicativeMeasure(seq, Statistics::Bose, x));
  };
  double lo = 0.0;
  double hi = 0.5;
  int iterations = 0;
  while (weight(hi) < n) {
    lo = hi;
    hi = 1.0 - 0.25 * (1.0 - hi);
    if (++iterations > max_iterations) {
      throw ResourceError(fmt::format("calibrate_x: no bracket for n = {}", n));
    }
  }
  while (iterations++ < max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double w = weight(mid);
    if (std::abs(w - n) <= tolerance) return mid;
    (w < n ? lo : hi) = mid;
  }
  throw ResourceError(fmt::format("calibrate_x: bisection did not converge for n = {}", n));
}

double shift_small_canonical(const WeightSequence& seq, std::int64_t n) {
  if (n < 3) throw ValidationError(fmt::format("A_n needs n >= 3, got {}", n));
  const double log_n = std::log(static_cast<double>(n));
  const double loglog_n = std::log(log_n);
  if (const auto* l = std::get_if<LatticeWeights>(&seq.kind())) {
    const double d = l->d;
    return d / (d + 2.0) * log_n + (d - 2.0) / 2.0 * loglog_n +
           d * d / (2.0 * (d + 2.0)) * std::log(d / 2.0) +
           (d - 2.0) / 2.0 * std::log(2.0 / (d + 2.0)) -
           d / (d + 2.0) * std::log(zeta(d / 2.0 + 1.0) / std::numbers::pi) -
           std::lgamma(d / 2.0 + 1.0);
  }
  const auto [c, beta] = effective_power_law(seq);
  const double ratio = (beta + 1.0) / (beta + 2.0);
  double shift = ratio * log_n - ratio * std::log(std::tgamma(beta + 2.0) * zeta(beta + 2.0)) +
                 std::log(c) / (beta + 2.0);
  if (beta != 0.0) shift += beta * loglog_n + beta * std::log(ratio);
  return shift;
}

double gumbel_cdf(double t) { return std::exp(-std::exp(-t)); }

double gumbel_pdf(double t) { return std::exp(-t - std::exp(-t)); }

double gumbel_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError(fmt::format("Gumbel quantile needs p in (0,1), got {}", p));
  }
  return -std::log(-std::log(p));
}

double order_joint_density(std::span<const double> t) {
  if (t.empty()) throw ValidationError("joint density needs at least one coordinate");
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0 && !(t[i] < t[i - 1])) return 0.0;
    sum += t[i];
  }
  return std::exp(-std::exp(-t.back()) - sum);
}

double order_marginal_cdf(int i, double t) {
  if (i < 1) throw ValidationError(fmt::format("order statistic index must be >= 1, got {}", i));
  const double e = std::exp(-t);
  double total = 0.0;
  for (int j = 0; j < i; ++j) {
    total += std::exp(-e - j * t - std::lgamma(j + 1.0));
  }
  return std::min(total, 1.0);
}

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ValidationError("KS distance of an empty sample");
  if (!std::is_sorted(sample.begin(), sample.end())) {
    throw ValidationError("KS distance needs a sorted sample");
  }
  const auto n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    worst = std::max({worst, std::abs((i + 1) / n - f), std::abs(i / n - f)});
  }
  return worst;
}

double ks_distance_discrete(std::span<const std::int64_t> sample,
                            const std::function<double(std::int64_t)>& cdf) {
  if (sample.empty()) throw ValidationError("KS distance of an empty sample");
  if (!std::is_sorted(sample.begin(), sample.end())) {
    throw ValidationError("KS distance needs a sorted sample");
  }
  const auto n = static_cast<double>(sample.size());
  double worst = cdf(sample.front() - 1);
  std::size_t i = 0;
  while (i < sample.size()) {
    const std::int64_t v = sample[i];
    while (i < sample.size() && sample[i] == v) ++i;
    const double empirical = static_cast<double>(i) / n;
    worst = std::max(worst, std::abs(empirical - cdf(v)));
    const std::int64_t next_below = i < sample.size() ? sample[i] - 1 : v;
    if (next_below > v) worst = std::max(worst, std::abs(empirical - cdf(next_below)));
  }
  return std::max(worst, 1.0 - cdf(sample.back()));
}

double sup_distance_to_gumbel(std::span<const double> atoms, std::span<const double> cdf_at_atoms) {
  if (atoms.empty() || atoms.size() != cdf_at_atoms.size()) {
    throw ValidationError("step CDF needs matching, nonempty atoms and values");
  }
  double worst = gumbel_cdf(atoms.front());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double f = cdf_at_atoms[i];
    worst = std::max(worst, std::abs(f - gumbel_cdf(atoms[i])));
    const double right = i + 1 < atoms.size() ? gumbel_cdf(atoms[i + 1]) : 1.0;
    worst = std::max(worst, std::abs(f - right));
  }
  return worst;
}

}  // namespace partgibbs
