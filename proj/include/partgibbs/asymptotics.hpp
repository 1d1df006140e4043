#ifndef PARTGIBBS_ASYMPTOTICS_HPP
#define PARTGIBBS_ASYMPTOTICS_HPP

#include <cstdint>
#include <functional>
#include <span>

#include "partgibbs/measure.hpp"
#include "partgibbs/weights.hpp"

namespace partgibbs {

/// Affine normalisation of the maximal summand: t = m * scale - shift.
struct RescalingSpec {
  double scale = 1.0;
  double shift = 0.0;

  double rescale(double m) const { return m * scale - shift; }
  /// Real level M(x,t) = (shift + t) / scale; rescale(level(t)) == t.
  double level(double t) const { return (shift + t) / scale; }
  /// Integer level used for threshold t.
  std::int64_t floor_level(double t) const;
};

RescalingSpec rescaling_power(double c, double beta, double x);
RescalingSpec rescaling_gas(int d, double x);
RescalingSpec rescaling_plane(double x);

/// Natural rescaling of a weight sequence (power, lattice gas, plane diagonal).
/// Throws ValidationError for tabulated sequences.
RescalingSpec rescaling_for(const WeightSequence& seq, double x);

enum class CalibrationMode { ClosedForm, Numeric };

/// Activity whose grand canonical expected weight is n.
double calibrate_x(const WeightSequence& seq, double n,
                   CalibrationMode mode = CalibrationMode::ClosedForm,
                   int max_iterations = 200);

/// Small canonical shift A_n (n >= 3).
double shift_small_canonical(const WeightSequence& seq, std::int64_t n);

/// Small canonical scale (c Gamma(beta+2) zeta(beta+2) / n)^{1/(beta+2)} (gas analogue for lattices).
double scale_small_canonical(const WeightSequence& seq, std::int64_t n);

/// Effective (c, beta) of the power law that a power, plane or lattice sequence follows.
struct PowerLaw {
  double c;
  double beta;
};
PowerLaw effective_power_law(const WeightSequence& seq);

double gumbel_cdf(double t);
double gumbel_pdf(double t);
double gumbel_quantile(double p);

/// exp(-e^{-t_d} - sum t_i) on t_1 > ... > t_d, zero elsewhere.
double order_joint_density(std::span<const double> t);

/// Limit CDF of the i-th largest rescaled summand.
double order_marginal_cdf(int i, double t);

/// Continuous-CDF Kolmogorov-Smirnov distance of a sorted sample.
double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)>& cdf);

/// Exact sup |F_N - F| for an integer-valued sorted sample against an integer-supported CDF.
double ks_distance_discrete(std::span<const std::int64_t> sorted_sample,
                            const std::function<double(std::int64_t)>& cdf);

/// sup_t |F(t) - gumbel_cdf(t)| for a step CDF with atoms at `atoms` (sorted) and
/// values `cdf_at_atoms` (F right-continuous, F = 0 below the first atom).
double sup_distance_to_gumbel(std::span<const double> atoms, std::span<const double> cdf_at_atoms);

}  // namespace partgibbs

#endif  // PARTGIBBS_ASYMPTOTICS_HPP
