#ifndef PARTGIBBS_HARNESS_HPP
#define PARTGIBBS_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "partgibbs/asymptotics.hpp"
#include "partgibbs/measure.hpp"
#include "partgibbs/sampler.hpp"
#include "partgibbs/weights.hpp"

namespace partgibbs {

inline constexpr const char* kToolVersion = "0.1.0";

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ExperimentReport {
  std::string experiment;
  std::string measure;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
  std::vector<Table> tables;
  /// Seconds spent per grid point; JSON only, so CSV stays byte-reproducible.
  std::vector<double> wall_clock;
  std::vector<std::string> notes;

  const Table& table(const std::string& name) const;
};

/// 17 significant digits, "nan"/"inf" for non-finite values.
std::string format_real(double v);

void write_csv(const Table& table, std::ostream& out);
std::string to_csv(const Table& table);
nlohmann::ordered_json to_json(const ExperimentReport& report);

/// Rescaling used by an experiment: the sequence's natural one or an explicit override.
struct RescalingChoice {
  enum class Kind { Auto, Power, Gas, Plane } kind = Kind::Auto;
  double c = 1.0;
  double beta = 0.0;
  int d = 3;

  /// Parses `auto`, `power:c=1,beta=0`, `gas:d=3` or `plane`.
  static RescalingChoice parse(const std::string& text);
  std::string spec() const;
  RescalingSpec at(const WeightSequence& seq, double x) const;
};

/// Activities x_j = 1 - 10^{-j} for j = first..last.
std::vector<double> activity_grid(int first, int last);

/// `points` uniform values on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int points);

struct ConvergeConfig {
  WeightSequence weights = WeightSequence::power(1.0, 0.0);
  Statistics kind = Statistics::Bose;
  RescalingChoice rescaling;
  std::vector<double> activities = activity_grid(1, 5);
  std::vector<double> t_grid = uniform_grid(-4.0, 8.0, 241);
  double tol = kDefaultTailTol;
};

/// Exact sup-distance D(x) between the rescaled max law and the Gumbel law on the t-grid.
/// Tables: "distance" (one row per activity) and "curve" (one row per (x, t)).
ExperimentReport run_converge(const ConvergeConfig& cfg);

struct OrderStatsConfig {
  WeightSequence weights = WeightSequence::power(1.0, 0.0);
  Statistics kind = Statistics::Bose;
  RescalingChoice rescaling;
  std::vector<double> activities{0.9999};
  int d = 2;
  std::int64_t samples = 100'000;
  SamplerConfig sampler;
  double tol = kDefaultTailTol;
};

/// Sampled top-d statistics: exact-law KS of the maximum, KS of each rescaled
/// coordinate against its limit marginal, and tie rates. Table "order".
ExperimentReport run_order_stats(const OrderStatsConfig& cfg);

struct SmallCanonicalConfig {
  WeightSequence weights = WeightSequence::power(1.0, 0.0);
  std::vector<std::int64_t> ns{50, 200, 800};
  std::int64_t samples = 10'000;
  SamplerConfig sampler;
  /// Sizes up to this use the exact small-canonical law as well.
  std::int64_t exact_limit = 25;
};

/// Small-canonical maxima by rejection sampling. Tables "small" and "histogram".
ExperimentReport run_small_canonical(const SmallCanonicalConfig& cfg);

struct OracleConfig {
  WeightSequence weights = WeightSequence::power(1.0, 0.0);
  std::int64_t n_max = 25;
  std::int64_t lattice_levels = 500;
  std::int64_t budget = kDefaultEnumerationBudget;
  std::vector<double> activities{0.3, 0.5, 0.7};
  double x_independence_tol = 1e-9;
};

/// Cross-validation of fast routes against enumeration. Table "oracle".
ExperimentReport run_oracle(const OracleConfig& cfg);

/// True when every row of the "oracle" table passed.
bool oracle_passed(const ExperimentReport& report);

}  // namespace partgibbs

#endif  // PARTGIBBS_HARNESS_HPP
