#include "partgibbs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "partgibbs/errors.hpp"
#include "partgibbs/oracle.hpp"

namespace partgibbs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
        }
        return v;
      },
      cell);
}

nlohmann::ordered_json sampler_json(const SamplerConfig& s) {
  return {{"seed", s.seed},
          {"tail_tol", s.tail_tol},
          {"level_cap", s.level_cap},
          {"attempt_cap", s.attempt_cap}};
}

std::string label_for(const WeightSequence& seq, Statistics kind) {
  return fmt::format("{} {}", to_string(kind), seq.spec());
}

// Multiplicity-aware tie: two of the top entries coincide at a positive level.
bool has_tie(std::span<const std::int64_t> top) {
  for (std::size_t i = 1; i < top.size(); ++i) {
    if (top[i] > 0 && top[i] == top[i - 1]) return true;
  }
  return false;
}

}  // namespace

const Table& ExperimentReport::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::out_of_range(fmt::format("report '{}' has no table '{}'", experiment, name));
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << quote_csv(table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_real(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              out << quote_csv(v);
            } else {
              out << v;
            }
          },
          row[i]);
    }
    out << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["tool_version"] = kToolVersion;
  j["measure"] = report.measure;
  j["seed"] = report.seed;
  j["config"] = report.config;
  j["notes"] = report.notes;
  auto& tables = j["tables"];
  tables = nlohmann::ordered_json::object();
  for (const auto& t : report.tables) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (const auto& cell : row) r.push_back(cell_json(cell));
      rows.push_back(std::move(r));
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
  }
  j["wall_clock_seconds"] = report.wall_clock;
  return j;
}

RescalingChoice RescalingChoice::parse(const std::string& text) {
  RescalingChoice choice;
  if (text == "auto") return choice;
  if (text == "plane") {
    choice.kind = Kind::Plane;
    return choice;
  }
  if (text.rfind("gas", 0) == 0) {
    const auto seq = WeightSequence::parse("lattice" + text.substr(3));
    choice.kind = Kind::Gas;
    choice.d = std::get<LatticeWeights>(seq.kind()).d;
    return choice;
  }
  if (text.rfind("power", 0) == 0) {
    const auto p = std::get<PowerWeights>(WeightSequence::parse(text).kind());
    choice.kind = Kind::Power;
    choice.c = p.c;
    choice.beta = p.beta;
    return choice;
  }
  throw ValidationError(fmt::format("unknown rescaling '{}' (auto|power:c=..,beta=..|gas:d=..|plane)", text));
}

std::string RescalingChoice::spec() const {
  switch (kind) {
    case Kind::Auto: return "auto";
    case Kind::Power: return fmt::format("power:c={},beta={}", c, beta);
    case Kind::Gas: return fmt::format("gas:d={}", d);
    case Kind::Plane: return "plane";
  }
  return "auto";
}

RescalingSpec RescalingChoice::at(const WeightSequence& seq, double x) const {
  switch (kind) {
    case Kind::Auto: return rescaling_for(seq, x);
    case Kind::Power: return rescaling_power(c, beta, x);
    case Kind::Gas: return rescaling_gas(d, x);
    case Kind::Plane: return rescaling_plane(x);
  }
  return rescaling_for(seq, x);
}

std::vector<double> activity_grid(int first, int last) {
  if (first < 1 || last < first) {
    throw ValidationError(fmt::format("activity grid needs 1 <= j1 <= j2, got {}..{}", first, last));
  }
  if (last > 12) throw ValidationError("activity grid exponents above 12 are not supported");
  std::vector<double> xs;
  for (int j = first; j <= last; ++j) xs.push_back(1.0 - std::pow(10.0, -j));
  return xs;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw ValidationError("grid needs at least two points and hi > lo");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

ExperimentReport run_converge(const ConvergeConfig& cfg) {
  if (cfg.activities.empty()) throw ValidationError("converge needs at least one activity");
  for (std::size_t i = 1; i < cfg.activities.size(); ++i) {
    if (!(cfg.activities[i] > cfg.activities[i - 1])) {
      throw ValidationError("activity grid must be strictly increasing");
    }
  }
  if (cfg.t_grid.empty()) throw ValidationError("converge needs a nonempty t-grid");

  ExperimentReport report;
  report.experiment = "converge";
  report.measure = label_for(cfg.weights, cfg.kind);
  report.config = {{"measure", cfg.weights.spec()},
                   {"kind", to_string(cfg.kind)},
                   {"rescaling", cfg.rescaling.spec()},
                   {"activities", cfg.activities},
                   {"t_grid", cfg.t_grid},
                   {"tol", cfg.tol}};
  report.notes.push_back("exact tail-product law; no sampling");
  report.notes.push_back("level for threshold t is floor((shift + t) / scale)");

  Table distance{"distance", {"x", "one_minus_x", "scale", "shift", "horizon", "D", "t_at_sup"}, {}};
  Table curve{"curve", {"x", "t", "level", "cdf", "gumbel"}, {}};

  std::vector<std::int64_t> horizons;
  for (double x : cfg.activities) {
    horizons.push_back(truncation_level(MultiplicativeMeasure(cfg.weights, cfg.kind, x), cfg.tol));
  }
  if (const auto* lat = std::get_if<LatticeWeights>(&cfg.weights.kind())) {
    cached_lattice_counts(lat->d, *std::max_element(horizons.begin(), horizons.end()));
  }

  for (std::size_t i = 0; i < cfg.activities.size(); ++i) {
    Stopwatch clock;
    const double x = cfg.activities[i];
    const MultiplicativeMeasure m(cfg.weights, cfg.kind, x);
    const auto rescaling = cfg.rescaling.at(cfg.weights, x);
    std::vector<std::int64_t> levels;
    levels.reserve(cfg.t_grid.size());
    for (double t : cfg.t_grid) levels.push_back(rescaling.floor_level(t));
    const auto cdfs = max_cdfs(m, levels, cfg.tol);
    double sup = -1.0;
    double t_at_sup = kNaN;
    for (std::size_t j = 0; j < cfg.t_grid.size(); ++j) {
      const double g = gumbel_cdf(cfg.t_grid[j]);
      const double gap = std::abs(cdfs[j] - g);
      if (gap > sup) {
        sup = gap;
        t_at_sup = cfg.t_grid[j];
      }
      curve.rows.push_back({x, cfg.t_grid[j], levels[j], cdfs[j], g});
    }
    distance.rows.push_back(
        {x, 1.0 - x, rescaling.scale, rescaling.shift, horizons[i], sup, t_at_sup});
    report.wall_clock.push_back(clock.seconds());
  }
  report.tables.push_back(std::move(distance));
  report.tables.push_back(std::move(curve));
  return report;
}

ExperimentReport run_order_stats(const OrderStatsConfig& cfg) {
  if (cfg.d < 1) throw ValidationError("order statistics need d >= 1");
  if (cfg.samples < 1) throw ValidationError("order statistics need at least one sample");
  if (cfg.activities.empty()) throw ValidationError("order statistics need an activity");

  ExperimentReport report;
  report.experiment = "order";
  report.measure = label_for(cfg.weights, cfg.kind);
  report.seed = cfg.sampler.seed;
  report.config = {{"measure", cfg.weights.spec()},
                   {"kind", to_string(cfg.kind)},
                   {"rescaling", cfg.rescaling.spec()},
                   {"activities", cfg.activities},
                   {"d", cfg.d},
                   {"samples", cfg.samples},
                   {"sampler", sampler_json(cfg.sampler)},
                   {"tol", cfg.tol}};
  report.notes.push_back("ks_max_exact compares sampled maxima with the exact finite-x law");
  report.notes.push_back("ks_m<i> compares rescaled i-th maxima with the limit marginal G_i");

  Table table{"order",
              {"x", "one_minus_x", "scale", "shift", "horizon", "truncation_bias", "samples",
               "ks_max_exact", "ks_bound"},
              {}};
  for (int i = 1; i <= cfg.d; ++i) table.columns.push_back(fmt::format("ks_m{}", i));
  table.columns.push_back("tie_rate");

  const auto n = static_cast<std::size_t>(cfg.samples);
  const int width = std::max(cfg.d, 2);
  for (double x : cfg.activities) {
    Stopwatch clock;
    const MultiplicativeMeasure m(cfg.weights, cfg.kind, x);
    const auto rescaling = cfg.rescaling.at(cfg.weights, x);
    const PartitionSampler sampler(m, cfg.sampler);

    std::vector<std::int64_t> tops(n * static_cast<std::size_t>(width));
    parallel_for(n, cfg.sampler.threads, [&](std::size_t i) {
      auto rng = make_rng(cfg.sampler.seed, i);
      const auto top = sampler.sample_top(rng, width);
      std::copy(top.begin(), top.end(), tops.begin() + static_cast<std::ptrdiff_t>(i * width));
    });

    std::vector<std::int64_t> maxima(n);
    std::size_t ties = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const std::int64_t> top(tops.data() + i * width, static_cast<std::size_t>(width));
      maxima[i] = top[0];
      if (has_tie(top.first(static_cast<std::size_t>(cfg.d == 1 ? 2 : cfg.d)))) ++ties;
    }
    std::sort(maxima.begin(), maxima.end());
    const std::int64_t lo = maxima.front() - 1;
    std::vector<std::int64_t> levels(static_cast<std::size_t>(maxima.back() - lo + 1));
    std::iota(levels.begin(), levels.end(), lo);
    const auto cdf_table = max_cdfs(m, levels, cfg.tol);
    const double ks_exact = ks_distance_discrete(maxima, [&](std::int64_t v) {
      return cdf_table[static_cast<std::size_t>(v - lo)];
    });

    std::vector<Cell> row{x,        1.0 - x, rescaling.scale, rescaling.shift, sampler.horizon(),
                          sampler.truncation_bias(), cfg.samples, ks_exact,
                          1.95 / std::sqrt(static_cast<double>(n))};
    for (int i = 0; i < cfg.d; ++i) {
      std::vector<double> values(n);
      for (std::size_t s = 0; s < n; ++s) {
        values[s] = rescaling.rescale(static_cast<double>(tops[s * width + static_cast<std::size_t>(i)]));
      }
      std::sort(values.begin(), values.end());
      row.push_back(ks_distance(values, [i](double t) { return order_marginal_cdf(i + 1, t); }));
    }
    row.push_back(static_cast<double>(ties) / static_cast<double>(n));
    table.rows.push_back(std::move(row));
    report.wall_clock.push_back(clock.seconds());
  }
  report.tables.push_back(std::move(table));
  return report;
}

ExperimentReport run_small_canonical(const SmallCanonicalConfig& cfg) {
  if (cfg.ns.empty()) throw ValidationError("small canonical run needs at least one n");
  if (cfg.samples < 1) throw ValidationError("small canonical run needs at least one sample");

  ExperimentReport report;
  report.experiment = "small";
  report.measure = label_for(cfg.weights, Statistics::Bose);
  report.seed = cfg.sampler.seed;
  report.config = {{"measure", cfg.weights.spec()},
                   {"ns", cfg.ns},
                   {"samples", cfg.samples},
                   {"sampler", sampler_json(cfg.sampler)},
                   {"exact_limit", cfg.exact_limit}};
  report.notes.push_back(
      "CONJECTURAL: Gumbel behaviour of small-canonical maxima presumes equivalence of ensembles; "
      "reported, not asserted");

  // Coefficients of log n and log log n in A_n.
  double log_coef = kNaN;
  double loglog_coef = kNaN;
  if (const auto* lat = std::get_if<LatticeWeights>(&cfg.weights.kind())) {
    log_coef = lat->d / (lat->d + 2.0);
    loglog_coef = (lat->d - 2.0) / 2.0;
  } else if (!cfg.weights.is_tabulated()) {
    const auto law = effective_power_law(cfg.weights);
    log_coef = (law.beta + 1.0) / (law.beta + 2.0);
    loglog_coef = law.beta;
  }
  report.config["log_n_coefficient"] = log_coef;
  report.config["loglog_n_coefficient"] = loglog_coef;

  Table table{"small",
              {"n", "x", "samples", "acceptance_rate", "scale", "shift", "log_n_coef",
               "loglog_n_coef", "ks_gumbel_sampled", "ks_gumbel_exact", "max_z", "crossval",
               "status"},
              {}};
  Table histogram{"histogram", {"n", "M", "count", "expected", "z"}, {}};

  const auto count = static_cast<std::size_t>(cfg.samples);
  for (std::int64_t n : cfg.ns) {
    Stopwatch clock;
    const SmallCanonicalSampler sampler(cfg.weights, n, cfg.sampler);
    std::vector<std::int64_t> maxima(count);
    std::vector<std::int64_t> attempts(count);
    parallel_for(count, cfg.sampler.threads, [&](std::size_t i) {
      auto rng = make_rng(cfg.sampler.seed, i);
      auto [p, tries] = sampler.sample(rng);
      maxima[i] = p.max();
      attempts[i] = tries;
    });
    const double total_attempts =
        static_cast<double>(std::accumulate(attempts.begin(), attempts.end(), std::int64_t{0}));

    double scale = kNaN;
    double shift = kNaN;
    double ks_sampled = kNaN;
    double ks_exact = kNaN;
    if (n >= 3 && !cfg.weights.is_tabulated()) {
      scale = scale_small_canonical(cfg.weights, n);
      shift = shift_small_canonical(cfg.weights, n);
      std::vector<double> values(count);
      for (std::size_t i = 0; i < count; ++i) values[i] = scale * static_cast<double>(maxima[i]) - shift;
      std::sort(values.begin(), values.end());
      ks_sampled = ks_distance(values, gumbel_cdf);
    }

    double max_z = kNaN;
    std::string crossval = "n/a";
    if (n <= cfg.exact_limit) {
      const auto law = small_canonical_max_law(cfg.weights, n);
      if (std::isfinite(scale)) {
        std::vector<double> atoms(law.size());
        for (std::size_t M = 0; M < law.size(); ++M) atoms[M] = scale * static_cast<double>(M) - shift;
        ks_exact = sup_distance_to_gumbel(atoms, law);
      }
      std::vector<std::int64_t> counts(law.size(), 0);
      for (auto v : maxima) ++counts[static_cast<std::size_t>(v)];
      max_z = 0.0;
      const double N = static_cast<double>(count);
      for (std::size_t M = 0; M < law.size(); ++M) {
        const double p = law[M] - (M ? law[M - 1] : 0.0);
        const double expected = N * p;
        const double sigma = std::sqrt(N * p * (1.0 - p));
        const double diff = std::abs(static_cast<double>(counts[M]) - expected);
        const double z = sigma > 0.0 ? diff / sigma
                                     : (diff < 0.5 ? 0.0 : std::numeric_limits<double>::infinity());
        max_z = std::max(max_z, z);
        histogram.rows.push_back({n, static_cast<std::int64_t>(M), counts[M], expected, z});
      }
      crossval = max_z <= 4.0 ? "pass" : "fail";
    }
    table.rows.push_back({n, sampler.activity(), cfg.samples,
                          static_cast<double>(count) / total_attempts, scale, shift, log_coef,
                          loglog_coef, ks_sampled, ks_exact, max_z, crossval,
                          std::string("CONJECTURAL")});
    report.wall_clock.push_back(clock.seconds());
  }
  report.tables.push_back(std::move(table));
  report.tables.push_back(std::move(histogram));
  return report;
}

ExperimentReport run_oracle(const OracleConfig& cfg) {
  if (cfg.n_max < 0) throw ValidationError("n max must be >= 0");
  if (cfg.n_max > cfg.budget) {
    throw ResourceError(fmt::format("n max {} exceeds the enumeration budget {}", cfg.n_max, cfg.budget));
  }
  const auto& seq = cfg.weights;
  ExperimentReport report;
  report.experiment = "oracle";
  report.measure = label_for(seq, Statistics::Bose);
  report.config = {{"measure", seq.spec()},
                   {"n_max", cfg.n_max},
                   {"lattice_levels", cfg.lattice_levels},
                   {"budget", cfg.budget},
                   {"activities", cfg.activities},
                   {"x_independence_tol", cfg.x_independence_tol}};

  Table table{"oracle", {"check", "parameter", "max_abs_error", "status"}, {}};
  auto add = [&](std::string check, std::string parameter, double error, bool ok) {
    table.rows.push_back({std::move(check), std::move(parameter), error,
                          std::string(ok ? "pass" : "fail")});
  };

  const auto counts = weighted_counts(seq, cfg.n_max);
  if (counts.is_exact()) {
    const auto brute = oracle::weighted_counts(seq, cfg.n_max);
    double worst = 0.0;
    bool equal = true;
    for (std::size_t n = 0; n < brute.size(); ++n) {
      if (brute[n] != counts.exact[n]) {
        equal = false;
        const BigInt diff = abs(BigInt(brute[n] - counts.exact[n]));
        worst = std::max(worst, static_cast<double>(diff));
      }
    }
    add("counts_vs_enumeration", fmt::format("n<={}", cfg.n_max), worst, equal);
  } else {
    add("counts_vs_enumeration", "non-integer weights", kNaN, true);
  }

  if (const auto* p = std::get_if<PowerWeights>(&seq.kind()); p && p->c == 1.0 && p->beta == 0.0) {
    const auto numbers = oracle::partition_numbers(cfg.n_max);
    double worst = 0.0;
    for (std::size_t n = 0; n < numbers.size(); ++n) {
      worst = std::max(worst, std::abs(static_cast<double>(numbers[n]) - counts.q[n]));
    }
    add("partition_numbers", fmt::format("n<={}", cfg.n_max), worst, worst == 0.0);
  }
  if (seq.is_plane_diagonal()) {
    const auto plane = oracle::plane_partition_counts(cfg.n_max);
    double worst = 0.0;
    for (std::size_t n = 0; n < plane.size(); ++n) {
      worst = std::max(worst, std::abs(static_cast<double>(plane[n]) - counts.q[n]));
    }
    add("plane_partitions", fmt::format("n<={}", cfg.n_max), worst, worst == 0.0);
  }

  {
    double worst = 0.0;
    for (std::int64_t n = 1; n <= cfg.n_max; ++n) {
      if (counts.q[static_cast<std::size_t>(n)] == 0.0) continue;
      const auto fast = small_canonical_max_law(seq, n, cfg.budget);
      const auto brute = oracle::small_canonical_max_law(seq, n);
      for (std::size_t M = 0; M < fast.size(); ++M) worst = std::max(worst, std::abs(fast[M] - brute[M]));
    }
    add("small_canonical_max_cdf", fmt::format("n<={}", cfg.n_max), worst, worst <= 1e-12);
  }

  {
    const std::int64_t top = std::min<std::int64_t>(cfg.n_max, 20);
    double worst = 0.0;
    for (std::int64_t n = 1; n <= top; ++n) {
      if (counts.q[static_cast<std::size_t>(n)] == 0.0) continue;
      const auto listed = enumerate_partitions(seq, n, cfg.budget);
      for (double x : cfg.activities) {
        const MultiplicativeMeasure m(seq, Statistics::Bose, x);
        const double log_F = log_tail_product(m, 0);
        std::vector<double> log_p;
        log_p.reserve(listed.size());
        for (const auto& wp : listed) {
          double lp = static_cast<double>(n) * m.log_x() - log_F;
          for (const auto& [k, r] : wp.partition.occupations()) {
            lp += log_occupation_coefficient(Statistics::Bose, seq.at(k), r);
          }
          log_p.push_back(lp);
        }
        const double peak = *std::max_element(log_p.begin(), log_p.end());
        double norm = 0.0;
        for (double lp : log_p) norm += std::exp(lp - peak);
        for (std::size_t i = 0; i < listed.size(); ++i) {
          const double conditional = std::exp(log_p[i] - peak) / norm;
          worst = std::max(worst, std::abs(conditional - listed[i].probability));
        }
      }
    }
    add("x_independence", fmt::format("n<={}", top), worst, worst <= cfg.x_independence_tol);
  }

  if (const auto* lat = std::get_if<LatticeWeights>(&seq.kind())) {
    const auto fast = lattice_counts(lat->d, cfg.lattice_levels);
    const auto brute = oracle::lattice_counts(lat->d, cfg.lattice_levels);
    double worst = 0.0;
    for (std::size_t k = 0; k < brute.size(); ++k) {
      worst = std::max(worst, std::abs(static_cast<double>(brute[k] - fast.j[k])));
    }
    add("lattice_convolution", fmt::format("d={},K={}", lat->d, cfg.lattice_levels), worst,
        worst == 0.0);
  }

  report.tables.push_back(std::move(table));
  return report;
}

bool oracle_passed(const ExperimentReport& report) {
  for (const auto& row : report.table("oracle").rows) {
    if (std::get<std::string>(row.back()) != "pass") return false;
  }
  return true;
}

}  // namespace partgibbs
