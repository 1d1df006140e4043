// partgibbs: experiments on multiplicative measures over integer partitions.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "partgibbs/errors.hpp"
#include "partgibbs/harness.hpp"

using namespace partgibbs;

namespace {

const char* kJsonHelp = R"(JSON envelope (--format json), keys in order:
  experiment          subcommand name
  tool_version        version of this tool
  measure             "<kind> <weight spec>"
  seed                RNG seed (0 for exact runs)
  config              every option needed to reproduce the run
  notes               free-text remarks, e.g. CONJECTURAL labels
  tables              {name: {columns: [...], rows: [[...], ...]}}
  wall_clock_seconds  time per grid point (not part of the CSV output)
Non-finite reals are written as null in JSON and nan/inf in CSV.

Exit codes: 0 success, 2 invalid input, 3 resource or budget exhausted.)";

struct Common {
  std::string measure = "power:c=1,beta=0";
  std::string kind = "bose";
  std::optional<double> x;
  std::string x_grid;
  std::int64_t n = 25;
  std::int64_t samples = 100'000;
  std::uint64_t seed = 0;
  double tol = kDefaultTailTol;
  std::string out;
  std::string format = "csv";
  int threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--measure", c.measure, "weight spec: power:c=..,beta=.. | lattice:d=.. | plane | table:@file.csv")
      ->capture_default_str();
  app->add_option("--out", c.out, "output path; extra tables go to <path>.<table>.csv");
  app->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void add_kind(CLI::App* app, Common& c) {
  app->add_option("--kind", c.kind, "bose or fermi")->capture_default_str();
  app->add_option("--tol", c.tol, "tail truncation tolerance")->capture_default_str();
}

void add_activity(CLI::App* app, Common& c, bool grid) {
  auto* single = app->add_option("--x", c.x, "activity in (0,1)");
  if (grid) {
    app->add_option("--x-grid", c.x_grid, "activities 1-10^-j for j = j1..j2, written j1..j2")
        ->excludes(single);
  }
}

void add_sampling(CLI::App* app, Common& c) {
  app->add_option("--samples", c.samples, "number of samples")->capture_default_str();
  app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads; output does not depend on it")
      ->capture_default_str();
}

std::vector<double> activities(const Common& c, std::vector<double> fallback) {
  if (c.x) return {*c.x};
  if (c.x_grid.empty()) return fallback;
  const auto dots = c.x_grid.find("..");
  if (dots == std::string::npos) throw ValidationError("--x-grid expects j1..j2");
  try {
    return activity_grid(std::stoi(c.x_grid.substr(0, dots)), std::stoi(c.x_grid.substr(dots + 2)));
  } catch (const std::logic_error&) {
    throw ValidationError(fmt::format("bad --x-grid '{}'", c.x_grid));
  }
}

SamplerConfig sampler_config(const Common& c, double tail_tol) {
  SamplerConfig s;
  s.seed = c.seed;
  s.tail_tol = tail_tol;
  s.threads = c.threads;
  return s;
}

void emit(const ExperimentReport& report, const Common& c) {
  if (c.format == "json") {
    const auto text = to_json(report).dump(2) + "\n";
    if (c.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw ResourceError(fmt::format("cannot write {}", c.out));
      f << text;
    }
    return;
  }
  if (c.out.empty()) {
    for (std::size_t i = 0; i < report.tables.size(); ++i) {
      if (report.tables.size() > 1) std::cout << "# " << report.tables[i].name << '\n';
      write_csv(report.tables[i], std::cout);
    }
    return;
  }
  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    const auto path = i == 0 ? c.out : fmt::format("{}.{}.csv", c.out, report.tables[i].name);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ResourceError(fmt::format("cannot write {}", path));
    write_csv(report.tables[i], f);
  }
}

ExperimentReport run_counts(const Common& c) {
  const auto seq = WeightSequence::parse(c.measure);
  const auto counts = weighted_counts(seq, c.n);
  ExperimentReport report;
  report.experiment = "counts";
  report.measure = seq.spec();
  report.config = {{"measure", seq.spec()}, {"n", c.n}};
  Table t{"counts", {"n", "Q", "exact"}, {}};
  for (std::int64_t n = 0; n <= c.n; ++n) {
    const auto i = static_cast<std::size_t>(n);
    t.rows.push_back({n, counts.q[i],
                      counts.is_exact() ? counts.exact[i].str() : std::string("n/a")});
  }
  report.tables.push_back(std::move(t));
  return report;
}

ExperimentReport run_cdf(const Common& c, std::int64_t lo, std::int64_t hi, std::int64_t step,
                         const std::string& rescaling) {
  if (!c.x) throw ValidationError("cdf needs --x");
  if (hi < lo || step < 1) throw ValidationError("cdf needs m-min <= m-max and step >= 1");
  const MultiplicativeMeasure m(WeightSequence::parse(c.measure), parse_statistics(c.kind), *c.x);
  const auto choice = RescalingChoice::parse(rescaling);
  std::optional<RescalingSpec> spec;
  if (!m.weights().is_tabulated() || choice.kind != RescalingChoice::Kind::Auto) {
    spec = choice.at(m.weights(), m.x());
  }
  std::vector<std::int64_t> levels;
  for (std::int64_t M = lo; M <= hi; M += step) levels.push_back(M);
  const auto tails = log_tail_products(m, levels, c.tol);

  ExperimentReport report;
  report.experiment = "cdf";
  report.measure = fmt::format("{} {}", to_string(m.kind()), m.weights().spec());
  report.config = {{"measure", m.weights().spec()}, {"kind", c.kind}, {"x", m.x()},
                   {"m_min", lo},  {"m_max", hi},  {"step", step},
                   {"rescaling", choice.spec()}, {"tol", c.tol}};
  Table t{"cdf", {"M", "log_tail", "cdf", "t", "gumbel"}, {}};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double cdf = std::exp(-tails[i]);
    double tt = std::numeric_limits<double>::quiet_NaN();
    double g = tt;
    if (spec) {
      tt = spec->rescale(static_cast<double>(levels[i]));
      g = gumbel_cdf(tt);
    }
    t.rows.push_back({levels[i], tails[i], cdf, tt, g});
  }
  report.tables.push_back(std::move(t));
  return report;
}

ExperimentReport run_sample(const Common& c, int d, double tail_tol) {
  if (!c.x) throw ValidationError("sample needs --x");
  if (d < 1) throw ValidationError("--d must be >= 1");
  if (c.samples < 1) throw ValidationError("--samples must be >= 1");
  const MultiplicativeMeasure m(WeightSequence::parse(c.measure), parse_statistics(c.kind), *c.x);
  const auto cfg = sampler_config(c, tail_tol);
  const PartitionSampler sampler(m, cfg);
  const auto count = static_cast<std::size_t>(c.samples);
  std::vector<Partition> parts(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    auto rng = make_rng(cfg.seed, i);
    parts[i] = sampler.sample(rng);
  });

  ExperimentReport report;
  report.experiment = "sample";
  report.measure = fmt::format("{} {}", to_string(m.kind()), m.weights().spec());
  report.seed = cfg.seed;
  report.config = {{"measure", m.weights().spec()}, {"kind", c.kind}, {"x", m.x()},
                   {"samples", c.samples}, {"seed", cfg.seed}, {"d", d}, {"tail_tol", tail_tol},
                   {"horizon", sampler.horizon()}};
  Table t{"samples", {"sample_index", "weight", "length", "max"}, {}};
  for (int i = 1; i <= d; ++i) t.columns.push_back(fmt::format("m{}", i));
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Cell> row{static_cast<std::int64_t>(i), parts[i].weight(), parts[i].length(),
                          parts[i].max()};
    for (auto v : top_order_statistics(parts[i], d)) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  report.tables.push_back(std::move(t));
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative measures on integer partitions: exact max laws, samplers and Gumbel checks"};
  app.footer(kJsonHelp);
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common c;
  std::string rescaling = "auto";
  double t_min = -4.0, t_max = 8.0;
  int t_points = 241;
  int d = 2;
  double tail_tol = 1e-9;
  std::vector<std::int64_t> n_list;
  std::int64_t lattice_levels = 500;
  std::int64_t budget = kDefaultEnumerationBudget;
  std::int64_t exact_limit = 25;
  std::int64_t m_min = 0, m_max = 100, step = 1;

  auto* converge = app.add_subcommand("converge", "exact sup-distance to Gumbel along an activity grid");
  add_common(converge, c);
  add_kind(converge, c);
  add_activity(converge, c, true);
  converge->add_option("--rescaling", rescaling, "auto | power:c=..,beta=.. | gas:d=.. | plane")
      ->capture_default_str();
  converge->add_option("--t-min", t_min)->capture_default_str();
  converge->add_option("--t-max", t_max)->capture_default_str();
  converge->add_option("--t-points", t_points)->capture_default_str();

  auto* order = app.add_subcommand("order", "sampled top-d order statistics against their limit laws");
  add_common(order, c);
  add_kind(order, c);
  add_activity(order, c, true);
  add_sampling(order, c);
  order->add_option("--rescaling", rescaling)->capture_default_str();
  order->add_option("--d", d, "number of order statistics")->capture_default_str();
  order->add_option("--tail-tol", tail_tol, "sampler truncation tolerance")->capture_default_str();

  auto* small = app.add_subcommand("small", "small canonical maxima by rejection sampling");
  add_common(small, c);
  add_sampling(small, c);
  small->add_option("--n", n_list, "sizes n (repeatable)")->expected(1, -1);
  small->add_option("--exact-limit", exact_limit, "largest n checked against the exact law")
      ->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "cross-check fast routes against enumeration");
  add_common(oracle, c);
  oracle->add_option("--n", c.n, "largest n enumerated")->capture_default_str();
  oracle->add_option("--lattice-levels", lattice_levels)->capture_default_str();
  oracle->add_option("--budget", budget, "enumeration budget")->capture_default_str();

  auto* counts = app.add_subcommand("counts", "weighted partition counts Q(0..n)");
  add_common(counts, c);
  counts->add_option("--n", c.n)->capture_default_str();

  auto* cdf = app.add_subcommand("cdf", "exact CDF of the largest summand");
  add_common(cdf, c);
  add_kind(cdf, c);
  add_activity(cdf, c, false);
  cdf->add_option("--m-min", m_min)->capture_default_str();
  cdf->add_option("--m-max", m_max)->capture_default_str();
  cdf->add_option("--step", step)->capture_default_str();
  cdf->add_option("--rescaling", rescaling)->capture_default_str();

  auto* sample = app.add_subcommand("sample", "draw partitions and list summary statistics");
  add_common(sample, c);
  add_kind(sample, c);
  add_activity(sample, c, false);
  add_sampling(sample, c);
  sample->add_option("--d", d, "number of order statistics listed")->capture_default_str();
  sample->add_option("--tail-tol", tail_tol)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentReport report;
    if (*converge) {
      ConvergeConfig cfg;
      cfg.weights = WeightSequence::parse(c.measure);
      cfg.kind = parse_statistics(c.kind);
      cfg.rescaling = RescalingChoice::parse(rescaling);
      cfg.activities = activities(c, activity_grid(1, 5));
      cfg.t_grid = uniform_grid(t_min, t_max, t_points);
      cfg.tol = c.tol;
      report = run_converge(cfg);
    } else if (*order) {
      OrderStatsConfig cfg;
      cfg.weights = WeightSequence::parse(c.measure);
      cfg.kind = parse_statistics(c.kind);
      cfg.rescaling = RescalingChoice::parse(rescaling);
      cfg.activities = activities(c, {0.9999});
      cfg.d = d;
      cfg.samples = c.samples;
      cfg.sampler = sampler_config(c, tail_tol);
      cfg.tol = c.tol;
      report = run_order_stats(cfg);
    } else if (*small) {
      SmallCanonicalConfig cfg;
      cfg.weights = WeightSequence::parse(c.measure);
      if (!n_list.empty()) cfg.ns = n_list;
      cfg.samples = small->count("--samples") ? c.samples : cfg.samples;
      cfg.sampler = sampler_config(c, tail_tol);
      cfg.exact_limit = exact_limit;
      report = run_small_canonical(cfg);
    } else if (*oracle) {
      OracleConfig cfg;
      cfg.weights = WeightSequence::parse(c.measure);
      cfg.n_max = c.n;
      cfg.lattice_levels = lattice_levels;
      cfg.budget = budget;
      report = run_oracle(cfg);
    } else if (*counts) {
      report = run_counts(c);
    } else if (*cdf) {
      report = run_cdf(c, m_min, m_max, step, rescaling);
    } else {
      report = run_sample(c, d, tail_tol);
    }
    emit(report, c);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
