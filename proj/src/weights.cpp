#include "partgibbs/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "partgibbs/errors.hpp"

namespace partgibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Output tile for the sparse convolution; keeps the accumulator in L2.
constexpr std::int64_t kConvolutionTile = 32768;

std::vector<std::int64_t> convolve_with_squares(const std::vector<std::int64_t>& prev) {
  const auto K = static_cast<std::int64_t>(prev.size()) - 1;
  std::vector<std::int64_t> out(prev);
  const std::int64_t mmax = isqrt(K);
  std::int64_t* o = out.data();
  for (std::int64_t lo = 0; lo <= K; lo += kConvolutionTile) {
    const std::int64_t hi = std::min(K + 1, lo + kConvolutionTile);
    for (std::int64_t m = 1; m <= mmax; ++m) {
      const std::int64_t sq = m * m;
      if (sq >= hi) break;
      const std::int64_t* p = prev.data() - sq;
      for (std::int64_t k = std::max(lo, sq); k < hi; ++k) o[k] += 2 * p[k];
    }
  }
  return out;
}

struct LatticeCache {
  std::mutex mutex;
  std::map<int, std::shared_ptr<const LatticeCountTable>> tables;
  std::size_t cap = kDefaultLatticeTableCap;
};

LatticeCache& lattice_cache() {
  static LatticeCache cache;
  return cache;
}

double parse_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(fmt::format("weight spec: bad value '{}' for '{}'", text, key));
  }
  return value;
}

std::map<std::string, std::string, std::less<>> parse_params(std::string_view text) {
  std::map<std::string, std::string, std::less<>> params;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ValidationError(fmt::format("weight spec: expected key=value, got '{}'", item));
    }
    params.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return params;
}

// log of sum_{k>K} A k^q y^k given A k^q y^k has ratio <= y (1+1/k)^growth.
double log_geometric_tail(double log_amplitude, double q, double growth, std::int64_t K,
                          double log_y) {
  const double k1 = static_cast<double>(K) + 1.0;
  const double log_ratio = log_y + growth * std::log1p(1.0 / k1);
  if (log_ratio >= 0.0) return kInf;
  return log_amplitude + q * std::log(k1) + k1 * log_y - std::log(-std::expm1(log_ratio));
}

}  // namespace

LatticeCountTable lattice_counts(int d, std::int64_t K, std::size_t cap) {
  if (d < 1) throw ValidationError(fmt::format("lattice dimension must be >= 1, got {}", d));
  if (K < 0) throw ValidationError(fmt::format("lattice table size must be >= 0, got {}", K));
  if (static_cast<std::size_t>(K) + 1 > cap) {
    throw ResourceError(fmt::format("lattice table of {} entries exceeds cap {}", K + 1, cap));
  }
  std::vector<std::int64_t> j(static_cast<std::size_t>(K) + 1, 0);
  for (std::int64_t m = 0; m * m <= K; ++m) j[static_cast<std::size_t>(m * m)] = m == 0 ? 1 : 2;
  for (int step = 2; step <= d; ++step) j = convolve_with_squares(j);

  LatticeCountTable table;
  table.d = d;
  table.cumulative.resize(j.size());
  std::int64_t running = 0;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (__builtin_add_overflow(running, j[k], &running)) {
      throw ResourceError(fmt::format("J_{}({}) overflows 64-bit integers", d, k));
    }
    table.cumulative[k] = running;
  }
  table.j = std::move(j);
  return table;
}

std::shared_ptr<const LatticeCountTable> cached_lattice_counts(int d, std::int64_t K) {
  auto& cache = lattice_cache();
  std::lock_guard lock(cache.mutex);
  auto it = cache.tables.find(d);
  if (it != cache.tables.end() && it->second->max_level() >= K) return it->second;
  auto table = std::make_shared<const LatticeCountTable>(lattice_counts(d, K, cache.cap));
  cache.tables[d] = table;
  return table;
}

void set_lattice_table_cap(std::size_t cap) {
  auto& cache = lattice_cache();
  std::lock_guard lock(cache.mutex);
  cache.cap = cap;
}

std::size_t lattice_table_cap() {
  auto& cache = lattice_cache();
  std::lock_guard lock(cache.mutex);
  return cache.cap;
}

double ball_volume_coefficient(int d) {
  if (d < 1) throw ValidationError(fmt::format("dimension must be >= 1, got {}", d));
  const double half = 0.5 * d;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

double error_exponent(int d, double delta) {
  if (d < 1) throw ValidationError(fmt::format("dimension must be >= 1, got {}", d));
  if (!(delta > 0.0)) throw ValidationError("alpha_4 requires delta > 0");
  switch (d) {
    case 1: return 0.0;
    case 2: return 1.0 / 3.0;
    case 3: return 0.75;
    case 4: return 1.0 + delta;
    default: return 0.5 * d - 1.0;
  }
}

WeightSequence WeightSequence::power(double c, double beta) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ValidationError(fmt::format("power weights need c > 0, got {}", c));
  }
  if (!(beta > -1.0) || !std::isfinite(beta)) {
    throw ValidationError(fmt::format("power weights need beta > -1, got {}", beta));
  }
  return WeightSequence(PowerWeights{c, beta});
}

WeightSequence WeightSequence::lattice(int d) {
  if (d < 1) throw ValidationError(fmt::format("lattice weights need d >= 1, got {}", d));
  return WeightSequence(LatticeWeights{d});
}

WeightSequence WeightSequence::plane_diagonal() { return WeightSequence(PlaneDiagonalWeights{}); }

WeightSequence WeightSequence::tabulated(std::vector<double> values, std::string source) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw ValidationError(fmt::format("tabulated weight b_{} = {} is not a nonnegative real",
                                        i + 1, values[i]));
    }
  }
  if (source.empty()) source = fmt::format("<{} values>", values.size());
  return WeightSequence(TabulatedWeights{std::move(values), std::move(source)});
}

WeightSequence WeightSequence::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto name = spec.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "plane") {
    if (!rest.empty()) throw ValidationError("weight spec 'plane' takes no parameters");
    return plane_diagonal();
  }
  if (name == "table") {
    if (rest.size() < 2 || rest.front() != '@') {
      throw ValidationError("weight spec 'table' expects table:@file.csv");
    }
    std::string path(rest.substr(1));
    return tabulated(read_weight_table(path), std::string(spec));
  }
  const auto params = parse_params(rest);
  auto take = [&](std::string_view key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : parse_double(key, it->second);
  };
  auto check_keys = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : params) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ValidationError(fmt::format("weight spec '{}': unknown parameter '{}'", name, key));
      }
    }
  };
  if (name == "power") {
    check_keys({"c", "beta"});
    return power(take("c", 1.0), take("beta", 0.0));
  }
  if (name == "lattice") {
    check_keys({"d"});
    const double d = take("d", 3.0);
    if (d != std::floor(d) || d < 1 || d > 64) {
      throw ValidationError(fmt::format("lattice dimension must be a positive integer, got {}", d));
    }
    return lattice(static_cast<int>(d));
  }
  throw ValidationError(fmt::format("unknown weight spec '{}'", spec));
}

double WeightSequence::at(std::int64_t k) const {
  if (k < 1) return 0.0;
  return std::visit(
      [k](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, PowerWeights>) {
          return w.beta == 0.0 ? w.c : w.c * std::pow(static_cast<double>(k), w.beta);
        } else if constexpr (std::is_same_v<T, LatticeWeights>) {
          return static_cast<double>(cached_lattice_counts(w.d, k)->j[static_cast<std::size_t>(k)]);
        } else if constexpr (std::is_same_v<T, PlaneDiagonalWeights>) {
          return static_cast<double>(k);
        } else {
          return static_cast<std::size_t>(k) <= w.values.size()
                     ? w.values[static_cast<std::size_t>(k) - 1]
                     : 0.0;
        }
      },
      kind_);
}

std::vector<double> WeightSequence::values(std::int64_t K) const {
  std::vector<double> b(static_cast<std::size_t>(std::max<std::int64_t>(K, 0)) + 1, 0.0);
  if (K < 1) return b;
  if (const auto* lat = std::get_if<LatticeWeights>(&kind_)) {
    const auto table = cached_lattice_counts(lat->d, K);
    for (std::int64_t k = 1; k <= K; ++k) {
      b[static_cast<std::size_t>(k)] = static_cast<double>(table->j[static_cast<std::size_t>(k)]);
    }
    return b;
  }
  for (std::int64_t k = 1; k <= K; ++k) b[static_cast<std::size_t>(k)] = at(k);
  return b;
}

bool WeightSequence::integral_up_to(std::int64_t K) const {
  if (is_lattice() || is_plane_diagonal()) return true;
  if (const auto* p = std::get_if<PowerWeights>(&kind_)) {
    if (p->beta == 0.0) return p->c == std::floor(p->c);
    if (p->beta == std::floor(p->beta) && p->beta > 0.0) return p->c == std::floor(p->c);
  }
  for (std::int64_t k = 1; k <= K; ++k) {
    const double v = at(k);
    if (v != std::floor(v)) return false;
  }
  return true;
}

std::string WeightSequence::spec() const {
  return std::visit(
      [](const auto& w) -> std::string {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, PowerWeights>) {
          return fmt::format("power:c={},beta={}", w.c, w.beta);
        } else if constexpr (std::is_same_v<T, LatticeWeights>) {
          return fmt::format("lattice:d={}", w.d);
        } else if constexpr (std::is_same_v<T, PlaneDiagonalWeights>) {
          return "plane";
        } else {
          return w.source;
        }
      },
      kind_);
}

double WeightSequence::log_tail_majorant(std::int64_t K, double p, double log_y) const {
  if (K < 0) K = 0;
  return std::visit(
      [&](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, PowerWeights>) {
          return log_geometric_tail(std::log(w.c), w.beta + p, std::max(w.beta + p, 0.0), K,
                                    log_y);
        } else if constexpr (std::is_same_v<T, PlaneDiagonalWeights>) {
          return log_geometric_tail(0.0, 1.0 + p, 1.0 + p, K, log_y);
        } else if constexpr (std::is_same_v<T, LatticeWeights>) {
          // Abel summation against J_d(k) <= C_d (sqrt(k) + sqrt(d)/2)^d; the
          // differences of k^p y^k contribute the factor (1 - y).
          const double half = 0.5 * w.d;
          const double k1 = static_cast<double>(K) + 1.0;
          const double envelope_ratio =
              w.d * std::log1p(0.5 * std::sqrt(static_cast<double>(w.d)) / std::sqrt(k1));
          const double log_amplitude =
              std::log(ball_volume_coefficient(w.d)) + envelope_ratio + std::log(-std::expm1(log_y));
          return log_geometric_tail(log_amplitude, half + p, half + p, K, log_y);
        } else {
          double sum = 0.0;
          for (std::size_t k = static_cast<std::size_t>(K) + 1; k <= w.values.size(); ++k) {
            const double kk = static_cast<double>(k);
            sum += w.values[k - 1] * std::exp(p * std::log(kk) + kk * log_y);
          }
          return sum > 0.0 ? std::log(sum) : -kInf;
        }
      },
      kind_);
}

double weight_at(const WeightSequence& seq, std::int64_t k) {
  if (k < 1) throw ValidationError(fmt::format("weight index must be >= 1, got {}", k));
  return seq.at(k);
}

std::vector<double> read_weight_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open weight table '{}'", path));
  std::vector<double> values;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r,");
    const std::string_view text(line.data() + first, last - first + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !(value >= 0.0) ||
        !std::isfinite(value)) {
      throw ValidationError(fmt::format("{}:{}: expected a nonnegative real, got '{}'", path,
                                        row, text));
    }
    values.push_back(value);
  }
  return values;
}

}  // namespace partgibbs
