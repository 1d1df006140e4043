#ifndef PARTGIBBS_WEIGHTS_HPP
#define PARTGIBBS_WEIGHTS_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace partgibbs {

/// b_k = c * k^beta.
struct PowerWeights {
  double c = 1.0;
  double beta = 0.0;
};

/// b_k = j_d(k), the number of points of Z^d at squared distance k from 0.
struct LatticeWeights {
  int d = 3;
};

/// b_k = k, the weights induced by diagonal sections of plane partitions.
struct PlaneDiagonalWeights {};

/// b_k = values[k-1] for k <= values.size(), zero beyond.
struct TabulatedWeights {
  std::vector<double> values;
  std::string source;
};

/// Exact lattice representation counts j_d(0..K) with cumulative sums.
struct LatticeCountTable {
  int d = 1;
  std::vector<std::int64_t> j;
  std::vector<std::int64_t> cumulative;

  std::int64_t max_level() const { return static_cast<std::int64_t>(j.size()) - 1; }
};

inline constexpr std::size_t kDefaultLatticeTableCap = 100'000'000;

/// Builds j_d(0..K) by (d-1)-fold convolution with j_1. Throws ResourceError
/// when K+1 exceeds `cap` or a cumulative count overflows 64 bits.
LatticeCountTable lattice_counts(int d, std::int64_t K,
                                 std::size_t cap = kDefaultLatticeTableCap);

/// Process-wide cache of lattice tables. A request larger than the cached
/// table replaces it with a freshly built one; readers keep their snapshot.
std::shared_ptr<const LatticeCountTable> cached_lattice_counts(int d, std::int64_t K);
void set_lattice_table_cap(std::size_t cap);
std::size_t lattice_table_cap();

/// C_d = pi^{d/2} / Gamma(d/2 + 1), the volume of the unit ball in R^d.
double ball_volume_coefficient(int d);

/// Exponent alpha_d of the lattice-point error term J_d(k) - C_d k^{d/2} = O(k^alpha_d).
/// `delta` is the free epsilon of the d = 4 case.
double error_exponent(int d, double delta = 0.01);

class WeightSequence {
 public:
  using Kind = std::variant<PowerWeights, LatticeWeights, PlaneDiagonalWeights, TabulatedWeights>;

  static WeightSequence power(double c, double beta);
  static WeightSequence lattice(int d);
  static WeightSequence plane_diagonal();
  static WeightSequence tabulated(std::vector<double> values, std::string source = {});

  /// Parses `power:c=1,beta=0`, `lattice:d=3`, `plane` or `table:@file.csv`.
  static WeightSequence parse(std::string_view spec);

  const Kind& kind() const { return kind_; }

  bool is_power() const { return std::holds_alternative<PowerWeights>(kind_); }
  bool is_lattice() const { return std::holds_alternative<LatticeWeights>(kind_); }
  bool is_plane_diagonal() const { return std::holds_alternative<PlaneDiagonalWeights>(kind_); }
  bool is_tabulated() const { return std::holds_alternative<TabulatedWeights>(kind_); }

  double at(std::int64_t k) const;

  /// Dense b_0..b_K (b_0 = 0).
  std::vector<double> values(std::int64_t K) const;

  /// True when every b_k with 1 <= k <= K is a nonnegative integer.
  bool integral_up_to(std::int64_t K) const;

  /// Canonical spec string accepted by parse() (tabulated sequences keep their source).
  std::string spec() const;

  /// Natural log of an upper bound on sum_{k>K} b_k k^p y^k, y = exp(log_y) < 1.
  /// Returns -inf for an identically zero tail and +inf when no bound is available at K.
  double log_tail_majorant(std::int64_t K, double p, double log_y) const;

 private:
  explicit WeightSequence(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

double weight_at(const WeightSequence& seq, std::int64_t k);

/// Reads one nonnegative real per line (row i is b_i).
std::vector<double> read_weight_table(const std::string& path);

}  // namespace partgibbs

#endif  // PARTGIBBS_WEIGHTS_HPP
