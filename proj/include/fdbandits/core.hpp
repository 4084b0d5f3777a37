#ifndef FDBANDITS_CORE_HPP
#define FDBANDITS_CORE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdbandits {

// Tolerances: inputs are validated at 1e-12, solver outputs at 1e-10 (they
// accumulate error through normalization and bisection).
inline constexpr double kInputProbTol = 1e-12;
inline constexpr double kPolicyProbTol = 1e-10;

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std:: engines because its
// output is fully specified: the same seed yields the same stream on every
// platform. The seed is scrambled on construction so that sequential seeds do
// not produce shifted copies of one stream; substreams are derived by hashing
// (seed, index) so parallel sweep cells never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_seed(seed, index));
  }

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1]; safe as a log() argument.
  double next_open_double() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool next_bernoulli(double p) { return next_double() < p; }
  // Box-Muller; std::normal_distribution is avoided because its sequence is
  // implementation-defined.
  double next_gaussian(double mean, double stddev);
  // Samples an index from a probability vector by CDF scan.
  int next_categorical(std::span<const double> probs);

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Dense S x A table
// ---------------------------------------------------------------------------

class Table {
 public:
  Table() = default;
  Table(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const Table& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Table&, const Table&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Entrywise a - b.
Table table_diff(const Table& a, const Table& b);
// max |a(s,a) - b(s,a)|.
double sup_distance(const Table& a, const Table& b);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class NoiseKind { kBernoulli, kGaussian };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kBernoulli;
  double sigma = 0.0;  // Gaussian only

  static NoiseModel bernoulli() { return {NoiseKind::kBernoulli, 0.0}; }
  static NoiseModel gaussian(double sigma) { return {NoiseKind::kGaussian, sigma}; }
};

// Row-stochastic S x A action distribution.
struct Policy {
  Table probs;

  int num_states() const { return probs.rows(); }
  int num_actions() const { return probs.cols(); }
  double operator()(int s, int a) const { return probs(s, a); }
};

Policy uniform_policy(int num_states, int num_actions);

struct BanditInstance {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> context_dist;  // rho
  Table mean_reward;                 // entries in [0,1]
  Policy ref_policy;                 // also the behavior policy
  NoiseModel noise;
};

// Finite hypothesis class of reward tables. realizable_index points at the
// member equal to the instance's mean reward, when known.
struct FunctionClass {
  std::vector<Table> members;
  std::optional<int> realizable_index;

  int size() const { return static_cast<int>(members.size()); }
};

struct Dataset {
  struct Row {
    int s;
    int a;
    double r;
  };
  std::vector<Row> rows;

  long size() const { return static_cast<long>(rows.size()); }
};

struct PreferenceDataset {
  struct Row {
    int s;
    int a1;
    int a2;
    int y;  // 1 iff a1 preferred
  };
  std::vector<Row> rows;

  long size() const { return static_cast<long>(rows.size()); }
};

// ---------------------------------------------------------------------------
// Regularizer
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double(double)>;

// Divergence spec: eta is the inverse temperature, KL means reverse KL against
// the reference policy, FDiv carries evaluators for a twice-differentiable f
// with f(1) = 0 and f'' >= alpha on the validation grid.
struct Regularizer {
  enum class Kind { kKl, kFDiv };

  Kind kind = Kind::kKl;
  double eta = 1.0;

  // FDiv payload. f_prime_inverse is optional; when absent the dual solver
  // inverts f' by inner bisection.
  ScalarFn f;
  ScalarFn f_prime;
  ScalarFn f_second;
  double alpha = 0.0;
  ScalarFn f_prime_inverse;

  static Regularizer kl(double eta);
  // f(x) = alpha (x-1)^2 / 2, the chi-square divergence scaled by alpha.
  static Regularizer chi2(double eta, double alpha = 1.0);
  // f(x) = x log x expressed through the FDiv machinery; used to cross-check
  // the dual solver against the softmax closed form. alpha records the
  // infimum of f'' over the validation grid (x log x is not strongly convex
  // globally).
  static Regularizer kl_as_fdiv(double eta);
  static Regularizer fdiv(double eta, ScalarFn f, ScalarFn f_prime, ScalarFn f_second,
                          double alpha, ScalarFn f_prime_inverse = nullptr);
};

// Grid on which the strong-convexity invariant f''(x) >= alpha is sampled.
std::vector<double> regularizer_check_grid();

// ---------------------------------------------------------------------------
// Validation (violations are data, not errors)
// ---------------------------------------------------------------------------

std::vector<std::string> validate_instance(const BanditInstance& inst);
std::vector<std::string> validate_policy_table(const Table& probs, double tol,
                                               const std::string& name);
std::vector<std::string> validate_function_class(const FunctionClass& fc,
                                                 const BanditInstance& inst);
std::vector<std::string> validate_regularizer(const Regularizer& reg);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// Instance JSON keys: num_states, num_actions, context_dist, mean_reward,
// ref_policy, noise {kind, sigma?}.
std::string instance_to_json(const BanditInstance& inst);
BanditInstance instance_from_json(const std::string& text);
void save_instance(const BanditInstance& inst, const std::string& path);
BanditInstance load_instance(const std::string& path);

// Dataset CSV with header `s,a,r`; preference CSV with header `s,a1,a2,y`.
void write_dataset_csv(std::ostream& os, const Dataset& data);
void write_dataset_csv(std::ostream& os, const PreferenceDataset& data);
Dataset read_dataset_csv(std::istream& is);
PreferenceDataset read_preference_csv(std::istream& is);
void save_dataset(const Dataset& data, const std::string& path);
void save_dataset(const PreferenceDataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);
PreferenceDataset load_preference_dataset(const std::string& path);

// Shortest decimal form that round-trips a double (used by all CSV writers so
// identical runs produce identical bytes).
std::string format_double(double x);

}  // namespace fdbandits

#endif  // FDBANDITS_CORE_HPP
