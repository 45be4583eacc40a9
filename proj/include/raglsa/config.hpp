// Shared domain types, parameter validation and the per-trial random stream.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

namespace raglsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a configuration violates one of its invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every retrieved example shares one offset variance and one label-noise variance.
struct UniformNoise {
  double delta2 = 0.0;
  double sigma2_rag = 0.0;
  bool operator==(const UniformNoise&) const = default;
};

/// Label-noise variance gamma1 * sigma^2 * delta_i^2 with delta_i^2 = gamma2 * i^q.
struct DistanceProportionalNoise {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double q = 0.0;
  bool operator==(const DistanceProportionalNoise&) const = default;
};

/// Small noise c_s*sigma^2 with probability p_i = (1 + delta_i^2)^(-q_tilde),
/// large noise c_l*sigma^2 otherwise; delta_i^2 = gamma2 * i^q.
struct MixtureNoise {
  double c_s = 0.1;
  double c_l = 1.0;
  double q_tilde = 1.0;
  double gamma2 = 1.0;
  double q = 0.0;
  bool operator==(const MixtureNoise&) const = default;
};

using NoiseRegime = std::variant<UniformNoise, DistanceProportionalNoise, MixtureNoise>;

/// "uniform", "dpn" or "mixture".
std::string_view regime_name(const NoiseRegime& regime);

/// Test-time task vector beta_tt.
struct TaskVector {
  Vector beta;
  bool sampled = false;

  static TaskVector ones(std::size_t d);
  static TaskVector explicit_values(Vector beta);
  /// Draws beta ~ N(0, I) from a stream reserved for the task prior.
  static TaskVector sample(std::size_t d, std::uint64_t seed);

  double norm2() const { return beta.squaredNorm(); }
  std::size_t dim() const { return static_cast<std::size_t>(beta.size()); }
  bool operator==(const TaskVector& other) const {
    return sampled == other.sampled && beta.size() == other.beta.size() && beta == other.beta;
  }
};

/// The d x d attention kernel W of the linear self-attention predictor.
class WeightMatrix {
 public:
  static WeightMatrix general(Matrix entries);
  static WeightMatrix isotropic(std::size_t d, double w);

  const Matrix& entries() const { return entries_; }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  bool is_isotropic() const { return isotropic_scale_.has_value(); }
  /// Scale w when the matrix is w * I by construction.
  std::optional<double> isotropic_scale() const { return isotropic_scale_; }

  WeightMatrix scaled(double factor) const;

 private:
  WeightMatrix(Matrix entries, std::optional<double> scale)
      : entries_(std::move(entries)), isotropic_scale_(scale) {}

  Matrix entries_;
  std::optional<double> isotropic_scale_;
};

struct ExperimentConfig {
  std::size_t m = 16;
  std::size_t n = 4;
  std::size_t d = 4;
  double sigma2 = 0.25;
  NoiseRegime regime = UniformNoise{0.1, 0.1};
  TaskVector beta = TaskVector::ones(4);
  std::uint64_t seed = 1;
  std::size_t trials = 200000;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Returns the config unchanged when every invariant holds; otherwise throws
/// ConfigError naming the first violated invariant.
const ExperimentConfig& validate(const ExperimentConfig& config);

// Flat key=value representation. Keys: m n d sigma2 regime delta2 sigma2_rag
// gamma1 gamma2 q c_s c_l q_tilde beta seed trials. Only the keys of the
// active regime are emitted.
using KeyValues = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment. Duplicate keys: last wins.
KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& values);

/// Overlays recognised keys from `values` onto `base`. Unknown keys are left
/// for the caller; the result is not validated.
ExperimentConfig apply_config_keys(ExperimentConfig base, const KeyValues& values);
KeyValues config_to_keys(const ExperimentConfig& config);
/// True for every key apply_config_keys understands, whatever the regime.
bool is_config_key(std::string_view key);

std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config(std::string_view text);

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view key);
std::uint64_t parse_unsigned(std::string_view text, std::string_view key);

/// Deterministic random stream for one (seed, trial index) pair.
class RandomStream {
 public:
  /// `domain` separates independent families of streams (trials, task prior).
  RandomStream(std::uint64_t seed, std::uint64_t index, std::uint32_t domain = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  /// Fills a vector/matrix with i.i.d. N(0, 1) entries (column-major order).
  template <typename Derived>
  void fill_normal(Eigen::DenseBase<Derived>& out) {
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

RandomStream derive_stream(std::uint64_t seed, std::uint64_t trial_index);

}  // namespace raglsa
