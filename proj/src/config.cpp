#include "raglsa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <sstream>
#include <system_error>

namespace raglsa {

namespace {

constexpr std::uint32_t kTrialDomain = 0;
constexpr std::uint32_t kTaskPriorDomain = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

Vector parse_vector(std::string_view text, std::string_view key) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = trim(text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos));
    if (!item.empty()) values.push_back(parse_double(item, key));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  Vector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];
  return out;
}

}  // namespace

std::string_view regime_name(const NoiseRegime& regime) {
  switch (regime.index()) {
    case 0: return "uniform";
    case 1: return "dpn";
    default: return "mixture";
  }
}

TaskVector TaskVector::ones(std::size_t d) {
  return TaskVector{Vector::Ones(static_cast<Eigen::Index>(d)), false};
}

TaskVector TaskVector::explicit_values(Vector beta) { return TaskVector{std::move(beta), false}; }

TaskVector TaskVector::sample(std::size_t d, std::uint64_t seed) {
  RandomStream stream(seed, 0, kTaskPriorDomain);
  Vector beta(static_cast<Eigen::Index>(d));
  stream.fill_normal(beta);
  return TaskVector{std::move(beta), true};
}

WeightMatrix WeightMatrix::general(Matrix entries) {
  if (entries.rows() != entries.cols()) throw std::invalid_argument("weight matrix must be square");
  if (!entries.allFinite()) throw std::invalid_argument("weight matrix has non-finite entries");
  return WeightMatrix(std::move(entries), std::nullopt);
}

WeightMatrix WeightMatrix::isotropic(std::size_t d, double w) {
  if (d == 0) throw std::invalid_argument("weight matrix dimension must be >= 1");
  if (!std::isfinite(w)) throw std::invalid_argument("isotropic scale must be finite");
  const auto n = static_cast<Eigen::Index>(d);
  return WeightMatrix(w * Matrix::Identity(n, n), w);
}

WeightMatrix WeightMatrix::scaled(double factor) const {
  std::optional<double> scale;
  if (isotropic_scale_) scale = *isotropic_scale_ * factor;
  return WeightMatrix(entries_ * factor, scale);
}

const ExperimentConfig& validate(const ExperimentConfig& c) {
  require(c.d >= 1, "d must be >= 1");
  require(c.m + c.n >= 1, "empty context: m + n must be >= 1");
  require(finite_nonneg(c.sigma2), "sigma2 must be finite and >= 0");
  require(c.trials >= 1, "trials must be >= 1");
  require(c.beta.dim() == c.d, "beta has " + std::to_string(c.beta.dim()) + " entries, expected d = " +
                                   std::to_string(c.d));
  require(c.beta.beta.allFinite(), "beta has non-finite entries");

  if (const auto* u = std::get_if<UniformNoise>(&c.regime)) {
    require(finite_nonneg(u->delta2), "delta2 must be finite and >= 0");
    require(finite_nonneg(u->sigma2_rag), "sigma2_rag must be finite and >= 0");
  } else if (const auto* p = std::get_if<DistanceProportionalNoise>(&c.regime)) {
    require(std::isfinite(p->gamma1) && p->gamma1 > 0.0, "gamma1 must be > 0");
    require(std::isfinite(p->gamma2) && p->gamma2 > 0.0, "gamma2 must be > 0");
    require(finite_nonneg(p->q), "q must be >= 0");
  } else {
    const auto& x = std::get<MixtureNoise>(c.regime);
    require(finite_nonneg(x.c_s), "c_s must be >= 0");
    require(std::isfinite(x.c_l) && x.c_l >= x.c_s, "c_l must be >= c_s");
    require(finite_nonneg(x.q_tilde), "q_tilde must be >= 0");
    require(std::isfinite(x.gamma2) && x.gamma2 > 0.0, "gamma2 must be > 0");
    require(finite_nonneg(x.q), "q must be >= 0");
  }
  return c;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
  return value;
}

std::uint64_t parse_unsigned(std::string_view text, std::string_view key) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError("invalid unsigned integer for '" + std::string(key) + "': '" + std::string(text) + "'");
  return value;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::string format_key_values(const KeyValues& values) {
  std::string out;
  for (const auto& [k, v] : values) out += k + " = " + v + "\n";
  return out;
}

bool is_config_key(std::string_view key) {
  static constexpr std::string_view kKeys[] = {
      "m", "n", "d", "sigma2", "regime", "delta2", "sigma2_rag", "gamma1",
      "gamma2", "q", "c_s", "c_l", "q_tilde", "beta", "seed", "trials",
  };
  return std::find(std::begin(kKeys), std::end(kKeys), key) != std::end(kKeys);
}

ExperimentConfig apply_config_keys(ExperimentConfig c, const KeyValues& kv) {
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto set_count = [&](const char* key, std::size_t& field) {
    if (const auto* v = get(key)) field = static_cast<std::size_t>(parse_unsigned(*v, key));
  };
  auto set_real = [&](const char* key, double& field) {
    if (const auto* v = get(key)) field = parse_double(*v, key);
  };

  const std::size_t old_d = c.d;
  const std::uint64_t old_seed = c.seed;
  set_count("m", c.m);
  set_count("n", c.n);
  set_count("d", c.d);
  set_count("trials", c.trials);
  set_real("sigma2", c.sigma2);
  if (const auto* v = get("seed")) c.seed = parse_unsigned(*v, "seed");

  if (const auto* v = get("regime")) {
    if (*v != regime_name(c.regime)) {
      if (*v == "uniform") c.regime = UniformNoise{};
      else if (*v == "dpn") c.regime = DistanceProportionalNoise{};
      else if (*v == "mixture") c.regime = MixtureNoise{};
      else throw ConfigError("unknown regime '" + *v + "' (expected uniform, dpn or mixture)");
    }
  }
  std::visit(
      [&](auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, UniformNoise>) {
          set_real("delta2", r.delta2);
          set_real("sigma2_rag", r.sigma2_rag);
        } else if constexpr (std::is_same_v<R, DistanceProportionalNoise>) {
          set_real("gamma1", r.gamma1);
          set_real("gamma2", r.gamma2);
          set_real("q", r.q);
        } else {
          set_real("c_s", r.c_s);
          set_real("c_l", r.c_l);
          set_real("q_tilde", r.q_tilde);
          set_real("gamma2", r.gamma2);
          set_real("q", r.q);
        }
      },
      c.regime);

  if (const auto* v = get("beta")) {
    if (*v == "sample") c.beta = TaskVector::sample(c.d, c.seed);
    else if (*v == "ones") c.beta = TaskVector::ones(c.d);
    else c.beta = TaskVector::explicit_values(parse_vector(*v, "beta"));
  } else if (c.beta.sampled && (c.d != old_d || c.seed != old_seed)) {
    c.beta = TaskVector::sample(c.d, c.seed);
  } else if (c.d != old_d && c.beta.beta == Vector::Ones(c.beta.beta.size())) {
    c.beta = TaskVector::ones(c.d);
  }
  return c;
}

KeyValues config_to_keys(const ExperimentConfig& c) {
  KeyValues kv;
  kv["m"] = std::to_string(c.m);
  kv["n"] = std::to_string(c.n);
  kv["d"] = std::to_string(c.d);
  kv["sigma2"] = format_double(c.sigma2);
  kv["regime"] = std::string(regime_name(c.regime));
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, UniformNoise>) {
          kv["delta2"] = format_double(r.delta2);
          kv["sigma2_rag"] = format_double(r.sigma2_rag);
        } else if constexpr (std::is_same_v<R, DistanceProportionalNoise>) {
          kv["gamma1"] = format_double(r.gamma1);
          kv["gamma2"] = format_double(r.gamma2);
          kv["q"] = format_double(r.q);
        } else {
          kv["c_s"] = format_double(r.c_s);
          kv["c_l"] = format_double(r.c_l);
          kv["q_tilde"] = format_double(r.q_tilde);
          kv["gamma2"] = format_double(r.gamma2);
          kv["q"] = format_double(r.q);
        }
      },
      c.regime);
  if (c.beta.sampled) {
    kv["beta"] = "sample";
  } else {
    std::string b;
    for (Eigen::Index i = 0; i < c.beta.beta.size(); ++i) {
      if (i) b += ",";
      b += format_double(c.beta.beta(i));
    }
    kv["beta"] = b;
  }
  kv["seed"] = std::to_string(c.seed);
  kv["trials"] = std::to_string(c.trials);
  return kv;
}

std::string serialize_config(const ExperimentConfig& config) {
  return format_key_values(config_to_keys(config));
}

ExperimentConfig parse_config(std::string_view text) {
  return apply_config_keys(ExperimentConfig{}, parse_key_values(text));
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index, std::uint32_t domain) {
  // seed_seq spreads all five words over the full engine state.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), domain};
  engine_.seed(seq);
}

RandomStream derive_stream(std::uint64_t seed, std::uint64_t trial_index) {
  return RandomStream(seed, trial_index, kTrialDomain);
}

}  // namespace raglsa
