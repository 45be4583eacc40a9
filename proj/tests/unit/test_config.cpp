#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "raglsa/config.hpp"

using namespace raglsa;

namespace {

ExperimentConfig random_config(testutil::Rng& rng) {
  ExperimentConfig c;
  c.d = rng.integer(1, 6);
  c.m = rng.integer(0, 40);
  c.n = rng.integer(c.m == 0 ? 1 : 0, 40);
  c.sigma2 = rng.uniform(0.0, 2.0);
  c.seed = rng.integer(0, 1u << 30) * 1000003ull;
  c.trials = rng.integer(1, 500000);
  switch (rng.integer(0, 2)) {
    case 0: c.regime = UniformNoise{rng.uniform(0, 1), rng.uniform(0, 1)}; break;
    case 1: c.regime = DistanceProportionalNoise{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0, 2)}; break;
    default: {
      const double cs = rng.uniform(0, 1);
      c.regime = MixtureNoise{cs, cs + rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0.1, 3), rng.uniform(0, 2)};
    }
  }
  switch (rng.integer(0, 2)) {
    case 0: c.beta = TaskVector::ones(c.d); break;
    case 1: c.beta = TaskVector::sample(c.d, c.seed); break;
    default: c.beta = TaskVector::explicit_values(rng.vector(c.d) * 1.7);
  }
  return c;
}

}  // namespace

TEST_CASE("validate rejects an empty context") {
  ExperimentConfig c;
  c.m = 0;
  c.n = 0;
  try {
    validate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("empty context") != std::string::npos);
  }
}

TEST_CASE("validate rejects c_l below c_s") {
  ExperimentConfig c;
  c.regime = MixtureNoise{2.0, 1.0, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("validate rejects other invariant violations") {
  ExperimentConfig c;
  c.d = 0;
  c.beta = TaskVector::ones(0);
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = ExperimentConfig{};
  c.sigma2 = -0.1;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = ExperimentConfig{};
  c.regime = UniformNoise{-1.0, 0.1};
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = ExperimentConfig{};
  c.regime = DistanceProportionalNoise{0.0, 1.0, 0.5};
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = ExperimentConfig{};
  c.beta = TaskVector::ones(3);
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("validate returns a valid config unchanged") {
  testutil::Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const ExperimentConfig c = random_config(rng);
    const ExperimentConfig& out = validate(c);
    CHECK(&out == &c);
    CHECK(out == c);
  }
}

TEST_CASE("m = 0 and n = 0 are each legal alone") {
  ExperimentConfig c;
  c.m = 0;
  c.n = 3;
  CHECK_NOTHROW(validate(c));
  c.m = 3;
  c.n = 0;
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("derive_stream is deterministic and distinct per index") {
  RandomStream a = derive_stream(7, 0);
  RandomStream b = derive_stream(7, 0);
  RandomStream c = derive_stream(7, 1);
  RandomStream e = derive_stream(8, 0);
  int same_c = 0, same_e = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    same_c += x == c.normal();
    same_e += x == e.normal();
  }
  CHECK(same_c == 0);
  CHECK(same_e == 0);
}

TEST_CASE("streams in different domains do not coincide") {
  RandomStream trial(5, 0, 0);
  RandomStream prior(5, 0, 1);
  CHECK(trial.next_u64() != prior.next_u64());
}

TEST_CASE("serialize then parse is the identity") {
  testutil::Rng rng(2024);
  for (int k = 0; k < 200; ++k) {
    const ExperimentConfig c = random_config(rng);
    const ExperimentConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
  }
}

TEST_CASE("key-value parsing: comments, whitespace, last duplicate wins") {
  const KeyValues kv = parse_key_values("# header\n m = 8 \nn=2 # trailing\n\nm = 9\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("m") == "9");
  CHECK(kv.at("n") == "2");
  CHECK_THROWS_AS(parse_key_values("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values(" = 3\n"), ConfigError);
}

TEST_CASE("apply_config_keys switches regime and resizes default beta") {
  const ExperimentConfig c = parse_config("regime = dpn\nq = 0.75\nd = 3\n");
  CHECK(regime_name(c.regime) == "dpn");
  CHECK(std::get<DistanceProportionalNoise>(c.regime).q == 0.75);
  CHECK(c.beta == TaskVector::ones(3));
  CHECK_THROWS_AS(parse_config("regime = softmax\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("sigma2 = abc\n"), ConfigError);
}

TEST_CASE("sampled beta follows d and seed") {
  const ExperimentConfig c = parse_config("d = 5\nseed = 99\nbeta = sample\n");
  CHECK(c.beta.sampled);
  CHECK(c.beta == TaskVector::sample(5, 99));
  CHECK_FALSE(TaskVector::sample(5, 99) == TaskVector::sample(5, 100));
}

TEST_CASE("explicit beta list") {
  const ExperimentConfig c = parse_config("d = 2\nbeta = 0.5, -2\n");
  CHECK(c.beta.beta(0) == 0.5);
  CHECK(c.beta.beta(1) == -2.0);
  CHECK(c.beta.norm2() == 4.25);
}

TEST_CASE("format_double round-trips") {
  testutil::Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    CHECK(parse_double(format_double(x), "x") == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(16.0) == "16");
}

TEST_CASE("WeightMatrix constructors") {
  const WeightMatrix iso = WeightMatrix::isotropic(3, 0.25);
  CHECK(iso.is_isotropic());
  CHECK(iso.entries() == 0.25 * Matrix::Identity(3, 3));
  CHECK(*iso.scaled(2.0).isotropic_scale() == 0.5);
  CHECK_THROWS(WeightMatrix::general(Matrix::Zero(2, 3)));
  CHECK_FALSE(WeightMatrix::general(Matrix::Identity(2, 2)).is_isotropic());
}
