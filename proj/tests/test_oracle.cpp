#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "error.hpp"
#include "oracle.hpp"
#include "testutil.hpp"

using namespace dppmb;
using oracle::OracleSpec;

namespace {

const OracleSpec& standard_spec() {
  static const OracleSpec spec = OracleSpec::standard();
  return spec;
}

// Alphabet with a weight-10 token (id 2) for the closed-form proxy checks.
chem::TokenAlphabet flat_alphabet() {
  chem::TokenAlphabet a;
  a.size = 6;
  a.start_id = 0;
  a.stop_id = 1;
  a.backbone = {0, 0, 1, 1, 0, 0};
  a.donor = {0, 0, 0, 0, 0, 1};
  a.weight = {1, 1, 10, 12, 14, 16};
  a.validate();
  return a;
}

}  // namespace

TEST_CASE("double sigmoid hits its anchors") {
  const double at_low = oracle::double_sigmoid(200, 200, 550, 500, 20, 20);
  CHECK(at_low == doctest::Approx(0.5).epsilon(1e-6));
  const double mid = oracle::double_sigmoid(375, 200, 550, 500, 20, 20);
  CHECK(mid == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(oracle::double_sigmoid(-1e6, 200, 550, 500, 20, 20) ==
        doctest::Approx(0.0));
  CHECK(oracle::double_sigmoid(1e6, 200, 550, 500, 20, 20) ==
        doctest::Approx(0.0));

  CHECK_THROWS_AS(oracle::double_sigmoid(0, 10, 5, 1, 1, 1), Error);
  CHECK_THROWS_AS(oracle::double_sigmoid(0, 0, 5, 0, 1, 1), Error);
}

TEST_CASE("double sigmoid plateau and tails") {
  for (double x = 200; x <= 550; x += 25)
    CHECK(oracle::double_sigmoid(x, 200, 550, 500, 20, 20) >= 0.5 - 1e-9);
  for (double x : {0.0, 50.0, 100.0, 700.0, 900.0})
    CHECK(oracle::double_sigmoid(x, 200, 550, 500, 20, 20) < 0.05);
}

TEST_CASE("reverse sigmoid") {
  CHECK(oracle::reverse_sigmoid(4, 2, 6, 0.5) == doctest::Approx(0.5));
  const double low_end = oracle::reverse_sigmoid(2, 2, 6, 0.5);
  CHECK(low_end == doctest::Approx(1.0 / (1.0 + std::pow(10.0, -2.5))));
  CHECK(low_end == doctest::Approx(0.99684).epsilon(1e-4));
  CHECK(oracle::reverse_sigmoid(1e9, 2, 6, 0.5) == doctest::Approx(0.0));

  double prev = 2.0;
  for (double x = -5; x <= 12; x += 0.5) {
    const double y = oracle::reverse_sigmoid(x, 2, 6, 0.5);
    CHECK(y < prev);
    prev = y;
  }

  CHECK_THROWS_AS(oracle::reverse_sigmoid(0, 6, 2, 0.5), Error);
  CHECK_THROWS_AS(oracle::reverse_sigmoid(0, 2, 6, 0.0), Error);
}

TEST_CASE("property proxies") {
  OracleSpec spec = standard_spec();
  spec.alphabet = flat_alphabet();
  spec.motifs = {chem::Molecule::create({2, 3, 2}, spec.alphabet)};
  spec.forbidden_bigrams = {{4, 4}};

  const auto empty = oracle::property_proxies(
      chem::Molecule::create({}, spec.alphabet), spec);
  CHECK(empty.mw == doctest::Approx(0.0));
  CHECK(empty.hbd == 0);
  CHECK(empty.alerts == 1);
  CHECK(empty.qed == doctest::Approx(std::exp(-4.0)));

  // 20 copies of the weight-10 token: mw 200, zero entropy
  const auto uniform = oracle::property_proxies(
      chem::Molecule::create(std::vector<int>(20, 2), spec.alphabet), spec);
  CHECK(uniform.mw == doctest::Approx(200.0));
  CHECK(uniform.qed == doctest::Approx(std::exp(-4.0)).epsilon(1e-9));
  CHECK(uniform.hbd == 0);

  const auto flagged = oracle::property_proxies(
      chem::Molecule::create({2, 4, 4, 3}, spec.alphabet), spec);
  CHECK(flagged.alerts == 0);

  const auto donors = oracle::property_proxies(
      chem::Molecule::create({5, 5, 2}, spec.alphabet), spec);
  CHECK(donors.hbd == 2);
}

TEST_CASE("activity rescales the best motif similarity") {
  const auto& spec = standard_spec();
  CHECK(oracle::activity(spec.motifs[0], spec) == doctest::Approx(1.0));

  auto r = testutil::rng(62);
  for (int i = 0; i < 40; ++i) {
    const auto m = testutil::random_molecule(r, spec.alphabet, 2, 40);
    double best = 0.0;
    for (const auto& motif : spec.motifs)
      best = std::max(best,
                      chem::tanimoto(m.fingerprint(), motif.fingerprint()));
    const double expected =
        std::clamp((best - spec.activity_low) /
                       (spec.activity_high - spec.activity_low),
                   0.0, 1.0);
    CHECK(oracle::activity(m, spec) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("geometric mean aggregation") {
  const std::vector<double> w{1, 1, 1, 1, 5};
  const std::vector<double> ones{1, 1, 1, 1, 1};
  CHECK(oracle::geometric_mean(ones, w) == doctest::Approx(1.0));

  const std::vector<double> zeroed{1, 1, 0, 1, 1};
  CHECK(oracle::geometric_mean(zeroed, w) == doctest::Approx(0.0));

  const std::vector<double> half{1, 1, 1, 1, 0.5};
  CHECK(oracle::geometric_mean(half, w) ==
        doctest::Approx(std::pow(0.5, 5.0 / 9.0)).epsilon(1e-12));
  CHECK(oracle::geometric_mean(half, w) == doctest::Approx(0.6804).epsilon(1e-3));

  // monotone nondecreasing in each component
  std::vector<double> base{0.5, 0.6, 0.7, 0.8, 0.4};
  const double before = oracle::geometric_mean(base, w);
  for (size_t i = 0; i < base.size(); ++i) {
    auto bumped = base;
    bumped[i] = std::min(1.0, bumped[i] + 0.2);
    CHECK(oracle::geometric_mean(bumped, w) >= before);
  }

  CHECK_THROWS_AS(oracle::geometric_mean({}, {}), Error);
}

TEST_CASE("extrinsic reward stays in bounds with coherent components") {
  const auto& spec = standard_spec();
  auto r = testutil::rng(83);
  for (int i = 0; i < 60; ++i) {
    const auto m = testutil::random_molecule(r, spec.alphabet, 0, 45);
    const auto s = oracle::extrinsic_reward(m, spec);
    for (double v : {s.mw_score, s.hbd_score, s.qed, s.alerts, s.activity, s.reward}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const std::vector<double> comps{s.mw_score, s.hbd_score, s.qed, s.alerts,
                                    s.activity};
    const std::vector<double> w(spec.weights.begin(), spec.weights.end());
    CHECK(s.reward == doctest::Approx(oracle::geometric_mean(comps, w)));
    if (s.alerts == 0.0 || s.activity == 0.0) CHECK(s.reward == 0.0);
  }
}

TEST_CASE("forbidden bigrams zero the reward") {
  const auto& spec = standard_spec();
  REQUIRE(spec.forbidden_bigrams.size() == 4);
  const auto [a, b] = spec.forbidden_bigrams[0];
  const auto m = chem::Molecule::create({2, a, b, 3}, spec.alphabet);
  const auto s = oracle::extrinsic_reward(m, spec);
  CHECK(s.alerts == 0.0);
  CHECK(s.reward == 0.0);
}

TEST_CASE("standard oracle landscape") {
  const auto& spec = standard_spec();
  CHECK(spec.motifs.size() == 5);
  for (const auto& m : spec.motifs) {
    CHECK(m.length() == 30);
    const auto s = oracle::extrinsic_reward(m, spec);
    CHECK(s.activity == doctest::Approx(1.0));
    CHECK(s.reward > 0.9);
  }
  for (size_t i = 0; i < spec.motifs.size(); ++i)
    for (size_t j = i + 1; j < spec.motifs.size(); ++j)
      CHECK(chem::tanimoto(spec.motifs[i].fingerprint(),
                           spec.motifs[j].fingerprint()) <= 0.3);

  // deterministic regeneration
  const auto again = OracleSpec::standard();
  for (size_t i = 0; i < spec.motifs.size(); ++i)
    CHECK(again.motifs[i].tokens() == spec.motifs[i].tokens());

  const auto other = OracleSpec::standard(1234);
  bool differs = false;
  for (size_t i = 0; i < spec.motifs.size(); ++i)
    differs = differs || other.motifs[i].tokens() != spec.motifs[i].tokens();
  CHECK(differs);
}

TEST_CASE("oracle spec file round trip") {
  const auto& spec = standard_spec();
  const auto path =
      (std::filesystem::temp_directory_path() / "dppmb_test_oracle.spec").string();
  oracle::write_spec_file(path, spec);
  const auto back = oracle::read_spec_file(path);

  CHECK(back.seed == spec.seed);
  CHECK(back.alphabet.size == spec.alphabet.size);
  CHECK(back.alphabet.weight == spec.alphabet.weight);
  CHECK(back.alphabet.backbone == spec.alphabet.backbone);
  CHECK(back.weights == spec.weights);
  CHECK(back.forbidden_bigrams == spec.forbidden_bigrams);
  CHECK(back.activity_low == spec.activity_low);
  CHECK(back.activity_high == spec.activity_high);
  REQUIRE(back.motifs.size() == spec.motifs.size());
  for (size_t i = 0; i < spec.motifs.size(); ++i)
    CHECK(back.motifs[i].tokens() == spec.motifs[i].tokens());

  // byte-identical re-serialization
  CHECK(oracle::spec_to_string(back) == oracle::spec_to_string(spec));

  std::filesystem::remove(path);
  CHECK_THROWS_AS(oracle::read_spec_file(path), Error);
}

TEST_CASE("oracle spec validation") {
  OracleSpec spec = standard_spec();
  spec.motifs.clear();
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = standard_spec();
  spec.weights[2] = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = standard_spec();
  spec.activity_low = 0.9;
  CHECK_THROWS_AS(spec.validate(), Error);
}
