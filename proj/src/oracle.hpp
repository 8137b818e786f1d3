#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chem.hpp"

namespace dppmb::oracle {

inline constexpr uint64_t kDefaultOracleSeed = 0xC0FFEE;

struct TransformParams {
  double mw_low = 200.0, mw_high = 550.0;
  double mw_cdiv = 500.0, mw_csi = 20.0, mw_cse = 20.0;
  double hbd_low = 2.0, hbd_high = 6.0, hbd_k = 0.5;
  double qed_center = 2.0, qed_sigma = 1.0;
};

// The full reward definition: hidden active motifs, per-component transform
// parameters, forbidden token bigrams and the component weights. Immutable
// once built; scoring is pure.
struct OracleSpec {
  chem::TokenAlphabet alphabet;
  std::vector<chem::Molecule> motifs;
  std::array<double, 5> weights{1.0, 1.0, 1.0, 1.0, 5.0};  // mw hbd qed alerts activity
  TransformParams transforms;
  std::vector<std::pair<int, int>> forbidden_bigrams;
  double activity_low = 0.3;   // a0
  double activity_high = 0.8;  // a1
  uint64_t seed = kDefaultOracleSeed;

  // Deterministic default landscape: 5 hidden motifs of length 30 with
  // pairwise fingerprint Tanimoto <= 0.3 and 4 forbidden side-chain bigrams.
  static OracleSpec standard(uint64_t seed = kDefaultOracleSeed);

  void validate() const;
};

struct PropertyValues {
  double mw = 0.0;
  int hbd = 0;
  double qed = 0.0;
  int alerts = 1;
};

struct ScoreBreakdown {
  double mw_score = 0.0;
  double hbd_score = 0.0;
  double qed = 0.0;
  double alerts = 0.0;
  double activity = 0.0;
  double reward = 0.0;
};

double double_sigmoid(double x, double low, double high, double c_div,
                      double c_si, double c_se);
double reverse_sigmoid(double x, double low, double high, double k);

PropertyValues property_proxies(const chem::Molecule& m, const OracleSpec& spec);

// Best motif fingerprint similarity rescaled from [a0, a1] onto [0, 1].
double activity(const chem::Molecule& m, const OracleSpec& spec);

// Weighted geometric mean of the five component scores; zero if any
// component is zero.
ScoreBreakdown extrinsic_reward(const chem::Molecule& m, const OracleSpec& spec);

double geometric_mean(std::span<const double> scores, std::span<const double> weights);

void write_spec_file(const std::string& path, const OracleSpec& spec);
OracleSpec read_spec_file(const std::string& path);
std::string spec_to_string(const OracleSpec& spec);

}  // namespace dppmb::oracle
