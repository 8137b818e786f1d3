#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chem.hpp"
#include "oracle.hpp"
#include "rng.hpp"

namespace dppmb::shaping {

enum class Mode { none, ims, tanhrnd };

Mode mode_from_string(std::string_view name);
std::string_view to_string(Mode m);

struct MemoryEntry {
  chem::Molecule molecule;
  double reward = 0.0;
  int64_t step = 0;
  oracle::ScoreBreakdown scores;  // cached at admission
};

// The accumulating set of high-scoring molecules. Admission requires
// reward >= h; an exact token-sequence duplicate is a no-op, so the store
// behaves as a set under repeated generation. Entries are never removed.
class MemoryStore {
 public:
  explicit MemoryStore(double admission_threshold)
      : threshold_(admission_threshold) {}

  double threshold() const { return threshold_; }

  // True when the molecule enters the store.
  bool admit(const chem::Molecule& m, double reward, int64_t step,
             const oracle::ScoreBreakdown& scores);

  bool contains_key(const std::string& key) const {
    return keys_.contains(key);
  }
  int scaffold_count(const std::string& scaffold_key) const;
  const std::vector<MemoryEntry>& entries() const { return entries_; }

  void write_csv(const std::string& path) const;

  // Reads a memory dump; scores are left zeroed for the caller to rescore.
  static std::vector<MemoryEntry> read_csv(const std::string& path,
                                           const chem::TokenAlphabet& a);

 private:
  double threshold_ = 0.5;
  std::vector<MemoryEntry> entries_;
  std::unordered_set<std::string> keys_;
  std::unordered_map<std::string, int> scaffold_buckets_;
};

// 0 once the molecule's scaffold bucket holds bucket_size admissions, 1 before.
int ims_factor(const MemoryStore& mem, const chem::Molecule& m, int bucket_size);

// Random network distillation over molecule fingerprints: a fixed random
// tanh-squashed linear map is the target, a trainable map of the same shape
// chases it, and the normalized prediction error is the novelty signal.
class RndState {
 public:
  static constexpr int kOutputs = 32;
  static constexpr int kInputs = chem::BitFingerprint::kWidth;

  explicit RndState(uint64_t seed);

  // Mean squared output gap for this fingerprint (bits mapped to +-1).
  double prediction_error(const chem::BitFingerprint& fp) const;

  // tanh(error / (running mean error + 1e-8)); high for unseen inputs.
  double novelty(const chem::Molecule& m) const;

  // One predictor gradient step per molecule (lr 1e-3); running stats decay
  // with 0.99 per observation. The target map never changes.
  void update(std::span<const chem::Molecule* const> selected);

  double error_mean() const { return mean_; }
  double error_variance() const;
  void set_error_mean(double mean) { mean_ = mean; }
  const std::vector<double>& target_weights() const { return target_; }

 private:
  void project(const std::vector<double>& weights,
               const chem::BitFingerprint& fp, double* out) const;

  std::vector<double> target_;     // kOutputs x kInputs
  std::vector<double> predictor_;  // kOutputs x kInputs
  double mean_ = 0.0;
  double mean_sq_ = 0.0;
  double learning_rate_ = 1e-3;
  double decay_ = 0.99;
};

// none -> R; ims -> factor * R; tanhrnd -> R * (0.5 + 0.5 * novelty).
double reshape(Mode mode, double extrinsic, const chem::Molecule& m,
               const MemoryStore& mem, const RndState* rnd, int bucket_size);

}  // namespace dppmb::shaping
