#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "agent.hpp"
#include "chem.hpp"
#include "kernels.hpp"
#include "shaping.hpp"

namespace dppmb::harness {

enum class Variant { standalone, dpp_t, dpp_a, dpp_p, dpp_d };
enum class BudgetMode { strict, all_scored };

Variant variant_from_string(std::string_view name);
std::string_view to_string(Variant v);
BudgetMode budget_from_string(std::string_view name);
std::string_view to_string(BudgetMode b);

struct RunConfig {
  int64_t batch_size = 640;          // B generated per step
  int64_t steps = 10000;             // G generative steps
  int64_t mini_batch = 64;           // k selected per step
  double admission_threshold = 0.5;  // h
  double distance_threshold = 0.7;   // D for diverse actives
  double sigma = 128.0;
  double alpha = 1e-4;
  int64_t bucket_size = 25;          // M same-scaffold admissions
  int64_t horizon = 64;              // T
  Variant variant = Variant::dpp_a;
  shaping::Mode shaping = shaping::Mode::none;
  BudgetMode budget_mode = BudgetMode::strict;
  uint64_t seed = 0;
  std::string out_dir = "dppmb-run";
  int64_t metrics_every = 250;
  std::string prior_file;   // empty: train from the oracle's corpus
  std::string oracle_file;  // empty: built-in default oracle
  double prior_smoothing = 0.01;

  void validate() const;
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void apply_profile(const std::string& name);  // "desk": B=160 k=16 G=300 T=48
  std::string to_file_string() const;
};

struct RunResult {
  std::string out_dir;
  int64_t oracle_calls = 0;
  int64_t memory_size = 0;
  double final_mean_reward = 0.0;
  double final_diverse_actives = 0.0;
  int64_t final_actives = 0;
  int64_t final_scaffolds = 0;
};

// The full loop: parallel rollouts, dedup, selection (uniform or k-DPP over
// the variant kernel), budgeted scoring, shaping, one Adam step per
// generative step, and CSV logging into out_dir.
RunResult run_experiment(const RunConfig& config);

// Rollout phase shared with tests. Trajectory b draws from the stream
// (seed, rollout, step, b), so outputs are identical for any thread count.
std::vector<agent::Trajectory> rollout_batch(const agent::PolicyParams& policy,
                                             const chem::TokenAlphabet& a,
                                             int64_t count, int horizon,
                                             uint64_t seed, int64_t step,
                                             int threads);

// Rollout parallelism cap from DPPMB_THREADS (falls back to the hardware).
int configured_threads();

}  // namespace dppmb::harness
