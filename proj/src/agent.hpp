#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chem.hpp"
#include "oracle.hpp"
#include "rng.hpp"

namespace dppmb::agent {

// Fixed-context softmax table: one logit row per context of the last
// `context_len` tokens (left-padded with the start id), one column per token.
struct PolicyParams {
  int alphabet_size = 0;
  int context_len = 2;
  std::vector<double> logits;  // rows x alphabet_size

  static PolicyParams zeros(int alphabet_size, int context_len);

  int rows() const;
  size_t param_count() const { return logits.size(); }
  std::span<double> row(int ctx) {
    return {logits.data() + static_cast<size_t>(ctx) * alphabet_size,
            static_cast<size_t>(alphabet_size)};
  }
  std::span<const double> row(int ctx) const {
    return {logits.data() + static_cast<size_t>(ctx) * alphabet_size,
            static_cast<size_t>(alphabet_size)};
  }
};

// Rolling context index: drop the oldest token, append the newest.
struct ContextWindow {
  int radix = 0;       // alphabet size
  int modulus = 1;     // radix^(context_len-1)
  int index = 0;

  ContextWindow(const PolicyParams& p, int start_id);
  void push(int token) { index = (index % modulus) * radix + token; }
};

struct Trajectory {
  std::vector<int> tokens;    // starts with the start id; ends with stop iff stopped
  std::vector<double> logps;  // one per generated action, under the generating policy
  bool stopped = false;

  std::vector<int> molecule_tokens(const chem::TokenAlphabet& a) const;
};

struct AdamState {
  std::vector<double> m, v;
  int64_t step = 0;
  double alpha = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const PolicyParams& p, double alpha);
};

// Autoregressive sampling from softmax rows until the stop token or the
// horizon; deterministic given the rng stream.
Trajectory rollout(const PolicyParams& policy, const chem::TokenAlphabet& a,
                   Rng& rng, int horizon);

// Sum of log softmax probabilities over every generated action, stop included.
double log_prob(const PolicyParams& policy, const chem::TokenAlphabet& a,
                const Trajectory& t);

// log pi_prior(traj) + sigma * reward.
double augmented_log_likelihood(const PolicyParams& prior,
                                const chem::TokenAlphabet& a, double sigma,
                                double reward, const Trajectory& t);

struct ScoredTrajectory {
  const Trajectory* trajectory = nullptr;
  double reward = 0.0;  // reshaped reward when shaping is active
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean squared difference between augmented and policy log-likelihood over
// the mini-batch, with the exact analytic gradient through the softmax.
LossGrad reinvent_loss_and_grad(const PolicyParams& policy,
                                const PolicyParams& prior,
                                const chem::TokenAlphabet& a,
                                std::span<const ScoredTrajectory> batch,
                                double sigma);

void adam_step(AdamState& state, PolicyParams& params, std::span<const double> grad);

// logits = ln(count(context, token) + smoothing) over the corpus transitions.
PolicyParams train_prior(std::span<const std::vector<int>> corpus,
                         const chem::TokenAlphabet& a, int context_len,
                         double smoothing);

// 2000 sequences: motif copies with tokens resampled at rate 0.3 alternating
// with uniform random sequences of length 20..60; derived from spec.seed.
std::vector<std::vector<int>> prior_corpus(const oracle::OracleSpec& spec);

// Versioned binary file: magic, alphabet size, context length, then raw
// little-endian doubles.
void write_policy_file(const std::string& path, const PolicyParams& p);
PolicyParams read_policy_file(const std::string& path);

}  // namespace dppmb::agent
