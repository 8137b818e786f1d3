#include "agent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "error.hpp"
#include "textio.hpp"

namespace dppmb::agent {

namespace {

int checked_rows(int alphabet_size, int context_len) {
  if (alphabet_size < 2) fail_arg("policy needs an alphabet of at least 2 tokens");
  if (context_len < 1) fail_arg("policy context length must be >= 1");
  int64_t rows = 1;
  for (int i = 0; i < context_len; ++i) {
    rows *= alphabet_size;
    if (rows > (int64_t(1) << 26))
      fail_arg("policy table too large: alphabet " + std::to_string(alphabet_size) +
               "^" + std::to_string(context_len));
  }
  return static_cast<int>(rows);
}

// log softmax of one row evaluated at `action`.
double row_log_softmax(std::span<const double> row, int action) {
  double max = row[0];
  for (double v : row) max = std::max(max, v);
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - max);
  return (row[action] - max) - std::log(sum);
}

void row_softmax(std::span<const double> row, std::vector<double>& out) {
  out.resize(row.size());
  double max = row[0];
  for (double v : row) max = std::max(max, v);
  double sum = 0.0;
  for (size_t i = 0; i < row.size(); ++i) {
    out[i] = std::exp(row[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

}  // namespace

PolicyParams PolicyParams::zeros(int alphabet_size, int context_len) {
  PolicyParams p;
  p.alphabet_size = alphabet_size;
  p.context_len = context_len;
  p.logits.assign(static_cast<size_t>(checked_rows(alphabet_size, context_len)) *
                      alphabet_size,
                  0.0);
  return p;
}

int PolicyParams::rows() const {
  return checked_rows(alphabet_size, context_len);
}

ContextWindow::ContextWindow(const PolicyParams& p, int start_id) {
  radix = p.alphabet_size;
  modulus = 1;
  for (int i = 0; i < p.context_len - 1; ++i) modulus *= radix;
  index = 0;
  for (int i = 0; i < p.context_len; ++i) index = index * radix + start_id;
}

std::vector<int> Trajectory::molecule_tokens(const chem::TokenAlphabet& a) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (size_t i = 1; i < tokens.size(); ++i)
    if (!a.is_terminal(tokens[i])) out.push_back(tokens[i]);
  return out;
}

AdamState AdamState::like(const PolicyParams& p, double alpha) {
  AdamState st;
  st.m.assign(p.param_count(), 0.0);
  st.v.assign(p.param_count(), 0.0);
  st.alpha = alpha;
  return st;
}

Trajectory rollout(const PolicyParams& policy, const chem::TokenAlphabet& a,
                   Rng& rng, int horizon) {
  if (horizon < 1) fail_arg("rollout horizon must be >= 1");
  if (policy.alphabet_size != a.size)
    fail_arg("policy alphabet does not match token alphabet");

  Trajectory t;
  t.tokens.reserve(horizon + 1);
  t.tokens.push_back(a.start_id);
  t.logps.reserve(horizon);

  ContextWindow ctx(policy, a.start_id);
  std::vector<double> probs;
  for (int step = 0; step < horizon; ++step) {
    const auto row = policy.row(ctx.index);
    row_softmax(row, probs);
    double r = rng.uniform();
    int action = policy.alphabet_size - 1;
    for (int j = 0; j < policy.alphabet_size; ++j) {
      r -= probs[j];
      if (r <= 0.0) {
        action = j;
        break;
      }
    }
    t.tokens.push_back(action);
    t.logps.push_back(std::log(probs[action]));
    if (action == a.stop_id) {
      t.stopped = true;
      break;
    }
    ctx.push(action);
  }
  return t;
}

double log_prob(const PolicyParams& policy, const chem::TokenAlphabet& a,
                const Trajectory& t) {
  if (t.tokens.empty() || t.tokens.front() != a.start_id)
    fail_arg("trajectory must begin with the start token");
  ContextWindow ctx(policy, a.start_id);
  double total = 0.0;
  for (size_t i = 1; i < t.tokens.size(); ++i) {
    const int action = t.tokens[i];
    if (action < 0 || action >= policy.alphabet_size)
      fail_arg("trajectory token outside the policy alphabet");
    total += row_log_softmax(policy.row(ctx.index), action);
    ctx.push(action);
  }
  return total;
}

double augmented_log_likelihood(const PolicyParams& prior,
                                const chem::TokenAlphabet& a, double sigma,
                                double reward, const Trajectory& t) {
  return log_prob(prior, a, t) + sigma * reward;
}

LossGrad reinvent_loss_and_grad(const PolicyParams& policy,
                                const PolicyParams& prior,
                                const chem::TokenAlphabet& a,
                                std::span<const ScoredTrajectory> batch,
                                double sigma) {
  if (batch.empty()) fail_arg("loss needs a nonempty mini-batch");
  if (policy.alphabet_size != prior.alphabet_size ||
      policy.context_len != prior.context_len)
    fail_arg("policy and prior shapes differ");

  LossGrad out;
  out.grad.assign(policy.param_count(), 0.0);
  const double k = static_cast<double>(batch.size());
  const int alpha_n = policy.alphabet_size;

  std::unordered_map<int, std::vector<double>> softmax_cache;
  std::vector<std::pair<int, int>> steps;  // (context, action)

  for (const auto& item : batch) {
    const Trajectory& t = *item.trajectory;
    steps.clear();
    ContextWindow ctx(policy, a.start_id);
    double lp_policy = 0.0;
    for (size_t i = 1; i < t.tokens.size(); ++i) {
      const int action = t.tokens[i];
      lp_policy += row_log_softmax(policy.row(ctx.index), action);
      steps.emplace_back(ctx.index, action);
      ctx.push(action);
    }
    const double lp_aug = log_prob(prior, a, t) + sigma * item.reward;
    const double delta = lp_aug - lp_policy;
    out.loss += delta * delta;

    // d loss / d logits[c][j] accumulates -(2 delta / k) (1{j=action} - p_j)
    // per visited (context, action) step.
    const double coeff = -2.0 * delta / k;
    for (const auto& [c, action] : steps) {
      auto it = softmax_cache.find(c);
      if (it == softmax_cache.end()) {
        std::vector<double> probs;
        row_softmax(policy.row(c), probs);
        it = softmax_cache.emplace(c, std::move(probs)).first;
      }
      const auto& probs = it->second;
      double* g = &out.grad[static_cast<size_t>(c) * alpha_n];
      for (int j = 0; j < alpha_n; ++j) g[j] -= coeff * probs[j];
      g[action] += coeff;
    }
  }
  out.loss /= k;
  return out;
}

void adam_step(AdamState& state, PolicyParams& params, std::span<const double> grad) {
  if (grad.size() != params.param_count() || state.m.size() != grad.size())
    fail_arg("adam step shape mismatch");
  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / corr1;
    const double vhat = state.v[i] / corr2;
    params.logits[i] -= state.alpha * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

PolicyParams train_prior(std::span<const std::vector<int>> corpus,
                         const chem::TokenAlphabet& a, int context_len,
                         double smoothing) {
  if (corpus.empty()) fail_arg("prior corpus must be nonempty");
  if (!(smoothing > 0.0)) fail_arg("prior smoothing must be positive");

  PolicyParams p = PolicyParams::zeros(a.size, context_len);
  std::vector<double> counts(p.param_count(), 0.0);
  for (const auto& seq : corpus) {
    ContextWindow ctx(p, a.start_id);
    for (int token : seq) {
      if (token < 0 || token >= a.size) fail_arg("corpus token outside alphabet");
      counts[static_cast<size_t>(ctx.index) * a.size + token] += 1.0;
      ctx.push(token);
    }
    counts[static_cast<size_t>(ctx.index) * a.size + a.stop_id] += 1.0;
  }
  for (size_t i = 0; i < counts.size(); ++i)
    p.logits[i] = std::log(counts[i] + smoothing);
  return p;
}

std::vector<std::vector<int>> prior_corpus(const oracle::OracleSpec& spec) {
  constexpr int kCorpusSize = 2000;
  constexpr double kResampleRate = 0.3;
  constexpr int kRandomMin = 20;
  constexpr int kRandomMax = 60;

  const auto& a = spec.alphabet;
  std::vector<int> vocab;
  for (int t = 0; t < a.size; ++t)
    if (!a.is_terminal(t)) vocab.push_back(t);

  Rng rng(spec.seed, stream::id(stream::prior_corpus));
  std::vector<std::vector<int>> corpus;
  corpus.reserve(kCorpusSize);
  for (int i = 0; i < kCorpusSize; ++i) {
    if (i % 2 == 0) {
      const auto& motif = spec.motifs[(i / 2) % spec.motifs.size()];
      std::vector<int> seq = motif.tokens();
      for (int& t : seq)
        if (rng.uniform() < kResampleRate) t = vocab[rng.below(vocab.size())];
      corpus.push_back(std::move(seq));
    } else {
      const size_t len = kRandomMin + rng.below(kRandomMax - kRandomMin + 1);
      std::vector<int> seq(len);
      for (int& t : seq) t = vocab[rng.below(vocab.size())];
      corpus.push_back(std::move(seq));
    }
  }
  return corpus;
}

namespace {

constexpr char kPolicyMagic[8] = {'D', 'P', 'P', 'M', 'B', 'P', 'R', '1'};

void put_u32_le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64_le(std::string& out, double d) {
  const uint64_t v = std::bit_cast<uint64_t>(d);
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

uint32_t get_u32_le(const unsigned char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64_le(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_policy_file(const std::string& path, const PolicyParams& p) {
  std::string out;
  out.reserve(16 + p.param_count() * 8);
  out.append(kPolicyMagic, sizeof(kPolicyMagic));
  put_u32_le(out, static_cast<uint32_t>(p.alphabet_size));
  put_u32_le(out, static_cast<uint32_t>(p.context_len));
  for (double v : p.logits) put_f64_le(out, v);
  textio::write_file(path, out);
}

PolicyParams read_policy_file(const std::string& path) {
  const std::string data = textio::read_file(path);
  if (data.size() < 16 || std::memcmp(data.data(), kPolicyMagic, 8) != 0)
    fail_parse("policy file " + path + ": bad magic");
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const uint32_t alphabet_size = get_u32_le(bytes + 8);
  const uint32_t context_len = get_u32_le(bytes + 12);
  PolicyParams p = PolicyParams::zeros(static_cast<int>(alphabet_size),
                                       static_cast<int>(context_len));
  if (data.size() != 16 + p.param_count() * 8)
    fail_parse("policy file " + path + ": truncated parameter block");
  for (size_t i = 0; i < p.param_count(); ++i)
    p.logits[i] = get_f64_le(bytes + 16 + i * 8);
  return p;
}

}  // namespace dppmb::agent
