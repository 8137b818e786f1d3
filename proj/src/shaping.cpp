#include "shaping.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "textio.hpp"

namespace dppmb::shaping {

Mode mode_from_string(std::string_view name) {
  if (name == "none") return Mode::none;
  if (name == "ims") return Mode::ims;
  if (name == "tanhrnd") return Mode::tanhrnd;
  fail_arg("unknown shaping mode: " + std::string(name));
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::none: return "none";
    case Mode::ims: return "ims";
    case Mode::tanhrnd: return "tanhrnd";
  }
  return "?";
}

bool MemoryStore::admit(const chem::Molecule& m, double reward, int64_t step,
                        const oracle::ScoreBreakdown& scores) {
  if (reward < 0.0 || reward > 1.0)
    fail_arg("admission reward must lie in [0, 1]");
  if (reward < threshold_) return false;
  if (!keys_.insert(m.key()).second) return false;  // already stored

  entries_.push_back(MemoryEntry{m, reward, step, scores});
  scaffold_buckets_[m.scaffold_key()] += 1;
  return true;
}

int MemoryStore::scaffold_count(const std::string& scaffold_key) const {
  const auto it = scaffold_buckets_.find(scaffold_key);
  return it == scaffold_buckets_.end() ? 0 : it->second;
}

void MemoryStore::write_csv(const std::string& path) const {
  std::ostringstream ss;
  ss << "step,reward,scaffold_key,tokens\n";
  for (const auto& e : entries_) {
    ss << e.step << ',' << textio::format_double(e.reward) << ','
       << e.molecule.scaffold_key() << ',';
    const auto& tokens = e.molecule.tokens();
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) ss << ' ';
      ss << tokens[i];
    }
    ss << '\n';
  }
  textio::write_file(path, ss.str());
}

std::vector<MemoryEntry> MemoryStore::read_csv(const std::string& path,
                                               const chem::TokenAlphabet& a) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open memory dump: " + path);
  std::string line;
  if (!std::getline(in, line) || textio::trim(line) != "step,reward,scaffold_key,tokens")
    fail_parse("memory dump " + path + ": missing header");

  std::vector<MemoryEntry> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (textio::trim(line).empty()) continue;
    const auto fields = textio::split(line, ',');
    if (fields.size() != 4)
      fail_parse("memory dump " + path + " line " + std::to_string(lineno) +
                 ": expected 4 columns");
    MemoryEntry e;
    e.step = textio::parse_int(fields[0], "step");
    e.reward = textio::parse_double(fields[1], "reward");
    e.molecule = chem::Molecule::create(chem::parse_token_list(fields[3]), a);
    if (e.molecule.scaffold_key() != textio::trim(fields[2]))
      fail_parse("memory dump " + path + " line " + std::to_string(lineno) +
                 ": scaffold key does not match tokens");
    out.push_back(std::move(e));
  }
  return out;
}

int ims_factor(const MemoryStore& mem, const chem::Molecule& m, int bucket_size) {
  return mem.scaffold_count(m.scaffold_key()) >= bucket_size ? 0 : 1;
}

RndState::RndState(uint64_t seed) {
  const size_t n = static_cast<size_t>(kOutputs) * kInputs;
  target_.resize(n);
  predictor_.resize(n);
  // Uniform(-a, a) with a = 1/sqrt(inputs) keeps the tanh pre-activations at
  // unit-ish scale for +-1 inputs.
  const double a = 1.0 / std::sqrt(static_cast<double>(kInputs));
  Rng target_rng(seed, stream::id(stream::rnd_target));
  Rng predictor_rng(seed, stream::id(stream::rnd_predictor));
  for (auto& w : target_) w = a * (2.0 * target_rng.uniform() - 1.0);
  for (auto& w : predictor_) w = a * (2.0 * predictor_rng.uniform() - 1.0);
}

void RndState::project(const std::vector<double>& weights,
                       const chem::BitFingerprint& fp, double* out) const {
  for (int j = 0; j < kOutputs; ++j) {
    const double* row = &weights[static_cast<size_t>(j) * kInputs];
    double z = 0.0;
    for (int i = 0; i < kInputs; ++i) z += fp.test(i) ? row[i] : -row[i];
    out[j] = std::tanh(z);
  }
}

double RndState::prediction_error(const chem::BitFingerprint& fp) const {
  double t[kOutputs], p[kOutputs];
  project(target_, fp, t);
  project(predictor_, fp, p);
  double e = 0.0;
  for (int j = 0; j < kOutputs; ++j) {
    const double d = p[j] - t[j];
    e += d * d;
  }
  return e / kOutputs;
}

double RndState::novelty(const chem::Molecule& m) const {
  const double e = prediction_error(m.fingerprint());
  return std::tanh(e / (mean_ + 1e-8));
}

void RndState::update(std::span<const chem::Molecule* const> selected) {
  double t[kOutputs], p[kOutputs];
  for (const chem::Molecule* mol : selected) {
    const auto& fp = mol->fingerprint();
    project(target_, fp, t);
    project(predictor_, fp, p);
    double e = 0.0;
    for (int j = 0; j < kOutputs; ++j) {
      const double d = p[j] - t[j];
      e += d * d;
    }
    e /= kOutputs;
    mean_ = decay_ * mean_ + (1.0 - decay_) * e;
    mean_sq_ = decay_ * mean_sq_ + (1.0 - decay_) * e * e;

    for (int j = 0; j < kOutputs; ++j) {
      const double gout =
          learning_rate_ * (2.0 / kOutputs) * (p[j] - t[j]) * (1.0 - p[j] * p[j]);
      if (gout == 0.0) continue;
      double* row = &predictor_[static_cast<size_t>(j) * kInputs];
      for (int i = 0; i < kInputs; ++i) row[i] -= fp.test(i) ? gout : -gout;
    }
  }
}

double RndState::error_variance() const {
  const double var = mean_sq_ - mean_ * mean_;
  return var > 0.0 ? var : 0.0;
}

double reshape(Mode mode, double extrinsic, const chem::Molecule& m,
               const MemoryStore& mem, const RndState* rnd, int bucket_size) {
  if (extrinsic < 0.0 || extrinsic > 1.0)
    fail_arg("extrinsic reward must lie in [0, 1]");
  switch (mode) {
    case Mode::none:
      return extrinsic;
    case Mode::ims:
      return ims_factor(mem, m, bucket_size) * extrinsic;
    case Mode::tanhrnd: {
      if (rnd == nullptr) fail_arg("tanhrnd shaping needs an RND state");
      return extrinsic * (0.5 + 0.5 * rnd->novelty(m));
    }
  }
  fail_arg("unknown shaping mode");
}

}  // namespace dppmb::shaping
