#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"
#include "textio.hpp"

namespace dppmb::oracle {

namespace {

constexpr int kMotifCount = 5;
constexpr int kMotifLength = 30;
constexpr int kMotifPeriod = 15;
constexpr int kMotifPoolTokens = 4;
constexpr double kMotifMaxSimilarity = 0.3;
constexpr int kForbiddenBigrams = 4;

// Cyclic walk visiting 15 of the 16 ordered token pairs over a 4-token pool
// exactly once (the complete digraph with self-loops minus one self-loop has
// an Eulerian circuit). Every pair then has a unique continuation, so the
// walk is exactly representable by a 2-token-context policy.
std::vector<int> euler_walk(Rng& rng, const std::vector<int>& pool) {
  const int n = static_cast<int>(pool.size());
  const int skip_loop = static_cast<int>(rng.below(n));

  // adjacency[a] = successors of a, each usable once
  std::vector<std::vector<int>> adjacency(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b && a == skip_loop) continue;
      adjacency[a].push_back(b);
    }
    for (size_t i = 0; i + 1 < adjacency[a].size(); ++i) {
      const size_t j = i + rng.below(adjacency[a].size() - i);
      std::swap(adjacency[a][i], adjacency[a][j]);
    }
  }

  // Hierholzer's algorithm.
  std::vector<size_t> next_edge(n, 0);
  std::vector<int> stack{static_cast<int>(rng.below(n))};
  std::vector<int> circuit;
  while (!stack.empty()) {
    const int v = stack.back();
    if (next_edge[v] < adjacency[v].size()) {
      stack.push_back(adjacency[v][next_edge[v]++]);
    } else {
      circuit.push_back(v);
      stack.pop_back();
    }
  }
  circuit.pop_back();  // closing vertex repeats the start

  std::vector<int> walk(circuit.rbegin(), circuit.rend());
  for (int& t : walk) t = pool[t];
  return walk;
}

bool contains_bigram(const std::vector<int>& tokens,
                     const std::vector<std::pair<int, int>>& bigrams) {
  for (size_t i = 0; i + 1 < tokens.size(); ++i)
    for (const auto& [a, b] : bigrams)
      if (tokens[i] == a && tokens[i + 1] == b) return true;
  return false;
}

void shuffle(Rng& rng, std::vector<int>& items) {
  for (size_t i = 0; i + 1 < items.size(); ++i) {
    const size_t j = i + rng.below(items.size() - i);
    std::swap(items[i], items[j]);
  }
}

}  // namespace

OracleSpec OracleSpec::standard(uint64_t seed) {
  OracleSpec spec;
  spec.seed = seed;
  spec.alphabet = chem::TokenAlphabet::standard();
  Rng rng(seed, stream::id(stream::oracle_motifs));

  // Side-chain token ids for the standard alphabet.
  std::vector<int> side_tokens, side_non_donor, backbone_tokens;
  for (int t = 0; t < spec.alphabet.size; ++t) {
    if (spec.alphabet.is_terminal(t)) continue;
    if (spec.alphabet.backbone[t]) {
      backbone_tokens.push_back(t);
    } else {
      side_tokens.push_back(t);
      if (!spec.alphabet.donor[t]) side_non_donor.push_back(t);
    }
  }

  std::set<std::pair<int, int>> forbidden;
  while (static_cast<int>(forbidden.size()) < kForbiddenBigrams) {
    const int a = side_tokens[rng.below(side_tokens.size())];
    const int b = side_tokens[rng.below(side_tokens.size())];
    forbidden.emplace(a, b);
  }
  spec.forbidden_bigrams.assign(forbidden.begin(), forbidden.end());

  // Each motif is a period-15 Eulerian walk over its own 4-token backbone
  // pool, repeated to length 30. Distinct cyclic pairs make the continuation
  // a deterministic function of the last two tokens, so the context-window
  // policy family can represent every mode exactly while partial
  // walk-following yields a graded activity signal. Pools are dealt
  // disjointly across motifs, stratified by token weight so a single walk
  // period sits below the molecular-weight window and two periods inside
  // it. Regenerate on a forbidden bigram or pairwise motif similarity
  // above 0.3.
  std::sort(backbone_tokens.begin(), backbone_tokens.end(), [&](int a, int b) {
    return spec.alphabet.weight[a] < spec.alphabet.weight[b];
  });
  const int stratum_size =
      static_cast<int>(backbone_tokens.size()) / kMotifPoolTokens;
  for (int s = 0; s < kMotifPoolTokens; ++s) {
    std::vector<int> stratum(backbone_tokens.begin() + s * stratum_size,
                             backbone_tokens.begin() + (s + 1) * stratum_size);
    shuffle(rng, stratum);
    std::copy(stratum.begin(), stratum.end(),
              backbone_tokens.begin() + s * stratum_size);
  }

  int motif_index = 0;
  while (static_cast<int>(spec.motifs.size()) < kMotifCount) {
    std::vector<int> pool;
    for (int s = 0; s < kMotifPoolTokens; ++s)
      pool.push_back(backbone_tokens[s * stratum_size +
                                     (motif_index % stratum_size)]);

    const std::vector<int> walk = euler_walk(rng, pool);
    std::vector<int> tokens(kMotifLength);
    for (int i = 0; i < kMotifLength; ++i) tokens[i] = walk[i % kMotifPeriod];
    if (contains_bigram(tokens, spec.forbidden_bigrams)) continue;

    chem::Molecule candidate = chem::Molecule::create(std::move(tokens), spec.alphabet);
    bool distinct_enough = true;
    for (const auto& m : spec.motifs)
      if (chem::tanimoto(candidate.fingerprint(), m.fingerprint()) >
          kMotifMaxSimilarity) {
        distinct_enough = false;
        break;
      }
    if (distinct_enough) {
      spec.motifs.push_back(std::move(candidate));
      ++motif_index;
    }
  }

  spec.validate();
  return spec;
}

void OracleSpec::validate() const {
  alphabet.validate();
  if (motifs.empty()) fail_arg("oracle spec needs at least one motif");
  for (double w : weights)
    if (!(w > 0.0)) fail_arg("oracle component weights must be positive");
  if (!(activity_low < activity_high))
    fail_arg("activity rescale bounds need a0 < a1");
  if (!(transforms.mw_low < transforms.mw_high) || !(transforms.mw_cdiv > 0.0))
    fail_arg("double sigmoid needs low < high and c_div > 0");
  if (!(transforms.hbd_low < transforms.hbd_high) || !(transforms.hbd_k > 0.0))
    fail_arg("reverse sigmoid needs low < high and k > 0");
  for (const auto& [a, b] : forbidden_bigrams)
    if (a < 0 || a >= alphabet.size || b < 0 || b >= alphabet.size)
      fail_arg("forbidden bigram token out of range");
}

double double_sigmoid(double x, double low, double high, double c_div,
                      double c_si, double c_se) {
  if (!(low < high)) fail_arg("double sigmoid needs low < high");
  if (!(c_div > 0.0)) fail_arg("double sigmoid needs c_div > 0");
  // Algebraically 10^{c_se x/c_div} / (10^{c_se x/c_div} + 10^{c_se low/c_div})
  // minus the same shape anchored at `high`, written to avoid overflow.
  const double rise = 1.0 / (1.0 + std::pow(10.0, c_se * (low - x) / c_div));
  const double fall = 1.0 / (1.0 + std::pow(10.0, c_si * (high - x) / c_div));
  return std::clamp(rise - fall, 0.0, 1.0);
}

double reverse_sigmoid(double x, double low, double high, double k) {
  if (!(low < high)) fail_arg("reverse sigmoid needs low < high");
  if (!(k > 0.0)) fail_arg("reverse sigmoid needs k > 0");
  return 1.0 / (1.0 + std::pow(10.0, k * (x - (low + high) / 2.0) * 10.0 / (high - low)));
}

PropertyValues property_proxies(const chem::Molecule& m, const OracleSpec& spec) {
  PropertyValues p;
  const auto& tokens = m.tokens();
  std::vector<int> histogram(spec.alphabet.size, 0);
  for (int t : tokens) {
    p.mw += spec.alphabet.weight[t];
    if (spec.alphabet.donor[t]) ++p.hbd;
    ++histogram[t];
  }

  double entropy = 0.0;
  if (!tokens.empty()) {
    const double len = static_cast<double>(tokens.size());
    for (int c : histogram) {
      if (c == 0) continue;
      const double f = c / len;
      entropy -= f * std::log(f);
    }
  }
  const double dev = (entropy - spec.transforms.qed_center) / spec.transforms.qed_sigma;
  p.qed = std::exp(-dev * dev);

  p.alerts = contains_bigram(tokens, spec.forbidden_bigrams) ? 0 : 1;
  return p;
}

double activity(const chem::Molecule& m, const OracleSpec& spec) {
  double best = 0.0;
  for (const auto& motif : spec.motifs)
    best = std::max(best, chem::tanimoto(m.fingerprint(), motif.fingerprint()));
  return std::clamp((best - spec.activity_low) /
                        (spec.activity_high - spec.activity_low),
                    0.0, 1.0);
}

double geometric_mean(std::span<const double> scores, std::span<const double> weights) {
  if (scores.size() != weights.size() || scores.empty())
    fail_arg("geometric mean needs matching nonempty score/weight lists");
  double total = 0.0;
  for (double w : weights) total += w;
  double log_sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] <= 0.0) return 0.0;
    log_sum += weights[i] * std::log(scores[i]);
  }
  return std::clamp(std::exp(log_sum / total), 0.0, 1.0);
}

ScoreBreakdown extrinsic_reward(const chem::Molecule& m, const OracleSpec& spec) {
  const PropertyValues p = property_proxies(m, spec);
  const auto& tr = spec.transforms;

  ScoreBreakdown s;
  s.mw_score = double_sigmoid(p.mw, tr.mw_low, tr.mw_high, tr.mw_cdiv, tr.mw_csi,
                              tr.mw_cse);
  s.hbd_score = reverse_sigmoid(p.hbd, tr.hbd_low, tr.hbd_high, tr.hbd_k);
  s.qed = p.qed;
  s.alerts = static_cast<double>(p.alerts);
  s.activity = activity(m, spec);

  const std::array<double, 5> scores{s.mw_score, s.hbd_score, s.qed, s.alerts,
                                     s.activity};
  s.reward = geometric_mean(scores, spec.weights);
  return s;
}

std::string spec_to_string(const OracleSpec& spec) {
  std::ostringstream ss;
  ss << "# synthetic oracle definition\n";
  ss << "version = 1\n";
  ss << "seed = " << spec.seed << "\n";
  ss << "alphabet_size = " << spec.alphabet.size << "\n";
  ss << "start_id = " << spec.alphabet.start_id << "\n";
  ss << "stop_id = " << spec.alphabet.stop_id << "\n";
  for (int t = 0; t < spec.alphabet.size; ++t)
    ss << "token = " << t << ' ' << int(spec.alphabet.backbone[t]) << ' '
       << int(spec.alphabet.donor[t]) << ' '
       << textio::format_double(spec.alphabet.weight[t]) << "\n";
  ss << "weights = " << textio::format_double(spec.weights[0]);
  for (size_t i = 1; i < spec.weights.size(); ++i)
    ss << ' ' << textio::format_double(spec.weights[i]);
  ss << "\n";
  const auto& tr = spec.transforms;
  ss << "mw_low = " << textio::format_double(tr.mw_low) << "\n";
  ss << "mw_high = " << textio::format_double(tr.mw_high) << "\n";
  ss << "mw_cdiv = " << textio::format_double(tr.mw_cdiv) << "\n";
  ss << "mw_csi = " << textio::format_double(tr.mw_csi) << "\n";
  ss << "mw_cse = " << textio::format_double(tr.mw_cse) << "\n";
  ss << "hbd_low = " << textio::format_double(tr.hbd_low) << "\n";
  ss << "hbd_high = " << textio::format_double(tr.hbd_high) << "\n";
  ss << "hbd_k = " << textio::format_double(tr.hbd_k) << "\n";
  ss << "qed_center = " << textio::format_double(tr.qed_center) << "\n";
  ss << "qed_sigma = " << textio::format_double(tr.qed_sigma) << "\n";
  ss << "activity_low = " << textio::format_double(spec.activity_low) << "\n";
  ss << "activity_high = " << textio::format_double(spec.activity_high) << "\n";
  for (const auto& [a, b] : spec.forbidden_bigrams)
    ss << "forbidden = " << a << ' ' << b << "\n";
  for (const auto& m : spec.motifs) {
    ss << "motif =";
    for (int t : m.tokens()) ss << ' ' << t;
    ss << "\n";
  }
  return ss.str();
}

void write_spec_file(const std::string& path, const OracleSpec& spec) {
  textio::write_file(path, spec_to_string(spec));
}

OracleSpec read_spec_file(const std::string& path) {
  const auto pairs = textio::read_key_values(path);

  OracleSpec spec;
  spec.alphabet = chem::TokenAlphabet{};
  spec.motifs.clear();
  spec.forbidden_bigrams.clear();
  std::vector<std::vector<int>> motif_tokens;

  for (const auto& [key, value] : pairs) {
    if (key == "version") {
      if (textio::parse_int(value, key) != 1)
        fail_parse("oracle spec " + path + ": unsupported version " + value);
    } else if (key == "seed") {
      spec.seed = textio::parse_uint(value, key);
    } else if (key == "alphabet_size") {
      const int n = static_cast<int>(textio::parse_int(value, key));
      spec.alphabet.size = n;
      spec.alphabet.backbone.assign(n, 0);
      spec.alphabet.donor.assign(n, 0);
      spec.alphabet.weight.assign(n, 0.0);
    } else if (key == "start_id") {
      spec.alphabet.start_id = static_cast<int>(textio::parse_int(value, key));
    } else if (key == "stop_id") {
      spec.alphabet.stop_id = static_cast<int>(textio::parse_int(value, key));
    } else if (key == "token") {
      const auto f = textio::split_ws(value);
      if (f.size() != 4) fail_parse("oracle spec " + path + ": bad token line");
      const int id = static_cast<int>(textio::parse_int(f[0], "token id"));
      if (id < 0 || id >= spec.alphabet.size)
        fail_parse("oracle spec " + path + ": token id out of range");
      spec.alphabet.backbone[id] =
          static_cast<uint8_t>(textio::parse_int(f[1], "backbone flag"));
      spec.alphabet.donor[id] =
          static_cast<uint8_t>(textio::parse_int(f[2], "donor flag"));
      spec.alphabet.weight[id] = textio::parse_double(f[3], "token weight");
    } else if (key == "weights") {
      const auto f = textio::split_ws(value);
      if (f.size() != spec.weights.size())
        fail_parse("oracle spec " + path + ": expected 5 component weights");
      for (size_t i = 0; i < f.size(); ++i)
        spec.weights[i] = textio::parse_double(f[i], "component weight");
    } else if (key == "mw_low") {
      spec.transforms.mw_low = textio::parse_double(value, key);
    } else if (key == "mw_high") {
      spec.transforms.mw_high = textio::parse_double(value, key);
    } else if (key == "mw_cdiv") {
      spec.transforms.mw_cdiv = textio::parse_double(value, key);
    } else if (key == "mw_csi") {
      spec.transforms.mw_csi = textio::parse_double(value, key);
    } else if (key == "mw_cse") {
      spec.transforms.mw_cse = textio::parse_double(value, key);
    } else if (key == "hbd_low") {
      spec.transforms.hbd_low = textio::parse_double(value, key);
    } else if (key == "hbd_high") {
      spec.transforms.hbd_high = textio::parse_double(value, key);
    } else if (key == "hbd_k") {
      spec.transforms.hbd_k = textio::parse_double(value, key);
    } else if (key == "qed_center") {
      spec.transforms.qed_center = textio::parse_double(value, key);
    } else if (key == "qed_sigma") {
      spec.transforms.qed_sigma = textio::parse_double(value, key);
    } else if (key == "activity_low") {
      spec.activity_low = textio::parse_double(value, key);
    } else if (key == "activity_high") {
      spec.activity_high = textio::parse_double(value, key);
    } else if (key == "forbidden") {
      const auto f = textio::split_ws(value);
      if (f.size() != 2) fail_parse("oracle spec " + path + ": bad forbidden line");
      spec.forbidden_bigrams.emplace_back(
          static_cast<int>(textio::parse_int(f[0], "forbidden token")),
          static_cast<int>(textio::parse_int(f[1], "forbidden token")));
    } else if (key == "motif") {
      motif_tokens.push_back(chem::parse_token_list(value));
    } else {
      fail_parse("oracle spec " + path + ": unknown key '" + key + "'");
    }
  }

  for (auto& tokens : motif_tokens)
    spec.motifs.push_back(chem::Molecule::create(std::move(tokens), spec.alphabet));
  spec.validate();
  return spec;
}

}  // namespace dppmb::oracle
