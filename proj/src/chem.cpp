#include "chem.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "error.hpp"

namespace dppmb::chem {

namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

// Token ids enter the hash as two little-endian bytes so fingerprints are
// bit-exact across implementations.
inline void fnv1a_u16le(uint64_t& h, int value) {
  h = (h ^ static_cast<uint64_t>(value & 0xff)) * kFnvPrime;
  h = (h ^ static_cast<uint64_t>((value >> 8) & 0xff)) * kFnvPrime;
}

}  // namespace

TokenAlphabet TokenAlphabet::standard() {
  TokenAlphabet a;
  a.size = 34;
  a.start_id = 0;
  a.stop_id = 1;
  a.backbone.assign(a.size, 0);
  a.donor.assign(a.size, 0);
  a.weight.resize(a.size);
  for (int i = 0; i < a.size; ++i) {
    a.backbone[i] = (i >= 2 && i <= 21) ? 1 : 0;
    a.donor[i] = (i >= 30) ? 1 : 0;
    a.weight[i] = 8.0 + 10.0 * i / 33.0;
  }
  a.validate();
  return a;
}

void TokenAlphabet::validate() const {
  if (size < 3) fail_arg("alphabet must have at least 3 tokens");
  if (start_id == stop_id) fail_arg("start and stop tokens must differ");
  if (start_id < 0 || start_id >= size || stop_id < 0 || stop_id >= size)
    fail_arg("start/stop token id out of range");
  if (backbone.size() != static_cast<size_t>(size) ||
      donor.size() != static_cast<size_t>(size) ||
      weight.size() != static_cast<size_t>(size))
    fail_arg("alphabet flag/weight arrays must match alphabet size");
  bool has_backbone = false, has_side = false;
  for (int i = 0; i < size; ++i) {
    if (is_terminal(i)) continue;
    if (backbone[i])
      has_backbone = true;
    else
      has_side = true;
    if (weight[i] <= 0.0) fail_arg("token weights must be positive");
  }
  if (!has_backbone || !has_side)
    fail_arg("alphabet needs at least one backbone and one non-backbone token");
}

int BitFingerprint::popcount() const {
  int c = 0;
  for (uint64_t w : words_) c += std::popcount(w);
  return c;
}

double BitFingerprint::tanimoto(const BitFingerprint& a, const BitFingerprint& b) {
  int inter = 0, uni = 0;
  for (int w = 0; w < kWords; ++w) {
    inter += std::popcount(a.words_[w] & b.words_[w]);
    uni += std::popcount(a.words_[w] | b.words_[w]);
  }
  if (uni == 0) return 1.0;  // two empty fingerprints are identical
  return static_cast<double>(inter) / static_cast<double>(uni);
}

CountFingerprint CountFingerprint::from_counts(
    std::vector<std::pair<int, uint32_t>> entries) {
  CountFingerprint fp;
  std::sort(entries.begin(), entries.end());
  for (const auto& [bucket, count] : entries) {
    if (bucket < 0 || bucket >= kBuckets) fail_arg("count bucket out of range");
    if (count == 0) continue;
    if (!fp.entries_.empty() && fp.entries_.back().first == bucket)
      fp.entries_.back().second += count;
    else
      fp.entries_.emplace_back(bucket, count);
    fp.total_ += count;
  }
  return fp;
}

double CountFingerprint::dice(const CountFingerprint& a, const CountFingerprint& b) {
  if (a.total_ == 0 && b.total_ == 0) return 1.0;
  uint64_t overlap = 0;
  auto ia = a.entries_.begin();
  auto ib = b.entries_.begin();
  while (ia != a.entries_.end() && ib != b.entries_.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      overlap += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return 2.0 * static_cast<double>(overlap) /
         static_cast<double>(a.total_ + b.total_);
}

Molecule Molecule::create(std::vector<int> tokens, const TokenAlphabet& a) {
  for (int t : tokens) {
    if (t < 0 || t >= a.size)
      fail_arg("token id " + std::to_string(t) + " outside alphabet");
    if (a.is_terminal(t))
      fail_arg("molecule must not contain start/stop tokens");
  }
  Molecule m;
  m.tokens_ = std::move(tokens);
  m.scaffold_.reserve(m.tokens_.size());
  for (int t : m.tokens_)
    if (a.backbone[t]) m.scaffold_.push_back(t);
  m.fp_ = ngram_fingerprint(m.tokens_);
  m.scaffold_pairs_ = atompair_fingerprint(m.scaffold_);
  return m;
}

std::string Molecule::join(const std::vector<int>& ids) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(ids[i]);
  }
  return out;
}

Molecule scaffold_of(const Molecule& m, const TokenAlphabet& a) {
  return Molecule::create(m.scaffold_tokens(), a);
}

BitFingerprint ngram_fingerprint(std::span<const int> tokens) {
  BitFingerprint fp;
  const int len = static_cast<int>(tokens.size());
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      uint64_t h = kFnvOffset;
      for (int j = 0; j < n; ++j) fnv1a_u16le(h, tokens[i + j]);
      fp.set(static_cast<int>(h % BitFingerprint::kWidth));
    }
  }
  return fp;
}

CountFingerprint atompair_fingerprint(std::span<const int> scaffold_tokens) {
  std::vector<std::pair<int, uint32_t>> counts;
  const int len = static_cast<int>(scaffold_tokens.size());
  for (int i = 0; i < len; ++i) {
    for (int j = i + 1; j < len && j - i <= 8; ++j) {
      uint64_t h = kFnvOffset;
      fnv1a_u16le(h, scaffold_tokens[i]);
      fnv1a_u16le(h, scaffold_tokens[j]);
      fnv1a_u16le(h, j - i);
      counts.emplace_back(static_cast<int>(h % CountFingerprint::kBuckets), 1u);
    }
  }
  return CountFingerprint::from_counts(std::move(counts));
}

double tanimoto(const BitFingerprint& a, const BitFingerprint& b) {
  return BitFingerprint::tanimoto(a, b);
}

double dice(const CountFingerprint& a, const CountFingerprint& b) {
  return CountFingerprint::dice(a, b);
}

std::vector<std::pair<std::string, BitFingerprint>> load_fingerprint_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open fingerprint file: " + path);

  std::vector<std::pair<std::string, BitFingerprint>> records;
  std::unordered_set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ss(line);
    std::string id;
    ss >> id;
    if (!seen.insert(id).second)
      fail_parse("fingerprint file line " + std::to_string(lineno) +
                 ": duplicate id '" + id + "'");
    BitFingerprint fp;
    std::string tok;
    while (ss >> tok) {
      size_t pos = 0;
      long bit = -1;
      try {
        bit = std::stol(tok, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != tok.size())
        fail_parse("fingerprint file line " + std::to_string(lineno) +
                   ": expected bit index, got '" + tok + "'");
      if (bit < 0 || bit >= BitFingerprint::kWidth)
        fail_arg("fingerprint file line " + std::to_string(lineno) +
                 ": bit index " + std::to_string(bit) + " out of [0, " +
                 std::to_string(BitFingerprint::kWidth) + ")");
      fp.set(static_cast<int>(bit));
    }
    records.emplace_back(std::move(id), fp);
  }
  return records;
}

std::vector<int> parse_token_list(const std::string& text) {
  std::istringstream ss(text);
  std::vector<int> out;
  std::string tok;
  while (ss >> tok) {
    size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size()) fail_parse("expected token id, got '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace dppmb::chem
