#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dppmb::chem {

// Token vocabulary for the synthetic sequence domain. Tokens play the role
// of atoms: backbone tokens form the scaffold, donor tokens count toward the
// hydrogen-bond-donor proxy, and weights sum to the molecular-weight proxy.
struct TokenAlphabet {
  int size = 0;
  int start_id = 0;
  int stop_id = 1;
  std::vector<uint8_t> backbone;  // one flag per token id
  std::vector<uint8_t> donor;
  std::vector<double> weight;

  // 34 tokens: 0=start, 1=stop, 2..21 backbone, 22..33 side chain with
  // donors on 30..33; weights linearly spaced over [8, 18].
  static TokenAlphabet standard();

  void validate() const;
  bool is_terminal(int token) const { return token == start_id || token == stop_id; }
};

class BitFingerprint {
 public:
  static constexpr int kWidth = 2048;
  static constexpr int kWords = kWidth / 64;

  void set(int bit) { words_[bit >> 6] |= 1ull << (bit & 63); }
  bool test(int bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1; }
  int popcount() const;

  bool operator==(const BitFingerprint&) const = default;

  static double tanimoto(const BitFingerprint& a, const BitFingerprint& b);

 private:
  std::array<uint64_t, kWords> words_{};
};

// Sparse nonnegative counts over a 1024-bucket space, sorted by bucket.
class CountFingerprint {
 public:
  static constexpr int kBuckets = 1024;

  static CountFingerprint from_counts(std::vector<std::pair<int, uint32_t>> entries);

  const std::vector<std::pair<int, uint32_t>>& entries() const { return entries_; }
  uint64_t total() const { return total_; }
  bool empty() const { return entries_.empty(); }

  static double dice(const CountFingerprint& a, const CountFingerprint& b);

 private:
  std::vector<std::pair<int, uint32_t>> entries_;
  uint64_t total_ = 0;
};

// A generated sequence with its derived features cached at construction.
class Molecule {
 public:
  Molecule() = default;
  static Molecule create(std::vector<int> tokens, const TokenAlphabet& a);

  const std::vector<int>& tokens() const { return tokens_; }
  const std::vector<int>& scaffold_tokens() const { return scaffold_; }
  const BitFingerprint& fingerprint() const { return fp_; }
  const CountFingerprint& scaffold_pairs() const { return scaffold_pairs_; }

  // Exact token-sequence keys, e.g. "2-5-9"; empty sequence gives "".
  std::string key() const { return join(tokens_); }
  std::string scaffold_key() const { return join(scaffold_); }

  bool empty() const { return tokens_.empty(); }
  size_t length() const { return tokens_.size(); }

 private:
  static std::string join(const std::vector<int>& ids);

  std::vector<int> tokens_;
  std::vector<int> scaffold_;
  BitFingerprint fp_;
  CountFingerprint scaffold_pairs_;
};

// Backbone-token subsequence as a molecule of its own; idempotent.
Molecule scaffold_of(const Molecule& m, const TokenAlphabet& a);

// Hashed n-gram bits (n = 1..3) over the token sequence.
BitFingerprint ngram_fingerprint(std::span<const int> tokens);

// Position-pair counts over a scaffold, separation capped at 8.
CountFingerprint atompair_fingerprint(std::span<const int> scaffold_tokens);

double tanimoto(const BitFingerprint& a, const BitFingerprint& b);
double dice(const CountFingerprint& a, const CountFingerprint& b);

// Parses `<id> <bit-index> ...` records; `#` begins a comment line.
std::vector<std::pair<std::string, BitFingerprint>> load_fingerprint_file(
    const std::string& path);

std::vector<int> parse_token_list(const std::string& text);

}  // namespace dppmb::chem
