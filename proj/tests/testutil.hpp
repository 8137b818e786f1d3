#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "chem.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace testutil {

inline dppmb::Rng rng(uint64_t seed) { return dppmb::Rng(seed, 0xABCDEF); }

inline std::vector<int> random_tokens(dppmb::Rng& r, const dppmb::chem::TokenAlphabet& a,
                                      size_t min_len, size_t max_len) {
  const size_t len = min_len + r.below(max_len - min_len + 1);
  std::vector<int> tokens(len);
  for (auto& t : tokens) {
    do {
      t = static_cast<int>(r.below(static_cast<uint64_t>(a.size)));
    } while (a.is_terminal(t));
  }
  return tokens;
}

inline dppmb::chem::Molecule random_molecule(dppmb::Rng& r,
                                             const dppmb::chem::TokenAlphabet& a,
                                             size_t min_len = 1,
                                             size_t max_len = 40) {
  return dppmb::chem::Molecule::create(random_tokens(r, a, min_len, max_len), a);
}

// Random symmetric matrix with entries in [-1, 1].
inline dppmb::numerics::SymMatrix random_symmetric(dppmb::Rng& r, int n) {
  dppmb::numerics::SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, 2.0 * r.uniform() - 1.0);
  return m;
}

// Random PSD matrix built as A^T A with A n x n.
inline dppmb::numerics::SymMatrix random_psd(dppmb::Rng& r, int n) {
  std::vector<double> a(static_cast<size_t>(n) * n);
  for (auto& v : a) v = 2.0 * r.uniform() - 1.0;
  dppmb::numerics::SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += a[static_cast<size_t>(k) * n + i] * a[static_cast<size_t>(k) * n + j];
      m.set(i, j, s);
    }
  return m;
}

// Applies fn to every subset of {0..n-1}, the empty set included.
inline void for_each_subset(int n, const std::function<void(const std::vector<int>&)>& fn) {
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) subset.push_back(i);
    fn(subset);
  }
}

inline dppmb::numerics::SymMatrix restrict_to(const dppmb::numerics::SymMatrix& m,
                                              const std::vector<int>& idx) {
  dppmb::numerics::SymMatrix out(static_cast<int>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = i; j < idx.size(); ++j)
      out.set(static_cast<int>(i), static_cast<int>(j), m.at(idx[i], idx[j]));
  return out;
}

inline double total_variation(const std::map<std::vector<int>, double>& exact,
                              const std::map<std::vector<int>, int>& counts,
                              int64_t total_draws) {
  double tv = 0.0;
  for (const auto& [subset, p] : exact) {
    const auto it = counts.find(subset);
    const double emp = it == counts.end()
                           ? 0.0
                           : static_cast<double>(it->second) / total_draws;
    tv += std::abs(p - emp);
  }
  // subsets observed but impossible under `exact` have p = 0
  for (const auto& [subset, c] : counts)
    if (!exact.contains(subset)) tv += static_cast<double>(c) / total_draws;
  return tv / 2.0;
}

}  // namespace testutil
