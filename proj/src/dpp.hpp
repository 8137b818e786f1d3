#pragma once

#include <map>
#include <span>
#include <vector>

#include "kernels.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace dppmb::dpp {

// Exact k-DPP sampler over an L-ensemble kernel. Preparation adds a 1e-8
// ridge so near-duplicate rows keep the kernel full rank, eigendecomposes,
// and tabulates the elementary symmetric polynomials up to order k.
// Immutable after construction; callers must not share one Rng stream
// across concurrent sample() calls.
class KdppSampler {
 public:
  KdppSampler(const kernels::KernelMatrix& l, int k);

  int k() const { return k_; }
  int n() const { return eig_.n; }
  double ridge() const { return ridge_; }
  const numerics::EigenDecomposition& decomposition() const { return eig_; }
  const numerics::ElemSymPolys& esp() const { return esp_; }

  // Phase 1: choose k eigenvector indices. Scanning m = N..1 with quota j,
  // index m-1 enters with probability lambda_m * e_{j-1}^{(m-1)} / e_j^{(m)}.
  std::vector<int> select_eigenvector_subset(Rng& rng) const;

  // Both phases; returns k ascending item indices distributed per the k-DPP
  // of the regularized kernel.
  std::vector<int> sample(Rng& rng) const;

 private:
  numerics::EigenDecomposition eig_;
  numerics::ElemSymPolys esp_;
  int k_ = 0;
  double ridge_ = 0.0;
};

// Elementary DPP of the span of k orthonormal N-vectors (column-major).
// At each step an item is picked with probability (sum of squared row
// entries) / (remaining dimension), then the span is contracted orthogonally
// to that coordinate and re-orthonormalized.
std::vector<int> sample_projection_dpp(int n, int k,
                                       std::span<const double> columns,
                                       Rng& rng);

// Exact subset probabilities over all C(N,k) subsets via determinants;
// refuses N > 15 and kernels whose size-k minors all vanish.
std::map<std::vector<int>, double> brute_force_pmf(const kernels::KernelMatrix& l,
                                                   int k);

}  // namespace dppmb::dpp
