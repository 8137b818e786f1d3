#include "dpp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace dppmb::dpp {

namespace {

constexpr double kRidge = 1e-8;
constexpr double kPsdTolerance = 1e-8;

}  // namespace

KdppSampler::KdppSampler(const kernels::KernelMatrix& l, int k)
    : ridge_(kRidge) {
  const int n = l.mat.dim();
  if (k < 1) fail_arg("k must be >= 1, got " + std::to_string(k));
  if (k > n)
    fail_arg("k = " + std::to_string(k) + " exceeds kernel dimension " +
             std::to_string(n));
  k_ = k;

  numerics::SymMatrix regularized = l.mat;
  for (int i = 0; i < n; ++i)
    regularized.set(i, i, regularized.at(i, i) + ridge_);

  eig_ = numerics::sym_eig(regularized);
  if (eig_.values.front() < -kPsdTolerance)
    fail_numeric("kernel is not positive semidefinite: min eigenvalue " +
                 std::to_string(eig_.values.front() - ridge_) +
                 " before regularization");
  for (double& v : eig_.values)
    if (v < 0.0) v = 0.0;

  esp_ = numerics::elem_sym_polys(eig_.values, k_);
}

std::vector<int> KdppSampler::select_eigenvector_subset(Rng& rng) const {
  const int n = eig_.n;
  std::vector<int> chosen;
  chosen.reserve(k_);
  int quota = k_;
  for (int m = n; m >= 1 && quota > 0; --m) {
    double p;
    if (m == quota) {
      p = 1.0;  // every remaining eigenvector is forced
    } else {
      const double denom = esp_.at(m, quota);
      if (denom <= 0.0) continue;
      p = eig_.values[m - 1] * esp_.at(m - 1, quota - 1) / denom;
    }
    if (rng.uniform() < p) {
      chosen.push_back(m - 1);
      --quota;
    }
  }
  if (quota != 0)
    fail_numeric("eigenvalue phase could not fill the subset quota; kernel rank "
                 "below k");
  return chosen;
}

std::vector<int> KdppSampler::sample(Rng& rng) const {
  const std::vector<int> eigs = select_eigenvector_subset(rng);
  const int n = eig_.n;
  std::vector<double> columns(static_cast<size_t>(n) * k_);
  for (int c = 0; c < k_; ++c)
    std::copy_n(&eig_.vectors[static_cast<size_t>(eigs[c]) * n], n,
                &columns[static_cast<size_t>(c) * n]);
  std::vector<int> items = sample_projection_dpp(n, k_, columns, rng);
  std::sort(items.begin(), items.end());
  return items;
}

namespace {

// Two rounds of modified Gram-Schmidt, then an orthonormality check.
void orthonormalize(std::vector<double>& v, int n, int cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < cols; ++c) {
      double* col = &v[static_cast<size_t>(c) * n];
      for (int prev = 0; prev < c; ++prev) {
        const double* p = &v[static_cast<size_t>(prev) * n];
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += col[i] * p[i];
        for (int i = 0; i < n; ++i) col[i] -= dot * p[i];
      }
      double norm2 = 0.0;
      for (int i = 0; i < n; ++i) norm2 += col[i] * col[i];
      if (norm2 <= 0.0)
        fail_numeric("projection sampler lost a dimension during contraction");
      const double inv = 1.0 / std::sqrt(norm2);
      for (int i = 0; i < n; ++i) col[i] *= inv;
    }
  }
  for (int c = 0; c < cols; ++c) {
    for (int d = 0; d <= c; ++d) {
      double dot = 0.0;
      const double* pc = &v[static_cast<size_t>(c) * n];
      const double* pd = &v[static_cast<size_t>(d) * n];
      for (int i = 0; i < n; ++i) dot += pc[i] * pd[i];
      const double expect = (c == d) ? 1.0 : 0.0;
      if (std::abs(dot - expect) > 1e-8)
        fail_numeric("projection sampler lost orthonormality beyond 1e-8");
    }
  }
}

}  // namespace

std::vector<int> sample_projection_dpp(int n, int k,
                                       std::span<const double> columns,
                                       Rng& rng) {
  if (k < 1 || k > n) fail_arg("projection sampler needs 1 <= k <= n");
  if (columns.size() != static_cast<size_t>(n) * k)
    fail_arg("projection sampler expects k column vectors of length n");

  std::vector<double> v(columns.begin(), columns.end());
  orthonormalize(v, n, k);

  std::vector<int> selected;
  selected.reserve(k);
  std::vector<double> weights(n);
  for (int step = 0; step < k; ++step) {
    const int cols = k - step;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double w = 0.0;
      for (int c = 0; c < cols; ++c) {
        const double x = v[static_cast<size_t>(c) * n + i];
        w += x * x;
      }
      weights[i] = w;
      total += w;
    }
    // total == remaining dimension up to rounding
    double r = rng.uniform() * total;
    int item = -1;
    for (int i = 0; i < n; ++i) {
      r -= weights[i];
      if (r <= 0.0) {
        item = i;
        break;
      }
    }
    if (item < 0) {
      for (int i = n - 1; i >= 0; --i)
        if (weights[i] > 0.0) {
          item = i;
          break;
        }
    }
    if (item < 0) fail_numeric("projection sampler found no admissible item");
    selected.push_back(item);
    if (cols == 1) break;

    // Pivot on the column with the largest component at `item`, eliminate
    // that coordinate from the others, drop the pivot, re-orthonormalize.
    int pivot = 0;
    double best = std::abs(v[static_cast<size_t>(0) * n + item]);
    for (int c = 1; c < cols; ++c) {
      const double cand = std::abs(v[static_cast<size_t>(c) * n + item]);
      if (cand > best) {
        best = cand;
        pivot = c;
      }
    }
    if (best == 0.0)
      fail_numeric("projection sampler picked an item outside the span");
    const double* pv = &v[static_cast<size_t>(pivot) * n];
    for (int c = 0; c < cols; ++c) {
      if (c == pivot) continue;
      double* col = &v[static_cast<size_t>(c) * n];
      const double f = col[item] / pv[item];
      for (int i = 0; i < n; ++i) col[i] -= f * pv[i];
      col[item] = 0.0;
    }
    if (pivot != cols - 1)
      std::copy_n(&v[static_cast<size_t>(cols - 1) * n], n,
                  &v[static_cast<size_t>(pivot) * n]);
    v.resize(static_cast<size_t>(cols - 1) * n);
    orthonormalize(v, n, cols - 1);
    for (int c = 0; c < cols - 1; ++c)
      v[static_cast<size_t>(c) * n + item] = 0.0;
    for (int prev : selected)
      for (int c = 0; c < cols - 1; ++c)
        v[static_cast<size_t>(c) * n + prev] = 0.0;
  }
  return selected;
}

std::map<std::vector<int>, double> brute_force_pmf(const kernels::KernelMatrix& l,
                                                   int k) {
  const int n = l.mat.dim();
  if (n > 15)
    fail_arg("brute-force pmf limited to N <= 15, got N = " + std::to_string(n));
  if (k < 1 || k > n) fail_arg("brute-force pmf needs 1 <= k <= N");

  std::map<std::vector<int>, double> pmf;
  std::vector<int> subset(k);
  double normalizer = 0.0;

  // Lexicographic combinations.
  for (int i = 0; i < k; ++i) subset[i] = i;
  for (;;) {
    numerics::SymMatrix minor(k);
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) minor.set(i, j, l.mat.at(subset[i], subset[j]));
    double d = numerics::det(minor);
    if (d < 0.0) d = 0.0;  // rounding dust on PSD kernels
    pmf[subset] = d;
    normalizer += d;

    int pos = k - 1;
    while (pos >= 0 && subset[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (int i = pos + 1; i < k; ++i) subset[i] = subset[i - 1] + 1;
  }

  if (normalizer < 1e-12)
    fail_numeric("kernel rank below k: all size-" + std::to_string(k) +
                 " principal minors vanish");
  for (auto& [_, p] : pmf) p /= normalizer;
  return pmf;
}

}  // namespace dppmb::dpp
