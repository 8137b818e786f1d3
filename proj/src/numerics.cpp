#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace dppmb::numerics {

SymMatrix::SymMatrix(int n) : n_(n) {
  if (n < 1) fail_arg("matrix dimension must be >= 1, got " + std::to_string(n));
  data_.assign(static_cast<size_t>(n) * n, 0.0);
}

SymMatrix SymMatrix::from_rowmajor(int n, std::span<const double> entries) {
  SymMatrix m(n);
  if (entries.size() != static_cast<size_t>(n) * n)
    fail_arg("expected " + std::to_string(static_cast<size_t>(n) * n) +
             " entries, got " + std::to_string(entries.size()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double a = entries[static_cast<size_t>(i) * n + j];
      const double b = entries[static_cast<size_t>(j) * n + i];
      if (a != b && !(std::isnan(a) && std::isnan(b)))
        fail_arg("matrix is not symmetric at (" + std::to_string(i) + "," +
                 std::to_string(j) + ")");
      m.set(i, j, a);
    }
  return m;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool SymMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = a[static_cast<size_t>(i) * n + j];
      s += 2.0 * v * v;
    }
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition sym_eig(const SymMatrix& m) {
  if (!m.all_finite()) fail_arg("eigendecomposition input has non-finite entries");
  const int n = m.dim();

  std::vector<double> a(m.data().begin(), m.data().end());
  // Eigenvectors kept column-major so each rotation touches two contiguous
  // columns.
  std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;

  const double norm = m.frobenius_norm();
  const double tol = 1e-12 * norm;
  constexpr int kMaxSweeps = 100;

  double off = off_diagonal_norm(a, n);
  int sweep = 0;
  while (off > tol) {
    if (++sweep > kMaxSweeps)
      fail_numeric("jacobi eigensolver did not converge: off-diagonal residual " +
                   std::to_string(off) + " after " + std::to_string(kMaxSweeps) +
                   " sweeps");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double* rowp = &a[static_cast<size_t>(p) * n];
        double* rowq = &a[static_cast<size_t>(q) * n];
        const double apq = rowp[q];
        if (apq == 0.0) continue;
        const double app = rowp[p];
        const double aqq = rowq[q];
        // Skip rotations that cannot change the stored values.
        if (std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq)) && sweep > 2) {
          rowp[q] = 0.0;
          rowq[p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e154) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        rowp[p] = app - t * apq;
        rowq[q] = aqq + t * apq;
        rowp[q] = 0.0;
        rowq[p] = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j == p || j == q) continue;
          const double ajp = rowp[j];
          const double ajq = rowq[j];
          rowp[j] = ajp - s * (ajq + tau * ajp);
          rowq[j] = ajq + s * (ajp - tau * ajq);
          a[static_cast<size_t>(j) * n + p] = rowp[j];
          a[static_cast<size_t>(j) * n + q] = rowq[j];
        }
        double* colp = &v[static_cast<size_t>(p) * n];
        double* colq = &v[static_cast<size_t>(q) * n];
        for (int i = 0; i < n; ++i) {
          const double vip = colp[i];
          const double viq = colq[i];
          colp[i] = vip - s * (viq + tau * vip);
          colq[i] = viq + s * (vip - tau * viq);
        }
      }
    }
    off = off_diagonal_norm(a, n);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return a[static_cast<size_t>(x) * n + x] < a[static_cast<size_t>(y) * n + y];
  });

  EigenDecomposition out;
  out.n = n;
  out.values.resize(n);
  out.vectors.resize(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    out.values[j] = a[static_cast<size_t>(src) * n + src];
    std::copy_n(&v[static_cast<size_t>(src) * n], n,
                &out.vectors[static_cast<size_t>(j) * n]);
  }
  return out;
}

ElemSymPolys elem_sym_polys(std::span<const double> eigenvalues, int k) {
  const int n = static_cast<int>(eigenvalues.size());
  if (k < 0) fail_arg("elementary symmetric polynomial order must be >= 0");
  if (k > n)
    fail_arg("elementary symmetric polynomial order " + std::to_string(k) +
             " exceeds value count " + std::to_string(n));

  std::vector<double> lambda(eigenvalues.begin(), eigenvalues.end());
  for (double& x : lambda) {
    if (!std::isfinite(x)) fail_arg("eigenvalue list has non-finite entries");
    if (x < -1e-8)
      fail_arg("eigenvalue " + std::to_string(x) + " below tolerance -1e-8");
    if (x < 0.0) x = 0.0;
  }

  ElemSymPolys esp;
  esp.n = n;
  esp.k = k;
  esp.table.assign(static_cast<size_t>(n + 1) * (k + 1), 0.0);
  for (int m = 0; m <= n; ++m) esp.table[static_cast<size_t>(m) * (k + 1)] = 1.0;
  for (int m = 1; m <= n; ++m) {
    const size_t row = static_cast<size_t>(m) * (k + 1);
    const size_t prev = static_cast<size_t>(m - 1) * (k + 1);
    const int jmax = std::min(m, k);
    for (int j = 1; j <= jmax; ++j)
      esp.table[row + j] = esp.table[prev + j] + lambda[m - 1] * esp.table[prev + j - 1];
  }
  return esp;
}

double det(const SymMatrix& m) {
  if (!m.all_finite()) fail_arg("determinant input has non-finite entries");
  const int n = m.dim();
  std::vector<double> a(m.data().begin(), m.data().end());

  double result = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[static_cast<size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double cand = std::abs(a[static_cast<size_t>(r) * n + col]);
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != col) {
      for (int j = 0; j < n; ++j)
        std::swap(a[static_cast<size_t>(pivot) * n + j],
                  a[static_cast<size_t>(col) * n + j]);
      result = -result;
    }
    const double d = a[static_cast<size_t>(col) * n + col];
    result *= d;
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r) * n + col] / d;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j)
        a[static_cast<size_t>(r) * n + j] -= f * a[static_cast<size_t>(col) * n + j];
    }
  }
  return result;
}

double min_eigenvalue(const SymMatrix& m) { return sym_eig(m).values.front(); }

}  // namespace dppmb::numerics
