#pragma once

#include <span>
#include <vector>

namespace dppmb::numerics {

// Dense symmetric matrix with full row-major storage. Mutation goes through
// set(), which writes the mirrored entry, so stored data is always exactly
// symmetric.
class SymMatrix {
 public:
  explicit SymMatrix(int n);

  // Rejects input whose (i,j) and (j,i) entries are not bitwise equal.
  static SymMatrix from_rowmajor(int n, std::span<const double> entries);

  int dim() const { return n_; }
  double at(int i, int j) const {
    return data_[static_cast<size_t>(i) * n_ + j];
  }
  void set(int i, int j, double v) {
    data_[static_cast<size_t>(i) * n_ + j] = v;
    data_[static_cast<size_t>(j) * n_ + i] = v;
  }
  std::span<const double> data() const { return data_; }

  double frobenius_norm() const;
  bool all_finite() const;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  int n = 0;
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column-major: vectors[j*n + i] = V(i, j)

  double vector_at(int i, int j) const {
    return vectors[static_cast<size_t>(j) * n + i];
  }
};

// table[m][j] = e_j over the first m values for 0 <= m <= n, 0 <= j <= k.
struct ElemSymPolys {
  int n = 0;
  int k = 0;
  std::vector<double> table;  // (n+1) x (k+1) row-major

  double at(int m, int j) const {
    return table[static_cast<size_t>(m) * (k + 1) + j];
  }
};

// Cyclic Jacobi rotations; converges when the off-diagonal Frobenius norm
// drops below 1e-12 * ||m||_F, capped at 100 sweeps.
EigenDecomposition sym_eig(const SymMatrix& m);

ElemSymPolys elem_sym_polys(std::span<const double> eigenvalues, int k);

// Determinant via partially pivoted elimination.
double det(const SymMatrix& m);

double min_eigenvalue(const SymMatrix& m);

}  // namespace dppmb::numerics
