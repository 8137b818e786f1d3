#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "numerics.hpp"
#include "testutil.hpp"

using namespace dppmb;
using numerics::SymMatrix;

namespace {

SymMatrix diag(std::initializer_list<double> values) {
  SymMatrix m(static_cast<int>(values.size()));
  int i = 0;
  for (double v : values) m.set(i, i, v), ++i;
  return m;
}

double reconstruction_error(const SymMatrix& m, const numerics::EigenDecomposition& e) {
  const int n = m.dim();
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double r = 0.0;
      for (int k = 0; k < n; ++k)
        r += e.vector_at(i, k) * e.values[k] * e.vector_at(j, k);
      const double d = r - m.at(i, j);
      err += d * d;
    }
  return std::sqrt(err);
}

double orthonormality_error(const numerics::EigenDecomposition& e) {
  double worst = 0.0;
  for (int a = 0; a < e.n; ++a)
    for (int b = 0; b <= a; ++b) {
      double dot = 0.0;
      for (int i = 0; i < e.n; ++i) dot += e.vector_at(i, a) * e.vector_at(i, b);
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_CASE("sym_eig on the identity") {
  SymMatrix m = diag({1, 1, 1});
  const auto e = numerics::sym_eig(m);
  for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(orthonormality_error(e) <= 1e-10);
}

TEST_CASE("sym_eig on a diagonal matrix sorts ascending") {
  const auto e = numerics::sym_eig(diag({3, 1, 2}));
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(2.0));
  CHECK(e.values[2] == doctest::Approx(3.0));
}

TEST_CASE("sym_eig reconstructs random PSD matrices") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto r = testutil::rng(seed);
    const SymMatrix m = testutil::random_psd(r, 8);
    const auto e = numerics::sym_eig(m);
    const double bound = 1e-8 * std::max(1.0, m.frobenius_norm());
    CHECK(reconstruction_error(m, e) <= bound);
    CHECK(orthonormality_error(e) <= 1e-10);
    for (size_t i = 1; i < e.values.size(); ++i)
      CHECK(e.values[i - 1] <= e.values[i]);
  }
}

TEST_CASE("sym_eig is deterministic") {
  auto r = testutil::rng(7);
  const SymMatrix m = testutil::random_symmetric(r, 6);
  const auto a = numerics::sym_eig(m);
  const auto b = numerics::sym_eig(m);
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("sym_eig rejects non-finite input") {
  SymMatrix m(2);
  m.set(0, 1, std::nan(""));
  CHECK_THROWS_AS(numerics::sym_eig(m), Error);
}

TEST_CASE("elementary symmetric polynomials match direct expansion") {
  const std::vector<double> lambda{1, 2, 3};
  const auto esp = numerics::elem_sym_polys(lambda, 2);
  CHECK(esp.at(3, 2) == doctest::Approx(11.0));  // 1*2 + 1*3 + 2*3
  CHECK(esp.at(3, 0) == doctest::Approx(1.0));

  const std::vector<double> four{1, 2, 3, 4};
  CHECK(numerics::elem_sym_polys(four, 2).at(4, 2) == doctest::Approx(35.0));
}

TEST_CASE("elem_sym_polys agrees with subset enumeration") {
  auto r = testutil::rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4 + static_cast<int>(r.below(5));
    std::vector<double> lambda(n);
    for (auto& v : lambda) v = 3.0 * r.uniform();
    const auto esp = numerics::elem_sym_polys(lambda, n);

    std::vector<double> expected(n + 1, 0.0);
    testutil::for_each_subset(n, [&](const std::vector<int>& subset) {
      double prod = 1.0;
      for (int i : subset) prod *= lambda[i];
      expected[subset.size()] += prod;
    });
    for (int j = 0; j <= n; ++j)
      CHECK(esp.at(n, j) == doctest::Approx(expected[j]).epsilon(1e-10));
  }
}

TEST_CASE("elem_sym_polys argument handling") {
  const std::vector<double> lambda{1, 2};
  CHECK_THROWS_AS(numerics::elem_sym_polys(lambda, 3), Error);
  const std::vector<double> tiny_neg{1.0, -5e-9};
  CHECK(numerics::elem_sym_polys(tiny_neg, 1).at(2, 1) == doctest::Approx(1.0));
  const std::vector<double> bad{1.0, -1e-6};
  CHECK_THROWS_AS(numerics::elem_sym_polys(bad, 1), Error);
}

TEST_CASE("det on simple matrices") {
  CHECK(numerics::det(diag({1, 1})) == doctest::Approx(1.0));
  CHECK(numerics::det(diag({2, 2})) == doctest::Approx(4.0));
}

TEST_CASE("det equals the eigenvalue product") {
  for (uint64_t seed = 10; seed < 14; ++seed) {
    auto r = testutil::rng(seed);
    const SymMatrix m = testutil::random_symmetric(r, 6);
    double prod = 1.0;
    for (double v : numerics::sym_eig(m).values) prod *= v;
    const double d = numerics::det(m);
    CHECK(d == doctest::Approx(prod).epsilon(1e-8));
  }
}

TEST_CASE("det rejects non-finite input") {
  SymMatrix m(2);
  m.set(0, 0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(numerics::det(m), Error);
}

TEST_CASE("min_eigenvalue") {
  CHECK(numerics::min_eigenvalue(diag({1, 1, 1})) == doctest::Approx(1.0));
  CHECK(numerics::min_eigenvalue(diag({-1, 5})) == doctest::Approx(-1.0));
}

TEST_CASE("tanimoto kernel of random fingerprints is PSD") {
  auto r = testutil::rng(33);
  const auto alphabet = chem::TokenAlphabet::standard();
  std::vector<chem::Molecule> mols;
  for (int i = 0; i < 20; ++i) mols.push_back(testutil::random_molecule(r, alphabet));
  SymMatrix m(20);
  for (int i = 0; i < 20; ++i)
    for (int j = i; j < 20; ++j)
      m.set(i, j, chem::tanimoto(mols[i].fingerprint(), mols[j].fingerprint()));
  CHECK(numerics::min_eigenvalue(m) >= -1e-8);
}

TEST_CASE("subset determinant sum equals det(L + I)") {
  auto r = testutil::rng(55);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 4 + static_cast<int>(r.below(5));  // up to 8 here
    const SymMatrix m = testutil::random_symmetric(r, n);

    double sum = 0.0;
    testutil::for_each_subset(n, [&](const std::vector<int>& subset) {
      sum += subset.empty() ? 1.0 : numerics::det(testutil::restrict_to(m, subset));
    });

    SymMatrix shifted = m;
    for (int i = 0; i < n; ++i) shifted.set(i, i, m.at(i, i) + 1.0);
    CHECK(sum == doctest::Approx(numerics::det(shifted)).epsilon(1e-8));
  }
}

TEST_CASE("SymMatrix construction rejects asymmetric input") {
  const std::vector<double> bad{1, 2, 3, 4};
  CHECK_THROWS_AS(SymMatrix::from_rowmajor(2, bad), Error);
  const std::vector<double> good{1, 2, 2, 4};
  CHECK(SymMatrix::from_rowmajor(2, good).at(1, 0) == 2.0);
  CHECK_THROWS_AS(SymMatrix(0), Error);
}
