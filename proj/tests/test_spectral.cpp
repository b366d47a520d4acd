#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lrd/spectral.hpp"
#include "oracles.hpp"

using lrd::SpectralDecomp;
using lrd::SymMatrix;

namespace {

double orthonormality_error(const SpectralDecomp& eig) {
  const int n = static_cast<int>(eig.eigenvalues.size());
  double err_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int k = 0; k < n; ++k) dot += eig.eigenvectors(k, i) * eig.eigenvectors(k, j);
      const double target = i == j ? 1.0 : 0.0;
      err_sq += (dot - target) * (dot - target);
    }
  }
  return std::sqrt(err_sq);
}

}  // namespace

TEST_CASE("identity decomposes trivially") {
  SymMatrix eye(3);
  for (int i = 0; i < 3; ++i) eye.set(i, i, 1.0);
  const SpectralDecomp eig = lrd::spectral_decompose(eye);
  for (double v : eig.eigenvalues) CHECK(v == 1.0);
  CHECK(orthonormality_error(eig) <= 1e-10 * 3);
}

TEST_CASE("2x2 exchange matrix has eigenvalues +-1") {
  const SymMatrix x = lrd::sym_from_rows({{0, 1}, {1, 0}});
  const SpectralDecomp eig = lrd::spectral_decompose(x);
  REQUIRE(eig.eigenvalues.size() == 2);
  CHECK(eig.eigenvalues[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(eig.eigenvalues[1] == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("random matrices reconstruct and match the charpoly oracle") {
  lrd::Xoshiro256pp rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = trial < 3 ? 5 : 2 + static_cast<int>(rng.next() % 5);  // always a few 5x5
    const SymMatrix x = oracle::random_symmetric(n, rng);
    const SpectralDecomp eig = lrd::spectral_decompose(x);

    const double norm = lrd::frobenius_norm(x);
    CHECK(lrd::frobenius_norm(lrd::reconstruct(eig) - x) <= 1e-9 * std::max(1.0, norm));
    CHECK(orthonormality_error(eig) <= 1e-10 * n);

    const std::vector<double> expected = oracle::charpoly_eigenvalues(x);
    for (int i = 0; i < n; ++i)
      CHECK(eig.eigenvalues[i] == Catch::Approx(expected[i]).margin(1e-8 * std::max(1.0, norm)));
  }
}

TEST_CASE("trace and norm identities hold") {
  lrd::Xoshiro256pp rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 30);
    const SymMatrix x = oracle::random_symmetric(n, rng);
    const SpectralDecomp eig = lrd::spectral_decompose(x);

    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += x(i, i);
    double eig_sum = 0.0, eig_sq_sum = 0.0;
    for (double v : eig.eigenvalues) {
      eig_sum += v;
      eig_sq_sum += v * v;
    }
    const double norm = lrd::frobenius_norm(x);
    const double tol = 1e-9 * std::max(1.0, norm);
    CHECK(trace == Catch::Approx(eig_sum).margin(tol));
    CHECK(norm * norm == Catch::Approx(eig_sq_sum).margin(tol * std::max(1.0, norm)));

    for (std::size_t i = 1; i < eig.eigenvalues.size(); ++i)
      CHECK(eig.eigenvalues[i - 1] >= eig.eigenvalues[i]);
  }
}

TEST_CASE("ties keep their original order") {
  // diag(2, 1, 2) needs no rotations; the repeated eigenvalue 2 must keep
  // index order, so the sorted eigenvector columns are e0, e2, e1.
  SymMatrix x(3);
  x.set(0, 0, 2.0);
  x.set(1, 1, 1.0);
  x.set(2, 2, 2.0);
  const SpectralDecomp eig = lrd::spectral_decompose(x);
  CHECK(eig.eigenvalues == std::vector<double>{2.0, 2.0, 1.0});
  CHECK(eig.eigenvectors(0, 0) == 1.0);
  CHECK(eig.eigenvectors(2, 1) == 1.0);
  CHECK(eig.eigenvectors(1, 2) == 1.0);
}

TEST_CASE("decomposition is deterministic") {
  lrd::Xoshiro256pp rng(5);
  const SymMatrix x = oracle::random_symmetric(9, rng);
  const SpectralDecomp a = lrd::spectral_decompose(x);
  const SpectralDecomp b = lrd::spectral_decompose(x);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors.data() == b.eigenvectors.data());
}

TEST_CASE("zero matrix and order one are handled") {
  const SpectralDecomp z = lrd::spectral_decompose(SymMatrix(4));
  for (double v : z.eigenvalues) CHECK(v == 0.0);

  SymMatrix one(1);
  one.set(0, 0, -7.5);
  const SpectralDecomp s = lrd::spectral_decompose(one);
  CHECK(s.eigenvalues[0] == -7.5);
  CHECK(std::abs(s.eigenvectors(0, 0)) == 1.0);
}

TEST_CASE("exhausted sweep budget raises NoConvergence") {
  const SymMatrix x = lrd::sym_from_rows({{0, 1}, {1, 0}});
  lrd::JacobiOptions opts;
  opts.max_sweeps = 0;
  CHECK_THROWS_AS(lrd::spectral_decompose(x, opts), lrd::NoConvergenceError);
}
