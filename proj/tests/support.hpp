#pragma once

#include <random>

#include <Eigen/Eigenvalues>

#include "trn/operator.hpp"

namespace trn::fixtures {

inline Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector v(n);
  for (auto& x : v) x = gauss(rng);
  return v;
}

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  Matrix a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) a.col(j) = gaussian_vector(n, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// Q diag(spectrum) Q' with a random orthogonal Q.
inline Matrix with_spectrum(const Vector& spectrum, std::mt19937_64& rng) {
  const Matrix q = random_orthogonal(spectrum.size(), rng);
  const Matrix h = q * spectrum.asDiagonal() * q.transpose();
  return (h + h.transpose()) / 2.0;
}

inline Vector uniform_vector(Eigen::Index n, double lo, double hi,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline LinearOperator matrix_operator(const Matrix& h) {
  return [h](const Vector& v) -> Vector { return h * v; };
}

/// Counting wrapper around a dense matrix product.
struct CountingOperator {
  Matrix h;
  int calls = 0;

  LinearOperator op() {
    return [this](const Vector& v) -> Vector {
      ++calls;
      return h * v;
    };
  }
};

/// f(x) = 1/2 x'Hx + b'x with dense oracles.
inline Problem quadratic_problem(const Matrix& h, const Vector& b,
                                 std::string name = "quadratic") {
  Problem p;
  p.name = std::move(name);
  p.dim = h.rows();
  p.value = [h, b](const Vector& x) { return 0.5 * x.dot(h * x) + b.dot(x); };
  p.gradient = [h, b](const Vector& x) -> Vector { return h * x + b; };
  p.hvp = [h](const Vector&, const Vector& v) -> Vector { return h * v; };
  p.dense_hessian = [h](const Vector&) -> Matrix { return h; };
  return p;
}

inline double min_eig(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.transpose()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

inline double spectral_norm(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.transpose()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Radical-inverse Halton sequence in base `base`.
inline double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

}  // namespace trn::fixtures
