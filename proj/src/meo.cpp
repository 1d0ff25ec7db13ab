#include "trn/meo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "trn/errors.hpp"

namespace trn {
namespace {

constexpr double kBreakdown = 1e-12;

Vector random_unit_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  double norm = 0.0;
  while (!(norm > 0.0)) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    norm = v.norm();
  }
  return v / norm;
}

/// Lanczos recurrence with full reorthogonalization. Basis vectors are kept
/// as columns of `basis_`.
class Lanczos {
public:
  Lanczos(const LinearOperator& hvp, Eigen::Index n, int capacity,
          std::uint64_t seed)
      : hvp_(hvp), basis_(n, capacity), next_(random_unit_vector(n, seed)) {
    alpha_.reserve(capacity);
    beta_.reserve(capacity);
  }

  int size() const { return static_cast<int>(alpha_.size()); }

  /// Extends the basis by one vector; returns false on breakdown.
  bool step() {
    const int l = size();
    basis_.col(l) = next_;
    Vector w = hvp_(next_);
    const double a = next_.dot(w);
    alpha_.push_back(a);
    w -= a * basis_.col(l);
    if (l > 0) w -= beta_.back() * basis_.col(l - 1);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const auto q = basis_.leftCols(l + 1);
      w -= q * (q.transpose() * w);
    }
    const double b = w.norm();
    if (!std::isfinite(b)) {
      throw NonFiniteEvaluation("Lanczos: non-finite residual", next_);
    }
    beta_.push_back(b);
    if (b <= kBreakdown) return false;
    next_ = w / b;
    return true;
  }

  /// Eigen-decomposition of the current tridiagonal matrix.
  Eigen::SelfAdjointEigenSolver<Matrix> ritz(bool vectors) const {
    const int l = size();
    Vector diag = Eigen::Map<const Vector>(alpha_.data(), l);
    Vector sub = l > 1 ? Vector(Eigen::Map<const Vector>(beta_.data(), l - 1))
                       : Vector();
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.computeFromTridiagonal(
        diag, sub, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw LinearAlgebraError("Lanczos: tridiagonal eigensolve failed");
    }
    return es;
  }

  Vector ritz_vector(const Vector& coeffs) const {
    Vector v = basis_.leftCols(size()) * coeffs;
    return v / v.norm();
  }

private:
  const LinearOperator& hvp_;
  Matrix basis_;
  Vector next_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

}  // namespace

void MeoConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigurationError("MEO: eps must be positive");
  if (!(delta > 0.0)) throw ConfigurationError("MEO: delta must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) {
    throw ConfigurationError("MEO: xi must lie in [0,1)");
  }
  if (!(adaptive_tol > 0.0)) {
    throw ConfigurationError("MEO: adaptive_tol must be positive");
  }
  if (max_iters && *max_iters < 1) {
    throw ConfigurationError("MEO: max_iters must be >= 1");
  }
}

LanczosResult lanczos_min_eig(const LinearOperator& hvp, Eigen::Index n,
                              int max_iters, std::uint64_t seed,
                              double adaptive_tol) {
  if (max_iters < 1) {
    throw PreconditionViolation("lanczos_min_eig: max_iters must be >= 1");
  }
  const int limit = static_cast<int>(std::min<Eigen::Index>(max_iters, n));
  Lanczos lanczos(hvp, n, limit, seed);

  // estimates[l] is the smallest Ritz value after l steps.
  std::vector<double> estimates{std::numeric_limits<double>::infinity()};
  while (true) {
    const bool extended = lanczos.step();
    const int l = lanczos.size();
    const auto es = lanczos.ritz(false);
    estimates.push_back(es.eigenvalues()[0]);

    const int t = static_cast<int>(std::min<Eigen::Index>({l, n, 10}));
    const bool settled = estimates[l - t] - estimates[l] <= adaptive_tol;
    if (!extended || settled || l >= limit) break;
  }

  const auto es = lanczos.ritz(true);
  LanczosResult result;
  result.lambda = es.eigenvalues()[0];
  result.vector = lanczos.ritz_vector(es.eigenvectors().col(0));
  result.iters = lanczos.size();
  return result;
}

int meo_iteration_budget(Eigen::Index n, double eps, double xi, double M) {
  if (!(eps > 0.0) || !(M > 0.0) || !(xi > 0.0 && xi < 1.0)) {
    throw PreconditionViolation(
        "meo_iteration_budget: need eps > 0, M > 0, xi in (0,1)");
  }
  const double c_meo =
      std::log(2.75 * static_cast<double>(n) / (xi * xi)) * std::sqrt(M) / 2.0;
  const double bound = 1.0 + std::ceil(c_meo / std::sqrt(eps));
  if (bound >= static_cast<double>(n)) return static_cast<int>(n);
  return static_cast<int>(bound);
}

MeoResult meo(const Vector& g, const LinearOperator& hvp,
              const MeoConfig& config) {
  config.validate();
  const Eigen::Index n = g.size();
  int budget = static_cast<int>(n);
  if (config.max_iters) {
    budget = *config.max_iters;
  } else if (config.M && *config.M > 0.0 && config.xi > 0.0) {
    budget = meo_iteration_budget(n, config.eps, config.xi, *config.M);
  }

  const LanczosResult lz =
      lanczos_min_eig(hvp, n, budget, config.seed, config.adaptive_tol);
  const double rayleigh = lz.vector.dot(hvp(lz.vector));

  if (rayleigh <= -0.5 * config.eps) {
    const double sign = g.dot(lz.vector) >= 0.0 ? -1.0 : 1.0;
    NegCurvStep out;
    out.direction = lz.vector;
    out.step = sign * config.delta * lz.vector;
    out.rayleigh = rayleigh;
    out.lanczos_iters = lz.iters;
    return out;
  }
  return Certificate{lz.iters, rayleigh};
}

MinEigenpair dense_min_eig(const Matrix& H) {
  if (H.rows() != H.cols() || H.rows() == 0) {
    throw PreconditionViolation("dense_min_eig: matrix must be square");
  }
  const Matrix sym = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw LinearAlgebraError("dense_min_eig: eigensolve failed");
  }
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

double estimate_norm_bound(const LinearOperator& hvp, Eigen::Index n,
                           int iters, std::uint64_t seed) {
  const int limit = static_cast<int>(std::min<Eigen::Index>(iters, n));
  Lanczos lanczos(hvp, n, limit, seed);
  while (lanczos.step() && lanczos.size() < limit) {
  }
  const Vector ritz = lanczos.ritz(false).eigenvalues();
  return 1.1 * ritz.cwiseAbs().maxCoeff();
}

}  // namespace trn
