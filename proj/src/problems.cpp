#include "trn/problems.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <utility>

#include "trn/errors.hpp"

namespace trn {
namespace {

constexpr Eigen::Index kDenseLimit = 2000;

constexpr std::array<std::pair<Family, std::string_view>, 6> kFamilyNames{{
    {Family::rosenbrock_extended, "rosenbrock_extended"},
    {Family::rosenbrock_chained, "rosenbrock_chained"},
    {Family::quartic_saddle, "quartic_saddle"},
    {Family::indefinite_quadratic, "indefinite_quadratic"},
    {Family::hard_case_quadratic, "hard_case_quadratic"},
    {Family::convex_quadratic_conditioned, "convex_quadratic_conditioned"},
}};

Vector rosenbrock_start(Eigen::Index n) {
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = (i % 2 == 0) ? -1.2 : 1.0;
  return x;
}

// 100 (b - a^2)^2 + (1 - a)^2 summed over index pairs (a, b).
struct RosenbrockTerms {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;

  double value(const Vector& x) const {
    double f = 0.0;
    for (auto [a, b] : pairs) {
      const double r = x[b] - x[a] * x[a];
      const double t = 1.0 - x[a];
      f += 100.0 * r * r + t * t;
    }
    return f;
  }

  Vector gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (auto [a, b] : pairs) {
      const double r = x[b] - x[a] * x[a];
      g[a] += -400.0 * x[a] * r - 2.0 * (1.0 - x[a]);
      g[b] += 200.0 * r;
    }
    return g;
  }

  Vector hvp(const Vector& x, const Vector& v) const {
    Vector hv = Vector::Zero(x.size());
    for (auto [a, b] : pairs) {
      const double haa = 1200.0 * x[a] * x[a] - 400.0 * x[b] + 2.0;
      const double hab = -400.0 * x[a];
      hv[a] += haa * v[a] + hab * v[b];
      hv[b] += hab * v[a] + 200.0 * v[b];
    }
    return hv;
  }

  Matrix dense(const Vector& x) const {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (auto [a, b] : pairs) {
      h(a, a) += 1200.0 * x[a] * x[a] - 400.0 * x[b] + 2.0;
      h(a, b) += -400.0 * x[a];
      h(b, a) += -400.0 * x[a];
      h(b, b) += 200.0;
    }
    return h;
  }
};

Problem rosenbrock(std::string name, Eigen::Index n, RosenbrockTerms terms) {
  Problem p;
  p.name = std::move(name);
  p.dim = n;
  auto shared = std::make_shared<const RosenbrockTerms>(std::move(terms));
  p.value = [shared](const Vector& x) { return shared->value(x); };
  p.gradient = [shared](const Vector& x) { return shared->gradient(x); };
  p.hvp = [shared](const Vector& x, const Vector& v) {
    return shared->hvp(x, v);
  };
  if (n <= kDenseLimit) {
    p.dense_hessian = [shared](const Vector& x) { return shared->dense(x); };
  }
  p.known_fmin = 0.0;
  p.known_minimizer = Vector::Ones(n);
  return p;
}

/// 1/2 x' diag(d) x + b'x.
Problem diagonal_quadratic(std::string name, Vector d, Vector b) {
  Problem p;
  p.name = std::move(name);
  const Eigen::Index n = d.size();
  p.dim = n;
  p.value = [d, b](const Vector& x) {
    return 0.5 * x.dot(d.cwiseProduct(x)) + b.dot(x);
  };
  p.gradient = [d, b](const Vector& x) -> Vector {
    return d.cwiseProduct(x) + b;
  };
  p.hvp = [d](const Vector&, const Vector& v) -> Vector {
    return d.cwiseProduct(v);
  };
  if (n <= kDenseLimit) {
    p.dense_hessian = [d](const Vector&) -> Matrix { return d.asDiagonal(); };
  }
  return p;
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "?";
}

std::optional<Family> family_from_string(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (n == name) return f;
  }
  return std::nullopt;
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> families = [] {
    std::vector<Family> out;
    for (const auto& entry : kFamilyNames) out.push_back(entry.first);
    return out;
  }();
  return families;
}

void ProblemSpec::validate() const {
  auto require = [this](bool ok, const std::string& what) {
    if (!ok) {
      throw ConfigurationError(std::string(to_string(family)) + ": " + what);
    }
  };
  require(n >= 1, "n must be positive");
  switch (family) {
    case Family::rosenbrock_extended:
      require(n % 2 == 0, "extended Rosenbrock needs even n");
      break;
    case Family::rosenbrock_chained:
      require(n >= 2, "chained Rosenbrock needs n >= 2");
      break;
    case Family::quartic_saddle:
      break;
    case Family::indefinite_quadratic:
      require(negative_count >= 1 && negative_count <= n,
              "negative_count must lie in [1, n]");
      require(condition >= 1.0, "condition must be >= 1");
      require(curvature_gap > 0.0, "curvature_gap must be positive");
      break;
    case Family::hard_case_quadratic:
      require(n >= 2, "hard-case quadratic needs n >= 2");
      require(curvature_gap > 0.0, "curvature_gap must be positive");
      break;
    case Family::convex_quadratic_conditioned:
      require(condition >= 1.0, "condition must be >= 1");
      break;
  }
  require(!x0 || x0->size() == n, "x0 has the wrong dimension");
}

std::string ProblemSpec::name() const {
  return std::string(to_string(family)) + "_n" + std::to_string(n);
}

Vector ProblemSpec::start() const {
  if (x0) return *x0;
  switch (family) {
    case Family::rosenbrock_extended:
    case Family::rosenbrock_chained:
      return rosenbrock_start(n);
    case Family::convex_quadratic_conditioned:
      return Vector::Ones(n);
    default:
      return Vector::Zero(n);
  }
}

Vector log_spaced_spectrum(Eigen::Index n, double condition) {
  Vector d(n);
  if (n == 1) {
    d[0] = 1.0;
    return d;
  }
  const double step = std::log(condition) / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    d[i] = std::exp(step * static_cast<double>(i));
  }
  d[0] = 1.0;
  d[n - 1] = condition;
  return d;
}

Problem make_problem(const ProblemSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n;
  switch (spec.family) {
    case Family::rosenbrock_extended: {
      RosenbrockTerms terms;
      for (Eigen::Index i = 0; i + 1 < n; i += 2) terms.pairs.emplace_back(i, i + 1);
      return rosenbrock(spec.name(), n, std::move(terms));
    }
    case Family::rosenbrock_chained: {
      RosenbrockTerms terms;
      for (Eigen::Index i = 0; i + 1 < n; ++i) terms.pairs.emplace_back(i, i + 1);
      return rosenbrock(spec.name(), n, std::move(terms));
    }
    case Family::quartic_saddle: {
      Problem p;
      p.name = spec.name();
      p.dim = n;
      p.value = [](const Vector& x) {
        const auto a = x.array();
        return (a.square().square() / 4.0 - a.square() / 2.0).sum();
      };
      p.gradient = [](const Vector& x) -> Vector {
        return (x.array().cube() - x.array()).matrix();
      };
      p.hvp = [](const Vector& x, const Vector& v) -> Vector {
        return ((3.0 * x.array().square() - 1.0) * v.array()).matrix();
      };
      if (n <= kDenseLimit) {
        p.dense_hessian = [](const Vector& x) -> Matrix {
          return (3.0 * x.array().square() - 1.0).matrix().asDiagonal();
        };
      }
      p.known_fmin = -static_cast<double>(n) / 4.0;
      p.known_minimizer = Vector::Ones(n);
      return p;
    }
    case Family::indefinite_quadratic: {
      const Eigen::Index positives = n - spec.negative_count;
      Vector d(n);
      if (positives > 0) {
        d.head(positives) = log_spaced_spectrum(positives, spec.condition);
      }
      d.tail(spec.negative_count).setConstant(-spec.curvature_gap);
      const Vector b = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
      return diagonal_quadratic(spec.name(), std::move(d), b);
    }
    case Family::hard_case_quadratic: {
      Vector d = Vector::Ones(n);
      d[0] = -spec.curvature_gap;
      Vector b = Vector::Zero(n);
      b[0] = spec.orthogonality_offset;
      b[1] = spec.gradient_scale;
      return diagonal_quadratic(spec.name(), std::move(d), std::move(b));
    }
    case Family::convex_quadratic_conditioned: {
      Problem p = diagonal_quadratic(spec.name(),
                                     log_spaced_spectrum(n, spec.condition),
                                     Vector::Zero(n));
      p.known_fmin = 0.0;
      p.known_minimizer = Vector::Zero(n);
      return p;
    }
  }
  throw ConfigurationError("unknown problem family");
}

}  // namespace trn
