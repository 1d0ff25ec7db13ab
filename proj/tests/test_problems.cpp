#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "trn/errors.hpp"
#include "trn/harness.hpp"
#include "trn/meo.hpp"
#include "trn/problems.hpp"

using namespace trn;

namespace {

ProblemSpec spec_of(Family f, Eigen::Index n) {
  ProblemSpec spec;
  spec.family = f;
  spec.n = n;
  return spec;
}

}  // namespace

TEST(Problems, QuarticSaddleAtOrigin) {
  const Problem p = make_problem(spec_of(Family::quartic_saddle, 2));
  EXPECT_EQ(p.value(Vector::Zero(2)), 0.0);
  EXPECT_EQ(p.gradient(Vector::Zero(2)), Vector::Zero(2));
  EXPECT_EQ(p.dense_hessian(Vector::Zero(2)), Matrix(-Matrix::Identity(2, 2)));
  EXPECT_EQ(*p.known_fmin, -0.5);
}

TEST(Problems, RosenbrockMinimizer) {
  const Problem p = make_problem(spec_of(Family::rosenbrock_extended, 2));
  EXPECT_EQ(p.value(Vector::Ones(2)), 0.0);
  const Problem chained = make_problem(spec_of(Family::rosenbrock_chained, 7));
  EXPECT_EQ(chained.value(Vector::Ones(7)), 0.0);
  EXPECT_EQ(chained.gradient(Vector::Ones(7)), Vector::Zero(7));
}

TEST(Problems, ConvexSpectrumHasExactCondition) {
  const Vector d = log_spaced_spectrum(50, 1e4);
  EXPECT_EQ(d.maxCoeff() / d.minCoeff(), 1e4);
  const Problem p = make_problem(spec_of(Family::convex_quadratic_conditioned, 50));
  const Matrix h = p.dense_hessian(Vector::Zero(50));
  EXPECT_EQ(h.diagonal().maxCoeff() / h.diagonal().minCoeff(), 1e4);
  for (Eigen::Index i = 1; i < 50; ++i) EXPECT_GT(d[i], d[i - 1]);
}

TEST(Problems, IndefiniteSpectrumTail) {
  ProblemSpec spec = spec_of(Family::indefinite_quadratic, 20);
  spec.negative_count = 3;
  spec.curvature_gap = 0.5;
  const Problem p = make_problem(spec);
  const Vector d = p.dense_hessian(Vector::Zero(20)).diagonal();
  int negatives = 0;
  for (double v : d) negatives += v < 0;
  EXPECT_EQ(negatives, 3);
  EXPECT_DOUBLE_EQ(d.minCoeff(), -0.5);
}

TEST(Problems, HardCaseGradientOrthogonality) {
  ProblemSpec spec = spec_of(Family::hard_case_quadratic, 6);
  const Problem p = make_problem(spec);
  const Vector g = p.gradient(Vector::Zero(6));
  const MinEigenpair mp = dense_min_eig(p.dense_hessian(Vector::Zero(6)));
  EXPECT_EQ(g.dot(mp.vector), 0.0);
  EXPECT_DOUBLE_EQ(g.norm(), 1e-8);

  spec.orthogonality_offset = 1e-3;
  const Vector g2 = make_problem(spec).gradient(Vector::Zero(6));
  EXPECT_NEAR(std::abs(g2.dot(mp.vector)), 1e-3, 1e-15);
}

TEST(Problems, KnownMinimumMatchesValue) {
  for (Family f : all_families()) {
    const ProblemSpec spec = spec_of(f, 10);
    const Problem p = make_problem(spec);
    if (p.known_fmin && p.known_minimizer) {
      EXPECT_NEAR(p.value(*p.known_minimizer), *p.known_fmin, 1e-12) << spec.name();
    }
  }
}

TEST(Problems, DerivativesAtStartAndRandomPoints) {
  for (Family f : all_families()) {
    for (Eigen::Index n : {2, 9, 40}) {
      ProblemSpec spec = spec_of(f, n);
      if (f == Family::rosenbrock_extended && n % 2) continue;
      if (f == Family::indefinite_quadratic) spec.negative_count = 1 + static_cast<int>(n / 4);
      const Problem p = make_problem(spec);
      EXPECT_TRUE(check_derivatives(p, spec.start()).ok()) << spec.name();
      for (const Vector& x : random_points(spec, 5, 123)) {
        EXPECT_TRUE(check_derivatives(p, x).ok()) << spec.name();
      }
    }
  }
}

TEST(Problems, DenseHessianMatchesProducts) {
  std::mt19937_64 rng(6);
  for (Family f : all_families()) {
    const ProblemSpec spec = spec_of(f, 8);
    const Problem p = make_problem(spec);
    const Vector x = spec.start() + fixtures::gaussian_vector(8, rng);
    const Vector v = fixtures::gaussian_vector(8, rng);
    EXPECT_LE((p.dense_hessian(x) * v - p.hvp(x, v)).norm(), 1e-10 * (1 + v.norm()));
  }
}

TEST(Problems, DenseHessianOnlyUpToLimit) {
  EXPECT_TRUE(make_problem(spec_of(Family::quartic_saddle, 2000)).has_dense_hessian());
  EXPECT_FALSE(make_problem(spec_of(Family::quartic_saddle, 2001)).has_dense_hessian());
}

TEST(Problems, StartPoints) {
  const Vector x = spec_of(Family::rosenbrock_chained, 4).start();
  EXPECT_EQ(x[0], -1.2);
  EXPECT_EQ(x[1], 1.0);
  EXPECT_EQ(x[2], -1.2);
  EXPECT_EQ(spec_of(Family::quartic_saddle, 3).start(), Vector::Zero(3));
  ProblemSpec custom = spec_of(Family::quartic_saddle, 2);
  custom.x0 = Vector::Constant(2, 0.3);
  EXPECT_EQ(custom.start(), Vector::Constant(2, 0.3));
}

TEST(Problems, Names) {
  EXPECT_EQ(spec_of(Family::rosenbrock_extended, 100).name(), "rosenbrock_extended_n100");
  for (Family f : all_families()) EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_FALSE(family_from_string("cute"));
}

TEST(Problems, InvalidSpecs) {
  EXPECT_THROW(make_problem(spec_of(Family::rosenbrock_extended, 3)), ConfigurationError);
  EXPECT_THROW(make_problem(spec_of(Family::quartic_saddle, 0)), ConfigurationError);
  EXPECT_THROW(make_problem(spec_of(Family::hard_case_quadratic, 1)), ConfigurationError);
  ProblemSpec bad = spec_of(Family::indefinite_quadratic, 4);
  bad.negative_count = 5;
  EXPECT_THROW(make_problem(bad), ConfigurationError);
  bad = spec_of(Family::convex_quadratic_conditioned, 4);
  bad.condition = 0.5;
  EXPECT_THROW(make_problem(bad), ConfigurationError);
  bad = spec_of(Family::quartic_saddle, 4);
  bad.x0 = Vector::Zero(3);
  EXPECT_THROW(bad.validate(), ConfigurationError);
}
