#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "trn/driver.hpp"
#include "trn/errors.hpp"
#include "trn/meo.hpp"
#include "trn/problems.hpp"

using namespace trn;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Problem family(Family f, Eigen::Index n) {
  ProblemSpec spec;
  spec.family = f;
  spec.n = n;
  return make_problem(spec);
}

Vector start(Family f, Eigen::Index n) {
  ProblemSpec spec;
  spec.family = f;
  spec.n = n;
  return spec.start();
}

std::uint64_t history_hvps(const SolveReport& r) {
  std::uint64_t sum = 0;
  for (const auto& rec : r.history) sum += rec.hvps;
  return sum;
}

void expect_monotone(const SolveReport& r) {
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const auto& prev = r.history[i - 1];
    const auto& cur = r.history[i];
    if (prev.accepted) {
      EXPECT_LT(cur.f, prev.f + 1e-14 * (1 + std::abs(prev.f)));
    } else {
      EXPECT_EQ(cur.f, prev.f);
    }
  }
}

void expect_radius_replay(const SolveReport& r, const SolverParams& p) {
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const auto& prev = r.history[i - 1];
    const RadiusUpdate u = update_radius(prev.delta, prev.step_norm, prev.rho, p);
    EXPECT_EQ(u.delta_next, r.history[i].delta);
    EXPECT_EQ(u.accepted, prev.accepted);
  }
}

}  // namespace

TEST(ModelDecrease, WorkedValues) {
  EXPECT_DOUBLE_EQ(model_decrease(vec2(1, 0), Matrix(Matrix::Identity(2, 2)), vec2(-1, 0)), 0.5);
  const Matrix h = vec2(-1, 1).asDiagonal();
  EXPECT_DOUBLE_EQ(model_decrease(Vector::Zero(2), h, vec2(1, 0)), 0.5);
  EXPECT_EQ(model_decrease(vec2(3, -2), h, Vector::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(model_decrease(vec2(1, 0), fixtures::matrix_operator(Matrix::Identity(2, 2)),
                                  vec2(-1, 0)),
                   0.5);
}

TEST(Rho, WorkedValues) {
  EXPECT_DOUBLE_EQ(rho(1.0, 0.5, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(rho(1.0, 1.2, 0.5), -0.4);
  EXPECT_THROW(rho(1.0, 0.5, 0.0), DegenerateModelDecrease);
  EXPECT_THROW(rho(1.0, 0.5, -1.0), DegenerateModelDecrease);
}

TEST(UpdateRadius, Branches) {
  const SolverParams p;
  RadiusUpdate u = update_radius(10, 10, 0.5, p);
  EXPECT_EQ(u.delta_next, 20.0);
  EXPECT_TRUE(u.accepted);
  u = update_radius(10, 5, 0.5, p);
  EXPECT_EQ(u.delta_next, 10.0);
  EXPECT_TRUE(u.accepted);
  u = update_radius(10, 4, 0.05, p);
  EXPECT_EQ(u.delta_next, 2.0);
  EXPECT_FALSE(u.accepted);
}

TEST(UpdateRadius, CapsAtMaximum) {
  SolverParams p;
  p.delta_max = 15.0;
  EXPECT_EQ(update_radius(10, 10, 0.9, p).delta_next, 15.0);
}

TEST(UpdateRadius, Preconditions) {
  const SolverParams p;
  EXPECT_THROW(update_radius(10, 0, 0.5, p), PreconditionViolation);
  EXPECT_THROW(update_radius(10, 11, 0.5, p), PreconditionViolation);
}

TEST(SolverParams, Validation) {
  SolverParams p;
  EXPECT_NO_THROW(p.validate());
  p.psi = 0.4;
  EXPECT_THROW(p.validate(), ConfigurationError);
  p = SolverParams{};
  p.delta_max = 1.0;
  EXPECT_THROW(p.validate(), ConfigurationError);
  p = SolverParams{};
  p.eta = 1.0;
  EXPECT_THROW(p.validate(), ConfigurationError);
  p = SolverParams{};
  p.reg_multiplier = -1.0;
  EXPECT_THROW(p.validate(), ConfigurationError);
}

TEST(SolveExact, ConvexQuadratic) {
  const Problem p = fixtures::quadratic_problem(vec2(1, 4).asDiagonal(), Vector::Zero(2));
  const SolveReport r = solve_exact(p, vec2(10, 10), SolverParams{});
  EXPECT_EQ(r.status, SolveStatus::SecondOrderStationary);
  EXPECT_LE(r.grad_norm_final, 1e-5);
  EXPECT_LE(r.history.size(), 15u);
  for (const auto& rec : r.history) {
    if (rec.accepted) EXPECT_NEAR(rec.rho, 1.0, 1e-12);
  }
  ASSERT_TRUE(r.min_eig_info);
  EXPECT_EQ(r.min_eig_info->source, MinEigInfo::Source::dense);
}

TEST(SolveExact, Rosenbrock) {
  const SolveReport r = solve_exact(family(Family::rosenbrock_extended, 2),
                                    vec2(-1.2, 1), SolverParams{});
  EXPECT_EQ(r.status, SolveStatus::SecondOrderStationary);
  EXPECT_LE(r.f_final, 1e-10);
  expect_monotone(r);
  expect_radius_replay(r, SolverParams{});
}

TEST(SolveExact, StationaryStartReturnsImmediately) {
  const Problem p = fixtures::quadratic_problem(Matrix::Identity(3, 3), Vector::Zero(3));
  const SolveReport r = solve_exact(p, Vector::Zero(3), SolverParams{});
  EXPECT_EQ(r.status, SolveStatus::SecondOrderStationary);
  EXPECT_TRUE(r.history.empty());
}

TEST(SolveExact, EscapesSaddle) {
  const SolveReport r = solve_exact(family(Family::quartic_saddle, 3), Vector::Zero(3),
                                    SolverParams{});
  EXPECT_EQ(r.status, SolveStatus::SecondOrderStationary);
  EXPECT_NEAR(r.f_final, -0.75, 1e-8);
}

TEST(SolveExact, NeedsDenseHessian) {
  Problem p = family(Family::quartic_saddle, 2);
  p.dense_hessian = nullptr;
  EXPECT_THROW(solve_exact(p, Vector::Zero(2), SolverParams{}), ConfigurationError);
}

TEST(SolveExact, IterationLimit) {
  SolverParams params;
  params.max_iters = 3;
  const SolveReport r = solve_exact(family(Family::rosenbrock_extended, 2),
                                    vec2(-1.2, 1), params);
  EXPECT_EQ(r.status, SolveStatus::IterLimit);
  EXPECT_EQ(r.history.size(), 3u);
}

TEST(SolveExact, WrongStartDimension) {
  EXPECT_THROW(solve_exact(family(Family::quartic_saddle, 2), Vector::Zero(3), SolverParams{}),
               ConfigurationError);
}

TEST(SolveNewtonCg, QuarticSaddleFromOrigin) {
  const SolveReport r = solve_newton_cg(family(Family::quartic_saddle, 2), Vector::Zero(2),
                                        SolverParams{});
  EXPECT_EQ(r.status, SolveStatus::SecondOrderStationary);
  EXPECT_NEAR(r.f_final, -0.5, 1e-6);
  ASSERT_FALSE(r.history.empty());
  EXPECT_TRUE(r.history[0].meo_called);
  EXPECT_EQ(r.history[0].kind, StepKind::Meo);
  EXPECT_DOUBLE_EQ(r.history[0].step_norm, 10.0);
}

TEST(SolveNewtonCg, Rosenbrock) {
  const SolverParams params;
  const SolveReport r = solve_newton_cg(family(Family::rosenbrock_extended, 2),
                                        vec2(-1.2, 1), params);
  EXPECT_EQ(r.status, SolveStatus::SecondOrderStationary);
  EXPECT_LE(r.f_final, 1e-8);
  EXPECT_LE(r.grad_norm_final, params.eps_g);
  expect_monotone(r);
  expect_radius_replay(r, params);
}

TEST(SolveNewtonCg, HardCaseQuadraticIsUnbounded) {
  ProblemSpec spec;
  spec.family = Family::hard_case_quadratic;
  spec.n = 5;
  SolverParams params;
  params.max_iters = 60;
  const SolveReport r = solve_newton_cg(make_problem(spec), spec.start(), params);
  EXPECT_TRUE(r.status == SolveStatus::IterLimit || r.status == SolveStatus::HvpLimit);
  ASSERT_FALSE(r.history.empty());
  EXPECT_EQ(r.history[0].cg_outcome, CgOutcome::IntRes);
  EXPECT_TRUE(r.history[0].meo_called);
  EXPECT_GT(r.history[0].step_norm, 9.0);
  expect_monotone(r);
  for (const auto& rec : r.history) EXPECT_TRUE(rec.accepted);
}

TEST(SolveNewtonCg, CachedDirectionDuringRejectionStreak) {
  const SolveReport r = solve_newton_cg(family(Family::quartic_saddle, 10), Vector::Zero(10),
                                        SolverParams{});
  ASSERT_GE(r.history.size(), 3u);
  EXPECT_EQ(r.history[0].kind, StepKind::Meo);
  EXPECT_FALSE(r.history[0].accepted);
  std::size_t i = 1;
  for (; i < r.history.size() && !r.history[i - 1].accepted; ++i) {
    EXPECT_EQ(r.history[i].kind, StepKind::CachedMeo);
    EXPECT_TRUE(r.history[i].used_cached_direction);
    EXPECT_FALSE(r.history[i].meo_called);
  }
  EXPECT_GT(i, 2u);
}

TEST(SolveNewtonCg, MeoCalledAtMostOncePerSuccessfulStretch) {
  for (Family f : {Family::quartic_saddle, Family::rosenbrock_chained}) {
    const SolveReport r = solve_newton_cg(family(f, 20), start(f, 20), SolverParams{});
    int calls = 0;
    for (const auto& rec : r.history) {
      calls += rec.meo_called;
      EXPECT_LE(calls, 1);
      if (rec.used_cached_direction) EXPECT_EQ(calls, 1);
      if (rec.accepted) calls = 0;
    }
  }
}

TEST(SolveNewtonCg, TerminationSoundnessWithoutCap) {
  for (Family f : all_families()) {
    if (f == Family::hard_case_quadratic || f == Family::indefinite_quadratic) continue;
    SolverParams params;
    const SolveReport r = solve_newton_cg(family(f, 12), start(f, 12), params);
    if (r.status == SolveStatus::SecondOrderStationary) {
      EXPECT_LE(r.grad_norm_final, params.eps_g) << to_string(f);
    }
  }
}

TEST(SolveNewtonCg, ProductAccountingIsConserved) {
  for (bool cap : {false, true}) {
    SolverParams params;
    params.cap_cg = cap;
    const SolveReport r = solve_newton_cg(family(Family::rosenbrock_chained, 30),
                                          start(Family::rosenbrock_chained, 30), params);
    EXPECT_EQ(r.counters.total_hvp(), r.setup_hvp + history_hvps(r) + r.final_hvp);
    for (const auto& rec : r.history) {
      const std::uint64_t meo = rec.meo_called ? rec.lanczos_iters + 1 : 0;
      EXPECT_EQ(rec.hvps, rec.cg_iters + meo + 1);
    }
    EXPECT_EQ(r.setup_hvp, cap ? 30u : 0u);
  }
}

TEST(SolveNewtonCg, Deterministic) {
  SolverParams params;
  params.seed = 9;
  const Problem p = family(Family::quartic_saddle, 30);
  const SolveReport a = solve_newton_cg(p, Vector::Zero(30), params);
  const SolveReport b = solve_newton_cg(p, Vector::Zero(30), params);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].counters_snapshot, b.history[i].counters_snapshot);
    EXPECT_EQ(a.history[i].f, b.history[i].f);
  }
  EXPECT_EQ(a.x_final, b.x_final);
}

TEST(SolveNewtonCg, ProductBudget) {
  SolverParams params;
  params.max_hvp = 10;
  const SolveReport r = solve_newton_cg(family(Family::rosenbrock_chained, 30),
                                        start(Family::rosenbrock_chained, 30), params);
  EXPECT_EQ(r.status, SolveStatus::HvpLimit);
  EXPECT_EQ(r.counters.total_hvp(), r.setup_hvp + history_hvps(r) + r.final_hvp);
}

TEST(SolveNewtonCg, EstimatesBoundOnlyWhenCapped) {
  SolverParams params;
  const Problem p = family(Family::quartic_saddle, 8);
  Vector x0 = Vector::Constant(8, 2.0);
  EXPECT_FALSE(solve_newton_cg(p, x0, params).M_used);
  params.cap_cg = true;
  const SolveReport r = solve_newton_cg(p, x0, params);
  ASSERT_TRUE(r.M_used);
  EXPECT_NEAR(*r.M_used, 1.1 * 11.0, 1e-8);
  params.M = 50.0;
  EXPECT_EQ(*solve_newton_cg(p, x0, params).M_used, 50.0);
}

TEST(IterationBudget, WorkedValues) {
  SolverParams p;
  p.eps_g = 1e-2;
  p.eps_H = 1e-1;
  const SuccessBudget b = iteration_budget(1.0, 0.0, p, 1.0);
  EXPECT_NEAR(b.C_S_bar, 720.0, 1e-9);
  EXPECT_EQ(b.K_S_bar, 720001.0);

  const SuccessBudget zero = iteration_budget(2.0, 2.0, p, 1.0);
  EXPECT_EQ(zero.C_S_bar, 0.0);
  EXPECT_EQ(zero.K_S_bar, 1.0);
}

TEST(IterationBudget, Preconditions) {
  EXPECT_THROW(iteration_budget(0.0, 1.0, SolverParams{}, 1.0), PreconditionViolation);
  EXPECT_THROW(iteration_budget(1.0, 0.0, SolverParams{}, 0.0), PreconditionViolation);
}

TEST(StatusNames, Stable) {
  EXPECT_EQ(to_string(SolveStatus::SecondOrderStationary), "SecondOrderStationary");
  EXPECT_EQ(to_string(SolveStatus::HvpLimit), "HvpLimit");
  EXPECT_EQ(to_string(StepKind::CachedMeo), "cached_meo");
}
