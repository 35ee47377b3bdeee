#include <gtest/gtest.h>

#include <cmath>

#include "arc/attacks.hpp"
#include "arc/pipeline.hpp"
#include "test_support.hpp"
#include "toy_model.hpp"

using namespace arc;

namespace {

const LossSpec kCe{LossKind::kCrossEntropy, LabelRule::kGroundTruth};

// Two classes; the CE gradient for label 0 is positive in every coordinate.
Network uphill_net(std::size_t m) {
  Matrix w(2, m);
  for (std::size_t i = 0; i < m; ++i) {
    w(0, i) = -1.0;
    w(1, i) = 1.0;
  }
  return Network({m, 2}, {w}, {Vector{0, 0}});
}

Vector constant(std::size_t m, double v) { return Vector(std::vector<double>(m, v)); }

void expect_valid(const AttackResult& r, const Vector& x, Norm norm, double eps) {
  EXPECT_LE(perturbation_norm(norm, r.perturbation.span()), eps + 1e-9);
  EXPECT_EQ(r.adversarial, clip(x + r.perturbation, 0.0, 1.0));
  for (double v : r.adversarial) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

double success_rate(const Network& net, const Dataset& d, const AttackSpec& spec) {
  std::size_t s = 0;
  for (std::size_t i = 0; i < d.size(); ++i) s += run_attack(net, d, i, spec).success;
  return static_cast<double>(s) / static_cast<double>(d.size());
}

Dataset first_test_points(std::size_t per_class) {
  return take_per_class(toy::standard_toy().split.test, 0, per_class);
}

}  // namespace

TEST(Dlr, WorkedValues) {
  // The 1e-12 guard shifts the hand-evaluated values in the 13th digit.
  EXPECT_NEAR(dlr_loss(Vector{3, 2, 1}, 0), -0.5, 1e-12);
  EXPECT_NEAR(dlr_loss(Vector{5, 1, 1}, 0), -1.0, 1e-12);
  EXPECT_EQ(dlr_loss(Vector{1, 1, 1}, 0), 0.0);
  EXPECT_THROW(dlr_loss(Vector{1, 2}, 0), Error);
}

TEST(Fgsm, ZeroEpsIsIdentity) {
  Network net = uphill_net(4);
  Vector x = constant(4, 0.5);
  const std::size_t label = predicted_class(net, x);
  AttackResult r = fgsm(net, x, label, 0.0);
  EXPECT_EQ(r.adversarial, x);
  EXPECT_FALSE(r.success);
}

TEST(Fgsm, PositiveGradientMovesEveryCoordinateUp) {
  Network net = uphill_net(6);
  Vector x = constant(6, 0.5);
  const double eps = 8.0 / 255.0;
  AttackResult r = fgsm(net, x, 0, eps);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(r.adversarial[i], 0.5 + eps);
  expect_valid(r, x, Norm::kLinf, eps);
}

TEST(Fgsm, UnclippedCoordinatesMoveByExactlyEps) {
  Network net = oracle::random_network({16, 12, 5}, 3);
  Vector x = oracle::random_input(16, 4);
  const double eps = 4.0 / 255.0;
  AttackResult r = fgsm(net, x, 2, eps);
  Vector g = grad_input(net, x, kCe, 2);
  for (std::size_t i = 0; i < 16; ++i) {
    const double target = x[i] + eps * sign(g[i]);
    if (g[i] != 0.0 && target > 0.0 && target < 1.0) {
      EXPECT_NEAR(std::abs(r.adversarial[i] - x[i]), eps, 1e-15);
    }
  }
  expect_valid(r, x, Norm::kLinf, eps);
}

TEST(Bim, OneStepUniformSign) {
  Network net = uphill_net(8);
  Vector x = constant(8, 0.5);
  Budget b{Norm::kLinf, 8.0 / 255.0, 1, 2.0 / 255.0};
  AttackResult r = bim(net, x, 0, b, kCe);
  for (double d : r.perturbation) EXPECT_DOUBLE_EQ(d, 0.5 + 2.0 / 255.0 - 0.5);
}

TEST(Bim, BudgetHoldsAfterManySteps) {
  Network net = oracle::random_network({20, 16, 6}, 8);
  for (Norm norm : {Norm::kLinf, Norm::kL2}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Vector x = oracle::random_input(20, s);
      const double eps = norm == Norm::kLinf ? 16.0 / 255.0 : 0.5;
      Budget b = Budget::with_default_step(norm, eps, 50);
      expect_valid(bim(net, x, s % 6, b, kCe), x, norm, eps);
      BimOptions o;
      o.random_start = true;
      o.seed = s;
      expect_valid(bim(net, x, s % 6, b, kCe, o), x, norm, eps);
      o.momentum = true;
      expect_valid(bim(net, x, s % 6, b, kCe, o), x, norm, eps);
    }
  }
}

TEST(Bim, ZeroGradientStepsAreSkipped) {
  Network net({3, 2}, {Matrix(2, 3)}, {Vector{0, 0}});
  Vector x = constant(3, 0.5);
  AttackResult r = bim(net, x, 0, Budget::with_default_step(Norm::kLinf, 0.1, 5), kCe);
  EXPECT_EQ(r.skipped_steps, 5u);
  EXPECT_EQ(r.adversarial, x);
}

TEST(Bim, ZeroEpsReturnsZeroPerturbation) {
  Network net = oracle::random_network({10, 8, 3}, 1);
  Vector x = oracle::random_input(10, 2);
  Budget b{Norm::kLinf, 0.0, 10, 1.0 / 255.0};
  AttackResult r = bim(net, x, 0, b, kCe);
  for (double d : r.perturbation) EXPECT_EQ(d, 0.0);
}

TEST(Bim, ToyModelSuccessAtLargeEps) {
  Dataset d = first_test_points(10);
  ASSERT_EQ(d.size(), 100u);
  AttackSpec spec;
  spec.name = "bim";
  spec.eps = {16, 255};
  spec.steps = 100;
  EXPECT_GE(success_rate(toy::standard_toy().standard, d, spec), 0.90);
}

TEST(Attacks, SuccessNonDecreasingInEps) {
  Dataset d = first_test_points(10);
  for (const char* name : {"bim", "pgd", "mim"}) {
    double prev = -1.0;
    for (int k : {0, 2, 4, 8, 16}) {
      AttackSpec spec;
      spec.name = name;
      spec.eps = {k, 255};
      spec.seed = 5;
      const double rate = success_rate(toy::standard_toy().standard, d, spec);
      EXPECT_GE(rate, prev) << name << " eps " << k << "/255";
      prev = rate;
    }
  }
}

TEST(Attacks, EveryAttackRespectsBudgetAndIsReproducible) {
  Dataset d = first_test_points(2);
  const Network& net = toy::standard_toy().standard;
  for (const auto& name : attack_names()) {
    AttackSpec spec;
    spec.name = name;
    spec.eps = {8, 255};
    spec.steps = 10;
    spec.seed = 99;
    for (std::size_t i = 0; i < d.size(); ++i) {
      AttackResult a = run_attack(net, d, i, spec);
      AttackResult b = run_attack(net, d, i, spec);
      EXPECT_EQ(a.adversarial, b.adversarial) << name;
      expect_valid(a, d.inputs[i], Norm::kLinf, 8.0 / 255.0);
    }
  }
}

TEST(Attacks, UnknownNameRejected) {
  AttackSpec spec;
  spec.name = "cw";
  try {
    run_attack(toy::standard_toy().standard, first_test_points(1), 0, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownEnum);
  }
}

TEST(Estimators, NesRecoversLinearGradientDirection) {
  Vector w = oracle::random_input(64, 31);
  for (double& v : w) v -= 0.5;
  LossOracle f = [&](const Vector& v) { return dot(w.span(), v.span()); };
  Rng rng = derive_rng(4, 0);
  std::size_t queries = 0;
  Vector est = nes_gradient(f, oracle::random_input(64, 1), 2000, 1e-3, rng, &queries);
  EXPECT_GT(dot(est.span(), w.span()) / (norm2(est.span()) * norm2(w.span())), 0.9);
  EXPECT_EQ(queries, 4000u);
}

TEST(Estimators, SpsaRecoversLinearGradientDirection) {
  Vector w = oracle::random_input(64, 32);
  for (double& v : w) v -= 0.5;
  LossOracle f = [&](const Vector& v) { return dot(w.span(), v.span()); };
  Rng rng = derive_rng(4, 0);
  std::size_t queries = 0;
  Vector est = spsa_gradient(f, oracle::random_input(64, 1), 2000, 1e-3, rng, &queries);
  EXPECT_GT(dot(est.span(), w.span()) / (norm2(est.span()) * norm2(w.span())), 0.9);
  EXPECT_EQ(queries, 4000u);
}

TEST(Estimators, QuadraticCentralDifferenceIsExact) {
  // On a quadratic the antithetic difference equals 2 s g.u for any s, so the
  // estimate must equal (1/n) sum (g.u) u over the same directions.
  const std::size_t m = 5, n = 7;
  Vector x = oracle::random_input(m, 3);
  LossOracle f = [](const Vector& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i + 1.0) * v[i] * v[i];
    return s;
  };
  Vector g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = 2.0 * (i + 1.0) * x[i];
  Rng a = derive_rng(9, 0), b = derive_rng(9, 0);
  Vector est = nes_gradient(f, x, n, 1e-4, a);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector expected(m);
  for (std::size_t s = 0; s < n; ++s) {
    Vector u(m);
    for (double& v : u) v = gauss(b);
    expected += (dot(g.span(), u.span()) / static_cast<double>(n)) * u;
  }
  for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(est[i], expected[i], 1e-6);
}

TEST(Estimators, BlackBoxQueryCount) {
  Network net = oracle::random_network({10, 8, 3}, 1);
  Vector x = oracle::random_input(10, 2);
  BlackBoxOptions o;
  o.samples = 6;
  AttackResult r = black_box_attack(net, x, 0, Budget::with_default_step(Norm::kLinf, 0.05, 4), o);
  EXPECT_EQ(r.queries, 2u * 6u * 4u);
  o.estimator = Estimator::kSpsa;
  r = black_box_attack(net, x, 0, Budget::with_default_step(Norm::kLinf, 0.05, 4), o);
  EXPECT_EQ(r.queries, 2u * 6u * 4u);
  expect_valid(r, x, Norm::kLinf, 0.05);
}

TEST(Noise, IdentityReproducibleAndBounded) {
  Network net = oracle::random_network({10, 8, 3}, 1);
  Vector x = oracle::random_input(10, 2);
  for (NoiseKind k : {NoiseKind::kGaussian, NoiseKind::kUniform}) {
    EXPECT_EQ(noise_attack(net, x, 0, 0.0, k, 1).adversarial, x);
    AttackResult a = noise_attack(net, x, 0, 0.1, k, 5);
    EXPECT_EQ(a.adversarial, noise_attack(net, x, 0, 0.1, k, 5).adversarial);
    EXPECT_FALSE(a.adversarial == noise_attack(net, x, 0, 0.1, k, 6).adversarial);
    expect_valid(a, x, Norm::kLinf, 0.1);
  }
}

TEST(Noise, GaussianReachesBallSurface) {
  Network net = oracle::random_network({10, 8, 3}, 1);
  Vector x = constant(10, 0.5);
  AttackResult a = noise_attack(net, x, 0, 0.1, NoiseKind::kGaussian, 3);
  EXPECT_NEAR(norm_inf(a.perturbation.span()), 0.1, 1e-15);
}

TEST(Interpolation, SameClassIsPreconditionError) {
  Network net = uphill_net(3);
  try {
    interpolation_attack(net, constant(3, 0.1), constant(3, 0.2), 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(Interpolation, MatchesExhaustiveScanOnLinearModel) {
  Matrix w{{0.7, -0.2, 0.4, 0.1}, {-0.3, 0.9, 0.2, -0.5}, {0.1, 0.1, -0.6, 0.8}};
  Network net({4, 3}, {w}, {Vector{0.05, -0.02, 0.0}});
  Vector xb{0.9, 0.1, 0.6, 0.2};
  Vector xa{0.1, 0.8, 0.3, 0.7};
  ASSERT_NE(predicted_class(net, xb), predicted_class(net, xa));
  double lambda = -1.0;
  Vector adv = interpolation_attack(net, xb, xa, 20, &lambda);
  const std::size_t benign = predicted_class(net, xb);
  const std::size_t grid = std::size_t{1} << 20;
  double oracle_lambda = 1.0;
  for (std::size_t k = 0; k <= grid; ++k) {
    const double l = static_cast<double>(k) / static_cast<double>(grid);
    if (predicted_class(net, clip(xb + l * (xa - xb), 0.0, 1.0)) != benign) {
      oracle_lambda = l;
      break;
    }
  }
  EXPECT_LE(std::abs(lambda - oracle_lambda), std::ldexp(1.0, -20));
  EXPECT_NE(predicted_class(net, adv), benign);
}

TEST(Interpolation, ReturnedPointMisclassifiedOnToy) {
  const Network& net = toy::standard_toy().standard;
  Dataset d = first_test_points(2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    AttackResult base = bim(net, d.inputs[i], d.labels[i], Budget::with_default_step(Norm::kLinf, 16.0 / 255, 50), kCe);
    if (predicted_class(net, base.adversarial) == predicted_class(net, d.inputs[i])) continue;
    Vector adv = interpolation_attack(net, d.inputs[i], base.adversarial, 20);
    EXPECT_NE(predicted_class(net, adv), predicted_class(net, d.inputs[i]));
  }
}

TEST(LogitMatching, OwnLogitsGiveZeroPerturbation) {
  Network net = oracle::random_network({10, 8, 3}, 1);
  Vector x = oracle::random_input(10, 2);
  AttackResult r = logit_matching_attack(net, x, 0, forward(net, x), Budget::with_default_step(Norm::kLinf, 0.1, 5));
  for (double d : r.perturbation) EXPECT_EQ(d, 0.0);
}

TEST(LogitMatching, MseNonIncreasingOverStepsOnMostSamples) {
  const Network& net = toy::standard_toy().standard;
  Dataset d = first_test_points(10);
  const double eps = 16.0 / 255.0;
  const std::size_t steps = 20;
  const double alpha = default_step_size(eps, 100);
  std::size_t monotone = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::size_t other = (i + 10) % d.size();
    while (d.labels[other] == d.labels[i]) other = (other + 1) % d.size();
    const Vector target = forward(net, d.inputs[other]);
    const LossSpec mse{LossKind::kLogitMatchMse, LabelRule::kGroundTruth, 0, target};
    double prev = loss_value(mse, forward(net, d.inputs[i]), 0);
    bool ok = true;
    for (std::size_t t = 1; t <= steps && ok; ++t) {
      AttackResult r = logit_matching_attack(net, d.inputs[i], d.labels[i], target, {Norm::kLinf, eps, t, alpha});
      const double cur = loss_value(mse, forward(net, r.adversarial), 0);
      ok = cur <= prev;
      prev = cur;
    }
    monotone += ok;
    AttackResult full = logit_matching_attack(net, d.inputs[i], d.labels[i], target, {Norm::kLinf, eps, steps, alpha});
    expect_valid(full, d.inputs[i], Norm::kLinf, eps);
  }
  EXPECT_GE(monotone, 80u);
}
