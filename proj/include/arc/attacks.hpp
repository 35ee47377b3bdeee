#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arc/error.hpp"
#include "arc/linalg.hpp"
#include "arc/loss.hpp"
#include "arc/network.hpp"
#include "arc/rng.hpp"

namespace arc {

enum class Norm { kLinf, kL2 };

inline Norm parse_norm(std::string_view s) {
  if (s == "linf") return Norm::kLinf;
  if (s == "l2") return Norm::kL2;
  throw Error(ErrorCode::kUnknownEnum, "unknown norm '" + std::string(s) + "'");
}

inline std::string to_string(Norm n) { return n == Norm::kLinf ? "linf" : "l2"; }

inline double perturbation_norm(Norm n, std::span<const double> d) {
  return n == Norm::kLinf ? norm_inf(d) : norm2(d);
}

/// Common PGD heuristic: the ball boundary is reachable within the budget.
inline double default_step_size(double eps, std::size_t steps) {
  return steps == 0 ? 0.0 : 2.5 * eps / static_cast<double>(steps);
}

struct Budget {
  Norm norm = Norm::kLinf;
  double eps = 8.0 / 255.0;
  std::size_t steps = 100;
  double step_size = default_step_size(8.0 / 255.0, 100);

  static Budget with_default_step(Norm norm, double eps, std::size_t steps) {
    return {norm, eps, steps, default_step_size(eps, steps)};
  }
};

struct AttackResult {
  Vector adversarial;
  Vector perturbation;
  bool success = false;       // prediction != ground truth
  std::size_t queries = 0;    // forward evaluations (black-box) or gradient calls
  std::size_t skipped_steps = 0;
};

/// Projects delta onto the eps-ball of `norm`, then onto the [0,1] box around x.
/// Box clipping only shrinks |delta_i|, so the norm bound survives it.
inline void project(Vector& delta, const Vector& x, Norm norm, double eps) {
  if (norm == Norm::kLinf) {
    for (double& d : delta) d = std::clamp(d, -eps, eps);
  } else {
    const double n = norm2(delta.span());
    if (n > eps) delta *= (n > 0.0 ? eps / n : 0.0);
  }
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double v = std::clamp(x[i] + delta[i], 0.0, 1.0);
    delta[i] = v - x[i];
  }
}

inline AttackResult finish_attack(const Network& net, const Vector& x, std::size_t ground_truth,
                                  Vector delta, std::size_t queries, std::size_t skipped = 0) {
  AttackResult r;
  r.adversarial = clip(x + delta, 0.0, 1.0);
  r.perturbation = std::move(delta);
  r.success = predicted_class(net, r.adversarial) != ground_truth;
  r.queries = queries;
  r.skipped_steps = skipped;
  return r;
}

/// Class fed to the loss under `spec.label_rule`.
inline std::size_t resolve_label(const Network& net, const Vector& x, std::size_t ground_truth,
                                 const LossSpec& spec, Rng& rng) {
  switch (spec.label_rule) {
    case LabelRule::kGroundTruth: return ground_truth;
    case LabelRule::kMostLikely: return predicted_class(net, x);
    case LabelRule::kLeastLikely: return least_likely_class(net, x);
    case LabelRule::kRandom: {
      std::uniform_int_distribution<std::size_t> d(0, net.num_classes() - 1);
      return d(rng);
    }
    case LabelRule::kFixed:
      require(spec.fixed_class < net.num_classes(), ErrorCode::kInvalidArgument, "fixed class out of range");
      return spec.fixed_class;
  }
  throw Error(ErrorCode::kUnknownEnum, "unknown label rule");
}

// ---------------------------------------------------------------------------
// White-box attacks

inline AttackResult fgsm(const Network& net, const Vector& x, std::size_t label, double eps) {
  require(eps >= 0.0, ErrorCode::kInvalidArgument, "eps must be non-negative");
  LossSpec ce{LossKind::kCrossEntropy, LabelRule::kGroundTruth};
  Vector g = grad_input(net, x, ce, label);
  Vector delta(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) delta[i] = eps * sign(g[i]);
  project(delta, x, Norm::kLinf, eps);
  return finish_attack(net, x, label, std::move(delta), 1);
}

struct BimOptions {
  bool maximize = true;
  bool random_start = false;  // PGD
  bool momentum = false;      // MIM
  double decay = 1.0;         // MIM decay factor
  std::uint64_t seed = 0;
};

/// Iterative projected gradient attack. Covers BIM (delta_0 = 0), PGD
/// (uniform random start in the ball) and MIM (l1-normalised momentum).
/// Steps with an all-zero direction are skipped and counted.
inline AttackResult bim(const Network& net, const Vector& x, std::size_t ground_truth,
                        const Budget& budget, const LossSpec& loss, const BimOptions& opts = {}) {
  check_input(net, x.span());
  require(budget.steps >= 1, ErrorCode::kInvalidArgument, "attack needs at least one step");
  require(budget.eps >= 0.0 && budget.step_size > 0.0, ErrorCode::kInvalidArgument,
          "eps must be >= 0 and step size > 0");
  Rng rng = derive_rng(opts.seed, 0);
  const std::size_t label = resolve_label(net, x, ground_truth, loss, rng);
  const std::size_t m = x.size();

  Vector delta(m);
  if (opts.random_start && budget.eps > 0.0) {
    if (budget.norm == Norm::kLinf) {
      std::uniform_real_distribution<double> u(-budget.eps, budget.eps);
      for (double& d : delta) d = u(rng);
    } else {
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& d : delta) d = g(rng);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double radius = budget.eps * std::pow(u(rng), 1.0 / static_cast<double>(m));
      const double n = norm2(delta.span());
      delta *= n > 0.0 ? radius / n : 0.0;
    }
    project(delta, x, budget.norm, budget.eps);
  }

  Vector velocity(m);
  std::size_t skipped = 0;
  for (std::size_t t = 0; t < budget.steps; ++t) {
    Vector g = grad_input(net, x + delta, loss, label);
    if (!opts.maximize) g *= -1.0;
    if (opts.momentum) {
      const double l1 = norm1(g.span());
      velocity *= opts.decay;
      if (l1 > 0.0) velocity += (1.0 / l1) * g;
      g = velocity;
    }
    const double scale = budget.norm == Norm::kLinf ? norm_inf(g.span()) : norm2(g.span());
    if (!(scale > 0.0)) {
      ++skipped;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i)
      delta[i] += budget.norm == Norm::kLinf ? budget.step_size * sign(g[i]) : budget.step_size * g[i] / scale;
    project(delta, x, budget.norm, budget.eps);
  }
  return finish_attack(net, x, ground_truth, std::move(delta), budget.steps, skipped);
}

inline AttackResult pgd(const Network& net, const Vector& x, std::size_t ground_truth, const Budget& budget,
                        std::uint64_t seed) {
  BimOptions o;
  o.random_start = true;
  o.seed = seed;
  return bim(net, x, ground_truth, budget, {LossKind::kCrossEntropy, LabelRule::kGroundTruth}, o);
}

inline AttackResult mim(const Network& net, const Vector& x, std::size_t ground_truth, const Budget& budget,
                        double decay = 1.0) {
  BimOptions o;
  o.momentum = true;
  o.decay = decay;
  return bim(net, x, ground_truth, budget, {LossKind::kCrossEntropy, LabelRule::kGroundTruth}, o);
}

// ---------------------------------------------------------------------------
// Score-based estimators. They only ever see a scalar loss oracle.

using LossOracle = std::function<double(const Vector&)>;

/// Antithetic Gaussian NES: (1/(2 n s)) sum_i [L(x+s u_i) - L(x-s u_i)] u_i.
inline Vector nes_gradient(const LossOracle& loss, const Vector& x, std::size_t samples, double smoothing,
                           Rng& rng, std::size_t* queries = nullptr) {
  require(samples >= 1 && smoothing > 0.0, ErrorCode::kInvalidArgument, "NES needs n >= 1 and sigma > 0");
  std::normal_distribution<double> g(0.0, 1.0);
  Vector est(x.size());
  Vector u(x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : u) v = g(rng);
    const double diff = loss(x + smoothing * u) - loss(x - smoothing * u);
    est += diff * u;
  }
  est *= 1.0 / (2.0 * static_cast<double>(samples) * smoothing);
  if (queries) *queries += 2 * samples;
  return est;
}

/// SPSA with Rademacher directions; dividing by u_i equals multiplying by it.
inline Vector spsa_gradient(const LossOracle& loss, const Vector& x, std::size_t samples, double smoothing,
                            Rng& rng, std::size_t* queries = nullptr) {
  require(samples >= 1 && smoothing > 0.0, ErrorCode::kInvalidArgument, "SPSA needs n >= 1 and sigma > 0");
  std::bernoulli_distribution coin(0.5);
  Vector est(x.size());
  Vector u(x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : u) v = coin(rng) ? 1.0 : -1.0;
    const double diff = loss(x + smoothing * u) - loss(x - smoothing * u);
    for (std::size_t i = 0; i < x.size(); ++i) est[i] += diff / u[i];
  }
  est *= 1.0 / (2.0 * static_cast<double>(samples) * smoothing);
  if (queries) *queries += 2 * samples;
  return est;
}

enum class Estimator { kNes, kSpsa };

struct BlackBoxOptions {
  Estimator estimator = Estimator::kNes;
  std::size_t samples = 20;
  double smoothing = 1e-3;
  std::uint64_t seed = 0;
};

/// Sign-gradient PGD where the gradient comes from a score-only estimator.
inline AttackResult black_box_attack(const Network& net, const Vector& x, std::size_t ground_truth,
                                     const Budget& budget, const BlackBoxOptions& opts) {
  check_input(net, x.span());
  require(budget.steps >= 1, ErrorCode::kInvalidArgument, "attack needs at least one step");
  Rng rng = derive_rng(opts.seed, 1);
  LossOracle oracle = [&net, ground_truth](const Vector& v) {
    return softmax_cross_entropy(forward(net, v), ground_truth);
  };
  Vector delta(x.size());
  std::size_t queries = 0;
  std::size_t skipped = 0;
  for (std::size_t t = 0; t < budget.steps; ++t) {
    Vector g = opts.estimator == Estimator::kNes
                   ? nes_gradient(oracle, x + delta, opts.samples, opts.smoothing, rng, &queries)
                   : spsa_gradient(oracle, x + delta, opts.samples, opts.smoothing, rng, &queries);
    const double scale = budget.norm == Norm::kLinf ? norm_inf(g.span()) : norm2(g.span());
    if (!(scale > 0.0)) {
      ++skipped;
      continue;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
      delta[i] += budget.norm == Norm::kLinf ? budget.step_size * sign(g[i]) : budget.step_size * g[i] / scale;
    project(delta, x, budget.norm, budget.eps);
  }
  return finish_attack(net, x, ground_truth, std::move(delta), queries, skipped);
}

// ---------------------------------------------------------------------------
// Noise baselines

enum class NoiseKind { kGaussian, kUniform };

inline AttackResult noise_attack(const Network& net, const Vector& x, std::size_t ground_truth, double eps,
                                 NoiseKind kind, std::uint64_t seed) {
  require(eps >= 0.0, ErrorCode::kInvalidArgument, "eps must be non-negative");
  Rng rng = derive_rng(seed, 2);
  Vector delta(x.size());
  if (kind == NoiseKind::kGaussian) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& d : delta) d = g(rng);
    const double n = norm_inf(delta.span());
    delta *= n > 0.0 ? eps / n : 0.0;
  } else {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& d : delta) d = eps * u(rng);
  }
  project(delta, x, Norm::kLinf, eps);
  return finish_attack(net, x, ground_truth, std::move(delta), 0);
}

// ---------------------------------------------------------------------------
// Adaptive attacks

/// Bisection on lambda along clip(x_b + lambda (x_a - x_b)); returns the
/// misclassified endpoint of the final bracket (within 2^-max_bisections of
/// the boundary crossing).
inline Vector interpolation_attack(const Network& net, const Vector& x_benign, const Vector& x_adv,
                                   std::size_t max_bisections, double* lambda_out = nullptr) {
  require(x_benign.size() == x_adv.size(), ErrorCode::kDimensionMismatch, "interpolation endpoints differ in length");
  const std::size_t benign_class = predicted_class(net, x_benign);
  require(predicted_class(net, x_adv) != benign_class, ErrorCode::kPrecondition,
          "interpolation attack needs x_adv classified differently from x_benign");
  auto point = [&](double lambda) { return clip(x_benign + lambda * (x_adv - x_benign), 0.0, 1.0); };
  double lo = 0.0, hi = 1.0;
  for (std::size_t i = 0; i < max_bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (predicted_class(net, point(mid)) != benign_class)
      hi = mid;
    else
      lo = mid;
  }
  if (lambda_out) *lambda_out = hi;
  return point(hi);
}

/// Descends the MSE between the logits and `target_logits` (typically the
/// clean logits of a sample from another class).
inline AttackResult logit_matching_attack(const Network& net, const Vector& x, std::size_t ground_truth,
                                          const Vector& target_logits, const Budget& budget) {
  LossSpec spec{LossKind::kLogitMatchMse, LabelRule::kGroundTruth, 0, target_logits};
  BimOptions o;
  o.maximize = false;
  return bim(net, x, ground_truth, budget, spec, o);
}

}  // namespace arc
