#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "arc/attacks.hpp"
#include "arc/csv.hpp"
#include "arc/dataset.hpp"
#include "arc/detect.hpp"
#include "arc/features.hpp"
#include "arc/network.hpp"
#include "arc/rng.hpp"

namespace arc {

inline const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names{"fgsm", "bim",     "pgd",        "mim",   "nes",
                                              "spsa", "gauss",   "uniform",    "logitmatch", "interp"};
  return names;
}

struct AttackSpec {
  std::string name = "bim";
  Norm norm = Norm::kLinf;
  Fraction eps{8, 255};
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  std::size_t bb_samples = 20;       // NES / SPSA directions per step
  double bb_smoothing = 1e-3;
  std::size_t interp_bisections = 20;
};

inline void validate_attack_name(const std::string& name) {
  for (const auto& n : attack_names())
    if (n == name) return;
  throw Error(ErrorCode::kUnknownEnum, "unknown attack '" + name + "'");
}

/// Runs one attack on sample `id` of `data`. Per-sample randomness is drawn
/// from (spec.seed, id). Logit matching targets the clean logits of the next
/// sample with a different label; interpolation bisects between the input
/// and its BIM counterpart, falling back to the BIM result when BIM fails.
inline AttackResult run_attack(const Network& net, const Dataset& data, std::size_t id, const AttackSpec& spec) {
  validate_attack_name(spec.name);
  const Vector& x = data.inputs[id];
  const std::size_t y = data.labels[id];
  const double eps = spec.eps.value();
  const std::uint64_t seed = splitmix64(spec.seed ^ splitmix64(id + 1));
  const Budget budget = Budget::with_default_step(spec.norm, eps, spec.steps);
  const LossSpec ce{LossKind::kCrossEntropy, LabelRule::kGroundTruth};

  if (eps == 0.0) return finish_attack(net, x, y, Vector(x.size()), 0);
  const std::string& n = spec.name;
  if (n == "fgsm") {
    require(spec.norm == Norm::kLinf, ErrorCode::kInvalidArgument, "FGSM is Linf only");
    return fgsm(net, x, y, eps);
  }
  if (n == "bim") return bim(net, x, y, budget, ce);
  if (n == "pgd") return pgd(net, x, y, budget, seed);
  if (n == "mim") return mim(net, x, y, budget);
  if (n == "nes" || n == "spsa") {
    BlackBoxOptions o;
    o.estimator = n == "nes" ? Estimator::kNes : Estimator::kSpsa;
    o.samples = spec.bb_samples;
    o.smoothing = spec.bb_smoothing;
    o.seed = seed;
    return black_box_attack(net, x, y, budget, o);
  }
  if (n == "gauss" || n == "uniform")
    return noise_attack(net, x, y, eps, n == "gauss" ? NoiseKind::kGaussian : NoiseKind::kUniform, seed);
  if (n == "logitmatch") {
    std::size_t other = id;
    for (std::size_t k = 1; k <= data.size(); ++k) {
      const std::size_t cand = (id + k) % data.size();
      if (data.labels[cand] != y) {
        other = cand;
        break;
      }
    }
    require(other != id, ErrorCode::kInvalidArgument, "logit matching needs a sample from another class");
    return logit_matching_attack(net, x, y, forward(net, data.inputs[other]), budget);
  }
  // interp
  AttackResult base = bim(net, x, y, budget, ce);
  if (predicted_class(net, base.adversarial) == predicted_class(net, x)) return base;
  Vector adv = interpolation_attack(net, x, base.adversarial, spec.interp_bisections);
  Vector delta = adv - x;
  return finish_attack(net, x, y, std::move(delta), base.queries + spec.interp_bisections);
}

inline std::vector<AttackResult> run_attack_batch(const Network& net, const Dataset& data, const AttackSpec& spec) {
  std::vector<AttackResult> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(run_attack(net, data, i, spec));
  return out;
}

inline Dataset adversarial_dataset(const Dataset& clean, const std::vector<AttackResult>& results) {
  Dataset d = clean;
  for (std::size_t i = 0; i < results.size(); ++i) d.inputs[i] = results[i].adversarial;
  return d;
}

/// ARC features of every input; per-sample randomness (random label rule,
/// noise exploitation) is drawn from (cfg.seed, id).
inline std::vector<FeatureRecord> extract_features(const Network& net, const Dataset& data, const ExploitConfig& cfg,
                                                   const std::string& source, const std::string& attack,
                                                   Fraction eps, std::vector<Matrix>* matrices = nullptr) {
  std::vector<FeatureRecord> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ExploitConfig c = cfg;
    c.seed = splitmix64(cfg.seed ^ splitmix64(i + 1));
    ArcMatrix m = arc_matrix(net, data.inputs[i], c);
    ArcVector v = arc_vector(m);
    rows.push_back({i, source, attack, eps, v.A, v.sigma, v.arc_mean, m.selected_n});
    if (matrices) matrices->push_back(std::move(m.values));
  }
  return rows;
}

}  // namespace arc
