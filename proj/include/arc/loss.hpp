#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "arc/error.hpp"
#include "arc/linalg.hpp"

namespace arc {

enum class LossKind { kCrossEntropy, kNegCrossEntropy, kDlr, kLogitMatchMse };

// How an attack or exploitation run picks the class fed to the loss.
enum class LabelRule { kGroundTruth, kMostLikely, kLeastLikely, kRandom, kFixed };

struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  LabelRule label_rule = LabelRule::kLeastLikely;
  std::size_t fixed_class = 0;
  std::optional<Vector> target_logits = std::nullopt;  // kLogitMatchMse only
};

struct LossValue {
  double value = 0.0;
  Vector grad;  // d loss / d logits
};

inline constexpr double kDlrGuard = 1e-12;

inline Vector softmax(const Vector& logits) {
  require(!logits.empty(), ErrorCode::kInvalidArgument, "softmax of empty logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  Vector p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  p *= 1.0 / z;
  return p;
}

inline double log_sum_exp(const Vector& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  return mx + std::log(z);
}

inline void check_label(const Vector& logits, std::size_t label) {
  require(label < logits.size(), ErrorCode::kInvalidArgument,
          "label " + std::to_string(label) + " out of range for " + std::to_string(logits.size()) +
              " classes");
}

/// -log softmax(logits)[label], max-shifted.
inline double softmax_cross_entropy(const Vector& logits, std::size_t label) {
  check_label(logits, label);
  // log1p keeps full precision when the label dominates.
  const std::size_t top = argmax(logits.span());
  double rest = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (i != top) rest += std::exp(logits[i] - logits[top]);
  const double v = std::log1p(rest) + (logits[top] - logits[label]);
  return v < 0.0 ? 0.0 : v;  // NaN passes through
}

/// Difference-of-logits ratio: -(z_y - max_{i!=y} z_i) / (z_pi1 - z_pi3 + 1e-12).
inline double dlr_loss(const Vector& logits, std::size_t label) {
  require(logits.size() >= 3, ErrorCode::kInvalidArgument, "DLR loss needs at least 3 classes");
  check_label(logits, label);
  std::vector<double> sorted(logits.begin(), logits.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (i != label) other = std::max(other, logits[i]);
  return -(logits[label] - other) / (sorted[0] - sorted[2] + kDlrGuard);
}

namespace detail {

inline LossValue cross_entropy_with_grad(const Vector& logits, std::size_t label) {
  Vector p = softmax(logits);
  double value = softmax_cross_entropy(logits, label);
  p[label] -= 1.0;
  return {value, std::move(p)};
}

inline LossValue dlr_with_grad(const Vector& logits, std::size_t label) {
  require(logits.size() >= 3, ErrorCode::kInvalidArgument, "DLR loss needs at least 3 classes");
  check_label(logits, label);
  std::vector<std::size_t> order(logits.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  std::size_t other = order[0] == label ? order[1] : order[0];
  const double num = logits[label] - logits[other];
  const double den = logits[order[0]] - logits[order[2]] + kDlrGuard;
  Vector g(logits.size());
  g[label] -= 1.0 / den;
  g[other] += 1.0 / den;
  g[order[0]] += num / (den * den);
  g[order[2]] -= num / (den * den);
  return {-num / den, std::move(g)};
}

inline LossValue logit_mse_with_grad(const Vector& logits, const Vector& target) {
  require(target.size() == logits.size(), ErrorCode::kDimensionMismatch,
          "logit-matching target has wrong length");
  const double n = static_cast<double>(logits.size());
  Vector g(logits.size());
  double value = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double d = logits[i] - target[i];
    value += d * d / n;
    g[i] = 2.0 * d / n;
  }
  return {value, std::move(g)};
}

}  // namespace detail

/// Loss value and its gradient with respect to the logits.
inline LossValue loss_with_grad(const LossSpec& spec, const Vector& logits, std::size_t label) {
  switch (spec.kind) {
    case LossKind::kCrossEntropy:
      return detail::cross_entropy_with_grad(logits, label);
    case LossKind::kNegCrossEntropy: {
      auto lv = detail::cross_entropy_with_grad(logits, label);
      lv.value = -lv.value;
      lv.grad *= -1.0;
      return lv;
    }
    case LossKind::kDlr:
      return detail::dlr_with_grad(logits, label);
    case LossKind::kLogitMatchMse:
      require(spec.target_logits.has_value(), ErrorCode::kInvalidArgument,
              "logit-matching loss requires target logits");
      return detail::logit_mse_with_grad(logits, *spec.target_logits);
  }
  throw Error(ErrorCode::kUnknownEnum, "unknown loss kind");
}

inline double loss_value(const LossSpec& spec, const Vector& logits, std::size_t label) {
  switch (spec.kind) {
    case LossKind::kCrossEntropy: return softmax_cross_entropy(logits, label);
    case LossKind::kNegCrossEntropy: return -softmax_cross_entropy(logits, label);
    case LossKind::kDlr: return dlr_loss(logits, label);
    case LossKind::kLogitMatchMse: return loss_with_grad(spec, logits, label).value;
  }
  throw Error(ErrorCode::kUnknownEnum, "unknown loss kind");
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "ce") return LossKind::kCrossEntropy;
  if (s == "negce") return LossKind::kNegCrossEntropy;
  if (s == "dlr") return LossKind::kDlr;
  if (s == "logitmse") return LossKind::kLogitMatchMse;
  throw Error(ErrorCode::kUnknownEnum, "unknown loss '" + std::string(s) + "'");
}

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::kCrossEntropy: return "ce";
    case LossKind::kNegCrossEntropy: return "negce";
    case LossKind::kDlr: return "dlr";
    case LossKind::kLogitMatchMse: return "logitmse";
  }
  return "?";
}

inline LabelRule parse_label_rule(std::string_view s) {
  if (s == "least") return LabelRule::kLeastLikely;
  if (s == "most") return LabelRule::kMostLikely;
  if (s == "random") return LabelRule::kRandom;
  if (s == "gt") return LabelRule::kGroundTruth;
  if (s == "fixed") return LabelRule::kFixed;
  throw Error(ErrorCode::kUnknownEnum, "unknown label rule '" + std::string(s) + "'");
}

inline std::string to_string(LabelRule r) {
  switch (r) {
    case LabelRule::kLeastLikely: return "least";
    case LabelRule::kMostLikely: return "most";
    case LabelRule::kRandom: return "random";
    case LabelRule::kGroundTruth: return "gt";
    case LabelRule::kFixed: return "fixed";
  }
  return "?";
}

}  // namespace arc
