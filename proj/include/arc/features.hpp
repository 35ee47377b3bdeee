#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "arc/attacks.hpp"
#include "arc/csv.hpp"
#include "arc/error.hpp"
#include "arc/linalg.hpp"
#include "arc/lm.hpp"
#include "arc/loss.hpp"
#include "arc/network.hpp"
#include "arc/rng.hpp"

namespace arc {

// How the exploitation perturbations delta_t are produced. kBim is the
// method; the noise modes are ablations where sign(grad) is replaced by a
// random direction of the same step scale.
enum class ExploitMode { kBim, kGaussianNoise, kUniformNoise };

inline ExploitMode parse_exploit_mode(std::string_view s) {
  if (s == "bim") return ExploitMode::kBim;
  if (s == "gauss") return ExploitMode::kGaussianNoise;
  if (s == "uniform") return ExploitMode::kUniformNoise;
  throw Error(ErrorCode::kUnknownEnum, "unknown exploitation mode '" + std::string(s) + "'");
}

struct ExploitConfig {
  std::size_t steps = 6;  // T; T+1 exploitation vectors
  double alpha = 2.0 / 255.0;
  double eps = 8.0 / 255.0;
  Norm norm = Norm::kLinf;
  LossSpec loss{LossKind::kCrossEntropy, LabelRule::kLeastLikely};
  ExploitMode mode = ExploitMode::kBim;
  std::uint64_t seed = 0;  // random label rule and noise modes only
};

/// [x + delta_0, ..., x + delta_T] with delta_0 = 0. The loss label is chosen
/// once at x and held for every step.
inline std::vector<Vector> exploitation_vectors(const Network& net, const Vector& x, const ExploitConfig& cfg) {
  check_input(net, x.span());
  require(cfg.steps >= 1, ErrorCode::kInvalidArgument, "exploitation needs T >= 1");
  require(cfg.eps >= 0.0 && cfg.alpha >= 0.0, ErrorCode::kInvalidArgument, "alpha and eps must be non-negative");
  Rng rng = derive_rng(cfg.seed, 3);
  const std::size_t label = resolve_label(net, x, 0, cfg.loss, rng);

  std::vector<Vector> out;
  out.reserve(cfg.steps + 1);
  Vector delta(x.size());
  out.push_back(x);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    Vector dir(x.size());
    if (cfg.mode == ExploitMode::kBim) {
      dir = grad_input(net, x + delta, cfg.loss, label);
    } else if (cfg.mode == ExploitMode::kGaussianNoise) {
      for (double& v : dir) v = gauss(rng);
      const double n = norm_inf(dir.span());
      if (n > 0.0) dir *= 1.0 / n;
    } else {
      for (double& v : dir) v = unif(rng);
    }
    const double scale = cfg.norm == Norm::kLinf ? norm_inf(dir.span()) : norm2(dir.span());
    if (scale > 0.0) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (cfg.mode != ExploitMode::kBim && cfg.norm == Norm::kLinf)
          delta[i] += cfg.alpha * dir[i];
        else
          delta[i] += cfg.norm == Norm::kLinf ? cfg.alpha * sign(dir[i]) : cfg.alpha * dir[i] / scale;
      }
      project(delta, x, cfg.norm, cfg.eps);
    }
    out.push_back(clip(x + delta, 0.0, 1.0));
  }
  return out;
}

inline constexpr double kCosineZeroNorm = 1e-12;

/// u.v / (|u||v|); 0 when either norm is below 1e-12.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), ErrorCode::kDimensionMismatch, "cosine: length mismatch");
  const double nu = norm2(u), nv = norm2(v);
  if (nu < kCosineZeroNorm || nv < kCosineZeroNorm) return 0.0;
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

struct ArcMatrix {
  Matrix values;  // (T+1) x (T+1)
  std::size_t selected_n = 0;
  std::size_t zero_gradients = 0;  // degenerate rows in the selected class
};

/// Consistency matrix of class n across the given Jacobians.
inline Matrix consistency_matrix(const std::vector<Matrix>& jacobians, std::size_t n) {
  const std::size_t k = jacobians.size();
  Matrix s(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double c = cosine(jacobians[i].row(n), jacobians[j].row(n));
      s(i, j) = c;
      s(j, i) = c;
    }
  }
  return s;
}

/// Selects, over classes, the consistency matrix with the largest entry sum
/// (ties go to the lowest class index).
inline ArcMatrix arc_matrix_from_jacobians(const std::vector<Matrix>& jacobians) {
  require(!jacobians.empty(), ErrorCode::kInvalidArgument, "no jacobians");
  const std::size_t classes = jacobians.front().rows();
  ArcMatrix best;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < classes; ++n) {
    Matrix s = consistency_matrix(jacobians, n);
    double sum = 0.0;
    for (double v : s.values()) sum += v;
    if (sum > best_sum) {
      best_sum = sum;
      best.values = std::move(s);
      best.selected_n = n;
    }
  }
  for (const auto& j : jacobians)
    if (norm2(j.row(best.selected_n)) < kCosineZeroNorm) ++best.zero_gradients;
  return best;
}

inline ArcMatrix arc_matrix(const Network& net, const Vector& x, const ExploitConfig& cfg) {
  std::vector<Matrix> jacs;
  for (const Vector& v : exploitation_vectors(net, x, cfg)) jacs.push_back(jacobian(net, v));
  return arc_matrix_from_jacobians(jacs);
}

/// Mean of the off-diagonal entries.
inline double arc_mean(const Matrix& m) {
  const std::size_t k = m.rows();
  require(k >= 2 && m.cols() == k, ErrorCode::kInvalidArgument, "arc_mean needs a square matrix of size >= 2");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) s += m(i, j);
  return s / static_cast<double>(k * (k - 1));
}

inline double arc_mean(const ArcMatrix& m) { return arc_mean(m.values); }

// ---------------------------------------------------------------------------
// Laplacian fit  A exp(-|i-j| / sigma)

inline constexpr double kSigmaMin = 1e-3;
inline constexpr double kSigmaMax = 1e3;
inline constexpr double kAmplitudeMin = -10.0;
inline constexpr double kAmplitudeMax = 10.0;

inline double laplacian(double distance, double amplitude, double sigma) {
  return amplitude * std::exp(-distance / sigma);
}

struct ArcVector {
  double A = 0.0;
  double sigma = 1.0;
  double arc_mean = 0.0;
  double sse = 0.0;
  bool converged = false;
};

/// Residual m[i,j] - L(|i-j|) over every entry (diagonal included), with
/// analytic Jacobian dL/dA = e^{-d/s}, dL/ds = A d s^-2 e^{-d/s}.
inline LmProblem laplacian_problem(const Matrix& m) {
  const std::size_t k = m.rows();
  std::vector<double> dist, target;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      dist.push_back(std::abs(static_cast<double>(i) - static_cast<double>(j)));
      target.push_back(m(i, j));
    }
  double mean = 0.0;
  for (double v : target) mean += v;
  mean /= static_cast<double>(target.size());

  LmProblem p;
  p.residual = [dist, target](const Vector& th) {
    Vector r(dist.size());
    for (std::size_t q = 0; q < dist.size(); ++q) r[q] = target[q] - laplacian(dist[q], th[0], th[1]);
    return r;
  };
  p.jacobian = [dist](const Vector& th) {
    Matrix jac(dist.size(), 2);
    for (std::size_t q = 0; q < dist.size(); ++q) {
      const double e = std::exp(-dist[q] / th[1]);
      jac(q, 0) = -e;
      jac(q, 1) = -th[0] * dist[q] / (th[1] * th[1]) * e;
    }
    return jac;
  };
  p.theta0 = Vector{std::clamp(mean, kAmplitudeMin, kAmplitudeMax), 1.0};
  p.lower = Vector{kAmplitudeMin, kSigmaMin};
  p.upper = Vector{kAmplitudeMax, kSigmaMax};
  return p;
}

inline ArcVector arc_vector(const Matrix& m, const LmConfig& cfg = {}) {
  require(m.rows() >= 2 && m.rows() == m.cols(), ErrorCode::kInvalidArgument, "ARC matrix must be square, size >= 2");
  require(all_finite(m.values()), ErrorCode::kNumerical, "ARC matrix has non-finite entries");
  LmResult fit = lm_fit(laplacian_problem(m), cfg);
  ArcVector v;
  v.A = fit.theta[0];
  v.sigma = fit.theta[1];
  v.sse = fit.sse;
  v.converged = fit.converged;
  v.arc_mean = arc_mean(m);
  return v;
}

inline ArcVector arc_vector(const ArcMatrix& m, const LmConfig& cfg = {}) { return arc_vector(m.values, cfg); }

// ---------------------------------------------------------------------------
// Heatmap export

inline void write_heatmap_csv(std::ostream& os, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

/// Binary 8-bit PGM (P5), [-1,1] mapped linearly to [0,255].
inline void write_heatmap_pgm(std::ostream& os, const Matrix& m) {
  os << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = std::clamp(m(i, j), -1.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround((v + 1.0) * 127.5))));
    }
}

}  // namespace arc
