#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arc/error.hpp"
#include "arc/linalg.hpp"

namespace arc {

struct LmProblem {
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> jacobian;  // rows = residuals, cols = params
  Vector theta0;
  Vector lower;
  Vector upper;
};

struct LmConfig {
  double lambda0 = 1e-3;
  double lambda_factor = 10.0;
  std::size_t max_iter = 100;
  double step_tol = 1e-10;
  double lambda_max = 1e20;
};

struct LmResult {
  Vector theta;
  double sse = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> accepted_sse;  // SSE after each accepted step, starting with the initial SSE
  std::string diagnostic;
};

inline constexpr int kProjectedBacktracks = 40;

namespace detail {

/// In-place Cholesky solve of a small SPD system. Returns nullopt when the
/// matrix is not numerically positive definite.
inline std::optional<Vector> cholesky_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    a(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / a(j, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  return b;
}

inline double sum_squares(const Vector& r) { return dot(r.span(), r.span()); }

inline Vector clamp_to(Vector theta, const Vector& lo, const Vector& hi) {
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = std::clamp(theta[i], lo[i], hi[i]);
  return theta;
}

}  // namespace detail

/// Levenberg-Marquardt with Marquardt diagonal scaling:
///   (J^T J + lambda diag(J^T J)) delta = -J^T r.
/// A step is accepted only if the SSE at the bound-clamped candidate drops.
/// Coordinates of a step that leave the box are also tried at halved lengths.
inline LmResult lm_fit(const LmProblem& p, const LmConfig& cfg = {}) {
  const std::size_t n = p.theta0.size();
  require(p.lower.size() == n && p.upper.size() == n, ErrorCode::kDimensionMismatch, "bounds length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    require(p.lower[i] <= p.theta0[i] && p.theta0[i] <= p.upper[i], ErrorCode::kPrecondition,
            "initial parameters outside bounds");

  LmResult res;
  res.theta = p.theta0;
  Vector r = p.residual(res.theta);
  res.sse = detail::sum_squares(r);
  res.accepted_sse.push_back(res.sse);
  if (res.sse == 0.0) {
    res.converged = true;
    return res;
  }

  double lambda = cfg.lambda0;
  bool need_jacobian = true;
  Matrix jtj(n, n);
  Vector jtr(n);
  while (res.iterations < cfg.max_iter) {
    if (need_jacobian) {
      Matrix jac = p.jacobian(res.theta);
      require(jac.rows() == r.size() && jac.cols() == n, ErrorCode::kDimensionMismatch,
              "jacobian shape does not match residuals/parameters");
      jtj = Matrix(n, n);
      jtr = Vector(n);
      for (std::size_t k = 0; k < jac.rows(); ++k) {
        auto row = jac.row(k);
        for (std::size_t i = 0; i < n; ++i) {
          jtr[i] += row[i] * r[k];
          for (std::size_t j = 0; j < n; ++j) jtj(i, j) += row[i] * row[j];
        }
      }
      need_jacobian = false;
    }
    ++res.iterations;

    Matrix lhs = jtj;
    for (std::size_t i = 0; i < n; ++i) lhs(i, i) += lambda * jtj(i, i);
    Vector rhs = -1.0 * jtr;
    auto step = detail::cholesky_solve(lhs, rhs);
    if (!step) {
      for (std::size_t i = 0; i < n; ++i) lhs(i, i) += 1e-12;
      step = detail::cholesky_solve(lhs, rhs);
    }
    if (!step) {
      lambda *= cfg.lambda_factor;
      if (lambda > cfg.lambda_max) {
        res.diagnostic = "normal equations singular up to lambda_max";
        return res;
      }
      continue;
    }
    if (norm2(step->span()) < cfg.step_tol) {
      res.converged = true;
      return res;
    }
    Vector cand = detail::clamp_to(res.theta + *step, p.lower, p.upper);
    Vector rc = p.residual(cand);
    double sse = detail::sum_squares(rc);
    if (cand != res.theta + *step) {
      // The step left the box. Clamping alone can park a parameter where its
      // Jacobian column underflows to zero (sigma at its lower bound), so the
      // offending coordinates are backtracked and the best point is kept.
      Vector trial = *step;
      for (int i = 0; i < kProjectedBacktracks; ++i) {
        for (std::size_t c = 0; c < n; ++c) {
          const double v = res.theta[c] + (*step)[c];
          if (v < p.lower[c] || v > p.upper[c]) trial[c] *= 0.5;
        }
        Vector c2 = detail::clamp_to(res.theta + trial, p.lower, p.upper);
        Vector r2 = p.residual(c2);
        const double s2 = detail::sum_squares(r2);
        if (std::isfinite(s2) && s2 < sse) {
          cand = std::move(c2);
          rc = std::move(r2);
          sse = s2;
        }
      }
    }
    if (std::isfinite(sse) && sse < res.sse) {
      res.theta = std::move(cand);
      r = std::move(rc);
      res.sse = sse;
      res.accepted_sse.push_back(sse);
      lambda = std::max(lambda / cfg.lambda_factor, 1e-300);
      need_jacobian = true;
      if (sse == 0.0) {
        res.converged = true;
        return res;
      }
    } else {
      lambda *= cfg.lambda_factor;
      if (lambda > cfg.lambda_max) {
        // No descent direction left within the bounds.
        res.converged = true;
        res.diagnostic = "lambda exceeded lambda_max without SSE decrease";
        return res;
      }
    }
  }
  res.diagnostic = "max_iter reached";
  return res;
}

}  // namespace arc
