#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arc/error.hpp"
#include "arc/linalg.hpp"

namespace arc {

/// Per-feature standardisation fitted on a training set.
struct Scaler {
  Vector mean;
  Vector std;

  static constexpr double kStdFloor = 1e-9;

  static Scaler fit(const std::vector<Vector>& xs) {
    require(!xs.empty(), ErrorCode::kInvalidArgument, "scaler needs data");
    const std::size_t d = xs.front().size();
    Scaler s{Vector(d), Vector(d)};
    for (const auto& x : xs) s.mean += x;
    s.mean *= 1.0 / static_cast<double>(xs.size());
    for (const auto& x : xs)
      for (std::size_t j = 0; j < d; ++j) s.std[j] += (x[j] - s.mean[j]) * (x[j] - s.mean[j]);
    for (std::size_t j = 0; j < d; ++j)
      s.std[j] = std::max(kStdFloor, std::sqrt(s.std[j] / static_cast<double>(xs.size())));
    return s;
  }

  Vector apply(const Vector& x) const {
    require(x.size() == mean.size(), ErrorCode::kDimensionMismatch, "scaler: feature length mismatch");
    Vector z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / std[j];
    return z;
  }
};

inline double rbf_kernel(const Vector& u, const Vector& v, double gamma) {
  double d2 = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) d2 += (u[j] - v[j]) * (u[j] - v[j]);
  return std::exp(-gamma * d2);
}

/// gamma = 1 / (2 median^2) over pairwise distances (i < j).
inline double median_heuristic_gamma(const std::vector<Vector>& xs) {
  std::vector<double> d;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) d.push_back(norm2((xs[i] - xs[j]).span()));
  if (d.empty()) return 1.0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid - 1), d.end());
    med = 0.5 * (med + d[mid - 1]);
  }
  return med > 0.0 ? 1.0 / (2.0 * med * med) : 1.0;
}

struct SvmConfig {
  double C = 10.0;
  double gamma = 0.0;  // <= 0 selects the median heuristic
  double weight_benign = 1.0;
  double tol = 1e-3;
  std::size_t max_passes = 200;
};

struct SvmModel {
  std::vector<Vector> support_vectors;  // in scaled feature space
  std::vector<double> dual_coefs;       // alpha_i * y_i
  double bias = 0.0;
  double gamma = 1.0;
  double C = 10.0;
  double class_weight_benign = 1.0;
  Scaler scaler;
  int k = 0;

  // Solver diagnostics
  bool converged = false;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  double dual_objective = 0.0;

  /// Signed distance-like score on a raw (unscaled) feature vector.
  double decision(const Vector& raw) const {
    const Vector z = scaler.apply(raw);
    double s = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
      s += dual_coefs[i] * rbf_kernel(support_vectors[i], z, gamma);
    return s;
  }

  int predict(const Vector& raw) const { return decision(raw) > 0.0 ? 1 : 0; }
};

struct SmoSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  bool converged = false;
};

/// Solves  min 1/2 a^T Q a - e^T a,  0 <= a_i <= C_i,  y^T a = 0  with
/// Q_ij = y_i y_j K_ij, using maximal-violating-pair selection with
/// second-order gain. Stops when the violating-pair gap drops below tol.
inline SmoSolution smo_solve(const Matrix& kernel, const std::vector<int>& y, const std::vector<double>& upper,
                             double tol, std::size_t max_iter) {
  const std::size_t n = y.size();
  constexpr double kTau = 1e-12;
  SmoSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& a = sol.alpha;
  auto at_upper = [&](std::size_t t) { return a[t] >= upper[t]; };
  auto at_lower = [&](std::size_t t) { return a[t] <= 0.0; };

  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i_sel = -1, j_sel = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad[t] >= gmax) { gmax = grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
      }
    }
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n && i_sel >= 0; ++t) {
      const auto i = static_cast<std::size_t>(i_sel);
      const double quad_raw = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
      const double quad = quad_raw > 0.0 ? quad_raw : kTau;
      double diff = 0.0;
      if (y[t] == 1) {
        if (at_lower(t)) continue;
        diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
      } else {
        if (at_upper(t)) continue;
        diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
      }
      if (diff > 0.0) {
        const double obj = -diff * diff / quad;
        if (obj <= best_obj) { best_obj = obj; j_sel = static_cast<std::ptrdiff_t>(t); }
      }
    }
    sol.kkt_gap = (i_sel < 0) ? 0.0 : gmax + gmax2;
    if (i_sel < 0 || j_sel < 0 || gmax + gmax2 < tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;
    ++sol.iterations;

    const auto i = static_cast<std::size_t>(i_sel), j = static_cast<std::size_t>(j_sel);
    const double ci = upper[i], cj = upper[j];
    const double old_i = a[i], old_j = a[j];
    double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > ci - cj) {
        if (a[i] > ci) { a[i] = ci; a[j] = ci - diff; }
      } else {
        if (a[j] > cj) { a[j] = cj; a[i] = cj + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > ci) {
        if (a[i] > ci) { a[i] = ci; a[j] = sum - ci; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > cj) {
        if (a[j] > cj) { a[j] = cj; a[i] = sum - cj; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double di = a[i] - old_i, dj = a[j] - old_j;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * kernel(t, i) * di + y[j] * kernel(t, j) * dj);
  }

  // Offset: mean of y_i grad_i over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  return sol;
}

/// W(a) = sum a - 1/2 a^T Q a  (the maximised dual).
inline double dual_objective(const Matrix& kernel, const std::vector<int>& y, const std::vector<double>& alpha) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < y.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(i, j);
  }
  return lin - 0.5 * quad;
}

/// Soft-margin RBF SVM. Labels are +1 (adversarial) / -1 (benign); benign
/// points get box bound C * weight_benign.
inline SvmModel smo_train(const std::vector<Vector>& features, const std::vector<int>& labels,
                          const SvmConfig& cfg = {}) {
  require(!features.empty() && features.size() == labels.size(), ErrorCode::kInvalidArgument,
          "SVM training needs equally many features and labels");
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    require(l == 1 || l == -1, ErrorCode::kInvalidArgument, "SVM labels must be +1 or -1");
    (l == 1 ? has_pos : has_neg) = true;
  }
  require(has_pos && has_neg, ErrorCode::kInvalidArgument, "SVM training needs both classes present");
  require(cfg.C > 0.0 && cfg.weight_benign > 0.0, ErrorCode::kInvalidArgument, "C and class weight must be positive");

  SvmModel m;
  m.scaler = Scaler::fit(features);
  std::vector<Vector> z;
  z.reserve(features.size());
  for (const auto& f : features) z.push_back(m.scaler.apply(f));
  m.gamma = cfg.gamma > 0.0 ? cfg.gamma : median_heuristic_gamma(z);
  m.C = cfg.C;
  m.class_weight_benign = cfg.weight_benign;

  const std::size_t n = z.size();
  Matrix kernel(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) kernel(i, j) = kernel(j, i) = rbf_kernel(z[i], z[j], m.gamma);
  std::vector<double> upper(n);
  for (std::size_t i = 0; i < n; ++i) upper[i] = labels[i] == 1 ? cfg.C : cfg.C * cfg.weight_benign;

  const std::size_t max_iter = cfg.max_passes * std::max<std::size_t>(n, 100);
  SmoSolution sol = smo_solve(kernel, labels, upper, cfg.tol, max_iter);
  m.converged = sol.converged;
  m.iterations = sol.iterations;
  m.kkt_gap = sol.kkt_gap;
  m.dual_objective = dual_objective(kernel, labels, sol.alpha);
  m.bias = -sol.rho;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.alpha[i] > 0.0) {
      m.support_vectors.push_back(z[i]);
      m.dual_coefs.push_back(sol.alpha[i] * labels[i]);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

inline nlohmann::json svm_to_json(const SvmModel& m) {
  nlohmann::json j;
  j["k"] = m.k;
  j["gamma"] = m.gamma;
  j["bias"] = m.bias;
  j["C"] = m.C;
  j["weight_benign"] = m.class_weight_benign;
  j["scaler"] = {{"mean", m.scaler.mean.values()}, {"std", m.scaler.std.values()}};
  j["support_vectors"] = nlohmann::json::array();
  for (const auto& sv : m.support_vectors) j["support_vectors"].push_back(sv.values());
  j["dual_coefs"] = m.dual_coefs;
  return j;
}

inline SvmModel svm_from_json(const nlohmann::json& j) {
  SvmModel m;
  m.k = j.at("k").get<int>();
  m.gamma = j.at("gamma").get<double>();
  m.bias = j.at("bias").get<double>();
  m.C = j.value("C", 10.0);
  m.class_weight_benign = j.value("weight_benign", 1.0);
  m.scaler.mean = Vector(j.at("scaler").at("mean").get<std::vector<double>>());
  m.scaler.std = Vector(j.at("scaler").at("std").get<std::vector<double>>());
  for (const auto& sv : j.at("support_vectors")) m.support_vectors.emplace_back(sv.get<std::vector<double>>());
  m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
  require(m.dual_coefs.size() == m.support_vectors.size(), ErrorCode::kParse,
          "support vector / coefficient count mismatch");
  require(m.scaler.mean.size() == m.scaler.std.size(), ErrorCode::kParse, "scaler mean/std length mismatch");
  for (const auto& sv : m.support_vectors)
    require(sv.size() == m.scaler.mean.size(), ErrorCode::kParse, "support vector has wrong dimension");
  m.converged = true;
  return m;
}

}  // namespace arc
