#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arc/error.hpp"
#include "arc/linalg.hpp"
#include "arc/loss.hpp"

namespace arc {

/// Feedforward classifier: ReLU on hidden layers, identity on the output.
/// Immutable after construction; every query is a pure function of (net, x).
class Network {
 public:
  Network() = default;

  Network(std::vector<std::size_t> dims, std::vector<Matrix> weights, std::vector<Vector> biases)
      : dims_(std::move(dims)), weights_(std::move(weights)), biases_(std::move(biases)) {
    validate();
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Network initialize(std::vector<std::size_t> dims, std::uint64_t seed) {
    require(dims.size() >= 2, ErrorCode::kInvalidArgument, "network needs at least input and output dims");
    std::mt19937_64 rng(seed);
    std::vector<Matrix> ws;
    std::vector<Vector> bs;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
      std::uniform_real_distribution<double> u(-bound, bound);
      Matrix w(dims[l + 1], dims[l]);
      for (double& v : w.values()) v = u(rng);
      Vector b(dims[l + 1]);
      for (double& v : b) v = u(rng);
      ws.push_back(std::move(w));
      bs.push_back(std::move(b));
    }
    return Network(std::move(dims), std::move(ws), std::move(bs));
  }

  std::size_t input_dim() const { return dims_.front(); }
  std::size_t num_classes() const { return dims_.back(); }
  std::size_t num_layers() const { return weights_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }

  // Mutable access is for the trainer only.
  std::vector<Matrix>& mutable_weights() { return weights_; }
  std::vector<Vector>& mutable_biases() { return biases_; }

  bool operator==(const Network&) const = default;

 private:
  void validate() const {
    require(dims_.size() >= 2, ErrorCode::kInvalidArgument, "network needs at least two layer dims");
    require(weights_.size() + 1 == dims_.size() && biases_.size() + 1 == dims_.size(),
            ErrorCode::kDimensionMismatch, "layer count does not match dims");
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      require(weights_[l].rows() == dims_[l + 1] && weights_[l].cols() == dims_[l],
              ErrorCode::kDimensionMismatch, "weight " + std::to_string(l) + " has wrong shape");
      require(biases_[l].size() == dims_[l + 1], ErrorCode::kDimensionMismatch,
              "bias " + std::to_string(l) + " has wrong length");
    }
  }

  std::vector<std::size_t> dims_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

/// Per-layer activations kept for reverse accumulation.
/// activations[0] is the input; activations[l+1] = relu(pre[l]) except the
/// last, which equals pre.back() (the logits).
struct ForwardTrace {
  std::vector<Vector> pre;
  std::vector<Vector> activations;

  const Vector& logits() const { return activations.back(); }
};

inline void check_input(const Network& net, std::span<const double> x) {
  require(x.size() == net.input_dim(), ErrorCode::kDimensionMismatch,
          "input has length " + std::to_string(x.size()) + ", network expects " +
              std::to_string(net.input_dim()));
}

inline ForwardTrace forward_trace(const Network& net, const Vector& x) {
  check_input(net, x.span());
  ForwardTrace t;
  t.activations.reserve(net.num_layers() + 1);
  t.pre.reserve(net.num_layers());
  t.activations.push_back(x);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Vector z = matvec(net.weights()[l], t.activations.back().span());
    z += net.biases()[l];
    Vector a = z;
    if (l + 1 < net.num_layers())
      for (double& v : a) v = v > 0.0 ? v : 0.0;
    t.pre.push_back(std::move(z));
    t.activations.push_back(std::move(a));
  }
  return t;
}

inline Vector forward(const Network& net, const Vector& x) { return forward_trace(net, x).logits(); }

/// Pulls d(scalar)/d(logits) back to d(scalar)/d(input). ReLU'(0) = 0.
/// When param grads are requested they are accumulated (+=) into the
/// caller's buffers, which must already have the network's shapes.
inline Vector backward(const Network& net, const ForwardTrace& trace, Vector upstream,
                       std::vector<Matrix>* weight_grads = nullptr,
                       std::vector<Vector>* bias_grads = nullptr) {
  require(upstream.size() == net.num_classes(), ErrorCode::kDimensionMismatch,
          "upstream gradient must have one entry per class");
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    if (weight_grads) {
      Matrix& gw = (*weight_grads)[l];
      const Vector& a = trace.activations[l];
      for (std::size_t r = 0; r < gw.rows(); ++r) {
        const double g = upstream[r];
        if (g == 0.0) continue;
        auto row = gw.row(r);
        for (std::size_t c = 0; c < gw.cols(); ++c) row[c] += g * a[c];
      }
    }
    if (bias_grads) (*bias_grads)[l] += upstream;
    Vector down = matvec_transposed(net.weights()[l], upstream.span());
    if (l > 0) {
      const Vector& z = trace.pre[l - 1];
      for (std::size_t i = 0; i < down.size(); ++i)
        if (!(z[i] > 0.0)) down[i] = 0.0;
    }
    upstream = std::move(down);
  }
  return upstream;
}

/// Exact input gradient of a scalar loss of the logits.
inline Vector grad_input(const Network& net, const Vector& x, const LossSpec& loss, std::size_t label) {
  ForwardTrace t = forward_trace(net, x);
  LossValue lv = loss_with_grad(loss, t.logits(), label);
  return backward(net, t, std::move(lv.grad));
}

/// N x M input Jacobian: N reverse passes over one shared trace.
inline Matrix jacobian(const Network& net, const Vector& x) {
  ForwardTrace t = forward_trace(net, x);
  const std::size_t n = net.num_classes();
  Matrix jac(n, net.input_dim());
  for (std::size_t k = 0; k < n; ++k) {
    Vector seed(n);
    seed[k] = 1.0;
    Vector row = backward(net, t, std::move(seed));
    std::copy(row.begin(), row.end(), jac.row(k).begin());
  }
  return jac;
}

inline std::size_t predicted_class(const Network& net, const Vector& x) {
  return argmax(forward(net, x).span());
}

inline std::size_t least_likely_class(const Network& net, const Vector& x) {
  return argmin(forward(net, x).span());
}

// ---------------------------------------------------------------------------
// JSON: {"version":1, "dims":[...], "weights":[[row-major]...], "biases":[[...]...]}

inline constexpr int kNetworkFormatVersion = 1;

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["version"] = kNetworkFormatVersion;
  j["dims"] = net.dims();
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (const auto& w : net.weights()) j["weights"].push_back(w.values());
  for (const auto& b : net.biases()) j["biases"].push_back(b.values());
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  try {
    require(j.at("version").get<int>() == kNetworkFormatVersion, ErrorCode::kParse,
            "unsupported network format version");
    auto dims = j.at("dims").get<std::vector<std::size_t>>();
    require(dims.size() >= 2, ErrorCode::kParse, "network dims too short");
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    require(jw.size() + 1 == dims.size() && jb.size() + 1 == dims.size(), ErrorCode::kParse,
            "network layer count does not match dims");
    std::vector<Matrix> ws;
    std::vector<Vector> bs;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      auto wv = jw[l].get<std::vector<double>>();
      require(wv.size() == dims[l] * dims[l + 1], ErrorCode::kParse, "weight array has wrong length");
      require(all_finite(wv), ErrorCode::kParse, "non-finite weight");
      ws.emplace_back(dims[l + 1], dims[l], std::move(wv));
      auto bv = jb[l].get<std::vector<double>>();
      require(all_finite(bv), ErrorCode::kParse, "non-finite bias");
      bs.emplace_back(std::move(bv));
    }
    return Network(std::move(dims), std::move(ws), std::move(bs));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed network JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDimensionMismatch) throw Error(ErrorCode::kParse, e.what());
    throw;
  }
}

}  // namespace arc
