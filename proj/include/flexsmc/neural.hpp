#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "flexsmc/errors.hpp"

namespace flexsmc {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Single-input Gaussian network d_hat = w^T psi(s) with a shared width.
template <typename Scalar>
struct NetworkState {
  VectorX<Scalar> weights;
  VectorX<Scalar> centers;
  Scalar width{2.0};
  Scalar nu{150.0};

  Eigen::Index size() const { return weights.size(); }

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("network: " + what); };
    if (weights.size() < 1) fail("need at least one neuron");
    if (centers.size() != weights.size()) fail("centers and weights differ in length");
    if (!(width > Scalar(0))) fail("width must be > 0");
    if (!(nu > Scalar(0))) fail("nu must be > 0");
    if (!weights.allFinite() || !centers.allFinite()) fail("weights and centers must be finite");
    for (Eigen::Index i = 1; i < centers.size(); ++i) {
      if (!(centers(i) > centers(i - 1))) fail("centers must be strictly increasing");
    }
  }
};

/// n centers evenly spaced on [-c_max, c_max], zero weights. A single
/// neuron sits at the origin.
template <typename Scalar>
NetworkState<Scalar> make_network(Eigen::Index n, Scalar c_max, Scalar width, Scalar nu) {
  if (n < 1) throw ConfigError("network: need at least one neuron");
  NetworkState<Scalar> net;
  net.weights = VectorX<Scalar>::Zero(n);
  if (n == 1) {
    net.centers = VectorX<Scalar>::Zero(1);
  } else {
    net.centers = VectorX<Scalar>::LinSpaced(n, -c_max, c_max);
  }
  net.width = width;
  net.nu = nu;
  net.validate();
  return net;
}

template <typename Scalar>
VectorX<Scalar> activations(Scalar s, const NetworkState<Scalar>& net) {
  const Scalar inv = Scalar(1) / (Scalar(2) * net.width * net.width);
  return (-(net.centers.array() - s).square() * inv).exp().matrix();
}

template <typename Scalar>
Scalar forward(const NetworkState<Scalar>& net, const VectorX<Scalar>& psi) {
  if (psi.size() != net.weights.size()) {
    throw std::invalid_argument("network: activation length " + std::to_string(psi.size()) +
                                " does not match weight length " + std::to_string(net.weights.size()));
  }
  return net.weights.dot(psi);
}

/// Explicit Euler step of w' = nu s psi.
template <typename Scalar>
NetworkState<Scalar> update(NetworkState<Scalar> net, Scalar s, const VectorX<Scalar>& psi, Scalar dt) {
  if (psi.size() != net.weights.size()) {
    throw std::invalid_argument("network: activation length does not match weight length");
  }
  net.weights += (net.nu * s * dt) * psi;
  return net;
}

}  // namespace flexsmc
