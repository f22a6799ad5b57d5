#pragma once

#include <array>
#include <cmath>

#include "flexsmc/errors.hpp"

namespace flexsmc {

/// Second-order robust exact differentiator (Levant, recursive form):
///
///   z0' = v0 = z1 - k0 |z0 - y|^(2/3) sgn(z0 - y),   k0 = lambda2 L^(1/3)
///   z1' = v1 = z2 - k1 |z1 - v0|^(1/2) sgn(z1 - v0), k1 = lambda1 L^(1/2)
///   z2'      =    - k2 sgn(z2 - v1),                 k2 = lambda0 L
///
/// `lambdas` holds (lambda0, lambda1, lambda2).
template <typename Scalar>
struct DifferentiatorState {
  Scalar z0{0};  // rad
  Scalar z1{0};  // rad/s
  Scalar z2{0};  // rad/s^2
  Scalar lipschitz_l{240};
  std::array<Scalar, 3> lambdas{Scalar(1.1), Scalar(1.5), Scalar(2.0)};
  bool initialized{false};

  void validate() const {
    if (!(lipschitz_l > Scalar(0))) throw ConfigError("observer: lipschitz_l must be > 0");
    for (Scalar l : lambdas) {
      if (!(l > Scalar(0))) throw ConfigError("observer: lambdas must all be > 0");
    }
  }
};

namespace detail {

/// Solves r + a |r|^p sgn(r) = x for r (a >= 0, p in {0, 1/2, 2/3}).
/// This is the implicit-Euler resolution of a homogeneous correction term:
/// the correction x - r never overshoots x, so the discrete differentiator
/// settles without chattering.
template <typename Scalar>
Scalar implicit_homogeneous(Scalar x, Scalar a, int p_num, int p_den) {
  const Scalar ax = std::abs(x);
  if (ax == Scalar(0) || a == Scalar(0)) return x;
  Scalar r = 0;
  if (p_num == 0) {
    r = std::max(ax - a, Scalar(0));
  } else if (p_num == 1 && p_den == 2) {
    // root of y^2 + a y - |x| with y = sqrt(r)
    const Scalar y = Scalar(2) * ax / (a + std::sqrt(a * a + Scalar(4) * ax));
    r = y * y;
  } else {
    // p = 2/3: y^3 + a y^2 = |x| with y = r^(1/3). Newton from y = |x|^(1/3),
    // which sits right of the root of a convex increasing cubic, converges
    // monotonically.
    Scalar y = std::cbrt(ax);
    for (int i = 0; i < 100; ++i) {
      const Scalar g = y * y * y + a * y * y - ax;
      const Scalar dg = Scalar(3) * y * y + Scalar(2) * a * y;
      if (!(dg > Scalar(0))) break;
      const Scalar next = y - g / dg;
      if (!(next < y)) break;
      y = next;
    }
    r = y * y * y;
  }
  return std::copysign(r, x);
}

}  // namespace detail

/// Advances the differentiator by one sample `y_meas` taken dt after the
/// previous one. The first call initializes z0 = y, z1 = z2 = 0.
///
/// Each level predicts with a Taylor step and resolves its homogeneous
/// correction implicitly, so the recursion is exact on polynomials of
/// degree <= 2 once converged and cannot blow up for bounded input.
template <typename Scalar>
DifferentiatorState<Scalar> differentiator_step(DifferentiatorState<Scalar> st, Scalar y_meas, Scalar dt) {
  if (!(dt > Scalar(0))) throw ConfigError("observer: dt must be > 0");
  if (!st.initialized) {
    st.z0 = y_meas;
    st.z1 = Scalar(0);
    st.z2 = Scalar(0);
    st.initialized = true;
    return st;
  }
  const Scalar L = st.lipschitz_l;
  const Scalar k0 = st.lambdas[2] * std::cbrt(L);
  const Scalar k1 = st.lambdas[1] * std::sqrt(L);
  const Scalar k2 = st.lambdas[0] * L;

  const Scalar predicted = st.z0 + dt * st.z1 + dt * dt / Scalar(2) * st.z2;
  const Scalar e0 = predicted - y_meas;
  const Scalar c0 = e0 - detail::implicit_homogeneous(e0, dt * k0, 2, 3);

  // z1 - v0 = c0 / dt
  const Scalar e1 = c0 / dt;
  const Scalar c1 = e1 - detail::implicit_homogeneous(e1, dt * k1, 1, 2);

  // z2 - v1 = c1 / dt
  const Scalar e2 = c1 / dt;
  const Scalar c2 = e2 - detail::implicit_homogeneous(e2, dt * k2, 0, 1);

  st.z0 = predicted - c0;
  st.z1 = st.z1 + dt * st.z2 - c1;
  st.z2 = st.z2 - c2;
  return st;
}

/// Tip-state reconstruction from the absolute tip accelerometer.
template <typename Scalar>
struct TipEstimatorState {
  Scalar phi_hat{0};       // rad
  Scalar phi_dot_hat{0};   // rad/s
  Scalar phi_ddot_hat{0};  // rad/s^2
  Scalar leak_rate{1.4};   // 1/s

  void validate() const {
    if (!(leak_rate >= Scalar(0))) throw ConfigError("observer: leak_rate must be >= 0");
  }
};

/// phi'' = tip'' - theta''; phi' and phi follow by leaky Euler integration,
/// x <- x (1 - leak dt) + input dt, each using the previous-step input.
template <typename Scalar>
TipEstimatorState<Scalar> tip_estimate_step(TipEstimatorState<Scalar> st, Scalar tip_acc_meas, Scalar theta_ddot_hat,
                                            Scalar dt) {
  if (!(dt > Scalar(0))) throw ConfigError("observer: dt must be > 0");
  const Scalar keep = Scalar(1) - st.leak_rate * dt;
  const Scalar phi_ddot = tip_acc_meas - theta_ddot_hat;
  st.phi_hat = st.phi_hat * keep + st.phi_dot_hat * dt;
  st.phi_dot_hat = st.phi_dot_hat * keep + phi_ddot * dt;
  st.phi_ddot_hat = phi_ddot;
  return st;
}

}  // namespace flexsmc
