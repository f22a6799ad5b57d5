#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "flexsmc/errors.hpp"

namespace flexsmc {

enum class ControllerKind {
  kIntelligent,  // neural compensator
  kAdaptive,     // scalar integral compensator
  kExact,        // analysis mode: ideal compensator from truth-plant internals
};

std::string_view to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(std::string_view name);

template <typename Scalar>
struct ControllerGains {
  Scalar alpha_a{1.0};
  Scalar alpha_u{0.9};
  Scalar lambda_a{4.0};  // 1/s
  Scalar lambda_u{1.1};  // 1/s
  Scalar kappa{86.0};
  Scalar phi_bl{1.0};
  Scalar m_s_hat{12.5};
  Scalar f_s_hat{0.0};

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("controller: " + what); };
    if (!(alpha_a > Scalar(0))) fail("alpha_a must be > 0");
    if (!(lambda_a > Scalar(0))) fail("lambda_a must be > 0");
    if (!(lambda_u > Scalar(0))) fail("lambda_u must be > 0");
    if (!(kappa > Scalar(0))) fail("kappa must be > 0");
    if (!(phi_bl > Scalar(0))) fail("phi_bl must be > 0");
    if (!(m_s_hat != Scalar(0)) || !std::isfinite(m_s_hat)) fail("m_s_hat must be finite and nonzero");
    if (!std::isfinite(alpha_u) || !std::isfinite(f_s_hat)) fail("alpha_u and f_s_hat must be finite");
  }
};

/// q - q_d for the hub (theta) and tip (phi) coordinates, up to second derivatives.
template <typename Scalar>
struct TrackingErrors {
  Scalar e_theta{0};
  Scalar e_theta_dot{0};
  Scalar e_theta_ddot{0};
  Scalar e_phi{0};
  Scalar e_phi_dot{0};
  Scalar e_phi_ddot{0};
};

/// Desired hub motion; the tip reference is identically zero.
template <typename Scalar>
struct ReferenceState {
  Scalar theta_d{0};
  Scalar theta_d_dot{0};
  Scalar theta_d_ddot{0};
  Scalar theta_d_dddot{0};
  Scalar phi_d_dddot{0};
};

template <typename Scalar>
Scalar sliding_variable(const TrackingErrors<Scalar>& e, const ControllerGains<Scalar>& g) {
  return g.alpha_a * e.e_theta_ddot + Scalar(2) * g.lambda_a * e.e_theta_dot + g.lambda_a * g.lambda_a * e.e_theta +
         g.alpha_u * e.e_phi_ddot + Scalar(2) * g.lambda_u * e.e_phi_dot + g.lambda_u * g.lambda_u * e.e_phi;
}

/// Time derivative of the reference part s_r of the sliding variable.
template <typename Scalar>
Scalar s_r_dot(const TrackingErrors<Scalar>& e, const ReferenceState<Scalar>& ref, const ControllerGains<Scalar>& g) {
  return -g.alpha_a * ref.theta_d_dddot + Scalar(2) * g.lambda_a * e.e_theta_ddot +
         g.lambda_a * g.lambda_a * e.e_theta_dot - g.alpha_u * ref.phi_d_dddot +
         Scalar(2) * g.lambda_u * e.e_phi_ddot + g.lambda_u * g.lambda_u * e.e_phi_dot;
}

template <typename Scalar>
constexpr Scalar saturation(Scalar x) {
  return std::clamp(x, Scalar(-1), Scalar(1));
}

/// u = -(f_s_hat + d_hat + s_r_dot + kappa sat(s / phi_bl)) / m_s_hat
template <typename Scalar>
Scalar control_law(Scalar s, Scalar sr_dot, Scalar d_hat, const ControllerGains<Scalar>& g) {
  return -(g.f_s_hat + d_hat + sr_dot + g.kappa * saturation(s / g.phi_bl)) / g.m_s_hat;
}

/// Baseline compensator: d_hat <- d_hat + nu s dt.
template <typename Scalar>
constexpr Scalar adaptive_update(Scalar d_hat, Scalar s, Scalar nu, Scalar dt) {
  return d_hat + nu * s * dt;
}

/// Analysis-mode compensator. Given the true drift f_s + d and control gain
/// m_s, returns the d_hat that makes the closed loop obey
/// s' = -kappa sat(s / phi_bl) despite the m_s_hat / f_s_hat mismatch.
/// Reduces to f_s + d - f_s_hat when m_s_hat == m_s.
template <typename Scalar>
Scalar ideal_compensation(Scalar true_drift, Scalar true_m_s, Scalar s, Scalar sr_dot,
                          const ControllerGains<Scalar>& g) {
  const Scalar switching = g.kappa * saturation(s / g.phi_bl);
  return g.m_s_hat / true_m_s * (true_drift + sr_dot + switching) - g.f_s_hat - sr_dot - switching;
}

struct ReachingReport {
  double fraction{1.0};
  std::size_t outside_count{0};
  std::size_t satisfied_count{0};
};

/// Fraction of outside-boundary-layer sample intervals that satisfy
/// s s' <= -eta |s|, with s' from forward differences of a uniformly sampled
/// series and s taken at the interval midpoint. Vacuously 1 when no interval
/// lies outside the layer. Throws std::invalid_argument on an empty series.
ReachingReport reaching_diagnostic(std::span<const double> s, double dt, double phi_bl, double eta);

}  // namespace flexsmc
