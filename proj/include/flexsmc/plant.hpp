#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "flexsmc/errors.hpp"

namespace flexsmc {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, 5, 1>;

/// Lumped two-degree-of-freedom link (hub angle + one tip element) driven
/// through a first-order actuator.
///
///   [m_aa m_au; m_au m_uu] q'' + diag(0, k_phi) q = [tau; 0] + p
///   tau' = -gamma (tau - u)
///
/// with p = (d_a, d_u - c_phi phi').
template <typename Scalar>
struct PlantParams {
  Scalar m_aa{1.2};     // kg m^2
  Scalar m_au{0.24};    // kg m^2
  Scalar m_uu{0.36};    // kg m^2
  Scalar k_phi{72.0};   // N m / rad
  Scalar c_phi{0.30};   // N m s / rad
  Scalar gamma{25.0};   // 1/s

  Matrix2<Scalar> inertia() const {
    Matrix2<Scalar> m;
    m << m_aa, m_au, m_au, m_uu;
    return m;
  }

  Scalar determinant() const { return m_aa * m_uu - m_au * m_au; }

  /// Throws ConfigError unless the inertia matrix is positive definite and
  /// stiffness, damping and actuator rate are admissible.
  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("plant: " + what); };
    if (!(m_aa > Scalar(0))) fail("m_aa must be > 0");
    if (!(m_uu > Scalar(0))) fail("m_uu must be > 0");
    if (!(determinant() > Scalar(0))) fail("inertia matrix is singular or indefinite (m_aa*m_uu - m_au^2 <= 0)");
    if (!(k_phi >= Scalar(0))) fail("k_phi must be >= 0");
    if (!(c_phi >= Scalar(0))) fail("c_phi must be >= 0");
    if (!(gamma > Scalar(0))) fail("gamma must be > 0");
  }
};

template <typename Scalar>
struct PlantState {
  Scalar theta{0};      // rad
  Scalar phi{0};        // rad
  Scalar theta_dot{0};  // rad/s
  Scalar phi_dot{0};    // rad/s
  Scalar tau{0};        // N m

  StateVector<Scalar> vector() const {
    StateVector<Scalar> x;
    x << theta, phi, theta_dot, phi_dot, tau;
    return x;
  }

  static PlantState from_vector(const StateVector<Scalar>& x) {
    return {x(0), x(1), x(2), x(3), x(4)};
  }

  bool finite() const { return vector().allFinite(); }

  friend bool operator==(const PlantState&, const PlantState&) = default;
};

template <typename Scalar>
struct SensorModel {
  Scalar encoder_step{Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(8192)};  // rad
  Scalar accel_noise_std{2.0};                                                 // rad/s^2
  std::uint64_t seed{0};

  void validate() const {
    if (!(encoder_step >= Scalar(0))) throw ConfigError("sensors: encoder_step must be >= 0");
    if (!(accel_noise_std >= Scalar(0))) throw ConfigError("sensors: accel_noise_std must be >= 0");
  }
};

template <typename Scalar>
struct SensorReading {
  Scalar theta_meas{0};    // rad, quantized
  Scalar tip_acc_meas{0};  // rad/s^2, theta'' + phi'' plus noise
};

/// Solves M q'' = b tau + p - K q for (theta'', phi'').
/// `disturbance` is the external torque pair (d_a, d_u).
template <typename Scalar>
Vector2<Scalar> accelerations(const PlantState<Scalar>& x, const PlantParams<Scalar>& params,
                              const Vector2<Scalar>& disturbance = Vector2<Scalar>::Zero()) {
  if (!(params.determinant() > Scalar(0))) {
    throw ConfigError("plant: inertia matrix is singular or indefinite");
  }
  Vector2<Scalar> rhs;
  rhs << x.tau + disturbance(0), disturbance(1) - params.k_phi * x.phi - params.c_phi * x.phi_dot;
  return params.inertia().llt().solve(rhs);
}

template <typename Scalar>
constexpr Scalar actuator_rate(Scalar tau, Scalar u, Scalar gamma) {
  return -gamma * (tau - u);
}

/// Time derivative of the full five-dimensional state.
template <typename Scalar>
StateVector<Scalar> state_derivative(const PlantState<Scalar>& x, Scalar u, const PlantParams<Scalar>& params,
                                     const Vector2<Scalar>& disturbance) {
  const Vector2<Scalar> qdd = accelerations(x, params, disturbance);
  StateVector<Scalar> dx;
  dx << x.theta_dot, x.phi_dot, qdd(0), qdd(1), actuator_rate(x.tau, u, params.gamma);
  return dx;
}

/// One classical Runge-Kutta step with u held constant over dt.
template <typename Scalar>
PlantState<Scalar> step(const PlantState<Scalar>& x, Scalar u, const PlantParams<Scalar>& params, Scalar dt,
                        const Vector2<Scalar>& disturbance = Vector2<Scalar>::Zero()) {
  if (!(dt > Scalar(0))) throw ConfigError("plant: dt must be > 0");
  using State = PlantState<Scalar>;
  const StateVector<Scalar> x0 = x.vector();
  const Scalar half = dt / Scalar(2);
  const StateVector<Scalar> k1 = state_derivative(x, u, params, disturbance);
  const StateVector<Scalar> k2 = state_derivative(State::from_vector(x0 + half * k1), u, params, disturbance);
  const StateVector<Scalar> k3 = state_derivative(State::from_vector(x0 + half * k2), u, params, disturbance);
  const StateVector<Scalar> k4 = state_derivative(State::from_vector(x0 + dt * k3), u, params, disturbance);
  const StateVector<Scalar> x1 = x0 + (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
  if (!x1.allFinite()) {
    std::ostringstream os;
    os << "plant: non-finite state after step (u=" << u << ", dt=" << dt << "); previous state ["
       << x0.transpose() << "], result [" << x1.transpose() << "]";
    throw IntegrationError(os.str());
  }
  return State::from_vector(x1);
}

/// Mechanical energy 1/2 q'^T M q' + 1/2 k_phi phi^2 (actuator excluded).
template <typename Scalar>
Scalar mechanical_energy(const PlantState<Scalar>& x, const PlantParams<Scalar>& params) {
  Vector2<Scalar> qd(x.theta_dot, x.phi_dot);
  return Scalar(0.5) * qd.dot(params.inertia() * qd) + Scalar(0.5) * params.k_phi * x.phi * x.phi;
}

template <typename Scalar>
Scalar quantize(Scalar value, Scalar step) {
  if (step == Scalar(0)) return value;
  return std::round(value / step) * step;
}

template <typename Scalar, typename Rng>
SensorReading<Scalar> measure(const PlantState<Scalar>& x, Scalar theta_ddot, Scalar phi_ddot,
                              const SensorModel<Scalar>& model, Rng& rng) {
  SensorReading<Scalar> r;
  r.theta_meas = quantize(x.theta, model.encoder_step);
  r.tip_acc_meas = theta_ddot + phi_ddot;
  if (model.accel_noise_std > Scalar(0)) {
    std::normal_distribution<Scalar> noise(Scalar(0), model.accel_noise_std);
    r.tip_acc_meas += noise(rng);
  }
  return r;
}

/// Terms of the third-order (actuator-augmented) partitioned dynamics
///   theta''' = m_aa'^-1 (f_a' + gamma u + d_a')
///   phi'''   = m_uu'^-1 (f_u' - gamma m_au m_aa^-1 u + d_u')
/// and their projection onto the sliding variable, so that
///   alpha_a theta''' + alpha_u phi''' = f_s + d + m_s u.
/// Here f_a = -gamma tau, f_u = -k_phi phi', and d is the time derivative of
/// p (the damping contributes -c_phi phi'' to d_u; external torques are held
/// constant, so they add nothing).
template <typename Scalar>
struct SlidingTerms {
  Scalar m_aa_eff{0};
  Scalar m_uu_eff{0};
  Scalar f_a_eff{0};
  Scalar f_u_eff{0};
  Scalar d_a_eff{0};
  Scalar d_u_eff{0};
  Scalar m_s{0};
  Scalar f_s{0};
  Scalar d{0};
};

template <typename Scalar>
SlidingTerms<Scalar> sliding_terms(const PlantState<Scalar>& x, const PlantParams<Scalar>& params, Scalar alpha_a,
                                   Scalar alpha_u,
                                   const Vector2<Scalar>& disturbance = Vector2<Scalar>::Zero()) {
  const Vector2<Scalar> qdd = accelerations(x, params, disturbance);
  const Scalar m_aa = params.m_aa, m_au = params.m_au, m_uu = params.m_uu;
  const Scalar f_a = -params.gamma * x.tau;
  const Scalar f_u = -params.k_phi * x.phi_dot;
  const Scalar d_a = Scalar(0);
  const Scalar d_u = -params.c_phi * qdd(1);

  SlidingTerms<Scalar> t;
  t.m_aa_eff = m_aa - m_au * m_au / m_uu;
  t.m_uu_eff = m_uu - m_au * m_au / m_aa;
  t.f_a_eff = f_a - m_au / m_uu * f_u;
  t.f_u_eff = f_u - m_au / m_aa * f_a;
  t.d_a_eff = d_a - m_au / m_uu * d_u;
  t.d_u_eff = d_u - m_au / m_aa * d_a;
  t.m_s = params.gamma * (alpha_a / t.m_aa_eff - alpha_u / t.m_uu_eff * m_au / m_aa);
  t.f_s = alpha_a / t.m_aa_eff * t.f_a_eff + alpha_u / t.m_uu_eff * t.f_u_eff;
  t.d = alpha_a / t.m_aa_eff * t.d_a_eff + alpha_u / t.m_uu_eff * t.d_u_eff;
  return t;
}

}  // namespace flexsmc
