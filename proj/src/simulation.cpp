#include "flexsmc/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

namespace flexsmc {

NetworkState<double> NetworkConfig::build() const {
  NetworkState<double> net;
  if (centers) {
    net.centers = Eigen::Map<const VectorX<double>>(centers->data(), static_cast<Eigen::Index>(centers->size()));
    net.weights = VectorX<double>::Zero(net.centers.size());
    net.width = width;
    net.nu = nu;
  } else {
    net = make_network<double>(n, c_max, width, nu);
  }
  if (initial_weights) {
    if (initial_weights->size() != static_cast<std::size_t>(net.weights.size())) {
      throw ConfigError("network: initial_weights length does not match the neuron count");
    }
    net.weights = Eigen::Map<const VectorX<double>>(initial_weights->data(), net.weights.size());
  }
  net.validate();
  return net;
}

std::int64_t EpisodeConfig::steps() const { return static_cast<std::int64_t>(std::llround(duration / dt)); }

void EpisodeConfig::validate() const {
  if (!(duration > 0)) throw ConfigError("episode: duration must be > 0");
  if (!(dt > 0)) throw ConfigError("episode: dt must be > 0");
  const double ratio = duration / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw ConfigError("episode: duration must be an integer multiple of dt");
  }
  if (!std::isfinite(amplitude) || !std::isfinite(omega)) throw ConfigError("episode: trajectory must be finite");
  if (!(eta >= 0)) throw ConfigError("controller: eta must be >= 0");
  if (!disturbance.allFinite()) throw ConfigError("plant: disturbance must be finite");
  plant.validate();
  sensors.validate();
  gains.validate();
  DifferentiatorState<double> diff;
  diff.lipschitz_l = observer.lipschitz_l;
  diff.lambdas = observer.lambdas;
  diff.validate();
  TipEstimatorState<double> tip;
  tip.leak_rate = observer.leak_rate;
  tip.validate();
  network.build();
}

ReferenceState<double> trajectory(double t, double amplitude, double omega) {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  ReferenceState<double> r;
  r.theta_d = amplitude * c;
  r.theta_d_dot = -amplitude * omega * s;
  r.theta_d_ddot = -amplitude * omega * omega * c;
  r.theta_d_dddot = amplitude * omega * omega * omega * s;
  return r;
}

void EpisodeLog::reserve(std::size_t n) {
  for (auto* col : {&t, &theta_d, &theta, &phi, &theta_dot_hat, &theta_ddot_hat, &phi_hat, &s, &d_hat, &u, &tau,
                    &tip_acc_meas, &e_theta}) {
    col->reserve(n);
  }
}

std::array<const std::vector<double>*, 13> EpisodeLog::columns() const {
  return {&t, &theta_d, &theta, &phi, &theta_dot_hat, &theta_ddot_hat, &phi_hat, &s, &d_hat, &u, &tau,
          &tip_acc_meas, &e_theta};
}

double itae(std::span<const double> t, std::span<const double> error) {
  if (t.empty() || t.size() != error.size()) throw std::invalid_argument("itae: empty or mismatched series");
  double acc = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double prev = t[k - 1] * std::abs(error[k - 1]);
    const double cur = t[k] * std::abs(error[k]);
    acc += 0.5 * (t[k] - t[k - 1]) * (prev + cur);
  }
  return acc;
}

double itae(const EpisodeLog& log) { return itae(log.t, log.e_theta); }

double rmse(std::span<const double> error) {
  if (error.empty()) throw std::invalid_argument("rmse: empty series");
  double acc = 0;
  for (double e : error) acc += e * e;
  return std::sqrt(acc / static_cast<double>(error.size()));
}

void summarize(EpisodeLog& log, const EpisodeConfig& cfg, double final_weight_norm) {
  auto& sum = log.summary;
  sum.samples = log.size();
  sum.final_weight_norm = final_weight_norm;
  sum.true_m_s = sliding_terms(PlantState<double>{}, cfg.plant, cfg.gains.alpha_a, cfg.gains.alpha_u).m_s;
  if (log.size() == 0) return;
  sum.itae = itae(log);
  sum.rmse_theta = rmse(log.e_theta);
  double tail = 0;
  for (std::size_t k = log.size() / 2; k < log.size(); ++k) tail = std::max(tail, std::abs(log.s[k]));
  sum.max_abs_s_tail = tail;
  const ReachingReport reach = reaching_diagnostic(log.s, log.dt, cfg.gains.phi_bl, cfg.eta);
  sum.reaching_fraction = reach.fraction;
  sum.reaching_outside_count = reach.outside_count;
}

namespace {

[[noreturn]] void abort_episode(const std::string& why, double t, EpisodeLog& log, const EpisodeConfig& cfg,
                                double weight_norm) {
  std::ostringstream os;
  os << "episode aborted at t=" << t << ": " << why;
  summarize(log, cfg, weight_norm);
  throw EpisodeAborted(os.str(), std::move(log));
}

}  // namespace

EpisodeLog run_episode(const EpisodeConfig& cfg) {
  cfg.validate();
  const double dt = cfg.dt;
  const std::int64_t n_steps = cfg.steps();

  EpisodeLog log;
  log.dt = dt;
  log.reserve(static_cast<std::size_t>(n_steps) + 1);

  std::mt19937_64 rng(cfg.seed);
  SensorModel<double> sensors = cfg.sensors;
  sensors.seed = cfg.seed;

  PlantState<double> x;
  x.theta = cfg.start_at_zero ? 0.0 : trajectory(0.0, cfg.amplitude, cfg.omega).theta_d;

  DifferentiatorState<double> diff;
  diff.lipschitz_l = cfg.observer.lipschitz_l;
  diff.lambdas = cfg.observer.lambdas;
  TipEstimatorState<double> tip;
  tip.leak_rate = cfg.observer.leak_rate;

  NetworkState<double> net = cfg.network.build();
  const double nu = cfg.network.nu;
  double d_hat_adaptive = 0.0;
  const ControllerGains<double>& g = cfg.gains;

  for (std::int64_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vector2<double> qdd = accelerations(x, cfg.plant, cfg.disturbance);
    const SensorReading<double> meas = measure(x, qdd(0), qdd(1), sensors, rng);

    diff = differentiator_step(diff, meas.theta_meas, dt);
    tip = tip_estimate_step(tip, meas.tip_acc_meas, diff.z2, dt);

    const ReferenceState<double> ref = trajectory(t, cfg.amplitude, cfg.omega);
    TrackingErrors<double> err;
    err.e_theta = diff.z0 - ref.theta_d;
    err.e_theta_dot = diff.z1 - ref.theta_d_dot;
    err.e_theta_ddot = diff.z2 - ref.theta_d_ddot;
    err.e_phi = tip.phi_hat;
    err.e_phi_dot = tip.phi_dot_hat;
    err.e_phi_ddot = tip.phi_ddot_hat;

    const double s = sliding_variable(err, g);
    const double sr_dot = s_r_dot(err, ref, g);

    double d_hat = 0.0;
    VectorX<double> psi;
    switch (cfg.kind) {
      case ControllerKind::kIntelligent:
        psi = activations(s, net);
        d_hat = forward(net, psi);
        break;
      case ControllerKind::kAdaptive:
        d_hat = d_hat_adaptive;
        break;
      case ControllerKind::kExact: {
        const SlidingTerms<double> truth = sliding_terms(x, cfg.plant, g.alpha_a, g.alpha_u, cfg.disturbance);
        d_hat = ideal_compensation(truth.f_s + truth.d, truth.m_s, s, sr_dot, g);
        break;
      }
    }
    const double u = control_law(s, sr_dot, d_hat, g);

    log.t.push_back(t);
    log.theta_d.push_back(ref.theta_d);
    log.theta.push_back(x.theta);
    log.phi.push_back(x.phi);
    log.theta_dot_hat.push_back(diff.z1);
    log.theta_ddot_hat.push_back(diff.z2);
    log.phi_hat.push_back(tip.phi_hat);
    log.s.push_back(s);
    log.d_hat.push_back(d_hat);
    log.u.push_back(u);
    log.tau.push_back(x.tau);
    log.tip_acc_meas.push_back(meas.tip_acc_meas);
    log.e_theta.push_back(x.theta - ref.theta_d);

    if (!std::isfinite(s) || !std::isfinite(d_hat) || !std::isfinite(u) ||
        !std::isfinite(mechanical_energy(x, cfg.plant))) {
      abort_episode("non-finite controller signal", t, log, cfg, net.weights.norm());
    }

    if (cfg.kind == ControllerKind::kIntelligent) {
      net = update(net, s, psi, dt);
    } else if (cfg.kind == ControllerKind::kAdaptive) {
      d_hat_adaptive = adaptive_update(d_hat_adaptive, s, nu, dt);
    }

    if (k < n_steps) {
      try {
        x = step(x, u, cfg.plant, dt, cfg.disturbance);
      } catch (const IntegrationError& e) {
        abort_episode(e.what(), t, log, cfg, net.weights.norm());
      }
    }
  }

  summarize(log, cfg, cfg.kind == ControllerKind::kIntelligent ? net.weights.norm() : 0.0);
  return log;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_csv(std::ostream& os, const EpisodeLog& log) {
  for (std::size_t c = 0; c < EpisodeLog::kColumns.size(); ++c) {
    if (c) os << ',';
    os << EpisodeLog::kColumns[c];
  }
  os << '\n';
  const auto cols = log.columns();
  for (std::size_t r = 0; r < log.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) os << ',';
      os << format_value((*cols[c])[r]);
    }
    os << '\n';
  }
}

}  // namespace flexsmc
