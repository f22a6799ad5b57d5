#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexsmc/control.hpp"
#include "flexsmc/estimation.hpp"
#include "flexsmc/neural.hpp"
#include "flexsmc/plant.hpp"

namespace flexsmc {

struct ObserverConfig {
  double lipschitz_l{240.0};
  std::array<double, 3> lambdas{1.1, 1.5, 2.0};
  double leak_rate{1.4};
};

struct NetworkConfig {
  int n{7};
  double c_max{6.0};
  double width{2.0};
  double nu{20.0};
  std::optional<std::vector<double>> centers;          // overrides n / c_max when set
  std::optional<std::vector<double>> initial_weights;  // defaults to zeros

  NetworkState<double> build() const;
};

struct EpisodeConfig {
  double duration{20.0};  // s
  double dt{1e-3};        // s
  std::uint64_t seed{1};
  double amplitude{std::numbers::pi / 4};  // rad
  double omega{std::numbers::pi};          // rad/s
  bool start_at_zero{false};               // start at theta = 0 instead of theta_d(0)

  ControllerKind kind{ControllerKind::kIntelligent};
  ControllerGains<double> gains;
  double eta{0.1};  // reaching-diagnostic margin

  PlantParams<double> plant;
  Vector2<double> disturbance{Vector2<double>::Zero()};
  SensorModel<double> sensors;
  ObserverConfig observer;
  NetworkConfig network;

  /// Number of integration steps; the log holds steps() + 1 samples.
  std::int64_t steps() const;
  void validate() const;
};

/// theta_d = A cos(omega t) and its first three derivatives; the tip reference is zero.
ReferenceState<double> trajectory(double t, double amplitude, double omega);

struct EpisodeSummary {
  double itae{0};
  double rmse_theta{0};
  double max_abs_s_tail{0};  // over the final half of the episode
  double reaching_fraction{1};
  std::size_t reaching_outside_count{0};
  double final_weight_norm{0};
  double true_m_s{0};
  std::size_t samples{0};
};

/// Column-oriented per-step record, in the CSV column order.
struct EpisodeLog {
  static constexpr std::array<const char*, 13> kColumns{
      "t", "theta_d", "theta", "phi", "theta_dot_hat", "theta_ddot_hat", "phi_hat",
      "s", "d_hat", "u",     "tau", "tip_acc_meas", "e_theta"};

  std::vector<double> t, theta_d, theta, phi, theta_dot_hat, theta_ddot_hat, phi_hat, s, d_hat, u, tau, tip_acc_meas,
      e_theta;
  double dt{0};
  EpisodeSummary summary;

  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n);
  std::array<const std::vector<double>*, 13> columns() const;
};

/// Carries the log recorded up to the failure.
class EpisodeAborted : public std::runtime_error {
 public:
  EpisodeAborted(const std::string& what, EpisodeLog partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const EpisodeLog& partial_log() const { return partial_; }

 private:
  EpisodeLog partial_;
};

/// Runs one closed-loop episode. Per sample: measure, differentiate the hub
/// angle, reconstruct the tip state, form errors against the reference,
/// compute s and s_r', evaluate the compensator, apply the control law and
/// advance the plant with u held over dt. Deterministic in (cfg, cfg.seed).
EpisodeLog run_episode(const EpisodeConfig& cfg);

/// Trapezoidal integral of t |e_theta(t)|. Throws std::invalid_argument on an empty log.
double itae(const EpisodeLog& log);
double itae(std::span<const double> t, std::span<const double> error);
double rmse(std::span<const double> error);

/// Fills log.summary from the series.
void summarize(EpisodeLog& log, const EpisodeConfig& cfg, double final_weight_norm);

/// CSV with a header row and 9 significant digits per value.
void write_csv(std::ostream& os, const EpisodeLog& log);
std::string format_value(double v);

}  // namespace flexsmc
