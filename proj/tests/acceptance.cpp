// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures. argv[1] is the path of the flexsmc CLI binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flexsmc/config.hpp"
#include "flexsmc/estimation.hpp"
#include "flexsmc/neural.hpp"
#include "flexsmc/plant.hpp"
#include "flexsmc/simulation.hpp"
#include "neural_oracle.hpp"

using namespace flexsmc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Timed {
  EpisodeSummary summary;
  double seconds;
};

Timed timed_run(const EpisodeConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const EpisodeLog log = run_episode(cfg);
  return {log.summary, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

EpisodeConfig exact_noise_free() {
  EpisodeConfig cfg;
  cfg.kind = ControllerKind::kExact;
  cfg.sensors.accel_noise_std = 0;
  cfg.sensors.encoder_step = 0;
  return cfg;
}

double noisy_intelligent_itae = 0;

void head_to_head() {
  EpisodeConfig cfg;
  cfg.kind = ControllerKind::kIntelligent;
  const Timed in = timed_run(cfg);
  cfg.kind = ControllerKind::kAdaptive;
  const Timed ad = timed_run(cfg);
  noisy_intelligent_itae = in.summary.itae;
  const double ratio = in.summary.itae / ad.summary.itae;
  const double slowest = std::max(in.seconds, ad.seconds);
  const bool ok = ratio <= 0.6 && slowest < 10.0 && in.summary.final_weight_norm < 1e3;
  report(1, "head-to-head ITAE", ok,
         fmt("itae_int=%.4g itae_ada=%.4g ratio=%.3f (<=0.6) slowest_episode=%.2fs", in.summary.itae,
             ad.summary.itae, ratio, slowest) +
             fmt(" |w|=%.4g (<1e3)", in.summary.final_weight_norm));
}

void boundary_layer_and_reaching() {
  const EpisodeConfig cfg = exact_noise_free();
  const EpisodeLog log = run_episode(cfg);
  double worst = 0;
  for (std::size_t k = 0; k < log.size(); ++k) {
    if (log.t[k] >= 10.0) worst = std::max(worst, std::abs(log.s[k]));
  }
  report(2, "boundary-layer invariance", worst <= cfg.gains.phi_bl,
         fmt("max|s| over [10,20]s = %.4g, phi_bl = %.4g", worst, cfg.gains.phi_bl));
  const Json summary = summary_to_json(log.summary);
  const double fraction = summary.at("reaching_fraction").get<double>();
  report(3, "reaching condition", fraction >= 0.95,
         fmt("reaching_fraction = %.4f (>=0.95, eta = %.2f, %g samples outside layer)", fraction, cfg.eta,
             static_cast<double>(log.summary.reaching_outside_count)));
}

void plant_integrator() {
  PlantParams<double> p;
  p.c_phi = 0;
  PlantState<double> x;
  x.phi = 0.1;
  x.theta_dot = 0.5;
  const double e0 = mechanical_energy(x, p);
  double drift = 0;
  for (int k = 0; k < 10000; ++k) {
    x = step(x, 0.0, p, 1e-3);
    drift = std::max(drift, std::abs(mechanical_energy(x, p) - e0) / e0);
  }

  const PlantParams<double> forced;
  const PlantState<double> x0{0.2, 0.05, -0.3, 0.0, 0.5};
  auto integrate = [&](double dt) {
    PlantState<double> y = x0;
    const int n = static_cast<int>(std::llround(1.0 / dt));
    for (int k = 0; k < n; ++k) y = step(y, 1.0, forced, dt);
    return y.vector();
  };
  const double h = 0.02;
  const StateVector<double> a = integrate(h), b = integrate(h / 2), c = integrate(h / 4);
  const double order = std::log2((a - b).norm() / (b - c).norm());
  report(4, "plant integrator", drift < 1e-6 && order >= 3.8,
         fmt("energy drift over 10 s = %.3g (<1e-6), self-convergence order = %.3f (>=3.8)", drift, order));
}

void network_arithmetic() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-5, 5);
  const std::vector<double> centers{-6, -4, -2, 0, 2, 4, 6};
  double worst = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    NetworkState<double> net = make_network<double>(7, 6.0, 2.0, 150.0);
    std::vector<double> w(7);
    for (int i = 0; i < 7; ++i) net.weights(i) = w[i] = d(rng);
    const double s = d(rng);
    const std::vector<double> psi_ref = oracle::gaussians(s, centers, 2.0);
    const VectorX<double> psi = activations(s, net);
    worst = std::max(worst, std::abs(forward(net, psi) - oracle::dot(w, psi_ref)));
    const NetworkState<double> next = update(net, s, psi, 1e-3);
    const std::vector<double> w_ref = oracle::euler_step(w, 150.0 * s, psi_ref, 1e-3);
    for (int i = 0; i < 7; ++i) worst = std::max(worst, std::abs(next.weights(i) - w_ref[i]));
  }
  const double fit = oracle::fit_tanh(make_network<double>(7, 3.0, 1.0, 10.0), 1e-3, 100000).max_error;
  report(5, "network arithmetic", worst <= 1e-12 && fit < 0.15,
         fmt("max oracle deviation over 1e4 draws = %.3g (<=1e-12), static fit max error = %.4f (<0.15)", worst, fit));
}

void differentiator() {
  const double dt = 1e-3, w = 2 * std::numbers::pi;
  DifferentiatorState<double> st;
  double sine_err = 0;
  for (int k = 0; k <= 5000; ++k) {
    const double t = k * dt;
    st = differentiator_step(st, std::sin(w * t), dt);
    if (t >= 1.0) sine_err = std::max(sine_err, std::abs(st.z1 - w * std::cos(w * t)));
  }
  st = {};
  double q1 = 0, q2 = 0;
  for (int k = 0; k <= 4000; ++k) {
    const double t = k * dt;
    st = differentiator_step(st, 0.4 - 1.2 * t + 2.5 * t * t, dt);
    if (t >= 2.0) {
      q1 = std::max(q1, std::abs(st.z1 - (-1.2 + 5 * t)));
      q2 = std::max(q2, std::abs(st.z2 - 5.0));
    }
  }
  report(6, "differentiator", sine_err <= 0.1 && q1 < 1e-3 && q2 < 1e-2,
         fmt("sine derivative error = %.4g (<=0.1), quadratic errors z1 = %.3g (<1e-3) z2 = %.3g (<1e-2)", sine_err,
             q1, q2));
}

void itae_constant() {
  const double c = 0.37, T = 20.0, dt = 1e-3;
  std::vector<double> t, e;
  for (int k = 0; k <= 20000; ++k) {
    t.push_back(k * dt);
    e.push_back(c);
  }
  const double want = c * T * T / 2, rel = std::abs(itae(t, e) - want) / want;
  report(7, "ITAE constant error", rel <= 1e-6, fmt("relative error = %.3g (<=1e-6)", rel));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void compare_determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "flexsmc_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "config.json";
  std::ofstream(config) << config_to_json(EpisodeConfig{}).dump(2);
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string cmd =
        "\"" + cli + "\" compare --config \"" + config.string() + "\" --out \"" + (root / run).string() + "\" --seed 11 > /dev/null";
    ok &= std::system(cmd.c_str()) == 0;
  }
  int compared = 0;
  for (const char* f : {"comparison.json", "intelligent/timeseries.csv", "intelligent/summary.json",
                        "adaptive/timeseries.csv", "adaptive/summary.json"}) {
    const bool both = fs::exists(root / "a" / f) && fs::exists(root / "b" / f);
    ok &= both && slurp(root / "a" / f) == slurp(root / "b" / f);
    compared += both;
  }
  fs::remove_all(root);
  report(8, "compare determinism", ok, fmt("%g artifacts byte-identical across two invocations", compared));
}

void noise_robustness() {
  EpisodeConfig cfg;
  cfg.sensors.accel_noise_std = 2 * cfg.sensors.accel_noise_std;
  const double doubled = run_episode(cfg).summary.itae;
  const double factor = doubled / noisy_intelligent_itae;
  report(9, "noise robustness", factor < 2.0,
         fmt("itae at noise std %.1f = %.4g, degradation factor = %.3f (<2)", cfg.sensors.accel_noise_std, doubled,
             factor));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-flexsmc-cli>\n");
    return 2;
  }
  const EpisodeConfig defaults;
  std::printf("true M_s at rest = %.4f, M_s_hat = %.4f\n",
              sliding_terms(PlantState<double>{}, defaults.plant, defaults.gains.alpha_a, defaults.gains.alpha_u).m_s,
              defaults.gains.m_s_hat);
  head_to_head();
  boundary_layer_and_reaching();
  plant_integrator();
  network_arithmetic();
  differentiator();
  itae_constant();
  compare_determinism(argv[1]);
  noise_robustness();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
