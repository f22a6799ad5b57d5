#include "flexsmc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace flexsmc {

namespace {

template <typename T>
T get(const Json& section, const char* section_name, const char* key) {
  try {
    return section.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(section_name) + "." + key + ": " + e.what());
  }
}

std::optional<std::vector<double>> get_optional_list(const Json& section, const char* section_name, const char* key) {
  const Json& v = section.at(key);
  if (v.is_null()) return std::nullopt;
  return get<std::vector<double>>(section, section_name, key);
}

// Overlays `overlay` onto `base`, rejecting keys the schema does not know.
void merge_checked(Json& base, const Json& overlay) {
  if (!overlay.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [section, fields] : overlay.items()) {
    if (!base.contains(section)) throw ConfigError("config: unknown section '" + section + "'");
    if (!fields.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
    Json& target = base[section];
    for (const auto& [key, value] : fields.items()) {
      if (!target.contains(key)) throw ConfigError("config: unknown key '" + section + "." + key + "'");
      target[key] = value;
    }
  }
}

}  // namespace

Json config_to_json(const EpisodeConfig& cfg) {
  Json doc;
  doc["episode"] = {{"duration", cfg.duration},   {"dt", cfg.dt},       {"seed", cfg.seed},
                    {"amplitude", cfg.amplitude}, {"omega", cfg.omega}, {"start_at_zero", cfg.start_at_zero}};
  const auto& g = cfg.gains;
  doc["controller"] = {{"kind", std::string(to_string(cfg.kind))},
                       {"alpha_a", g.alpha_a},
                       {"alpha_u", g.alpha_u},
                       {"lambda_a", g.lambda_a},
                       {"lambda_u", g.lambda_u},
                       {"kappa", g.kappa},
                       {"phi_bl", g.phi_bl},
                       {"m_s_hat", g.m_s_hat},
                       {"f_s_hat", g.f_s_hat},
                       {"eta", cfg.eta}};
  const auto& p = cfg.plant;
  doc["plant"] = {{"m_aa", p.m_aa},   {"m_au", p.m_au},   {"m_uu", p.m_uu},
                  {"k_phi", p.k_phi}, {"c_phi", p.c_phi}, {"gamma", p.gamma},
                  {"disturbance", {cfg.disturbance(0), cfg.disturbance(1)}}};
  doc["sensors"] = {{"encoder_step", cfg.sensors.encoder_step}, {"accel_noise_std", cfg.sensors.accel_noise_std}};
  doc["observer"] = {{"lipschitz_l", cfg.observer.lipschitz_l},
                     {"lambdas", cfg.observer.lambdas},
                     {"leak_rate", cfg.observer.leak_rate}};
  const auto& n = cfg.network;
  doc["network"] = {{"n", n.n},
                    {"c_max", n.c_max},
                    {"width", n.width},
                    {"nu", n.nu},
                    {"centers", n.centers ? Json(*n.centers) : Json(nullptr)},
                    {"initial_weights", n.initial_weights ? Json(*n.initial_weights) : Json(nullptr)}};
  return doc;
}

EpisodeConfig config_from_json(const Json& doc) {
  Json merged = config_to_json(EpisodeConfig{});
  merge_checked(merged, doc);

  EpisodeConfig cfg;
  const Json& ep = merged["episode"];
  cfg.duration = get<double>(ep, "episode", "duration");
  cfg.dt = get<double>(ep, "episode", "dt");
  cfg.seed = get<std::uint64_t>(ep, "episode", "seed");
  cfg.amplitude = get<double>(ep, "episode", "amplitude");
  cfg.omega = get<double>(ep, "episode", "omega");
  cfg.start_at_zero = get<bool>(ep, "episode", "start_at_zero");

  const Json& c = merged["controller"];
  cfg.kind = controller_kind_from_string(get<std::string>(c, "controller", "kind"));
  cfg.gains.alpha_a = get<double>(c, "controller", "alpha_a");
  cfg.gains.alpha_u = get<double>(c, "controller", "alpha_u");
  cfg.gains.lambda_a = get<double>(c, "controller", "lambda_a");
  cfg.gains.lambda_u = get<double>(c, "controller", "lambda_u");
  cfg.gains.kappa = get<double>(c, "controller", "kappa");
  cfg.gains.phi_bl = get<double>(c, "controller", "phi_bl");
  cfg.gains.m_s_hat = get<double>(c, "controller", "m_s_hat");
  cfg.gains.f_s_hat = get<double>(c, "controller", "f_s_hat");
  cfg.eta = get<double>(c, "controller", "eta");

  const Json& p = merged["plant"];
  cfg.plant.m_aa = get<double>(p, "plant", "m_aa");
  cfg.plant.m_au = get<double>(p, "plant", "m_au");
  cfg.plant.m_uu = get<double>(p, "plant", "m_uu");
  cfg.plant.k_phi = get<double>(p, "plant", "k_phi");
  cfg.plant.c_phi = get<double>(p, "plant", "c_phi");
  cfg.plant.gamma = get<double>(p, "plant", "gamma");
  const auto dist = get<std::vector<double>>(p, "plant", "disturbance");
  if (dist.size() != 2) throw ConfigError("plant.disturbance: expected [d_a, d_u]");
  cfg.disturbance << dist[0], dist[1];

  const Json& s = merged["sensors"];
  cfg.sensors.encoder_step = get<double>(s, "sensors", "encoder_step");
  cfg.sensors.accel_noise_std = get<double>(s, "sensors", "accel_noise_std");

  const Json& o = merged["observer"];
  cfg.observer.lipschitz_l = get<double>(o, "observer", "lipschitz_l");
  const auto lambdas = get<std::vector<double>>(o, "observer", "lambdas");
  if (lambdas.size() != 3) throw ConfigError("observer.lambdas: expected three gains");
  cfg.observer.lambdas = {lambdas[0], lambdas[1], lambdas[2]};
  cfg.observer.leak_rate = get<double>(o, "observer", "leak_rate");

  const Json& n = merged["network"];
  cfg.network.n = get<int>(n, "network", "n");
  cfg.network.c_max = get<double>(n, "network", "c_max");
  cfg.network.width = get<double>(n, "network", "width");
  cfg.network.nu = get<double>(n, "network", "nu");
  cfg.network.centers = get_optional_list(n, "network", "centers");
  cfg.network.initial_weights = get_optional_list(n, "network", "initial_weights");

  cfg.validate();
  return cfg;
}

EpisodeConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

void set_config_value(Json& doc, std::string_view dotted_path, double value) {
  const auto dot = dotted_path.find('.');
  if (dot == std::string_view::npos) {
    throw ConfigError("parameter path '" + std::string(dotted_path) + "' must have the form section.key");
  }
  const std::string section(dotted_path.substr(0, dot));
  const std::string key(dotted_path.substr(dot + 1));
  const Json schema = config_to_json(EpisodeConfig{});
  if (!schema.contains(section) || !schema[section].contains(key)) {
    throw ConfigError("unknown parameter path '" + std::string(dotted_path) + "'");
  }
  const Json& slot = schema[section][key];
  if (slot.is_number_integer()) {
    if (value != std::floor(value)) {
      throw ConfigError("parameter '" + std::string(dotted_path) + "' takes integer values");
    }
    if (slot.is_number_unsigned()) {
      if (value < 0) throw ConfigError("parameter '" + std::string(dotted_path) + "' must be non-negative");
      doc[section][key] = static_cast<std::uint64_t>(value);
    } else {
      doc[section][key] = static_cast<std::int64_t>(value);
    }
  } else if (slot.is_number()) {
    doc[section][key] = value;
  } else {
    throw ConfigError("parameter '" + std::string(dotted_path) + "' is not a scalar numeric field");
  }
}

Json summary_to_json(const EpisodeSummary& s) {
  return {{"itae", s.itae},
          {"rmse_theta", s.rmse_theta},
          {"max_abs_s_tail", s.max_abs_s_tail},
          {"reaching_fraction", s.reaching_fraction},
          {"reaching_outside_count", s.reaching_outside_count},
          {"final_weight_norm", s.final_weight_norm},
          {"true_m_s", s.true_m_s},
          {"samples", s.samples}};
}

}  // namespace flexsmc
