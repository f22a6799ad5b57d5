#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flexsmc/simulation.hpp"

namespace flexsmc {

using Json = nlohmann::ordered_json;

/// Resolves a config document (sections plant, sensors, observer,
/// controller, network, episode; every field optional) on top of the
/// defaults. Unknown sections or keys and ill-typed values raise ConfigError.
EpisodeConfig config_from_json(const Json& doc);

/// Fully resolved document; config_from_json(config_to_json(c)) == c.
Json config_to_json(const EpisodeConfig& cfg);

/// Reads and resolves a JSON file. Throws ConfigError when the file is
/// missing or unreadable.
EpisodeConfig load_config(const std::filesystem::path& path);

/// Sets a dotted path such as "controller.kappa" in a config document.
/// The path must name a scalar field of the resolved schema.
void set_config_value(Json& doc, std::string_view dotted_path, double value);

Json summary_to_json(const EpisodeSummary& summary);

}  // namespace flexsmc
