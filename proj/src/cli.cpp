#include "flexsmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "flexsmc/config.hpp"
#include "flexsmc/simulation.hpp"

namespace flexsmc::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir{"results"};
  std::optional<std::uint64_t> seed;
  std::optional<std::string> controller;
  std::optional<double> duration;
  unsigned jobs{1};
  std::string param;
  std::vector<double> values;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

/// Config file overlaid with the command-line overrides.
Json effective_document(const Options& opt) {
  Json doc = load_document(opt.config_path);
  if (opt.seed) doc["episode"]["seed"] = *opt.seed;
  if (opt.duration) doc["episode"]["duration"] = *opt.duration;
  if (opt.controller) doc["controller"]["kind"] = *opt.controller;
  return doc;
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

std::string csv_text(const EpisodeLog& log) {
  std::ostringstream os;
  write_csv(os, log);
  return os.str();
}

void write_episode(const fs::path& dir, const EpisodeConfig& cfg, const EpisodeLog& log) {
  fs::create_directories(dir);
  write_file_atomic(dir / "timeseries.csv", csv_text(log));
  Json summary = {{"config", config_to_json(cfg)}, {"summary", summary_to_json(log.summary)}};
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
}

void print_summary(std::ostream& out, std::string_view label, const EpisodeSummary& s) {
  char line[256];
  std::snprintf(line, sizeof line, "%-12s itae=%.6g rmse_theta=%.6g max_abs_s_tail=%.6g reaching_fraction=%.4f "
                "weight_norm=%.6g true_m_s=%.6g\n",
                std::string(label).c_str(), s.itae, s.rmse_theta, s.max_abs_s_tail, s.reaching_fraction,
                s.final_weight_norm, s.true_m_s);
  out << line;
}

/// Runs an episode; on abort, flushes the partial log and rethrows.
EpisodeLog run_and_write(const fs::path& dir, const EpisodeConfig& cfg) {
  try {
    EpisodeLog log = run_episode(cfg);
    write_episode(dir, cfg, log);
    return log;
  } catch (const EpisodeAborted& e) {
    write_episode(dir, cfg, e.partial_log());
    throw;
  }
}

int cmd_run(const Options& opt, std::ostream& out) {
  const EpisodeConfig cfg = config_from_json(effective_document(opt));
  const fs::path dir = prepare_out_dir(opt.out_dir);
  const EpisodeLog log = run_and_write(dir, cfg);
  print_summary(out, to_string(cfg.kind), log.summary);
  return kExitOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  Json doc = effective_document(opt);
  const fs::path dir = prepare_out_dir(opt.out_dir);

  doc["controller"]["kind"] = "intelligent";
  const EpisodeConfig cfg_int = config_from_json(doc);
  doc["controller"]["kind"] = "adaptive";
  const EpisodeConfig cfg_ada = config_from_json(doc);

  const EpisodeLog log_int = run_and_write(dir / "intelligent", cfg_int);
  const EpisodeLog log_ada = run_and_write(dir / "adaptive", cfg_ada);

  const double ratio = log_int.summary.itae / log_ada.summary.itae;
  Json comparison = {{"itae_intelligent", log_int.summary.itae},
                     {"itae_adaptive", log_ada.summary.itae},
                     {"ratio", ratio},
                     {"seed", cfg_int.seed},
                     {"intelligent", summary_to_json(log_int.summary)},
                     {"adaptive", summary_to_json(log_ada.summary)},
                     {"config", config_to_json(cfg_int)}};
  comparison["config"]["controller"].erase("kind");
  write_file_atomic(dir / "comparison.json", comparison.dump(2) + "\n");

  char line[160];
  std::snprintf(line, sizeof line, "%-12s %14s %14s %14s\n", "controller", "itae", "rmse_theta", "max_abs_s_tail");
  out << line;
  for (const auto* log : {&log_int, &log_ada}) {
    const auto& s = log->summary;
    std::snprintf(line, sizeof line, "%-12s %14.6g %14.6g %14.6g\n", log == &log_int ? "intelligent" : "adaptive",
                  s.itae, s.rmse_theta, s.max_abs_s_tail);
    out << line;
  }
  std::snprintf(line, sizeof line, "ratio (intelligent / adaptive) = %.6g\n", ratio);
  out << line;
  return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.param.empty()) throw UsageError("sweep requires --param");
  if (opt.values.empty()) throw UsageError("sweep requires a non-empty --values list");
  const Json base = effective_document(opt);

  std::vector<EpisodeConfig> configs;
  configs.reserve(opt.values.size());
  for (double v : opt.values) {
    Json doc = base;
    try {
      set_config_value(doc, opt.param, v);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    configs.push_back(config_from_json(doc));
  }
  const fs::path dir = prepare_out_dir(opt.out_dir);

  struct Row {
    EpisodeSummary summary;
    std::string error;
  };
  std::vector<Row> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        rows[i].summary = run_episode(configs[i]).summary;
      } catch (const EpisodeAborted& e) {
        rows[i].summary = e.partial_log().summary;
        rows[i].error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "value,itae,rmse,max_abs_s_tail\n";
  bool any_failed = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double nan = std::nan("");
    const bool failed = !rows[i].error.empty();
    any_failed |= failed;
    if (failed) err << "value " << format_value(opt.values[i]) << ": " << rows[i].error << "\n";
    const auto& s = rows[i].summary;
    csv << format_value(opt.values[i]) << ',' << format_value(failed ? nan : s.itae) << ','
        << format_value(failed ? nan : s.rmse_theta) << ',' << format_value(failed ? nan : s.max_abs_s_tail) << '\n';
  }
  write_file_atomic(dir / "sweep.csv", csv.str());
  out << csv.str();
  return any_failed ? kExitRuntime : kExitOk;
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const EpisodeConfig cfg = config_from_json(effective_document(opt));
  out << config_to_json(cfg).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move '" + tmp.string() + "' into place: " + ec.message());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sliding-mode control of a single-link flexible manipulator: closed-loop simulation", "flexsmc"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON configuration file")->required();
    sub->add_option("--seed", opt.seed, "override episode.seed");
    sub->add_option("--controller", opt.controller, "override controller.kind")
        ->check(CLI::IsMember({"intelligent", "adaptive", "exact"}));
    sub->add_option("--duration", opt.duration, "override episode.duration [s]");
  };
  auto* run = app.add_subcommand("run", "run one episode");
  add_common(run);
  run->add_option("--out", opt.out_dir, "output directory");
  auto* compare = app.add_subcommand("compare", "run intelligent and adaptive controllers head to head");
  add_common(compare);
  compare->add_option("--out", opt.out_dir, "output directory");
  auto* sweep = app.add_subcommand("sweep", "one episode per parameter value");
  add_common(sweep);
  sweep->add_option("--out", opt.out_dir, "output directory");
  sweep->add_option("--jobs", opt.jobs, "concurrent episodes")->check(CLI::PositiveNumber);
  sweep->add_option("--param", opt.param, "dotted parameter path, e.g. controller.kappa")->required();
  sweep->add_option("--values", opt.values, "comma-separated values")->delimiter(',')->required();
  auto* validate = app.add_subcommand("validate-config", "print the resolved configuration");
  add_common(validate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << app.help();
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(opt, out);
    if (compare->parsed()) return cmd_compare(opt, out);
    if (sweep->parsed()) return cmd_sweep(opt, out, err);
    return cmd_validate(opt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EpisodeAborted& e) {
    err << "error: " << e.what() << " (partial log written)\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace flexsmc::cli
