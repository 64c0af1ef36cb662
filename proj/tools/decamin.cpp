// decamin command line: the full pipeline, single stages, and config checks.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "decamin/config.hpp"
#include "decamin/error.hpp"
#include "decamin/parallel.hpp"
#include "decamin/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kMissingArtifact = 3 };

struct Overrides {
  std::string config;
  std::size_t workers = 0;
  std::optional<std::uint64_t> seed;
  std::string provider;
  std::string assignment;
};

void setup_logging(bool json_lines, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  auto logger = std::make_shared<spdlog::logger>("decamin", sink);
  if (json_lines)
    logger->set_pattern(R"({"time":"%Y-%m-%dT%H:%M:%S.%e","level":"%l","message":"%v"})");
  else
    logger->set_pattern("[%H:%M:%S] %^%l%$ %v");
  logger->set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(logger);
}

decamin::RunConfig load(const Overrides& o) {
  decamin::RunConfig c = decamin::load_config(o.config);
  c.workers = o.workers ? o.workers : decamin::default_workers();
  if (o.seed) c.parameters.seed = *o.seed;
  if (!o.provider.empty()) c.provider.kind = decamin::parse_provider(o.provider);
  if (!o.assignment.empty()) c.parameters.assignment = decamin::parse_variant(o.assignment);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decamin: building-level 10-minute walkable accessibility, service communities and redundancy"};
  app.require_subcommand(1);
  Overrides o;
  bool log_json = false;
  std::string log_level = "info";
  app.add_flag("--log-json", log_json, "Write log lines to stderr as JSON objects");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", o.config, "Run configuration (TOML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--workers", o.workers, "Worker threads (default: available cores)");
    cmd->add_option("--seed", o.seed, "Seed for community detection");
    cmd->add_option("--provider", o.provider, "Isochrone provider")->check(CLI::IsMember({"internal", "remote"}));
    cmd->add_option("--assignment", o.assignment, "Community assignment score")
        ->check(CLI::IsMember({"literal", "pair"}));
  };

  std::string command;
  for (const char* name : {"pipeline", "validate"}) {
    auto* cmd = app.add_subcommand(name, std::string(name) == "pipeline" ? "Run every stage" : "Check the configuration");
    add_common(cmd);
    cmd->callback([&command, name] { command = name; });
  }
  for (decamin::Stage s : decamin::kStages) {
    const std::string name(decamin::stage_name(s));
    auto* cmd = app.add_subcommand(name, "Run the " + name + " stage");
    add_common(cmd);
    cmd->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  setup_logging(log_json, log_level);

  try {
    const decamin::RunConfig config = load(o);
    if (command == "validate") {
      decamin::validate(config);
      spdlog::info("configuration {} is valid", o.config);
    } else if (command == "pipeline") {
      decamin::run_pipeline(config);
    } else {
      decamin::run_stage(*decamin::parse_stage(command), config);
    }
  } catch (const decamin::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  } catch (const decamin::MissingArtifactError& e) {
    spdlog::error("{}", e.what());
    return kMissingArtifact;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}
