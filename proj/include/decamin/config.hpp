#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "decamin/assignment.hpp"
#include "decamin/ingest.hpp"
#include "decamin/isochrone.hpp"
#include "decamin/redundancy.hpp"

namespace decamin {

enum class ProviderKind { Internal, Remote };

struct RunInputs {
  std::filesystem::path buildings;
  std::filesystem::path pois;
  std::filesystem::path greens;
  std::filesystem::path network;        // GeoJSON lines, or the node CSV with network_edges
  std::filesystem::path network_edges;  // edge CSV; empty for GeoJSON networks
  std::filesystem::path taxonomy;       // empty: bundled default
  std::filesystem::path industrial_zones;
  std::filesystem::path population_zones;
  std::filesystem::path geocoder_lookup;
};

struct RunParameters {
  IsochroneParams isochrone;
  double green_threshold_m2 = 80'000.0;
  double min_area_m2 = 28.0;
  double teleport = 0.15;
  std::uint64_t seed = 1;
  int trials = 10;
  AssignmentVariant assignment = AssignmentVariant::Literal;
  PopulationPolicy::Mode population = PopulationPolicy::Mode::Uniform;
  RedundancyOptions redundancy;
};

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Internal;
  std::string name = "ors";
  std::filesystem::path cache_dir;  // default <output>/cache
  std::size_t concurrency = 2;
};

/// One pipeline run, read from a TOML file with [inputs], [parameters],
/// [provider] and [output] tables. Relative paths resolve against the
/// directory of the file.
struct RunConfig {
  std::filesystem::path source;
  RunInputs inputs;
  RunParameters parameters;
  ProviderConfig provider;
  std::filesystem::path output_dir;
  std::size_t workers = 1;

  std::filesystem::path stage_dir() const { return output_dir / "stages"; }
};

/// Throws ConfigError on syntax errors, unknown keys or out-of-range values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view document, const std::filesystem::path& base_dir);

/// Checks that every referenced input file exists and every parameter is in
/// range; ConfigError names the first offending path or key.
void validate(const RunConfig& config);

/// The effective parameters as recorded in summary.json.
nlohmann::json parameters_json(const RunConfig& config);

std::string_view provider_name(ProviderKind kind);
ProviderKind parse_provider(std::string_view name);

}  // namespace decamin
