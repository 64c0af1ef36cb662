#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decamin/assignment.hpp"
#include "decamin/infomap.hpp"
#include "decamin/isochrone.hpp"
#include "decamin/model.hpp"
#include "decamin/projection.hpp"
#include "decamin/redundancy.hpp"
#include "decamin/scoring.hpp"
#include "decamin/taxonomy.hpp"

// Intermediate files exchanged between pipeline stages (out/stages/).
namespace decamin::artifacts {

inline constexpr const char* kIngest = "ingest.json";
inline constexpr const char* kIsochrones = "isochrones.bin";
inline constexpr const char* kScores = "scores.json";
inline constexpr const char* kCommunities = "communities.json";
inline constexpr const char* kRedundancy = "redundancy.json";

struct Ingested {
  LonLat origin;
  std::vector<Building> buildings;
  std::vector<ServicePoint> services;
  std::vector<GreenArea> greens;
  nlohmann::json report;  // filter and POI accounting
};

struct IsochroneSet {
  double budget_s = 0.0;
  double speed_m_s = 0.0;
  double buffer_m = 0.0;
  std::string provider;
  std::vector<Isochrone> isochrones;  // aligned with Ingested::buildings
};

/// Per building, aligned with Ingested::buildings. `access` and `scores`
/// are meaningful only when `status` is Ok.
struct ScoreRecord {
  IsochroneStatus status = IsochroneStatus::Ok;
  AccessSet access;
  BuildingScores scores;
};

struct Communities {
  bool skipped = false;
  Partition partition;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string variant;
  std::vector<std::optional<BuildingAssignment>> assignments;  // nullopt for unscored buildings
};

struct Redundancy {
  std::vector<std::optional<RedundancyResult>> buildings;  // nullopt for unscored buildings
  std::vector<double> exclusive_population;                // per service
};

void write_ingest(const std::filesystem::path& path, const Ingested& data, const ServiceTaxonomy& taxonomy);
Ingested read_ingest(const std::filesystem::path& path, const ServiceTaxonomy& taxonomy);

/// Binary layout (little-endian):
///   magic "DCMISO01", u64 count, f64 budget_s, f64 speed_m_s, f64 buffer_m,
///   u32 provider length + bytes; then per isochrone:
///   u32 id length + bytes, u8 status, u8 has_snap, f64 snap_x, f64 snap_y,
///   f64 snap_distance, u32 ring count, per ring u32 point count + f64 x,y pairs
///   (outer ring first).
void write_isochrones(const std::filesystem::path& path, const IsochroneSet& set);
IsochroneSet read_isochrones(const std::filesystem::path& path);

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path, std::span<const ServicePoint> services,
                                     const ServiceTaxonomy& taxonomy);

void write_communities(const std::filesystem::path& path, const Communities& c);
Communities read_communities(const std::filesystem::path& path);

void write_redundancy(const std::filesystem::path& path, const Redundancy& r);
Redundancy read_redundancy(const std::filesystem::path& path);

/// Throws MissingArtifactError unless `path` exists.
void require(const std::filesystem::path& path);

/// Writes a JSON document with a trailing newline, creating parent folders.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace decamin::artifacts
