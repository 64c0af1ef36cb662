#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decamin/geojson.hpp"
#include "decamin/model.hpp"
#include "decamin/projection.hpp"
#include "decamin/taxonomy.hpp"

namespace decamin {

class Geocoder;

// ---------------------------------------------------------------- buildings

struct RawBuilding {
  std::string id;
  geojson::LonLatPolygon footprint;
  std::map<std::string, std::string> tags;
};

/// Reads a FeatureCollection of Polygon/MultiPolygon footprints. For
/// multipolygons the part with the largest outer ring (in degrees²) is kept.
std::vector<RawBuilding> read_buildings(const std::filesystem::path& path);

struct FilterRules {
  /// A building is dropped when any of these (key, value) tags match.
  std::vector<std::pair<std::string, std::string>> excluded_tags = default_excluded_tags();
  /// Projected polygons (industrial areas); buildings whose centroid falls
  /// inside one are dropped.
  std::vector<geo::Polygon> excluded_zones;
  double min_area_m2 = 28.0;

  static std::vector<std::pair<std::string, std::string>> default_excluded_tags();
};

struct PopulationZone {
  geo::Polygon polygon;  // projected
  double population = 0.0;
};

/// How P for each kept building is set. Uniform gives every building 1;
/// area-proportional splits each zone's total over the buildings whose
/// centroid lies in it, by footprint area (buildings outside every zone get 0).
struct PopulationPolicy {
  enum class Mode { Uniform, AreaProportional };
  Mode mode = Mode::Uniform;
  std::vector<PopulationZone> zones;
};

struct DroppedBuilding {
  std::string id;
  std::string reason;  // excluded-tag | min-area | industrial-zone | invalid-geometry
};

struct FilterReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t invalid = 0;
  std::map<std::string, std::size_t> dropped;  // by reason, excluding invalid
  std::vector<DroppedBuilding> log;
};

struct FilterResult {
  std::vector<Building> buildings;
  FilterReport report;
};

FilterResult filter_residential(std::span<const RawBuilding> raw, const FilterRules& rules, const Projection& proj,
                                const PopulationPolicy& population = {});

/// Polygons from a FeatureCollection, projected (industrial or population
/// zones). `population_key` selects a numeric property into `values`.
std::vector<geo::Polygon> read_zones(const std::filesystem::path& path, const Projection& proj);
std::vector<PopulationZone> read_population_zones(const std::filesystem::path& path, const Projection& proj,
                                                  const std::string& population_key = "population");

// --------------------------------------------------------------------- POIs

struct PoiRecord {
  std::string id;
  std::string type_name;
  std::optional<LonLat> location;
  std::optional<std::string> address;
  std::string source;
};

/// GeoJSON Point features (properties: type, id, address, source) or CSV
/// with header id,type,lon,lat,address.
std::vector<PoiRecord> read_pois(const std::filesystem::path& path);

struct PoiReject {
  std::string id;
  std::string reason;
};

struct GeocodeOptions {
  int concurrency = 4;
  int max_attempts = 3;
  int backoff_ms = 200;
};

struct PoiLoadResult {
  std::vector<ServicePoint> services;
  std::vector<PoiReject> rejects;
};

/// Resolves every record to a ServicePoint. Address-only records go through
/// the geocoder; failures are returned as rejects. Unknown type names are a
/// hard error (TaxonomyError naming the type).
PoiLoadResult load_pois(std::span<const PoiRecord> records, const ServiceTaxonomy& taxonomy, const Projection& proj,
                        Geocoder* geocoder = nullptr, const GeocodeOptions& options = {});

void write_rejects_csv(const std::filesystem::path& path, std::span<const PoiReject> rejects);

// ------------------------------------------------------------------- greens

std::vector<GreenArea> read_greens(const std::filesystem::path& path, const Projection& proj);

// ------------------------------------------------------------- walk network

struct NetworkNode {
  std::string id;
  LonLat location;
};

struct NetworkEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::optional<double> length;  // meters
  std::vector<LonLat> geometry;  // endpoints included; empty = straight line
  std::map<std::string, std::string> tags;
};

struct WalkNetworkSource {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkEdge> edges;
  std::size_t dropped_non_walkable = 0;
};

/// Decides which edges pedestrians may use.
struct WalkPredicate {
  std::set<std::string> excluded_highways{"motorway", "motorway_link"};
  bool operator()(const std::map<std::string, std::string>& tags) const;
};

/// GeoJSON LineString features with `u`/`v` (or `from`/`to`) node ids and
/// optional `length`, `highway`, `foot`, `walkable` properties.
WalkNetworkSource load_walk_network(const std::filesystem::path& path, const WalkPredicate& walkable = {});

/// Node CSV (id,lon,lat) plus edge CSV (u,v[,length][,highway][,walkable]).
WalkNetworkSource load_walk_network_csv(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                                        const WalkPredicate& walkable = {});

/// Fills missing edge lengths with the projected polyline length.
void resolve_edge_lengths(WalkNetworkSource& network, const Projection& proj);

}  // namespace decamin
