#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decamin/geometry.hpp"
#include "decamin/projection.hpp"

namespace decamin::geojson {

using Json = nlohmann::json;

/// Polygon in WGS84 degrees, as read from a file.
struct LonLatPolygon {
  std::vector<LonLat> outer;
  std::vector<std::vector<LonLat>> holes;
};

Json read_file(const std::filesystem::path& path);

/// Returns the `features` array; throws InputError unless `doc` is a
/// FeatureCollection.
const Json& features(const Json& doc, const std::string& what);

/// Feature id from `id`, then `properties.id`, else the fallback.
std::string feature_id(const Json& feature, const std::string& fallback);

/// Scalar properties rendered as strings (booleans as "true"/"false").
std::map<std::string, std::string> string_properties(const Json& feature);

/// Polygon and MultiPolygon geometries, one entry per part.
std::vector<LonLatPolygon> polygons(const Json& geometry);

LonLat position(const Json& coordinate);

geo::Polygon project(const LonLatPolygon& poly, const Projection& proj);
LonLatPolygon unproject(const geo::Polygon& poly, const Projection& proj);

Json polygon_geometry(const LonLatPolygon& poly);
Json point_geometry(LonLat p);

/// Writes `doc` compactly; used for every artifact so output is stable.
void write_file(const std::filesystem::path& path, const Json& doc);

}  // namespace decamin::geojson
