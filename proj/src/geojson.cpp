#include "decamin/geojson.hpp"

#include <fstream>

#include "decamin/error.hpp"

namespace decamin::geojson {

Json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

const Json& features(const Json& doc, const std::string& what) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw InputError(what + ": expected a GeoJSON FeatureCollection");
  return doc["features"];
}

std::string feature_id(const Json& feature, const std::string& fallback) {
  auto render = [](const Json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return v.dump();
    return {};
  };
  if (feature.contains("id")) {
    if (auto s = render(feature["id"]); !s.empty()) return s;
  }
  if (feature.contains("properties") && feature["properties"].is_object() && feature["properties"].contains("id")) {
    if (auto s = render(feature["properties"]["id"]); !s.empty()) return s;
  }
  return fallback;
}

std::map<std::string, std::string> string_properties(const Json& feature) {
  std::map<std::string, std::string> out;
  if (!feature.contains("properties") || !feature["properties"].is_object()) return out;
  for (const auto& [key, value] : feature["properties"].items()) {
    if (value.is_string())
      out[key] = value.get<std::string>();
    else if (value.is_boolean())
      out[key] = value.get<bool>() ? "true" : "false";
    else if (value.is_number())
      out[key] = value.dump();
  }
  return out;
}

LonLat position(const Json& coordinate) {
  if (!coordinate.is_array() || coordinate.size() < 2 || !coordinate[0].is_number() || !coordinate[1].is_number())
    throw InputError("malformed GeoJSON position: " + coordinate.dump());
  return LonLat{coordinate[0].get<double>(), coordinate[1].get<double>()};
}

namespace {

std::vector<LonLat> ring(const Json& coords) {
  if (!coords.is_array()) throw InputError("malformed GeoJSON ring");
  std::vector<LonLat> out;
  out.reserve(coords.size());
  for (const Json& c : coords) out.push_back(position(c));
  return out;
}

LonLatPolygon polygon(const Json& rings) {
  if (!rings.is_array() || rings.empty()) throw InputError("malformed GeoJSON polygon");
  LonLatPolygon poly;
  poly.outer = ring(rings[0]);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(ring(rings[i]));
  return poly;
}

}  // namespace

std::vector<LonLatPolygon> polygons(const Json& geometry) {
  if (!geometry.is_object()) throw InputError("feature without geometry");
  const std::string type = geometry.value("type", "");
  const Json& coords = geometry.contains("coordinates") ? geometry["coordinates"] : Json();
  if (type == "Polygon") return {polygon(coords)};
  if (type == "MultiPolygon") {
    if (!coords.is_array()) throw InputError("malformed GeoJSON multipolygon");
    std::vector<LonLatPolygon> out;
    for (const Json& part : coords) out.push_back(polygon(part));
    return out;
  }
  throw InputError("expected Polygon or MultiPolygon geometry, got '" + type + "'");
}

geo::Polygon project(const LonLatPolygon& poly, const Projection& proj) {
  std::vector<geo::Point> outer;
  outer.reserve(poly.outer.size());
  for (const LonLat& p : poly.outer) outer.push_back(proj.forward(p));
  std::vector<std::vector<geo::Point>> holes;
  for (const auto& h : poly.holes) {
    auto& hole = holes.emplace_back();
    for (const LonLat& p : h) hole.push_back(proj.forward(p));
  }
  return geo::make_polygon(std::move(outer), std::move(holes));
}

LonLatPolygon unproject(const geo::Polygon& poly, const Projection& proj) {
  LonLatPolygon out;
  for (const auto& p : poly.outer()) out.outer.push_back(proj.inverse(p));
  for (const auto& inner : poly.inners()) {
    auto& hole = out.holes.emplace_back();
    for (const auto& p : inner) hole.push_back(proj.inverse(p));
  }
  return out;
}

Json polygon_geometry(const LonLatPolygon& poly) {
  auto ring_json = [](const std::vector<LonLat>& r) {
    Json arr = Json::array();
    for (const LonLat& p : r) arr.push_back(Json::array({p.lon, p.lat}));
    return arr;
  };
  Json rings = Json::array();
  rings.push_back(ring_json(poly.outer));
  for (const auto& h : poly.holes) rings.push_back(ring_json(h));
  return Json{{"type", "Polygon"}, {"coordinates", std::move(rings)}};
}

Json point_geometry(LonLat p) { return Json{{"type", "Point"}, {"coordinates", Json::array({p.lon, p.lat})}}; }

void write_file(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace decamin::geojson
