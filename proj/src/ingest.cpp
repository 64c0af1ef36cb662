#include "decamin/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "decamin/csv.hpp"
#include "decamin/error.hpp"
#include "decamin/geocoder.hpp"
#include "decamin/parallel.hpp"

namespace decamin {

namespace {

double ring_area_deg(const std::vector<LonLat>& ring) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) a += ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat;
  return std::abs(a) / 2.0;
}

bool is_csv(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv";
}

csv::Table read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return csv::read(in, path.string());
}

}  // namespace

// ---------------------------------------------------------------- buildings

std::vector<std::pair<std::string, std::string>> FilterRules::default_excluded_tags() {
  std::vector<std::pair<std::string, std::string>> tags;
  for (const char* key : {"building", "amenity"}) {
    for (const char* value :
         {"school", "university", "hospital", "government", "barracks", "church", "convent", "prison"}) {
      tags.emplace_back(key, value);
    }
  }
  return tags;
}

std::vector<RawBuilding> read_buildings(const std::filesystem::path& path) {
  const auto doc = geojson::read_file(path);
  const auto& feats = geojson::features(doc, path.string());
  std::vector<RawBuilding> out;
  out.reserve(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& f = feats[i];
    RawBuilding b;
    b.id = geojson::feature_id(f, "building-" + std::to_string(i));
    b.tags = geojson::string_properties(f);
    try {
      auto parts = geojson::polygons(f.value("geometry", geojson::Json()));
      auto largest = std::max_element(parts.begin(), parts.end(), [](const auto& a, const auto& c) {
        return ring_area_deg(a.outer) < ring_area_deg(c.outer);
      });
      if (largest != parts.end()) b.footprint = std::move(*largest);
    } catch (const InputError& e) {
      spdlog::warn("building {}: {}", b.id, e.what());
    }
    out.push_back(std::move(b));
  }
  return out;
}

FilterResult filter_residential(std::span<const RawBuilding> raw, const FilterRules& rules, const Projection& proj,
                                const PopulationPolicy& population) {
  FilterResult result;
  FilterReport& report = result.report;
  report.input = raw.size();

  auto drop = [&](const std::string& id, const std::string& reason) {
    report.dropped[reason] += 1;
    report.log.push_back({id, reason});
  };

  for (const RawBuilding& rb : raw) {
    Building b;
    b.id = rb.id;
    b.tags = rb.tags;
    try {
      if (rb.footprint.outer.size() < 4) throw GeometryError("footprint ring has fewer than 4 positions");
      b.footprint = geojson::project(rb.footprint, proj);
      geo::require_valid(b.footprint);
      b.centroid = geo::polygon_centroid(b.footprint);
    } catch (const Error& e) {
      spdlog::warn("building {} skipped: {}", rb.id, e.what());
      report.invalid += 1;
      report.log.push_back({rb.id, "invalid-geometry"});
      continue;
    }

    const bool tag_hit = std::any_of(rules.excluded_tags.begin(), rules.excluded_tags.end(), [&](const auto& kv) {
      auto it = rb.tags.find(kv.first);
      return it != rb.tags.end() && it->second == kv.second;
    });
    if (tag_hit) {
      drop(rb.id, "excluded-tag");
      continue;
    }
    if (geo::area(b.footprint) < rules.min_area_m2) {
      drop(rb.id, "min-area");
      continue;
    }
    const bool in_zone = std::any_of(rules.excluded_zones.begin(), rules.excluded_zones.end(),
                                     [&](const geo::Polygon& zone) { return geo::contains(zone, b.centroid); });
    if (in_zone) {
      drop(rb.id, "industrial-zone");
      continue;
    }
    b.population = 1.0;
    result.buildings.push_back(std::move(b));
  }
  report.kept = result.buildings.size();

  if (population.mode == PopulationPolicy::Mode::AreaProportional) {
    constexpr std::size_t kNoZone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> zone_of(result.buildings.size(), kNoZone);
    std::vector<double> zone_area(population.zones.size(), 0.0);
    for (std::size_t i = 0; i < result.buildings.size(); ++i) {
      for (std::size_t z = 0; z < population.zones.size(); ++z) {
        if (geo::contains(population.zones[z].polygon, result.buildings[i].centroid)) {
          zone_of[i] = z;
          zone_area[z] += geo::area(result.buildings[i].footprint);
          break;
        }
      }
    }
    std::size_t outside = 0;
    for (std::size_t i = 0; i < result.buildings.size(); ++i) {
      Building& b = result.buildings[i];
      if (zone_of[i] == kNoZone) {
        b.population = 0.0;
        ++outside;
      } else {
        b.population = population.zones[zone_of[i]].population * geo::area(b.footprint) / zone_area[zone_of[i]];
      }
    }
    if (outside) spdlog::warn("{} buildings lie outside every population zone and get population 0", outside);
  }
  return result;
}

std::vector<geo::Polygon> read_zones(const std::filesystem::path& path, const Projection& proj) {
  const auto doc = geojson::read_file(path);
  std::vector<geo::Polygon> zones;
  for (const auto& f : geojson::features(doc, path.string())) {
    for (const auto& part : geojson::polygons(f.value("geometry", geojson::Json()))) {
      geo::Polygon poly = geojson::project(part, proj);
      geo::require_valid(poly);
      zones.push_back(std::move(poly));
    }
  }
  return zones;
}

std::vector<PopulationZone> read_population_zones(const std::filesystem::path& path, const Projection& proj,
                                                  const std::string& population_key) {
  const auto doc = geojson::read_file(path);
  std::vector<PopulationZone> zones;
  for (const auto& f : geojson::features(doc, path.string())) {
    const auto& props = f.value("properties", geojson::Json::object());
    if (!props.contains(population_key) || !props[population_key].is_number())
      throw InputError(path.string() + ": zone without numeric '" + population_key + "'");
    const double total = props[population_key].get<double>();
    if (total < 0) throw InputError(path.string() + ": negative zone population");
    for (const auto& part : geojson::polygons(f.value("geometry", geojson::Json()))) {
      PopulationZone z{geojson::project(part, proj), total};
      geo::require_valid(z.polygon);
      zones.push_back(std::move(z));
    }
  }
  return zones;
}

// --------------------------------------------------------------------- POIs

std::vector<PoiRecord> read_pois(const std::filesystem::path& path) {
  std::vector<PoiRecord> out;
  if (is_csv(path)) {
    const csv::Table t = read_csv_file(path);
    const std::size_t id = t.column("id");
    const std::size_t type = t.column("type");
    const auto lon = t.find_column("lon");
    const auto lat = t.find_column("lat");
    const auto address = t.find_column("address");
    const auto source = t.find_column("source");
    for (const auto& row : t.rows) {
      PoiRecord r;
      r.id = row[id];
      r.type_name = row[type];
      if (lon && lat && !row[*lon].empty() && !row[*lat].empty())
        r.location = LonLat{csv::to_double(row[*lon], "lon"), csv::to_double(row[*lat], "lat")};
      if (address && !row[*address].empty()) r.address = row[*address];
      r.source = source ? row[*source] : path.filename().string();
      out.push_back(std::move(r));
    }
    return out;
  }

  const auto doc = geojson::read_file(path);
  const auto& feats = geojson::features(doc, path.string());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& f = feats[i];
    const auto props = geojson::string_properties(f);
    PoiRecord r;
    r.id = geojson::feature_id(f, "poi-" + std::to_string(i));
    auto type = props.find("type");
    if (type == props.end()) throw InputError(path.string() + ": POI " + r.id + " has no 'type' property");
    r.type_name = type->second;
    if (auto a = props.find("address"); a != props.end() && !a->second.empty()) r.address = a->second;
    auto s = props.find("source");
    r.source = s != props.end() ? s->second : path.filename().string();
    const auto& geom = f.value("geometry", geojson::Json());
    if (geom.is_object()) {
      if (geom.value("type", "") != "Point") throw InputError(path.string() + ": POI " + r.id + " is not a Point");
      r.location = geojson::position(geom["coordinates"]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

PoiLoadResult load_pois(std::span<const PoiRecord> records, const ServiceTaxonomy& taxonomy, const Projection& proj,
                        Geocoder* geocoder, const GeocodeOptions& options) {
  std::vector<std::size_t> types(records.size());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PoiRecord& r = records[i];
    types[i] = taxonomy.type_index(r.type_name);
    if (taxonomy.is_green_type(types[i]))
      throw TaxonomyError("POI " + r.id + " uses the green-area type '" + r.type_name +
                          "'; green areas are polygons, not points");
    if (!seen.insert(r.id).second) throw InputError("duplicate POI id '" + r.id + "'");
  }

  // Geocode address-only records with bounded parallelism.
  std::vector<std::optional<LonLat>> located(records.size());
  std::vector<std::string> failure(records.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].location) {
      located[i] = records[i].location;
    } else if (!records[i].address) {
      failure[i] = "no-location";
    } else if (!geocoder) {
      failure[i] = "no-geocoder";
    } else {
      pending.push_back(i);
    }
  }
  parallel_for(pending.size(), static_cast<std::size_t>(std::max(1, options.concurrency)), [&](std::size_t k) {
    const std::size_t i = pending[k];
    int delay = options.backoff_ms;
    for (int attempt = 1;; ++attempt) {
      try {
        auto hit = geocoder->geocode(*records[i].address);
        if (hit)
          located[i] = hit->location;
        else
          failure[i] = "geocode-not-found";
        return;
      } catch (const std::exception& e) {
        if (attempt >= options.max_attempts) {
          failure[i] = std::string("geocode-failed: ") + e.what();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
      }
    }
  });

  PoiLoadResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PoiRecord& r = records[i];
    if (!located[i]) {
      result.rejects.push_back({r.id, failure[i]});
      continue;
    }
    ServicePoint s;
    s.id = r.id;
    s.type = types[i];
    s.location = *located[i];
    s.source = r.source;
    try {
      s.position = proj.forward(s.location);
    } catch (const InputError&) {
      result.rejects.push_back({r.id, "invalid-coordinates"});
      continue;
    }
    result.services.push_back(std::move(s));
  }
  if (!result.rejects.empty()) spdlog::warn("{} POI records could not be located", result.rejects.size());
  return result;
}

void write_rejects_csv(const std::filesystem::path& path, std::span<const PoiReject> rejects) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  csv::write_row(out, {"id", "reason"});
  for (const PoiReject& r : rejects) csv::write_row(out, {r.id, r.reason});
}

// ------------------------------------------------------------------- greens

std::vector<GreenArea> read_greens(const std::filesystem::path& path, const Projection& proj) {
  const auto doc = geojson::read_file(path);
  const auto& feats = geojson::features(doc, path.string());
  std::vector<GreenArea> out;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& f = feats[i];
    const std::string id = geojson::feature_id(f, "green-" + std::to_string(i));
    const auto props = geojson::string_properties(f);
    std::vector<geojson::LonLatPolygon> parts;
    try {
      parts = geojson::polygons(f.value("geometry", geojson::Json()));
    } catch (const InputError& e) {
      spdlog::warn("green area {} skipped: {}", id, e.what());
      continue;
    }
    for (std::size_t k = 0; k < parts.size(); ++k) {
      GreenArea g;
      g.id = parts.size() == 1 ? id : id + "#" + std::to_string(k);
      if (auto n = props.find("name"); n != props.end()) g.name = n->second;
      try {
        g.polygon = geojson::project(parts[k], proj);
        geo::require_valid(g.polygon);
      } catch (const Error& e) {
        spdlog::warn("green area {} skipped: {}", g.id, e.what());
        continue;
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

// ------------------------------------------------------------- walk network

bool WalkPredicate::operator()(const std::map<std::string, std::string>& tags) const {
  auto is = [&](const char* key, std::initializer_list<const char*> values) {
    auto it = tags.find(key);
    if (it == tags.end()) return false;
    return std::any_of(values.begin(), values.end(), [&](const char* v) { return it->second == v; });
  };
  if (is("walkable", {"false", "0", "no"})) return false;
  if (is("foot", {"no"})) return false;
  auto hw = tags.find("highway");
  return hw == tags.end() || !excluded_highways.contains(hw->second);
}

namespace {

struct NodeTable {
  WalkNetworkSource& net;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t intern(const std::string& id, LonLat where) {
    auto [it, inserted] = index.emplace(id, net.nodes.size());
    if (inserted) net.nodes.push_back({id, where});
    return it->second;
  }
};

std::optional<double> length_property(const std::map<std::string, std::string>& tags, const std::string& where) {
  auto it = tags.find("length");
  if (it == tags.end() || it->second.empty()) return std::nullopt;
  const double len = csv::to_double(it->second, "length");
  if (!(len > 0.0)) throw InputError(where + ": edge length must be positive");
  return len;
}

}  // namespace

WalkNetworkSource load_walk_network(const std::filesystem::path& path, const WalkPredicate& walkable) {
  const auto doc = geojson::read_file(path);
  const auto& feats = geojson::features(doc, path.string());
  WalkNetworkSource net;
  NodeTable nodes{net, {}};
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& f = feats[i];
    const auto& geom = f.value("geometry", geojson::Json());
    if (!geom.is_object() || geom.value("type", "") != "LineString")
      throw InputError(path.string() + ": network feature " + std::to_string(i) + " is not a LineString");
    const auto& coords = geom["coordinates"];
    if (!coords.is_array() || coords.size() < 2)
      throw InputError(path.string() + ": network feature " + std::to_string(i) + " has fewer than 2 positions");
    auto tags = geojson::string_properties(f);
    auto endpoint = [&](const char* a, const char* b) -> std::string {
      if (auto it = tags.find(a); it != tags.end()) return it->second;
      if (auto it = tags.find(b); it != tags.end()) return it->second;
      throw InputError(path.string() + ": network feature " + std::to_string(i) + " lacks node id '" + a + "'");
    };
    const std::string u = endpoint("u", "from");
    const std::string v = endpoint("v", "to");
    if (!walkable(tags)) {
      ++net.dropped_non_walkable;
      continue;
    }
    NetworkEdge e;
    for (const auto& c : coords) e.geometry.push_back(geojson::position(c));
    e.from = nodes.intern(u, e.geometry.front());
    e.to = nodes.intern(v, e.geometry.back());
    e.length = length_property(tags, path.string());
    e.tags = std::move(tags);
    net.edges.push_back(std::move(e));
  }
  if (net.edges.empty()) throw InputError(path.string() + ": walk network has no walkable edges");
  return net;
}

WalkNetworkSource load_walk_network_csv(const std::filesystem::path& nodes_path,
                                        const std::filesystem::path& edges_path, const WalkPredicate& walkable) {
  WalkNetworkSource net;
  NodeTable nodes{net, {}};
  const csv::Table nt = read_csv_file(nodes_path);
  const std::size_t nid = nt.column("id");
  const std::size_t nlon = nt.column("lon");
  const std::size_t nlat = nt.column("lat");
  for (const auto& row : nt.rows)
    nodes.intern(row[nid], LonLat{csv::to_double(row[nlon], "lon"), csv::to_double(row[nlat], "lat")});

  const csv::Table et = read_csv_file(edges_path);
  const std::size_t eu = et.column("u");
  const std::size_t ev = et.column("v");
  for (const auto& row : et.rows) {
    std::map<std::string, std::string> tags;
    for (std::size_t c = 0; c < et.header.size(); ++c)
      if (c != eu && c != ev && !row[c].empty()) tags[et.header[c]] = row[c];
    auto lookup = [&](const std::string& id) {
      auto it = nodes.index.find(id);
      if (it == nodes.index.end())
        throw InputError(edges_path.string() + ": dangling edge reference to node '" + id + "'");
      return it->second;
    };
    const std::size_t from = lookup(row[eu]);
    const std::size_t to = lookup(row[ev]);
    if (!walkable(tags)) {
      ++net.dropped_non_walkable;
      continue;
    }
    NetworkEdge e;
    e.from = from;
    e.to = to;
    e.length = length_property(tags, edges_path.string());
    e.tags = std::move(tags);
    net.edges.push_back(std::move(e));
  }
  if (net.edges.empty()) throw InputError(edges_path.string() + ": walk network has no walkable edges");
  return net;
}

void resolve_edge_lengths(WalkNetworkSource& network, const Projection& proj) {
  std::size_t dropped = 0;
  std::vector<NetworkEdge> kept;
  kept.reserve(network.edges.size());
  for (NetworkEdge& e : network.edges) {
    if (e.from >= network.nodes.size() || e.to >= network.nodes.size())
      throw InputError("dangling edge reference in walk network");
    if (!e.length) {
      std::vector<LonLat> pts = e.geometry;
      if (pts.empty()) pts = {network.nodes[e.from].location, network.nodes[e.to].location};
      double len = 0.0;
      geo::Point prev = proj.forward(pts.front());
      for (std::size_t i = 1; i < pts.size(); ++i) {
        const geo::Point cur = proj.forward(pts[i]);
        len += geo::bg::distance(prev, cur);
        prev = cur;
      }
      if (!(len > 0.0)) {
        ++dropped;
        continue;
      }
      e.length = len;
    }
    kept.push_back(std::move(e));
  }
  if (dropped) spdlog::warn("dropped {} zero-length walk edges", dropped);
  network.edges = std::move(kept);
  if (network.edges.empty()) throw InputError("walk network has no edges of positive length");
}

}  // namespace decamin
