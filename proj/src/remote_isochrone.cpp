#include "decamin/remote_isochrone.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "decamin/error.hpp"
#include "decamin/http.hpp"
#include "decamin/parallel.hpp"

namespace decamin {

RemoteIsochroneOptions RemoteIsochroneOptions::from_env() {
  const char* url = std::getenv("DECAMIN_ROUTING_URL");
  if (!url || !*url) throw ConfigError("remote provider selected but DECAMIN_ROUTING_URL is not set");
  RemoteIsochroneOptions o;
  o.endpoint = url;
  if (const char* key = std::getenv("DECAMIN_ROUTING_KEY")) o.api_key = key;
  return o;
}

RemoteIsochroneClient::RemoteIsochroneClient(RemoteIsochroneOptions options) : options_(std::move(options)) {
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  if (options_.concurrency < 1) options_.concurrency = 1;
}

std::string RemoteIsochroneClient::cache_key(LonLat origin, double budget_s) const {
  std::ostringstream key;
  key << options_.provider << '_' << std::llround(origin.lon * 1e6) << '_' << std::llround(origin.lat * 1e6) << '_'
      << std::llround(budget_s);
  return key.str();
}

namespace {

double ring_extent(const std::vector<LonLat>& ring) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) a += ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat;
  return std::abs(a);
}

}  // namespace

geojson::LonLatPolygon parse_isochrone_response(const geojson::Json& doc) {
  try {
    const geojson::Json* geometry = &doc;
    const std::string type = doc.at("type").get<std::string>();
    if (type == "FeatureCollection") {
      const auto& features = doc.at("features");
      if (!features.is_array() || features.empty()) throw InputError("isochrone response has no features");
      geometry = &features.at(0).at("geometry");
    } else if (type == "Feature") {
      geometry = &doc.at("geometry");
    }
    auto parts = geojson::polygons(*geometry);
    if (parts.empty()) throw InputError("isochrone response has no polygon");
    std::size_t best = 0;
    for (std::size_t i = 1; i < parts.size(); ++i)
      if (ring_extent(parts[i].outer) > ring_extent(parts[best].outer)) best = i;
    if (parts[best].outer.size() < 4) throw InputError("isochrone polygon ring too short");
    return parts[best];
  } catch (const geojson::Json::exception& e) {
    throw InputError(std::string("malformed isochrone response: ") + e.what());
  }
}

std::optional<geojson::LonLatPolygon> RemoteIsochroneClient::request(LonLat origin, double budget_s) {
  geojson::Json body = {{"locations", geojson::Json::array({geojson::Json::array({origin.lon, origin.lat})})},
                        {"range_seconds", budget_s},
                        {"profile", "walking"}};
  http::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", options_.api_key);
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms * (1 << (attempt - 1))));
    ++calls_;
    try {
      http::Client client(options_.endpoint, options_.timeout_s);
      const http::Response res = client.post_json(body.dump(), headers);
      if (res.status != 200) {
        spdlog::warn("isochrone service answered HTTP {} (attempt {}/{})", res.status, attempt + 1,
                     options_.max_attempts);
        continue;
      }
      return parse_isochrone_response(geojson::Json::parse(res.body));
    } catch (const geojson::Json::exception& e) {
      spdlog::warn("isochrone response not JSON (attempt {}/{}): {}", attempt + 1, options_.max_attempts, e.what());
    } catch (const Error& e) {
      spdlog::warn("isochrone request failed (attempt {}/{}): {}", attempt + 1, options_.max_attempts, e.what());
    }
  }
  return std::nullopt;
}

std::optional<geojson::LonLatPolygon> RemoteIsochroneClient::fetch(LonLat origin, double budget_s) {
  std::filesystem::path cached;
  if (!options_.cache_dir.empty()) {
    cached = options_.cache_dir / (cache_key(origin, budget_s) + ".geojson");
    if (std::filesystem::exists(cached)) {
      try {
        auto poly = parse_isochrone_response(geojson::read_file(cached));
        ++hits_;
        return poly;
      } catch (const Error& e) {
        spdlog::warn("ignoring unreadable cache entry {}: {}", cached.string(), e.what());
      }
    }
  }
  auto poly = request(origin, budget_s);
  if (poly && !cached.empty()) geojson::write_file(cached, geojson::polygon_geometry(*poly));
  return poly;
}

Isochrone fetch_isochrone_remote(RemoteIsochroneClient& client, const Building& b, const Projection& proj,
                                 double budget_s) {
  Isochrone iso;
  iso.building_id = b.id;
  auto poly = client.fetch(proj.inverse(b.centroid), budget_s);
  if (!poly) {
    iso.status = IsochroneStatus::RemoteFailed;
    return iso;
  }
  try {
    iso.polygon = geojson::project(*poly, proj);
    geo::require_valid(iso.polygon);
  } catch (const Error& e) {
    spdlog::warn("building {}: unusable remote polygon: {}", b.id, e.what());
    iso.polygon.clear();
    iso.status = IsochroneStatus::RemoteFailed;
    return iso;
  }
  if (!geo::contains(iso.polygon, b.centroid)) iso.status = IsochroneStatus::CentroidOutside;
  return iso;
}

std::vector<Isochrone> compute_isochrones_remote(RemoteIsochroneClient& client, std::span<const Building> buildings,
                                                 const Projection& proj, double budget_s) {
  std::vector<Isochrone> out(buildings.size());
  parallel_for(buildings.size(), client.options().concurrency,
               [&](std::size_t i) { out[i] = fetch_isochrone_remote(client, buildings[i], proj, budget_s); });
  return out;
}

}  // namespace decamin
