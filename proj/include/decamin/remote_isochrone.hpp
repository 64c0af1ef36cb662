#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decamin/geojson.hpp"
#include "decamin/isochrone.hpp"
#include "decamin/model.hpp"
#include "decamin/projection.hpp"

namespace decamin {

struct RemoteIsochroneOptions {
  std::string endpoint;
  std::string api_key;
  std::string provider = "ors";
  std::filesystem::path cache_dir;  // empty disables the cache
  int timeout_s = 30;
  int max_attempts = 3;
  int backoff_ms = 200;
  std::size_t concurrency = 2;

  /// Endpoint from DECAMIN_ROUTING_URL and key from DECAMIN_ROUTING_KEY.
  /// Throws ConfigError when the URL variable is unset.
  static RemoteIsochroneOptions from_env();
};

/// Client for an ORS-compatible isochrone service:
///   POST <endpoint>  {"locations": [[lon, lat]], "range_seconds": N, "profile": "walking"}
/// answering a GeoJSON FeatureCollection, Feature or Polygon geometry.
/// Successful polygons are cached on disk, one file per cache_key().
class RemoteIsochroneClient {
 public:
  explicit RemoteIsochroneClient(RemoteIsochroneOptions options);

  const RemoteIsochroneOptions& options() const { return options_; }

  /// "<provider>_<round(lon*1e6)>_<round(lat*1e6)>_<round(budget_s)>".
  std::string cache_key(LonLat origin, double budget_s) const;

  /// nullopt after every attempt failed (transport error, non-200 status
  /// or unparseable body).
  std::optional<geojson::LonLatPolygon> fetch(LonLat origin, double budget_s);

  std::size_t network_calls() const { return calls_.load(); }
  std::size_t cache_hits() const { return hits_.load(); }

 private:
  std::optional<geojson::LonLatPolygon> request(LonLat origin, double budget_s);

  RemoteIsochroneOptions options_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> hits_{0};
};

/// Parses the first polygon of a service response; MultiPolygon answers keep
/// the part with the largest outer ring. Throws InputError when none is found.
geojson::LonLatPolygon parse_isochrone_response(const geojson::Json& doc);

/// Remote polygon for one building with the local centroid-containment rule.
Isochrone fetch_isochrone_remote(RemoteIsochroneClient& client, const Building& b, const Projection& proj,
                                 double budget_s);

std::vector<Isochrone> compute_isochrones_remote(RemoteIsochroneClient& client, std::span<const Building> buildings,
                                                 const Projection& proj, double budget_s);

}  // namespace decamin
