#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "decamin/projection.hpp"

namespace decamin {

struct GeocodeResult {
  LonLat location;
  double confidence = 1.0;
};

/// Address -> coordinates. Implementations must be safe to call from several
/// threads. Return nullopt when the address is unknown; throw on transport
/// failure so the caller can retry.
class Geocoder {
 public:
  virtual ~Geocoder() = default;
  virtual std::optional<GeocodeResult> geocode(const std::string& address) = 0;
};

/// Offline geocoder backed by a CSV lookup table: address,lon,lat[,confidence].
class LookupGeocoder : public Geocoder {
 public:
  explicit LookupGeocoder(const std::filesystem::path& table);
  std::optional<GeocodeResult> geocode(const std::string& address) override;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, GeocodeResult> table_;
};

/// HTTP geocoder: GET <endpoint>?address=<text>[&key=<key>] answering
/// {"lon": .., "lat": .., "confidence": ..}. 404 means not found.
class HttpGeocoder : public Geocoder {
 public:
  HttpGeocoder(std::string endpoint, std::string api_key, int timeout_s = 30);

  /// Reads DECAMIN_GEOCODER_URL and DECAMIN_GEOCODER_KEY; nullopt when the
  /// URL variable is unset.
  static std::optional<HttpGeocoder> from_env();

  std::optional<GeocodeResult> geocode(const std::string& address) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  int timeout_s_;
};

}  // namespace decamin
