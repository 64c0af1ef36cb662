#include "decamin/geocoder.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "decamin/csv.hpp"
#include "decamin/error.hpp"
#include "decamin/http.hpp"

namespace decamin {

LookupGeocoder::LookupGeocoder(const std::filesystem::path& table) {
  std::ifstream in(table);
  if (!in) throw InputError("cannot open geocoder lookup " + table.string());
  const csv::Table rows = csv::read(in, table.string());
  const std::size_t address = rows.column("address");
  const std::size_t lon = rows.column("lon");
  const std::size_t lat = rows.column("lat");
  const auto confidence = rows.find_column("confidence");
  for (const auto& row : rows.rows) {
    GeocodeResult r;
    r.location = LonLat{csv::to_double(row.at(lon), "lon"), csv::to_double(row.at(lat), "lat")};
    if (confidence && !row.at(*confidence).empty()) r.confidence = csv::to_double(row.at(*confidence), "confidence");
    table_[row.at(address)] = r;
  }
}

std::optional<GeocodeResult> LookupGeocoder::geocode(const std::string& address) {
  auto it = table_.find(address);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

HttpGeocoder::HttpGeocoder(std::string endpoint, std::string api_key, int timeout_s)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_s_(timeout_s) {}

std::optional<HttpGeocoder> HttpGeocoder::from_env() {
  const char* url = std::getenv("DECAMIN_GEOCODER_URL");
  if (!url || !*url) return std::nullopt;
  const char* key = std::getenv("DECAMIN_GEOCODER_KEY");
  return HttpGeocoder(url, key ? key : "");
}

std::optional<GeocodeResult> HttpGeocoder::geocode(const std::string& address) {
  http::Client client(endpoint_, timeout_s_);
  std::map<std::string, std::string> query{{"address", address}};
  if (!api_key_.empty()) query["key"] = api_key_;
  const http::Response res = client.get(query);
  if (res.status == 404) return std::nullopt;
  if (res.status != 200) throw http::TransportError("geocoder answered HTTP " + std::to_string(res.status));
  try {
    const auto doc = nlohmann::json::parse(res.body);
    GeocodeResult r;
    r.location = LonLat{doc.at("lon").get<double>(), doc.at("lat").get<double>()};
    r.confidence = doc.value("confidence", 1.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw http::TransportError(std::string("malformed geocoder response: ") + e.what());
  }
}

}  // namespace decamin
