#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "decamin/error.hpp"
#include "decamin/geocoder.hpp"
#include "decamin/ingest.hpp"

using namespace decamin;
namespace fs = std::filesystem;

namespace {

const Projection kProj({11.24, 43.77});

fs::path scratch_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("decamin-ingest-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

geojson::LonLatPolygon square_ll(double x, double y, double side) {
  geojson::LonLatPolygon p;
  for (auto [dx, dy] : {std::pair{0.0, 0.0}, {side, 0.0}, {side, side}, {0.0, side}, {0.0, 0.0}})
    p.outer.push_back(kProj.inverse({x + dx, y + dy}));
  return p;
}

RawBuilding raw(const std::string& id, double x, double y, double side, std::map<std::string, std::string> tags = {}) {
  return {id, square_ll(x, y, side), std::move(tags)};
}

class FakeGeocoder : public Geocoder {
 public:
  int failures_left = 0;
  std::optional<GeocodeResult> geocode(const std::string& address) override {
    if (failures_left > 0) {
      --failures_left;
      throw std::runtime_error("transient");
    }
    if (address == "Via Roma 1") return GeocodeResult{{11.241, 43.771}, 1.0};
    return std::nullopt;
  }
};

}  // namespace

TEST(Filter, DropsByTagAreaAndZone) {
  std::vector<RawBuilding> in{
      raw("home", 0, 0, 10),
      raw("school", 50, 0, 20, {{"amenity", "school"}}),
      raw("church", 100, 0, 20, {{"building", "church"}}),
      raw("shed", 150, 0, 5),  // 25 m2
      raw("plant", 500, 500, 20),
      raw("house", 200, 0, 6),  // 36 m2
  };
  FilterRules rules;
  rules.excluded_zones.push_back(geo::make_polygon({{450, 450}, {600, 450}, {600, 600}, {450, 600}}));
  auto r = filter_residential(in, rules, kProj);
  ASSERT_EQ(r.buildings.size(), 2u);
  EXPECT_EQ(r.buildings[0].id, "home");
  EXPECT_EQ(r.buildings[1].id, "house");
  EXPECT_EQ(r.report.input, 6u);
  EXPECT_EQ(r.report.kept, 2u);
  EXPECT_EQ(r.report.dropped.at("excluded-tag"), 2u);
  EXPECT_EQ(r.report.dropped.at("min-area"), 1u);
  EXPECT_EQ(r.report.dropped.at("industrial-zone"), 1u);
  EXPECT_NEAR(r.buildings[0].centroid.x(), 5.0, 1e-6);
  EXPECT_NEAR(r.buildings[0].centroid.y(), 5.0, 1e-6);
  EXPECT_DOUBLE_EQ(r.buildings[0].population, 1.0);
}

TEST(Filter, InvalidGeometryCountedNotFatal) {
  RawBuilding bow{"bow", {}, {}};
  for (auto [x, y] : {std::pair{0.0, 0.0}, {20.0, 20.0}, {20.0, 0.0}, {0.0, 20.0}, {0.0, 0.0}})
    bow.footprint.outer.push_back(kProj.inverse({x, y}));
  std::vector<RawBuilding> in{bow, raw("ok", 100, 100, 10)};
  auto r = filter_residential(in, {}, kProj);
  EXPECT_EQ(r.buildings.size(), 1u);
  EXPECT_EQ(r.report.invalid, 1u);
}

TEST(Filter, AreaProportionalPopulation) {
  std::vector<RawBuilding> in{raw("a", 0, 0, 10), raw("b", 20, 0, 20), raw("c", 500, 0, 10)};
  PopulationPolicy pop;
  pop.mode = PopulationPolicy::Mode::AreaProportional;
  pop.zones.push_back({geo::make_polygon({{-10, -10}, {100, -10}, {100, 100}, {-10, 100}}), 50.0});
  auto r = filter_residential(in, {}, kProj, pop);
  ASSERT_EQ(r.buildings.size(), 3u);
  EXPECT_NEAR(r.buildings[0].population, 10.0, 1e-6);
  EXPECT_NEAR(r.buildings[1].population, 40.0, 1e-6);
  EXPECT_DOUBLE_EQ(r.buildings[2].population, 0.0);
}

TEST(Buildings, ReadsLargestPartOfMultiPolygon) {
  auto dir = scratch_dir("mp");
  auto small = square_ll(0, 0, 5);
  auto big = square_ll(100, 0, 30);
  nlohmann::json ring_s = nlohmann::json::array(), ring_b = nlohmann::json::array();
  for (auto& p : small.outer) ring_s.push_back({p.lon, p.lat});
  for (auto& p : big.outer) ring_b.push_back({p.lon, p.lat});
  nlohmann::json doc = {{"type", "FeatureCollection"},
                        {"features",
                         {{{"type", "Feature"},
                           {"properties", {{"id", "m1"}, {"building", "yes"}}},
                           {"geometry", {{"type", "MultiPolygon"}, {"coordinates", {{ring_s}, {ring_b}}}}}}}}};
  write_text(dir / "b.geojson", doc.dump());
  auto b = read_buildings(dir / "b.geojson");
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].id, "m1");
  EXPECT_EQ(b[0].tags.at("building"), "yes");
  auto r = filter_residential(b, {}, kProj);
  ASSERT_EQ(r.buildings.size(), 1u);
  EXPECT_NEAR(geo::area(r.buildings[0].footprint), 900.0, 1e-3);
}

TEST(Pois, CsvAndGeocoding) {
  auto dir = scratch_dir("poi");
  write_text(dir / "p.csv",
             "id,type,lon,lat,address\n"
             "a,cinema,11.2405,43.7705,\n"
             "b,bank,,,Via Roma 1\n"
             "c,bank,,,Nowhere 9\n"
             "d,bank,,,\n");
  auto recs = read_pois(dir / "p.csv");
  ASSERT_EQ(recs.size(), 4u);
  FakeGeocoder geo;
  geo.failures_left = 1;  // first call fails, retried
  GeocodeOptions opt;
  opt.concurrency = 1;
  opt.backoff_ms = 1;
  auto r = load_pois(recs, default_taxonomy(), kProj, &geo, opt);
  ASSERT_EQ(r.services.size(), 2u);
  EXPECT_EQ(r.services[0].id, "a");
  EXPECT_EQ(r.services[1].id, "b");
  EXPECT_DOUBLE_EQ(r.services[1].location.lon, 11.241);
  EXPECT_EQ(r.services[0].type, default_taxonomy().type_index("cinema"));
  ASSERT_EQ(r.rejects.size(), 2u);
  std::map<std::string, std::string> why;
  for (auto& x : r.rejects) why[x.id] = x.reason;
  EXPECT_EQ(why["c"], "geocode-not-found");
  EXPECT_EQ(why["d"], "no-location");

  write_rejects_csv(dir / "rejects.csv", r.rejects);
  std::ifstream in(dir / "rejects.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "id,reason");
}

TEST(Pois, PersistentGeocoderFailureIsReject) {
  std::vector<PoiRecord> recs{{"x", "bank", std::nullopt, "Via Roma 1", "t"}};
  FakeGeocoder geo;
  geo.failures_left = 10;
  GeocodeOptions opt;
  opt.max_attempts = 3;
  opt.backoff_ms = 1;
  auto r = load_pois(recs, default_taxonomy(), kProj, &geo, opt);
  EXPECT_TRUE(r.services.empty());
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason.rfind("geocode-failed", 0), 0u);
  EXPECT_EQ(geo.failures_left, 7);
}

TEST(Pois, UnknownTypeIsHardError) {
  std::vector<PoiRecord> recs{{"x", "casino", LonLat{11.24, 43.77}, std::nullopt, "t"}};
  try {
    load_pois(recs, default_taxonomy(), kProj);
    FAIL();
  } catch (const TaxonomyError& e) {
    EXPECT_NE(std::string(e.what()).find("casino"), std::string::npos);
  }
}

TEST(Pois, GreenTypeAndDuplicatesRejected) {
  std::vector<PoiRecord> green{{"g", "green_area", LonLat{11.24, 43.77}, std::nullopt, "t"}};
  EXPECT_THROW(load_pois(green, default_taxonomy(), kProj), TaxonomyError);
  std::vector<PoiRecord> dup{{"x", "bank", LonLat{11.24, 43.77}, std::nullopt, "t"},
                             {"x", "bank", LonLat{11.25, 43.77}, std::nullopt, "t"}};
  EXPECT_THROW(load_pois(dup, default_taxonomy(), kProj), InputError);
}

TEST(Pois, GeoJsonInput) {
  auto dir = scratch_dir("pgj");
  write_text(dir / "p.geojson", R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"id":"k1","type":"kindergarten","source":"osm"},
     "geometry":{"type":"Point","coordinates":[11.24,43.77]}}]})");
  auto recs = read_pois(dir / "p.geojson");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].id, "k1");
  EXPECT_EQ(recs[0].source, "osm");
  ASSERT_TRUE(recs[0].location);
  EXPECT_DOUBLE_EQ(recs[0].location->lat, 43.77);
}

TEST(Geocoder, LookupTable) {
  auto dir = scratch_dir("geo");
  write_text(dir / "g.csv", "address,lon,lat\n\"Piazza, 2\",11.1,43.1\n");
  LookupGeocoder g(dir / "g.csv");
  EXPECT_EQ(g.size(), 1u);
  auto hit = g.geocode("Piazza, 2");
  ASSERT_TRUE(hit);
  EXPECT_DOUBLE_EQ(hit->location.lon, 11.1);
  EXPECT_FALSE(g.geocode("elsewhere"));
}

TEST(Network, WalkPredicate) {
  WalkPredicate w;
  EXPECT_TRUE(w({}));
  EXPECT_TRUE(w({{"highway", "footway"}}));
  EXPECT_FALSE(w({{"highway", "motorway"}}));
  EXPECT_FALSE(w({{"highway", "motorway_link"}}));
  EXPECT_FALSE(w({{"foot", "no"}}));
  EXPECT_FALSE(w({{"walkable", "false"}}));
}

TEST(Network, CsvLoading) {
  auto dir = scratch_dir("net");
  write_text(dir / "n.csv", "id,lon,lat\na,11.24,43.77\nb,11.241,43.77\nc,11.242,43.77\n");
  write_text(dir / "e.csv", "u,v,length,highway\na,b,80,residential\nb,c,,motorway\n");
  auto net = load_walk_network_csv(dir / "n.csv", dir / "e.csv");
  EXPECT_EQ(net.nodes.size(), 3u);
  ASSERT_EQ(net.edges.size(), 1u);
  EXPECT_EQ(net.dropped_non_walkable, 1u);
  EXPECT_DOUBLE_EQ(*net.edges[0].length, 80.0);

  write_text(dir / "bad.csv", "u,v\na,z\n");
  EXPECT_THROW(load_walk_network_csv(dir / "n.csv", dir / "bad.csv"), InputError);
}

TEST(Network, GeoJsonLoading) {
  auto dir = scratch_dir("netgj");
  write_text(dir / "w.geojson", R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"u":"1","v":"2","highway":"footway"},
     "geometry":{"type":"LineString","coordinates":[[11.24,43.77],[11.2405,43.7701],[11.241,43.77]]}},
    {"type":"Feature","properties":{"u":"2","v":"3","highway":"motorway"},
     "geometry":{"type":"LineString","coordinates":[[11.241,43.77],[11.242,43.77]]}}]})");
  auto net = load_walk_network(dir / "w.geojson");
  EXPECT_EQ(net.nodes.size(), 2u);
  ASSERT_EQ(net.edges.size(), 1u);
  EXPECT_EQ(net.edges[0].geometry.size(), 3u);
  EXPECT_FALSE(net.edges[0].length);
  resolve_edge_lengths(net, kProj);
  ASSERT_TRUE(net.edges[0].length);
  EXPECT_GT(*net.edges[0].length, 80.0);
}
