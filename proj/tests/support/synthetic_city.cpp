#include "synthetic_city.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "decamin/taxonomy.hpp"

namespace fixture {

namespace {

using nlohmann::json;

constexpr double kMetersPerDegree = 111'320.0;

struct Frame {
  double lon0, lat0;
  json pos(double x, double y) const {
    const double lon = lon0 + x / (kMetersPerDegree * std::cos(lat0 * M_PI / 180.0));
    const double lat = lat0 + y / kMetersPerDegree;
    return json::array({std::round(lon * 1e7) / 1e7, std::round(lat * 1e7) / 1e7});
  }
  std::string text(double x, double y) const {
    const json p = pos(x, y);
    return fmt::format("{:.7f},{:.7f}", p[0].get<double>(), p[1].get<double>());
  }
};

json rectangle(const Frame& f, double cx, double cy, double w, double h) {
  json ring = json::array();
  ring.push_back(f.pos(cx - w / 2, cy - h / 2));
  ring.push_back(f.pos(cx + w / 2, cy - h / 2));
  ring.push_back(f.pos(cx + w / 2, cy + h / 2));
  ring.push_back(f.pos(cx - w / 2, cy + h / 2));
  ring.push_back(ring[0]);
  return {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

std::filesystem::path write_city(const std::filesystem::path& dir, const CityOptions& o) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(o.seed);
  auto uniform = [&](double a, double b) { return a + (b - a) * std::generate_canonical<double, 53>(rng); };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const Frame f{o.lon0, o.lat0};
  const double width = (o.grid_nx - 1) * o.spacing_m;
  const double height = (o.grid_ny - 1) * o.spacing_m;

  // Network: a regular grid, plus a motorway that pedestrians may not use.
  std::string nodes = "id,lon,lat\n";
  std::string edges = "u,v,highway\n";
  auto node_id = [&](int i, int j) { return fmt::format("n{}_{}", i, j); };
  for (int j = 0; j < o.grid_ny; ++j)
    for (int i = 0; i < o.grid_nx; ++i)
      nodes += node_id(i, j) + "," + f.text(i * o.spacing_m, j * o.spacing_m) + "\n";
  for (int j = 0; j < o.grid_ny; ++j)
    for (int i = 0; i < o.grid_nx; ++i) {
      if (i + 1 < o.grid_nx) edges += node_id(i, j) + "," + node_id(i + 1, j) + ",residential\n";
      if (j + 1 < o.grid_ny) edges += node_id(i, j) + "," + node_id(i, j + 1) + ",footway\n";
    }
  if (o.with_edge_cases) edges += node_id(0, 0) + "," + node_id(o.grid_nx - 1, o.grid_ny - 1) + ",motorway\n";
  write(dir / "nodes.csv", nodes);
  write(dir / "edges.csv", edges);

  // Buildings sit beside a street with their centroid 8-22 m from it.
  json features = json::array();
  auto add_building = [&](const std::string& id, json geometry, json props) {
    props["id"] = id;
    props["building"] = props.value("building", "residential");
    features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", geometry}});
  };
  for (int b = 0; b < o.buildings; ++b) {
    const bool horizontal = rng() % 2 == 0;
    double x, y;
    const double offset = uniform(8.0, 22.0) * (rng() % 2 ? 1.0 : -1.0);
    if (horizontal) {
      x = uniform(0.0, width);
      y = static_cast<double>(pick(static_cast<std::size_t>(o.grid_ny))) * o.spacing_m + offset;
    } else {
      x = static_cast<double>(pick(static_cast<std::size_t>(o.grid_nx))) * o.spacing_m + offset;
      y = uniform(0.0, height);
    }
    add_building(fmt::format("b{:05d}", b), rectangle(f, x, y, uniform(8.0, 14.0), uniform(8.0, 14.0)), json::object());
  }
  if (o.with_edge_cases) {
    add_building("x-school", rectangle(f, width / 2 + 15, height / 2, 20, 20), {{"amenity", "school"}});
    add_building("x-tiny", rectangle(f, width / 2 + 15, 15, 4, 4), json::object());
    add_building("x-far", rectangle(f, width + 400, height / 2, 12, 12), json::object());
    add_building("x-yard", rectangle(f, o.spacing_m * 0.5, o.spacing_m * 0.5, 10, 10), json::object());
  }
  write(dir / "buildings.geojson", json({{"type", "FeatureCollection"}, {"features", features}}).dump(1) + "\n");

  // POIs of every non-green type, cycling through the taxonomy first.
  const auto& tax = decamin::default_taxonomy();
  std::vector<std::string> types;
  for (std::size_t t = 0; t < tax.type_count(); ++t)
    if (!tax.is_green_type(t)) types.push_back(tax.types()[t].name);
  std::string pois = "id,type,lon,lat,address,source\n";
  for (int p = 0; p < o.pois; ++p) {
    const std::string& type = p < static_cast<int>(types.size()) ? types[static_cast<std::size_t>(p)] : types[pick(types.size())];
    pois += fmt::format("p{:05d},{},{},,synthetic\n", p, type, f.text(uniform(0.0, width), uniform(0.0, height)));
  }
  std::string geocoder = "address,lon,lat,confidence\n";
  if (o.with_edge_cases) {
    pois += "p-addr,post_office,,,\"Via Roma 1, Firenze\",registry\n";
    geocoder += "\"Via Roma 1, Firenze\"," + f.text(width * 0.25, height * 0.5) + ",0.9\n";
    pois += "p-lost,bank,,,\"Nowhere 9\",registry\n";
  }
  write(dir / "pois.csv", pois);
  write(dir / "geocoder.csv", geocoder);

  json greens = json::array();
  for (std::size_t g = 0; g < o.greens.size(); ++g) {
    const auto [w, h] = o.greens[g];
    const double cx = width * (0.3 + 0.4 * static_cast<double>(g % 2));
    const double cy = height * (0.3 + 0.4 * static_cast<double>((g / 2) % 2));
    greens.push_back({{"type", "Feature"},
                      {"properties", {{"id", fmt::format("g{}", g)}, {"name", fmt::format("Park {}", g)}}},
                      {"geometry", rectangle(f, cx, cy, w, h)}});
  }
  write(dir / "greens.geojson", json({{"type", "FeatureCollection"}, {"features", greens}}).dump(1) + "\n");

  const std::filesystem::path run = dir / "run.toml";
  write(run,
        "[inputs]\n"
        "buildings = \"buildings.geojson\"\n"
        "pois = \"pois.csv\"\n"
        "greens = \"greens.geojson\"\n"
        "network = \"nodes.csv\"\n"
        "network_edges = \"edges.csv\"\n"
        "geocoder_lookup = \"geocoder.csv\"\n"
        "\n[parameters]\n"
        "budget_s = 600\n"
        "speed_kmh = 5\n"
        "seed = 1\n"
        "trials = 10\n"
        "\n[provider]\n"
        "kind = \"internal\"\n"
        "\n[output]\n"
        "dir = \"out\"\n");
  return run;
}

}  // namespace fixture
