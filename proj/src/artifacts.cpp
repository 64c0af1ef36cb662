#include "decamin/artifacts.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "decamin/error.hpp"
#include "decamin/geojson.hpp"

namespace decamin::artifacts {

using nlohmann::json;

void require(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifactError(path);
}

void write_json(const std::filesystem::path& path, const json& doc) { geojson::write_file(path, doc); }

json read_json(const std::filesystem::path& path) {
  require(path);
  return geojson::read_file(path);
}

namespace {

json point_json(const geo::Point& p) { return json::array({p.x(), p.y()}); }
geo::Point point_from(const json& j) { return geo::Point(j.at(0).get<double>(), j.at(1).get<double>()); }

json ring_json(const geo::Ring& ring) {
  json out = json::array();
  for (const auto& p : ring) out.push_back(point_json(p));
  return out;
}

json polygon_json(const geo::Polygon& poly) {
  json out = json::array();
  out.push_back(ring_json(poly.outer()));
  for (const auto& h : poly.inners()) out.push_back(ring_json(h));
  return out;
}

geo::Polygon polygon_from(const json& j) {
  geo::Polygon poly;
  for (std::size_t r = 0; r < j.size(); ++r) {
    geo::Ring ring;
    for (const auto& p : j[r]) ring.push_back(point_from(p));
    if (r == 0)
      poly.outer() = std::move(ring);
    else
      poly.inners().push_back(std::move(ring));
  }
  return poly;
}

json strings(const std::map<std::string, std::string>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "isochrone artifacts assume a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) throw InputError(path.string() + ": truncated file");
  return value;
}

std::string get_string(std::istream& in, const std::filesystem::path& path) {
  const auto n = get<std::uint32_t>(in, path);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw InputError(path.string() + ": truncated file");
  return s;
}

void put_ring(std::ostream& out, const geo::Ring& ring) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ring.size()));
  for (const auto& p : ring) {
    put(out, p.x());
    put(out, p.y());
  }
}

geo::Ring get_ring(std::istream& in, const std::filesystem::path& path) {
  geo::Ring ring;
  const auto n = get<std::uint32_t>(in, path);
  ring.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = get<double>(in, path);
    const double y = get<double>(in, path);
    ring.emplace_back(x, y);
  }
  return ring;
}

constexpr char kMagic[8] = {'D', 'C', 'M', 'I', 'S', 'O', '0', '1'};

}  // namespace

void write_ingest(const std::filesystem::path& path, const Ingested& data, const ServiceTaxonomy& taxonomy) {
  json doc;
  doc["origin"] = {{"lon", data.origin.lon}, {"lat", data.origin.lat}};
  json buildings = json::array();
  for (const Building& b : data.buildings)
    buildings.push_back({{"id", b.id},
                         {"population", b.population},
                         {"centroid", point_json(b.centroid)},
                         {"footprint", polygon_json(b.footprint)},
                         {"tags", strings(b.tags)}});
  doc["buildings"] = std::move(buildings);
  json services = json::array();
  for (const ServicePoint& s : data.services)
    services.push_back({{"id", s.id},
                        {"type", taxonomy.types()[s.type].name},
                        {"lon", s.location.lon},
                        {"lat", s.location.lat},
                        {"position", point_json(s.position)},
                        {"source", s.source}});
  doc["services"] = std::move(services);
  json greens = json::array();
  for (const GreenArea& g : data.greens)
    greens.push_back({{"id", g.id}, {"name", g.name}, {"polygon", polygon_json(g.polygon)}});
  doc["greens"] = std::move(greens);
  doc["report"] = data.report;
  write_json(path, doc);
}

Ingested read_ingest(const std::filesystem::path& path, const ServiceTaxonomy& taxonomy) {
  const json doc = read_json(path);
  Ingested d;
  try {
    d.origin = LonLat{doc.at("origin").at("lon").get<double>(), doc.at("origin").at("lat").get<double>()};
    for (const auto& b : doc.at("buildings")) {
      Building out;
      out.id = b.at("id").get<std::string>();
      out.population = b.at("population").get<double>();
      out.centroid = point_from(b.at("centroid"));
      out.footprint = polygon_from(b.at("footprint"));
      for (const auto& [k, v] : b.at("tags").items()) out.tags[k] = v.get<std::string>();
      d.buildings.push_back(std::move(out));
    }
    for (const auto& s : doc.at("services")) {
      ServicePoint out;
      out.id = s.at("id").get<std::string>();
      out.type = taxonomy.type_index(s.at("type").get<std::string>());
      out.location = LonLat{s.at("lon").get<double>(), s.at("lat").get<double>()};
      out.position = point_from(s.at("position"));
      out.source = s.at("source").get<std::string>();
      d.services.push_back(std::move(out));
    }
    for (const auto& g : doc.at("greens")) {
      GreenArea out;
      out.id = g.at("id").get<std::string>();
      out.name = g.at("name").get<std::string>();
      out.polygon = polygon_from(g.at("polygon"));
      d.greens.push_back(std::move(out));
    }
    d.report = doc.at("report");
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return d;
}

void write_isochrones(const std::filesystem::path& path, const IsochroneSet& set) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, set.isochrones.size());
  put(out, set.budget_s);
  put(out, set.speed_m_s);
  put(out, set.buffer_m);
  put_string(out, set.provider);
  for (const Isochrone& iso : set.isochrones) {
    put_string(out, iso.building_id);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(iso.status));
    put<std::uint8_t>(out, iso.snapped ? 1 : 0);
    put(out, iso.snapped ? iso.snapped->x() : 0.0);
    put(out, iso.snapped ? iso.snapped->y() : 0.0);
    put(out, iso.snap_distance);
    const bool has_polygon = !iso.polygon.outer().empty();
    put<std::uint32_t>(out, has_polygon ? static_cast<std::uint32_t>(1 + iso.polygon.inners().size()) : 0);
    if (has_polygon) {
      put_ring(out, iso.polygon.outer());
      for (const auto& h : iso.polygon.inners()) put_ring(out, h);
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

IsochroneSet read_isochrones(const std::filesystem::path& path) {
  require(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw InputError(path.string() + ": not an isochrone artifact");
  IsochroneSet set;
  const auto count = get<std::uint64_t>(in, path);
  set.budget_s = get<double>(in, path);
  set.speed_m_s = get<double>(in, path);
  set.buffer_m = get<double>(in, path);
  set.provider = get_string(in, path);
  set.isochrones.resize(count);
  for (Isochrone& iso : set.isochrones) {
    iso.building_id = get_string(in, path);
    const auto status = get<std::uint8_t>(in, path);
    if (status > static_cast<std::uint8_t>(IsochroneStatus::RemoteFailed))
      throw InputError(path.string() + ": bad isochrone status");
    iso.status = static_cast<IsochroneStatus>(status);
    const bool has_snap = get<std::uint8_t>(in, path) != 0;
    const double x = get<double>(in, path);
    const double y = get<double>(in, path);
    if (has_snap) iso.snapped = geo::Point(x, y);
    iso.snap_distance = get<double>(in, path);
    const auto rings = get<std::uint32_t>(in, path);
    for (std::uint32_t r = 0; r < rings; ++r) {
      geo::Ring ring = get_ring(in, path);
      if (r == 0)
        iso.polygon.outer() = std::move(ring);
      else
        iso.polygon.inners().push_back(std::move(ring));
    }
  }
  return set;
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRecord>& records) {
  json rows = json::array();
  for (const ScoreRecord& r : records) {
    json row = {{"id", r.scores.building_id}, {"status", std::string(status_reason(r.status))}};
    if (r.status == IsochroneStatus::Ok) {
      row["services"] = r.access.services;
      row["green_overlap_m2"] = r.access.green_overlap_m2;
      row["category_scores"] = r.scores.category_scores;
      row["index"] = r.scores.index;
    }
    rows.push_back(std::move(row));
  }
  write_json(path, {{"buildings", std::move(rows)}});
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path, std::span<const ServicePoint> services,
                                     const ServiceTaxonomy& taxonomy) {
  const json doc = read_json(path);
  std::vector<ScoreRecord> out;
  try {
    for (const auto& row : doc.at("buildings")) {
      ScoreRecord r;
      r.scores.building_id = row.at("id").get<std::string>();
      r.status = parse_status(row.at("status").get<std::string>());
      r.access.building_id = r.scores.building_id;
      if (r.status == IsochroneStatus::Ok) {
        r.access = make_access_set(r.scores.building_id, row.at("services").get<std::vector<std::size_t>>(), services,
                                   taxonomy.type_count(), row.at("green_overlap_m2").get<double>());
        r.scores.category_scores = row.at("category_scores").get<std::vector<double>>();
        r.scores.index = row.at("index").get<double>();
      } else {
        r.scores.flags.excluded_isochrone = true;
        r.scores.flags.excluded_reason = std::string(status_reason(r.status));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return out;
}

void write_communities(const std::filesystem::path& path, const Communities& c) {
  json doc = {{"skipped", c.skipped},
              {"seed", c.seed},
              {"trials", c.trials},
              {"variant", c.variant},
              {"module", c.partition.module},
              {"module_count", c.partition.module_count},
              {"codelength", c.partition.codelength}};
  json rows = json::array();
  for (const auto& a : c.assignments) {
    if (!a) {
      rows.push_back(nullptr);
      continue;
    }
    json scores = json::array();
    for (const auto& [k, s] : a->scores) scores.push_back({k, s});
    rows.push_back({{"id", a->building_id},
                    {"community", a->community ? json(*a->community) : json(nullptr)},
                    {"contested", a->contested},
                    {"unassignable", a->unassignable},
                    {"scores", std::move(scores)}});
  }
  doc["assignments"] = std::move(rows);
  write_json(path, doc);
}

Communities read_communities(const std::filesystem::path& path) {
  const json doc = read_json(path);
  Communities c;
  try {
    c.skipped = doc.at("skipped").get<bool>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.trials = doc.at("trials").get<int>();
    c.variant = doc.at("variant").get<std::string>();
    c.partition.module = doc.at("module").get<std::vector<std::size_t>>();
    c.partition.module_count = doc.at("module_count").get<std::size_t>();
    c.partition.codelength = doc.at("codelength").get<double>();
    for (const auto& row : doc.at("assignments")) {
      if (row.is_null()) {
        c.assignments.emplace_back();
        continue;
      }
      BuildingAssignment a;
      a.building_id = row.at("id").get<std::string>();
      if (!row.at("community").is_null()) a.community = row.at("community").get<std::size_t>();
      a.contested = row.at("contested").get<bool>();
      a.unassignable = row.at("unassignable").get<bool>();
      for (const auto& s : row.at("scores")) a.scores.emplace_back(s.at(0).get<std::size_t>(), s.at(1).get<std::int64_t>());
      c.assignments.emplace_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return c;
}

void write_redundancy(const std::filesystem::path& path, const Redundancy& r) {
  json rows = json::array();
  for (const auto& b : r.buildings) {
    if (!b) {
      rows.push_back(nullptr);
      continue;
    }
    json detail = json::array();
    for (const TypeRedundancy& t : b->detail)
      if (t.providers > 0) detail.push_back({{"type", t.type}, {"weight", t.weight}, {"providers", t.providers}, {"contribution", t.contribution}});
    rows.push_back({{"id", b->building_id}, {"value", b->value ? json(*b->value) : json(nullptr)}, {"detail", std::move(detail)}});
  }
  write_json(path, {{"buildings", std::move(rows)}, {"exclusive_population", r.exclusive_population}});
}

Redundancy read_redundancy(const std::filesystem::path& path) {
  const json doc = read_json(path);
  Redundancy r;
  try {
    for (const auto& row : doc.at("buildings")) {
      if (row.is_null()) {
        r.buildings.emplace_back();
        continue;
      }
      RedundancyResult b;
      b.building_id = row.at("id").get<std::string>();
      if (!row.at("value").is_null()) b.value = row.at("value").get<double>();
      for (const auto& t : row.at("detail"))
        b.detail.push_back({t.at("type").get<std::size_t>(), t.at("weight").get<double>(),
                            t.at("providers").get<std::size_t>(), t.at("contribution").get<double>()});
      r.buildings.emplace_back(std::move(b));
    }
    r.exclusive_population = doc.at("exclusive_population").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return r;
}

}  // namespace decamin::artifacts
