#include "decamin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "decamin/artifacts.hpp"
#include "decamin/csv.hpp"
#include "decamin/error.hpp"
#include "decamin/geocoder.hpp"
#include "decamin/geojson.hpp"
#include "decamin/parallel.hpp"
#include "decamin/remote_isochrone.hpp"
#include "decamin/service_graph.hpp"
#include "decamin/walk_graph.hpp"

namespace decamin {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Ingest:
      return "ingest";
    case Stage::Isochrones:
      return "isochrones";
    case Stage::Score:
      return "score";
    case Stage::Communities:
      return "communities";
    case Stage::Redundancy:
      return "redundancy";
    case Stage::Export:
      return "export";
  }
  return "";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kStages)
    if (stage_name(s) == name) return s;
  return std::nullopt;
}

namespace {

ServiceTaxonomy taxonomy_for(const RunConfig& c) {
  return c.inputs.taxonomy.empty() ? default_taxonomy() : load_taxonomy_file(c.inputs.taxonomy);
}

fs::path stage_file(const RunConfig& c, const char* name) { return c.stage_dir() / name; }

std::ofstream open_csv(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string number_text(double v) { return fmt::format("{}", v); }

// ------------------------------------------------------------------ stages

void stage_ingest(const RunConfig& c) {
  const ServiceTaxonomy taxonomy = taxonomy_for(c);
  const auto raw = read_buildings(c.inputs.buildings);
  std::vector<LonLat> extent;
  for (const RawBuilding& b : raw) extent.insert(extent.end(), b.footprint.outer.begin(), b.footprint.outer.end());
  if (extent.empty()) throw InputError(c.inputs.buildings.string() + ": no building footprints");
  const Projection proj = Projection::centered_on(extent);

  FilterRules rules;
  rules.min_area_m2 = c.parameters.min_area_m2;
  if (!c.inputs.industrial_zones.empty()) rules.excluded_zones = read_zones(c.inputs.industrial_zones, proj);
  PopulationPolicy population;
  population.mode = c.parameters.population;
  if (population.mode == PopulationPolicy::Mode::AreaProportional)
    population.zones = read_population_zones(c.inputs.population_zones, proj);
  FilterResult filtered = filter_residential(raw, rules, proj, population);
  spdlog::info("ingest: {} of {} buildings kept", filtered.report.kept, filtered.report.input);

  std::unique_ptr<Geocoder> geocoder;
  if (!c.inputs.geocoder_lookup.empty()) {
    geocoder = std::make_unique<LookupGeocoder>(c.inputs.geocoder_lookup);
  } else if (auto http = HttpGeocoder::from_env()) {
    geocoder = std::make_unique<HttpGeocoder>(std::move(*http));
  }
  const auto records = read_pois(c.inputs.pois);
  PoiLoadResult pois = load_pois(records, taxonomy, proj, geocoder.get());
  write_rejects_csv(c.stage_dir() / "poi_rejects.csv", pois.rejects);
  spdlog::info("ingest: {} of {} POIs located", pois.services.size(), records.size());

  artifacts::Ingested data;
  data.origin = proj.origin();
  data.buildings = std::move(filtered.buildings);
  data.services = std::move(pois.services);
  data.greens = read_greens(c.inputs.greens, proj);
  json dropped = json::object();
  for (const auto& [reason, n] : filtered.report.dropped) dropped[reason] = n;
  data.report = {{"buildings_input", filtered.report.input},
                 {"buildings_kept", filtered.report.kept},
                 {"buildings_invalid", filtered.report.invalid},
                 {"buildings_dropped", dropped},
                 {"pois_input", records.size()},
                 {"pois_located", data.services.size()},
                 {"pois_rejected", pois.rejects.size()},
                 {"greens", data.greens.size()}};
  artifacts::write_ingest(stage_file(c, artifacts::kIngest), data, taxonomy);
}

WalkNetworkSource load_network(const RunConfig& c) {
  if (!c.inputs.network_edges.empty()) return load_walk_network_csv(c.inputs.network, c.inputs.network_edges);
  return load_walk_network(c.inputs.network);
}

void stage_isochrones(const RunConfig& c) {
  const ServiceTaxonomy taxonomy = taxonomy_for(c);
  const auto data = artifacts::read_ingest(stage_file(c, artifacts::kIngest), taxonomy);
  const Projection proj(data.origin);
  const IsochroneParams& params = c.parameters.isochrone;

  artifacts::IsochroneSet set;
  set.budget_s = params.budget_s;
  set.speed_m_s = params.speed_m_s;
  set.buffer_m = params.buffer_m;
  set.provider = std::string(provider_name(c.provider.kind));
  if (c.provider.kind == ProviderKind::Internal) {
    WalkNetworkSource network = load_network(c);
    resolve_edge_lengths(network, proj);
    const WalkGraph graph = build_graph(network, proj);
    spdlog::info("isochrones: walk graph with {} nodes, {} edges, {} components", graph.node_count(),
                 graph.edge_count(), graph.component_count());
    set.isochrones = compute_isochrones(graph, data.buildings, params, c.workers);
  } else {
    RemoteIsochroneOptions options = RemoteIsochroneOptions::from_env();
    options.provider = c.provider.name;
    options.cache_dir = c.provider.cache_dir;
    options.concurrency = c.provider.concurrency;
    RemoteIsochroneClient client(options);
    set.isochrones = compute_isochrones_remote(client, data.buildings, proj, params.budget_s);
    spdlog::info("isochrones: {} service calls, {} cache hits", client.network_calls(), client.cache_hits());
  }
  std::size_t excluded = 0;
  for (const Isochrone& iso : set.isochrones) excluded += iso.excluded();
  spdlog::info("isochrones: {} computed, {} excluded", set.isochrones.size(), excluded);
  artifacts::write_isochrones(stage_file(c, artifacts::kIsochrones), set);
}

void stage_score(const RunConfig& c) {
  const ServiceTaxonomy taxonomy = taxonomy_for(c);
  const auto data = artifacts::read_ingest(stage_file(c, artifacts::kIngest), taxonomy);
  const auto set = artifacts::read_isochrones(stage_file(c, artifacts::kIsochrones));
  if (set.isochrones.size() != data.buildings.size())
    throw InputError("isochrone artifact does not match the ingested buildings; rerun the isochrones stage");
  const PoiIndex index(data.services);
  std::vector<artifacts::ScoreRecord> records(data.buildings.size());
  parallel_for(records.size(), c.workers, [&](std::size_t i) {
    const Isochrone& iso = set.isochrones[i];
    if (iso.building_id != data.buildings[i].id)
      throw InputError("isochrone artifact order differs from the ingested buildings");
    artifacts::ScoreRecord& r = records[i];
    r.status = iso.status;
    r.scores.building_id = iso.building_id;
    r.access.building_id = iso.building_id;
    if (iso.excluded()) {
      r.scores.flags.excluded_isochrone = true;
      r.scores.flags.excluded_reason = std::string(status_reason(iso.status));
      return;
    }
    r.access = overlay(iso, index, data.services, data.greens, taxonomy);
    r.scores = ten_minute_index(r.access, taxonomy, c.parameters.green_threshold_m2);
  });
  artifacts::write_scores(stage_file(c, artifacts::kScores), records);
}

void stage_communities(const RunConfig& c) {
  const ServiceTaxonomy taxonomy = taxonomy_for(c);
  const auto data = artifacts::read_ingest(stage_file(c, artifacts::kIngest), taxonomy);
  const auto records = artifacts::read_scores(stage_file(c, artifacts::kScores), data.services, taxonomy);

  std::vector<AccessSet> access;
  std::vector<double> population;
  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].status != IsochroneStatus::Ok) continue;
    access.push_back(records[i].access);
    population.push_back(data.buildings[i].population);
    scored.push_back(i);
  }

  artifacts::Communities out;
  out.seed = c.parameters.seed;
  out.trials = c.parameters.trials;
  out.variant = std::string(variant_name(c.parameters.assignment));
  out.assignments.resize(records.size());
  ServiceGraph graph;
  if (data.services.empty()) {
    spdlog::warn("communities: no services were ingested; community detection skipped");
    out.skipped = true;
    graph = ServiceGraph::from_arcs(0, {});
  } else {
    graph = build_service_graph(access, population, data.services);
    CommunityOptions options;
    options.teleport = c.parameters.teleport;
    options.seed = c.parameters.seed;
    options.trials = c.parameters.trials;
    options.workers = c.workers;
    out.partition = detect_communities(graph, options);
    spdlog::info("communities: {} arcs, {} communities, codelength {:.6f} bits", graph.arc_count(),
                 out.partition.module_count, out.partition.codelength);
    const auto assigned = assign_buildings(access, out.partition, data.services, taxonomy, c.parameters.assignment);
    for (std::size_t k = 0; k < scored.size(); ++k) out.assignments[scored[k]] = assigned[k];
  }
  artifacts::write_communities(stage_file(c, artifacts::kCommunities), out);

  write_edges_csv(c.output_dir / "edges.csv", graph, data.services);
  write_nodes_csv(c.output_dir / "nodes.csv", data.services, taxonomy, out.partition.module);
  auto partition = open_csv(c.output_dir / "partition.csv");
  csv::write_row(partition, {"service_id", "community"});
  for (std::size_t i = 0; i < out.partition.module.size(); ++i)
    csv::write_row(partition, {data.services[i].id, std::to_string(out.partition.module[i])});
}

void stage_redundancy(const RunConfig& c) {
  const ServiceTaxonomy taxonomy = taxonomy_for(c);
  const auto data = artifacts::read_ingest(stage_file(c, artifacts::kIngest), taxonomy);
  const auto records = artifacts::read_scores(stage_file(c, artifacts::kScores), data.services, taxonomy);

  artifacts::Redundancy out;
  out.buildings.resize(records.size());
  std::vector<AccessSet> access;
  std::vector<double> population;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].status != IsochroneStatus::Ok) continue;
    out.buildings[i] = redundancy_index(records[i].access, records[i].scores, taxonomy, c.parameters.redundancy);
    access.push_back(records[i].access);
    population.push_back(data.buildings[i].population);
  }
  out.exclusive_population = exclusive_populations(access, population, data.services);
  artifacts::write_redundancy(stage_file(c, artifacts::kRedundancy), out);

  auto per_building = open_csv(c.output_dir / "redundancy.csv");
  csv::write_row(per_building, {"building_id", "R", "defined"});
  for (const auto& b : out.buildings) {
    if (!b) continue;
    csv::write_row(per_building, {b->building_id, b->value ? number_text(*b->value) : std::string(),
                                  b->value ? "true" : "false"});
  }
  auto exclusive = open_csv(c.output_dir / "exclusive.csv");
  csv::write_row(exclusive, {"service_id", "exclusive_population"});
  for (std::size_t s = 0; s < data.services.size(); ++s)
    csv::write_row(exclusive, {data.services[s].id, number_text(out.exclusive_population[s])});
}

// Linear interpolation between order statistics.
json quantiles(std::vector<double> values) {
  if (values.empty()) return nullptr;
  std::sort(values.begin(), values.end());
  json out = json::object();
  for (int q : {0, 10, 25, 50, 75, 90, 100}) {
    const double pos = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    out["p" + std::to_string(q)] = values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  }
  return out;
}

void stage_export(const RunConfig& c) {
  const ServiceTaxonomy taxonomy = taxonomy_for(c);
  const fs::path ingest_path = stage_file(c, artifacts::kIngest);
  const fs::path scores_path = stage_file(c, artifacts::kScores);
  const fs::path communities_path = stage_file(c, artifacts::kCommunities);
  const fs::path redundancy_path = stage_file(c, artifacts::kRedundancy);
  for (const fs::path& p : {ingest_path, scores_path, communities_path, redundancy_path}) artifacts::require(p);
  const auto data = artifacts::read_ingest(ingest_path, taxonomy);
  const auto records = artifacts::read_scores(scores_path, data.services, taxonomy);
  const auto communities = artifacts::read_communities(communities_path);
  const auto redundancy = artifacts::read_redundancy(redundancy_path);
  if (records.size() != data.buildings.size() || communities.assignments.size() != records.size() ||
      redundancy.buildings.size() != records.size())
    throw InputError("stage artifacts disagree on the number of buildings; rerun the pipeline");
  const Projection proj(data.origin);

  std::vector<std::string> slugs;
  for (const Category& cat : taxonomy.categories()) slugs.push_back(category_slug(cat.name));

  std::size_t scored = 0, excluded = 0, remote_failed = 0, contested = 0, unassignable = 0, assigned = 0,
              redundancy_undefined = 0;
  std::map<std::string, std::size_t> excluded_by_reason;
  std::vector<double> index_values, r_values;

  json features = json::array();
  for (std::size_t i = 0; i < data.buildings.size(); ++i) {
    const Building& b = data.buildings[i];
    const auto& r = records[i];
    json props = {{"id", b.id}, {"population", b.population}};
    const bool ok = r.status == IsochroneStatus::Ok;
    for (std::size_t j = 0; j < slugs.size(); ++j)
      props["score_" + slugs[j]] = ok ? json(r.scores.category_scores[j]) : json(nullptr);
    props["index"] = ok ? json(r.scores.index) : json(nullptr);
    props["excluded"] = !ok;
    props["excluded_reason"] = ok ? json(nullptr) : json(std::string(status_reason(r.status)));
    const auto& a = communities.assignments[i];
    props["community"] = a && a->community ? json(*a->community) : json(nullptr);
    props["contested"] = a ? a->contested : false;
    props["unassignable"] = a ? a->unassignable : false;
    const auto& red = redundancy.buildings[i];
    props["redundancy"] = red && red->value ? json(*red->value) : json(nullptr);
    props["redundancy_defined"] = red && red->value.has_value();

    if (ok) {
      ++scored;
      index_values.push_back(r.scores.index);
      if (red && red->value)
        r_values.push_back(*red->value);
      else
        ++redundancy_undefined;
    } else if (r.status == IsochroneStatus::RemoteFailed) {
      ++remote_failed;
    } else {
      ++excluded;
      ++excluded_by_reason[std::string(status_reason(r.status))];
    }
    if (a) {
      contested += a->contested;
      unassignable += a->unassignable;
      assigned += a->community.has_value();
    }
    features.push_back({{"type", "Feature"},
                        {"id", b.id},
                        {"geometry", geojson::polygon_geometry(geojson::unproject(b.footprint, proj))},
                        {"properties", std::move(props)}});
  }
  geojson::write_file(c.output_dir / "buildings.geojson",
                      {{"type", "FeatureCollection"}, {"features", std::move(features)}});

  json services = json::array();
  for (std::size_t s = 0; s < data.services.size(); ++s) {
    const ServicePoint& sp = data.services[s];
    const TypeInfo& t = taxonomy.types()[sp.type];
    json props = {{"id", sp.id},
                  {"type", t.name},
                  {"category", taxonomy.categories()[t.category].name},
                  {"community", s < communities.partition.module.size() ? json(communities.partition.module[s])
                                                                        : json(nullptr)},
                  {"exclusive_population", redundancy.exclusive_population.at(s)},
                  {"source", sp.source}};
    services.push_back({{"type", "Feature"},
                        {"id", sp.id},
                        {"geometry", geojson::point_geometry(sp.location)},
                        {"properties", std::move(props)}});
  }
  geojson::write_file(c.output_dir / "services.geojson",
                      {{"type", "FeatureCollection"}, {"features", std::move(services)}});

  json by_reason = json::object();
  for (const auto& [k, v] : excluded_by_reason) by_reason[k] = v;
  json summary = {
      {"buildings",
       {{"total", data.buildings.size()},
        {"scored", scored},
        {"excluded", excluded},
        {"excluded_by_reason", by_reason},
        {"remote_failed", remote_failed},
        {"assigned", assigned},
        {"contested", contested},
        {"unassignable", unassignable},
        {"redundancy_undefined", redundancy_undefined}}},
      {"services", data.services.size()},
      {"greens", data.greens.size()},
      {"ingest", data.report},
      {"communities",
       {{"skipped", communities.skipped},
        {"count", communities.partition.module_count},
        {"codelength", communities.skipped ? json(nullptr) : json(communities.partition.codelength)},
        {"seed", communities.seed},
        {"trials", communities.trials},
        {"assignment", communities.variant}}},
      {"index_quantiles", quantiles(index_values)},
      {"redundancy_quantiles", quantiles(r_values)},
      {"categories", slugs},
      {"parameters", parameters_json(c)},
  };
  geojson::write_file(c.output_dir / "summary.json", summary);
  spdlog::info("export: {} scored, {} excluded, {} remote-failed of {} buildings", scored, excluded, remote_failed,
               data.buildings.size());
}

}  // namespace

void run_stage(Stage stage, const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(config.stage_dir());
  try {
    switch (stage) {
      case Stage::Ingest:
        stage_ingest(config);
        break;
      case Stage::Isochrones:
        stage_isochrones(config);
        break;
      case Stage::Score:
        stage_score(config);
        break;
      case Stage::Communities:
        stage_communities(config);
        break;
      case Stage::Redundancy:
        stage_redundancy(config);
        break;
      case Stage::Export:
        stage_export(config);
        break;
    }
  } catch (const std::exception& e) {
    spdlog::error("stage {} failed: {}", stage_name(stage), e.what());
    throw;
  }
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  spdlog::info("stage {} finished in {:.2f} s", stage_name(stage), took.count());
}

void run_pipeline(const RunConfig& config) {
  validate(config);
  for (Stage s : kStages) run_stage(s, config);
}

}  // namespace decamin
