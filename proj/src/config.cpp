#include "decamin/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "decamin/error.hpp"

namespace decamin {

std::string_view provider_name(ProviderKind kind) { return kind == ProviderKind::Internal ? "internal" : "remote"; }

ProviderKind parse_provider(std::string_view name) {
  if (name == "internal") return ProviderKind::Internal;
  if (name == "remote") return ProviderKind::Remote;
  throw ConfigError("unknown provider '" + std::string(name) + "' (expected internal or remote)");
}

namespace {

void check_keys(const toml::table& table, const std::string& section, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : table) {
    if (!allowed.count(std::string(key.str())))
      throw ConfigError("unknown key '" + std::string(key.str()) + "' in [" + section + "]");
  }
}

const toml::table* section(const toml::table& root, const std::string& name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError("[" + name + "] must be a table");
  return node->as_table();
}

std::filesystem::path path_value(const toml::table* t, const char* key, const std::filesystem::path& base) {
  if (!t) return {};
  const toml::node* node = t->get(key);
  if (!node) return {};
  auto s = node->value<std::string>();
  if (!s) throw ConfigError(std::string("'") + key + "' must be a string path");
  std::filesystem::path p(*s);
  return p.is_absolute() ? p : base / p;
}

double number(const toml::table* t, const char* key, double fallback) {
  if (!t) return fallback;
  const toml::node* node = t->get(key);
  if (!node) return fallback;
  auto v = node->value<double>();
  if (!v) throw ConfigError(std::string("'") + key + "' must be a number");
  return *v;
}

std::int64_t integer(const toml::table* t, const char* key, std::int64_t fallback) {
  if (!t) return fallback;
  const toml::node* node = t->get(key);
  if (!node) return fallback;
  auto v = node->value_exact<std::int64_t>();
  if (!v) throw ConfigError(std::string("'") + key + "' must be an integer");
  return *v;
}

bool boolean(const toml::table* t, const char* key, bool fallback) {
  if (!t) return fallback;
  const toml::node* node = t->get(key);
  if (!node) return fallback;
  auto v = node->value_exact<bool>();
  if (!v) throw ConfigError(std::string("'") + key + "' must be true or false");
  return *v;
}

std::string text(const toml::table* t, const char* key, const std::string& fallback) {
  if (!t) return fallback;
  const toml::node* node = t->get(key);
  if (!node) return fallback;
  auto v = node->value_exact<std::string>();
  if (!v) throw ConfigError(std::string("'") + key + "' must be a string");
  return *v;
}

}  // namespace

RunConfig parse_config(std::string_view document, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(document);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "run configuration: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
  check_keys(root, "top level", {"inputs", "parameters", "provider", "output"});
  RunConfig c;
  const toml::table* in = section(root, "inputs");
  if (!in) throw ConfigError("run configuration lacks an [inputs] table");
  check_keys(*in, "inputs",
             {"buildings", "pois", "greens", "network", "network_edges", "taxonomy", "industrial_zones",
              "population_zones", "geocoder_lookup"});
  c.inputs.buildings = path_value(in, "buildings", base_dir);
  c.inputs.pois = path_value(in, "pois", base_dir);
  c.inputs.greens = path_value(in, "greens", base_dir);
  c.inputs.network = path_value(in, "network", base_dir);
  c.inputs.network_edges = path_value(in, "network_edges", base_dir);
  c.inputs.taxonomy = path_value(in, "taxonomy", base_dir);
  c.inputs.industrial_zones = path_value(in, "industrial_zones", base_dir);
  c.inputs.population_zones = path_value(in, "population_zones", base_dir);
  c.inputs.geocoder_lookup = path_value(in, "geocoder_lookup", base_dir);

  const toml::table* par = section(root, "parameters");
  if (par)
    check_keys(*par, "parameters",
               {"budget_s", "speed_kmh", "buffer_m", "snap_limit_m", "arc_points", "green_threshold_m2",
                "min_area_m2", "teleport", "seed", "trials", "assignment", "population",
                "redundancy_green_in_weights", "redundancy_green_in_index"});
  RunParameters& p = c.parameters;
  p.isochrone.budget_s = number(par, "budget_s", p.isochrone.budget_s);
  p.isochrone.speed_m_s = number(par, "speed_kmh", 5.0) / 3.6;
  p.isochrone.buffer_m = number(par, "buffer_m", p.isochrone.buffer_m);
  p.isochrone.snap_limit_m = number(par, "snap_limit_m", p.isochrone.snap_limit_m);
  p.isochrone.arc_points = static_cast<int>(integer(par, "arc_points", p.isochrone.arc_points));
  p.green_threshold_m2 = number(par, "green_threshold_m2", p.green_threshold_m2);
  p.min_area_m2 = number(par, "min_area_m2", p.min_area_m2);
  p.teleport = number(par, "teleport", p.teleport);
  const std::int64_t seed = integer(par, "seed", 1);
  if (seed < 0) throw ConfigError("'seed' must be non-negative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.trials = static_cast<int>(integer(par, "trials", p.trials));
  p.assignment = parse_variant(text(par, "assignment", "literal"));
  const std::string population = text(par, "population", "uniform");
  if (population == "uniform")
    p.population = PopulationPolicy::Mode::Uniform;
  else if (population == "area")
    p.population = PopulationPolicy::Mode::AreaProportional;
  else
    throw ConfigError("unknown population policy '" + population + "' (expected uniform or area)");
  p.redundancy.green_in_weights = boolean(par, "redundancy_green_in_weights", true);
  p.redundancy.green_in_index = boolean(par, "redundancy_green_in_index", true);

  const toml::table* prov = section(root, "provider");
  if (prov) check_keys(*prov, "provider", {"kind", "name", "cache_dir", "concurrency"});
  c.provider.kind = parse_provider(text(prov, "kind", "internal"));
  c.provider.name = text(prov, "name", c.provider.name);
  c.provider.concurrency = static_cast<std::size_t>(std::max<std::int64_t>(1, integer(prov, "concurrency", 2)));

  const toml::table* out = section(root, "output");
  if (out) check_keys(*out, "output", {"dir"});
  c.output_dir = path_value(out, "dir", base_dir);
  if (c.output_dir.empty()) c.output_dir = base_dir / "out";
  c.provider.cache_dir = path_value(prov, "cache_dir", base_dir);
  if (c.provider.cache_dir.empty()) c.provider.cache_dir = c.output_dir / "cache";
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read run configuration " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig c = parse_config(text.str(), std::filesystem::absolute(path).parent_path());
  c.source = path;
  return c;
}

void validate(const RunConfig& c) {
  auto require = [](const std::filesystem::path& p, const char* what, bool optional) {
    if (p.empty()) {
      if (optional) return;
      throw ConfigError(std::string("missing input path: ") + what);
    }
    if (!std::filesystem::is_regular_file(p))
      throw ConfigError(std::string("input file not found (") + what + "): " + p.string());
  };
  require(c.inputs.buildings, "buildings", false);
  require(c.inputs.pois, "pois", false);
  require(c.inputs.greens, "greens", false);
  require(c.inputs.network, "network", false);
  require(c.inputs.network_edges, "network_edges", true);
  require(c.inputs.taxonomy, "taxonomy", true);
  require(c.inputs.industrial_zones, "industrial_zones", true);
  require(c.inputs.population_zones, "population_zones", true);
  require(c.inputs.geocoder_lookup, "geocoder_lookup", true);
  if (c.parameters.population == PopulationPolicy::Mode::AreaProportional && c.inputs.population_zones.empty())
    throw ConfigError("population = \"area\" needs inputs.population_zones");

  const RunParameters& p = c.parameters;
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string("parameter '") + key + "' must be positive");
  };
  positive(p.isochrone.budget_s, "budget_s");
  positive(p.isochrone.speed_m_s, "speed_kmh");
  positive(p.isochrone.buffer_m, "buffer_m");
  positive(p.isochrone.snap_limit_m, "snap_limit_m");
  positive(p.green_threshold_m2, "green_threshold_m2");
  if (!(p.min_area_m2 >= 0.0)) throw ConfigError("parameter 'min_area_m2' must be non-negative");
  if (!p.redundancy.green_in_weights && p.redundancy.green_in_index)
    throw ConfigError("redundancy_green_in_weights = false requires redundancy_green_in_index = false");
  if (p.isochrone.arc_points < 8) throw ConfigError("parameter 'arc_points' must be at least 8");
  if (!(p.teleport > 0.0 && p.teleport < 1.0)) throw ConfigError("parameter 'teleport' must lie in (0, 1)");
  if (p.trials < 1) throw ConfigError("parameter 'trials' must be at least 1");
}

nlohmann::json parameters_json(const RunConfig& c) {
  const RunParameters& p = c.parameters;
  return {
      {"budget_s", p.isochrone.budget_s},
      {"speed_m_s", p.isochrone.speed_m_s},
      {"budget_m", p.isochrone.budget_m()},
      {"buffer_m", p.isochrone.buffer_m},
      {"snap_limit_m", p.isochrone.snap_limit_m},
      {"arc_points", p.isochrone.arc_points},
      {"green_threshold_m2", p.green_threshold_m2},
      {"min_area_m2", p.min_area_m2},
      {"teleport", p.teleport},
      {"seed", p.seed},
      {"trials", p.trials},
      {"assignment", std::string(variant_name(p.assignment))},
      {"population", p.population == PopulationPolicy::Mode::Uniform ? "uniform" : "area"},
      {"redundancy_green_in_weights", p.redundancy.green_in_weights},
      {"redundancy_green_in_index", p.redundancy.green_in_index},
      {"provider", std::string(provider_name(c.provider.kind))},
  };
}

}  // namespace decamin
