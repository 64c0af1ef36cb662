#include "decamin/service_graph.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>

#include "decamin/csv.hpp"
#include "decamin/error.hpp"

namespace decamin {

ServiceGraph ServiceGraph::from_arcs(std::size_t nodes,
                                     std::span<const std::tuple<std::size_t, std::size_t, double>> arcs) {
  std::vector<std::vector<Arc>> rows(nodes);
  for (const auto& [i, j, w] : arcs) {
    if (i >= nodes || j >= nodes) throw InputError("arc endpoint out of range");
    if (w < 0.0) throw InputError("negative arc weight");
    rows[i].push_back({static_cast<std::uint32_t>(j), w});
  }
  ServiceGraph g;
  g.offsets_.assign(nodes + 1, 0);
  for (std::size_t i = 0; i < nodes; ++i) {
    auto& row = rows[i];
    std::stable_sort(row.begin(), row.end(), [](const Arc& a, const Arc& b) { return a.target < b.target; });
    std::size_t start = g.arcs_.size();
    for (const Arc& a : row) {
      if (g.arcs_.size() > start && g.arcs_.back().target == a.target)
        g.arcs_.back().weight += a.weight;
      else
        g.arcs_.push_back(a);
    }
    g.arcs_.erase(std::remove_if(g.arcs_.begin() + static_cast<std::ptrdiff_t>(start), g.arcs_.end(),
                                 [](const Arc& a) { return a.weight == 0.0; }),
                  g.arcs_.end());
    g.offsets_[i + 1] = g.arcs_.size();
  }
  return g;
}

double ServiceGraph::weight(std::size_t i, std::size_t j) const {
  auto row = out(i);
  auto it = std::lower_bound(row.begin(), row.end(), j, [](const Arc& a, std::size_t t) { return a.target < t; });
  return it != row.end() && it->target == j ? it->weight : 0.0;
}

double ServiceGraph::out_strength(std::size_t node) const {
  double s = 0.0;
  for (const Arc& a : out(node)) s += a.weight;
  return s;
}

ServiceGraph build_service_graph(std::span<const AccessSet> access, std::span<const double> population,
                                 std::span<const ServicePoint> services) {
  if (population.size() != access.size()) throw InputError("one population value per access set is required");
  const std::size_t n = services.size();
  std::vector<std::unordered_map<std::uint32_t, double>> rows(n);
  std::vector<std::uint32_t> members;
  std::vector<double> share;
  for (std::size_t b = 0; b < access.size(); ++b) {
    const AccessSet& a = access[b];
    members.clear();
    for (std::size_t s : a.services) {
      if (s >= n) throw InputError("building " + a.building_id + " references unknown service index " + std::to_string(s));
      members.push_back(static_cast<std::uint32_t>(s));
    }
    // P / n(type) for every reachable service, counted from the member list
    // itself so the access set's cached counts cannot drift from it.
    std::unordered_map<std::size_t, std::size_t> per_type;
    for (std::uint32_t s : members) ++per_type[services[s].type];
    share.resize(members.size());
    for (std::size_t k = 0; k < members.size(); ++k)
      share[k] = population[b] / static_cast<double>(per_type[services[members[k]].type]);
    for (std::uint32_t i : members)
      for (std::size_t k = 0; k < members.size(); ++k) {
        const std::uint32_t j = members[k];
        if (services[i].type == services[j].type) continue;
        rows[i][j] += share[k];
      }
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> arcs;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : rows[i]) arcs.emplace_back(i, j, w);
  return ServiceGraph::from_arcs(n, arcs);
}

void write_edges_csv(const std::filesystem::path& path, const ServiceGraph& g, std::span<const ServicePoint> services) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  csv::write_row(out, {"src", "dst", "weight"});
  for (std::size_t i = 0; i < g.node_count(); ++i)
    for (const auto& a : g.out(i)) csv::write_row(out, {services[i].id, services[a.target].id, fmt::format("{}", a.weight)});
}

void write_nodes_csv(const std::filesystem::path& path, std::span<const ServicePoint> services,
                     const ServiceTaxonomy& taxonomy, std::span<const std::size_t> community) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  csv::write_row(out, {"id", "type", "community"});
  for (std::size_t i = 0; i < services.size(); ++i)
    csv::write_row(out, {services[i].id, taxonomy.types()[services[i].type].name,
                         i < community.size() ? std::to_string(community[i]) : std::string()});
}

}  // namespace decamin
