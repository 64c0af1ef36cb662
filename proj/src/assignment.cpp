#include "decamin/assignment.hpp"

#include <map>

#include "decamin/error.hpp"

namespace decamin {

std::string_view variant_name(AssignmentVariant v) { return v == AssignmentVariant::Literal ? "literal" : "pair"; }

AssignmentVariant parse_variant(std::string_view name) {
  if (name == "literal") return AssignmentVariant::Literal;
  if (name == "pair") return AssignmentVariant::Pair;
  throw ConfigError("unknown assignment variant '" + std::string(name) + "' (expected literal or pair)");
}

BuildingAssignment assign_building(const AccessSet& a, const Partition& partition,
                                   std::span<const ServicePoint> services, const ServiceTaxonomy& taxonomy,
                                   AssignmentVariant variant) {
  BuildingAssignment out;
  out.building_id = a.building_id;
  if (a.distinct_types() < 2) {
    out.unassignable = true;
    return out;
  }
  const std::size_t m = taxonomy.category_count();
  // community -> reachable services per category
  std::map<std::size_t, std::vector<std::int64_t>> tally;
  for (std::size_t s : a.services) {
    if (s >= partition.module.size()) throw InputError("service index outside the partition");
    auto& row = tally[partition.module[s]];
    row.resize(m, 0);
    ++row[taxonomy.types()[services[s].type].category];
  }
  for (const auto& [k, per_category] : tally) {
    std::int64_t size = 0;
    for (std::int64_t c : per_category) size += c;
    if (size < 2) continue;
    std::int64_t score = 0;
    for (std::int64_t c : per_category)
      score += variant == AssignmentVariant::Literal ? size - c : c * (size - c);
    out.scores.emplace_back(k, score);
  }
  if (out.scores.empty()) {
    out.contested = true;
    return out;
  }
  std::int64_t top = out.scores.front().second;
  for (const auto& [k, s] : out.scores) top = std::max(top, s);
  std::size_t winners = 0;
  for (const auto& [k, s] : out.scores)
    if (s == top) {
      ++winners;
      out.community = k;
    }
  if (winners > 1) {
    out.community.reset();
    out.contested = true;
  }
  return out;
}

std::vector<BuildingAssignment> assign_buildings(std::span<const AccessSet> access, const Partition& partition,
                                                 std::span<const ServicePoint> services,
                                                 const ServiceTaxonomy& taxonomy, AssignmentVariant variant) {
  std::vector<BuildingAssignment> out;
  out.reserve(access.size());
  for (const AccessSet& a : access) out.push_back(assign_building(a, partition, services, taxonomy, variant));
  return out;
}

}  // namespace decamin
