#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "decamin/infomap.hpp"
#include "decamin/scoring.hpp"
#include "decamin/taxonomy.hpp"

namespace decamin {

/// Literal: sum over categories h of (|S_k| - |S_k in h|).
/// Pair: sum over categories h of |S_k in h| * (|S_k| - |S_k in h|).
enum class AssignmentVariant { Literal, Pair };

std::string_view variant_name(AssignmentVariant v);
AssignmentVariant parse_variant(std::string_view name);

struct BuildingAssignment {
  std::string building_id;
  std::optional<std::size_t> community;
  bool contested = false;
  bool unassignable = false;
  std::vector<std::pair<std::size_t, std::int64_t>> scores;  // (community, score), community ascending
};

/// Scores every community holding at least two of the building's reachable
/// services and picks the best. A building reaching fewer than two distinct
/// service types is unassignable; a tie at the top, or no community with two
/// reachable services, leaves it contested.
BuildingAssignment assign_building(const AccessSet& a, const Partition& partition,
                                   std::span<const ServicePoint> services, const ServiceTaxonomy& taxonomy,
                                   AssignmentVariant variant = AssignmentVariant::Literal);

std::vector<BuildingAssignment> assign_buildings(std::span<const AccessSet> access, const Partition& partition,
                                                 std::span<const ServicePoint> services,
                                                 const ServiceTaxonomy& taxonomy,
                                                 AssignmentVariant variant = AssignmentVariant::Literal);

}  // namespace decamin
