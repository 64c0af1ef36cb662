#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decamin/geometry.hpp"
#include "decamin/projection.hpp"

namespace decamin {

/// A georeferenced service instance. `type` indexes ServiceTaxonomy::types().
struct ServicePoint {
  std::string id;
  std::size_t type = 0;
  LonLat location;
  geo::Point position;  // projected
  std::string source;
};

struct GreenArea {
  std::string id;
  geo::Polygon polygon;  // projected, valid
  std::string name;
};

/// Residential unit of analysis.
struct Building {
  std::string id;
  geo::Polygon footprint;  // projected
  geo::Point centroid;
  double population = 1.0;
  std::map<std::string, std::string> tags;
};

struct ScoreFlags {
  bool excluded_isochrone = false;
  std::string excluded_reason;
  bool contested = false;
  bool unassignable = false;
};

/// Per-building outputs. `category_scores` follows the taxonomy's category
/// order; `index` is their arithmetic mean.
struct BuildingScores {
  std::string building_id;
  std::vector<double> category_scores;
  double index = 0.0;
  std::optional<std::size_t> community;
  std::optional<double> redundancy;
  ScoreFlags flags;
};

}  // namespace decamin
