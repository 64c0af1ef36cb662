#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decamin/geometry.hpp"
#include "decamin/model.hpp"
#include "decamin/walk_graph.hpp"

namespace decamin {

struct IsochroneParams {
  double budget_s = 600.0;
  double speed_m_s = 5.0 / 3.6;
  double buffer_m = 30.0;
  double snap_limit_m = 200.0;
  int arc_points = 32;

  double budget_m() const { return budget_distance(budget_s, speed_m_s); }
};

enum class IsochroneStatus { Ok, OffNetwork, CentroidOutside, RemoteFailed };

/// "ok", "off-network", "centroid-outside", "remote-failed".
std::string_view status_reason(IsochroneStatus status);
IsochroneStatus parse_status(std::string_view reason);

struct Isochrone {
  std::string building_id;
  geo::Polygon polygon;  // empty when off-network or remote-failed
  std::optional<geo::Point> snapped;
  double snap_distance = 0.0;
  IsochroneStatus status = IsochroneStatus::Ok;

  bool excluded() const { return status != IsochroneStatus::Ok; }
};

/// Union of `buffer_m` round buffers around the reached segments; when the
/// union has several parts the one with the largest area is returned.
geo::Polygon polygonize(std::span<const geo::Polyline> segments, double buffer_m, int arc_points = 32);

Isochrone isochrone_for_building(const WalkGraph& g, const Building& b, const IsochroneParams& params);

/// One isochrone per building, in input order.
std::vector<Isochrone> compute_isochrones(const WalkGraph& g, std::span<const Building> buildings,
                                          const IsochroneParams& params, std::size_t workers);

}  // namespace decamin
