#include "decamin/isochrone.hpp"

#include <spdlog/spdlog.h>

#include "decamin/error.hpp"
#include "decamin/parallel.hpp"

namespace decamin {

std::string_view status_reason(IsochroneStatus status) {
  switch (status) {
    case IsochroneStatus::Ok:
      return "ok";
    case IsochroneStatus::OffNetwork:
      return "off-network";
    case IsochroneStatus::CentroidOutside:
      return "centroid-outside";
    case IsochroneStatus::RemoteFailed:
      return "remote-failed";
  }
  return "ok";
}

IsochroneStatus parse_status(std::string_view reason) {
  for (auto s : {IsochroneStatus::Ok, IsochroneStatus::OffNetwork, IsochroneStatus::CentroidOutside,
                 IsochroneStatus::RemoteFailed})
    if (status_reason(s) == reason) return s;
  throw InputError("unknown isochrone status '" + std::string(reason) + "'");
}

geo::Polygon polygonize(std::span<const geo::Polyline> segments, double buffer_m, int arc_points) {
  if (segments.empty()) throw GeometryError("polygonize: empty reached set");
  geo::MultiPolygon merged = geo::buffer_union(segments, buffer_m, arc_points);
  if (merged.empty()) throw GeometryError("polygonize: empty buffer");
  std::size_t best = 0;
  double best_area = -1.0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const double a = geo::area(merged[i]);
    if (a > best_area) {
      best_area = a;
      best = i;
    }
  }
  if (merged.size() > 1) spdlog::debug("polygonize: {} parts, keeping the largest", merged.size());
  return merged[best];
}

Isochrone isochrone_for_building(const WalkGraph& g, const Building& b, const IsochroneParams& params) {
  Isochrone iso;
  iso.building_id = b.id;
  auto reach = reachable_set(g, b.centroid, params.budget_s, params.speed_m_s, params.snap_limit_m);
  if (!reach) {
    iso.status = IsochroneStatus::OffNetwork;
    return iso;
  }
  iso.snapped = reach->origin.point;
  iso.snap_distance = reach->origin.distance;
  iso.polygon = polygonize(reach->segments, params.buffer_m, params.arc_points);
  if (!geo::contains(iso.polygon, b.centroid)) iso.status = IsochroneStatus::CentroidOutside;
  return iso;
}

std::vector<Isochrone> compute_isochrones(const WalkGraph& g, std::span<const Building> buildings,
                                          const IsochroneParams& params, std::size_t workers) {
  std::vector<Isochrone> out(buildings.size());
  parallel_for(buildings.size(), workers,
               [&](std::size_t i) { out[i] = isochrone_for_building(g, buildings[i], params); });
  return out;
}

}  // namespace decamin
