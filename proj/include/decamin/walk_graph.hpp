#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "decamin/geometry.hpp"
#include "decamin/ingest.hpp"

namespace decamin {

/// Undirected pedestrian graph over projected coordinates with an R-tree
/// over edge geometry for snapping. Read-only after construction.
class WalkGraph {
 public:
  struct Edge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    double length = 0.0;             // routing length, m
    geo::Polyline geometry;          // from -> to
    std::vector<double> cumulative;  // geometric distance at each vertex
  };

  struct Snap {
    std::size_t edge = 0;
    double offset = 0.0;  // routing distance from edge.from
    geo::Point point;
    double distance = 0.0;  // from the query point to `point`
  };

  static WalkGraph build(const WalkNetworkSource& source, const Projection& proj);

  WalkGraph(WalkGraph&&) noexcept;
  WalkGraph& operator=(WalkGraph&&) noexcept;
  ~WalkGraph();

  std::size_t node_count() const { return positions_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const geo::Point& position(std::size_t node) const { return positions_[node]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const std::uint32_t> incident(std::size_t node) const {
    return {incident_.data() + offsets_[node], incident_.data() + offsets_[node + 1]};
  }

  std::size_t component_count() const { return component_count_; }
  std::size_t component_of(std::size_t node) const { return component_[node]; }

  /// Nearest point on any edge; nullopt beyond `max_distance`.
  std::optional<Snap> snap(const geo::Point& p, double max_distance) const;

 private:
  WalkGraph();

  struct SpatialIndex;

  std::vector<geo::Point> positions_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> incident_;
  std::vector<std::size_t> component_;
  std::size_t component_count_ = 0;
  std::unique_ptr<SpatialIndex> index_;
};

inline WalkGraph build_graph(const WalkNetworkSource& source, const Projection& proj) {
  return WalkGraph::build(source, proj);
}

struct ReachedNode {
  std::uint32_t node = 0;
  double distance = 0.0;
};

/// Shortest-path tree from a snapped origin truncated at a distance budget.
struct Reach {
  WalkGraph::Snap origin;
  double budget_m = 0.0;
  std::vector<ReachedNode> nodes;      // sorted by node id, distance <= budget
  std::vector<geo::Polyline> segments;  // reached parts of edges, clipped exactly
};

/// Budget distance in meters for a walking time and speed.
inline double budget_distance(double budget_s, double speed_m_s) { return budget_s * speed_m_s; }

Reach reachable_set(const WalkGraph& g, const WalkGraph::Snap& origin, double budget_m);

/// Snaps `origin` (within `snap_limit_m`) and runs reachable_set; nullopt when
/// the origin cannot be snapped.
std::optional<Reach> reachable_set(const WalkGraph& g, const geo::Point& origin, double budget_s, double speed_m_s,
                                   double snap_limit_m = 200.0);

}  // namespace decamin
