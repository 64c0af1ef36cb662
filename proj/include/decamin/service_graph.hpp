#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "decamin/model.hpp"
#include "decamin/scoring.hpp"

namespace decamin {

/// Directed weighted graph over services, stored as sorted out-arcs (CSR).
class ServiceGraph {
 public:
  struct Arc {
    std::uint32_t target = 0;
    double weight = 0.0;
  };

  ServiceGraph() = default;

  /// Arcs with zero weight are dropped; parallel arcs are summed in input order.
  static ServiceGraph from_arcs(std::size_t nodes, std::span<const std::tuple<std::size_t, std::size_t, double>> arcs);

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t arc_count() const { return arcs_.size(); }
  std::span<const Arc> out(std::size_t node) const {
    return {arcs_.data() + offsets_[node], arcs_.data() + offsets_[node + 1]};
  }
  /// Weight of the arc i -> j, 0 when absent.
  double weight(std::size_t i, std::size_t j) const;
  double out_strength(std::size_t node) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Arc> arcs_;
};

/// For every building and every ordered pair (i, j) of reachable services of
/// different types, adds P / n(type of j) to the arc i -> j, where n counts
/// the building's reachable services of that type. Buildings are folded in
/// order so the sums are reproducible. `population[k]` belongs to
/// `access[k]`. Throws InputError on an unknown service index.
ServiceGraph build_service_graph(std::span<const AccessSet> access, std::span<const double> population,
                                 std::span<const ServicePoint> services);

/// src,dst,weight (service ids).
void write_edges_csv(const std::filesystem::path& path, const ServiceGraph& g, std::span<const ServicePoint> services);

/// id,type,community (community empty when unknown).
void write_nodes_csv(const std::filesystem::path& path, std::span<const ServicePoint> services,
                     const ServiceTaxonomy& taxonomy, std::span<const std::size_t> community);

}  // namespace decamin
