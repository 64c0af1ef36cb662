#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "decamin/service_graph.hpp"

namespace decamin {

/// Random-walk flow on a service graph: stationary visit rates from a
/// teleporting walk, and per-arc flow of the recorded (non-teleport) steps,
/// aligned with the graph's arc order.
struct Flow {
  std::vector<double> visit;
  std::vector<double> link;  // link[k] for the k-th arc in CSR order
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Power iteration; a walker follows an out-arc with probability
/// 1 - teleport (proportional to weight) and otherwise jumps to a uniformly
/// random node. Nodes without out-arcs always jump. Converged when the
/// largest change of a rate is below `tolerance`; ConvergenceError after
/// `max_iterations`.
Flow stationary_flow(const ServiceGraph& g, double teleport = 0.15, double tolerance = 1e-12,
                     std::size_t max_iterations = 10'000);

/// Two-level map equation in bits for a node -> module assignment.
double map_equation(const ServiceGraph& g, const Flow& flow, std::span<const std::size_t> module);

struct Partition {
  std::vector<std::size_t> module;  // contiguous ids, numbered by first appearance
  std::size_t module_count = 0;
  double codelength = 0.0;
};

struct CommunityOptions {
  double teleport = 0.15;
  std::uint64_t seed = 1;
  int trials = 10;
  std::size_t workers = 1;
};

/// Greedy map-equation minimization: repeated local node moves with module
/// aggregation, refined by fine and coarse tuning, best of `trials` seeded
/// runs (ties go to the earliest trial). Deterministic for a fixed seed.
Partition detect_communities(const ServiceGraph& g, const CommunityOptions& options = {});

/// Relabels so ids are contiguous and appear in increasing order.
std::size_t renumber_modules(std::vector<std::size_t>& module);

}  // namespace decamin
