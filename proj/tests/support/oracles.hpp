#pragma once

// Independent reference implementations used only by the tests. They favour
// the most direct formulation over speed.

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Edge weights by iterating buildings x ordered service pairs.
/// `reach[b]` lists service indices reachable from building b.
Matrix service_weights(const std::vector<std::vector<std::size_t>>& reach, const std::vector<double>& population,
                       const std::vector<std::size_t>& type_of);

/// Stationary distribution of the teleporting walk, solved as a dense linear
/// system with Gaussian elimination (no iteration).
std::vector<double> visit_rates(const Matrix& w, double teleport);

/// Two-level codelength written as q H(Q) + sum_m p_m H(P_m).
double codelength(const Matrix& w, const std::vector<double>& visit, double teleport,
                  const std::vector<std::size_t>& module);

/// Calls fn for every set partition of {0..n-1} as a restricted growth string.
void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& fn);

struct Best {
  double codelength = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> module;
};
Best exhaustive_minimum(const Matrix& w, double teleport);

/// All-pairs shortest paths (Floyd-Warshall) on an undirected graph.
Matrix floyd(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges);

}  // namespace oracle
