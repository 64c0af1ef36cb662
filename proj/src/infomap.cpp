#include "decamin/infomap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "decamin/error.hpp"
#include "decamin/parallel.hpp"

namespace decamin {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

constexpr double kMinImprovement = 1e-10;
constexpr std::size_t kAllModulesLimit = 64;

}  // namespace

Flow stationary_flow(const ServiceGraph& g, double teleport, double tolerance, std::size_t max_iterations) {
  const std::size_t n = g.node_count();
  if (n == 0) throw Error("stationary flow of an empty graph");
  if (!(teleport > 0.0 && teleport < 1.0)) throw Error("teleport probability must lie in (0, 1)");
  std::vector<double> strength(n);
  for (std::size_t u = 0; u < n; ++u) strength[u] = g.out_strength(u);

  Flow f;
  f.visit.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  bool converged = false;
  for (f.iterations = 1; f.iterations <= max_iterations; ++f.iterations) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      if (strength[u] <= 0.0) dangling += f.visit[u];
    const double jump = (teleport * (1.0 - dangling) + dangling) / static_cast<double>(n);
    std::fill(next.begin(), next.end(), jump);
    for (std::size_t u = 0; u < n; ++u) {
      if (strength[u] <= 0.0) continue;
      const double step = (1.0 - teleport) * f.visit[u] / strength[u];
      for (const auto& a : g.out(u)) next[a.target] += step * a.weight;
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    f.residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= total;
      f.residual = std::max(f.residual, std::abs(next[v] - f.visit[v]));
    }
    f.visit.swap(next);
    if (f.residual < tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("visit rates did not converge in " + std::to_string(max_iterations) + " iterations",
                           f.residual);

  f.link.reserve(g.arc_count());
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& a : g.out(u)) f.link.push_back((1.0 - teleport) * f.visit[u] * a.weight / strength[u]);
  }
  return f;
}

double map_equation(const ServiceGraph& g, const Flow& flow, std::span<const std::size_t> module) {
  const std::size_t n = g.node_count();
  if (module.size() != n || flow.visit.size() != n) throw Error("partition does not match the graph");
  std::vector<std::size_t> ids(module.begin(), module.end());
  const std::size_t m = renumber_modules(ids);
  std::vector<double> exit(m, 0.0);
  std::vector<double> mflow(m, 0.0);
  double node_terms = 0.0;
  std::size_t k = 0;
  for (std::size_t u = 0; u < n; ++u) {
    mflow[ids[u]] += flow.visit[u];
    node_terms += plogp(flow.visit[u]);
    for (const auto& a : g.out(u)) {
      if (ids[a.target] != ids[u]) exit[ids[u]] += flow.link[k];
      ++k;
    }
  }
  double sum_exit = 0.0;
  double exit_terms = 0.0;
  double module_terms = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sum_exit += exit[i];
    exit_terms += plogp(exit[i]);
    module_terms += plogp(exit[i] + mflow[i]);
  }
  return plogp(sum_exit) - 2.0 * exit_terms - node_terms + module_terms;
}

std::size_t renumber_modules(std::vector<std::size_t>& module) {
  std::vector<std::size_t> seen;
  std::vector<std::size_t> label;
  for (std::size_t& m : module) {
    if (m >= label.size()) label.resize(m + 1, std::numeric_limits<std::size_t>::max());
    if (label[m] == std::numeric_limits<std::size_t>::max()) label[m] = seen.size(), seen.push_back(m);
    m = label[m];
  }
  return seen.size();
}

namespace {

using Link = std::pair<std::uint32_t, double>;

// Flow network at one aggregation level. Links between distinct nodes only.
struct Net {
  std::vector<double> flow;
  std::vector<std::vector<Link>> out;
  std::vector<std::vector<Link>> in;
  std::vector<double> out_total;
  std::vector<double> in_total;

  std::size_t size() const { return flow.size(); }

  void finish() {
    out_total.assign(size(), 0.0);
    in_total.assign(size(), 0.0);
    for (std::size_t u = 0; u < size(); ++u) {
      for (const auto& [v, f] : out[u]) out_total[u] += f;
      for (const auto& [v, f] : in[u]) in_total[u] += f;
    }
  }
};

Net leaf_net(const ServiceGraph& g, const Flow& flow) {
  Net net;
  const std::size_t n = g.node_count();
  net.flow = flow.visit;
  net.out.resize(n);
  net.in.resize(n);
  std::size_t k = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& a : g.out(u)) {
      if (a.target != u && flow.link[k] > 0.0) {
        net.out[u].emplace_back(a.target, flow.link[k]);
        net.in[a.target].emplace_back(static_cast<std::uint32_t>(u), flow.link[k]);
      }
      ++k;
    }
  }
  net.finish();
  return net;
}

// Collapses `leaf` by `group` (contiguous ids), summing flows; links inside a
// group vanish.
Net aggregate(const Net& leaf, const std::vector<std::size_t>& group, std::size_t groups) {
  Net net;
  net.flow.assign(groups, 0.0);
  net.out.resize(groups);
  net.in.resize(groups);
  for (std::size_t u = 0; u < leaf.size(); ++u) net.flow[group[u]] += leaf.flow[u];
  std::vector<double> acc(groups, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<std::vector<std::size_t>> members(groups);
  for (std::size_t u = 0; u < leaf.size(); ++u) members[group[u]].push_back(u);
  for (std::size_t gid = 0; gid < groups; ++gid) {
    for (std::size_t u : members[gid])
      for (const auto& [v, f] : leaf.out[u]) {
        const auto h = static_cast<std::uint32_t>(group[v]);
        if (h == gid) continue;
        if (acc[h] == 0.0) touched.push_back(h);
        acc[h] += f;
      }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t h : touched) {
      net.out[gid].emplace_back(h, acc[h]);
      net.in[h].emplace_back(static_cast<std::uint32_t>(gid), acc[h]);
      acc[h] = 0.0;
    }
    touched.clear();
  }
  net.finish();
  return net;
}

// Subnetwork induced by `nodes` of `leaf`, links kept only among them.
Net induced(const Net& leaf, const std::vector<std::size_t>& nodes, std::vector<std::size_t>& local) {
  Net net;
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = i;
  net.flow.resize(nodes.size());
  net.out.resize(nodes.size());
  net.in.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    net.flow[i] = leaf.flow[nodes[i]];
    for (const auto& [v, f] : leaf.out[nodes[i]]) {
      const std::size_t j = local[v];
      if (j < nodes.size() && nodes[j] == v) {
        net.out[i].emplace_back(static_cast<std::uint32_t>(j), f);
        net.in[j].emplace_back(static_cast<std::uint32_t>(i), f);
      }
    }
  }
  net.finish();
  return net;
}

// Module bookkeeping for the codelength terms that change under moves.
class State {
 public:
  State(const Net& net, std::vector<std::size_t> module) : net_(net), module_(std::move(module)) {
    const std::size_t n = net.size();
    exit_.assign(n, 0.0);
    mflow_.assign(n, 0.0);
    members_.assign(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      mflow_[module_[u]] += net.flow[u];
      ++members_[module_[u]];
      for (const auto& [v, f] : net.out[u])
        if (module_[v] != module_[u]) exit_[module_[u]] += f;
    }
    for (std::size_t m = 0; m < n; ++m) {
      if (members_[m] == 0) free_.push_back(m);
      sum_exit_ += exit_[m];
      exit_terms_ += plogp(exit_[m]);
      module_terms_ += plogp(exit_[m] + mflow_[m]);
    }
    std::reverse(free_.begin(), free_.end());
    out_to_.assign(n, 0.0);
    in_from_.assign(n, 0.0);
  }

  // Codelength up to the constant node-entropy term.
  double partial() const { return plogp(sum_exit_) - 2.0 * exit_terms_ + module_terms_; }

  const std::vector<std::size_t>& module() const { return module_; }

  bool sweep_until_stable(std::mt19937_64& rng) {
    const std::size_t n = net_.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    bool any = false;
    for (int round = 0; round < 1000; ++round) {
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      std::size_t moves = 0;
      for (std::size_t u : order)
        if (try_move(u)) ++moves;
      if (moves == 0) break;
      any = true;
    }
    return any;
  }

 private:
  struct Delta {
    double exit_old, exit_new, value;
  };

  bool try_move(std::size_t u) {
    const std::size_t old = module_[u];
    touched_.clear();
    for (const auto& [v, f] : net_.out[u]) add(out_to_, module_[v], f);
    for (const auto& [v, f] : net_.in[u]) add(in_from_, module_[v], f);

    const double p = net_.flow[u];
    const double out_u = net_.out_total[u];
    // Leaving `old`.
    const double exit_old = exit_[old] - out_u + out_to_[old] + in_from_[old];
    const double base_sum = sum_exit_ - exit_[old] + exit_old;
    const double base_exit_terms = exit_terms_ - plogp(exit_[old]) + plogp(exit_old);
    const double base_module_terms =
        module_terms_ - plogp(exit_[old] + mflow_[old]) + plogp(exit_old + mflow_[old] - p);

    auto evaluate = [&](std::size_t target, double to, double from) {
      const double exit_new = exit_[target] + out_u - to - from;
      const double sum = base_sum - exit_[target] + exit_new;
      const double e_terms = base_exit_terms - plogp(exit_[target]) + plogp(exit_new);
      const double m_terms =
          base_module_terms - plogp(exit_[target] + mflow_[target]) + plogp(exit_new + mflow_[target] + p);
      return Delta{exit_old, exit_new, plogp(sum) - 2.0 * e_terms + m_terms};
    };

    const double current = partial();
    std::size_t best = old;
    Delta best_delta{0.0, 0.0, current};
    for (std::size_t m : touched_) {
      if (m == old) continue;
      Delta d = evaluate(m, out_to_[m], in_from_[m]);
      if (d.value < best_delta.value) best = m, best_delta = d;
    }
    // Small levels also try modules the node has no links with; joining
    // them can still shorten the index codebook.
    if (net_.size() <= kAllModulesLimit) {
      for (std::size_t m = 0; m < members_.size(); ++m) {
        if (m == old || members_[m] == 0 || out_to_[m] != 0.0 || in_from_[m] != 0.0) continue;
        Delta d = evaluate(m, 0.0, 0.0);
        if (d.value < best_delta.value) best = m, best_delta = d;
      }
    }
    if (members_[old] > 1 && !free_.empty()) {
      const std::size_t m = free_.back();
      Delta d = evaluate(m, 0.0, 0.0);
      if (d.value < best_delta.value) best = m, best_delta = d;
    }
    for (std::size_t m : touched_) out_to_[m] = in_from_[m] = 0.0;

    if (best == old || !(best_delta.value < current - kMinImprovement)) return false;

    sum_exit_ += best_delta.exit_old - exit_[old] + best_delta.exit_new - exit_[best];
    exit_terms_ += plogp(best_delta.exit_old) - plogp(exit_[old]) + plogp(best_delta.exit_new) - plogp(exit_[best]);
    module_terms_ += plogp(best_delta.exit_old + mflow_[old] - p) - plogp(exit_[old] + mflow_[old]) +
                     plogp(best_delta.exit_new + mflow_[best] + p) - plogp(exit_[best] + mflow_[best]);
    exit_[old] = best_delta.exit_old;
    exit_[best] = best_delta.exit_new;
    mflow_[old] -= p;
    mflow_[best] += p;
    if (members_[best] == 0) free_.pop_back();
    ++members_[best];
    if (--members_[old] == 0) {
      free_.push_back(old);
      exit_[old] = 0.0;
      mflow_[old] = 0.0;
    }
    module_[u] = best;
    return true;
  }

  void add(std::vector<double>& acc, std::size_t m, double f) {
    if (out_to_[m] == 0.0 && in_from_[m] == 0.0) touched_.push_back(m);
    acc[m] += f;
  }

  const Net& net_;
  std::vector<std::size_t> module_;
  std::vector<double> exit_;
  std::vector<double> mflow_;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> free_;
  std::vector<double> out_to_;
  std::vector<double> in_from_;
  std::vector<std::size_t> touched_;
  double sum_exit_ = 0.0;
  double exit_terms_ = 0.0;
  double module_terms_ = 0.0;
};

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Local moves and aggregation until no level moves anything. `group` maps
// leaves to the starting nodes, `start` those nodes to initial modules.
std::vector<std::size_t> core(const Net& leaf, std::vector<std::size_t> group, std::vector<std::size_t> start,
                              std::mt19937_64& rng) {
  std::size_t groups = start.size();
  while (true) {
    const Net net = aggregate(leaf, group, groups);
    State state(net, std::move(start));
    state.sweep_until_stable(rng);
    std::vector<std::size_t> mods = state.module();
    const std::size_t count = renumber_modules(mods);
    for (std::size_t& g : group) g = mods[g];
    if (count == groups) return group;
    groups = count;
    start = identity(count);
  }
}

double leaf_codelength(const Net& leaf, const std::vector<std::size_t>& module) {
  std::vector<std::size_t> m = module;
  renumber_modules(m);
  return State(leaf, std::move(m)).partial();
}

// Splits every module into submodules found on its own induced network,
// then lets the submodules move between modules.
std::vector<std::size_t> coarse_tune(const Net& leaf, const std::vector<std::size_t>& module, std::size_t modules,
                                     std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> members(modules);
  for (std::size_t u = 0; u < leaf.size(); ++u) members[module[u]].push_back(u);
  std::vector<std::size_t> local(leaf.size(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> group(leaf.size());
  std::vector<std::size_t> parent;
  for (std::size_t m = 0; m < modules; ++m) {
    const Net sub = induced(leaf, members[m], local);
    std::vector<std::size_t> sub_mod = core(sub, identity(sub.size()), identity(sub.size()), rng);
    const std::size_t count = renumber_modules(sub_mod);
    const std::size_t base = parent.size();
    for (std::size_t i = 0; i < members[m].size(); ++i) group[members[m][i]] = base + sub_mod[i];
    parent.insert(parent.end(), count, m);
  }
  return core(leaf, std::move(group), std::move(parent), rng);
}

struct TrialResult {
  std::vector<std::size_t> module;
  double codelength = std::numeric_limits<double>::infinity();
};

// Random clustering used as a starting point: in random order, each node
// joins the module of a random neighbour with a probability drawn per start.
std::vector<std::size_t> random_start(const Net& leaf, std::mt19937_64& rng) {
  const double join = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
  const std::size_t n = leaf.size();
  std::vector<std::size_t> module = identity(n);
  std::vector<std::size_t> order = identity(n);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  for (std::size_t u : order) {
    const std::size_t degree = leaf.out[u].size() + leaf.in[u].size();
    if (degree == 0 || std::generate_canonical<double, 53>(rng) >= join) continue;
    const std::size_t k = rng() % degree;
    const std::size_t v = k < leaf.out[u].size() ? leaf.out[u][k].first : leaf.in[u][k - leaf.out[u].size()].first;
    module[u] = module[v];
  }
  renumber_modules(module);
  return module;
}

TrialResult run_trial(const Net& leaf, std::mt19937_64& rng, bool randomized) {
  const std::size_t n = leaf.size();
  TrialResult best;
  best.module = core(leaf, identity(n), randomized ? random_start(leaf, rng) : identity(n), rng);
  best.codelength = leaf_codelength(leaf, best.module);

  const std::vector<std::size_t> one(n, 0);
  const double one_length = leaf_codelength(leaf, one);
  if (one_length < best.codelength - kMinImprovement) best = {one, one_length};

  for (int round = 0; round < 50; ++round) {
    bool improved = false;
    std::vector<std::size_t> fine = core(leaf, identity(n), best.module, rng);
    const double fine_length = leaf_codelength(leaf, fine);
    if (fine_length < best.codelength - kMinImprovement) {
      best = {std::move(fine), fine_length};
      improved = true;
    }
    std::vector<std::size_t> mods = best.module;
    const std::size_t count = renumber_modules(mods);
    std::vector<std::size_t> coarse = coarse_tune(leaf, mods, count, rng);
    const double coarse_length = leaf_codelength(leaf, coarse);
    if (coarse_length < best.codelength - kMinImprovement) {
      best = {std::move(coarse), coarse_length};
      improved = true;
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

Partition detect_communities(const ServiceGraph& g, const CommunityOptions& options) {
  const std::size_t n = g.node_count();
  if (n == 0) throw Error("community detection on an empty graph");
  const Flow flow = stationary_flow(g, options.teleport);
  const Net leaf = leaf_net(g, flow);
  const int trials = std::max(1, options.trials);

  // Small graphs are cheap, so each trial restarts a few times there.
  const std::size_t restarts = std::clamp<std::size_t>(256 / n, 1, 8);

  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), options.workers, [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    for (std::size_t r = 0; r < restarts; ++r) {
      TrialResult result = run_trial(leaf, rng, t > 0 || r > 0);
      if (result.codelength < results[t].codelength - 1e-12) results[t] = std::move(result);
    }
  });

  std::size_t best = 0;
  for (std::size_t t = 1; t < results.size(); ++t)
    if (results[t].codelength < results[best].codelength - 1e-12) best = t;

  Partition p;
  p.module = std::move(results[best].module);
  p.module_count = renumber_modules(p.module);
  p.codelength = map_equation(g, flow, p.module);
  spdlog::debug("communities: {} modules, codelength {:.6f} bits (trial {})", p.module_count, p.codelength, best);
  return p;
}

}  // namespace decamin
