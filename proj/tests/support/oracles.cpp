#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace oracle {

Matrix service_weights(const std::vector<std::vector<std::size_t>>& reach, const std::vector<double>& population,
                       const std::vector<std::size_t>& type_of) {
  const std::size_t n = type_of.size();
  Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t b = 0; b < reach.size(); ++b) {
    for (std::size_t i : reach[b]) {
      for (std::size_t j : reach[b]) {
        if (type_of[i] == type_of[j]) continue;
        std::size_t same = 0;
        for (std::size_t k : reach[b]) same += type_of[k] == type_of[j];
        w[i][j] += population[b] / static_cast<double>(same);
      }
    }
  }
  return w;
}

std::vector<double> visit_rates(const Matrix& w, double teleport) {
  const std::size_t n = w.size();
  // Transition matrix T[i][j] = P(i -> j).
  Matrix t(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[i][j];
    for (std::size_t j = 0; j < n; ++j)
      t[i][j] = s > 0.0 ? (1.0 - teleport) * w[i][j] / s + teleport / static_cast<double>(n)
                        : 1.0 / static_cast<double>(n);
  }
  // Solve p (T - I) = 0 with sum p = 1: rows of A are equations j.
  Matrix a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) a[j][i] = t[i][j] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) a[n - 1][i] = 1.0;
  a[n - 1][n] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    if (std::abs(a[col][col]) < 1e-300) throw std::runtime_error("singular system");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = a[i][n] / a[i][i];
  return p;
}

namespace {
double entropy_term(double x, double total) { return x > 0.0 ? -(x / total) * std::log2(x / total) : 0.0; }
}  // namespace

double codelength(const Matrix& w, const std::vector<double>& visit, double teleport,
                  const std::vector<std::size_t>& module) {
  const std::size_t n = w.size();
  std::size_t m = 0;
  for (std::size_t x : module) m = std::max(m, x + 1);
  std::vector<double> exit(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[i][j];
    if (s <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (module[j] != module[i]) exit[module[i]] += (1.0 - teleport) * visit[i] * w[i][j] / s;
  }
  double q = 0.0;
  for (double e : exit) q += e;
  double index_entropy = 0.0;
  for (double e : exit) index_entropy += entropy_term(e, q);
  double total = q > 0.0 ? q * index_entropy : 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double within = exit[k];
    for (std::size_t i = 0; i < n; ++i)
      if (module[i] == k) within += visit[i];
    if (within <= 0.0) continue;
    double h = entropy_term(exit[k], within);
    for (std::size_t i = 0; i < n; ++i)
      if (module[i] == k) h += entropy_term(visit[i], within);
    total += within * h;
  }
  return total;
}

void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (n == 0) return;
  std::vector<std::size_t> a(n, 0);
  std::vector<std::size_t> maxv(n, 0);  // max label among a[0..i-1]
  while (true) {
    fn(a);
    // Increment the restricted growth string from the right.
    std::size_t i = n - 1;
    while (i > 0) {
      std::size_t prefix_max = 0;
      for (std::size_t k = 0; k < i; ++k) prefix_max = std::max(prefix_max, a[k]);
      if (a[i] <= prefix_max) {
        ++a[i];
        for (std::size_t k = i + 1; k < n; ++k) a[k] = 0;
        break;
      }
      --i;
    }
    if (i == 0) return;
  }
}

Best exhaustive_minimum(const Matrix& w, double teleport) {
  const auto p = visit_rates(w, teleport);
  Best best;
  for_each_partition(w.size(), [&](const std::vector<std::size_t>& m) {
    const double l = codelength(w, p, teleport, m);
    if (l < best.codelength) best = {l, m};
  });
  return best;
}

Matrix floyd(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& [u, v, len] : edges) {
    d[u][v] = std::min(d[u][v], len);
    d[v][u] = std::min(d[v][u], len);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

}  // namespace oracle
