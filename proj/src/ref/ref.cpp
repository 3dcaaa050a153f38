#include "pitchlab/ref.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace pitchlab::ref {

namespace {

std::vector<int> active_nodes(const std::vector<std::vector<double>>& w) {
  std::vector<int> nodes;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double deg = 0.0;
    for (double x : w[i]) deg += x;
    if (deg > 0.0) nodes.push_back(static_cast<int>(i));
  }
  return nodes;
}

std::vector<int> bfs_dist(const std::vector<std::vector<double>>& w, int s) {
  std::vector<int> dist(w.size(), -1);
  std::deque<int> queue{s};
  dist[static_cast<std::size_t>(s)] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (std::size_t u = 0; u < w.size(); ++u) {
      if (w[static_cast<std::size_t>(v)][u] > 0.0 && dist[u] == -1) {
        dist[u] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(static_cast<int>(u));
      }
    }
  }
  return dist;
}

// Plain Gauss-Jordan inverse, no factorization reuse.
std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) {
      throw ValidationError("singular system in reference solver");
    }
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

void check_size(const std::vector<std::vector<double>>& w) {
  if (w.size() > 8) {
    throw ValidationError("reference betweenness is limited to 8 nodes");
  }
}

}  // namespace

std::vector<double> brute_flow_betweenness(
    const std::vector<std::vector<double>>& sym_weight) {
  check_size(sym_weight);
  const std::size_t n_total = sym_weight.size();
  std::vector<double> result(n_total, 0.0);
  const std::vector<int> nodes = active_nodes(sym_weight);
  if (nodes.size() < 3) return result;

  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const int s = nodes[a];
      const int t = nodes[b];
      const std::vector<int> dist = bfs_dist(sym_weight, s);
      if (dist[static_cast<std::size_t>(t)] == -1) continue;

      // Every node reachable from s joins the system; t is the ground.
      std::vector<int> comp;
      for (int v : nodes) {
        if (dist[static_cast<std::size_t>(v)] != -1 && v != t) comp.push_back(v);
      }
      const std::size_t m = comp.size();
      std::vector<std::vector<double>> lap(m, std::vector<double>(m, 0.0));
      for (std::size_t i = 0; i < m; ++i) {
        double deg = 0.0;
        for (double x : sym_weight[static_cast<std::size_t>(comp[i])]) deg += x;
        lap[i][i] = deg;
        for (std::size_t j = 0; j < m; ++j) {
          if (i != j) {
            lap[i][j] = -sym_weight[static_cast<std::size_t>(comp[i])]
                                   [static_cast<std::size_t>(comp[j])];
          }
        }
      }
      const auto inv = invert(lap);

      std::vector<double> p(n_total, 0.0);
      std::size_t s_idx = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (comp[i] == s) s_idx = i;
      }
      for (std::size_t i = 0; i < m; ++i) {
        p[static_cast<std::size_t>(comp[i])] = inv[i][s_idx];
      }

      for (int v : comp) {
        if (v == s) continue;
        double through = 0.0;
        for (std::size_t u = 0; u < n_total; ++u) {
          if (sym_weight[static_cast<std::size_t>(v)][u] > 0.0) {
            through += sym_weight[static_cast<std::size_t>(v)][u] *
                       std::abs(p[static_cast<std::size_t>(v)] - p[u]);
          }
        }
        result[static_cast<std::size_t>(v)] += 0.5 * through;
      }
    }
  }

  const double n = static_cast<double>(nodes.size());
  for (double& v : result) v /= (n - 1.0) * (n - 2.0);
  return result;
}

std::vector<double> enum_path_betweenness(
    const std::vector<std::vector<double>>& sym_weight) {
  check_size(sym_weight);
  const std::size_t n_total = sym_weight.size();
  std::vector<double> result(n_total, 0.0);
  const std::vector<int> nodes = active_nodes(sym_weight);
  if (nodes.size() < 3) return result;

  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const int s = nodes[a];
      const int t = nodes[b];
      const std::vector<int> dist = bfs_dist(sym_weight, s);
      if (dist[static_cast<std::size_t>(t)] == -1) continue;
      const int target_len = dist[static_cast<std::size_t>(t)];

      // Every shortest path, spelled out node by node.
      std::vector<std::vector<int>> paths;
      std::vector<int> walk{s};
      std::function<void(int)> extend = [&](int v) {
        if (v == t) {
          paths.push_back(walk);
          return;
        }
        for (std::size_t u = 0; u < n_total; ++u) {
          if (sym_weight[static_cast<std::size_t>(v)][u] > 0.0 &&
              dist[u] == dist[static_cast<std::size_t>(v)] + 1 &&
              dist[u] <= target_len) {
            walk.push_back(static_cast<int>(u));
            extend(static_cast<int>(u));
            walk.pop_back();
          }
        }
      };
      extend(s);

      if (paths.empty()) continue;
      const double share = 1.0 / static_cast<double>(paths.size());
      for (const auto& path : paths) {
        for (std::size_t k = 1; k + 1 < path.size(); ++k) {
          result[static_cast<std::size_t>(path[k])] += share;
        }
      }
    }
  }

  const double n = static_cast<double>(nodes.size());
  for (double& v : result) v /= (n - 1.0) * (n - 2.0);
  return result;
}

KMeansRef kmeans_converged(const std::vector<Pos>& points, int k,
                           std::uint64_t seed) {
  const std::size_t n = points.size();
  const auto d2 = [](const Pos& p, const Pos& q) {
    return (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
  };

  // Same seeded start as the production routine, retyped here.
  Rng rng(seed);
  KMeansRef res;
  res.centers.push_back(
      points[rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (res.centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], d2(points[i], res.centers.back()));
      total += nearest[i];
    }
    if (total <= 0.0) {
      res.centers.push_back(
          points[rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)]);
      continue;
    }
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      cum += nearest[i];
      if (cum > u) {
        pick = i;
        break;
      }
    }
    res.centers.push_back(points[pick]);
  }

  res.assignment.assign(n, -1);
  while (true) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < k; ++c) {
        if (d2(points[i], res.centers[static_cast<std::size_t>(c)]) <
            d2(points[i], res.centers[static_cast<std::size_t>(best)]))
          best = c;
      }
      if (res.assignment[i] != best) {
        res.assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      double sx = 0.0, sy = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.assignment[i] == c) {
          sx += points[i].x;
          sy += points[i].y;
          ++count;
        }
      }
      if (count > 0) {
        res.centers[static_cast<std::size_t>(c)] = {sx / count, sy / count};
      }
    }
  }
  return res;
}

double permutation_mean_diff_p(const std::vector<double>& a,
                               const std::vector<double>& b,
                               int n_permutations, std::uint64_t seed) {
  const std::size_t na = a.size();
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());

  const auto mean_diff = [na, &pooled]() {
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      (i < na ? sum_a : sum_b) += pooled[i];
    }
    return std::abs(sum_a / static_cast<double>(na) -
                    sum_b / static_cast<double>(pooled.size() - na));
  };

  const double observed = mean_diff();
  Rng rng(seed);
  int at_least = 0;
  for (int k = 0; k < n_permutations; ++k) {
    rng.shuffle(pooled);
    if (mean_diff() >= observed - 1e-12) ++at_least;
  }
  return static_cast<double>(1 + at_least) /
         static_cast<double>(n_permutations + 1);
}

double pair_count_u(const std::vector<double>& a,
                    const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) {
        u += 1.0;
      } else if (x == y) {
        u += 0.5;
      }
    }
  }
  return u;
}

}  // namespace pitchlab::ref
