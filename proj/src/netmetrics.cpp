#include "pitchlab/netmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pitchlab/features.hpp"
#include "pitchlab/io.hpp"

namespace pitchlab {

namespace {

std::vector<int> non_isolated_nodes(const std::vector<std::vector<double>>& w) {
  std::vector<int> nodes;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double deg = 0.0;
    for (double x : w[i]) deg += x;
    if (deg > 0.0) nodes.push_back(static_cast<int>(i));
  }
  return nodes;
}

// Connected components over the given nodes, each sorted ascending.
std::vector<std::vector<int>> components_of(
    const std::vector<std::vector<double>>& w, const std::vector<int>& nodes) {
  std::vector<int> label(w.size(), -1);
  std::vector<std::vector<int>> comps;
  for (int start : nodes) {
    if (label[static_cast<std::size_t>(start)] != -1) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::deque<int> queue{start};
    label[static_cast<std::size_t>(start)] = id;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      comps.back().push_back(v);
      for (std::size_t u = 0; u < w.size(); ++u) {
        if (w[static_cast<std::size_t>(v)][u] > 0.0 &&
            label[u] == -1) {
          label[u] = id;
          queue.push_back(static_cast<int>(u));
        }
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

}  // namespace

std::vector<double> current_flow_betweenness(
    const std::vector<std::vector<double>>& sym_weight) {
  const std::size_t n_total = sym_weight.size();
  std::vector<double> result(n_total, 0.0);
  const std::vector<int> nodes = non_isolated_nodes(sym_weight);
  const std::size_t n = nodes.size();
  if (n < 3) return result;

  for (const std::vector<int>& comp : components_of(sym_weight, nodes)) {
    const std::size_t m = comp.size();
    if (m < 2) continue;

    // Ground the last node of the component and factor the reduced
    // Laplacian once; pair potentials then come from superposition.
    std::vector<int> grounded(comp.begin(), comp.end() - 1);
    DenseMatrix lap(m - 1, std::vector<double>(m - 1, 0.0));
    for (std::size_t i = 0; i < m - 1; ++i) {
      double deg = 0.0;
      for (double x : sym_weight[static_cast<std::size_t>(grounded[i])]) deg += x;
      lap[i][i] = deg;
      for (std::size_t j = 0; j < m - 1; ++j) {
        if (i != j) {
          lap[i][j] = -sym_weight[static_cast<std::size_t>(grounded[i])]
                                 [static_cast<std::size_t>(grounded[j])];
        }
      }
    }
    LdltFactor factor(std::move(lap));

    // potential[k] has the node potentials (over comp, ground last = 0)
    // for a unit current injected at comp[k] and drained at the ground.
    std::vector<std::vector<double>> potential(m, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < m - 1; ++k) {
      std::vector<double> e(m - 1, 0.0);
      e[k] = 1.0;
      std::vector<double> p = factor.solve(std::move(e));
      for (std::size_t i = 0; i < m - 1; ++i) potential[k][i] = p[i];
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t t = s + 1; t < m; ++t) pairs.emplace_back(s, t);
    }
    std::vector<std::vector<double>> tau(
        pairs.size(), std::vector<double>(m, 0.0));

#pragma omp parallel for schedule(static)
    for (long long pi = 0; pi < static_cast<long long>(pairs.size()); ++pi) {
      const auto [s, t] = pairs[static_cast<std::size_t>(pi)];
      std::vector<double> p(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        p[i] = potential[s][i] - potential[t][i];
      }
      for (std::size_t vi = 0; vi < m; ++vi) {
        if (vi == s || vi == t) continue;
        double through = 0.0;
        for (std::size_t ui = 0; ui < m; ++ui) {
          const double c = sym_weight[static_cast<std::size_t>(comp[vi])]
                                     [static_cast<std::size_t>(comp[ui])];
          if (c > 0.0) through += c * std::abs(p[vi] - p[ui]);
        }
        tau[static_cast<std::size_t>(pi)][vi] = 0.5 * through;
      }
    }

    for (const auto& contribution : tau) {
      for (std::size_t vi = 0; vi < m; ++vi) {
        result[static_cast<std::size_t>(comp[vi])] += contribution[vi];
      }
    }
  }

  const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (double& v : result) v /= norm;
  return result;
}

std::vector<double> shortest_path_betweenness(
    const std::vector<std::vector<double>>& sym_weight) {
  const std::size_t n_total = sym_weight.size();
  std::vector<double> result(n_total, 0.0);
  const std::vector<int> nodes = non_isolated_nodes(sym_weight);
  const std::size_t n = nodes.size();
  if (n < 3) return result;

  std::vector<std::vector<int>> adj(n_total);
  for (std::size_t i = 0; i < n_total; ++i) {
    for (std::size_t j = 0; j < n_total; ++j) {
      if (sym_weight[i][j] > 0.0) adj[i].push_back(static_cast<int>(j));
    }
  }

  // One dependency accumulation per source; sources sum each unordered
  // pair twice.
  std::vector<std::vector<double>> delta(
      nodes.size(), std::vector<double>(n_total, 0.0));

#pragma omp parallel for schedule(static)
  for (long long si = 0; si < static_cast<long long>(nodes.size()); ++si) {
    const int s = nodes[static_cast<std::size_t>(si)];
    std::vector<int> dist(n_total, -1);
    std::vector<double> sigma(n_total, 0.0);
    std::vector<std::vector<int>> pred(n_total);
    std::vector<int> order;
    dist[static_cast<std::size_t>(s)] = 0;
    sigma[static_cast<std::size_t>(s)] = 1.0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int u : adj[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(u)] == -1) {
          dist[static_cast<std::size_t>(u)] =
              dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(u);
        }
        if (dist[static_cast<std::size_t>(u)] ==
            dist[static_cast<std::size_t>(v)] + 1) {
          sigma[static_cast<std::size_t>(u)] +=
              sigma[static_cast<std::size_t>(v)];
          pred[static_cast<std::size_t>(u)].push_back(v);
        }
      }
    }
    std::vector<double>& dep = delta[static_cast<std::size_t>(si)];
    std::vector<double> acc(n_total, 0.0);
    for (std::size_t k = order.size(); k-- > 0;) {
      const int v = order[k];
      for (int u : pred[static_cast<std::size_t>(v)]) {
        acc[static_cast<std::size_t>(u)] +=
            sigma[static_cast<std::size_t>(u)] /
            sigma[static_cast<std::size_t>(v)] *
            (1.0 + acc[static_cast<std::size_t>(v)]);
      }
      if (v != s) dep[static_cast<std::size_t>(v)] = acc[static_cast<std::size_t>(v)];
    }
  }

  for (const auto& dep : delta) {
    for (std::size_t v = 0; v < n_total; ++v) result[v] += dep[v];
  }
  const double norm =
      2.0 * static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (double& v : result) v /= norm;
  return result;
}

PassingNetwork build_passing_network(const EventStore& store,
                                     std::int64_t match_id,
                                     std::int64_t team_id) {
  PassingNetwork net;
  net.match_id = match_id;
  net.team_id = team_id;

  const auto span = store.events_for(match_id);
  std::vector<const Event*> stream;
  for (const Event& e : span) {
    if (e.team_id == team_id && e.kind != EventKind::Interruption) {
      stream.push_back(&e);
    }
  }

  std::map<std::int64_t, int> managed;
  std::vector<std::pair<std::int64_t, std::int64_t>> edge_list;
  std::vector<Pos> touches;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Event& e = *stream[i];
    if (e.kind != EventKind::Pass) continue;
    ++net.passes_made;
    ++managed[e.player_id];
    touches.push_back(e.origin);
    if (!e.accurate() || i + 1 >= stream.size()) continue;
    const Event& next = *stream[i + 1];
    if (next.period != e.period || next.player_id == e.player_id) continue;
    edge_list.emplace_back(e.player_id, next.player_id);
    ++managed[next.player_id];
    if (e.destination) touches.push_back(*e.destination);
  }

  for (const auto& [player, count] : managed) net.players.push_back(player);
  for (std::size_t i = 0; i < net.players.size(); ++i) {
    net.index[net.players[i]] = static_cast<int>(i);
  }
  const std::size_t n = net.players.size();
  net.weight.assign(n, std::vector<double>(n, 0.0));
  net.managed.assign(n, 0);
  for (const auto& [player, count] : managed) {
    net.managed[static_cast<std::size_t>(net.index[player])] = count;
  }
  for (const auto& [from, to] : edge_list) {
    net.weight[static_cast<std::size_t>(net.index[from])]
              [static_cast<std::size_t>(net.index[to])] += 1.0;
  }
  net.touch_positions = std::move(touches);
  return net;
}

std::vector<std::vector<double>> symmetrized(const PassingNetwork& net) {
  const std::size_t n = net.players.size();
  std::vector<std::vector<double>> sym(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sym[i][j] = net.weight[i][j] + net.weight[j][i];
    }
  }
  return sym;
}

HComponents h_components(const PassingNetwork& net) {
  HComponents c;
  c.w = net.passes_made;
  std::vector<double> managed(net.managed.begin(), net.managed.end());
  c.mu_p = mean_of(managed);
  c.sigma_p = pop_std(managed);
  const std::array<int, 100> zones = zone_counts(net.touch_positions);
  std::vector<double> z(zones.begin(), zones.end());
  c.mu_z = mean_of(z);
  c.sigma_z = pop_std(z);
  return c;
}

double h_indicator(const HComponents& c) {
  const std::array<std::pair<const char*, double>, 5> parts = {{
      {"total passes", c.w},
      {"player mean", c.mu_p},
      {"player spread", c.sigma_p},
      {"zone mean", c.mu_z},
      {"zone spread", c.sigma_z},
  }};
  double denom = 0.0;
  for (const auto& [name, value] : parts) {
    if (value <= 0.0) {
      throw UndefinedValueError(
          std::string("network indicator undefined: ") + name +
          " is not positive");
    }
    denom += 1.0 / value;
  }
  return 5.0 / denom;
}

NetworkSummary summarize_network(const EventStore& store, std::int64_t match_id,
                                 std::int64_t team_id) {
  NetworkSummary s;
  s.net = build_passing_network(store, match_id, team_id);
  const auto sym = symmetrized(s.net);
  s.flow_betweenness = current_flow_betweenness(sym);
  s.path_betweenness = shortest_path_betweenness(sym);

  const std::vector<int> nodes = non_isolated_nodes(sym);
  if (!nodes.empty()) {
    double sum = 0.0;
    for (int v : nodes) sum += s.flow_betweenness[static_cast<std::size_t>(v)];
    s.team_flow_centrality = sum / static_cast<double>(nodes.size());
  }

  s.h_parts = h_components(s.net);
  const HComponents& c = s.h_parts;
  if (c.w > 0.0 && c.mu_p > 0.0 && c.sigma_p > 0.0 && c.mu_z > 0.0 &&
      c.sigma_z > 0.0) {
    s.h_value = h_indicator(c);
  }
  return s;
}

void export_network_tables(const std::vector<NetworkSummary>& summaries,
                           const std::string& nodes_path,
                           const std::string& edges_path,
                           const std::string& config_hash) {
  CsvWriter nodes(nodes_path, config_hash,
                  {"match_id", "team_id", "player_id", "managed",
                   "flow_betweenness", "path_betweenness"});
  CsvWriter edges(edges_path, config_hash,
                  {"match_id", "team_id", "from_player", "to_player", "weight"});
  for (const NetworkSummary& s : summaries) {
    const PassingNetwork& net = s.net;
    for (std::size_t i = 0; i < net.players.size(); ++i) {
      nodes.row({std::to_string(net.match_id), std::to_string(net.team_id),
                 std::to_string(net.players[i]), std::to_string(net.managed[i]),
                 fmt_num(s.flow_betweenness[i]), fmt_num(s.path_betweenness[i])});
    }
    for (std::size_t i = 0; i < net.players.size(); ++i) {
      for (std::size_t j = 0; j < net.players.size(); ++j) {
        if (net.weight[i][j] > 0.0) {
          edges.row({std::to_string(net.match_id), std::to_string(net.team_id),
                     std::to_string(net.players[i]),
                     std::to_string(net.players[j]), fmt_num(net.weight[i][j])});
        }
      }
    }
  }
}

}  // namespace pitchlab
