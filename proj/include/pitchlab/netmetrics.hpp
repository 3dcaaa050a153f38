#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pitchlab/dense.hpp"
#include "pitchlab/events.hpp"

namespace pitchlab {

// Directed accurate-pass graph of one team in one match. The receiver of an
// accurate pass is the player of the team's next non-stoppage event in the
// same period; passes with no such event, or bouncing straight back to the
// passer, have no receiver. A player "manages" a pass by making one (accurate
// or not) or by receiving an accurate one.
struct PassingNetwork {
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;
  std::vector<std::int64_t> players;  // sorted; everyone who managed a pass
  std::map<std::int64_t, int> index;
  std::vector<std::vector<double>> weight;  // weight[i][j]: accurate i -> j
  std::vector<int> managed;
  int passes_made = 0;
  // One position per managed pass: origin when making, destination when
  // receiving. Feeds the zone statistics of the network indicator.
  std::vector<Pos> touch_positions;
};

PassingNetwork build_passing_network(const EventStore& store,
                                     std::int64_t match_id,
                                     std::int64_t team_id);

// weight[i][j] + weight[j][i], the undirected conductance matrix.
std::vector<std::vector<double>> symmetrized(const PassingNetwork& net);

// The five components whose harmonic mean summarizes a passing network:
// total passes, mean and spread of per-player managed passes, mean and
// spread of managed-pass counts over the 10 x 10 zone partition.
struct HComponents {
  double w = 0.0;
  double mu_p = 0.0;
  double sigma_p = 0.0;
  double mu_z = 0.0;
  double sigma_z = 0.0;
};

HComponents h_components(const PassingNetwork& net);

// Harmonic mean of the five components; throws UndefinedValueError when a
// component is not strictly positive.
double h_indicator(const HComponents& c);

// Centralities over a symmetric non-negative weight matrix. Both sum each
// node's credit over unordered pairs (endpoints excluded) and divide by
// (n - 1)(n - 2), with n the number of non-isolated nodes; isolated nodes
// score zero. Fewer than three non-isolated nodes means all zeros.
//
// Flow betweenness sends a unit current between the pair through edges of
// conductance weight[i][j] and credits each node half the absolute current
// through its incident edges. Path betweenness counts unweighted shortest
// paths: credit is the fraction of them passing through the node.
std::vector<double> current_flow_betweenness(
    const std::vector<std::vector<double>>& sym_weight);
std::vector<double> shortest_path_betweenness(
    const std::vector<std::vector<double>>& sym_weight);

struct NetworkSummary {
  PassingNetwork net;
  std::vector<double> flow_betweenness;
  std::vector<double> path_betweenness;
  // Mean flow betweenness over non-isolated players; empty when the graph
  // has no edges.
  std::optional<double> team_flow_centrality;
  HComponents h_parts;
  std::optional<double> h_value;  // empty when a component is degenerate
};

NetworkSummary summarize_network(const EventStore& store, std::int64_t match_id,
                                 std::int64_t team_id);

// Node and edge tables for a set of summaries, one row per player and per
// directed edge.
void export_network_tables(const std::vector<NetworkSummary>& summaries,
                           const std::string& nodes_path,
                           const std::string& edges_path,
                           const std::string& config_hash);

}  // namespace pitchlab
