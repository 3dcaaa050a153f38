#pragma once

#include <cstdint>
#include <vector>

#include "pitchlab/common.hpp"

// Serial reference implementations, written independently of the production
// kernels and kept deliberately naive: fresh per-pair solves, explicit
// enumerations, convergence loops. Tests and the benchmark compare the fast
// paths against these.
namespace pitchlab::ref {

// Flow betweenness by solving a freshly grounded system per pair with
// Gauss-Jordan inversion. Limited to 8 nodes.
std::vector<double> brute_flow_betweenness(
    const std::vector<std::vector<double>>& sym_weight);

// Path betweenness by explicitly enumerating every shortest path of every
// pair. Limited to 8 nodes.
std::vector<double> enum_path_betweenness(
    const std::vector<std::vector<double>>& sym_weight);

// Lloyd iterations run to full convergence with no cap, from the same
// seeded k-means++ start as the production routine.
struct KMeansRef {
  std::vector<Pos> centers;
  std::vector<int> assignment;
};
KMeansRef kmeans_converged(const std::vector<Pos>& points, int k,
                           std::uint64_t seed);

// Two-sided permutation test of the absolute mean difference: pooled values
// are reshuffled n_permutations times and p = (1 + #{at least as extreme})
// / (n_permutations + 1).
double permutation_mean_diff_p(const std::vector<double>& a,
                               const std::vector<double>& b,
                               int n_permutations, std::uint64_t seed);

// U statistic of the first sample counted pair by pair, ties worth half.
double pair_count_u(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace pitchlab::ref
