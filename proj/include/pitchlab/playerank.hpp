#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pitchlab/events.hpp"
#include "pitchlab/features.hpp"

namespace pitchlab {

// Per-player technical counts: one accurate and one inaccurate slot per
// event kind, stoppage records excluded.
inline constexpr int kRatingFeatureCount = 14;
extern const std::array<const char*, kRatingFeatureCount> kRatingFeatureNames;

struct PerformanceVector {
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;
  std::int64_t player_id = 0;
  std::array<double, kRatingFeatureCount> raw{};
  int goals = 0;  // shots of the player carrying the goal tag
};

// Counts for one player in one match; a rostered player without events
// gets a zero vector. Throws NotFoundError for an unknown pairing.
PerformanceVector extract_performance_vector(const EventStore& store,
                                             std::int64_t match_id,
                                             std::int64_t player_id);

// One vector per (match, player) pair with at least one event.
std::vector<PerformanceVector> extract_all_vectors(const EventStore& store);

struct RatingWeights {
  std::array<double, kRatingFeatureCount> w{};
  double r_norm = 0.0;  // sum of absolute weights
  double alpha = 0.10;  // goal term weight
  // Corpus normalization bounds, carried so unseen matches rate the same.
  std::array<double, kRatingFeatureCount> feat_min{};
  std::array<double, kRatingFeatureCount> feat_max{};
};

// Min-max normalization against the stored bounds, clamped to [0, 1].
std::array<double, kRatingFeatureCount> normalize_vector(
    const RatingWeights& weights, const std::array<double, kRatingFeatureCount>& raw);

// Least-squares linear separator, solved by normal equations with a tiny
// ridge so never-occurring features stay solvable (their weight is 0).
std::array<double, kRatingFeatureCount> ls_separator(
    const std::vector<std::array<double, kRatingFeatureCount>>& xs,
    const std::vector<double>& ys);

// Learns feature weights from team-summed normalized vectors against a
// win / non-win outcome. Throws TrainingError when every match outcome
// falls on one side or the weights degenerate.
RatingWeights learn_weights(const EventStore& store,
                            const std::vector<PerformanceVector>& vectors,
                            double alpha);

// Weighted normalized sum in [-1, 1].
double rate(const RatingWeights& weights,
            const std::array<double, kRatingFeatureCount>& raw);

// Blends the technical rating with a capped goal bonus.
double combine_goals(double r, int goals, double alpha, int goal_cap);

struct MatchRating {
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;
  std::int64_t player_id = 0;
  double rating = 0.0;
  int goals = 0;
  double combined = 0.0;
};

std::vector<MatchRating> rate_all(const std::vector<PerformanceVector>& vectors,
                                  const RatingWeights& weights, int goal_cap);

struct TeamRatingStats {
  double avg = 0.0;
  double std = 0.0;  // population standard deviation
};

// Mean and spread of the combined scores; throws UndefinedValueError on an
// empty team.
TeamRatingStats pr_team_stats(const std::vector<double>& combined);

std::map<TeamMatchKey, TeamRatingStats> team_rating_table(
    const std::vector<MatchRating>& ratings);

struct KMeansResult {
  std::vector<Pos> centers;
  std::vector<int> assignment;
};

// Seeded k-means++ initialization followed by Lloyd iterations, capped.
// The squared-distance objective after each iteration can be traced.
KMeansResult kmeans(const std::vector<Pos>& points, int k, std::uint64_t seed,
                    int max_iters, std::vector<double>* objective_trace = nullptr);

struct RoleAssignment {
  int role = -1;  // -1 when no cluster holds enough of the player's matches
  double support = 0.0;
};

struct RoleModel {
  std::vector<Pos> centroids;
  std::map<std::int64_t, RoleAssignment> players;
};

// Modal cluster of a player's match clusters: largest count, ties to the
// lower index; assigned only when it covers at least `threshold` of them.
RoleAssignment modal_role(const std::vector<int>& match_clusters, int k,
                          double threshold);

// Mean event origin per (player, match), keyed by player.
std::map<std::int64_t, std::vector<Pos>> player_match_positions(
    const EventStore& store);

// Clusters per-match average positions and assigns each player the role
// holding at least 40% of their matches. Requires at least k players.
RoleModel detect_roles(
    const std::map<std::int64_t, std::vector<Pos>>& histories, int k,
    std::uint64_t seed);

void save_weights(const RatingWeights& weights, const std::string& path,
                  const std::string& config_hash);
RatingWeights load_weights(const std::string& path);

void export_ratings(const std::vector<MatchRating>& ratings,
                    const std::string& path, const std::string& config_hash);
void export_team_rating_stats(const std::map<TeamMatchKey, TeamRatingStats>& table,
                              const std::string& path,
                              const std::string& config_hash);

}  // namespace pitchlab
