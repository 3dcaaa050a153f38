#include "pitchlab/playerank.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pitchlab/dense.hpp"
#include "pitchlab/io.hpp"

namespace pitchlab {

const std::array<const char*, kRatingFeatureCount> kRatingFeatureNames = {
    "pass_accurate",      "pass_inaccurate",      "shot_accurate",
    "shot_inaccurate",    "foul_accurate",        "foul_inaccurate",
    "duel_accurate",      "duel_inaccurate",      "free_kick_accurate",
    "free_kick_inaccurate", "offside_accurate",   "offside_inaccurate",
    "other_accurate",     "other_inaccurate"};

namespace {

// Two slots per technical kind; stoppage records have none.
int feature_slot(const Event& e) {
  if (e.kind == EventKind::Interruption) return -1;
  return 2 * static_cast<int>(e.kind) + (e.accurate() ? 0 : 1);
}

void tally(PerformanceVector& v, const Event& e) {
  const int slot = feature_slot(e);
  if (slot < 0) return;
  v.raw[static_cast<std::size_t>(slot)] += 1.0;
  if (is_shot_like(e) && e.has_tag(kTagGoal)) ++v.goals;
}

double sq_dist(const Pos& a, const Pos& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Seeded k-means++ start: first center uniform, later ones proportional to
// the squared distance from the chosen set. The reference rerun repeats
// this draw sequence exactly.
std::vector<Pos> seed_centers(const std::vector<Pos>& points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Pos> centers;
  centers.push_back(points[rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
      total += d2[i];
    }
    if (total <= 0.0) {
      centers.push_back(
          points[rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)]);
      continue;
    }
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      cum += d2[i];
      if (cum > u) {
        pick = i;
        break;
      }
    }
    centers.push_back(points[pick]);
  }
  return centers;
}

}  // namespace

PerformanceVector extract_performance_vector(const EventStore& store,
                                             std::int64_t match_id,
                                             std::int64_t player_id) {
  const Match& match = store.match(match_id);
  const Player& player = store.player(player_id);
  if (!match.has_team(player.team_id)) {
    throw NotFoundError("player " + std::to_string(player_id) +
                        " does not play in match " + std::to_string(match_id));
  }
  PerformanceVector v;
  v.match_id = match_id;
  v.team_id = player.team_id;
  v.player_id = player_id;
  for (const Event& e : store.events_for(match_id)) {
    if (e.player_id == player_id) tally(v, e);
  }
  return v;
}

std::vector<PerformanceVector> extract_all_vectors(const EventStore& store) {
  std::map<std::pair<std::int64_t, std::int64_t>, PerformanceVector> by_pair;
  for (const Event& e : store.events()) {
    auto [it, inserted] = by_pair.try_emplace({e.match_id, e.player_id});
    if (inserted) {
      it->second.match_id = e.match_id;
      it->second.team_id = e.team_id;
      it->second.player_id = e.player_id;
    }
    tally(it->second, e);
  }
  std::vector<PerformanceVector> out;
  out.reserve(by_pair.size());
  for (auto& [key, v] : by_pair) out.push_back(std::move(v));
  return out;
}

std::array<double, kRatingFeatureCount> normalize_vector(
    const RatingWeights& weights,
    const std::array<double, kRatingFeatureCount>& raw) {
  std::array<double, kRatingFeatureCount> out{};
  for (std::size_t j = 0; j < kRatingFeatureCount; ++j) {
    const double span = weights.feat_max[j] - weights.feat_min[j];
    if (span <= 0.0) continue;
    out[j] = std::clamp((raw[j] - weights.feat_min[j]) / span, 0.0, 1.0);
  }
  return out;
}

std::array<double, kRatingFeatureCount> ls_separator(
    const std::vector<std::array<double, kRatingFeatureCount>>& xs,
    const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw ValidationError("separator needs matching, non-empty inputs");
  }
  constexpr int p = kRatingFeatureCount;
  // Normal equations with a tiny ridge so all-zero columns solve to zero.
  DenseMatrix a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    for (int i = 0; i < p; ++i) {
      const double xi = xs[r][static_cast<std::size_t>(i)];
      if (xi == 0.0) continue;
      b[static_cast<std::size_t>(i)] += xi * ys[r];
      for (int j = 0; j < p; ++j) {
        a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            xi * xs[r][static_cast<std::size_t>(j)];
      }
    }
  }
  for (int i = 0; i < p; ++i) {
    a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] += 1e-8;
  }
  const std::vector<double> w = solve_linear(std::move(a), std::move(b));
  std::array<double, kRatingFeatureCount> out{};
  std::copy(w.begin(), w.end(), out.begin());
  return out;
}

RatingWeights learn_weights(const EventStore& store,
                            const std::vector<PerformanceVector>& vectors,
                            double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw ValidationError("goal weight must lie in [0, 1]");
  }
  if (vectors.empty()) {
    throw TrainingError("no performance vectors to learn from");
  }

  RatingWeights weights;
  weights.alpha = alpha;
  weights.feat_min.fill(std::numeric_limits<double>::infinity());
  weights.feat_max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& v : vectors) {
    for (std::size_t j = 0; j < kRatingFeatureCount; ++j) {
      weights.feat_min[j] = std::min(weights.feat_min[j], v.raw[j]);
      weights.feat_max[j] = std::max(weights.feat_max[j], v.raw[j]);
    }
  }

  std::map<TeamMatchKey, std::array<double, kRatingFeatureCount>> team_sums;
  for (const auto& v : vectors) {
    auto& sum = team_sums[{v.match_id, v.team_id}];
    const auto norm = normalize_vector(weights, v.raw);
    for (std::size_t j = 0; j < kRatingFeatureCount; ++j) sum[j] += norm[j];
  }

  std::vector<std::array<double, kRatingFeatureCount>> xs;
  std::vector<double> ys;
  bool any_win = false, any_other = false;
  for (const auto& [key, sum] : team_sums) {
    const Match& m = store.match(key.first);
    const bool win = m.goals_of(key.second) > m.goals_of(m.other_team(key.second));
    (win ? any_win : any_other) = true;
    xs.push_back(sum);
    ys.push_back(win ? 1.0 : -1.0);
  }
  if (!any_win || !any_other) {
    throw TrainingError("every training outcome falls on one side");
  }

  weights.w = ls_separator(xs, ys);
  for (double v : weights.w) weights.r_norm += std::abs(v);
  if (weights.r_norm <= 0.0) {
    throw TrainingError("learned weights are degenerate");
  }
  return weights;
}

double rate(const RatingWeights& weights,
            const std::array<double, kRatingFeatureCount>& raw) {
  if (weights.r_norm <= 0.0) {
    throw ValidationError("weight normalization constant must be positive");
  }
  const auto x = normalize_vector(weights, raw);
  double s = 0.0;
  for (std::size_t j = 0; j < kRatingFeatureCount; ++j) s += weights.w[j] * x[j];
  return s / weights.r_norm;
}

double combine_goals(double r, int goals, double alpha, int goal_cap) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw ValidationError("goal weight must lie in [0, 1]");
  }
  if (goals < 0) throw ValidationError("goal count cannot be negative");
  if (goal_cap < 1) throw ValidationError("goal cap must be at least 1");
  const double bonus =
      std::min(static_cast<double>(goals) / static_cast<double>(goal_cap), 1.0);
  return (1.0 - alpha) * r + alpha * bonus;
}

std::vector<MatchRating> rate_all(const std::vector<PerformanceVector>& vectors,
                                  const RatingWeights& weights, int goal_cap) {
  std::vector<MatchRating> out(vectors.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const PerformanceVector& v = vectors[i];
    MatchRating& r = out[i];
    r.match_id = v.match_id;
    r.team_id = v.team_id;
    r.player_id = v.player_id;
    r.rating = rate(weights, v.raw);
    r.goals = v.goals;
    r.combined = combine_goals(r.rating, v.goals, weights.alpha, goal_cap);
  }
  return out;
}

TeamRatingStats pr_team_stats(const std::vector<double>& combined) {
  if (combined.empty()) {
    throw UndefinedValueError(
        "team rating statistics need at least one rated player");
  }
  return {mean_of(combined), pop_std(combined)};
}

std::map<TeamMatchKey, TeamRatingStats> team_rating_table(
    const std::vector<MatchRating>& ratings) {
  std::map<TeamMatchKey, std::vector<double>> grouped;
  for (const auto& r : ratings) {
    grouped[{r.match_id, r.team_id}].push_back(r.combined);
  }
  std::map<TeamMatchKey, TeamRatingStats> out;
  for (const auto& [key, values] : grouped) out[key] = pr_team_stats(values);
  return out;
}

KMeansResult kmeans(const std::vector<Pos>& points, int k, std::uint64_t seed,
                    int max_iters, std::vector<double>* objective_trace) {
  if (k < 1) throw ValidationError("cluster count must be at least 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("need at least as many points as clusters");
  }
  Rng rng(seed);
  KMeansResult res;
  res.centers = seed_centers(points, k, rng);
  res.assignment.assign(points.size(), -1);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], res.centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], res.centers[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      objective += best_d;
      if (res.assignment[i] != best) {
        res.assignment[i] = best;
        changed = true;
      }
    }
    if (objective_trace) objective_trace->push_back(objective);
    if (!changed) break;

    std::vector<double> sx(static_cast<std::size_t>(k), 0.0);
    std::vector<double> sy(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(res.assignment[i]);
      sx[c] += points[i].x;
      sy[c] += points[i].y;
      ++count[c];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (count[c] > 0) {
        res.centers[c] = {sx[c] / count[c], sy[c] / count[c]};
      }
    }
  }
  return res;
}

RoleAssignment modal_role(const std::vector<int>& match_clusters, int k,
                          double threshold) {
  RoleAssignment out;
  if (match_clusters.empty()) return out;
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int c : match_clusters) {
    if (c < 0 || c >= k) throw ValidationError("cluster index out of range");
    ++counts[static_cast<std::size_t>(c)];
  }
  int best = 0;
  for (int c = 1; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)])
      best = c;
  }
  out.support = static_cast<double>(counts[static_cast<std::size_t>(best)]) /
                static_cast<double>(match_clusters.size());
  out.role = out.support >= threshold ? best : -1;
  return out;
}

std::map<std::int64_t, std::vector<Pos>> player_match_positions(
    const EventStore& store) {
  std::map<std::int64_t, std::map<std::int64_t, std::pair<Pos, int>>> sums;
  for (const Event& e : store.events()) {
    if (e.kind == EventKind::Interruption) continue;
    auto& [sum, n] = sums[e.player_id][e.match_id];
    sum.x += e.origin.x;
    sum.y += e.origin.y;
    ++n;
  }
  std::map<std::int64_t, std::vector<Pos>> out;
  for (const auto& [player, matches] : sums) {
    auto& list = out[player];
    for (const auto& [match, acc] : matches) {
      (void)match;
      list.push_back({acc.first.x / acc.second, acc.first.y / acc.second});
    }
  }
  return out;
}

RoleModel detect_roles(
    const std::map<std::int64_t, std::vector<Pos>>& histories, int k,
    std::uint64_t seed) {
  if (histories.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("need at least as many players as roles");
  }
  std::vector<Pos> points;
  std::vector<std::pair<std::int64_t, std::size_t>> spans;  // player, count
  for (const auto& [player, positions] : histories) {
    spans.emplace_back(player, positions.size());
    points.insert(points.end(), positions.begin(), positions.end());
  }

  const KMeansResult km = kmeans(points, k, seed, 100);

  RoleModel model;
  model.centroids = km.centers;
  std::size_t offset = 0;
  for (const auto& [player, count] : spans) {
    const std::vector<int> clusters(
        km.assignment.begin() + static_cast<std::ptrdiff_t>(offset),
        km.assignment.begin() + static_cast<std::ptrdiff_t>(offset + count));
    model.players[player] = modal_role(clusters, k, 0.40);
    offset += count;
  }
  return model;
}

void save_weights(const RatingWeights& weights, const std::string& path,
                  const std::string& config_hash) {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["alpha"] = weights.alpha;
  j["r_norm"] = weights.r_norm;
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < kRatingFeatureCount; ++i) {
    features.push_back({{"name", kRatingFeatureNames[i]},
                        {"weight", weights.w[i]},
                        {"min", weights.feat_min[i]},
                        {"max", weights.feat_max[i]}});
  }
  j["features"] = std::move(features);
  write_text(path, j.dump(2) + "\n");
}

RatingWeights load_weights(const std::string& path) {
  if (!file_exists(path)) {
    throw MissingInputError("weight file not found: " + path);
  }
  std::string text;
  for (const auto& line : read_lines(path)) {
    text += line;
    text += '\n';
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weight file is not valid: ") + e.what());
  }
  RatingWeights w;
  try {
    w.alpha = j.at("alpha").get<double>();
    w.r_norm = j.at("r_norm").get<double>();
    const auto& features = j.at("features");
    if (features.size() != kRatingFeatureCount) {
      throw ValidationError("weight file has the wrong feature count");
    }
    for (std::size_t i = 0; i < kRatingFeatureCount; ++i) {
      const auto& f = features.at(i);
      if (f.at("name").get<std::string>() != kRatingFeatureNames[i]) {
        throw ValidationError("weight file features are out of order");
      }
      w.w[i] = f.at("weight").get<double>();
      w.feat_min[i] = f.at("min").get<double>();
      w.feat_max[i] = f.at("max").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weight file is not valid: ") + e.what());
  }
  return w;
}

void export_ratings(const std::vector<MatchRating>& ratings,
                    const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash,
                {"match_id", "team_id", "player_id", "rating", "goals",
                 "combined"});
  for (const auto& r : ratings) {
    csv.row({std::to_string(r.match_id), std::to_string(r.team_id),
             std::to_string(r.player_id), fmt_num(r.rating),
             std::to_string(r.goals), fmt_num(r.combined)});
  }
}

void export_team_rating_stats(
    const std::map<TeamMatchKey, TeamRatingStats>& table,
    const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash,
                {"match_id", "team_id", "rating_avg", "rating_std"});
  for (const auto& [key, stats] : table) {
    csv.row({std::to_string(key.first), std::to_string(key.second),
             fmt_num(stats.avg), fmt_num(stats.std)});
  }
}

}  // namespace pitchlab
