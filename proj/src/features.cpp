#include "pitchlab/features.hpp"

#include <algorithm>
#include <cmath>

namespace pitchlab {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "n_events",        "n_shots",       "n_fouls",
    "n_passes",        "n_free_kicks",  "n_duels",
    "n_offsides",      "n_others",      "n_accurate_passes",
    "pass_accuracy",   "pass_velocity", "recovery_time",
    "stop_time",       "pass_length",   "shot_distance",
    "rating_avg",      "rating_std",    "network_h",
    "flow_centrality",
};

namespace {

std::optional<double> mean_opt(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return mean_of(xs);
}

}  // namespace

CountFeatures count_events(std::span<const Event> match_events,
                           std::int64_t team) {
  CountFeatures c;
  for (const Event& e : match_events) {
    if (e.team_id != team || e.kind == EventKind::Interruption) continue;
    ++c.events;
    switch (e.kind) {
      case EventKind::Pass:
        ++c.passes;
        if (e.accurate()) ++c.accurate_passes;
        break;
      case EventKind::Shot: ++c.shots; break;
      case EventKind::Foul: ++c.fouls; break;
      case EventKind::Duel: ++c.duels; break;
      case EventKind::FreeKick: ++c.free_kicks; break;
      case EventKind::Offside: ++c.offsides; break;
      case EventKind::Others: ++c.others; break;
      case EventKind::Interruption: break;
    }
  }
  return c;
}

std::optional<double> pass_accuracy(const CountFeatures& c) {
  if (c.passes == 0) return std::nullopt;
  return static_cast<double>(c.accurate_passes) / static_cast<double>(c.passes);
}

std::optional<double> pass_velocity(std::span<const Event> match_events,
                                    const std::vector<Phase>& phases,
                                    std::int64_t team) {
  std::vector<double> gaps;
  for (const Phase& p : phases) {
    if (p.team_id != team) continue;
    double prev = 0.0;
    bool have_prev = false;
    for (std::size_t i : p.event_idx) {
      const Event& e = match_events[i];
      if (e.kind != EventKind::Pass) continue;
      if (have_prev) gaps.push_back(e.sec - prev);
      prev = e.sec;
      have_prev = true;
    }
  }
  return mean_opt(gaps);
}

std::optional<double> recovery_time(const std::vector<Phase>& phases,
                                    std::int64_t team) {
  std::vector<double> gaps;
  int prev_own = -1;
  bool opponent_between = false;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Phase& p = phases[i];
    if (p.team_id != team) {
      opponent_between = true;
      continue;
    }
    if (prev_own >= 0) {
      const Phase& q = phases[static_cast<std::size_t>(prev_own)];
      if (q.period == p.period && opponent_between &&
          q.reason != EndReason::CoolingBreak) {
        gaps.push_back(p.start_sec - q.end_sec);
      }
    }
    prev_own = static_cast<int>(i);
    opponent_between = false;
  }
  return mean_opt(gaps);
}

std::optional<double> stop_time(std::span<const Event> match_events,
                                std::int64_t team, double cooling_gap_s) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < match_events.size(); ++i) {
    const Event& e = match_events[i];
    if (e.team_id != team || e.kind != EventKind::FreeKick) continue;
    if (!is_stop_restart(e.sub_type)) continue;
    const Event& prev = match_events[i - 1];
    if (prev.period != e.period) continue;
    const double gap = e.sec - prev.sec;
    if (gap > cooling_gap_s) continue;
    gaps.push_back(gap);
  }
  return mean_opt(gaps);
}

std::optional<double> mean_pass_length(std::span<const Event> match_events,
                                       std::int64_t team, const Pitch& pitch) {
  std::vector<double> lengths;
  for (const Event& e : match_events) {
    if (e.team_id != team || e.kind != EventKind::Pass) continue;
    if (!e.destination) continue;
    lengths.push_back(meters_between(e.origin, *e.destination, pitch));
  }
  return mean_opt(lengths);
}

bool is_shot_like(const Event& e) {
  if (e.kind == EventKind::Shot) return true;
  return e.kind == EventKind::FreeKick &&
         (e.sub_type == "Free kick shot" || e.sub_type == "Penalty");
}

std::optional<double> mean_shot_distance(std::span<const Event> match_events,
                                         std::int64_t team,
                                         const Pitch& pitch) {
  std::vector<double> dists;
  for (const Event& e : match_events) {
    if (e.team_id != team || !is_shot_like(e)) continue;
    dists.push_back(meters_to_goal(e.origin, pitch));
  }
  return mean_opt(dists);
}

std::optional<double> shot_velocity(std::span<const Event> match_events,
                                    std::int64_t team) {
  std::vector<double> gaps;
  bool have_prev = false;
  Period prev_period = Period::FirstHalf;
  double prev_sec = 0.0;
  for (const Event& e : match_events) {
    if (e.team_id != team || !is_shot_like(e)) continue;
    if (have_prev && e.period == prev_period) gaps.push_back(e.sec - prev_sec);
    have_prev = true;
    prev_period = e.period;
    prev_sec = e.sec;
  }
  return mean_opt(gaps);
}

int zone_index(const Pos& p) {
  const int ix = std::min(static_cast<int>(p.x / 10.0), 9);
  const int iy = std::min(static_cast<int>(p.y / 10.0), 9);
  return std::max(iy, 0) * 10 + std::max(ix, 0);
}

std::array<int, 100> zone_counts(const std::vector<Pos>& positions) {
  std::array<int, 100> z{};
  for (const Pos& p : positions) ++z[static_cast<std::size_t>(zone_index(p))];
  return z;
}

std::vector<double> kde_intensity(const std::vector<Pos>& positions,
                                  const Pitch& pitch, double bandwidth_m,
                                  int nx, int ny) {
  const std::size_t cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  std::vector<double> grid(cells, 0.0);
  if (positions.empty()) return grid;

  const double wx = pitch.length_m / nx;
  const double wy = pitch.width_m / ny;
  const double inv = 1.0 / (bandwidth_m * std::sqrt(2.0));
  auto cdf = [inv](double d) { return 0.5 * std::erfc(-d * inv); };

  // Per-point cell masses along each axis, renormalized over the pitch so
  // a kernel near the boundary still contributes exactly one unit.
  const std::size_t n = positions.size();
  std::vector<double> col(n * static_cast<std::size_t>(nx));
  std::vector<double> row(n * static_cast<std::size_t>(ny));
  for (std::size_t k = 0; k < n; ++k) {
    const double px = positions[k].x * pitch.sx();
    const double py = positions[k].y * pitch.sy();
    const double tot_x = cdf(pitch.length_m - px) - cdf(-px);
    const double tot_y = cdf(pitch.width_m - py) - cdf(-py);
    for (int ix = 0; ix < nx; ++ix) {
      col[k * nx + ix] =
          (cdf((ix + 1) * wx - px) - cdf(ix * wx - px)) / tot_x;
    }
    for (int iy = 0; iy < ny; ++iy) {
      row[k * ny + iy] =
          (cdf((iy + 1) * wy - py) - cdf(iy * wy - py)) / tot_y;
    }
  }

#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < ny; ++iy) {
    for (std::size_t k = 0; k < n; ++k) {
      const double ry = row[k * ny + iy];
      for (int ix = 0; ix < nx; ++ix) {
        grid[static_cast<std::size_t>(iy) * nx + ix] += ry * col[k * nx + ix];
      }
    }
  }
  return grid;
}

double TeamMatchFeatures::at(int index) const {
  const auto& v = values[static_cast<std::size_t>(index)];
  if (!v) {
    throw UndefinedValueError(std::string(kFeatureNames[index]) +
                              " is undefined for match " +
                              std::to_string(match_id) + " team " +
                              std::to_string(team_id));
  }
  return *v;
}

std::vector<TeamMatchFeatures> assemble_features(
    const EventStore& store, const std::vector<std::vector<Phase>>& phases,
    const std::map<TeamMatchKey, double>& rating_avg,
    const std::map<TeamMatchKey, double>& rating_std,
    const std::map<TeamMatchKey, double>& network_h,
    const std::map<TeamMatchKey, double>& flow_centrality,
    const RunConfig& cfg) {
  if (phases.size() != store.match_count()) {
    throw ValidationError("phase table does not cover every match");
  }
  const Pitch pitch{cfg.pitch_length_m, cfg.pitch_width_m};

  struct RowKey {
    std::int64_t match_id;
    std::int64_t team_id;
    std::size_t phase_slot;
  };
  std::vector<RowKey> keys;
  std::size_t slot = 0;
  for (const auto& [match_id, m] : store.matches()) {
    for (std::int64_t team : store.teams_of(match_id)) {
      keys.push_back({match_id, team, slot});
    }
    ++slot;
  }

  std::vector<TeamMatchFeatures> rows(keys.size());
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < static_cast<long long>(keys.size()); ++r) {
    const RowKey& key = keys[static_cast<std::size_t>(r)];
    const auto span = store.events_for(key.match_id);
    const std::vector<Phase>& match_phases = phases[key.phase_slot];

    TeamMatchFeatures f;
    f.match_id = key.match_id;
    f.team_id = key.team_id;
    f.gender = store.match(key.match_id).gender;

    const CountFeatures c = count_events(span, key.team_id);
    f.values[kFeatEvents] = c.events;
    f.values[kFeatShots] = c.shots;
    f.values[kFeatFouls] = c.fouls;
    f.values[kFeatPasses] = c.passes;
    f.values[kFeatFreeKicks] = c.free_kicks;
    f.values[kFeatDuels] = c.duels;
    f.values[kFeatOffsides] = c.offsides;
    f.values[kFeatOthers] = c.others;
    f.values[kFeatAccuratePasses] = c.accurate_passes;
    f.values[kFeatPassAccuracy] = pass_accuracy(c);
    f.values[kFeatPassVelocity] = pass_velocity(span, match_phases, key.team_id);
    f.values[kFeatRecoveryTime] = recovery_time(match_phases, key.team_id);
    f.values[kFeatStopTime] = stop_time(span, key.team_id, cfg.cooling_gap_s);
    f.values[kFeatPassLength] = mean_pass_length(span, key.team_id, pitch);
    f.values[kFeatShotDistance] = mean_shot_distance(span, key.team_id, pitch);

    const TeamMatchKey mk{key.match_id, key.team_id};
    auto join = [&](const std::map<TeamMatchKey, double>& m, int idx) {
      auto it = m.find(mk);
      if (it != m.end()) f.values[idx] = it->second;
    };
    join(rating_avg, kFeatRatingAvg);
    join(rating_std, kFeatRatingStd);
    join(network_h, kFeatNetworkH);
    join(flow_centrality, kFeatFlowCentrality);

    rows[static_cast<std::size_t>(r)] = std::move(f);
  }
  return rows;
}

void export_features(const std::vector<TeamMatchFeatures>& rows,
                     const std::string& path, const std::string& config_hash) {
  std::vector<std::string> header = {"match_id", "team_id", "gender"};
  for (const char* name : kFeatureNames) header.push_back(name);
  CsvWriter w(path, config_hash, header);
  for (const TeamMatchFeatures& f : rows) {
    std::vector<std::string> cells = {
        std::to_string(f.match_id), std::to_string(f.team_id),
        f.gender == Gender::Female ? "female" : "male"};
    for (const auto& v : f.values) cells.push_back(v ? fmt_num(*v) : "");
    w.row(cells);
  }
}

std::vector<TeamMatchFeatures> read_features(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int c_match = t.column("match_id");
  const int c_team = t.column("team_id");
  const int c_gender = t.column("gender");
  if (c_match < 0 || c_team < 0 || c_gender < 0) {
    throw ValidationError("feature table misses identity columns: " + path);
  }
  std::array<int, kFeatureCount> cols{};
  for (int i = 0; i < kFeatureCount; ++i) {
    cols[static_cast<std::size_t>(i)] = t.column(kFeatureNames[i]);
    if (cols[static_cast<std::size_t>(i)] < 0) {
      throw ValidationError(std::string("feature table misses column ") +
                            kFeatureNames[i] + ": " + path);
    }
  }
  std::vector<TeamMatchFeatures> rows;
  for (const auto& cells : t.rows) {
    TeamMatchFeatures f;
    f.match_id = std::stoll(cells[static_cast<std::size_t>(c_match)]);
    f.team_id = std::stoll(cells[static_cast<std::size_t>(c_team)]);
    const std::string& g = cells[static_cast<std::size_t>(c_gender)];
    if (g != "male" && g != "female") {
      throw ValidationError("bad gender value in feature table: " + g);
    }
    f.gender = g == "female" ? Gender::Female : Gender::Male;
    for (int i = 0; i < kFeatureCount; ++i) {
      const std::string& cell = cells[static_cast<std::size_t>(cols[i])];
      if (!cell.empty()) f.values[static_cast<std::size_t>(i)] = std::stod(cell);
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace pitchlab
