#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pitchlab/events.hpp"
#include "pitchlab/io.hpp"
#include "pitchlab/possession.hpp"

namespace pitchlab {

// Per-team technical counts for one match. Interruption records are
// stoppage bookkeeping and never enter any of these.
struct CountFeatures {
  int events = 0;
  int shots = 0;
  int fouls = 0;
  int passes = 0;
  int free_kicks = 0;
  int duels = 0;
  int offsides = 0;
  int others = 0;
  int accurate_passes = 0;
};

CountFeatures count_events(std::span<const Event> match_events,
                           std::int64_t team);

// accurate passes / passes; empty when the team made no passes.
std::optional<double> pass_accuracy(const CountFeatures& c);

// Mean gap between consecutive passes inside one possession phase.
// Non-pass events between two passes of a chain do not break the chain.
std::optional<double> pass_velocity(std::span<const Event> match_events,
                                    const std::vector<Phase>& phases,
                                    std::int64_t team);

// Mean time from losing the ball to winning it back: gap between two
// possession phases of the team in the same period with at least one
// opponent phase in between. Phases cut by a cooling break do not count
// as a loss of possession.
std::optional<double> recovery_time(const std::vector<Phase>& phases,
                                    std::int64_t team);

// Mean dead-ball delay before the team's free kicks, corners and throw-ins:
// gap from the previous recorded event of the match to the restart.
// Restarts opening a period have no gap; gaps longer than the cooling
// threshold are interrupted play, not stop time.
std::optional<double> stop_time(std::span<const Event> match_events,
                                std::int64_t team, double cooling_gap_s);

// Mean origin-to-destination displacement of the team's passes, in meters.
std::optional<double> mean_pass_length(std::span<const Event> match_events,
                                       std::int64_t team, const Pitch& pitch);

// Shots plus dead-ball shots (free kick shots and penalties).
bool is_shot_like(const Event& e);

// Mean distance from shot origin to the goal center, in meters.
std::optional<double> mean_shot_distance(std::span<const Event> match_events,
                                         std::int64_t team, const Pitch& pitch);

// Mean gap between consecutive shots of the team within one period.
std::optional<double> shot_velocity(std::span<const Event> match_events,
                                    std::int64_t team);

// 10 x 10 pitch partition; index = row * 10 + column, row from y.
int zone_index(const Pos& p);
std::array<int, 100> zone_counts(const std::vector<Pos>& positions);

// Smoothed occupancy grid (row-major, iy * nx + ix) over an nx x ny meter
// grid. Each position contributes a Gaussian kernel integrated per cell and
// renormalized over the pitch, so the grid total equals the position count.
std::vector<double> kde_intensity(const std::vector<Pos>& positions,
                                  const Pitch& pitch, double bandwidth_m,
                                  int nx, int ny);

inline constexpr int kFeatureCount = 19;
extern const std::array<const char*, kFeatureCount> kFeatureNames;

enum FeatureIndex : int {
  kFeatEvents = 0,
  kFeatShots,
  kFeatFouls,
  kFeatPasses,
  kFeatFreeKicks,
  kFeatDuels,
  kFeatOffsides,
  kFeatOthers,
  kFeatAccuratePasses,
  kFeatPassAccuracy,
  kFeatPassVelocity,
  kFeatRecoveryTime,
  kFeatStopTime,
  kFeatPassLength,
  kFeatShotDistance,
  kFeatRatingAvg,
  kFeatRatingStd,
  kFeatNetworkH,
  kFeatFlowCentrality,
};

// One row of the team-match performance table. Quantities that are
// undefined on the input (a team with no shots, say) stay empty.
struct TeamMatchFeatures {
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;
  Gender gender = Gender::Male;
  std::array<std::optional<double>, kFeatureCount> values;

  // Value of a feature; throws UndefinedValueError naming it when empty.
  double at(int index) const;
};

using TeamMatchKey = std::pair<std::int64_t, std::int64_t>;

// Builds the full table, two rows per match in team order. Rating and
// network indicators are computed by other stages and joined in here;
// rows missing from a map keep that feature empty.
std::vector<TeamMatchFeatures> assemble_features(
    const EventStore& store, const std::vector<std::vector<Phase>>& phases,
    const std::map<TeamMatchKey, double>& rating_avg,
    const std::map<TeamMatchKey, double>& rating_std,
    const std::map<TeamMatchKey, double>& network_h,
    const std::map<TeamMatchKey, double>& flow_centrality,
    const RunConfig& cfg);

void export_features(const std::vector<TeamMatchFeatures>& rows,
                     const std::string& path, const std::string& config_hash);
std::vector<TeamMatchFeatures> read_features(const std::string& path);

}  // namespace pitchlab
