#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pitchlab/events.hpp"

namespace pitchlab {

enum class EndReason {
  HalfEnd,
  BallOut,
  Offside,
  Foul,
  CoolingBreak,
  Turnover,
};

const char* end_reason_name(EndReason r);

struct Phase {
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;  // owning team
  Period period = Period::FirstHalf;
  double start_sec = 0.0;
  double end_sec = 0.0;
  EndReason reason = EndReason::HalfEnd;
  // Indices into the match's event span, in order. Opponent duels attach to
  // the phase of the team making the next uncontested event; a terminating
  // foul/offside/interruption attaches to the phase it closes.
  std::vector<std::size_t> event_idx;
  std::vector<std::int64_t> event_ids;
};

struct SegmentOptions {
  double cooling_gap_s = 90.0;
};

// Restart sub-types that imply the ball left the field before them.
bool is_ball_out_restart(const std::string& sub_type);
// Restart sub-types whose opening gap counts as stop time.
bool is_stop_restart(const std::string& sub_type);
// Any sub-type that puts the ball back into play and always opens a phase.
bool is_restart(const std::string& sub_type);

std::vector<Phase> segment_match(const EventStore& store, std::int64_t match_id,
                                 const SegmentOptions& opts = {});

// Every match, parallel across matches, deterministic order.
std::vector<std::vector<Phase>> segment_all(const EventStore& store,
                                            const SegmentOptions& opts = {});

void export_phases(const std::vector<std::vector<Phase>>& phases,
                   const std::string& path, const std::string& config_hash);

}  // namespace pitchlab
