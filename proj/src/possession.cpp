#include "pitchlab/possession.hpp"

#include <optional>

#include "pitchlab/io.hpp"

namespace pitchlab {

const char* end_reason_name(EndReason r) {
  switch (r) {
    case EndReason::HalfEnd: return "half_end";
    case EndReason::BallOut: return "ball_out";
    case EndReason::Offside: return "offside";
    case EndReason::Foul: return "foul";
    case EndReason::CoolingBreak: return "cooling_break";
    case EndReason::Turnover: return "turnover";
  }
  return "?";
}

bool is_ball_out_restart(const std::string& sub_type) {
  return sub_type == "Throw in" || sub_type == "Goal kick" || sub_type == "Corner";
}

bool is_stop_restart(const std::string& sub_type) {
  return sub_type == "Free Kick" || sub_type == "Free kick cross" ||
         sub_type == "Free kick shot" || sub_type == "Corner" ||
         sub_type == "Throw in";
}

bool is_restart(const std::string& sub_type) {
  return is_ball_out_restart(sub_type) || is_stop_restart(sub_type) ||
         sub_type == "Kick off" || sub_type == "Penalty";
}

namespace {

class Segmenter {
 public:
  Segmenter(const EventStore& store, std::int64_t match_id,
            const SegmentOptions& opts)
      : span_(store.events_for(match_id)),
        match_id_(match_id),
        opts_(opts) {
    const Match& m = store.match(match_id);
    cooling_applies_ = m.gender == Gender::Female || m.cooling_annotated;
  }

  std::vector<Phase> run() {
    for (std::size_t i = 0; i < span_.size(); ++i) {
      const Event& e = span_[i];

      if (i > 0 && e.period != prev_period_) {
        if (!cur_ && !buffer_.empty()) open_for_buffer();
        if (cur_) {
          flush_buffer_into_current();
          close(EndReason::HalfEnd);
        }
      }
      if (cooling_applies_ && cur_ && prev_period_ == e.period &&
          e.sec - prev_sec_ > opts_.cooling_gap_s) {
        flush_buffer_into_current();
        close(EndReason::CoolingBreak);
      }

      switch (e.kind) {
        case EventKind::Duel:
          buffer_.push_back(i);
          break;
        case EventKind::Interruption:
          close_with_terminator(i, EndReason::BallOut);
          break;
        case EventKind::Foul:
          close_with_terminator(i, EndReason::Foul);
          break;
        case EventKind::Offside:
          close_with_terminator(i, EndReason::Offside);
          break;
        case EventKind::FreeKick:
          // Play is dead before any free kick, so it always opens a phase.
          // A same-team restart over an open phase means the ball went dead
          // without a recorded cause; that is not a turnover.
          if (cur_) {
            close(is_ball_out_restart(e.sub_type) || cur_->team_id == e.team_id
                      ? EndReason::BallOut
                      : EndReason::Turnover);
          }
          open(e.team_id, i);
          break;
        default:
          if (cur_ && cur_->team_id == e.team_id) {
            append_buffer_and(i);
          } else {
            if (cur_) close(EndReason::Turnover);
            open(e.team_id, i);
          }
          break;
      }

      prev_period_ = e.period;
      prev_sec_ = e.sec;
    }

    if (!buffer_.empty()) {
      if (!cur_) open_for_buffer();
      flush_buffer_into_current();
    }
    if (cur_) close(EndReason::HalfEnd);
    return std::move(phases_);
  }

 private:
  void open(std::int64_t team, std::size_t i) {
    cur_ = Phase{};
    cur_->match_id = match_id_;
    cur_->team_id = team;
    cur_->period = span_[buffer_.empty() ? i : buffer_.front()].period;
    append_buffer_and(i);
    cur_->start_sec = span_[cur_->event_idx.front()].sec;
  }

  // A trailing duel with no uncontested event after it still needs a phase.
  void open_for_buffer() {
    cur_ = Phase{};
    cur_->match_id = match_id_;
    cur_->team_id = span_[buffer_.front()].team_id;
    cur_->period = span_[buffer_.front()].period;
    cur_->start_sec = span_[buffer_.front()].sec;
  }

  void append_buffer_and(std::size_t i) {
    flush_buffer_into_current();
    cur_->event_idx.push_back(i);
  }

  void flush_buffer_into_current() {
    if (!cur_) return;
    for (std::size_t b : buffer_) cur_->event_idx.push_back(b);
    buffer_.clear();
  }

  // Terminating events (foul, offside, interruption) belong to the phase
  // they close, whichever team produced them.
  void close_with_terminator(std::size_t i, EndReason reason) {
    if (!cur_) open(span_[i].team_id, i);
    else append_buffer_and(i);
    close(reason);
  }

  void close(EndReason reason) {
    cur_->reason = reason;
    if (!cur_->event_idx.empty()) {
      cur_->start_sec = span_[cur_->event_idx.front()].sec;
      cur_->end_sec = span_[cur_->event_idx.back()].sec;
      for (std::size_t i : cur_->event_idx) {
        cur_->event_ids.push_back(span_[i].event_id);
      }
      phases_.push_back(std::move(*cur_));
    }
    cur_.reset();
  }

  std::span<const Event> span_;
  std::vector<Phase> phases_;
  std::int64_t match_id_;
  SegmentOptions opts_;
  bool cooling_applies_ = false;
  std::optional<Phase> cur_;
  std::vector<std::size_t> buffer_;
  Period prev_period_ = Period::FirstHalf;
  double prev_sec_ = 0.0;
};

}  // namespace

std::vector<Phase> segment_match(const EventStore& store, std::int64_t match_id,
                                 const SegmentOptions& opts) {
  return Segmenter(store, match_id, opts).run();
}

std::vector<std::vector<Phase>> segment_all(const EventStore& store,
                                            const SegmentOptions& opts) {
  std::vector<std::int64_t> ids;
  for (const auto& [id, m] : store.matches()) ids.push_back(id);
  std::vector<std::vector<Phase>> out(ids.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(ids.size()); ++i) {
    out[i] = segment_match(store, ids[i], opts);
  }
  return out;
}

void export_phases(const std::vector<std::vector<Phase>>& phases,
                   const std::string& path, const std::string& config_hash) {
  CsvWriter w(path, config_hash,
              {"match_id", "team_id", "period", "start_sec", "end_sec", "reason",
               "event_ids"});
  for (const auto& match_phases : phases) {
    for (const Phase& p : match_phases) {
      std::string ids;
      for (std::size_t i = 0; i < p.event_ids.size(); ++i) {
        if (i) ids += ";";
        ids += std::to_string(p.event_ids[i]);
      }
      w.row({std::to_string(p.match_id), std::to_string(p.team_id),
             period_name(p.period), fmt_num(p.start_sec), fmt_num(p.end_sec),
             end_reason_name(p.reason), ids});
    }
  }
}

}  // namespace pitchlab
