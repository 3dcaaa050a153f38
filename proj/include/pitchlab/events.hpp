#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pitchlab/common.hpp"

namespace pitchlab {

// Seven technical kinds plus Interruption for non-technical stoppage records
// (ball out of the field, whistles). Interruption records are stored and
// counted by the loader but never enter per-team event counts or
// performance vectors.
enum class EventKind {
  Pass,
  Shot,
  Foul,
  Duel,
  FreeKick,
  Offside,
  Others,
  Interruption,
};

enum class Period { FirstHalf, SecondHalf, ExtraFirst, ExtraSecond };

enum class Gender { Male, Female };

// Tag 1801 marks a technically accurate action; goals carry tag 101.
inline constexpr int kTagAccurate = 1801;
inline constexpr int kTagNotAccurate = 1802;
inline constexpr int kTagGoal = 101;

struct Event {
  std::int64_t event_id = 0;
  std::int64_t match_id = 0;
  std::int64_t team_id = 0;
  std::int64_t player_id = 0;
  EventKind kind = EventKind::Others;
  Period period = Period::FirstHalf;
  double sec = 0.0;  // seconds since the start of the period
  Pos origin;
  std::optional<Pos> destination;
  std::string sub_type;
  std::vector<int> tags;

  bool has_tag(int id) const {
    for (int t : tags)
      if (t == id) return true;
    return false;
  }
  bool accurate() const { return has_tag(kTagAccurate); }
};

struct TeamSide {
  std::int64_t team_id = 0;
  std::string name;
  int goals = 0;
};

struct Match {
  std::int64_t match_id = 0;
  TeamSide a, b;
  Gender gender = Gender::Male;
  std::string competition;
  // Optional declared period end times; inferred from events when absent.
  std::map<Period, double> period_ends;
  bool cooling_annotated = false;

  bool has_team(std::int64_t team) const {
    return team == a.team_id || team == b.team_id;
  }
  std::int64_t other_team(std::int64_t team) const {
    return team == a.team_id ? b.team_id : a.team_id;
  }
  int goals_of(std::int64_t team) const {
    return team == a.team_id ? a.goals : b.goals;
  }
};

struct Player {
  std::int64_t player_id = 0;
  std::int64_t team_id = 0;
  std::string name;
  std::string role;
};

const char* kind_name(EventKind k);
EventKind kind_from_name(const std::string& event_name);  // throws ParseError
const char* period_name(Period p);
Period period_from_name(const std::string& s);  // throws ParseError

// Events live sorted by (match, period, sec, insertion order); per-match
// ranges are contiguous.
class EventStore {
 public:
  EventStore(std::vector<Event> events, std::vector<Match> matches,
             std::vector<Player> players);

  std::size_t event_count() const { return events_.size(); }
  std::size_t match_count() const { return matches_.size(); }
  std::size_t player_count() const { return players_.size(); }

  const std::map<std::int64_t, Match>& matches() const { return matches_; }
  const std::map<std::int64_t, Player>& players() const { return players_; }
  const std::vector<Event>& events() const { return events_; }

  const Match& match(std::int64_t match_id) const;    // throws NotFoundError
  const Player& player(std::int64_t player_id) const;  // throws NotFoundError

  std::span<const Event> events_for(std::int64_t match_id) const;
  std::vector<Event> events_for(std::int64_t match_id, std::int64_t team_id) const;

  // Ordered distinct team ids (two entries) of a match.
  std::vector<std::int64_t> teams_of(std::int64_t match_id) const;

  // Declared when present, otherwise max event timestamp of that period.
  double period_end(std::int64_t match_id, Period p) const;

 private:
  std::vector<Event> events_;
  std::map<std::int64_t, Match> matches_;
  std::map<std::int64_t, Player> players_;
  std::map<std::int64_t, std::pair<std::size_t, std::size_t>> span_;
};

// One JSON object per line. `line_no` is 1-based and used in error text;
// when the record has no eventId, `fallback_id` is assigned.
Event parse_event_record(const std::string& line, int line_no,
                         std::int64_t fallback_id);
Match parse_match_record(const std::string& line, int line_no);
Player parse_player_record(const std::string& line, int line_no);

// Reads every event file in the given order, validates referential
// integrity, and produces the sorted store.
EventStore load_dataset(const std::vector<std::string>& event_paths,
                        const std::string& match_path,
                        const std::string& player_path);

// Normalized store directory: events.jsonl / matches.jsonl / players.jsonl.
void export_store(const EventStore& store, const std::string& dir);
EventStore load_store(const std::string& dir);

std::string serialize_event(const Event& e);
std::string serialize_match(const Match& m);
std::string serialize_player(const Player& p);

}  // namespace pitchlab
