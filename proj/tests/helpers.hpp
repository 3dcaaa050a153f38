#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "pitchlab/events.hpp"

namespace testutil {

inline pitchlab::Event ev(std::int64_t id, std::int64_t match, std::int64_t team,
                          std::int64_t player, pitchlab::EventKind kind,
                          pitchlab::Period period, double sec,
                          std::string sub = "", std::vector<int> tags = {},
                          pitchlab::Pos origin = {50, 50}) {
  pitchlab::Event e;
  e.event_id = id;
  e.match_id = match;
  e.team_id = team;
  e.player_id = player;
  e.kind = kind;
  e.period = period;
  e.sec = sec;
  e.sub_type = std::move(sub);
  e.tags = std::move(tags);
  e.origin = origin;
  return e;
}

inline pitchlab::Match mk_match(std::int64_t id, std::int64_t team_a,
                                std::int64_t team_b,
                                pitchlab::Gender g = pitchlab::Gender::Male,
                                int goals_a = 0, int goals_b = 0) {
  pitchlab::Match m;
  m.match_id = id;
  m.a = {team_a, "A" + std::to_string(team_a), goals_a};
  m.b = {team_b, "B" + std::to_string(team_b), goals_b};
  m.gender = g;
  return m;
}

inline pitchlab::Player mk_player(std::int64_t id, std::int64_t team) {
  pitchlab::Player p;
  p.player_id = id;
  p.team_id = team;
  p.name = "P" + std::to_string(id);
  return p;
}

// Default players 10/11 for team a, 20/21 for team b of a two-team fixture.
inline std::vector<pitchlab::Player> default_players(std::int64_t team_a,
                                                     std::int64_t team_b) {
  return {mk_player(10, team_a), mk_player(11, team_a), mk_player(20, team_b),
          mk_player(21, team_b)};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pitchlab_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
