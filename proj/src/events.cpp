#include "pitchlab/events.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pitchlab/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pitchlab {

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Pass: return "Pass";
    case EventKind::Shot: return "Shot";
    case EventKind::Foul: return "Foul";
    case EventKind::Duel: return "Duel";
    case EventKind::FreeKick: return "Free Kick";
    case EventKind::Offside: return "Offside";
    case EventKind::Others: return "Others on the ball";
    case EventKind::Interruption: return "Interruption";
  }
  return "?";
}

EventKind kind_from_name(const std::string& event_name) {
  if (event_name == "Pass") return EventKind::Pass;
  if (event_name == "Shot") return EventKind::Shot;
  if (event_name == "Foul") return EventKind::Foul;
  if (event_name == "Duel") return EventKind::Duel;
  if (event_name == "Free Kick") return EventKind::FreeKick;
  if (event_name == "Offside") return EventKind::Offside;
  if (event_name == "Others on the ball" || event_name == "Touch" ||
      event_name == "Save attempt" || event_name == "Goalkeeper leaving line") {
    return EventKind::Others;
  }
  if (event_name == "Interruption") return EventKind::Interruption;
  throw ParseError("unknown eventName: '" + event_name + "'");
}

const char* period_name(Period p) {
  switch (p) {
    case Period::FirstHalf: return "1H";
    case Period::SecondHalf: return "2H";
    case Period::ExtraFirst: return "E1";
    case Period::ExtraSecond: return "E2";
  }
  return "?";
}

Period period_from_name(const std::string& s) {
  if (s == "1H") return Period::FirstHalf;
  if (s == "2H") return Period::SecondHalf;
  if (s == "E1") return Period::ExtraFirst;
  if (s == "E2") return Period::ExtraSecond;
  throw ParseError("unknown matchPeriod: '" + s + "'");
}

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

json parse_json_line(const std::string& line, int line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) fail(line_no, "malformed JSON record");
  if (!j.is_object()) fail(line_no, "record is not a JSON object");
  return j;
}

const json& field(const json& j, const char* name, int line_no) {
  auto it = j.find(name);
  if (it == j.end()) fail(line_no, std::string("missing field '") + name + "'");
  return *it;
}

double num_field(const json& j, const char* name, int line_no) {
  const json& v = field(j, name, line_no);
  if (!v.is_number()) fail(line_no, std::string("field '") + name + "' is not a number");
  return v.get<double>();
}

std::int64_t int_field(const json& j, const char* name, int line_no) {
  const json& v = field(j, name, line_no);
  if (!v.is_number_integer()) {
    fail(line_no, std::string("field '") + name + "' is not an integer");
  }
  return v.get<std::int64_t>();
}

std::string str_field(const json& j, const char* name, int line_no) {
  const json& v = field(j, name, line_no);
  if (!v.is_string()) fail(line_no, std::string("field '") + name + "' is not a string");
  return v.get<std::string>();
}

Pos pos_entry(const json& p, int idx, int line_no) {
  if (!p.is_object()) fail(line_no, "positions[" + std::to_string(idx) + "] is not an object");
  Pos out;
  out.x = num_field(p, "x", line_no);
  out.y = num_field(p, "y", line_no);
  const char* ax[2] = {"x", "y"};
  double vals[2] = {out.x, out.y};
  for (int i = 0; i < 2; ++i) {
    if (vals[i] < 0.0 || vals[i] > 100.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": positions[" +
                            std::to_string(idx) + "]." + ax[i] +
                            " out of range [0,100]: " + fmt_num(vals[i]));
    }
  }
  return out;
}

}  // namespace

Event parse_event_record(const std::string& line, int line_no,
                         std::int64_t fallback_id) {
  json j = parse_json_line(line, line_no);
  Event e;
  e.event_id = j.contains("eventId") ? int_field(j, "eventId", line_no) : fallback_id;
  e.match_id = int_field(j, "matchId", line_no);
  e.team_id = int_field(j, "teamId", line_no);
  e.player_id = int_field(j, "playerId", line_no);
  try {
    e.kind = kind_from_name(str_field(j, "eventName", line_no));
  } catch (const ParseError& ex) {
    fail(line_no, ex.what());
  }
  e.period = j.contains("matchPeriod")
                 ? period_from_name(str_field(j, "matchPeriod", line_no))
                 : Period::FirstHalf;
  e.sec = num_field(j, "eventSec", line_no);
  if (e.sec < 0.0) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": eventSec is negative: " + fmt_num(e.sec));
  }
  const json& pos = field(j, "positions", line_no);
  if (!pos.is_array() || pos.empty() || pos.size() > 2) {
    fail(line_no, "field 'positions' must be an array of 1 or 2 points");
  }
  e.origin = pos_entry(pos[0], 0, line_no);
  if (pos.size() == 2) e.destination = pos_entry(pos[1], 1, line_no);
  if (j.contains("subEventName")) e.sub_type = str_field(j, "subEventName", line_no);
  if (j.contains("tags")) {
    const json& tags = j["tags"];
    if (!tags.is_array()) fail(line_no, "field 'tags' is not an array");
    for (const json& t : tags) {
      if (!t.is_object() || !t.contains("id") || !t["id"].is_number_integer()) {
        fail(line_no, "tag entries must be objects with an integer 'id'");
      }
      e.tags.push_back(t["id"].get<int>());
    }
  }
  return e;
}

Match parse_match_record(const std::string& line, int line_no) {
  json j = parse_json_line(line, line_no);
  Match m;
  m.match_id = int_field(j, "matchId", line_no);
  const json& teams = field(j, "teams", line_no);
  if (!teams.is_array() || teams.size() != 2) {
    fail(line_no, "field 'teams' must be an array of exactly 2 entries");
  }
  TeamSide* sides[2] = {&m.a, &m.b};
  for (int i = 0; i < 2; ++i) {
    const json& t = teams[i];
    sides[i]->team_id = int_field(t, "teamId", line_no);
    if (t.contains("name")) sides[i]->name = str_field(t, "name", line_no);
    sides[i]->goals = static_cast<int>(int_field(t, "goals", line_no));
    if (sides[i]->goals < 0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": negative goals for teamId " +
                            std::to_string(sides[i]->team_id));
    }
  }
  if (m.a.team_id == m.b.team_id) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": match " + std::to_string(m.match_id) +
                          " lists the same teamId twice");
  }
  const std::string g = str_field(j, "gender", line_no);
  if (g == "male") {
    m.gender = Gender::Male;
  } else if (g == "female") {
    m.gender = Gender::Female;
  } else {
    fail(line_no, "field 'gender' must be 'male' or 'female', got '" + g + "'");
  }
  if (j.contains("competition")) m.competition = str_field(j, "competition", line_no);
  if (j.contains("coolingAnnotated")) {
    const json& c = j["coolingAnnotated"];
    if (!c.is_boolean()) fail(line_no, "field 'coolingAnnotated' is not a boolean");
    m.cooling_annotated = c.get<bool>();
  }
  if (j.contains("periods")) {
    const json& ps = j["periods"];
    if (!ps.is_array()) fail(line_no, "field 'periods' is not an array");
    for (const json& p : ps) {
      Period per = period_from_name(str_field(p, "period", line_no));
      m.period_ends[per] = num_field(p, "endSec", line_no);
    }
  }
  return m;
}

Player parse_player_record(const std::string& line, int line_no) {
  json j = parse_json_line(line, line_no);
  Player p;
  p.player_id = int_field(j, "playerId", line_no);
  p.team_id = int_field(j, "teamId", line_no);
  if (j.contains("name")) p.name = str_field(j, "name", line_no);
  if (j.contains("role")) p.role = str_field(j, "role", line_no);
  return p;
}

EventStore::EventStore(std::vector<Event> events, std::vector<Match> matches,
                       std::vector<Player> players)
    : events_(std::move(events)) {
  for (Match& m : matches) {
    if (matches_.count(m.match_id)) {
      throw ValidationError("duplicate matchId: " + std::to_string(m.match_id));
    }
    matches_[m.match_id] = std::move(m);
  }
  for (Player& p : players) {
    if (players_.count(p.player_id)) {
      throw ValidationError("duplicate playerId: " + std::to_string(p.player_id));
    }
    players_[p.player_id] = std::move(p);
  }

  std::vector<std::string> offenders;
  std::size_t offender_count = 0;
  auto offend = [&](const std::string& what) {
    ++offender_count;
    if (offenders.size() < 10) offenders.push_back(what);
  };
  for (const Event& e : events_) {
    auto mit = matches_.find(e.match_id);
    if (mit == matches_.end()) {
      offend("event " + std::to_string(e.event_id) + ": unknown matchId " +
             std::to_string(e.match_id));
      continue;
    }
    if (!mit->second.has_team(e.team_id)) {
      offend("event " + std::to_string(e.event_id) + ": teamId " +
             std::to_string(e.team_id) + " not in match " +
             std::to_string(e.match_id));
    }
    auto pit = players_.find(e.player_id);
    if (pit == players_.end()) {
      offend("event " + std::to_string(e.event_id) + ": unknown playerId " +
             std::to_string(e.player_id));
    } else if (pit->second.team_id != e.team_id) {
      offend("event " + std::to_string(e.event_id) + ": playerId " +
             std::to_string(e.player_id) + " belongs to teamId " +
             std::to_string(pit->second.team_id) + ", event says " +
             std::to_string(e.team_id));
    }
  }
  if (offender_count > 0) {
    std::string msg = "referential integrity: " + std::to_string(offender_count) +
                      " offending event(s):";
    for (const std::string& o : offenders) msg += "\n  " + o;
    throw ValidationError(msg);
  }

  // Stable sort keeps insertion order for identical timestamps.
  std::vector<std::size_t> idx(events_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
    const Event& a = events_[l];
    const Event& b = events_[r];
    if (a.match_id != b.match_id) return a.match_id < b.match_id;
    if (a.period != b.period) return a.period < b.period;
    return a.sec < b.sec;
  });
  std::vector<Event> sorted;
  sorted.reserve(events_.size());
  for (std::size_t i : idx) sorted.push_back(std::move(events_[i]));
  events_ = std::move(sorted);

  for (std::size_t i = 0; i < events_.size();) {
    std::size_t j = i;
    while (j < events_.size() && events_[j].match_id == events_[i].match_id) ++j;
    span_[events_[i].match_id] = {i, j};
    i = j;
  }
}

const Match& EventStore::match(std::int64_t match_id) const {
  auto it = matches_.find(match_id);
  if (it == matches_.end()) {
    throw NotFoundError("unknown matchId: " + std::to_string(match_id));
  }
  return it->second;
}

const Player& EventStore::player(std::int64_t player_id) const {
  auto it = players_.find(player_id);
  if (it == players_.end()) {
    throw NotFoundError("unknown playerId: " + std::to_string(player_id));
  }
  return it->second;
}

std::span<const Event> EventStore::events_for(std::int64_t match_id) const {
  match(match_id);
  auto it = span_.find(match_id);
  if (it == span_.end()) return {};
  return std::span<const Event>(events_.data() + it->second.first,
                                it->second.second - it->second.first);
}

std::vector<Event> EventStore::events_for(std::int64_t match_id,
                                          std::int64_t team_id) const {
  std::vector<Event> out;
  for (const Event& e : events_for(match_id)) {
    if (e.team_id == team_id) out.push_back(e);
  }
  return out;
}

std::vector<std::int64_t> EventStore::teams_of(std::int64_t match_id) const {
  const Match& m = match(match_id);
  return {m.a.team_id, m.b.team_id};
}

double EventStore::period_end(std::int64_t match_id, Period p) const {
  const Match& m = match(match_id);
  auto it = m.period_ends.find(p);
  if (it != m.period_ends.end()) return it->second;
  double end = 0.0;
  for (const Event& e : events_for(match_id)) {
    if (e.period == p && e.sec > end) end = e.sec;
  }
  return end;
}

namespace {

struct ParsedFile {
  std::vector<Event> events;
};

std::vector<Event> parse_event_file(const std::string& path,
                                    std::int64_t id_base) {
  std::vector<std::string> lines = read_lines(path);
  std::vector<Event> events(lines.size());
  std::vector<char> used(lines.size(), 0);
  std::vector<std::string> errors(lines.size());
  bool any_error = false;

#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(lines.size()); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events[i] = parse_event_record(line, static_cast<int>(i + 1),
                                     id_base + static_cast<std::int64_t>(i));
      used[i] = 1;
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
#pragma omp atomic write
      any_error = true;
    }
  }

  if (any_error) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (!errors[i].empty()) throw ParseError(path + ": " + errors[i]);
    }
  }
  std::vector<Event> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (used[i]) out.push_back(std::move(events[i]));
  }
  return out;
}

}  // namespace

EventStore load_dataset(const std::vector<std::string>& event_paths,
                        const std::string& match_path,
                        const std::string& player_path) {
  for (const std::string& p : event_paths) {
    if (!file_exists(p)) throw MissingInputError("event file not found: " + p);
  }
  if (!file_exists(match_path)) {
    throw MissingInputError("match file not found: " + match_path);
  }
  if (!file_exists(player_path)) {
    throw MissingInputError("player file not found: " + player_path);
  }

  std::vector<Event> events;
  std::int64_t id_base = 1;
  for (const std::string& p : event_paths) {
    std::vector<Event> part = parse_event_file(p, id_base);
    id_base += static_cast<std::int64_t>(part.size());
    for (Event& e : part) events.push_back(std::move(e));
  }

  std::vector<Match> matches;
  {
    int line_no = 0;
    for (const std::string& line : read_lines(match_path)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        matches.push_back(parse_match_record(line, line_no));
      } catch (const ParseError& ex) {
        throw ParseError(match_path + ": " + ex.what());
      }
    }
  }
  std::vector<Player> players;
  {
    int line_no = 0;
    for (const std::string& line : read_lines(player_path)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        players.push_back(parse_player_record(line, line_no));
      } catch (const ParseError& ex) {
        throw ParseError(player_path + ": " + ex.what());
      }
    }
  }
  return EventStore(std::move(events), std::move(matches), std::move(players));
}

std::string serialize_event(const Event& e) {
  json j;
  j["eventId"] = e.event_id;
  j["matchId"] = e.match_id;
  j["teamId"] = e.team_id;
  j["playerId"] = e.player_id;
  j["eventName"] = kind_name(e.kind);
  j["matchPeriod"] = period_name(e.period);
  j["eventSec"] = e.sec;
  json pos = json::array();
  pos.push_back(json{{"x", e.origin.x}, {"y", e.origin.y}});
  if (e.destination) {
    pos.push_back(json{{"x", e.destination->x}, {"y", e.destination->y}});
  }
  j["positions"] = pos;
  if (!e.sub_type.empty()) j["subEventName"] = e.sub_type;
  if (!e.tags.empty()) {
    json tags = json::array();
    for (int t : e.tags) tags.push_back(json{{"id", t}});
    j["tags"] = tags;
  }
  return j.dump();
}

std::string serialize_match(const Match& m) {
  json j;
  j["matchId"] = m.match_id;
  j["gender"] = m.gender == Gender::Male ? "male" : "female";
  if (!m.competition.empty()) j["competition"] = m.competition;
  json teams = json::array();
  for (const TeamSide* s : {&m.a, &m.b}) {
    json t;
    t["teamId"] = s->team_id;
    if (!s->name.empty()) t["name"] = s->name;
    t["goals"] = s->goals;
    teams.push_back(t);
  }
  j["teams"] = teams;
  if (!m.period_ends.empty()) {
    json ps = json::array();
    for (const auto& [per, end] : m.period_ends) {
      ps.push_back(json{{"period", period_name(per)}, {"endSec", end}});
    }
    j["periods"] = ps;
  }
  if (m.cooling_annotated) j["coolingAnnotated"] = true;
  return j.dump();
}

std::string serialize_player(const Player& p) {
  json j;
  j["playerId"] = p.player_id;
  j["teamId"] = p.team_id;
  if (!p.name.empty()) j["name"] = p.name;
  if (!p.role.empty()) j["role"] = p.role;
  return j.dump();
}

void export_store(const EventStore& store, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "events.jsonl");
    if (!out) throw ValidationError("cannot write store to " + dir);
    for (const Event& e : store.events()) out << serialize_event(e) << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "matches.jsonl");
    for (const auto& [id, m] : store.matches()) out << serialize_match(m) << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "players.jsonl");
    for (const auto& [id, p] : store.players()) out << serialize_player(p) << "\n";
  }
}

EventStore load_store(const std::string& dir) {
  const fs::path d(dir);
  return load_dataset({(d / "events.jsonl").string()},
                      (d / "matches.jsonl").string(),
                      (d / "players.jsonl").string());
}

}  // namespace pitchlab
