#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "pitchlab/io.hpp"
#include "pitchlab/possession.hpp"

using namespace pitchlab;
using namespace testutil;

namespace {

// Two-team match exercising every phase boundary rule. Expected phases were
// worked out by hand from the segmentation rules before they were coded.
std::vector<Event> boundary_fixture(std::int64_t match) {
  const Period H1 = Period::FirstHalf, H2 = Period::SecondHalf;
  std::vector<Event> es;
  es.push_back(ev(1, match, 1, 10, EventKind::FreeKick, H1, 0, "Kick off"));
  es.push_back(ev(2, match, 1, 10, EventKind::Pass, H1, 2, "Simple pass", {1801}));
  es.push_back(ev(3, match, 2, 20, EventKind::Duel, H1, 5, "Ground defending duel"));
  es.push_back(ev(4, match, 1, 11, EventKind::Pass, H1, 6, "Simple pass", {1801}));
  es.push_back(ev(5, match, 2, 20, EventKind::Duel, H1, 9, "Ground attacking duel"));
  es.push_back(ev(6, match, 2, 21, EventKind::Pass, H1, 10, "Simple pass", {1801}));
  es.push_back(ev(7, match, 2, 21, EventKind::Pass, H1, 13, "High pass", {1802}));
  es.push_back(ev(8, match, 1, 10, EventKind::Foul, H1, 15, "Foul"));
  es.push_back(ev(9, match, 1, 11, EventKind::FreeKick, H1, 20, "Free Kick"));
  es.push_back(ev(10, match, 1, 10, EventKind::Shot, H1, 24, "Shot", {1801},
                  Pos{85, 50}));
  es.push_back(ev(11, match, 2, 20, EventKind::Interruption, H1, 26,
                  "Ball out of the field"));
  es.push_back(ev(12, match, 2, 20, EventKind::FreeKick, H1, 30, "Goal kick"));
  es.push_back(ev(13, match, 2, 21, EventKind::Pass, H1, 34, "Simple pass", {1801}));
  es.push_back(ev(14, match, 2, 20, EventKind::FreeKick, H2, 0, "Kick off"));
  es.push_back(ev(15, match, 2, 21, EventKind::Pass, H2, 3, "Simple pass", {1801}));
  es.push_back(ev(16, match, 1, 10, EventKind::Offside, H2, 8, ""));
  es.push_back(ev(17, match, 1, 11, EventKind::FreeKick, H2, 15, "Free Kick"));
  es.push_back(ev(18, match, 1, 10, EventKind::Pass, H2, 112, "Simple pass", {1801}));
  es.push_back(ev(19, match, 1, 11, EventKind::Shot, H2, 115, "Shot",
                  {101, 1801}, Pos{88, 45}));
  es.push_back(ev(20, match, 2, 20, EventKind::FreeKick, H2, 140, "Kick off"));
  es.push_back(ev(21, match, 2, 21, EventKind::Pass, H2, 144, "High pass", {1802}));
  return es;
}

EventStore fixture_store(Gender g) {
  std::vector<Match> ms = {mk_match(900, 1, 2, g, 1, 0)};
  return EventStore(boundary_fixture(900), ms, default_players(1, 2));
}

void check_partition(std::span<const Event> span,
                     const std::vector<Phase>& phases) {
  std::set<std::size_t> seen;
  for (const Phase& p : phases) {
    REQUIRE_FALSE(p.event_idx.empty());
    CHECK(p.start_sec == span[p.event_idx.front()].sec);
    CHECK(p.end_sec == span[p.event_idx.back()].sec);
    std::size_t prev = 0;
    bool first = true;
    for (std::size_t i : p.event_idx) {
      CHECK(span[i].period == p.period);
      if (!first) CHECK(i > prev);
      prev = i;
      first = false;
      CHECK(seen.insert(i).second);
    }
  }
  CHECK(seen.size() == span.size());
}

}  // namespace

TEST_CASE("restart predicates classify sub-types") {
  CHECK(is_ball_out_restart("Throw in"));
  CHECK(is_ball_out_restart("Goal kick"));
  CHECK(is_ball_out_restart("Corner"));
  CHECK_FALSE(is_ball_out_restart("Free Kick"));
  CHECK_FALSE(is_ball_out_restart("Kick off"));

  CHECK(is_stop_restart("Free Kick"));
  CHECK(is_stop_restart("Free kick cross"));
  CHECK(is_stop_restart("Free kick shot"));
  CHECK(is_stop_restart("Corner"));
  CHECK(is_stop_restart("Throw in"));
  CHECK_FALSE(is_stop_restart("Goal kick"));
  CHECK_FALSE(is_stop_restart("Kick off"));
  CHECK_FALSE(is_stop_restart("Penalty"));

  CHECK(is_restart("Kick off"));
  CHECK(is_restart("Penalty"));
  CHECK(is_restart("Goal kick"));
  CHECK_FALSE(is_restart("Simple pass"));
}

TEST_CASE("segmentation of the boundary fixture matches the hand trace") {
  EventStore store = fixture_store(Gender::Male);
  std::vector<Phase> phases = segment_match(store, 900);
  REQUIRE(phases.size() == 7);

  auto ids = [&](int i) { return phases[i].event_ids; };
  using IdList = std::vector<std::int64_t>;

  CHECK(phases[0].team_id == 1);
  CHECK(ids(0) == IdList{1, 2, 3, 4});
  CHECK(phases[0].reason == EndReason::Turnover);
  CHECK(phases[0].start_sec == doctest::Approx(0));
  CHECK(phases[0].end_sec == doctest::Approx(6));

  CHECK(phases[1].team_id == 2);
  CHECK(ids(1) == IdList{5, 6, 7, 8});
  CHECK(phases[1].reason == EndReason::Foul);
  CHECK(phases[1].start_sec == doctest::Approx(9));
  CHECK(phases[1].end_sec == doctest::Approx(15));

  CHECK(phases[2].team_id == 1);
  CHECK(ids(2) == IdList{9, 10, 11});
  CHECK(phases[2].reason == EndReason::BallOut);

  CHECK(phases[3].team_id == 2);
  CHECK(ids(3) == IdList{12, 13});
  CHECK(phases[3].reason == EndReason::HalfEnd);
  CHECK(phases[3].period == Period::FirstHalf);

  CHECK(phases[4].team_id == 2);
  CHECK(ids(4) == IdList{14, 15, 16});
  CHECK(phases[4].reason == EndReason::Offside);
  CHECK(phases[4].period == Period::SecondHalf);

  CHECK(phases[5].team_id == 1);
  CHECK(ids(5) == IdList{17, 18, 19});
  CHECK(phases[5].reason == EndReason::Turnover);
  CHECK(phases[5].start_sec == doctest::Approx(15));
  CHECK(phases[5].end_sec == doctest::Approx(115));

  CHECK(phases[6].team_id == 2);
  CHECK(ids(6) == IdList{20, 21});
  CHECK(phases[6].reason == EndReason::HalfEnd);

  check_partition(store.events_for(900), phases);
}

TEST_CASE("a long gap splits a phase only when cooling breaks apply") {
  EventStore female = fixture_store(Gender::Female);
  std::vector<Phase> phases = segment_match(female, 900);
  REQUIRE(phases.size() == 8);

  CHECK(phases[5].team_id == 1);
  CHECK(phases[5].event_ids == std::vector<std::int64_t>{17});
  CHECK(phases[5].reason == EndReason::CoolingBreak);
  CHECK(phases[6].team_id == 1);
  CHECK(phases[6].event_ids == std::vector<std::int64_t>{18, 19});
  CHECK(phases[6].reason == EndReason::Turnover);
  check_partition(female.events_for(900), phases);

  // The same stream with the annotation flag on a male match splits too.
  std::vector<Match> ms = {mk_match(900, 1, 2, Gender::Male)};
  ms[0].cooling_annotated = true;
  EventStore annotated(boundary_fixture(900), ms, default_players(1, 2));
  CHECK(segment_match(annotated, 900).size() == 8);

  // A tighter threshold splits the male match as well.
  SegmentOptions opts;
  opts.cooling_gap_s = 90.0;
  EventStore male = fixture_store(Gender::Male);
  CHECK(segment_match(male, 900, opts).size() == 7);
}

TEST_CASE("trailing duels get a phase of their own team") {
  std::vector<Event> es = {
      ev(1, 901, 1, 10, EventKind::Pass, Period::FirstHalf, 0, "Simple pass"),
      ev(2, 901, 2, 20, EventKind::Duel, Period::FirstHalf, 3, "Ground duel"),
      ev(3, 901, 1, 11, EventKind::Duel, Period::FirstHalf, 4, "Ground duel"),
  };
  EventStore store(es, {mk_match(901, 1, 2)}, default_players(1, 2));
  std::vector<Phase> phases = segment_match(store, 901);
  REQUIRE(phases.size() == 1);
  CHECK(phases[0].team_id == 1);
  CHECK(phases[0].event_ids == std::vector<std::int64_t>{1, 2, 3});
  CHECK(phases[0].reason == EndReason::HalfEnd);
}

TEST_CASE("duels at a period boundary never leak into the next period") {
  SUBCASE("an open phase absorbs its period's trailing duel") {
    std::vector<Event> es = {
        ev(1, 902, 1, 10, EventKind::Pass, Period::FirstHalf, 5, "Simple pass"),
        ev(2, 902, 2, 20, EventKind::Duel, Period::FirstHalf, 8, "Ground duel"),
        ev(3, 902, 2, 20, EventKind::Pass, Period::SecondHalf, 1, "Simple pass"),
    };
    EventStore store(es, {mk_match(902, 1, 2)}, default_players(1, 2));
    std::vector<Phase> phases = segment_match(store, 902);
    REQUIRE(phases.size() == 2);
    CHECK(phases[0].event_ids == std::vector<std::int64_t>{1, 2});
    CHECK(phases[0].period == Period::FirstHalf);
    CHECK(phases[0].reason == EndReason::HalfEnd);
    CHECK(phases[1].event_ids == std::vector<std::int64_t>{3});
    CHECK(phases[1].period == Period::SecondHalf);
  }
  SUBCASE("with no open phase the duel gets its own phase") {
    std::vector<Event> es = {
        ev(1, 902, 1, 10, EventKind::Pass, Period::FirstHalf, 5, "Simple pass"),
        ev(2, 902, 2, 20, EventKind::Foul, Period::FirstHalf, 7, "Foul"),
        ev(3, 902, 2, 20, EventKind::Duel, Period::FirstHalf, 8, "Ground duel"),
        ev(4, 902, 1, 10, EventKind::Pass, Period::SecondHalf, 1, "Simple pass"),
    };
    EventStore store(es, {mk_match(902, 1, 2)}, default_players(1, 2));
    std::vector<Phase> phases = segment_match(store, 902);
    REQUIRE(phases.size() == 3);
    CHECK(phases[0].event_ids == std::vector<std::int64_t>{1, 2});
    CHECK(phases[0].reason == EndReason::Foul);
    CHECK(phases[1].team_id == 2);
    CHECK(phases[1].event_ids == std::vector<std::int64_t>{3});
    CHECK(phases[1].period == Period::FirstHalf);
    CHECK(phases[1].reason == EndReason::HalfEnd);
    CHECK(phases[2].event_ids == std::vector<std::int64_t>{4});
    CHECK(phases[2].period == Period::SecondHalf);
  }
}

TEST_CASE("a same-team restart over an open phase is not a turnover") {
  std::vector<Event> es = {
      ev(1, 903, 1, 10, EventKind::Pass, Period::FirstHalf, 0, "Simple pass"),
      ev(2, 903, 1, 11, EventKind::FreeKick, Period::FirstHalf, 10, "Free Kick"),
      ev(3, 903, 1, 10, EventKind::Pass, Period::FirstHalf, 12, "Simple pass"),
  };
  EventStore store(es, {mk_match(903, 1, 2)}, default_players(1, 2));
  std::vector<Phase> phases = segment_match(store, 903);
  REQUIRE(phases.size() == 2);
  CHECK(phases[0].reason == EndReason::BallOut);
  CHECK(phases[1].event_ids == std::vector<std::int64_t>{2, 3});
}

TEST_CASE("a foul with no open phase closes its own one-event phase") {
  std::vector<Event> es = {
      ev(1, 904, 2, 20, EventKind::Foul, Period::FirstHalf, 3, "Foul"),
      ev(2, 904, 1, 10, EventKind::FreeKick, Period::FirstHalf, 8, "Free Kick"),
  };
  EventStore store(es, {mk_match(904, 1, 2)}, default_players(1, 2));
  std::vector<Phase> phases = segment_match(store, 904);
  REQUIRE(phases.size() == 2);
  CHECK(phases[0].team_id == 2);
  CHECK(phases[0].reason == EndReason::Foul);
  CHECK(phases[1].team_id == 1);
}

TEST_CASE("segmentation invariants hold on randomized streams") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<Event> es;
    const std::vector<std::string> fk_subs = {"Free Kick", "Throw in",
                                              "Corner",    "Goal kick",
                                              "Kick off",  "Penalty"};
    double t = 0.0;
    for (int i = 0; i < 600; ++i) {
      const Period period = i < 300 ? Period::FirstHalf : Period::SecondHalf;
      if (i == 300) t = 0.0;
      t += rng.uniform() < 0.02 ? rng.uniform(95.0, 130.0) : rng.uniform(0.5, 8.0);
      const std::int64_t team = rng.uniform_int(1, 2);
      const std::int64_t player = team == 1 ? 10 : 20;
      const double roll = rng.uniform();
      EventKind kind;
      std::string sub;
      if (roll < 0.50) {
        kind = EventKind::Pass;
        sub = "Simple pass";
      } else if (roll < 0.65) {
        kind = EventKind::Duel;
        sub = "Ground duel";
      } else if (roll < 0.72) {
        kind = EventKind::FreeKick;
        sub = fk_subs[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(fk_subs.size()) - 1))];
      } else if (roll < 0.79) {
        kind = EventKind::Foul;
      } else if (roll < 0.83) {
        kind = EventKind::Offside;
      } else if (roll < 0.88) {
        kind = EventKind::Shot;
        sub = "Shot";
      } else if (roll < 0.95) {
        kind = EventKind::Others;
        sub = "Touch";
      } else {
        kind = EventKind::Interruption;
        sub = "Ball out of the field";
      }
      es.push_back(ev(static_cast<std::int64_t>(i + 1), 905, team, player, kind,
                      period, t, sub));
    }

    for (Gender g : {Gender::Male, Gender::Female}) {
      EventStore store(es, {mk_match(905, 1, 2, g)}, default_players(1, 2));
      std::vector<Phase> phases = segment_match(store, 905);
      check_partition(store.events_for(905), phases);
      for (std::size_t i = 0; i + 1 < phases.size(); ++i) {
        const Phase& p = phases[i];
        const Phase& q = phases[i + 1];
        if (p.period == q.period) {
          CHECK(q.start_sec >= p.end_sec);
        }
        if (p.reason == EndReason::HalfEnd) CHECK(p.period != q.period);
        if (p.reason == EndReason::Turnover) CHECK(q.team_id != p.team_id);
        if (p.team_id == q.team_id && p.period == q.period) {
          CHECK(p.reason != EndReason::Turnover);
        }
      }
    }
  }
}

TEST_CASE("segment_all covers every match in order and exports cleanly") {
  std::vector<Event> es = boundary_fixture(900);
  std::vector<Event> more = {
      ev(101, 910, 3, 30, EventKind::Pass, Period::FirstHalf, 1, "Simple pass"),
      ev(102, 910, 4, 40, EventKind::Foul, Period::FirstHalf, 4, "Foul"),
  };
  es.insert(es.end(), more.begin(), more.end());
  std::vector<Match> ms = {mk_match(900, 1, 2), mk_match(910, 3, 4)};
  std::vector<Player> ps = default_players(1, 2);
  ps.push_back(mk_player(30, 3));
  ps.push_back(mk_player(40, 4));
  EventStore store(es, ms, ps);

  auto all = segment_all(store);
  REQUIRE(all.size() == 2);
  CHECK(all[0].size() == 7);
  REQUIRE(all[1].size() == 1);
  CHECK(all[1][0].reason == EndReason::Foul);
  CHECK(all[1][0].event_ids == std::vector<std::int64_t>{101, 102});

  TempDir tmp("phases");
  const std::string path = tmp.file("phases.csv");
  export_phases(all, path, "cafe000000000000");
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# config_hash=cafe000000000000");
  CsvTable t = read_csv(path);
  REQUIRE(t.rows.size() == 8);
  CHECK(t.rows[0][t.column("event_ids")] == "1;2;3;4");
  CHECK(t.rows[0][t.column("reason")] == "turnover");
  CHECK(t.rows[7][t.column("match_id")] == "910");
}
