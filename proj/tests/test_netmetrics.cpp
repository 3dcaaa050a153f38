#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pitchlab/io.hpp"
#include "pitchlab/netmetrics.hpp"
#include "pitchlab/ref.hpp"

using namespace pitchlab;
using namespace testutil;

namespace {

using Sym = std::vector<std::vector<double>>;

Sym graph(int n, const std::vector<std::array<double, 3>>& edges) {
  Sym w(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (const auto& e : edges) {
    const auto i = static_cast<std::size_t>(e[0]);
    const auto j = static_cast<std::size_t>(e[1]);
    w[i][j] = w[j][i] = e[2];
  }
  return w;
}

// Three team-1 passers (10, 11, 12) with hand-traced edges, managed counts
// and zone touches; team 2 contributes one lonely passer. All expected
// numbers below were derived by hand before implementation.
EventStore network_store() {
  const Period H1 = Period::FirstHalf, H2 = Period::SecondHalf;
  std::vector<Event> es;
  auto add = [&](std::int64_t team, std::int64_t player, EventKind kind,
                 Period p, double t, std::vector<int> tags, Pos o,
                 std::optional<Pos> d = {}) {
    Event e = ev(static_cast<std::int64_t>(es.size() + 1), 960, team, player,
                 kind, p, t, kind == EventKind::Pass ? "Simple pass" : "Shot",
                 std::move(tags), o);
    e.destination = d;
    es.push_back(e);
  };
  add(1, 10, EventKind::Pass, H1, 1, {1801}, {20, 30}, Pos{40, 30});
  add(1, 11, EventKind::Pass, H1, 3, {1801}, {40, 30}, Pos{60, 50});
  add(1, 12, EventKind::Pass, H1, 5, {1802}, {60, 50}, Pos{80, 80});
  add(2, 20, EventKind::Pass, H1, 7, {1801}, {70, 30}, Pos{60, 30});
  add(1, 10, EventKind::Pass, H1, 9, {1801}, {30, 40}, Pos{30, 20});
  add(1, 11, EventKind::Shot, H1, 11, {1801}, {85, 50});
  add(1, 12, EventKind::Pass, H2, 2, {1801}, {50, 50}, Pos{55, 55});

  std::vector<Player> ps = {mk_player(10, 1), mk_player(11, 1),
                            mk_player(12, 1), mk_player(20, 2)};
  return EventStore(es, {mk_match(960, 1, 2)}, ps);
}

}  // namespace

TEST_CASE("solve_linear handles pivoting and rejects singular systems") {
  // [[2,1],[1,3]] x = [3,5] has the unique solution (4/5, 7/5).
  auto x = solve_linear({{2, 1}, {1, 3}}, {3, 5});
  CHECK(x[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(1.4).epsilon(1e-12));

  // Leading zero forces a row swap.
  auto y = solve_linear({{0, 2, 1}, {1, 1, 1}, {2, 0, 3}}, {7, 6, 11});
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(solve_linear({{1, 2}, {2, 4}}, {1, 2}), ValidationError);
}

TEST_CASE("ldlt factors once and solves repeatedly") {
  DenseMatrix a = {{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
  LdltFactor f(a);
  for (const std::vector<double>& b :
       {std::vector<double>{1, 0, 0}, std::vector<double>{2, -1, 5}}) {
    auto x = f.solve(b);
    for (std::size_t i = 0; i < 3; ++i) {
      double r = 0.0;
      for (std::size_t j = 0; j < 3; ++j) r += a[i][j] * x[j];
      CHECK(r == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(LdltFactor({{1, 2}, {2, 4}}), ValidationError);
}

TEST_CASE("flow betweenness on graphs with known closed forms") {
  // Path 0-1-2: all current between the ends crosses the middle.
  auto path = current_flow_betweenness(graph(3, {{0, 1, 1}, {1, 2, 1}}));
  CHECK(path[0] == doctest::Approx(0.0));
  CHECK(path[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(path[2] == doctest::Approx(0.0));

  // Star: the hub carries each of the three leaf pairs.
  auto star = current_flow_betweenness(
      graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}}));
  CHECK(star[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(star[1] == doctest::Approx(0.0));

  // Cycle of four: 0.5 from the opposite pair, 0.25 from each adjacent one.
  auto cyc = current_flow_betweenness(
      graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}}));
  for (double v : cyc) CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // Complete graph on four nodes: 1/4 per transit pair, three pairs each.
  auto k4 = current_flow_betweenness(graph(4, {{0, 1, 1},
                                               {0, 2, 1},
                                               {0, 3, 1},
                                               {1, 2, 1},
                                               {1, 3, 1},
                                               {2, 3, 1}}));
  for (double v : k4) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));

  // Unequal parallel routes: direct edge of conductance 1 against a two-hop
  // route; the detour node carries a third of the current.
  auto det = current_flow_betweenness(graph(3, {{0, 1, 1}, {0, 2, 1}, {2, 1, 1}}));
  CHECK(det[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("path betweenness on graphs with known closed forms") {
  auto path = shortest_path_betweenness(graph(3, {{0, 1, 1}, {1, 2, 1}}));
  CHECK(path[1] == doctest::Approx(0.5).epsilon(1e-12));

  auto star = shortest_path_betweenness(
      graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}}));
  CHECK(star[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(star[2] == doctest::Approx(0.0));

  // Cycle of four: only the opposite pair has intermediaries, split over
  // its two shortest paths.
  auto cyc = shortest_path_betweenness(
      graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}}));
  for (double v : cyc) CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(1e-12));

  // Complete graph: every pair is adjacent, nobody is in between.
  auto k4 = shortest_path_betweenness(graph(4, {{0, 1, 1},
                                                {0, 2, 1},
                                                {0, 3, 1},
                                                {1, 2, 1},
                                                {1, 3, 1},
                                                {2, 3, 1}}));
  for (double v : k4) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("centralities ignore isolated nodes and tiny graphs") {
  // Node 3 is isolated: n stays 3 and node 3 scores zero.
  Sym w = graph(4, {{0, 1, 1}, {1, 2, 1}});
  auto flow = current_flow_betweenness(w);
  CHECK(flow[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(flow[3] == doctest::Approx(0.0));
  auto spb = shortest_path_betweenness(w);
  CHECK(spb[1] == doctest::Approx(0.5).epsilon(1e-12));

  // Two non-isolated nodes: nothing can be in between.
  auto pair_only = current_flow_betweenness(graph(3, {{0, 1, 2}}));
  for (double v : pair_only) CHECK(v == doctest::Approx(0.0));

  // Two components: pairs only form within a component. Each triangle-free
  // path component credits its middle node with its single pair.
  Sym two = graph(6, {{0, 1, 1}, {1, 2, 1}, {3, 4, 1}, {4, 5, 1}});
  auto f2 = current_flow_betweenness(two);
  // n = 6 here, so each middle carries 1 pair over (n-1)(n-2) = 20.
  CHECK(f2[1] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(f2[4] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(f2[0] == doctest::Approx(0.0));
  auto s2 = shortest_path_betweenness(two);
  CHECK(s2[1] == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("fast centralities agree with the serial reference kernels") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng(seed);
    const int n = static_cast<int>(rng.uniform_int(4, 8));
    Sym w(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.uniform() < 0.5) {
          const double c = static_cast<double>(rng.uniform_int(1, 3));
          w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
          w[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = c;
        }
      }
    }
    auto fast_flow = current_flow_betweenness(w);
    auto ref_flow = ref::brute_flow_betweenness(w);
    auto fast_path = shortest_path_betweenness(w);
    auto ref_path = ref::enum_path_betweenness(w);
    for (int v = 0; v < n; ++v) {
      const auto u = static_cast<std::size_t>(v);
      CHECK(fast_flow[u] == doctest::Approx(ref_flow[u]).epsilon(1e-9));
      CHECK(fast_path[u] == doctest::Approx(ref_path[u]).epsilon(1e-12));
    }
  }
}

TEST_CASE("on trees current flow equals shortest paths") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed * 11);
    const int n = static_cast<int>(rng.uniform_int(4, 8));
    Sym w(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 1; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, i - 1));
      const double c = rng.uniform(0.5, 3.0);
      w[static_cast<std::size_t>(i)][j] = c;
      w[j][static_cast<std::size_t>(i)] = c;
    }
    auto flow = current_flow_betweenness(w);
    auto spb = shortest_path_betweenness(w);
    for (int v = 0; v < n; ++v) {
      CHECK(flow[static_cast<std::size_t>(v)] ==
            doctest::Approx(spb[static_cast<std::size_t>(v)]).epsilon(1e-9));
    }
  }
}

TEST_CASE("passing network build matches the hand trace") {
  EventStore store = network_store();
  PassingNetwork net = build_passing_network(store, 960, 1);

  REQUIRE(net.players == std::vector<std::int64_t>{10, 11, 12});
  CHECK(net.passes_made == 5);
  CHECK(net.managed == std::vector<int>{2, 3, 3});
  CHECK(net.weight[0][1] == doctest::Approx(2.0));
  CHECK(net.weight[1][2] == doctest::Approx(1.0));
  CHECK(net.weight[1][0] == doctest::Approx(0.0));
  CHECK(net.weight[2][0] == doctest::Approx(0.0));
  CHECK(net.touch_positions.size() == 8);

  auto sym = symmetrized(net);
  CHECK(sym[0][1] == doctest::Approx(2.0));
  CHECK(sym[1][0] == doctest::Approx(2.0));
  CHECK(sym[2][1] == doctest::Approx(1.0));
  CHECK(sym[0][2] == doctest::Approx(0.0));

  PassingNetwork other = build_passing_network(store, 960, 2);
  REQUIRE(other.players == std::vector<std::int64_t>{20});
  CHECK(other.passes_made == 1);
  CHECK(other.managed == std::vector<int>{1});
  // Accurate but received by nobody: no edge, one touch.
  CHECK(other.touch_positions.size() == 1);
}

TEST_CASE("h components and indicator match the hand computation") {
  EventStore store = network_store();
  PassingNetwork net = build_passing_network(store, 960, 1);
  HComponents c = h_components(net);
  CHECK(c.w == doctest::Approx(5.0));
  CHECK(c.mu_p == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(c.sigma_p == doctest::Approx(0.4714045207910317).epsilon(1e-12));
  CHECK(c.mu_z == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(c.sigma_z == doctest::Approx(0.33704599092705334).epsilon(1e-12));
  CHECK(h_indicator(c) == doctest::Approx(0.2752807597008952).epsilon(1e-12));

  HComponents degenerate = c;
  degenerate.sigma_p = 0.0;
  CHECK_THROWS_AS(h_indicator(degenerate), UndefinedValueError);
  degenerate.sigma_p = -1.0;
  CHECK_THROWS_AS(h_indicator(degenerate), UndefinedValueError);
}

TEST_CASE("summarize_network aggregates centralities and handles degenerates") {
  EventStore store = network_store();
  NetworkSummary s = summarize_network(store, 960, 1);
  // The symmetrized graph is the path 10-11-12.
  CHECK(s.flow_betweenness[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.path_betweenness[1] == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(s.team_flow_centrality.has_value());
  CHECK(*s.team_flow_centrality == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  REQUIRE(s.h_value.has_value());
  CHECK(*s.h_value == doctest::Approx(0.2752807597008952).epsilon(1e-12));

  NetworkSummary lonely = summarize_network(store, 960, 2);
  CHECK_FALSE(lonely.team_flow_centrality.has_value());
  CHECK_FALSE(lonely.h_value.has_value());  // sigma_p is zero for one player
}

TEST_CASE("network tables export nodes and directed edges") {
  EventStore store = network_store();
  std::vector<NetworkSummary> ss = {summarize_network(store, 960, 1),
                                    summarize_network(store, 960, 2)};
  TempDir tmp("net");
  export_network_tables(ss, tmp.file("nodes.csv"), tmp.file("edges.csv"),
                        "abcd000000000000");
  CsvTable nodes = read_csv(tmp.file("nodes.csv"));
  CsvTable edges = read_csv(tmp.file("edges.csv"));
  REQUIRE(nodes.rows.size() == 4);
  CHECK(nodes.rows[0][nodes.column("player_id")] == "10");
  CHECK(nodes.rows[0][nodes.column("managed")] == "2");
  REQUIRE(edges.rows.size() == 2);
  CHECK(edges.rows[0][edges.column("from_player")] == "10");
  CHECK(edges.rows[0][edges.column("to_player")] == "11");
  CHECK(edges.rows[0][edges.column("weight")] == "2");
}
