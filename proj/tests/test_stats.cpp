#include "doctest.h"

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "pitchlab/ref.hpp"
#include "pitchlab/stats.hpp"

using namespace pitchlab;

namespace {

const std::vector<double> kSampleA{12.1, 14.3, 11.8, 15.2, 13.4, 12.9};
const std::vector<double> kSampleB{10.2, 11.1, 9.8, 12.0, 10.5};

TeamMatchFeatures feature_row(std::int64_t match, std::int64_t team,
                              Gender gender, double passes, double accurate,
                              std::optional<double> pass_velocity) {
  TeamMatchFeatures r;
  r.match_id = match;
  r.team_id = team;
  r.gender = gender;
  r.values[kFeatEvents] = 100.0;
  r.values[kFeatShots] = 10.0;
  r.values[kFeatFouls] = 12.0;
  r.values[kFeatPasses] = passes;
  r.values[kFeatFreeKicks] = 20.0;
  r.values[kFeatDuels] = 30.0;
  r.values[kFeatOffsides] = 2.0;
  r.values[kFeatOthers] = 15.0;
  r.values[kFeatAccuratePasses] = accurate;
  r.values[kFeatPassAccuracy] = accurate / passes;
  r.values[kFeatPassVelocity] = pass_velocity;
  return r;
}

// Two four-match populations. Pass volume separates them cleanly, pooled
// pass accuracy is constant within each side, pass velocity has equal
// means, every other feature is either constant or absent.
struct ComparisonFixture {
  std::vector<TeamMatchFeatures> a, b;

  ComparisonFixture() {
    const double pa[4][2] = {{300, 200}, {325, 200}, {350, 200}, {375, 200}};
    const double aa[4][2] = {{228, 152}, {247, 152}, {266, 152}, {285, 152}};
    const double pb[4][2] = {{200, 200}, {225, 200}, {250, 200}, {275, 200}};
    const double ab[4][2] = {{168, 168}, {189, 168}, {210, 168}, {231, 168}};
    const std::optional<double> va[4][2] = {
        {2.75, 3.25}, {3.0, 3.5}, {2.75, std::nullopt}, {3.0, 3.0}};
    const std::optional<double> vb[4][2] = {
        {2.5, 3.0}, {3.25, 3.25}, {3.0, 3.0}, {3.0, 3.0}};
    for (int m = 0; m < 4; ++m) {
      for (int t = 0; t < 2; ++t) {
        a.push_back(feature_row(m + 1, 10 * (m + 1) + t, Gender::Female,
                                pa[m][t], aa[m][t], va[m][t]));
        b.push_back(feature_row(m + 101, 10 * (m + 101) + t, Gender::Male,
                                pb[m][t], ab[m][t], vb[m][t]));
      }
    }
  }
};

const ComparisonRow& row_named(const std::vector<ComparisonRow>& rows,
                               const std::string& name) {
  for (const auto& r : rows) {
    if (r.feature == name) return r;
  }
  REQUIRE(false);
  return rows.front();
}

}  // namespace

TEST_CASE("normal cdf matches tabulated values") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
  CHECK(normal_cdf(-2.5) == doctest::Approx(0.006209665325776132).epsilon(1e-12));
  CHECK(normal_cdf(-1.96) ==
        doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-12));
}

TEST_CASE("t distribution cdf matches reference values") {
  // df = 1 is the Cauchy distribution: F(1) = 3/4 in closed form.
  CHECK(students_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(students_t_cdf(0.0, 5.0) == 0.5);
  CHECK(students_t_cdf(2.5, 7.0) ==
        doctest::Approx(0.9795038907071236).epsilon(1e-10));
  CHECK(students_t_cdf(-1.3, 3.7) ==
        doctest::Approx(0.13433336208631366).epsilon(1e-10));
  CHECK(students_t_cdf(12.0, 2.0) ==
        doctest::Approx(0.9965635331614208).epsilon(1e-10));
  CHECK(students_t_cdf(-6.5, 30.0) ==
        doctest::Approx(1.7390235439860082e-07).epsilon(1e-9));
  CHECK(students_t_cdf(0.731, 63.1) ==
        doctest::Approx(0.7662575089432025).epsilon(1e-10));
}

TEST_CASE("t distribution cdf is symmetric and monotone") {
  for (double df : {1.0, 2.5, 7.0, 30.0, 200.0}) {
    double prev = 0.0;
    for (double t = -8.0; t <= 8.0; t += 0.5) {
      const double c = students_t_cdf(t, df);
      CHECK(c + students_t_cdf(-t, df) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("welch test matches reference implementation") {
  const WelchResult r = welch_t_test(kSampleA, kSampleB);
  CHECK(r.n_a == 6);
  CHECK(r.n_b == 5);
  CHECK(r.mean_a == doctest::Approx(13.283333333333333).epsilon(1e-14));
  CHECK(r.mean_b == doctest::Approx(10.72).epsilon(1e-14));
  CHECK(std::sqrt(r.var_a) ==
        doctest::Approx(1.3014094923069626).epsilon(1e-12));
  CHECK(std::sqrt(r.var_b) == doctest::Approx(0.85848704125339).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(3.9105121397468525).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(8.640227715248578).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.003854514782976438).epsilon(1e-10));
}

TEST_CASE("welch test handles degenerate spreads") {
  SUBCASE("identical constants") {
    const WelchResult r = welch_t_test({4.0, 4.0, 4.0}, {4.0, 4.0});
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("separated constants") {
    const WelchResult r = welch_t_test({1.0, 1.0}, {2.0, 2.0, 2.0});
    CHECK(std::isinf(r.t));
    CHECK(r.t < 0.0);
    CHECK(r.p == 0.0);
  }
  SUBCASE("too small a sample") {
    CHECK_THROWS_AS(welch_t_test({1.0}, {2.0, 3.0}), ValidationError);
    CHECK_THROWS_AS(welch_t_test({1.0, 2.0}, {}), ValidationError);
  }
}

TEST_CASE("welch p agrees with a label permutation test") {
  const WelchResult r = welch_t_test(kSampleA, kSampleB);
  const double p1 = ref::permutation_mean_diff_p(kSampleA, kSampleB, 20000, 99);
  const double p2 = ref::permutation_mean_diff_p(kSampleA, kSampleB, 20000, 99);
  CHECK(p1 == p2);
  CHECK(std::abs(p1 - r.p) < 0.02);
}

TEST_CASE("rank sum test matches reference implementation") {
  SUBCASE("untied samples") {
    const MannWhitneyResult r = mann_whitney_u(kSampleA, kSampleB);
    CHECK(r.u == 29.0);
    CHECK(r.z == doctest::Approx(2.4647515087732477).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.013710830078133231).epsilon(1e-10));
  }
  SUBCASE("tied samples") {
    const MannWhitneyResult r =
        mann_whitney_u({1.0, 2.0, 2.0, 3.0}, {2.0, 3.0, 3.0, 4.0});
    CHECK(r.u == 3.0);
    CHECK(r.z == doctest::Approx(-1.365698202000489).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.17203370892182296).epsilon(1e-10));
  }
  SUBCASE("every value tied") {
    const MannWhitneyResult r = mann_whitney_u({5.0, 5.0}, {5.0, 5.0, 5.0});
    CHECK(r.u == 3.0);
    CHECK(r.z == 0.0);
    CHECK(r.p == 1.0);
  }
}

TEST_CASE("rank based u equals the pair counting definition") {
  CHECK(mann_whitney_u(kSampleA, kSampleB).u ==
        ref::pair_count_u(kSampleA, kSampleB));

  Rng rng(424242);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> a, b;
    const int na = static_cast<int>(rng.uniform_int(3, 12));
    const int nb = static_cast<int>(rng.uniform_int(3, 12));
    for (int i = 0; i < na; ++i)
      a.push_back(static_cast<double>(rng.uniform_int(0, 5)));
    for (int i = 0; i < nb; ++i)
      b.push_back(static_cast<double>(rng.uniform_int(0, 5)));
    const double ua = mann_whitney_u(a, b).u;
    CHECK(ua == doctest::Approx(ref::pair_count_u(a, b)).epsilon(1e-12));
    // The two one-sided statistics partition the pair count.
    CHECK(ref::pair_count_u(a, b) + ref::pair_count_u(b, a) ==
          doctest::Approx(static_cast<double>(na * nb)));
  }
}

TEST_CASE("pooled proportion test matches reference implementation") {
  const TwoProportionResult r = two_proportion_z(45, 120, 30, 150);
  CHECK(r.z == doctest::Approx(3.1901290063135495).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.0014220929725245897).epsilon(1e-10));

  const TwoProportionResult eq = two_proportion_z(20, 40, 30, 60);
  CHECK(eq.z == 0.0);
  CHECK(eq.p == 1.0);

  const TwoProportionResult none = two_proportion_z(0, 5, 0, 7);
  CHECK(none.z == 0.0);
  CHECK(none.p == 1.0);
}

TEST_CASE("comparison table aggregates matches before testing") {
  const ComparisonFixture fx;
  const auto rows = comparison_table(fx.a, fx.b, 0.05);
  REQUIRE(rows.size() == static_cast<std::size_t>(kFeatureCount));
  for (int i = 0; i < kFeatureCount; ++i) {
    CHECK(rows[static_cast<std::size_t>(i)].feature == kFeatureNames[i]);
  }

  SUBCASE("summed count feature separates the populations") {
    const ComparisonRow& r = row_named(rows, "n_passes");
    CHECK(r.n_a == 4);
    CHECK(r.n_b == 4);
    CHECK(r.mean_a == 537.5);
    CHECK(r.mean_b == 437.5);
    CHECK(r.std_a == doctest::Approx(32.274861218395145).epsilon(1e-13));
    CHECK(r.t == doctest::Approx(4.3817804600413295).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.004659214943993928).epsilon(1e-10));
    CHECK(r.effect == doctest::Approx(3.098386676965933).epsilon(1e-12));
    CHECK(r.direction == 1);
    CHECK(r.significant);
  }

  SUBCASE("pass accuracy is pooled per match") {
    const ComparisonRow& r = row_named(rows, "pass_accuracy");
    CHECK(r.mean_a == doctest::Approx(0.76).epsilon(1e-14));
    CHECK(r.mean_b == doctest::Approx(0.84).epsilon(1e-14));
    CHECK(r.std_a == 0.0);
    CHECK(r.p == 0.0);
    CHECK(r.direction == -1);
    CHECK(r.significant);
  }

  SUBCASE("averaged feature skips teams that lack it") {
    const ComparisonRow& r = row_named(rows, "pass_velocity");
    CHECK(r.n_a == 4);
    CHECK(r.n_b == 4);
    CHECK(r.mean_a == 3.0);
    CHECK(r.mean_b == 3.0);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
    CHECK(r.direction == 0);
    CHECK_FALSE(r.significant);
  }

  SUBCASE("identical constant counts are not flagged") {
    const ComparisonRow& r = row_named(rows, "n_shots");
    CHECK(r.mean_a == 20.0);
    CHECK(r.mean_b == 20.0);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
    CHECK(r.direction == 0);
    CHECK_FALSE(r.significant);
  }

  SUBCASE("feature absent everywhere stays untested") {
    const ComparisonRow& r = row_named(rows, "network_h");
    CHECK(r.n_a == 0);
    CHECK(r.n_b == 0);
    CHECK(r.p == 1.0);
    CHECK_FALSE(r.significant);
  }
}

TEST_CASE("comparison export is a readable csv") {
  const ComparisonFixture fx;
  const auto rows = comparison_table(fx.a, fx.b, 0.05);
  testutil::TempDir dir("stats");
  const std::string path = dir.file("comparison.csv");
  export_comparison(rows, path, "cafe0123");

  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 2 + rows.size());
  CHECK(lines[0] == "# config_hash=cafe0123");
  CHECK(lines[1] ==
        "feature,n_a,n_b,mean_a,std_a,mean_b,std_b,t,df,p,effect,direction,"
        "significant");
  for (const auto& line : lines) {
    if (line.rfind("n_passes,", 0) == 0) {
      CHECK(line.substr(0, 19) == "n_passes,4,4,537.5,");
      CHECK(line.substr(line.size() - 4) == ",1,1");
    }
    if (line.rfind("pass_accuracy,", 0) == 0) {
      CHECK(line.substr(line.size() - 5) == ",-1,1");
    }
    if (line.rfind("pass_velocity,", 0) == 0) {
      CHECK(line.substr(line.size() - 4) == ",0,0");
    }
  }
}
