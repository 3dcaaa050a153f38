#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pitchlab/features.hpp"

namespace pitchlab {

double normal_cdf(double z);

// CDF of Student's t via the regularized incomplete beta function,
// evaluated with a continued fraction to full double precision.
double students_t_cdf(double t, double df);

struct WelchResult {
  std::size_t n_a = 0, n_b = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double var_a = 0.0, var_b = 0.0;  // sample variances
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Unequal-variance t test; requires two values per side.
WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b);

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of the first sample
  double z = 0.0;  // normal approximation, tie and continuity corrected
  double p = 1.0;  // two-sided; 1 when every value is tied
};

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b);

struct TwoProportionResult {
  double z = 0.0;
  double p = 1.0;
};

// Pooled two-sample test of proportions.
TwoProportionResult two_proportion_z(int success_a, int total_a, int success_b,
                                     int total_b);

struct ComparisonRow {
  std::string feature;
  std::size_t n_a = 0, n_b = 0;
  double mean_a = 0.0, std_a = 0.0;  // sample std
  double mean_b = 0.0, std_b = 0.0;
  double t = 0.0, df = 0.0, p = 1.0;
  double effect = 0.0;  // pooled-variance standardized mean difference
  int direction = 0;    // sign of mean_a - mean_b
  bool significant = false;
};

// Match-level comparison of two populations of team-match rows, one row
// per feature. Counts are summed over a match's teams, pass accuracy is
// pooled (accurate sums over pass sums), every other feature is averaged
// over the teams that define it; matches defining nothing contribute no
// sample. Sides with fewer than two samples yield p = 1.
std::vector<ComparisonRow> comparison_table(
    const std::vector<TeamMatchFeatures>& rows_a,
    const std::vector<TeamMatchFeatures>& rows_b, double significance);

void export_comparison(const std::vector<ComparisonRow>& rows,
                       const std::string& path, const std::string& config_hash);

}  // namespace pitchlab
