#include "pitchlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "pitchlab/io.hpp"

namespace pitchlab {

namespace {

// Continued fraction for the regularized incomplete beta function,
// evaluated with the modified Lentz scheme (Numerical Recipes form).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

double sample_statistics(const std::vector<double>& xs, double* variance) {
  const double m =
      std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  *variance = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return m;
}

// Per-match aggregated samples for one feature, keyed and ordered by match.
std::vector<double> match_samples(const std::vector<TeamMatchFeatures>& rows,
                                  int feature) {
  std::map<std::int64_t, std::vector<const TeamMatchFeatures*>> by_match;
  for (const auto& r : rows) by_match[r.match_id].push_back(&r);

  std::vector<double> samples;
  for (const auto& [match_id, team_rows] : by_match) {
    (void)match_id;
    if (feature == kFeatPassAccuracy) {
      double passes = 0.0, accurate = 0.0;
      bool any = false;
      for (const auto* r : team_rows) {
        const auto& p = r->values[kFeatPasses];
        const auto& a = r->values[kFeatAccuratePasses];
        if (p && a) {
          passes += *p;
          accurate += *a;
          any = true;
        }
      }
      if (any && passes > 0.0) samples.push_back(accurate / passes);
    } else if (feature <= kFeatAccuratePasses) {
      double sum = 0.0;
      bool any = false;
      for (const auto* r : team_rows) {
        if (const auto& v = r->values[static_cast<std::size_t>(feature)]) {
          sum += *v;
          any = true;
        }
      }
      if (any) samples.push_back(sum);
    } else {
      double sum = 0.0;
      int n = 0;
      for (const auto* r : team_rows) {
        if (const auto& v = r->values[static_cast<std::size_t>(feature)]) {
          sum += *v;
          ++n;
        }
      }
      if (n > 0) samples.push_back(sum / n);
    }
  }
  return samples;
}

}  // namespace

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double students_t_cdf(double t, double df) {
  if (df <= 0.0) throw ValidationError("degrees of freedom must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("welch test needs at least two values per sample");
  }
  WelchResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.mean_a = sample_statistics(a, &r.var_a);
  r.mean_b = sample_statistics(b, &r.var_b);
  const double na = static_cast<double>(r.n_a);
  const double nb = static_cast<double>(r.n_b);
  const double qa = r.var_a / na;
  const double qb = r.var_b / nb;
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (r.mean_a == r.mean_b) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = r.mean_a > r.mean_b ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  r.p = 2.0 * (1.0 - students_t_cdf(std::abs(r.t), r.df));
  return r;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw ValidationError("rank sum test needs non-empty samples");
  }
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;

  std::vector<std::pair<double, bool>> pooled;  // value, belongs to a
  pooled.reserve(n);
  for (double x : a) pooled.emplace_back(x, true);
  for (double x : b) pooled.emplace_back(x, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) rank_sum_a += avg_rank;
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  MannWhitneyResult r;
  r.u = rank_sum_a - 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);
  const double dn = static_cast<double>(n);
  const double mu = 0.5 * static_cast<double>(na) * static_cast<double>(nb);
  const double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                     ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (var <= 0.0) {
    r.z = 0.0;
    r.p = 1.0;
    return r;
  }
  const double d = r.u - mu;
  const double continuity = d > 0.0 ? d - 0.5 : (d < 0.0 ? d + 0.5 : 0.0);
  r.z = continuity / std::sqrt(var);
  r.p = 2.0 * (1.0 - normal_cdf(std::abs(r.z)));
  return r;
}

TwoProportionResult two_proportion_z(int success_a, int total_a, int success_b,
                                     int total_b) {
  if (total_a <= 0 || total_b <= 0 || success_a < 0 || success_b < 0 ||
      success_a > total_a || success_b > total_b) {
    throw ValidationError("proportion test needs 0 <= successes <= totals");
  }
  const double na = total_a, nb = total_b;
  const double pa = success_a / na;
  const double pb = success_b / nb;
  const double pooled = (success_a + success_b) / (na + nb);
  const double se2 = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);
  TwoProportionResult r;
  if (se2 <= 0.0) return r;
  r.z = (pa - pb) / std::sqrt(se2);
  r.p = 2.0 * (1.0 - normal_cdf(std::abs(r.z)));
  return r;
}

std::vector<ComparisonRow> comparison_table(
    const std::vector<TeamMatchFeatures>& rows_a,
    const std::vector<TeamMatchFeatures>& rows_b, double significance) {
  std::vector<ComparisonRow> out;
  out.reserve(kFeatureCount);
  for (int f = 0; f < kFeatureCount; ++f) {
    const std::vector<double> sa = match_samples(rows_a, f);
    const std::vector<double> sb = match_samples(rows_b, f);

    ComparisonRow row;
    row.feature = kFeatureNames[static_cast<std::size_t>(f)];
    row.n_a = sa.size();
    row.n_b = sb.size();

    double va = 0.0, vb = 0.0;
    if (!sa.empty()) row.mean_a = sample_statistics(sa, &va);
    if (!sb.empty()) row.mean_b = sample_statistics(sb, &vb);
    row.std_a = std::sqrt(va);
    row.std_b = std::sqrt(vb);

    if (sa.size() >= 2 && sb.size() >= 2) {
      const WelchResult w = welch_t_test(sa, sb);
      row.t = w.t;
      row.df = w.df;
      row.p = w.p;
      const double pooled_var =
          ((static_cast<double>(w.n_a) - 1.0) * w.var_a +
           (static_cast<double>(w.n_b) - 1.0) * w.var_b) /
          (static_cast<double>(w.n_a + w.n_b) - 2.0);
      if (pooled_var > 0.0) {
        row.effect = (w.mean_a - w.mean_b) / std::sqrt(pooled_var);
      }
      row.direction = sign_of(w.mean_a - w.mean_b);
      row.significant = row.p < significance;
    } else if (!sa.empty() && !sb.empty()) {
      row.direction = sign_of(row.mean_a - row.mean_b);
    }
    out.push_back(std::move(row));
  }
  return out;
}

void export_comparison(const std::vector<ComparisonRow>& rows,
                       const std::string& path,
                       const std::string& config_hash) {
  CsvWriter csv(path, config_hash,
                {"feature", "n_a", "n_b", "mean_a", "std_a", "mean_b", "std_b",
                 "t", "df", "p", "effect", "direction", "significant"});
  for (const auto& r : rows) {
    csv.row({r.feature, std::to_string(r.n_a), std::to_string(r.n_b),
             fmt_num(r.mean_a), fmt_num(r.std_a), fmt_num(r.mean_b),
             fmt_num(r.std_b), fmt_num(r.t), fmt_num(r.df), fmt_num(r.p),
             fmt_num(r.effect), std::to_string(r.direction),
             r.significant ? "1" : "0"});
  }
}

}  // namespace pitchlab
