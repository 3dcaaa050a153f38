#include "pitchlab/learn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "pitchlab/io.hpp"

namespace pitchlab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(t)) without overflow.
double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double weighted_gini(double w, double wy) {
  if (w <= 0.0) return 0.0;
  const double p = wy / w;
  return 2.0 * p * (1.0 - p) * w;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

// Best Gini split over the given features; exact ties keep the earliest
// candidate, which scans lower features and lower thresholds first.
SplitChoice best_split(const std::vector<FeatureRow>& x,
                       const std::vector<int>& y,
                       const std::vector<double>& w,
                       const std::vector<std::size_t>& idx,
                       const std::vector<int>& features, int min_leaf) {
  SplitChoice best;
  std::vector<std::pair<double, std::size_t>> order(idx.size());
  for (int f : features) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      order[i] = {x[idx[i]][static_cast<std::size_t>(f)], idx[i]};
    }
    std::sort(order.begin(), order.end());

    double wl = 0.0, wyl = 0.0;
    double wr = 0.0, wyr = 0.0;
    for (const auto& [v, row] : order) {
      (void)v;
      wr += w[row];
      wyr += w[row] * y[row];
    }
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const auto row = order[i].second;
      wl += w[row];
      wyl += w[row] * y[row];
      wr -= w[row];
      wyr -= w[row] * y[row];
      if (order[i].first == order[i + 1].first) continue;
      const auto left_rows = static_cast<int>(i + 1);
      const auto right_rows = static_cast<int>(order.size() - i - 1);
      if (left_rows < min_leaf || right_rows < min_leaf) continue;
      const double impurity = weighted_gini(wl, wyl) + weighted_gini(wr, wyr);
      if (impurity < best.impurity) {
        best.feature = f;
        best.threshold = 0.5 * (order[i].first + order[i + 1].first);
        best.impurity = impurity;
      }
    }
  }
  return best;
}

TreeModel fit_tree_impl(const std::vector<FeatureRow>& x,
                        const std::vector<int>& y,
                        const std::vector<double>& w, int max_depth,
                        int min_leaf, int mtry, Rng* rng) {
  if (x.size() != y.size() || x.size() != w.size() || x.empty()) {
    throw ValidationError("tree fit needs matching, non-empty inputs");
  }
  if (min_leaf < 1) throw ValidationError("min_leaf must be at least 1");

  TreeModel model;
  std::vector<int> all_features(kFeatureCount);
  std::iota(all_features.begin(), all_features.end(), 0);

  struct Job {
    std::vector<std::size_t> rows;
    int depth;
    int node;
  };
  std::vector<std::size_t> root_rows(x.size());
  std::iota(root_rows.begin(), root_rows.end(), 0);
  model.nodes.emplace_back();
  std::vector<Job> stack{{std::move(root_rows), 0, 0}};

  while (!stack.empty()) {
    Job job = std::move(stack.back());
    stack.pop_back();

    double wt = 0.0, wy = 0.0;
    for (auto r : job.rows) {
      wt += w[r];
      wy += w[r] * y[r];
    }
    TreeNode& node = model.nodes[static_cast<std::size_t>(job.node)];
    node.prob = wt > 0.0 ? wy / wt : 0.5;

    const double parent_impurity = weighted_gini(wt, wy);
    const bool depth_ok = max_depth < 0 || job.depth < max_depth;
    if (!depth_ok || parent_impurity <= 0.0 ||
        job.rows.size() < 2 * static_cast<std::size_t>(min_leaf)) {
      continue;
    }

    std::vector<int> features = all_features;
    if (rng && mtry < kFeatureCount) {
      rng->shuffle(features);
      features.resize(static_cast<std::size_t>(mtry));
      std::sort(features.begin(), features.end());
    }

    const SplitChoice split = best_split(x, y, w, job.rows, features, min_leaf);
    if (split.feature < 0 ||
        split.impurity >= parent_impurity - 1e-12 * (1.0 + parent_impurity)) {
      continue;
    }

    std::vector<std::size_t> left, right;
    for (auto r : job.rows) {
      (x[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left
                                                                        : right)
          .push_back(r);
    }
    TreeNode& parent = model.nodes[static_cast<std::size_t>(job.node)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = static_cast<int>(model.nodes.size());
    parent.right = parent.left + 1;
    model.nodes.emplace_back();
    model.nodes.emplace_back();
    const int left_id = parent.left;
    const int right_id = parent.right;
    stack.push_back({std::move(right), job.depth + 1, right_id});
    stack.push_back({std::move(left), job.depth + 1, left_id});
  }
  return model;
}

int grid_index(const std::vector<ModelConfig>&, const ModelConfig&);

nlohmann::json tree_to_json(const TreeModel& m) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : m.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.prob});
  }
  return nodes;
}

TreeModel tree_from_json(const nlohmann::json& j) {
  TreeModel m;
  for (const auto& n : j) {
    m.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                       n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  if (m.nodes.empty()) throw ParseError("tree has no nodes");
  return m;
}

template <typename T>
nlohmann::json row_to_json(const T& row) {
  nlohmann::json out = nlohmann::json::array();
  for (double v : row) out.push_back(v);
  return out;
}

FeatureRow row_from_json(const nlohmann::json& j) {
  if (j.size() != kFeatureCount) throw ParseError("bad feature row length");
  FeatureRow row{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) row[i] = j.at(i).get<double>();
  return row;
}

}  // namespace

Dataset make_dataset(const std::vector<TeamMatchFeatures>& rows) {
  Dataset d;
  d.x.reserve(rows.size());
  for (const auto& r : rows) {
    FeatureRow row;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      row[j] = r.values[j] ? *r.values[j] : kNan;
    }
    d.x.push_back(row);
    d.y.push_back(r.gender == Gender::Male ? 1 : 0);
    d.group.push_back(r.team_id);
    d.match.push_back(r.match_id);
  }
  return d;
}

Imputer Imputer::fit(const std::vector<FeatureRow>& rows) {
  Imputer imp;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (!std::isnan(row[j])) {
        sum += row[j];
        ++n;
      }
    }
    imp.fill[j] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  return imp;
}

FeatureRow Imputer::apply(const FeatureRow& row) const {
  FeatureRow out = row;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (std::isnan(out[j])) out[j] = fill[j];
  }
  return out;
}

std::string ModelConfig::name() const {
  if (kind == "baseline") return "baseline";
  if (kind == "logistic") return "logistic(lambda=" + fmt_num(lambda) + ")";
  if (kind == "tree") {
    return "tree(depth=" + (max_depth < 0 ? "none" : std::to_string(max_depth)) +
           ",leaf=" + std::to_string(min_leaf) + ")";
  }
  if (kind == "forest") return "forest(trees=" + std::to_string(n_trees) + ")";
  if (kind == "adaboost") return "adaboost(rounds=" + std::to_string(rounds) + ")";
  throw ValidationError("unknown model kind: " + kind);
}

const std::array<const char*, 5> kModelKinds = {"baseline", "logistic", "tree",
                                                "forest", "adaboost"};

std::vector<ModelConfig> model_grid(const std::string& kind) {
  std::vector<ModelConfig> grid;
  if (kind == "baseline") {
    grid.push_back({.kind = "baseline"});
  } else if (kind == "logistic") {
    for (double lambda : {10.0, 1.0, 0.1, 0.01}) {
      grid.push_back({.kind = "logistic", .lambda = lambda});
    }
  } else if (kind == "tree") {
    for (int depth : {1, 2, 3, 5, -1}) {
      for (int leaf : {5, 3, 1}) {
        grid.push_back({.kind = "tree", .max_depth = depth, .min_leaf = leaf});
      }
    }
  } else if (kind == "forest") {
    for (int n : {100, 300}) {
      grid.push_back({.kind = "forest", .n_trees = n});
    }
  } else if (kind == "adaboost") {
    for (int t : {25, 50, 100, 200}) {
      grid.push_back({.kind = "adaboost", .rounds = t});
    }
  } else {
    throw ValidationError("unknown model kind: " + kind);
  }
  return grid;
}

TreeModel fit_tree(const std::vector<FeatureRow>& x, const std::vector<int>& y,
                   const std::vector<double>& weights, int max_depth,
                   int min_leaf) {
  return fit_tree_impl(x, y, weights, max_depth, min_leaf, kFeatureCount,
                       nullptr);
}

double predict_tree(const TreeModel& m, const FeatureRow& row) {
  int node = 0;
  while (m.nodes[static_cast<std::size_t>(node)].left >= 0) {
    const TreeNode& n = m.nodes[static_cast<std::size_t>(node)];
    node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                   : n.right;
  }
  return m.nodes[static_cast<std::size_t>(node)].prob;
}

ForestModel fit_forest(const std::vector<FeatureRow>& x,
                       const std::vector<int>& y, int n_trees, int max_depth,
                       int min_leaf, std::uint64_t seed) {
  if (n_trees < 1) throw ValidationError("forest needs at least one tree");
  const std::size_t n = x.size();
  const int mtry = std::max(
      1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(kFeatureCount)))));

  Rng master(seed);
  std::vector<std::uint64_t> tree_seeds(static_cast<std::size_t>(n_trees));
  for (auto& s : tree_seeds) s = master.next();

  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(n_trees));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    Rng rng(tree_seeds[t]);
    std::vector<double> weights(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      weights[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))] += 1.0;
    }
    // Rows the bootstrap skipped stay out of the tree entirely.
    std::vector<FeatureRow> bx;
    std::vector<int> by;
    std::vector<double> bw;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] > 0.0) {
        bx.push_back(x[i]);
        by.push_back(y[i]);
        bw.push_back(weights[i]);
      }
    }
    model.trees[t] = fit_tree_impl(bx, by, bw, max_depth, min_leaf, mtry, &rng);
  }
  return model;
}

double predict_forest(const ForestModel& m, const FeatureRow& row) {
  double sum = 0.0;
  for (const auto& tree : m.trees) sum += predict_tree(tree, row);
  return sum / static_cast<double>(m.trees.size());
}

LogisticModel fit_logistic(const std::vector<FeatureRow>& x,
                           const std::vector<int>& y, double lambda) {
  if (x.size() != y.size() || x.empty()) {
    throw ValidationError("logistic fit needs matching, non-empty inputs");
  }
  if (lambda < 0.0) throw ValidationError("penalty cannot be negative");
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);

  LogisticModel m;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0.0;
    for (const auto& row : x) sum += row[j];
    m.mu[j] = sum / dn;
    double ss = 0.0;
    for (const auto& row : x) ss += (row[j] - m.mu[j]) * (row[j] - m.mu[j]);
    const double sd = std::sqrt(ss / dn);
    m.sigma[j] = sd > 0.0 ? sd : 0.0;
  }

  std::vector<FeatureRow> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      xs[i][j] = m.sigma[j] > 0.0 ? (x[i][j] - m.mu[j]) / m.sigma[j] : 0.0;
    }
  }

  const auto objective = [&](const FeatureRow& w, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < kFeatureCount; ++j) z += w[j] * xs[i][j];
      const double s = y[i] == 1 ? 1.0 : -1.0;
      loss += softplus(-s * z);
    }
    double penalty = 0.0;
    for (double v : w) penalty += v * v;
    return loss / dn + 0.5 * lambda * penalty / dn;
  };

  FeatureRow w{};
  double b = 0.0;
  double step = 1.0;
  double current = objective(w, b);
  for (int iter = 0; iter < 200000; ++iter) {
    FeatureRow gw{};
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < kFeatureCount; ++j) z += w[j] * xs[i][j];
      const double resid = sigmoid(z) - static_cast<double>(y[i]);
      gb += resid;
      for (std::size_t j = 0; j < kFeatureCount; ++j) gw[j] += resid * xs[i][j];
    }
    double norm2 = gb * gb;
    gb /= dn;
    norm2 = gb * gb;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      gw[j] = gw[j] / dn + lambda * w[j] / dn;
      norm2 += gw[j] * gw[j];
    }
    if (norm2 <= 1e-16) break;

    // Backtracking descent step with a gentle growth on acceptance.
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      FeatureRow wn = w;
      for (std::size_t j = 0; j < kFeatureCount; ++j) wn[j] -= step * gw[j];
      const double bn = b - step * gb;
      const double next = objective(wn, bn);
      if (next <= current - 1e-4 * step * norm2) {
        w = wn;
        b = bn;
        current = next;
        step = std::min(step * 1.25, 64.0);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  m.w = w;
  m.bias = b;
  return m;
}

double predict_logistic(const LogisticModel& m, const FeatureRow& row) {
  double z = m.bias;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (m.sigma[j] > 0.0) z += m.w[j] * (row[j] - m.mu[j]) / m.sigma[j];
  }
  return sigmoid(z);
}

AdaModel fit_adaboost(const std::vector<FeatureRow>& x,
                      const std::vector<int>& y, int rounds) {
  if (x.size() != y.size() || x.empty()) {
    throw ValidationError("boosting needs matching, non-empty inputs");
  }
  if (rounds < 1) throw ValidationError("boosting needs at least one round");
  const std::size_t n = x.size();

  AdaModel model;
  double prior = 0.0;
  for (int v : y) prior += v;
  model.fallback_prior = prior / static_cast<double>(n);

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (int t = 0; t < rounds; ++t) {
    TreeModel stump = fit_tree_impl(x, y, w, 1, 1, kFeatureCount, nullptr);
    double eps = 0.0;
    std::vector<int> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = predict_tree(stump, x[i]) >= 0.5 ? 1 : 0;
      if (h[i] != y[i]) eps += w[i];
    }
    if (eps >= 0.5) break;  // no usable weak hypothesis left

    const double eps_c = std::max(eps, 1e-12);
    const double alpha = 0.5 * std::log((1.0 - eps_c) / eps_c);
    model.stumps.push_back({std::move(stump), alpha, eps});
    model.bound *= 2.0 * std::sqrt(eps_c * (1.0 - eps_c));
    if (eps <= 0.0) break;  // the round is already perfect

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = y[i] == 1 ? 1.0 : -1.0;
      const double hs = h[i] == 1 ? 1.0 : -1.0;
      w[i] *= std::exp(-alpha * s * hs);
      total += w[i];
    }
    for (auto& v : w) v /= total;
  }

  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((predict_adaboost(model, x[i]) >= 0.5 ? 1 : 0) != y[i]) ++wrong;
  }
  model.train_error = static_cast<double>(wrong) / static_cast<double>(n);
  return model;
}

double predict_adaboost(const AdaModel& m, const FeatureRow& row) {
  if (m.stumps.empty()) return m.fallback_prior;
  double num = 0.0, denom = 0.0;
  for (const auto& s : m.stumps) {
    const double h = predict_tree(s.tree, row) >= 0.5 ? 1.0 : -1.0;
    num += s.alpha * h;
    denom += s.alpha;
  }
  const double margin = denom > 0.0 ? num / denom : 0.0;
  return 0.5 * (margin + 1.0);
}

BaselineModel fit_baseline(const std::vector<int>& y, std::uint64_t seed) {
  if (y.empty()) throw ValidationError("baseline needs labels");
  double prior = 0.0;
  for (int v : y) prior += v;
  return {prior / static_cast<double>(y.size()), seed};
}

Trained::Trained(ModelConfig config, Imputer imputer, AnyModel model)
    : config_(std::move(config)),
      imputer_(std::move(imputer)),
      model_(std::move(model)) {}

double Trained::proba(const FeatureRow& row) const {
  const FeatureRow r = imputer_.apply(row);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BaselineModel>) {
          return m.prior;
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return predict_logistic(m, r);
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return predict_tree(m, r);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          return predict_forest(m, r);
        } else {
          return predict_adaboost(m, r);
        }
      },
      model_);
}

std::vector<int> Trained::predict_batch(
    const std::vector<FeatureRow>& rows) const {
  std::vector<int> out(rows.size());
  if (const auto* base = std::get_if<BaselineModel>(&model_)) {
    // The baseline guesses: label draws follow the training prior.
    Rng rng(base->draw_seed);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out[i] = rng.uniform() < base->prior ? 1 : 0;
    }
    return out;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict(rows[i]);
  return out;
}

std::vector<double> Trained::proba_batch(
    const std::vector<FeatureRow>& rows) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = proba(rows[i]);
  return out;
}

Trained train_model(const ModelConfig& cfg, const Dataset& d,
                    const std::vector<std::size_t>& train_idx,
                    std::uint64_t seed) {
  if (train_idx.empty()) throw TrainingError("empty training selection");
  std::vector<FeatureRow> raw;
  std::vector<int> y;
  raw.reserve(train_idx.size());
  for (auto i : train_idx) {
    raw.push_back(d.x[i]);
    y.push_back(d.y[i]);
  }
  const Imputer imp = Imputer::fit(raw);
  std::vector<FeatureRow> x(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) x[i] = imp.apply(raw[i]);

  AnyModel model;
  if (cfg.kind == "baseline") {
    model = fit_baseline(y, seed);
  } else if (cfg.kind == "logistic") {
    model = fit_logistic(x, y, cfg.lambda);
  } else if (cfg.kind == "tree") {
    model = fit_tree(x, y, std::vector<double>(x.size(), 1.0), cfg.max_depth,
                     cfg.min_leaf);
  } else if (cfg.kind == "forest") {
    model = fit_forest(x, y, cfg.n_trees, cfg.max_depth, cfg.min_leaf, seed);
  } else if (cfg.kind == "adaboost") {
    model = fit_adaboost(x, y, cfg.rounds);
  } else {
    throw ValidationError("unknown model kind: " + cfg.kind);
  }
  return Trained(cfg, imp, std::move(model));
}

Metrics compute_metrics(const std::vector<int>& y_true,
                        const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw ValidationError("metrics need matching, non-empty labels");
  }
  Metrics m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) {
      (y_pred[i] == 1 ? m.tp : m.fn) += 1;
    } else {
      (y_pred[i] == 1 ? m.fp : m.tn) += 1;
    }
  }
  const double n = static_cast<double>(y_true.size());
  m.accuracy = (m.tp + m.tn) / n;
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

std::vector<RocPoint> roc_curve(const std::vector<int>& y_true,
                                const std::vector<double>& scores) {
  if (y_true.size() != scores.size() || y_true.empty()) {
    throw ValidationError("roc needs matching, non-empty inputs");
  }
  double pos = 0.0, neg = 0.0;
  for (int v : y_true) (v == 1 ? pos : neg) += 1.0;

  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<RocPoint> out;
  out.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (y_true[order[i]] == 1 ? tp : fp) += 1.0;
      ++i;
    }
    out.push_back({neg > 0.0 ? fp / neg : 0.0, pos > 0.0 ? tp / pos : 0.0, s});
  }
  return out;
}

double roc_auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * 0.5 *
            (points[i].tpr + points[i - 1].tpr);
  }
  return area;
}

namespace {

struct GroupInfo {
  std::int64_t id = 0;
  std::vector<std::size_t> rows;
  int label = 0;  // majority label of the group's rows
};

std::vector<GroupInfo> collect_groups(const Dataset& d,
                                      const std::vector<std::size_t>& rows) {
  std::map<std::int64_t, GroupInfo> by_id;
  for (auto i : rows) {
    GroupInfo& g = by_id[d.group[i]];
    g.id = d.group[i];
    g.rows.push_back(i);
    g.label += d.y[i] == 1 ? 1 : -1;
  }
  std::vector<GroupInfo> out;
  for (auto& [id, g] : by_id) {
    (void)id;
    g.label = g.label >= 0 ? 1 : 0;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

SplitResult grouped_stratified_split(const Dataset& d, double test_fraction,
                                     std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ValidationError("test fraction must lie strictly inside (0, 1)");
  }
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), 0);
  auto groups = collect_groups(d, all);

  Rng rng(seed);
  SplitResult res;
  for (int label : {0, 1}) {
    std::vector<std::size_t> of_label;
    std::size_t label_rows = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].label == label) {
        of_label.push_back(g);
        label_rows += groups[g].rows.size();
      }
    }
    if (of_label.empty()) continue;
    Rng sub = rng.fork(static_cast<std::uint64_t>(label));
    sub.shuffle(of_label);

    const auto target = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(label_rows)));
    std::size_t taken_rows = 0;
    std::vector<std::size_t> test_groups;
    for (auto g : of_label) {
      if (taken_rows >= target) break;
      if (of_label.size() > 1 && test_groups.size() + 1 == of_label.size()) {
        break;  // keep at least one group of the label in training
      }
      test_groups.push_back(g);
      taken_rows += groups[g].rows.size();
    }
    if (test_groups.empty() && of_label.size() > 1) {
      test_groups.push_back(of_label.front());
    }
    std::set<std::size_t> in_test(test_groups.begin(), test_groups.end());
    for (auto g : of_label) {
      auto& side = in_test.count(g) ? res.test_idx : res.train_idx;
      side.insert(side.end(), groups[g].rows.begin(), groups[g].rows.end());
    }
  }
  std::sort(res.train_idx.begin(), res.train_idx.end());
  std::sort(res.test_idx.begin(), res.test_idx.end());
  return res;
}

CvResult grid_search_cv(const std::string& kind, const Dataset& d,
                        const std::vector<std::size_t>& rows, int folds,
                        std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross validation needs at least 2 folds");
  const auto grid = model_grid(kind);
  auto groups = collect_groups(d, rows);

  // Round-robin fold deal per label keeps folds grouped and stratified.
  Rng rng(seed);
  std::vector<int> fold_of_group(groups.size(), 0);
  for (int label : {0, 1}) {
    std::vector<std::size_t> of_label;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].label == label) of_label.push_back(g);
    }
    Rng sub = rng.fork(17 + static_cast<std::uint64_t>(label));
    sub.shuffle(of_label);
    for (std::size_t i = 0; i < of_label.size(); ++i) {
      fold_of_group[of_label[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }

  std::vector<std::uint64_t> fold_seeds(static_cast<std::size_t>(folds));
  for (auto& s : fold_seeds) s = rng.next();

  CvResult res;
  bool have_best = false;
  for (const auto& cfg : grid) {
    GridEntry entry;
    entry.config = cfg;
    double sum = 0.0;
    int used = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> train, test;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& side = fold_of_group[g] == f ? test : train;
        side.insert(side.end(), groups[g].rows.begin(), groups[g].rows.end());
      }
      if (test.empty() || train.empty()) continue;
      bool has0 = false, has1 = false;
      for (auto i : train) (d.y[i] == 1 ? has1 : has0) = true;
      if (!has0 || !has1) continue;
      std::sort(train.begin(), train.end());
      std::sort(test.begin(), test.end());

      const Trained model =
          train_model(cfg, d, train, fold_seeds[static_cast<std::size_t>(f)]);
      std::vector<FeatureRow> test_rows;
      std::vector<int> test_y;
      for (auto i : test) {
        test_rows.push_back(d.x[i]);
        test_y.push_back(d.y[i]);
      }
      const double f1 =
          compute_metrics(test_y, model.predict_batch(test_rows)).f1;
      entry.fold_f1.push_back(f1);
      sum += f1;
      ++used;
    }
    entry.mean_f1 = used > 0 ? sum / used : 0.0;
    res.table.push_back(entry);
    if (!have_best || entry.mean_f1 > res.best_mean_f1) {
      res.best = cfg;
      res.best_mean_f1 = entry.mean_f1;
      have_best = true;
    }
  }
  return res;
}

LotoResult leave_one_team_out(const ModelConfig& cfg, const Dataset& d,
                              std::uint64_t seed) {
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), 0);
  const auto groups = collect_groups(d, all);

  Rng rng(seed);
  std::vector<std::uint64_t> fold_seeds(groups.size());
  for (auto& s : fold_seeds) s = rng.next();

  LotoResult res;
  res.max_bound = cfg.kind == "adaboost" ? 0.0 : 1.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<std::size_t> train;
    for (std::size_t h = 0; h < groups.size(); ++h) {
      if (h != g)
        train.insert(train.end(), groups[h].rows.begin(), groups[h].rows.end());
    }
    std::sort(train.begin(), train.end());
    const Trained model = train_model(cfg, d, train, fold_seeds[g]);

    if (const auto* ada = std::get_if<AdaModel>(&model.model())) {
      res.max_bound = std::max(res.max_bound, ada->bound);
      if (ada->train_error > ada->bound + 1e-12) res.bound_holds = false;
    }

    std::vector<FeatureRow> rows;
    std::vector<int> truth;
    for (auto i : groups[g].rows) {
      rows.push_back(d.x[i]);
      truth.push_back(d.y[i]);
    }
    const auto pred = model.predict_batch(rows);
    const auto score = model.proba_batch(rows);

    LotoTeamOutcome outcome;
    outcome.team = groups[g].id;
    outcome.rows = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (pred[i] == truth[i]) ++outcome.correct;
      res.y_true.push_back(truth[i]);
      res.y_pred.push_back(pred[i]);
      res.scores.push_back(score[i]);
    }
    res.teams.push_back(outcome);
  }
  res.pooled = compute_metrics(res.y_true, res.y_pred);
  return res;
}

PairedEval paired_match_eval(const ModelConfig& a, const ModelConfig& b,
                             const Dataset& d, int repeats,
                             double test_fraction, std::uint64_t seed) {
  if (repeats < 1) throw ValidationError("paired evaluation needs repeats");
  Rng rng(seed);
  PairedEval res;
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t split_seed = rng.next();
    const std::uint64_t seed_a = rng.next();
    const std::uint64_t seed_b = rng.next();
    const SplitResult split = grouped_stratified_split(d, test_fraction, split_seed);

    std::vector<FeatureRow> rows;
    std::vector<int> truth;
    for (auto i : split.test_idx) {
      rows.push_back(d.x[i]);
      truth.push_back(d.y[i]);
    }
    const Trained ma = train_model(a, d, split.train_idx, seed_a);
    const Trained mb = train_model(b, d, split.train_idx, seed_b);
    const double fa = compute_metrics(truth, ma.predict_batch(rows)).f1;
    const double fb = compute_metrics(truth, mb.predict_batch(rows)).f1;
    res.f1_a.push_back(fa);
    res.f1_b.push_back(fb);
    if (std::abs(fa - fb) <= 1e-12) {
      ++res.draws;
    } else if (fa > fb) {
      ++res.wins_a;
    } else {
      ++res.wins_b;
    }
  }
  res.mean_f1_a = mean_of(res.f1_a);
  res.mean_f1_b = mean_of(res.f1_b);
  res.std_f1_a = sample_std(res.f1_a);
  res.std_f1_b = sample_std(res.f1_b);
  return res;
}

std::string Trained::to_json_text() const {
  nlohmann::json j;
  j["kind"] = config_.kind;
  j["config"] = {{"max_depth", config_.max_depth},
                 {"min_leaf", config_.min_leaf},
                 {"n_trees", config_.n_trees},
                 {"lambda", config_.lambda},
                 {"rounds", config_.rounds}};
  j["imputer"] = row_to_json(imputer_.fill);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BaselineModel>) {
          j["model"] = {{"prior", m.prior}, {"draw_seed", m.draw_seed}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          j["model"] = {{"w", row_to_json(m.w)},
                        {"bias", m.bias},
                        {"mu", row_to_json(m.mu)},
                        {"sigma", row_to_json(m.sigma)}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          j["model"] = {{"nodes", tree_to_json(m)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
          j["model"] = {{"trees", std::move(trees)}};
        } else {
          nlohmann::json stumps = nlohmann::json::array();
          for (const auto& s : m.stumps) {
            stumps.push_back({{"tree", tree_to_json(s.tree)},
                              {"alpha", s.alpha},
                              {"epsilon", s.epsilon}});
          }
          j["model"] = {{"stumps", std::move(stumps)},
                        {"fallback_prior", m.fallback_prior},
                        {"bound", m.bound},
                        {"train_error", m.train_error}};
        }
      },
      model_);
  return j.dump(2) + "\n";
}

Trained Trained::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is not valid: ") + e.what());
  }
  try {
    ModelConfig cfg;
    cfg.kind = j.at("kind").get<std::string>();
    const auto& c = j.at("config");
    cfg.max_depth = c.at("max_depth").get<int>();
    cfg.min_leaf = c.at("min_leaf").get<int>();
    cfg.n_trees = c.at("n_trees").get<int>();
    cfg.lambda = c.at("lambda").get<double>();
    cfg.rounds = c.at("rounds").get<int>();

    Imputer imp;
    imp.fill = row_from_json(j.at("imputer"));

    const auto& jm = j.at("model");
    AnyModel model;
    if (cfg.kind == "baseline") {
      model = BaselineModel{jm.at("prior").get<double>(),
                            jm.at("draw_seed").get<std::uint64_t>()};
    } else if (cfg.kind == "logistic") {
      LogisticModel m;
      m.w = row_from_json(jm.at("w"));
      m.bias = jm.at("bias").get<double>();
      m.mu = row_from_json(jm.at("mu"));
      m.sigma = row_from_json(jm.at("sigma"));
      model = std::move(m);
    } else if (cfg.kind == "tree") {
      model = tree_from_json(jm.at("nodes"));
    } else if (cfg.kind == "forest") {
      ForestModel m;
      for (const auto& t : jm.at("trees")) m.trees.push_back(tree_from_json(t));
      if (m.trees.empty()) throw ParseError("forest has no trees");
      model = std::move(m);
    } else if (cfg.kind == "adaboost") {
      AdaModel m;
      for (const auto& s : jm.at("stumps")) {
        m.stumps.push_back({tree_from_json(s.at("tree")),
                            s.at("alpha").get<double>(),
                            s.at("epsilon").get<double>()});
      }
      m.fallback_prior = jm.at("fallback_prior").get<double>();
      m.bound = jm.at("bound").get<double>();
      m.train_error = jm.at("train_error").get<double>();
      model = std::move(m);
    } else {
      throw ParseError("unknown model kind: " + cfg.kind);
    }
    return Trained(std::move(cfg), imp, std::move(model));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is not valid: ") + e.what());
  }
}

void export_grid(const std::vector<GridEntry>& table, const std::string& path,
                 const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"model", "mean_f1", "fold_f1"});
  for (const auto& e : table) {
    std::string folds;
    for (std::size_t i = 0; i < e.fold_f1.size(); ++i) {
      if (i) folds += ';';
      folds += fmt_num(e.fold_f1[i]);
    }
    csv.row({e.config.name(), fmt_num(e.mean_f1), folds});
  }
}

void export_loto(const LotoResult& r, const std::string& path,
                 const std::string& config_hash) {
  CsvWriter csv(path, config_hash,
                {"team", "rows", "correct", "accuracy", "precision", "recall",
                 "f1", "max_bound", "bound_holds"});
  csv.row({"all", std::to_string(r.y_true.size()),
           std::to_string(static_cast<long long>(
               std::llround(r.pooled.accuracy *
                            static_cast<double>(r.y_true.size())))),
           fmt_num(r.pooled.accuracy), fmt_num(r.pooled.precision),
           fmt_num(r.pooled.recall), fmt_num(r.pooled.f1),
           fmt_num(r.max_bound), r.bound_holds ? "1" : "0"});
  for (const auto& t : r.teams) {
    csv.row({std::to_string(t.team), std::to_string(t.rows),
             std::to_string(t.correct),
             fmt_num(t.rows > 0 ? static_cast<double>(t.correct) /
                                      static_cast<double>(t.rows)
                                : 0.0),
             "", "", "", "", ""});
  }
}

void export_roc(const std::vector<RocPoint>& points, const std::string& path,
                const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"fpr", "tpr", "threshold"});
  for (const auto& p : points) {
    csv.row({fmt_num(p.fpr), fmt_num(p.tpr), fmt_num(p.threshold)});
  }
}

void export_paired(const PairedEval& r, const std::string& name_a,
                   const std::string& name_b, const std::string& path,
                   const std::string& config_hash) {
  CsvWriter csv(path, config_hash,
                {"model", "mean_f1", "std_f1", "wins", "draws"});
  csv.row({name_a, fmt_num(r.mean_f1_a), fmt_num(r.std_f1_a),
           std::to_string(r.wins_a), std::to_string(r.draws)});
  csv.row({name_b, fmt_num(r.mean_f1_b), fmt_num(r.std_f1_b),
           std::to_string(r.wins_b), std::to_string(r.draws)});
}

}  // namespace pitchlab
