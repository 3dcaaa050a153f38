#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pitchlab/features.hpp"

namespace pitchlab {

using FeatureRow = std::array<double, kFeatureCount>;

// Classification corpus: one row per team-match vector, labeled 1 for the
// men's population and 0 for the women's. Missing features are NaN until
// imputation. Groups (team ids) keep a team on one side of any split.
struct Dataset {
  std::vector<FeatureRow> x;
  std::vector<int> y;
  std::vector<std::int64_t> group;
  std::vector<std::int64_t> match;

  std::size_t size() const { return y.size(); }
};

Dataset make_dataset(const std::vector<TeamMatchFeatures>& rows);

// Train-set column means, substituted for NaN at prediction time.
struct Imputer {
  FeatureRow fill{};

  static Imputer fit(const std::vector<FeatureRow>& rows);
  FeatureRow apply(const FeatureRow& row) const;
};

struct ModelConfig {
  std::string kind;   // baseline | logistic | tree | forest | adaboost
  int max_depth = -1;  // trees; -1 = unbounded
  int min_leaf = 1;
  int n_trees = 100;
  double lambda = 0.1;
  int rounds = 50;

  std::string name() const;
};

// Hyperparameter grid for one model kind, ordered simplest first; ties in
// cross validation resolve toward the earlier entry.
std::vector<ModelConfig> model_grid(const std::string& kind);
extern const std::array<const char*, 5> kModelKinds;

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;  // -1 marks a leaf
  int right = -1;
  double prob = 0.5;  // weighted share of class 1 at the node
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

struct LogisticModel {
  FeatureRow w{};
  double bias = 0.0;
  FeatureRow mu{};     // internal standardization
  FeatureRow sigma{};  // 0 marks a constant column
};

struct AdaStump {
  TreeModel tree;
  double alpha = 0.0;
  double epsilon = 0.0;  // weighted error of the round
};

struct AdaModel {
  std::vector<AdaStump> stumps;
  double fallback_prior = 0.5;  // used when no usable stump exists
  double bound = 1.0;           // product of 2 sqrt(eps (1 - eps))
  double train_error = 0.0;     // 0/1 error on the training rows
};

struct BaselineModel {
  double prior = 0.5;
  std::uint64_t draw_seed = 0;
};

// Greedy binary CART on the Gini criterion. Thresholds sit halfway between
// consecutive distinct values; equal-impurity candidates resolve to the
// lower feature index, then the lower threshold. Splits require positive
// gain and min_leaf weightless rows on both sides.
TreeModel fit_tree(const std::vector<FeatureRow>& x, const std::vector<int>& y,
                   const std::vector<double>& weights, int max_depth,
                   int min_leaf);
double predict_tree(const TreeModel& m, const FeatureRow& row);

// Bootstrapped trees on sqrt(p) feature subsets per split, probabilities
// averaged. Per-tree seeds fork from the given seed.
ForestModel fit_forest(const std::vector<FeatureRow>& x,
                       const std::vector<int>& y, int n_trees, int max_depth,
                       int min_leaf, std::uint64_t seed);
double predict_forest(const ForestModel& m, const FeatureRow& row);

// L2-penalized logistic regression on standardized columns, gradient
// descent with backtracking until the gradient norm drops below 1e-8.
LogisticModel fit_logistic(const std::vector<FeatureRow>& x,
                           const std::vector<int>& y, double lambda);
double predict_logistic(const LogisticModel& m, const FeatureRow& row);

// AdaBoost.M1 over depth-1 trees; stops early on a perfect or unusable
// round. The score maps the normalized margin into [0, 1].
AdaModel fit_adaboost(const std::vector<FeatureRow>& x,
                      const std::vector<int>& y, int rounds);
double predict_adaboost(const AdaModel& m, const FeatureRow& row);

BaselineModel fit_baseline(const std::vector<int>& y, std::uint64_t seed);

using AnyModel = std::variant<BaselineModel, LogisticModel, TreeModel,
                              ForestModel, AdaModel>;

// A fitted model with its imputer: the unit that predicts raw rows.
class Trained {
 public:
  Trained() = default;
  Trained(ModelConfig config, Imputer imputer, AnyModel model);

  double proba(const FeatureRow& row) const;
  int predict(const FeatureRow& row) const { return proba(row) >= 0.5; }
  // Row-order batch prediction; the baseline draws its labels here.
  std::vector<int> predict_batch(const std::vector<FeatureRow>& rows) const;
  std::vector<double> proba_batch(const std::vector<FeatureRow>& rows) const;

  const ModelConfig& config() const { return config_; }
  const Imputer& imputer() const { return imputer_; }
  const AnyModel& model() const { return model_; }

  std::string to_json_text() const;
  static Trained from_json_text(const std::string& text);

 private:
  ModelConfig config_;
  Imputer imputer_;
  AnyModel model_;
};

// Fits the configured model on the selected rows after imputation.
Trained train_model(const ModelConfig& cfg, const Dataset& d,
                    const std::vector<std::size_t>& train_idx,
                    std::uint64_t seed);

struct Metrics {
  int tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

Metrics compute_metrics(const std::vector<int>& y_true,
                        const std::vector<int>& y_pred);

struct RocPoint {
  double fpr = 0.0, tpr = 0.0, threshold = 0.0;
};

// Threshold sweep from high to low; tied scores move in one step.
std::vector<RocPoint> roc_curve(const std::vector<int>& y_true,
                                const std::vector<double>& scores);
double roc_auc(const std::vector<RocPoint>& points);

struct SplitResult {
  std::vector<std::size_t> train_idx, test_idx;
};

// Team-grouped, label-stratified row split: every group lands on one side
// and each label contributes about test_fraction of its rows to the test.
SplitResult grouped_stratified_split(const Dataset& d, double test_fraction,
                                     std::uint64_t seed);

struct GridEntry {
  ModelConfig config;
  double mean_f1 = 0.0;
  std::vector<double> fold_f1;
};

struct CvResult {
  ModelConfig best;
  double best_mean_f1 = 0.0;
  std::vector<GridEntry> table;
};

// Grouped stratified k-fold grid search on the given rows; selection by
// mean F1, exact ties to the earlier (simpler) grid entry.
CvResult grid_search_cv(const std::string& kind, const Dataset& d,
                        const std::vector<std::size_t>& rows, int folds,
                        std::uint64_t seed);

struct LotoTeamOutcome {
  std::int64_t team = 0;
  std::size_t rows = 0;
  std::size_t correct = 0;
};

struct LotoResult {
  Metrics pooled;
  std::vector<LotoTeamOutcome> teams;
  std::vector<int> y_true;      // pooled, in fold-then-row order
  std::vector<int> y_pred;
  std::vector<double> scores;
  // Worst adaboost fold by realized bound; 1.0 for other kinds.
  double max_bound = 0.0;
  bool bound_holds = true;
};

// Leave-one-team-out evaluation: one fold per group, predictions pooled.
LotoResult leave_one_team_out(const ModelConfig& cfg, const Dataset& d,
                              std::uint64_t seed);

struct PairedEval {
  double mean_f1_a = 0.0, std_f1_a = 0.0;
  double mean_f1_b = 0.0, std_f1_b = 0.0;
  int wins_a = 0, wins_b = 0, draws = 0;
  std::vector<double> f1_a, f1_b;
};

// Repeated shared-split comparison of two configurations.
PairedEval paired_match_eval(const ModelConfig& a, const ModelConfig& b,
                             const Dataset& d, int repeats,
                             double test_fraction, std::uint64_t seed);

void export_grid(const std::vector<GridEntry>& table, const std::string& path,
                 const std::string& config_hash);
void export_loto(const LotoResult& r, const std::string& path,
                 const std::string& config_hash);
void export_roc(const std::vector<RocPoint>& points, const std::string& path,
                const std::string& config_hash);
void export_paired(const PairedEval& r, const std::string& name_a,
                   const std::string& name_b, const std::string& path,
                   const std::string& config_hash);

}  // namespace pitchlab
