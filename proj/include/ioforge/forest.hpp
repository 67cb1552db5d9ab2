#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ioforge {

using Rows = std::vector<std::vector<double>>;  // row-major feature matrix

struct ForestParams {
    int n_trees = 100;
    int max_features = -1;     // <= 0 means ceil(sqrt(F))
    int min_samples_leaf = 1;
    int max_depth = -1;        // < 0 means unlimited
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::int64_t n_samples = 0;
    std::int64_t n_pos = 0;  // leaf class counts (kept on internal nodes too)
    double impurity = 0.0;   // Gini at this node (training sample)
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct Forest {
    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    std::uint64_t schema_fingerprint = 0;
    ForestParams params;
    bool extra_trees = false;  // random-threshold variant (used by selection)
};

// Order-sensitive FNV-1a fingerprint of the feature-name list.
std::uint64_t schema_fingerprint(const std::vector<std::string>& names);

// Random forest: per-tree seeded bootstrap, best-of-max_features Gini split
// with an exhaustive threshold scan (sorted midpoints), ties broken by
// feature index then threshold. Throws on empty X, non-binary or
// single-class y, or NaN entries.
Forest train(const Rows& X, const std::vector<int>& y,
             const std::vector<std::string>& feature_names, const ForestParams& params);

// Extremely-randomized trees: no bootstrap, one uniform-random threshold per
// candidate feature. Used for importance-based feature selection.
Forest train_extra_trees(const Rows& X, const std::vector<int>& y,
                         const std::vector<std::string>& feature_names,
                         const ForestParams& params);

// Mean over trees of the leaf positive-class fraction.
double predict_proba(const Forest& forest, const std::vector<double>& x);
std::vector<double> predict_proba(const Forest& forest, const Rows& X);

// Throws unless `names` matches the forest's training schema fingerprint.
void verify_schema(const Forest& forest, const std::vector<std::string>& names);

// Mean decrease in Gini impurity, normalized to sum 1.
std::map<std::string, double> feature_importance(const Forest& forest);

void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

// ---- evaluation harness ----------------------------------------------------

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

struct RoundResult {
    std::vector<PRPoint> curve;  // one point per distinct score threshold, descending
    double auprc = 0.0;
    double eer = 0.0;
    double eer_threshold = 0.0;
    double op_precision = 0.0;  // at the operating threshold
    double op_recall = 0.0;
    std::vector<std::pair<double, int>> scored;  // test-fold (score, label) pairs
    std::vector<std::size_t> test_indices;       // rows of X behind `scored`
};

struct EvalReport {
    std::vector<RoundResult> rounds;
    double operating_threshold = 0.6;
    double mean_auprc = 0.0, sd_auprc = 0.0;
    double mean_eer = 0.0, sd_eer = 0.0;
    double mean_op_precision = 0.0, sd_op_precision = 0.0;
    double mean_op_recall = 0.0, sd_op_recall = 0.0;
};

// Average precision by the summation definition: sum over descending distinct
// score thresholds of (R_k - R_{k-1}) * P_k.
double average_precision(const std::vector<std::pair<double, int>>& scored);

// Equal-error-rate point: threshold (over distinct scores, classify positive
// iff score >= t) minimizing |(1-TPR) - FPR|; reports ((1-TPR)+FPR)/2 there.
std::pair<double, double> equal_error_rate(const std::vector<std::pair<double, int>>& scored);

enum class CvMode { all, omit_heuristic_positives };

struct CvOptions {
    int rounds = 20;
    double test_fraction = 0.10;  // 90:10 split
    CvMode mode = CvMode::all;
    std::vector<char> heuristic_mask;  // per-row flag, used by omit mode
    double operating_threshold = 0.6;
    std::uint64_t seed = 0;
};

// Seeded stratified shuffle-split cross-validation; omit mode drops
// heuristic-masked positives from the test fold only.
EvalReport cross_validate(const Rows& X, const std::vector<int>& y,
                          const ForestParams& params, const CvOptions& opts);

// CSV of per-round curves (round,threshold,precision,recall,tpr,fpr) and a
// JSON summary of the aggregate statistics.
void write_eval_report_csv(const EvalReport& report, const std::string& path);
void write_eval_summary_json(const EvalReport& report, const std::string& path);

}  // namespace ioforge
