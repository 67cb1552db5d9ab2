#include "ioforge/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ioforge/rng.hpp"

namespace ioforge {

namespace {

double gini(std::int64_t pos, std::int64_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
}

struct GrowContext {
    const Rows& X;
    const std::vector<int>& y;
    int max_features;
    int min_samples_leaf;
    int max_depth;  // < 0 unlimited
    bool random_threshold;
    std::mt19937_64& eng;
    Tree& tree;
};

// Distinct candidate feature indices, ascending (so the tie rule "first best
// wins in feature order" is well defined).
std::vector<int> sample_features(int total, int m, std::mt19937_64& eng) {
    std::vector<int> feats(total);
    std::iota(feats.begin(), feats.end(), 0);
    if (m >= total) return feats;
    for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> pick(i, total - 1);
        std::swap(feats[i], feats[pick(eng)]);
    }
    feats.resize(m);
    std::sort(feats.begin(), feats.end());
    return feats;
}

int build_node(GrowContext& ctx, std::vector<int>& idx, int depth) {
    const std::int64_t n = static_cast<std::int64_t>(idx.size());
    std::int64_t pos = 0;
    for (int i : idx) pos += ctx.y[i];
    const double imp = gini(pos, n);

    const int node_id = static_cast<int>(ctx.tree.nodes.size());
    TreeNode node;
    node.n_samples = n;
    node.n_pos = pos;
    node.impurity = imp;
    ctx.tree.nodes.push_back(node);

    const bool depth_ok = ctx.max_depth < 0 || depth < ctx.max_depth;
    if (imp <= 0.0 || n < 2 * ctx.min_samples_leaf || !depth_ok) return node_id;

    const int F = static_cast<int>(ctx.X[0].size());
    const std::vector<int> candidates = sample_features(F, ctx.max_features, ctx.eng);

    double best_weighted = std::numeric_limits<double>::infinity();
    int best_f = -1;
    double best_thr = 0.0;

    std::vector<std::pair<double, int>> vals;  // (value, label)
    for (int f : candidates) {
        if (ctx.random_threshold) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (int i : idx) {
                lo = std::min(lo, ctx.X[i][f]);
                hi = std::max(hi, ctx.X[i][f]);
            }
            if (lo == hi) continue;
            const double thr = std::uniform_real_distribution<double>(lo, hi)(ctx.eng);
            std::int64_t n_l = 0, pos_l = 0;
            for (int i : idx) {
                if (ctx.X[i][f] <= thr) {
                    ++n_l;
                    pos_l += ctx.y[i];
                }
            }
            const std::int64_t n_r = n - n_l;
            if (n_l < ctx.min_samples_leaf || n_r < ctx.min_samples_leaf) continue;
            const double weighted =
                (static_cast<double>(n_l) * gini(pos_l, n_l) +
                 static_cast<double>(n_r) * gini(pos - pos_l, n_r)) /
                static_cast<double>(n);
            if (weighted < best_weighted) {
                best_weighted = weighted;
                best_f = f;
                best_thr = thr;
            }
        } else {
            vals.clear();
            vals.reserve(idx.size());
            for (int i : idx) vals.emplace_back(ctx.X[i][f], ctx.y[i]);
            std::sort(vals.begin(), vals.end());
            std::int64_t n_l = 0, pos_l = 0;
            for (std::size_t i = 1; i < vals.size(); ++i) {
                ++n_l;
                pos_l += vals[i - 1].second;
                if (vals[i].first == vals[i - 1].first) continue;
                const std::int64_t n_r = n - n_l;
                if (n_l < ctx.min_samples_leaf || n_r < ctx.min_samples_leaf) continue;
                const double weighted =
                    (static_cast<double>(n_l) * gini(pos_l, n_l) +
                     static_cast<double>(n_r) * gini(pos - pos_l, n_r)) /
                    static_cast<double>(n);
                if (weighted < best_weighted) {
                    best_weighted = weighted;
                    best_f = f;
                    best_thr = (vals[i - 1].first + vals[i].first) / 2.0;
                }
            }
        }
    }
    if (best_f < 0) return node_id;

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
        (ctx.X[i][best_f] <= best_thr ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int left = build_node(ctx, left_idx, depth + 1);
    const int right = build_node(ctx, right_idx, depth + 1);
    ctx.tree.nodes[node_id].feature = best_f;
    ctx.tree.nodes[node_id].threshold = best_thr;
    ctx.tree.nodes[node_id].left = left;
    ctx.tree.nodes[node_id].right = right;
    return node_id;
}

Forest train_impl(const Rows& X, const std::vector<int>& y,
                  const std::vector<std::string>& feature_names, const ForestParams& params,
                  bool extra_trees) {
    if (X.empty()) throw std::invalid_argument("train: empty feature matrix");
    if (X.size() != y.size()) throw std::invalid_argument("train: X/y size mismatch");
    const std::size_t F = X[0].size();
    if (F == 0) throw std::invalid_argument("train: zero features");
    if (feature_names.size() != F) {
        throw std::invalid_argument("train: feature name count mismatch");
    }
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != F) throw std::invalid_argument("train: ragged feature matrix");
        for (double v : X[i]) {
            if (std::isnan(v)) throw std::invalid_argument("train: NaN feature value");
        }
        if (y[i] != 0 && y[i] != 1) throw std::invalid_argument("train: labels must be 0/1");
        pos += y[i];
    }
    if (pos == 0 || pos == static_cast<std::int64_t>(y.size())) {
        throw std::invalid_argument("train: both classes must be present");
    }
    if (params.n_trees < 1) throw std::invalid_argument("train: n_trees must be >= 1");

    ForestParams resolved = params;
    if (resolved.max_features <= 0) {
        resolved.max_features =
            static_cast<int>(std::ceil(std::sqrt(static_cast<double>(F))));
    }
    resolved.max_features = std::min<int>(resolved.max_features, static_cast<int>(F));
    if (resolved.min_samples_leaf < 1) resolved.min_samples_leaf = 1;

    Forest forest;
    forest.params = resolved;
    forest.feature_names = feature_names;
    forest.schema_fingerprint = schema_fingerprint(feature_names);
    forest.extra_trees = extra_trees;
    forest.trees.resize(resolved.n_trees);

    const std::size_t N = X.size();
    for (int t = 0; t < resolved.n_trees; ++t) {
        auto eng = make_engine(derive_seed(resolved.seed, static_cast<std::uint64_t>(t)));
        std::vector<int> idx(N);
        if (resolved.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, N - 1);
            for (std::size_t i = 0; i < N; ++i) idx[i] = static_cast<int>(pick(eng));
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        GrowContext ctx{X,
                        y,
                        resolved.max_features,
                        resolved.min_samples_leaf,
                        resolved.max_depth,
                        extra_trees,
                        eng,
                        forest.trees[t]};
        build_node(ctx, idx, 0);
    }
    return forest;
}

double tree_proba(const Tree& tree, const std::vector<double>& x) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const TreeNode& nd = tree.nodes[node];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    const TreeNode& leaf = tree.nodes[node];
    return static_cast<double>(leaf.n_pos) / static_cast<double>(leaf.n_samples);
}

// Cumulative confusion sweep over descending distinct score thresholds.
// Calls fn(threshold, tp, fp) after each distinct-score group.
template <typename Fn>
void sweep_thresholds(std::vector<std::pair<double, int>> scored, Fn&& fn) {
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < scored.size()) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) {
            (scored[j].second == 1 ? tp : fp) += 1;
            ++j;
        }
        fn(scored[i].first, tp, fp);
        i = j;
    }
}

void class_totals(const std::vector<std::pair<double, int>>& scored, std::int64_t& pos,
                  std::int64_t& neg) {
    pos = neg = 0;
    for (const auto& [score, label] : scored) (label == 1 ? pos : neg) += 1;
}

double population_sd(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return v.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

std::uint64_t schema_fingerprint(const std::vector<std::string>& names) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::string& name : names) {
        h = fnv1a64(name, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);  // field separator
    }
    return h;
}

Forest train(const Rows& X, const std::vector<int>& y,
             const std::vector<std::string>& feature_names, const ForestParams& params) {
    return train_impl(X, y, feature_names, params, false);
}

Forest train_extra_trees(const Rows& X, const std::vector<int>& y,
                         const std::vector<std::string>& feature_names,
                         const ForestParams& params) {
    ForestParams p = params;
    p.bootstrap = false;
    return train_impl(X, y, feature_names, p, true);
}

double predict_proba(const Forest& forest, const std::vector<double>& x) {
    if (x.size() != forest.feature_names.size()) {
        throw std::invalid_argument("predict_proba: feature count mismatch");
    }
    double sum = 0.0;
    for (const Tree& tree : forest.trees) sum += tree_proba(tree, x);
    return sum / static_cast<double>(forest.trees.size());
}

std::vector<double> predict_proba(const Forest& forest, const Rows& X) {
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& row : X) out.push_back(predict_proba(forest, row));
    return out;
}

void verify_schema(const Forest& forest, const std::vector<std::string>& names) {
    if (schema_fingerprint(names) != forest.schema_fingerprint) {
        throw std::runtime_error(
            "schema fingerprint mismatch: features differ from the training schema");
    }
}

std::map<std::string, double> feature_importance(const Forest& forest) {
    const std::size_t F = forest.feature_names.size();
    std::vector<double> mean_imp(F, 0.0);
    for (const Tree& tree : forest.trees) {
        std::vector<double> imp(F, 0.0);
        const double n_root = static_cast<double>(tree.nodes[0].n_samples);
        for (const TreeNode& nd : tree.nodes) {
            if (nd.feature < 0) continue;
            const TreeNode& l = tree.nodes[nd.left];
            const TreeNode& r = tree.nodes[nd.right];
            const double n = static_cast<double>(nd.n_samples);
            const double decrease =
                nd.impurity - (static_cast<double>(l.n_samples) / n) * l.impurity -
                (static_cast<double>(r.n_samples) / n) * r.impurity;
            imp[nd.feature] += (n / n_root) * decrease;
        }
        const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (total > 0.0) {
            for (std::size_t f = 0; f < F; ++f) mean_imp[f] += imp[f] / total;
        }
    }
    double total = std::accumulate(mean_imp.begin(), mean_imp.end(), 0.0);
    std::map<std::string, double> out;
    for (std::size_t f = 0; f < F; ++f) {
        out[forest.feature_names[f]] =
            total > 0.0 ? mean_imp[f] / total : 1.0 / static_cast<double>(F);
    }
    return out;
}

void save_forest(const Forest& forest, const std::string& path) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["schema_fingerprint"] = forest.schema_fingerprint;
    j["feature_names"] = forest.feature_names;
    j["extra_trees"] = forest.extra_trees;
    j["params"] = {{"n_trees", forest.params.n_trees},
                   {"max_features", forest.params.max_features},
                   {"min_samples_leaf", forest.params.min_samples_leaf},
                   {"max_depth", forest.params.max_depth},
                   {"bootstrap", forest.params.bootstrap},
                   {"seed", forest.params.seed}};
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const Tree& tree : forest.trees) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const TreeNode& nd : tree.nodes) {
            nodes.push_back({{"f", nd.feature},
                             {"t", nd.threshold},
                             {"l", nd.left},
                             {"r", nd.right},
                             {"n", nd.n_samples},
                             {"p", nd.n_pos},
                             {"g", nd.impurity}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write forest: " + path);
    out << j.dump() << '\n';
}

Forest load_forest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open forest: " + path);
    nlohmann::json j;
    in >> j;
    Forest forest;
    forest.schema_fingerprint = j.at("schema_fingerprint").get<std::uint64_t>();
    forest.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    forest.extra_trees = j.value("extra_trees", false);
    const auto& p = j.at("params");
    forest.params.n_trees = p.at("n_trees").get<int>();
    forest.params.max_features = p.at("max_features").get<int>();
    forest.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    forest.params.max_depth = p.at("max_depth").get<int>();
    forest.params.bootstrap = p.at("bootstrap").get<bool>();
    forest.params.seed = p.at("seed").get<std::uint64_t>();
    for (const auto& tj : j.at("trees")) {
        Tree tree;
        for (const auto& nj : tj) {
            TreeNode nd;
            nd.feature = nj.at("f").get<int>();
            nd.threshold = nj.at("t").get<double>();
            nd.left = nj.at("l").get<int>();
            nd.right = nj.at("r").get<int>();
            nd.n_samples = nj.at("n").get<std::int64_t>();
            nd.n_pos = nj.at("p").get<std::int64_t>();
            nd.impurity = nj.at("g").get<double>();
            tree.nodes.push_back(nd);
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

double average_precision(const std::vector<std::pair<double, int>>& scored) {
    std::int64_t pos, neg;
    class_totals(scored, pos, neg);
    if (pos == 0) throw std::invalid_argument("average_precision: no positive labels");
    double ap = 0.0;
    double prev_recall = 0.0;
    sweep_thresholds(scored, [&](double, std::int64_t tp, std::int64_t fp) {
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    });
    return ap;
}

std::pair<double, double> equal_error_rate(const std::vector<std::pair<double, int>>& scored) {
    std::int64_t pos, neg;
    class_totals(scored, pos, neg);
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("equal_error_rate: both classes required");
    }
    double best_diff = std::numeric_limits<double>::infinity();
    double best_eer = 0.0, best_thr = 0.0;
    sweep_thresholds(scored, [&](double thr, std::int64_t tp, std::int64_t fp) {
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        const double diff = std::abs((1.0 - tpr) - fpr);
        if (diff < best_diff) {
            best_diff = diff;
            best_eer = ((1.0 - tpr) + fpr) / 2.0;
            best_thr = thr;
        }
    });
    return {best_eer, best_thr};
}

EvalReport cross_validate(const Rows& X, const std::vector<int>& y,
                          const ForestParams& params, const CvOptions& opts) {
    if (opts.rounds < 1) throw std::invalid_argument("cross_validate: rounds must be >= 1");
    if (X.size() != y.size()) throw std::invalid_argument("cross_validate: X/y mismatch");
    if (!opts.heuristic_mask.empty() && opts.heuristic_mask.size() != y.size()) {
        throw std::invalid_argument("cross_validate: heuristic mask length mismatch");
    }
    if (opts.test_fraction <= 0.0 || opts.test_fraction >= 1.0) {
        throw std::invalid_argument("cross_validate: test fraction must be in (0,1)");
    }
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos_idx : neg_idx).push_back(i);
    if (pos_idx.size() < 2 || neg_idx.size() < 2) {
        throw std::invalid_argument("cross_validate: need >= 2 rows of each class");
    }

    EvalReport report;
    report.operating_threshold = opts.operating_threshold;
    const auto n_test_of = [&](std::size_t total) {
        return std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::lround(opts.test_fraction * static_cast<double>(total))));
    };

    for (int r = 0; r < opts.rounds; ++r) {
        const std::uint64_t round_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
        std::vector<std::size_t> test, train_rows;
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            auto eng = make_engine(derive_seed(round_seed, static_cast<std::uint64_t>(attempt)));
            auto p = pos_idx;
            auto n = neg_idx;
            std::shuffle(p.begin(), p.end(), eng);
            std::shuffle(n.begin(), n.end(), eng);
            const std::size_t tp_count = n_test_of(p.size());
            const std::size_t tn_count = n_test_of(n.size());
            if (tp_count >= p.size() || tn_count >= n.size()) {
                throw std::invalid_argument("cross_validate: classes too small for split");
            }
            test.clear();
            train_rows.clear();
            std::size_t test_pos = 0, test_neg = 0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (i < tp_count) {
                    // omit mode removes heuristic-labeled positives from the
                    // test fold only
                    if (opts.mode == CvMode::omit_heuristic_positives &&
                        !opts.heuristic_mask.empty() && opts.heuristic_mask[p[i]]) {
                        continue;
                    }
                    test.push_back(p[i]);
                    ++test_pos;
                } else {
                    train_rows.push_back(p[i]);
                }
            }
            for (std::size_t i = 0; i < n.size(); ++i) {
                if (i < tn_count) {
                    test.push_back(n[i]);
                    ++test_neg;
                } else {
                    train_rows.push_back(n[i]);
                }
            }
            ok = test_pos > 0 && test_neg > 0;
        }
        if (!ok) {
            throw std::runtime_error(
                "cross_validate: could not build a test fold with both classes");
        }

        Rows Xtr, Xte;
        std::vector<int> ytr;
        for (std::size_t i : train_rows) {
            Xtr.push_back(X[i]);
            ytr.push_back(y[i]);
        }
        std::vector<std::string> names;
        names.reserve(X[0].size());
        for (std::size_t f = 0; f < X[0].size(); ++f) names.push_back("f" + std::to_string(f));
        ForestParams round_params = params;
        round_params.seed = derive_seed(round_seed, "forest");
        const Forest forest = train(Xtr, ytr, names, round_params);

        RoundResult rr;
        rr.test_indices = test;
        for (std::size_t i : test) {
            rr.scored.emplace_back(predict_proba(forest, X[i]), y[i]);
        }
        rr.auprc = average_precision(rr.scored);
        std::tie(rr.eer, rr.eer_threshold) = equal_error_rate(rr.scored);

        std::int64_t pos_total, neg_total;
        class_totals(rr.scored, pos_total, neg_total);
        sweep_thresholds(rr.scored, [&](double thr, std::int64_t tp, std::int64_t fp) {
            PRPoint pt;
            pt.threshold = thr;
            pt.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
            pt.recall = static_cast<double>(tp) / static_cast<double>(pos_total);
            pt.tpr = pt.recall;
            pt.fpr = static_cast<double>(fp) / static_cast<double>(neg_total);
            rr.curve.push_back(pt);
        });

        std::int64_t op_tp = 0, op_fp = 0;
        for (const auto& [score, label] : rr.scored) {
            if (score >= opts.operating_threshold) (label == 1 ? op_tp : op_fp) += 1;
        }
        // no predictions at the operating point: vacuously precise
        rr.op_precision = op_tp + op_fp == 0
                              ? 1.0
                              : static_cast<double>(op_tp) /
                                    static_cast<double>(op_tp + op_fp);
        rr.op_recall = static_cast<double>(op_tp) / static_cast<double>(pos_total);
        report.rounds.push_back(std::move(rr));
    }

    std::vector<double> aps, eers, precs, recs;
    for (const RoundResult& rr : report.rounds) {
        aps.push_back(rr.auprc);
        eers.push_back(rr.eer);
        precs.push_back(rr.op_precision);
        recs.push_back(rr.op_recall);
    }
    const auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    report.mean_auprc = mean(aps);
    report.sd_auprc = population_sd(aps, report.mean_auprc);
    report.mean_eer = mean(eers);
    report.sd_eer = population_sd(eers, report.mean_eer);
    report.mean_op_precision = mean(precs);
    report.sd_op_precision = population_sd(precs, report.mean_op_precision);
    report.mean_op_recall = mean(recs);
    report.sd_op_recall = population_sd(recs, report.mean_op_recall);
    return report;
}

void write_eval_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write eval report: " + path);
    out << "round,threshold,precision,recall,tpr,fpr\n";
    char buf[160];
    for (std::size_t r = 0; r < report.rounds.size(); ++r) {
        for (const PRPoint& pt : report.rounds[r].curve) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r,
                          pt.threshold, pt.precision, pt.recall, pt.tpr, pt.fpr);
            out << buf;
        }
    }
}

void write_eval_summary_json(const EvalReport& report, const std::string& path) {
    nlohmann::ordered_json j;
    j["rounds"] = report.rounds.size();
    j["operating_threshold"] = report.operating_threshold;
    j["mean_auprc"] = report.mean_auprc;
    j["sd_auprc"] = report.sd_auprc;
    j["mean_eer"] = report.mean_eer;
    j["sd_eer"] = report.sd_eer;
    j["mean_operating_precision"] = report.mean_op_precision;
    j["sd_operating_precision"] = report.sd_op_precision;
    j["mean_operating_recall"] = report.mean_op_recall;
    j["sd_operating_recall"] = report.sd_op_recall;
    nlohmann::ordered_json per_round = nlohmann::ordered_json::array();
    for (const RoundResult& rr : report.rounds) {
        per_round.push_back({{"auprc", rr.auprc},
                             {"eer", rr.eer},
                             {"eer_threshold", rr.eer_threshold},
                             {"operating_precision", rr.op_precision},
                             {"operating_recall", rr.op_recall}});
    }
    j["per_round"] = std::move(per_round);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write eval summary: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace ioforge
