#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ioforge/corpus.hpp"

namespace ioforge {

struct BehavioralProfile {
    std::int64_t profile_length = 0;
    std::int64_t num_external_news_interactions = 0;
    std::int64_t following_count = 0;
    double avg_num_links = 0.0;
    std::int64_t num_langs_used = 0;
    std::int64_t num_faves = 0;
    double und_fraction = 0.0;
    std::int64_t follower_count = 0;
    double followers_following_ratio = 0.0;
    double ratio_tweets_w_links_all_tweets = 0.0;
};

enum class LFVote { IO, REAL, ABSTAIN };

inline constexpr std::size_t kNumLFs = 14;

// Labeling-function names in their fixed canonical order.
const std::vector<std::string>& lf_names();

struct LabelMatrix {
    std::vector<std::string> lf_names;       // column names
    std::vector<std::string> account_ids;    // row order
    std::vector<std::vector<LFVote>> votes;  // N rows x M columns
};

struct WeakLabels {
    std::vector<std::string> account_ids;
    std::vector<double> io_probability;  // in [0,1]
    std::vector<int> labels;             // 1 iff io_probability >= threshold
    double threshold = 0.7;
    std::map<std::string, double> lf_accuracies;  // learned per-LF weights
    double class_prior = 0.0;                     // EM's fitted P(IO)
};

// External-news interaction list: mixed newline-delimited domains and
// account ids. A tweet interacts with external news if any of its URL hosts
// falls under a listed domain or its retweet source is a listed account.
struct NewsList {
    std::set<std::string> entries;
};

NewsList load_news_list(const std::string& path);

// Per-account behavioral aggregates over the account's retained tweets;
// zero-tweet accounts get zeroed tweet-derived fields.
std::map<std::string, BehavioralProfile> compute_profiles(const Corpus& corpus,
                                                          const NewsList& news);

// The 14 heuristic labeling functions, in lf_names() order.
std::vector<LFVote> apply_lfs(const BehavioralProfile& profile);

// Stacks apply_lfs over profiles (row order = sorted account id).
LabelMatrix build_label_matrix(const std::map<std::string, BehavioralProfile>& profiles);

enum class LabelModelMethod { vote, em };

// Aggregates LF votes into per-account IO probabilities. vote: IO fraction of
// non-abstaining votes (0.5 when all abstain). em: conditionally-independent
// per-LF-accuracy two-class generative model fit by EM (accuracy init 0.7,
// prior init 0.3, <=100 iterations or delta log-likelihood < 1e-6); all-
// abstain rows get the fitted prior. Columns are canonicalized by name, so
// the result is invariant to input column order.
WeakLabels fit_label_model(const LabelMatrix& matrix,
                           LabelModelMethod method = LabelModelMethod::em,
                           double threshold = 0.7);

// Re-thresholds probabilities: label IO iff p >= threshold, threshold in (0,1).
std::vector<int> threshold_labels(const WeakLabels& weak, double threshold);

void write_weak_labels_csv(const WeakLabels& weak, const LabelMatrix& matrix,
                           const std::string& path);
WeakLabels load_weak_labels_csv(const std::string& path);

}  // namespace ioforge
