#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ioforge {

struct Vocabulary {
    std::vector<std::string> tokens;     // id -> token (lowercase), ids contiguous from 0
    std::map<std::string, int> ids;      // token -> id
    std::vector<std::int64_t> doc_freq;  // number of documents containing each token

    int id_of(const std::string& token) const {
        auto it = ids.find(token);
        return it == ids.end() ? -1 : it->second;
    }
    std::size_t size() const { return tokens.size(); }
};

struct TokenizedDoc {
    std::string doc_id;
    std::vector<std::string> tokens;
};

struct LdaConfig {
    int K = 10;
    double alpha = -1.0;  // < 0 means the 50/K default
    double beta = 0.01;
    int iterations = 1000;
    std::uint64_t seed = 0;
    std::vector<std::string> stop_words;
};

struct TopicModel {
    int K = 0;
    double alpha = 0.0;
    double beta = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    Vocabulary vocab;
    std::vector<std::vector<double>> phi;    // K x V, rows on the simplex
    std::vector<std::vector<double>> theta;  // D x K, rows on the simplex
    std::vector<std::string> doc_ids;        // theta row -> document id
    std::size_t empty_docs_dropped = 0;
};

struct Narrative {
    int topic_index = -1;
    double match_threshold = 0.5;
    std::vector<std::string> tweet_ids;  // sorted, unique
    std::string language;
    std::map<std::string, std::int64_t> token_frequencies;  // over matched tweets
};

// Collapsed Gibbs LDA over tokenized documents. Stop words are removed before
// the vocabulary is built; documents left empty are dropped (counted in
// empty_docs_dropped). Deterministic given cfg.seed.
TopicModel fit_lda(const std::vector<TokenizedDoc>& docs, const LdaConfig& cfg);

// Top-n tokens of a topic by descending phi, ties broken by token id.
std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int topic,
                                                      std::size_t n);

// Documents whose theta for `topic` is >= threshold, with vocabulary-token
// frequency counts over the matched set.
Narrative match_narrative(const TopicModel& model, const std::vector<TokenizedDoc>& docs,
                          int topic, double threshold);

// JSON artifact writers / reader used for stage handoff.
void write_topic_report(const TopicModel& model, std::size_t words_per_topic,
                        const std::string& path);
void write_narrative(const Narrative& narrative, const std::string& path);
Narrative load_narrative(const std::string& path);

}  // namespace ioforge
