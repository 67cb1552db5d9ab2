#include "ioforge/topics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ioforge/rng.hpp"

namespace ioforge {

namespace {

struct GibbsState {
    std::vector<std::vector<int>> docs;  // word ids per document
    std::vector<std::vector<int>> z;     // topic assignment per token
    std::vector<std::vector<int>> n_dk;  // D x K
    std::vector<std::vector<int>> n_kw;  // K x V
    std::vector<int> n_k;                // K
    std::int64_t total_tokens = 0;
};

void check_conservation(const GibbsState& s) {
    std::int64_t sum = std::accumulate(s.n_k.begin(), s.n_k.end(), std::int64_t{0});
    if (sum != s.total_tokens) {
        throw std::logic_error("lda: topic count table lost tokens during a sweep");
    }
}

}  // namespace

TopicModel fit_lda(const std::vector<TokenizedDoc>& docs, const LdaConfig& cfg) {
    if (cfg.K < 2) throw std::invalid_argument("fit_lda: K must be >= 2");
    if (cfg.iterations < 1) throw std::invalid_argument("fit_lda: iterations must be >= 1");
    if (cfg.beta <= 0) throw std::invalid_argument("fit_lda: beta must be > 0");

    TopicModel model;
    model.K = cfg.K;
    model.alpha = cfg.alpha < 0 ? 50.0 / cfg.K : cfg.alpha;
    model.beta = cfg.beta;
    model.iterations = cfg.iterations;
    model.seed = cfg.seed;

    const std::set<std::string> stop(cfg.stop_words.begin(), cfg.stop_words.end());
    GibbsState s;
    for (const TokenizedDoc& doc : docs) {
        std::vector<int> ids;
        std::set<int> distinct;
        for (const std::string& tok : doc.tokens) {
            if (stop.count(tok)) continue;
            int id = model.vocab.id_of(tok);
            if (id < 0) {
                id = static_cast<int>(model.vocab.tokens.size());
                model.vocab.tokens.push_back(tok);
                model.vocab.ids.emplace(tok, id);
                model.vocab.doc_freq.push_back(0);
            }
            ids.push_back(id);
            distinct.insert(id);
        }
        if (ids.empty()) {
            ++model.empty_docs_dropped;
            continue;
        }
        for (int id : distinct) ++model.vocab.doc_freq[id];
        s.total_tokens += static_cast<std::int64_t>(ids.size());
        s.docs.push_back(std::move(ids));
        model.doc_ids.push_back(doc.doc_id);
    }
    if (model.vocab.size() == 0) throw std::runtime_error("fit_lda: vocabulary is empty");

    const int K = cfg.K;
    const int V = static_cast<int>(model.vocab.size());
    const std::size_t D = s.docs.size();
    const double alpha = model.alpha;
    const double beta = model.beta;
    const double vbeta = V * beta;

    s.z.resize(D);
    s.n_dk.assign(D, std::vector<int>(K, 0));
    s.n_kw.assign(K, std::vector<int>(V, 0));
    s.n_k.assign(K, 0);

    auto eng = make_engine(cfg.seed);
    std::uniform_int_distribution<int> pick_topic(0, K - 1);
    for (std::size_t d = 0; d < D; ++d) {
        s.z[d].resize(s.docs[d].size());
        for (std::size_t i = 0; i < s.docs[d].size(); ++i) {
            const int k = pick_topic(eng);
            s.z[d][i] = k;
            ++s.n_dk[d][k];
            ++s.n_kw[k][s.docs[d][i]];
            ++s.n_k[k];
        }
    }

    std::vector<double> weights(K);
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        for (std::size_t d = 0; d < D; ++d) {
            for (std::size_t i = 0; i < s.docs[d].size(); ++i) {
                const int w = s.docs[d][i];
                const int old_k = s.z[d][i];
                --s.n_dk[d][old_k];
                --s.n_kw[old_k][w];
                --s.n_k[old_k];

                double total = 0.0;
                for (int k = 0; k < K; ++k) {
                    total += (s.n_dk[d][k] + alpha) * (s.n_kw[k][w] + beta) /
                             (s.n_k[k] + vbeta);
                    weights[k] = total;
                }
                const double u =
                    std::uniform_real_distribution<double>(0.0, total)(eng);
                int new_k = K - 1;
                for (int k = 0; k < K; ++k) {
                    if (u < weights[k]) {
                        new_k = k;
                        break;
                    }
                }
                s.z[d][i] = new_k;
                ++s.n_dk[d][new_k];
                ++s.n_kw[new_k][w];
                ++s.n_k[new_k];
            }
        }
        check_conservation(s);
    }

    model.phi.assign(K, std::vector<double>(V));
    for (int k = 0; k < K; ++k) {
        const double denom = s.n_k[k] + vbeta;
        for (int w = 0; w < V; ++w) model.phi[k][w] = (s.n_kw[k][w] + beta) / denom;
    }
    model.theta.assign(D, std::vector<double>(K));
    for (std::size_t d = 0; d < D; ++d) {
        const double denom = static_cast<double>(s.docs[d].size()) + K * alpha;
        for (int k = 0; k < K; ++k) model.theta[d][k] = (s.n_dk[d][k] + alpha) / denom;
    }
    return model;
}

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int topic,
                                                      std::size_t n) {
    if (topic < 0 || topic >= model.K) throw std::out_of_range("top_words: bad topic index");
    const auto& row = model.phi.at(topic);
    std::vector<int> order(row.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return row[a] != row[b] ? row[a] > row[b] : a < b;
    });
    const std::size_t take = std::min(n, order.size());
    std::vector<std::pair<std::string, double>> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.emplace_back(model.vocab.tokens[order[i]], row[order[i]]);
    }
    return out;
}

Narrative match_narrative(const TopicModel& model, const std::vector<TokenizedDoc>& docs,
                          int topic, double threshold) {
    if (topic < 0 || topic >= model.K) {
        throw std::out_of_range("match_narrative: bad topic index");
    }
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("match_narrative: threshold must be in (0,1]");
    }
    std::map<std::string, std::size_t> row_of;
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) row_of[model.doc_ids[d]] = d;

    Narrative out;
    out.topic_index = topic;
    out.match_threshold = threshold;
    std::set<std::string> matched;
    for (const TokenizedDoc& doc : docs) {
        auto it = row_of.find(doc.doc_id);
        if (it == row_of.end()) continue;
        if (model.theta[it->second][topic] < threshold) continue;
        if (!matched.insert(doc.doc_id).second) continue;
        for (const std::string& tok : doc.tokens) {
            if (model.vocab.id_of(tok) >= 0) ++out.token_frequencies[tok];
        }
    }
    out.tweet_ids.assign(matched.begin(), matched.end());
    return out;
}

void write_topic_report(const TopicModel& model, std::size_t words_per_topic,
                        const std::string& path) {
    nlohmann::ordered_json report = nlohmann::ordered_json::array();
    for (int k = 0; k < model.K; ++k) {
        nlohmann::ordered_json entry;
        entry["topic_index"] = k;
        nlohmann::ordered_json words = nlohmann::ordered_json::array();
        for (const auto& [token, prob] : top_words(model, k, words_per_topic)) {
            words.push_back({{"token", token}, {"prob", prob}});
        }
        entry["top_words"] = std::move(words);
        report.push_back(std::move(entry));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topic report: " + path);
    out << report.dump(2) << '\n';
}

void write_narrative(const Narrative& narrative, const std::string& path) {
    nlohmann::ordered_json j;
    j["topic_index"] = narrative.topic_index;
    j["threshold"] = narrative.match_threshold;
    j["language"] = narrative.language;
    j["tweet_ids"] = narrative.tweet_ids;
    nlohmann::ordered_json freqs = nlohmann::ordered_json::object();
    for (const auto& [token, count] : narrative.token_frequencies) freqs[token] = count;
    j["token_frequencies"] = std::move(freqs);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write narrative: " + path);
    out << j.dump(2) << '\n';
}

Narrative load_narrative(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open narrative: " + path);
    nlohmann::json j;
    in >> j;
    Narrative n;
    n.topic_index = j.at("topic_index").get<int>();
    n.match_threshold = j.at("threshold").get<double>();
    n.language = j.value("language", std::string{});
    n.tweet_ids = j.at("tweet_ids").get<std::vector<std::string>>();
    for (const auto& [token, count] : j.at("token_frequencies").items()) {
        n.token_frequencies[token] = count.get<std::int64_t>();
    }
    return n;
}

}  // namespace ioforge
