#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "ioforge/synth.hpp"
#include "ioforge/topics.hpp"
#include "oracles.hpp"

using namespace ioforge;

namespace {

std::vector<TokenizedDoc> docs_from(std::initializer_list<std::vector<std::string>> lists) {
    std::vector<TokenizedDoc> docs;
    int i = 0;
    for (const auto& tokens : lists) {
        docs.push_back({"d" + std::to_string(i++), tokens});
    }
    return docs;
}

void check_simplex_rows(const std::vector<std::vector<double>>& rows) {
    for (const auto& row : rows) {
        double sum = 0.0;
        for (double v : row) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

}  // namespace

TEST_CASE("planted 3-topic corpus is recovered with high word overlap") {
    PlantedTopicsSpec spec;
    spec.num_topics = 3;
    spec.words_per_topic = 10;
    spec.docs_per_topic = 100;
    spec.tokens_per_doc = 8;
    PlantedTopicsData data = make_planted_topics(spec, 7);

    LdaConfig cfg;
    cfg.K = 3;
    cfg.alpha = 0.1;  // short docs: a flat 50/K prior would swamp 8 tokens
    cfg.iterations = 200;
    cfg.seed = 11;
    TopicModel model = fit_lda(data.docs, cfg);

    CHECK(oracles::greedy_topic_overlap(model, data.topic_vocab, 10) >= 0.8);
    check_simplex_rows(model.phi);
    check_simplex_rows(model.theta);

    SUBCASE("top words come from the planted vocabularies") {
        for (int k = 0; k < 3; ++k) {
            std::set<std::string> all_planted;
            for (const auto& vocab : data.topic_vocab) {
                all_planted.insert(vocab.begin(), vocab.end());
            }
            for (const auto& [token, prob] : top_words(model, k, 10)) {
                CHECK(all_planted.count(token) == 1);
            }
        }
    }
    SUBCASE("fixed seed reproduces phi bitwise") {
        TopicModel again = fit_lda(data.docs, cfg);
        CHECK(again.phi == model.phi);
        CHECK(again.theta == model.theta);
    }
    SUBCASE("matched narrative equals a brute-force theta scan") {
        Narrative n = match_narrative(model, data.docs, 1, 0.5);
        std::set<std::string> brute;
        for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
            if (model.theta[d][1] >= 0.5) brute.insert(model.doc_ids[d]);
        }
        CHECK(std::set<std::string>(n.tweet_ids.begin(), n.tweet_ids.end()) == brute);
        CHECK_FALSE(n.tweet_ids.empty());
    }
}

TEST_CASE("single-token documents separate into distinct topics") {
    auto docs = docs_from({{"aa"}, {"bb"}, {"cc"}});
    LdaConfig cfg;
    cfg.K = 3;
    cfg.iterations = 200;
    cfg.seed = 5;
    TopicModel model = fit_lda(docs, cfg);
    std::set<int> argmaxes;
    for (const auto& row : model.theta) {
        argmaxes.insert(static_cast<int>(
            std::max_element(row.begin(), row.end()) - row.begin()));
    }
    CHECK(argmaxes.size() == 3);
}

TEST_CASE("paper-scale K settings produce valid simplex rows") {
    PlantedTopicsSpec spec;
    spec.num_topics = 5;
    spec.words_per_topic = 20;
    spec.docs_per_topic = 40;
    spec.tokens_per_doc = 6;
    PlantedTopicsData data = make_planted_topics(spec, 3);
    for (int K : {15, 30}) {
        LdaConfig cfg;
        cfg.K = K;
        cfg.iterations = 30;
        cfg.seed = 1;
        TopicModel model = fit_lda(data.docs, cfg);
        check_simplex_rows(model.phi);
        check_simplex_rows(model.theta);
        CHECK(model.alpha == doctest::Approx(50.0 / K));
    }
}

TEST_CASE("empty documents are dropped with a count") {
    auto docs = docs_from({{"aa", "bb"}, {}, {"bb", "cc"}, {"the"}});
    LdaConfig cfg;
    cfg.K = 2;
    cfg.iterations = 10;
    cfg.seed = 1;
    cfg.stop_words = {"the"};
    TopicModel model = fit_lda(docs, cfg);
    CHECK(model.empty_docs_dropped == 2);  // the empty doc and the all-stopword doc
    CHECK(model.doc_ids == std::vector<std::string>{"d0", "d2"});
    CHECK(model.vocab.size() == 3);
    CHECK(model.vocab.doc_freq[model.vocab.id_of("bb")] == 2);
}

TEST_CASE("empty vocabulary and bad K raise") {
    LdaConfig cfg;
    cfg.K = 2;
    cfg.iterations = 5;
    CHECK_THROWS(fit_lda({}, cfg));
    auto docs = docs_from({{"aa"}});
    LdaConfig bad = cfg;
    bad.K = 1;
    CHECK_THROWS(fit_lda(docs, bad));
}

TEST_CASE("top_words ordering, tie-break, and clamping") {
    TopicModel model;
    model.K = 1;
    model.vocab.tokens = {"alpha", "beta", "gamma", "delta"};
    for (int i = 0; i < 4; ++i) model.vocab.ids[model.vocab.tokens[i]] = i;
    model.phi = {{0.2, 0.4, 0.2, 0.2}};
    auto top = top_words(model, 0, 10);  // n > V clamps to V
    REQUIRE(top.size() == 4);
    CHECK(top[0].first == "beta");
    // remaining three tie at 0.2 and come out in token-id order
    CHECK(top[1].first == "alpha");
    CHECK(top[2].first == "gamma");
    CHECK(top[3].first == "delta");
}

TEST_CASE("one-hot phi row puts its token first") {
    TopicModel model;
    model.K = 1;
    model.vocab.tokens = {"macron", "other"};
    model.vocab.ids = {{"macron", 0}, {"other", 1}};
    model.phi = {{1.0, 0.0}};
    CHECK(top_words(model, 0, 1)[0].first == "macron");
}

TEST_CASE("match_narrative threshold boundaries") {
    // Hand-built model: two docs, one concentrated, one mixed.
    TopicModel model;
    model.K = 2;
    model.vocab.tokens = {"aa", "bb"};
    model.vocab.ids = {{"aa", 0}, {"bb", 1}};
    model.phi = {{1.0, 0.0}, {0.0, 1.0}};
    model.theta = {{1.0, 0.0}, {0.6, 0.4}};
    model.doc_ids = {"pure", "mixed"};
    auto docs = docs_from({{"aa", "aa"}, {"aa", "bb"}});
    docs[0].doc_id = "pure";
    docs[1].doc_id = "mixed";

    SUBCASE("threshold 1.0 excludes the mixed doc") {
        Narrative n = match_narrative(model, docs, 0, 1.0);
        CHECK(n.tweet_ids == std::vector<std::string>{"pure"});
        CHECK(n.token_frequencies.at("aa") == 2);
    }
    SUBCASE("threshold near zero matches everything") {
        Narrative n = match_narrative(model, docs, 0, 1e-12);
        CHECK(n.tweet_ids.size() == 2);
        CHECK(n.token_frequencies.at("aa") == 3);
        CHECK(n.token_frequencies.at("bb") == 1);
    }
    SUBCASE("out-of-range threshold raises") {
        CHECK_THROWS(match_narrative(model, docs, 0, 0.0));
        CHECK_THROWS(match_narrative(model, docs, 0, 1.5));
    }
}

TEST_CASE("narrative JSON round-trips") {
    Narrative n;
    n.topic_index = 2;
    n.match_threshold = 0.5;
    n.language = "fr";
    n.tweet_ids = {"t1", "t9"};
    n.token_frequencies = {{"macron", 4}, {"leaks", 2}};
    auto dir = std::filesystem::temp_directory_path() / "ioforge_test_topics";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "narrative.json").string();
    write_narrative(n, path);
    Narrative back = load_narrative(path);
    CHECK(back.topic_index == n.topic_index);
    CHECK(back.match_threshold == n.match_threshold);
    CHECK(back.language == n.language);
    CHECK(back.tweet_ids == n.tweet_ids);
    CHECK(back.token_frequencies == n.token_frequencies);
}
