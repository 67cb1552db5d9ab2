#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "ioforge/features.hpp"
#include "ioforge/rng.hpp"

using namespace ioforge;

namespace {

constexpr std::int64_t kDay = 86400;

Tweet make_tweet(const std::string& id, const std::string& account, std::int64_t at,
                 const std::string& text, const std::string& lang = "en") {
    Tweet t;
    t.tweet_id = id;
    t.account_id = account;
    t.created_at = at;
    t.text = text;
    t.lang = lang;
    return t;
}

AccountRecord make_account(const std::string& id) {
    AccountRecord a;
    a.account_id = id;
    a.screen_name = id;
    return a;
}

void add_account(Corpus& c, const AccountRecord& a) { c.accounts[a.account_id] = a; }

// sequential tweet with id-derived timestamp
void push_tweet(Corpus& c, int& id, const std::string& account, const std::string& text,
                const std::string& lang = "en") {
    c.tweets.push_back(make_tweet("t" + std::to_string(id), account, id, text, lang));
    id++;
}

void sort_tweets(Corpus& c) {
    std::sort(c.tweets.begin(), c.tweets.end(), [](const Tweet& a, const Tweet& b) {
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.tweet_id < b.tweet_id;
    });
}

std::size_t feature_index(const std::string& name) {
    const auto& names = behavioral_feature_names();
    auto it = std::find(names.begin(), names.end(), name);
    REQUIRE(it != names.end());
    return static_cast<std::size_t>(it - names.begin());
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "ioforge_features_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("behavioral feature list is the fixed 17") {
    const auto& names = behavioral_feature_names();
    CHECK(names.size() == 17);
    CHECK(names.front() == "num_external_news_interactions");
    CHECK(names.back() == "avg_num_links");
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 17);
}

TEST_CASE("tweets-per-day stats use active days only") {
    // 3 tweets on one day, 1 on another, none in between
    Corpus c;
    add_account(c, make_account("a"));
    c.tweets.push_back(make_tweet("t1", "a", 0, "one"));
    c.tweets.push_back(make_tweet("t2", "a", 100, "two"));
    c.tweets.push_back(make_tweet("t3", "a", 200, "three"));
    c.tweets.push_back(make_tweet("t4", "a", 5 * kDay, "four"));
    sort_tweets(c);

    const auto row = extract_behavioral(c, "a");
    CHECK(row[feature_index("avg_num_tweets_per_day")] == doctest::Approx(2.0));
    // active-day counts {3,1}: mean 2, population variance ((3-2)^2+(1-2)^2)/2 = 1
    CHECK(row[feature_index("sd_num_tweets_per_day")] == doctest::Approx(1.0));
    CHECK(row[feature_index("num_tweets_in_time_range")] == doctest::Approx(4.0));
}

TEST_CASE("zero-tweet account: tweet-derived zero, metadata passed through") {
    Corpus c;
    AccountRecord a = make_account("quiet");
    a.profile_length = 42;
    a.follower_count = 1000;
    a.following_count = 250;
    a.num_faves = 77;
    add_account(c, a);

    const auto row = extract_behavioral(c, "quiet");
    CHECK(row[feature_index("num_tweets_in_time_range")] == 0.0);
    CHECK(row[feature_index("avg_num_chars")] == 0.0);
    CHECK(row[feature_index("avg_num_tweets_per_day")] == 0.0);
    CHECK(row[feature_index("sd_num_tweets_per_day")] == 0.0);
    CHECK(row[feature_index("ratio_retweets_all_tweets")] == 0.0);
    CHECK(row[feature_index("profile_length")] == 42.0);
    CHECK(row[feature_index("follower_count")] == 1000.0);
    CHECK(row[feature_index("following_count")] == 250.0);
    CHECK(row[feature_index("num_faves")] == 77.0);
    CHECK(row[feature_index("followers_following_ratio")] == doctest::Approx(4.0));
}

TEST_CASE("all tweets are retweets with links -> ratio 1.0") {
    Corpus c;
    add_account(c, make_account("a"));
    add_account(c, make_account("src"));
    for (int i = 0; i < 3; i++) {
        Tweet t = make_tweet("t" + std::to_string(i), "a", i * 60, "RT @src: hello");
        t.is_retweet = true;
        t.retweet_of_account = "src";
        t.urls = {"https://example.com/x"};
        c.tweets.push_back(t);
    }
    sort_tweets(c);

    const auto row = extract_behavioral(c, "a");
    CHECK(row[feature_index("ratio_retweets_w_links_all_tweets")] == doctest::Approx(1.0));
    CHECK(row[feature_index("ratio_retweets_all_tweets")] == doctest::Approx(1.0));
    CHECK(row[feature_index("avg_num_links")] == doctest::Approx(1.0));
}

TEST_CASE("unknown account is an error") {
    Corpus c;
    add_account(c, make_account("a"));
    CHECK_THROWS(extract_behavioral(c, "nobody"));
}

TEST_CASE("character averages count codepoints") {
    Corpus c;
    add_account(c, make_account("a"));
    Tweet t1 = make_tweet("t1", "a", 0, "hello");  // 5 chars
    t1.hashtags = {"abc", "de"};                   // 5 hashtag chars
    Tweet t2 = make_tweet("t2", "a", 60, "caf\xC3\xA9");  // 4 codepoints
    c.tweets.push_back(t1);
    c.tweets.push_back(t2);
    sort_tweets(c);

    const auto row = extract_behavioral(c, "a");
    CHECK(row[feature_index("avg_num_chars")] == doctest::Approx(4.5));
    CHECK(row[feature_index("avg_num_hashtag_chars")] == doctest::Approx(2.5));
}

TEST_CASE("language fractions") {
    Corpus c;
    add_account(c, make_account("a"));
    add_account(c, make_account("empty"));

    SUBCASE("3 en + 1 sr") {
        c.tweets.push_back(make_tweet("t1", "a", 0, "x y", "en"));
        c.tweets.push_back(make_tweet("t2", "a", 1, "x y", "en"));
        c.tweets.push_back(make_tweet("t3", "a", 2, "x y", "en"));
        c.tweets.push_back(make_tweet("t4", "a", 3, "x y", "sr"));
        sort_tweets(c);
        const auto f = extract_language_fractions(c, "a");
        CHECK(f.size() == 2);
        CHECK(f.at("en") == doctest::Approx(0.75));
        CHECK(f.at("sr") == doctest::Approx(0.25));
    }
    SUBCASE("all und") {
        c.tweets.push_back(make_tweet("t1", "a", 0, "x y", "und"));
        c.tweets.push_back(make_tweet("t2", "a", 1, "x y", "und"));
        sort_tweets(c);
        const auto f = extract_language_fractions(c, "a");
        CHECK(f.size() == 1);
        CHECK(f.at("und") == doctest::Approx(1.0));
    }
    SUBCASE("zero tweets -> empty map") {
        const auto f = extract_language_fractions(c, "empty");
        CHECK(f.empty());
    }
    SUBCASE("code outside the universe buckets to other") {
        c.tweets.push_back(make_tweet("t1", "a", 0, "x y", "zz"));
        c.tweets.push_back(make_tweet("t2", "a", 1, "x y", "en"));
        sort_tweets(c);
        const auto f = extract_language_fractions(c, "a");
        CHECK(f.at("other") == doctest::Approx(0.5));
        CHECK(f.at("en") == doctest::Approx(0.5));
    }
}

TEST_CASE("ngram features") {
    SUBCASE("total count 15 dropped, 16 kept") {
        Corpus c;
        add_account(c, make_account("a"));
        add_account(c, make_account("b"));
        // "alpha" appears 16 times total (spread over two accounts),
        // "bravo" exactly 15 times
        int id = 0;
        for (int i = 0; i < 10; i++)
            push_tweet(c, id, "a", "alpha");
        for (int i = 0; i < 6; i++)
            push_tweet(c, id, "b", "alpha");
        for (int i = 0; i < 15; i++)
            push_tweet(c, id, "a", "bravo");
        sort_tweets(c);

        const auto ng = build_ngram_features(c, {"a", "b"});
        CHECK(ng.vocabulary == std::vector<std::string>{"en:alpha"});
        // account a: 10 of its 25 tweets say alpha -> 0.4; b: 6/6 -> 1.0
        CHECK(ng.rows[0].at(0) == doctest::Approx(0.4));
        CHECK(ng.rows[1].at(0) == doctest::Approx(1.0));
    }
    SUBCASE("adjacent 2-gram keyed by language") {
        Corpus c;
        add_account(c, make_account("a"));
        for (int i = 0; i < 16; i++)
            c.tweets.push_back(
                make_tweet("t" + std::to_string(i), "a", i, "le pen", "fr"));
        sort_tweets(c);
        const auto ng = build_ngram_features(c, {"a"});
        CHECK(std::find(ng.vocabulary.begin(), ng.vocabulary.end(), "fr:le pen") !=
              ng.vocabulary.end());
        CHECK(std::find(ng.vocabulary.begin(), ng.vocabulary.end(), "fr:le") !=
              ng.vocabulary.end());
        CHECK(std::find(ng.vocabulary.begin(), ng.vocabulary.end(), "fr:pen") !=
              ng.vocabulary.end());
        const std::size_t col = static_cast<std::size_t>(
            std::find(ng.vocabulary.begin(), ng.vocabulary.end(), "fr:le pen") -
            ng.vocabulary.begin());
        CHECK(ng.rows[0].at(static_cast<int>(col)) == doctest::Approx(1.0));
    }
    SUBCASE("empty corpus -> empty vocabulary") {
        Corpus c;
        const auto ng = build_ngram_features(c, {});
        CHECK(ng.vocabulary.empty());
        CHECK(ng.rows.empty());
    }
    SUBCASE("same gram in different languages stays distinct") {
        Corpus c;
        add_account(c, make_account("a"));
        int id = 0;
        for (int i = 0; i < 16; i++)
            push_tweet(c, id, "a", "pizza", "en");
        for (int i = 0; i < 16; i++)
            push_tweet(c, id, "a", "pizza", "it");
        sort_tweets(c);
        const auto ng = build_ngram_features(c, {"a"});
        CHECK(ng.vocabulary == std::vector<std::string>{"en:pizza", "it:pizza"});
        CHECK(ng.rows[0].at(0) == doctest::Approx(0.5));
        CHECK(ng.rows[0].at(1) == doctest::Approx(0.5));
    }
}

TEST_CASE("assembled matrix: shapes, uniqueness, row-sum invariant, round trip") {
    Corpus c;
    for (const char* id : {"a", "b", "c"}) add_account(c, make_account(id));
    int id = 0;
    // enough repetition to clear the ngram threshold
    for (int i = 0; i < 20; i++)
        push_tweet(c, id, "a", "hello world", "en");
    for (int i = 0; i < 20; i++)
        push_tweet(c, id, "b", "hello world", "xx");
    push_tweet(c, id, "c", "rare", "en");
    sort_tweets(c);

    const FeatureMatrix m = assemble_features(c);
    CHECK(m.account_ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(m.schema.names.size() == m.schema.categories.size());
    CHECK(std::set<std::string>(m.schema.names.begin(), m.schema.names.end()).size() ==
          m.schema.names.size());
    // 17 behavioral + 31 language + ngrams
    std::size_t n_beh = 0, n_lang = 0, n_ngram = 0;
    for (FeatureCategory cat : m.schema.categories) {
        if (cat == FeatureCategory::behavioral) n_beh++;
        else if (cat == FeatureCategory::language) n_lang++;
        else n_ngram++;
    }
    CHECK(n_beh == 17);
    CHECK(n_lang == 31);
    // {hello, world, hello world} x {en, xx}; c's "rare" appears once -> dropped
    CHECK(n_ngram == 6);

    for (const auto& row : m.X)
        for (double v : row) CHECK(std::isfinite(v));

    // language fractions per row sum to <= 1 + 1e-9 (here exactly 1 for a,b,c)
    for (std::size_t r = 0; r < m.X.size(); r++) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.schema.names.size(); j++)
            if (m.schema.categories[j] == FeatureCategory::language) s += m.X[r][j];
        CHECK(s <= 1.0 + 1e-9);
        CHECK(s == doctest::Approx(1.0));
    }

    // "xx" is outside the universe: all of b's language mass lands on "other"
    const std::size_t other_col = static_cast<std::size_t>(
        std::find(m.schema.names.begin(), m.schema.names.end(), "other") -
        m.schema.names.begin());
    CHECK(m.X[1][other_col] == doctest::Approx(1.0));

    const auto dir = temp_dir();
    const std::string prefix = (dir / "fm").string();
    write_feature_matrix(m, prefix);
    const FeatureMatrix loaded = load_feature_matrix(prefix);
    CHECK(loaded.account_ids == m.account_ids);
    CHECK(loaded.schema.names == m.schema.names);
    REQUIRE(loaded.X.size() == m.X.size());
    for (std::size_t r = 0; r < m.X.size(); r++) {
        REQUIRE(loaded.X[r].size() == m.X[r].size());
        for (std::size_t j = 0; j < m.X[r].size(); j++) CHECK(loaded.X[r][j] == m.X[r][j]);
    }
}

namespace {

// A purely synthetic matrix: 17 "behavioral" columns where y is a function of
// exactly three of them, plus a small language block of noise.
FeatureMatrix planted_matrix(std::uint64_t seed, std::vector<int>& y_out) {
    std::mt19937_64 eng = make_engine(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = 400;

    FeatureMatrix m;
    for (const std::string& name : behavioral_feature_names()) {
        m.schema.names.push_back(name);
        m.schema.categories.push_back(FeatureCategory::behavioral);
    }
    for (const std::string& code : {std::string("en"), std::string("fr"), std::string("other")}) {
        m.schema.names.push_back(code);
        m.schema.categories.push_back(FeatureCategory::language);
    }
    m.X.resize(n, std::vector<double>(m.schema.names.size(), 0.0));
    y_out.resize(n);
    for (std::size_t i = 0; i < n; i++) {
        m.account_ids.push_back("acct" + std::to_string(i));
        for (double& v : m.X[i]) v = unif(eng);
        // signal lives in columns 2, 7, 11
        const int y = (m.X[i][2] + m.X[i][7] + m.X[i][11] > 1.5) ? 1 : 0;
        y_out[static_cast<std::size_t>(i)] = y;
    }
    return m;
}

}  // namespace

TEST_CASE("select_features recovers planted behavioral columns in >= 18/20 seeds") {
    const std::set<std::string> planted = {behavioral_feature_names()[2],
                                           behavioral_feature_names()[7],
                                           behavioral_feature_names()[11]};
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; seed++) {
        std::vector<int> y;
        const FeatureMatrix m = planted_matrix(seed, y);
        SelectSizes sizes;
        sizes.behavioral = 3;
        sizes.language = 0;
        sizes.ngram = 0;
        const FeatureSchema sel = select_features(m, y, sizes, seed);
        REQUIRE(sel.names.size() == 3);
        const std::set<std::string> got(sel.names.begin(), sel.names.end());
        if (got == planted) hits++;
    }
    CHECK(hits >= 18);
}

TEST_CASE("select_features clamps oversized requests and keeps block order") {
    std::vector<int> y;
    const FeatureMatrix m = planted_matrix(7, y);
    SelectSizes sizes;
    sizes.behavioral = 100;  // > 17
    sizes.language = 100;    // > 3
    sizes.ngram = 100;       // no ngram columns at all
    const FeatureSchema sel = select_features(m, y, sizes, 7);
    CHECK(sel.names.size() == 20);
    std::size_t n_beh = 0, n_lang = 0;
    for (std::size_t j = 0; j < sel.categories.size(); j++) {
        if (sel.categories[j] == FeatureCategory::behavioral) {
            n_beh++;
            CHECK(j < 17);  // behavioral block comes first
        } else if (sel.categories[j] == FeatureCategory::language) {
            n_lang++;
        }
    }
    CHECK(n_beh == 17);
    CHECK(n_lang == 3);
    // selected names are a subset of the input schema
    const std::set<std::string> all(m.schema.names.begin(), m.schema.names.end());
    for (const std::string& name : sel.names) CHECK(all.count(name) == 1);
}

TEST_CASE("select_features rejects single-class y") {
    std::vector<int> y;
    const FeatureMatrix m = planted_matrix(3, y);
    std::fill(y.begin(), y.end(), 1);
    SelectSizes sizes;
    CHECK_THROWS(select_features(m, y, sizes, 3));
}

TEST_CASE("reduce_matrix extracts the selected columns in schema order") {
    std::vector<int> y;
    const FeatureMatrix m = planted_matrix(11, y);
    FeatureSchema schema;
    schema.names = {m.schema.names[5], m.schema.names[1]};
    schema.categories = {FeatureCategory::behavioral, FeatureCategory::behavioral};
    const FeatureMatrix r = reduce_matrix(m, schema);
    CHECK(r.schema.names == schema.names);
    CHECK(r.account_ids == m.account_ids);
    REQUIRE(r.X.size() == m.X.size());
    for (std::size_t i = 0; i < m.X.size(); i++) {
        CHECK(r.X[i][0] == m.X[i][5]);
        CHECK(r.X[i][1] == m.X[i][1]);
    }

    FeatureSchema bad;
    bad.names = {"no_such_feature"};
    bad.categories = {FeatureCategory::behavioral};
    CHECK_THROWS(reduce_matrix(m, bad));
}

TEST_CASE("extraction is pure: permuting account order permutes rows identically") {
    Corpus c;
    for (const char* id : {"zeta", "alpha", "mid"}) add_account(c, make_account(id));
    int id = 0;
    for (int i = 0; i < 20; i++)
        push_tweet(c, id, "zeta", "hello world");
    for (int i = 0; i < 5; i++)
        push_tweet(c, id, "alpha", "quite different text");
    sort_tweets(c);

    const FeatureMatrix m = assemble_features(c);
    // rows are keyed by sorted account id; per-account extraction must agree
    for (std::size_t r = 0; r < m.account_ids.size(); r++) {
        const auto solo = extract_behavioral(c, m.account_ids[r]);
        for (std::size_t j = 0; j < solo.size(); j++) CHECK(m.X[r][j] == solo[j]);
    }
}
