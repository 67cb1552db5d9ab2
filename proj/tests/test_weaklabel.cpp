#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "ioforge/rng.hpp"
#include "ioforge/weaklabel.hpp"

using namespace ioforge;

namespace {

Tweet make_tweet(const std::string& id, const std::string& account, const std::string& lang,
                 std::vector<std::string> urls = {}, const std::string& rt_account = "") {
    Tweet t;
    t.tweet_id = id;
    t.account_id = account;
    t.text = "text";
    t.lang = lang;
    t.urls = std::move(urls);
    if (!rt_account.empty()) {
        t.is_retweet = true;
        t.retweet_of_account = rt_account;
    }
    return t;
}

Corpus corpus_of(std::vector<Tweet> tweets) {
    Corpus c;
    for (auto& t : tweets) {
        if (!c.accounts.count(t.account_id)) {
            AccountRecord a;
            a.account_id = t.account_id;
            c.accounts.emplace(t.account_id, a);
        }
        c.tweets.push_back(std::move(t));
    }
    return c;
}

int lf_index(const std::string& name) {
    const auto& names = lf_names();
    return static_cast<int>(std::find(names.begin(), names.end(), name) - names.begin());
}

}  // namespace

TEST_CASE("profile link and language aggregates") {
    Corpus c = corpus_of({
        make_tweet("t1", "a", "en", {"https://x.com/1"}),
        make_tweet("t2", "a", "fr", {"https://y.com/2"}),
        make_tweet("t3", "a", "und"),
        make_tweet("t4", "a", "und"),
    });
    auto profiles = compute_profiles(c, NewsList{});
    const BehavioralProfile& p = profiles.at("a");
    CHECK(p.avg_num_links == doctest::Approx(0.5));
    CHECK(p.ratio_tweets_w_links_all_tweets == doctest::Approx(0.5));
    CHECK(p.num_langs_used == 3);
    CHECK(p.und_fraction == doctest::Approx(0.5));
}

TEST_CASE("zero-tweet account has zeroed tweet-derived fields") {
    Corpus c = corpus_of({make_tweet("t1", "a", "en")});
    AccountRecord ghost;
    ghost.account_id = "ghost";
    ghost.follower_count = 10;
    ghost.following_count = 4;
    c.accounts.emplace("ghost", ghost);
    auto profiles = compute_profiles(c, NewsList{});
    const BehavioralProfile& p = profiles.at("ghost");
    CHECK(p.avg_num_links == 0.0);
    CHECK(p.num_langs_used == 0);
    CHECK(p.und_fraction == 0.0);
    CHECK(p.ratio_tweets_w_links_all_tweets == 0.0);
    CHECK(p.num_external_news_interactions == 0);
    CHECK(p.follower_count == 10);
    CHECK(p.followers_following_ratio == doctest::Approx(2.5));
}

TEST_CASE("news interactions count matching tweets via domain or retweet source") {
    NewsList news;
    news.entries = {"rt.com", "newsbot"};
    Corpus c = corpus_of({
        make_tweet("t1", "a", "en", {"https://www.rt.com/story"}),       // domain hit
        make_tweet("t2", "a", "en", {"https://on.rt.com/x"}),            // subdomain hit
        make_tweet("t3", "a", "en", {"https://unrelated.com/foo"}),      // miss
        make_tweet("t4", "a", "en", {}, "newsbot"),                      // retweet-source hit
        make_tweet("t5", "a", "en", {}, "friend"),                       // miss
        make_tweet("t6", "a", "en", {"https://court.com/rt.com"}),       // path is not a host
    });
    auto profiles = compute_profiles(c, news);
    CHECK(profiles.at("a").num_external_news_interactions == 3);
}

TEST_CASE("labeling function predicates") {
    BehavioralProfile base;
    base.profile_length = 10;   // avoid LF 'profile_length'
    base.num_faves = 25;        // avoid few/too-many faves
    base.num_external_news_interactions = 3;  // avoid both news LFs

    SUBCASE("empty profile votes IO") {
        BehavioralProfile p = base;
        p.profile_length = 0;
        CHECK(apply_lfs(p)[lf_index("profile_length")] == LFVote::IO);
    }
    SUBCASE("normal follower/following ratio votes REAL") {
        BehavioralProfile p = base;
        p.follower_count = 200;
        p.followers_following_ratio = 2.0;
        CHECK(apply_lfs(p)[lf_index("normal_people_ff_ratio")] == LFVote::REAL);
    }
    SUBCASE("mid-range faves abstain everywhere fave-related") {
        BehavioralProfile p = base;
        p.num_faves = 25000;
        auto v = apply_lfs(p);
        CHECK(v[lf_index("few_faves")] == LFVote::ABSTAIN);
        CHECK(v[lf_index("too_many_faves")] == LFVote::ABSTAIN);
        CHECK(v[lf_index("normal_num_likes")] == LFVote::ABSTAIN);
    }
    SUBCASE("purity: identical profile gives identical votes") {
        CHECK(apply_lfs(base) == apply_lfs(base));
    }
    SUBCASE("boundary values abstain on strict inequalities") {
        BehavioralProfile p = base;
        p.following_count = 3000;  // needs > 3000
        p.num_faves = 20;          // needs < 20
        p.und_fraction = 0.05;     // needs > 0.05
        auto v = apply_lfs(p);
        CHECK(v[lf_index("num_following")] == LFVote::ABSTAIN);
        CHECK(v[lf_index("few_faves")] == LFVote::ABSTAIN);
        CHECK(v[lf_index("many_und_tweets")] == LFVote::ABSTAIN);
    }
}

TEST_CASE("vote aggregation ratios") {
    LabelMatrix m;
    m.lf_names = lf_names();
    m.account_ids = {"a", "b"};
    std::vector<LFVote> row(kNumLFs, LFVote::ABSTAIN);
    row[0] = row[1] = row[2] = LFVote::IO;
    row[8] = LFVote::REAL;
    m.votes.push_back(row);
    m.votes.push_back(std::vector<LFVote>(kNumLFs, LFVote::ABSTAIN));

    WeakLabels w = fit_label_model(m, LabelModelMethod::vote);
    CHECK(w.io_probability[0] == doctest::Approx(0.75));
    CHECK(w.io_probability[1] == doctest::Approx(0.5));
}

TEST_CASE("all-abstain matrix is an error") {
    LabelMatrix m;
    m.lf_names = lf_names();
    m.account_ids = {"a"};
    m.votes.push_back(std::vector<LFVote>(kNumLFs, LFVote::ABSTAIN));
    CHECK_THROWS(fit_label_model(m, LabelModelMethod::vote));
    CHECK_THROWS(fit_label_model(m, LabelModelMethod::em));
}

TEST_CASE("EM recovers planted accuracies within 0.05") {
    const std::size_t N = 2000;
    const double true_pi = 0.3;
    std::vector<double> true_acc(kNumLFs);
    for (std::size_t j = 0; j < kNumLFs; ++j) true_acc[j] = (j % 2 == 0) ? 0.9 : 0.6;

    LabelMatrix m;
    for (std::size_t j = 0; j < kNumLFs; ++j) {
        char name[8];
        std::snprintf(name, sizeof(name), "lf%02zu", j);
        m.lf_names.push_back(name);
    }
    auto eng = make_engine(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < N; ++i) {
        m.account_ids.push_back("acct" + std::to_string(i));
        const bool io = u(eng) < true_pi;
        std::vector<LFVote> row(kNumLFs, LFVote::ABSTAIN);
        for (std::size_t j = 0; j < kNumLFs; ++j) {
            if (u(eng) < 0.3) continue;  // abstain
            const bool correct = u(eng) < true_acc[j];
            const bool vote_io = correct == io;
            row[j] = vote_io ? LFVote::IO : LFVote::REAL;
        }
        m.votes.push_back(std::move(row));
    }

    WeakLabels w = fit_label_model(m, LabelModelMethod::em);
    CHECK(std::abs(w.class_prior - true_pi) < 0.05);
    for (std::size_t j = 0; j < kNumLFs; ++j) {
        CHECK(std::abs(w.lf_accuracies.at(m.lf_names[j]) - true_acc[j]) < 0.05);
    }

    SUBCASE("EM posterior is invariant to column order") {
        LabelMatrix rev;
        rev.account_ids = m.account_ids;
        for (std::size_t j = 0; j < kNumLFs; ++j) {
            rev.lf_names.push_back(m.lf_names[kNumLFs - 1 - j]);
        }
        for (const auto& row : m.votes) {
            std::vector<LFVote> r(row.rbegin(), row.rend());
            rev.votes.push_back(std::move(r));
        }
        WeakLabels w2 = fit_label_model(rev, LabelModelMethod::em);
        for (std::size_t i = 0; i < N; ++i) {
            CHECK(std::abs(w2.io_probability[i] - w.io_probability[i]) <= 1e-9);
        }
    }
    SUBCASE("all-abstain rows get the fitted prior") {
        LabelMatrix m2 = m;
        m2.account_ids.push_back("silent");
        m2.votes.push_back(std::vector<LFVote>(kNumLFs, LFVote::ABSTAIN));
        WeakLabels w2 = fit_label_model(m2, LabelModelMethod::em);
        CHECK(w2.io_probability.back() == doctest::Approx(w2.class_prior).epsilon(1e-12));
    }
}

TEST_CASE("threshold boundary and monotone sweep") {
    WeakLabels w;
    w.account_ids = {"a", "b", "c", "d"};
    w.io_probability = {0.70, 0.699, 0.95, 0.45};

    auto labels = threshold_labels(w, 0.7);
    CHECK(labels == std::vector<int>{1, 0, 1, 0});

    std::vector<int> positives;
    for (double t : {0.5, 0.7, 0.9}) {
        auto l = threshold_labels(w, t);
        positives.push_back(std::accumulate(l.begin(), l.end(), 0));
    }
    CHECK(positives[0] >= positives[1]);
    CHECK(positives[1] >= positives[2]);
    CHECK(positives == std::vector<int>{3, 2, 1});

    CHECK_THROWS(threshold_labels(w, 0.0));
    CHECK_THROWS(threshold_labels(w, 1.0));
}

TEST_CASE("weak labels CSV round-trips probabilities and labels") {
    LabelMatrix m;
    m.lf_names = lf_names();
    m.account_ids = {"a", "b"};
    std::vector<LFVote> row(kNumLFs, LFVote::ABSTAIN);
    row[0] = LFVote::IO;
    m.votes.push_back(row);
    row[0] = LFVote::ABSTAIN;
    row[9] = LFVote::REAL;
    m.votes.push_back(row);
    WeakLabels w = fit_label_model(m, LabelModelMethod::vote);

    auto dir = std::filesystem::temp_directory_path() / "ioforge_test_weaklabel";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "weak.csv").string();
    write_weak_labels_csv(w, m, path);

    WeakLabels back = load_weak_labels_csv(path);
    CHECK(back.account_ids == w.account_ids);
    REQUIRE(back.io_probability.size() == 2);
    CHECK(back.io_probability[0] == w.io_probability[0]);
    CHECK(back.io_probability[1] == w.io_probability[1]);
    CHECK(back.labels == w.labels);
}
