#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "ioforge/corpus.hpp"
#include "ioforge/timeutil.hpp"

namespace fs = std::filesystem;
using namespace ioforge;

namespace {

fs::path test_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "ioforge_test_corpus";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    fs::path p = test_dir() / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::string tweet_line(const std::string& id, const std::string& account,
                       const std::string& time, const std::string& text,
                       const std::string& lang = "en", const std::string& rt_account = "",
                       const std::string& extra = "") {
    std::string s = "{\"tweet_id\":\"" + id + "\",\"account_id\":\"" + account +
                    "\",\"created_at\":\"" + time + "\",\"text\":\"" + text + "\",\"lang\":\"" +
                    lang + "\"";
    if (!rt_account.empty()) {
        s += ",\"is_retweet\":true,\"retweet_of_account\":\"" + rt_account + "\"";
    }
    s += extra;
    s += "}\n";
    return s;
}

}  // namespace

TEST_CASE("ingest counts tweets, accounts, and synthesized retweet sources") {
    const std::string tweets = write_file(
        "basic_tweets.jsonl",
        tweet_line("t1", "a1", "2017-05-01T10:00:00Z", "bonjour macron") +
            tweet_line("t2", "a1", "2017-05-01T11:00:00Z", "macron again") +
            tweet_line("t3", "a2", "2017-05-01T09:00:00Z", "rt content", "fr", "a3"));
    const std::string accounts = write_file(
        "basic_accounts.jsonl",
        "{\"account_id\":\"a1\",\"screen_name\":\"one\",\"profile_length\":10,"
        "\"follower_count\":5,\"following_count\":2,\"num_faves\":7,\"status\":\"active\"}\n"
        "{\"account_id\":\"a2\",\"screen_name\":\"two\",\"profile_length\":0,"
        "\"follower_count\":1,\"following_count\":1,\"num_faves\":0,\"status\":\"suspended\"}\n");

    IngestOptions opts;
    opts.accounts_path = accounts;
    Corpus c = ingest_jsonl(tweets, opts);

    CHECK(c.tweets.size() == 3);
    CHECK(c.accounts.size() == 3);  // a1, a2 from file; a3 synthesized
    CHECK(c.malformed_count == 0);
    REQUIRE(c.accounts.count("a3") == 1);
    CHECK(c.accounts.at("a3").status == AccountStatus::unknown);
    CHECK(c.accounts.at("a3").follower_count == 0);
    CHECK(c.accounts.at("a1").status == AccountStatus::active);

    // sorted by created_at ascending
    CHECK(c.tweets[0].tweet_id == "t3");
    CHECK(c.tweets[1].tweet_id == "t1");
    CHECK(c.tweets[2].tweet_id == "t2");
    REQUIRE(c.time_range.has_value());
    CHECK(c.time_range->start == *parse_iso8601_utc("2017-05-01T09:00:00Z"));
    CHECK(c.time_range->end == *parse_iso8601_utc("2017-05-01T11:00:00Z"));
}

TEST_CASE("empty file gives an empty corpus with no time range") {
    const std::string tweets = write_file("empty.jsonl", "");
    Corpus c = ingest_jsonl(tweets);
    CHECK(c.tweets.empty());
    CHECK(c.accounts.empty());
    CHECK_FALSE(c.time_range.has_value());
}

TEST_CASE("a line missing tweet_id is counted as malformed, rest kept") {
    std::string content;
    for (int i = 0; i < 11; ++i) {
        content += tweet_line("t" + std::to_string(i), "a1",
                              "2017-05-01T10:00:00Z", "hello");
    }
    content += "{\"account_id\":\"a1\",\"created_at\":\"2017-05-01T10:00:00Z\",\"text\":\"x\"}\n";
    const std::string tweets = write_file("missing_id.jsonl", content);
    Corpus c = ingest_jsonl(tweets);
    CHECK(c.tweets.size() == 11);
    CHECK(c.malformed_count == 1);
}

TEST_CASE("more than 10% malformed lines aborts naming the first bad line") {
    const std::string tweets = write_file(
        "too_bad.jsonl", tweet_line("t1", "a1", "2017-05-01T10:00:00Z", "ok") +
                             "this is not json\n" +
                             tweet_line("t2", "a1", "2017-05-01T10:00:01Z", "ok"));
    try {
        ingest_jsonl(tweets);
        FAIL("expected ingestion error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2") != std::string::npos);  // first malformed line number
    }
}

TEST_CASE("duplicate tweet ids are malformed") {
    std::string content;
    for (int i = 0; i < 10; ++i) {
        content += tweet_line("t" + std::to_string(i), "a1", "2017-05-01T10:00:00Z", "x");
    }
    content += tweet_line("t0", "a1", "2017-05-01T10:00:05Z", "dup");
    Corpus c = ingest_jsonl(write_file("dups.jsonl", content));
    CHECK(c.tweets.size() == 10);
    CHECK(c.malformed_count == 1);
}

TEST_CASE("is_retweet inconsistency is malformed") {
    std::string content;
    for (int i = 0; i < 10; ++i) {
        content += tweet_line("t" + std::to_string(i), "a1", "2017-05-01T10:00:00Z", "x");
    }
    content +=
        "{\"tweet_id\":\"bad\",\"account_id\":\"a1\",\"created_at\":\"2017-05-01T10:00:00Z\","
        "\"text\":\"x\",\"lang\":\"en\",\"is_retweet\":true}\n";
    Corpus c = ingest_jsonl(write_file("rt_bad.jsonl", content));
    CHECK(c.tweets.size() == 10);
    CHECK(c.malformed_count == 1);
}

TEST_CASE("truth lists set known labels") {
    const std::string tweets = write_file(
        "truth_tweets.jsonl", tweet_line("t1", "io1", "2017-05-01T10:00:00Z", "x") +
                                  tweet_line("t2", "real1", "2017-05-01T10:00:01Z", "y") +
                                  tweet_line("t3", "other", "2017-05-01T10:00:02Z", "z"));
    IngestOptions opts;
    opts.known_io_path = write_file("io.txt", "io1\nmissing_account\n");
    opts.known_benign_path = write_file("benign.txt", "real1\n");
    Corpus c = ingest_jsonl(tweets, opts);
    CHECK(c.accounts.at("io1").known_label == KnownLabel::known_io);
    CHECK(c.accounts.at("real1").known_label == KnownLabel::known_benign);
    CHECK(c.accounts.at("other").known_label == KnownLabel::unknown);
}

TEST_CASE("filter matches keywords case-insensitively with lang and window") {
    const std::string tweets = write_file(
        "filt_tweets.jsonl",
        tweet_line("t1", "a1", "2017-05-01T10:00:00Z", "Vive MACRON!", "fr") +
            tweet_line("t2", "a2", "2017-05-01T11:00:00Z", "macron stuff", "en") +
            tweet_line("t3", "a3", "2017-05-01T12:00:00Z", "unrelated", "fr") +
            tweet_line("t4", "a4", "2018-01-01T00:00:00Z", "macron later", "fr"));
    Corpus c = ingest_jsonl(tweets);
    TimeRange window{*parse_iso8601_utc("2017-05-01T00:00:00Z"),
                     *parse_iso8601_utc("2017-05-02T00:00:00Z")};

    Corpus f = filter(c, {"macron"}, {"fr"}, window);
    REQUIRE(f.tweets.size() == 1);
    CHECK(f.tweets[0].tweet_id == "t1");
    CHECK(f.accounts.size() == 1);
    REQUIRE(f.time_range.has_value());
    CHECK(f.time_range->start == window.start);

    SUBCASE("empty keyword and lang lists are identity on tweets") {
        TimeRange all{0, *parse_iso8601_utc("2030-01-01T00:00:00Z")};
        Corpus g = filter(c, {}, {}, all);
        CHECK(g.tweets == c.tweets);
    }
    SUBCASE("window excluding everything yields empty corpus") {
        TimeRange none{0, 1};
        Corpus g = filter(c, {}, {}, none);
        CHECK(g.tweets.empty());
        CHECK(g.accounts.empty());
    }
    SUBCASE("filter is idempotent") {
        Corpus once = filter(c, {"macron"}, {"fr"}, window);
        Corpus twice = filter(once, {"macron"}, {"fr"}, window);
        CHECK(once == twice);
    }
}

TEST_CASE("filter keeps retweet sources of retained tweets") {
    const std::string tweets = write_file(
        "filt_rt.jsonl",
        tweet_line("t1", "a1", "2017-05-01T10:00:00Z", "macron echo", "fr", "src1"));
    Corpus c = ingest_jsonl(tweets);
    TimeRange window{0, *parse_iso8601_utc("2030-01-01T00:00:00Z")};
    Corpus f = filter(c, {"macron"}, {}, window);
    CHECK(f.accounts.count("src1") == 1);
}

TEST_CASE("cap_tweets_per_account samples deterministically") {
    std::string content;
    for (int i = 0; i < 20; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "2017-05-01T10:%02d:00Z", i);
        content += tweet_line("t" + std::to_string(i), "big", buf, "x");
    }
    content += tweet_line("s1", "small", "2017-05-01T09:00:00Z", "y");
    Corpus c = ingest_jsonl(write_file("cap.jsonl", content));

    Corpus capped = cap_tweets_per_account(c, 5, 42);
    std::set<std::string> big_ids, small_ids;
    for (const auto& t : capped.tweets) {
        (t.account_id == "big" ? big_ids : small_ids).insert(t.tweet_id);
    }
    CHECK(big_ids.size() == 5);
    CHECK(small_ids.size() == 1);  // under cap: all retained

    // chronological order preserved
    for (std::size_t i = 1; i < capped.tweets.size(); ++i) {
        CHECK(capped.tweets[i - 1].created_at <= capped.tweets[i].created_at);
    }

    Corpus again = cap_tweets_per_account(c, 5, 42);
    CHECK(capped == again);

    Corpus other_seed = cap_tweets_per_account(c, 5, 43);
    std::set<std::string> other_ids;
    for (const auto& t : other_seed.tweets) {
        if (t.account_id == "big") other_ids.insert(t.tweet_id);
    }
    CHECK(other_ids.size() == 5);
    CHECK(other_ids != big_ids);  // different seed, different sample (w.h.p.)
}

TEST_CASE("ingest -> save -> ingest round-trips field by field") {
    const std::string tweets = write_file(
        "rt_tweets.jsonl",
        tweet_line("t1", "a1", "2017-05-01T10:00:00Z", "hello #world", "en", "",
                   ",\"hashtags\":[\"World\"],\"urls\":[\"https://ex.com/a\"]") +
            tweet_line("t2", "a2", "2017-05-01T11:00:00Z", "RT body", "fr", "a1"));
    const std::string accounts = write_file(
        "rt_accounts.jsonl",
        "{\"account_id\":\"a1\",\"screen_name\":\"one\",\"profile_length\":12,"
        "\"follower_count\":3,\"following_count\":4,\"num_faves\":5,\"status\":\"deleted\"}\n");
    IngestOptions opts;
    opts.accounts_path = accounts;
    opts.known_io_path = write_file("rt_io.txt", "a2\n");
    Corpus c = ingest_jsonl(tweets, opts);
    CHECK(c.tweets[0].hashtags == std::vector<std::string>{"world"});  // lowercased

    const std::string tweets2 = (test_dir() / "rt_tweets_out.jsonl").string();
    const std::string accounts2 = (test_dir() / "rt_accounts_out.jsonl").string();
    save_corpus(c, tweets2, accounts2);
    IngestOptions opts2;
    opts2.accounts_path = accounts2;
    Corpus c2 = ingest_jsonl(tweets2, opts2);
    CHECK(c == c2);
    CHECK(c2.accounts.at("a2").known_label == KnownLabel::known_io);
}

TEST_CASE("missing tweet file raises") {
    CHECK_THROWS_AS(ingest_jsonl((test_dir() / "no_such_file.jsonl").string()),
                    std::runtime_error);
}
