#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ioforge {

enum class AccountStatus { active, suspended, deleted, unknown };
enum class KnownLabel { known_io, known_benign, unknown };

std::string to_string(AccountStatus s);
std::string to_string(KnownLabel l);
AccountStatus account_status_from_string(const std::string& s);
KnownLabel known_label_from_string(const std::string& s);

struct Tweet {
    std::string tweet_id;
    std::string account_id;
    std::int64_t created_at = 0;  // UTC seconds
    std::string text;
    std::string lang;  // BCP-47-like code, e.g. "en", "fr", "und"
    bool is_retweet = false;
    std::optional<std::string> retweet_of_account;
    std::optional<std::string> retweet_of_tweet;
    std::vector<std::string> hashtags;  // lowercase
    std::vector<std::string> urls;

    bool operator==(const Tweet&) const = default;
};

struct AccountRecord {
    std::string account_id;
    std::string screen_name;
    std::int64_t profile_length = 0;  // characters in profile description
    std::int64_t follower_count = 0;
    std::int64_t following_count = 0;
    std::int64_t num_faves = 0;
    AccountStatus status = AccountStatus::unknown;
    KnownLabel known_label = KnownLabel::unknown;

    bool operator==(const AccountRecord&) const = default;
};

struct TimeRange {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool operator==(const TimeRange&) const = default;
};

struct Corpus {
    std::vector<Tweet> tweets;  // sorted by created_at ascending, ties by tweet_id
    std::map<std::string, AccountRecord> accounts;
    std::optional<TimeRange> time_range;
    std::size_t malformed_count = 0;

    bool operator==(const Corpus& other) const {
        return tweets == other.tweets && accounts == other.accounts &&
               time_range == other.time_range;
    }
};

struct IngestOptions {
    std::string accounts_path;      // optional account JSONL ("" = none)
    std::string known_io_path;      // newline-delimited account_ids
    std::string known_benign_path;  // newline-delimited account_ids
    double max_malformed_fraction = 0.10;
};

// Ingests a tweet JSONL file (plus optional account JSONL and truth lists)
// into a Corpus with referential integrity: accounts missing from the account
// file are synthesized with zeroed metadata and status=unknown. Malformed
// lines are skipped and counted; if more than max_malformed_fraction of a
// file's nonempty lines are malformed, throws naming the first bad line.
Corpus ingest_jsonl(const std::string& tweets_path, const IngestOptions& opts = {});

// Retains tweets matching (any keyword as case-insensitive substring of text,
// or keywords empty) AND (lang in langs, or langs empty) AND created_at in
// [window.start, window.end]; accounts restricted to authors of retained
// tweets plus their retweet sources. The result's declared time range is the
// window.
Corpus filter(const Corpus& corpus, const std::vector<std::string>& keywords,
              const std::vector<std::string>& langs, TimeRange window);

// Caps each account at `cap` tweets via a seeded uniform sample without
// replacement (per-account sub-seed); chronological order is preserved.
Corpus cap_tweets_per_account(const Corpus& corpus, std::size_t cap, std::uint64_t seed);

// Writes the corpus back out in the ingestion schema (accounts carry an
// optional "known_label" field so truth survives a round trip).
void save_corpus(const Corpus& corpus, const std::string& tweets_path,
                 const std::string& accounts_path);

}  // namespace ioforge
