#include "ioforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ioforge/rng.hpp"
#include "ioforge/timeutil.hpp"

namespace ioforge {

namespace {

std::string ascii_lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c += 32;
    }
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool get_string(const nlohmann::json& j, const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

bool get_count(const nlohmann::json& j, const char* key, std::int64_t& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        out = 0;
        return true;
    }
    if (it->is_number_integer()) {
        out = it->get<std::int64_t>();
        return out >= 0;
    }
    if (it->is_number_float()) {
        double v = it->get<double>();
        if (v < 0) return false;
        out = static_cast<std::int64_t>(v);
        return true;
    }
    return false;
}

// Parses one tweet JSONL object; returns false if it violates the schema.
bool parse_tweet(const nlohmann::json& j, Tweet& t) {
    if (!j.is_object()) return false;
    if (!get_string(j, "tweet_id", t.tweet_id) || t.tweet_id.empty()) return false;
    if (!get_string(j, "account_id", t.account_id) || t.account_id.empty()) return false;
    auto ct = j.find("created_at");
    if (ct == j.end()) return false;
    if (ct->is_string()) {
        auto parsed = parse_iso8601_utc(ct->get<std::string>());
        if (!parsed) return false;
        t.created_at = *parsed;
    } else if (ct->is_number_integer()) {
        t.created_at = ct->get<std::int64_t>();
    } else {
        return false;
    }
    if (!get_string(j, "text", t.text)) return false;
    if (!get_string(j, "lang", t.lang)) t.lang = "und";

    std::string rt_acc, rt_tw;
    const bool has_rt_acc = get_string(j, "retweet_of_account", rt_acc) && !rt_acc.empty();
    const bool has_rt_tw = get_string(j, "retweet_of_tweet", rt_tw) && !rt_tw.empty();
    auto isrt = j.find("is_retweet");
    if (isrt != j.end() && !isrt->is_null()) {
        if (!isrt->is_boolean()) return false;
        t.is_retweet = isrt->get<bool>();
    } else {
        t.is_retweet = has_rt_acc;
    }
    if (t.is_retweet != has_rt_acc) return false;  // is_retweet ⇔ retweet_of_account
    if (has_rt_acc) t.retweet_of_account = rt_acc;
    if (has_rt_tw) t.retweet_of_tweet = rt_tw;

    t.hashtags.clear();
    t.urls.clear();
    auto ht = j.find("hashtags");
    if (ht != j.end() && !ht->is_null()) {
        if (!ht->is_array()) return false;
        for (const auto& h : *ht) {
            if (!h.is_string()) return false;
            t.hashtags.push_back(ascii_lower(h.get<std::string>()));
        }
    }
    auto ur = j.find("urls");
    if (ur != j.end() && !ur->is_null()) {
        if (!ur->is_array()) return false;
        for (const auto& u : *ur) {
            if (!u.is_string()) return false;
            t.urls.push_back(u.get<std::string>());
        }
    }
    return true;
}

bool parse_account(const nlohmann::json& j, AccountRecord& a) {
    if (!j.is_object()) return false;
    if (!get_string(j, "account_id", a.account_id) || a.account_id.empty()) return false;
    if (!get_string(j, "screen_name", a.screen_name)) a.screen_name = "";
    if (!get_count(j, "profile_length", a.profile_length)) return false;
    if (!get_count(j, "follower_count", a.follower_count)) return false;
    if (!get_count(j, "following_count", a.following_count)) return false;
    if (!get_count(j, "num_faves", a.num_faves)) return false;
    std::string status;
    a.status = get_string(j, "status", status) ? account_status_from_string(status)
                                               : AccountStatus::unknown;
    std::string label;
    a.known_label = get_string(j, "known_label", label) ? known_label_from_string(label)
                                                        : KnownLabel::unknown;
    return true;
}

void read_truth_list(const std::string& path, KnownLabel label,
                     std::map<std::string, AccountRecord>& accounts) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open truth list: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::string id = trim(line);
        if (id.empty()) continue;
        auto it = accounts.find(id);
        if (it != accounts.end()) it->second.known_label = label;
    }
}

}  // namespace

std::string to_string(AccountStatus s) {
    switch (s) {
        case AccountStatus::active: return "active";
        case AccountStatus::suspended: return "suspended";
        case AccountStatus::deleted: return "deleted";
        default: return "unknown";
    }
}

std::string to_string(KnownLabel l) {
    switch (l) {
        case KnownLabel::known_io: return "known_io";
        case KnownLabel::known_benign: return "known_benign";
        default: return "unknown";
    }
}

AccountStatus account_status_from_string(const std::string& s) {
    if (s == "active") return AccountStatus::active;
    if (s == "suspended") return AccountStatus::suspended;
    if (s == "deleted") return AccountStatus::deleted;
    return AccountStatus::unknown;
}

KnownLabel known_label_from_string(const std::string& s) {
    if (s == "known_io") return KnownLabel::known_io;
    if (s == "known_benign") return KnownLabel::known_benign;
    return KnownLabel::unknown;
}

Corpus ingest_jsonl(const std::string& tweets_path, const IngestOptions& opts) {
    Corpus corpus;
    std::ifstream in(tweets_path);
    if (!in) throw std::runtime_error("cannot open tweet file: " + tweets_path);

    std::set<std::string> seen_ids;
    std::size_t line_no = 0, nonempty = 0, malformed = 0, first_bad = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++nonempty;
        Tweet t;
        const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        bool ok = !j.is_discarded() && parse_tweet(j, t);
        if (ok && !seen_ids.insert(t.tweet_id).second) ok = false;  // duplicate id
        if (!ok) {
            ++malformed;
            if (first_bad == 0) first_bad = line_no;
            continue;
        }
        corpus.tweets.push_back(std::move(t));
    }
    if (nonempty > 0 &&
        static_cast<double>(malformed) > opts.max_malformed_fraction * static_cast<double>(nonempty)) {
        throw std::runtime_error("too many malformed lines in " + tweets_path + " (" +
                                 std::to_string(malformed) + "/" + std::to_string(nonempty) +
                                 "); first malformed line: " + std::to_string(first_bad));
    }
    corpus.malformed_count = malformed;

    if (!opts.accounts_path.empty()) {
        std::ifstream ain(opts.accounts_path);
        if (!ain) throw std::runtime_error("cannot open account file: " + opts.accounts_path);
        std::size_t aline = 0, anonempty = 0, amalformed = 0, afirst_bad = 0;
        while (std::getline(ain, line)) {
            ++aline;
            if (trim(line).empty()) continue;
            ++anonempty;
            AccountRecord a;
            const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            bool ok = !j.is_discarded() && parse_account(j, a);
            if (ok && corpus.accounts.count(a.account_id)) ok = false;  // duplicate id
            if (!ok) {
                ++amalformed;
                if (afirst_bad == 0) afirst_bad = aline;
                continue;
            }
            corpus.accounts.emplace(a.account_id, std::move(a));
        }
        if (anonempty > 0 && static_cast<double>(amalformed) >
                                 opts.max_malformed_fraction * static_cast<double>(anonempty)) {
            throw std::runtime_error("too many malformed lines in " + opts.accounts_path + " (" +
                                     std::to_string(amalformed) + "/" + std::to_string(anonempty) +
                                     "); first malformed line: " + std::to_string(afirst_bad));
        }
        corpus.malformed_count += amalformed;
    }

    // Referential integrity: synthesize accounts for authors and retweet
    // sources missing from the account file.
    for (const Tweet& t : corpus.tweets) {
        if (!corpus.accounts.count(t.account_id)) {
            AccountRecord a;
            a.account_id = t.account_id;
            corpus.accounts.emplace(t.account_id, std::move(a));
        }
        if (t.retweet_of_account && !corpus.accounts.count(*t.retweet_of_account)) {
            AccountRecord a;
            a.account_id = *t.retweet_of_account;
            corpus.accounts.emplace(*t.retweet_of_account, std::move(a));
        }
    }

    read_truth_list(opts.known_io_path, KnownLabel::known_io, corpus.accounts);
    read_truth_list(opts.known_benign_path, KnownLabel::known_benign, corpus.accounts);

    std::sort(corpus.tweets.begin(), corpus.tweets.end(), [](const Tweet& a, const Tweet& b) {
        return a.created_at != b.created_at ? a.created_at < b.created_at
                                            : a.tweet_id < b.tweet_id;
    });
    if (!corpus.tweets.empty()) {
        corpus.time_range =
            TimeRange{corpus.tweets.front().created_at, corpus.tweets.back().created_at};
    }
    return corpus;
}

Corpus filter(const Corpus& corpus, const std::vector<std::string>& keywords,
              const std::vector<std::string>& langs, TimeRange window) {
    if (window.start > window.end) {
        throw std::invalid_argument("filter: window start must be <= end");
    }
    std::vector<std::string> kw_lower;
    kw_lower.reserve(keywords.size());
    for (const auto& k : keywords) kw_lower.push_back(ascii_lower(k));

    Corpus out;
    out.time_range = window;
    std::set<std::string> keep_accounts;
    for (const Tweet& t : corpus.tweets) {
        if (t.created_at < window.start || t.created_at > window.end) continue;
        if (!langs.empty() &&
            std::find(langs.begin(), langs.end(), t.lang) == langs.end()) {
            continue;
        }
        if (!kw_lower.empty()) {
            const std::string text = ascii_lower(t.text);
            bool hit = false;
            for (const auto& k : kw_lower) {
                if (!k.empty() && text.find(k) != std::string::npos) {
                    hit = true;
                    break;
                }
            }
            if (!hit) continue;
        }
        keep_accounts.insert(t.account_id);
        if (t.retweet_of_account) keep_accounts.insert(*t.retweet_of_account);
        out.tweets.push_back(t);
    }
    for (const auto& id : keep_accounts) {
        auto it = corpus.accounts.find(id);
        if (it != corpus.accounts.end()) {
            out.accounts.emplace(id, it->second);
        } else {
            AccountRecord a;
            a.account_id = id;
            out.accounts.emplace(id, std::move(a));
        }
    }
    return out;
}

Corpus cap_tweets_per_account(const Corpus& corpus, std::size_t cap, std::uint64_t seed) {
    if (cap < 1) throw std::invalid_argument("cap_tweets_per_account: cap must be >= 1");
    std::map<std::string, std::vector<std::size_t>> by_account;
    for (std::size_t i = 0; i < corpus.tweets.size(); ++i) {
        by_account[corpus.tweets[i].account_id].push_back(i);
    }
    std::vector<char> keep(corpus.tweets.size(), 1);
    for (auto& [account_id, idxs] : by_account) {
        if (idxs.size() <= cap) continue;
        auto eng = make_engine(derive_seed(seed, account_id));
        // Partial Fisher-Yates: the first `cap` slots are the retained sample.
        for (std::size_t i = 0; i < cap; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idxs.size() - 1);
            std::swap(idxs[i], idxs[pick(eng)]);
        }
        for (std::size_t i = cap; i < idxs.size(); ++i) keep[idxs[i]] = 0;
    }
    Corpus out;
    out.accounts = corpus.accounts;
    out.time_range = corpus.time_range;
    for (std::size_t i = 0; i < corpus.tweets.size(); ++i) {
        if (keep[i]) out.tweets.push_back(corpus.tweets[i]);
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::string& tweets_path,
                 const std::string& accounts_path) {
    std::ofstream tout(tweets_path);
    if (!tout) throw std::runtime_error("cannot write tweet file: " + tweets_path);
    for (const Tweet& t : corpus.tweets) {
        nlohmann::ordered_json j;
        j["tweet_id"] = t.tweet_id;
        j["account_id"] = t.account_id;
        j["created_at"] = format_iso8601_utc(t.created_at);
        j["text"] = t.text;
        j["lang"] = t.lang;
        j["is_retweet"] = t.is_retweet;
        if (t.retweet_of_account) j["retweet_of_account"] = *t.retweet_of_account;
        if (t.retweet_of_tweet) j["retweet_of_tweet"] = *t.retweet_of_tweet;
        j["hashtags"] = t.hashtags;
        j["urls"] = t.urls;
        tout << j.dump() << '\n';
    }
    std::ofstream aout(accounts_path);
    if (!aout) throw std::runtime_error("cannot write account file: " + accounts_path);
    for (const auto& [id, a] : corpus.accounts) {
        nlohmann::ordered_json j;
        j["account_id"] = a.account_id;
        j["screen_name"] = a.screen_name;
        j["profile_length"] = a.profile_length;
        j["follower_count"] = a.follower_count;
        j["following_count"] = a.following_count;
        j["num_faves"] = a.num_faves;
        j["status"] = to_string(a.status);
        j["known_label"] = to_string(a.known_label);
        aout << j.dump() << '\n';
    }
}

}  // namespace ioforge
