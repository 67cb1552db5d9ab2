#include "ioforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "ioforge/rng.hpp"
#include "ioforge/timeutil.hpp"
#include "ioforge/tokenize.hpp"

namespace ioforge {

namespace {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Tweet-derived aggregates not already covered by BehavioralProfile.
struct ExtraAgg {
    double sum_chars = 0.0;
    double sum_hashtag_chars = 0.0;
    std::int64_t n_tweets = 0;
    std::int64_t n_retweets = 0;
    std::int64_t n_retweets_w_links = 0;
    std::map<std::int64_t, std::int64_t> day_counts;
};

std::map<std::string, ExtraAgg> compute_extras(const Corpus& corpus) {
    std::map<std::string, ExtraAgg> extras;
    for (const auto& [id, acc] : corpus.accounts) {
        (void)acc;
        extras[id];  // ensure zero-tweet accounts get a row
    }
    for (const Tweet& t : corpus.tweets) {
        ExtraAgg& e = extras[t.account_id];
        e.n_tweets++;
        e.sum_chars += static_cast<double>(utf8_length(t.text));
        for (const std::string& tag : t.hashtags)
            e.sum_hashtag_chars += static_cast<double>(utf8_length(tag));
        e.day_counts[utc_day_index(t.created_at)]++;
        if (t.is_retweet) {
            e.n_retweets++;
            if (!t.urls.empty()) e.n_retweets_w_links++;
        }
    }
    return extras;
}

std::vector<double> behavioral_row(const BehavioralProfile& p, const ExtraAgg& e) {
    const double n = static_cast<double>(e.n_tweets);
    const double active_days = static_cast<double>(e.day_counts.size());
    double mean_per_day = 0.0, sd_per_day = 0.0;
    if (!e.day_counts.empty()) {
        double sum = 0.0;
        for (const auto& [day, c] : e.day_counts) {
            (void)day;
            sum += static_cast<double>(c);
        }
        mean_per_day = sum / active_days;
        double ss = 0.0;
        for (const auto& [day, c] : e.day_counts) {
            (void)day;
            const double d = static_cast<double>(c) - mean_per_day;
            ss += d * d;
        }
        sd_per_day = std::sqrt(ss / active_days);
    }
    return {
        static_cast<double>(p.num_external_news_interactions),
        n > 0 ? e.sum_chars / n : 0.0,
        n > 0 ? e.sum_hashtag_chars / n : 0.0,
        static_cast<double>(p.num_faves),
        n,
        sd_per_day,
        n > 0 ? static_cast<double>(e.n_retweets_w_links) / n : 0.0,
        mean_per_day,
        static_cast<double>(p.follower_count),
        static_cast<double>(p.profile_length),
        static_cast<double>(p.following_count),
        static_cast<double>(p.num_langs_used),
        p.und_fraction,
        p.followers_following_ratio,
        p.ratio_tweets_w_links_all_tweets,
        n > 0 ? static_cast<double>(e.n_retweets) / n : 0.0,
        p.avg_num_links,
    };
}

}  // namespace

std::string to_string(FeatureCategory c) {
    switch (c) {
        case FeatureCategory::behavioral: return "behavioral";
        case FeatureCategory::language: return "language";
        case FeatureCategory::ngram: return "ngram";
    }
    throw std::logic_error("bad FeatureCategory");
}

FeatureCategory feature_category_from_string(const std::string& s) {
    if (s == "behavioral") return FeatureCategory::behavioral;
    if (s == "language") return FeatureCategory::language;
    if (s == "ngram") return FeatureCategory::ngram;
    throw std::runtime_error("unknown feature category: " + s);
}

const std::vector<std::string>& behavioral_feature_names() {
    static const std::vector<std::string> names = {
        "num_external_news_interactions",
        "avg_num_chars",
        "avg_num_hashtag_chars",
        "num_faves",
        "num_tweets_in_time_range",
        "sd_num_tweets_per_day",
        "ratio_retweets_w_links_all_tweets",
        "avg_num_tweets_per_day",
        "follower_count",
        "profile_length",
        "following_count",
        "num_langs_used",
        "und_fraction",
        "followers_following_ratio",
        "ratio_tweets_w_links_all_tweets",
        "ratio_retweets_all_tweets",
        "avg_num_links",
    };
    return names;
}

const std::vector<std::string>& default_language_universe() {
    static const std::vector<std::string> codes = {
        "en", "sr", "it", "und", "in", "de", "fr", "sl", "pt", "es",
        "ht", "tl", "ro", "ru", "et", "nl", "cs", "da", "sv", "tr",
        "pl", "no", "lt", "lv", "cy", "eu", "ca", "fi", "hu", "hi",
    };
    return codes;
}

std::vector<double> extract_behavioral(const Corpus& corpus, const std::string& account_id,
                                       const NewsList& news) {
    if (corpus.accounts.find(account_id) == corpus.accounts.end())
        throw std::runtime_error("extract_behavioral: unknown account: " + account_id);
    const auto profiles = compute_profiles(corpus, news);
    const auto extras = compute_extras(corpus);
    return behavioral_row(profiles.at(account_id), extras.at(account_id));
}

std::map<std::string, double> extract_language_fractions(
    const Corpus& corpus, const std::string& account_id,
    const std::vector<std::string>& universe) {
    const std::set<std::string> uni(universe.begin(), universe.end());
    std::map<std::string, std::int64_t> counts;
    std::int64_t n = 0;
    for (const Tweet& t : corpus.tweets) {
        if (t.account_id != account_id) continue;
        n++;
        counts[uni.count(t.lang) ? t.lang : std::string("other")]++;
    }
    std::map<std::string, double> fractions;
    if (n == 0) return fractions;
    for (const auto& [lang, c] : counts)
        fractions[lang] = static_cast<double>(c) / static_cast<double>(n);
    return fractions;
}

NgramFeatures build_ngram_features(const Corpus& corpus,
                                   const std::vector<std::string>& account_ids,
                                   std::int64_t min_count) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < account_ids.size(); i++) row_of[account_ids[i]] = i;

    // gram key -> (total count, per-row counts)
    std::map<std::string, std::pair<std::int64_t, std::map<std::size_t, std::int64_t>>> grams;
    std::vector<std::int64_t> tweet_counts(account_ids.size(), 0);
    for (const Tweet& t : corpus.tweets) {
        auto it = row_of.find(t.account_id);
        if (it == row_of.end()) continue;
        const std::size_t row = it->second;
        tweet_counts[row]++;
        const std::vector<std::string> toks = tokenize(t.text);
        auto bump = [&](const std::string& gram) {
            auto& slot = grams[t.lang + ":" + gram];
            slot.first++;
            slot.second[row]++;
        };
        for (const std::string& tok : toks) bump(tok);
        for (std::size_t i = 0; i + 1 < toks.size(); i++) bump(toks[i] + " " + toks[i + 1]);
    }

    NgramFeatures out;
    out.account_ids = account_ids;
    out.rows.resize(account_ids.size());
    for (const auto& [key, slot] : grams) {
        if (slot.first <= min_count) continue;
        const int col = static_cast<int>(out.vocabulary.size());
        out.vocabulary.push_back(key);
        for (const auto& [row, c] : slot.second)
            out.rows[row][col] =
                static_cast<double>(c) / static_cast<double>(tweet_counts[row]);
    }
    return out;
}

FeatureMatrix assemble_features(const Corpus& corpus, const NewsList& news,
                                const std::vector<std::string>& universe,
                                std::int64_t ngram_min_count) {
    FeatureMatrix m;
    for (const auto& [id, acc] : corpus.accounts) {
        (void)acc;
        m.account_ids.push_back(id);
    }

    for (const std::string& name : behavioral_feature_names()) {
        m.schema.names.push_back(name);
        m.schema.categories.push_back(FeatureCategory::behavioral);
    }
    std::vector<std::string> lang_cols = universe;
    lang_cols.push_back("other");
    for (const std::string& code : lang_cols) {
        m.schema.names.push_back(code);
        m.schema.categories.push_back(FeatureCategory::language);
    }
    const NgramFeatures ng = build_ngram_features(corpus, m.account_ids, ngram_min_count);
    for (const std::string& key : ng.vocabulary) {
        m.schema.names.push_back(key);
        m.schema.categories.push_back(FeatureCategory::ngram);
    }

    const auto profiles = compute_profiles(corpus, news);
    const auto extras = compute_extras(corpus);
    const std::size_t F = m.schema.names.size();
    m.X.resize(m.account_ids.size(), std::vector<double>(F, 0.0));
    for (std::size_t r = 0; r < m.account_ids.size(); r++) {
        const std::string& id = m.account_ids[r];
        std::vector<double>& row = m.X[r];
        const std::vector<double> beh = behavioral_row(profiles.at(id), extras.at(id));
        std::copy(beh.begin(), beh.end(), row.begin());
        const auto fractions = extract_language_fractions(corpus, id, universe);
        for (std::size_t j = 0; j < lang_cols.size(); j++) {
            auto it = fractions.find(lang_cols[j]);
            if (it != fractions.end()) row[17 + j] = it->second;
        }
        const std::size_t ngram_base = 17 + lang_cols.size();
        for (const auto& [col, v] : ng.rows[r]) row[ngram_base + col] = v;
    }
    return m;
}

FeatureSchema select_features(const FeatureMatrix& matrix, const std::vector<int>& y,
                              const SelectSizes& sizes, std::uint64_t seed) {
    if (y.size() != matrix.account_ids.size())
        throw std::runtime_error("select_features: y size does not match row count");
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v == 0) has0 = true;
        else if (v == 1) has1 = true;
        else throw std::runtime_error("select_features: y must be binary");
    }
    if (!has0 || !has1) throw std::runtime_error("select_features: y has a single class");

    FeatureSchema selected;
    const FeatureCategory order[] = {FeatureCategory::behavioral, FeatureCategory::language,
                                     FeatureCategory::ngram};
    for (FeatureCategory cat : order) {
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < matrix.schema.names.size(); j++)
            if (matrix.schema.categories[j] == cat) cols.push_back(j);
        if (cols.empty()) continue;

        std::size_t want = 0;
        switch (cat) {
            case FeatureCategory::behavioral: want = sizes.behavioral; break;
            case FeatureCategory::language: want = sizes.language; break;
            case FeatureCategory::ngram: want = sizes.ngram; break;
        }
        const std::size_t k = std::min(want, cols.size());
        if (k == 0) continue;

        Rows sub(matrix.X.size(), std::vector<double>(cols.size(), 0.0));
        std::vector<std::string> sub_names(cols.size());
        for (std::size_t r = 0; r < matrix.X.size(); r++)
            for (std::size_t j = 0; j < cols.size(); j++) sub[r][j] = matrix.X[r][cols[j]];
        for (std::size_t j = 0; j < cols.size(); j++)
            sub_names[j] = matrix.schema.names[cols[j]];

        ForestParams params;
        params.seed = derive_seed(seed, "select:" + to_string(cat));
        const Forest forest = train_extra_trees(sub, y, sub_names, params);
        const std::map<std::string, double> imp = feature_importance(forest);

        // rank: importance descending, ties by (category-local) column index
        std::vector<std::size_t> rank(cols.size());
        for (std::size_t j = 0; j < cols.size(); j++) rank[j] = j;
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            return imp.at(sub_names[a]) > imp.at(sub_names[b]);
        });
        for (std::size_t j = 0; j < k; j++) {
            selected.names.push_back(sub_names[rank[j]]);
            selected.categories.push_back(cat);
        }
    }
    return selected;
}

FeatureMatrix reduce_matrix(const FeatureMatrix& matrix, const FeatureSchema& schema) {
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t j = 0; j < matrix.schema.names.size(); j++)
        col_of[matrix.schema.names[j]] = j;

    FeatureMatrix out;
    out.schema = schema;
    out.account_ids = matrix.account_ids;
    std::vector<std::size_t> cols;
    cols.reserve(schema.names.size());
    for (const std::string& name : schema.names) {
        auto it = col_of.find(name);
        if (it == col_of.end())
            throw std::runtime_error("reduce_matrix: feature not in matrix: " + name);
        cols.push_back(it->second);
    }
    out.X.resize(matrix.X.size(), std::vector<double>(cols.size(), 0.0));
    for (std::size_t r = 0; r < matrix.X.size(); r++)
        for (std::size_t j = 0; j < cols.size(); j++) out.X[r][j] = matrix.X[r][cols[j]];
    return out;
}

void write_feature_schema(const FeatureSchema& schema, const std::string& path) {
    nlohmann::ordered_json j;
    j["names"] = schema.names;
    std::vector<std::string> cats;
    cats.reserve(schema.categories.size());
    for (FeatureCategory c : schema.categories) cats.push_back(to_string(c));
    j["categories"] = cats;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

FeatureSchema load_feature_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    FeatureSchema schema;
    schema.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& c : j.at("categories"))
        schema.categories.push_back(feature_category_from_string(c.get<std::string>()));
    if (schema.names.size() != schema.categories.size())
        throw std::runtime_error("feature schema: names/categories size mismatch");
    return schema;
}

void write_feature_matrix(const FeatureMatrix& matrix, const std::string& prefix) {
    write_feature_schema(matrix.schema, prefix + ".schema.json");

    std::ofstream rows(prefix + ".rows.txt");
    if (!rows) throw std::runtime_error("cannot write " + prefix + ".rows.txt");
    for (const std::string& id : matrix.account_ids) rows << id << "\n";

    std::ofstream trip(prefix + ".triplets.csv");
    if (!trip) throw std::runtime_error("cannot write " + prefix + ".triplets.csv");
    trip << "row,col,value\n";
    for (std::size_t r = 0; r < matrix.X.size(); r++)
        for (std::size_t c = 0; c < matrix.X[r].size(); c++)
            if (matrix.X[r][c] != 0.0)
                trip << r << "," << c << "," << format_g17(matrix.X[r][c]) << "\n";
}

FeatureMatrix load_feature_matrix(const std::string& prefix) {
    FeatureMatrix m;
    m.schema = load_feature_schema(prefix + ".schema.json");

    std::ifstream rows(prefix + ".rows.txt");
    if (!rows) throw std::runtime_error("cannot read " + prefix + ".rows.txt");
    std::string line;
    while (std::getline(rows, line))
        if (!line.empty()) m.account_ids.push_back(line);

    m.X.resize(m.account_ids.size(), std::vector<double>(m.schema.names.size(), 0.0));
    std::ifstream trip(prefix + ".triplets.csv");
    if (!trip) throw std::runtime_error("cannot read " + prefix + ".triplets.csv");
    std::getline(trip, line);  // header
    while (std::getline(trip, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string rs, cs, vs;
        if (!std::getline(ss, rs, ',') || !std::getline(ss, cs, ',') || !std::getline(ss, vs))
            throw std::runtime_error("bad triplet line: " + line);
        const std::size_t r = std::stoull(rs);
        const std::size_t c = std::stoull(cs);
        if (r >= m.X.size() || c >= m.schema.names.size())
            throw std::runtime_error("triplet out of range: " + line);
        m.X[r][c] = std::stod(vs);
    }
    return m;
}

}  // namespace ioforge
