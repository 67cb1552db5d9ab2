#include "ioforge/weaklabel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

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

// Lowercased host of a URL, scheme and "www." stripped.
std::string url_host(const std::string& url) {
    std::size_t start = 0;
    const std::size_t scheme = url.find("://");
    if (scheme != std::string::npos) start = scheme + 3;
    std::size_t end = url.find_first_of("/?#:", start);
    if (end == std::string::npos) end = url.size();
    std::string host = ascii_lower(url.substr(start, end - start));
    if (host.rfind("www.", 0) == 0) host.erase(0, 4);
    return host;
}

bool host_under_domain(const std::string& host, const std::string& domain) {
    if (host == domain) return true;
    return host.size() > domain.size() + 1 &&
           host.compare(host.size() - domain.size() - 1, domain.size() + 1, "." + domain) == 0;
}

bool is_news_interaction(const Tweet& t, const NewsList& news) {
    if (t.retweet_of_account && news.entries.count(*t.retweet_of_account)) return true;
    for (const std::string& url : t.urls) {
        const std::string host = url_host(url);
        if (host.empty()) continue;
        for (const std::string& entry : news.entries) {
            if (host_under_domain(host, ascii_lower(entry))) return true;
        }
    }
    return false;
}

const char* vote_name(LFVote v) {
    switch (v) {
        case LFVote::IO: return "IO";
        case LFVote::REAL: return "REAL";
        default: return "ABSTAIN";
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

const std::vector<std::string>& lf_names() {
    static const std::vector<std::string> names = {
        "profile_length",
        "external_news_interactions",
        "num_following",
        "num_links",
        "many_langs",
        "few_faves",
        "too_many_faves",
        "many_und_tweets",
        "normal_people_ff_ratio",
        "no_external_news_interactions",
        "few_tweets_w_links",
        "normal_num_likes",
        "normal_profile_len",
        "org_num_followers",
    };
    return names;
}

NewsList load_news_list(const std::string& path) {
    NewsList list;
    if (path.empty()) return list;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open news list: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#') continue;
        list.entries.insert(entry);
    }
    return list;
}

std::map<std::string, BehavioralProfile> compute_profiles(const Corpus& corpus,
                                                          const NewsList& news) {
    if (corpus.accounts.empty()) {
        throw std::invalid_argument("compute_profiles: corpus has no accounts");
    }
    struct Agg {
        std::int64_t tweets = 0;
        std::int64_t urls = 0;
        std::int64_t tweets_with_links = 0;
        std::int64_t und = 0;
        std::int64_t news = 0;
        std::set<std::string> langs;
    };
    std::map<std::string, Agg> aggs;
    for (const Tweet& t : corpus.tweets) {
        Agg& a = aggs[t.account_id];
        ++a.tweets;
        a.urls += static_cast<std::int64_t>(t.urls.size());
        if (!t.urls.empty()) ++a.tweets_with_links;
        if (t.lang == "und") ++a.und;
        if (is_news_interaction(t, news)) ++a.news;
        a.langs.insert(t.lang);
    }
    std::map<std::string, BehavioralProfile> out;
    for (const auto& [id, rec] : corpus.accounts) {
        BehavioralProfile p;
        p.profile_length = rec.profile_length;
        p.following_count = rec.following_count;
        p.num_faves = rec.num_faves;
        p.follower_count = rec.follower_count;
        p.followers_following_ratio = static_cast<double>(rec.follower_count) /
                                      static_cast<double>(std::max<std::int64_t>(
                                          rec.following_count, 1));
        auto it = aggs.find(id);
        if (it != aggs.end()) {
            const Agg& a = it->second;
            const double n = static_cast<double>(a.tweets);
            p.num_external_news_interactions = a.news;
            p.avg_num_links = static_cast<double>(a.urls) / n;
            p.num_langs_used = static_cast<std::int64_t>(a.langs.size());
            p.und_fraction = static_cast<double>(a.und) / n;
            p.ratio_tweets_w_links_all_tweets = static_cast<double>(a.tweets_with_links) / n;
        }
        out.emplace(id, p);
    }
    return out;
}

std::vector<LFVote> apply_lfs(const BehavioralProfile& x) {
    std::vector<LFVote> v(kNumLFs, LFVote::ABSTAIN);
    // IO-voting heuristics
    if (x.profile_length == 0) v[0] = LFVote::IO;
    if (x.num_external_news_interactions > 5) v[1] = LFVote::IO;
    if (x.following_count > 3000) v[2] = LFVote::IO;
    if (x.avg_num_links > 1) v[3] = LFVote::IO;
    if (x.num_langs_used > 10) v[4] = LFVote::IO;
    if (x.num_faves < 20) v[5] = LFVote::IO;
    if (x.num_faves > 30000) v[6] = LFVote::IO;
    if (x.und_fraction > 0.05) v[7] = LFVote::IO;
    // REAL-voting heuristics
    if (x.follower_count < 500 && 0.75 < x.followers_following_ratio &&
        x.followers_following_ratio < 4) {
        v[8] = LFVote::REAL;
    }
    if (x.num_external_news_interactions < 2) v[9] = LFVote::REAL;
    if (0.05 < x.ratio_tweets_w_links_all_tweets && x.ratio_tweets_w_links_all_tweets < 0.15) {
        v[10] = LFVote::REAL;
    }
    if (500 < x.num_faves && x.num_faves < 10000) v[11] = LFVote::REAL;
    if (x.profile_length > 50) v[12] = LFVote::REAL;
    if (x.follower_count > 60000) v[13] = LFVote::REAL;
    return v;
}

LabelMatrix build_label_matrix(const std::map<std::string, BehavioralProfile>& profiles) {
    LabelMatrix m;
    m.lf_names = lf_names();
    for (const auto& [id, profile] : profiles) {
        m.account_ids.push_back(id);
        m.votes.push_back(apply_lfs(profile));
    }
    return m;
}

WeakLabels fit_label_model(const LabelMatrix& matrix, LabelModelMethod method,
                           double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw std::invalid_argument("fit_label_model: threshold must be in (0,1)");
    }
    const std::size_t N = matrix.votes.size();
    const std::size_t M = matrix.lf_names.size();
    std::size_t non_abstain_total = 0;
    for (const auto& row : matrix.votes) {
        if (row.size() != M) {
            throw std::invalid_argument("fit_label_model: ragged label matrix");
        }
        for (LFVote v : row) non_abstain_total += (v != LFVote::ABSTAIN);
    }
    if (non_abstain_total == 0) {
        throw std::runtime_error("fit_label_model: all labeling functions abstained");
    }

    // Canonical column order by LF name: result independent of input order.
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return matrix.lf_names[a] < matrix.lf_names[b];
    });

    WeakLabels out;
    out.account_ids = matrix.account_ids;
    out.threshold = threshold;
    out.io_probability.assign(N, 0.5);

    if (method == LabelModelMethod::vote) {
        for (std::size_t i = 0; i < N; ++i) {
            int io = 0, real = 0;
            for (LFVote v : matrix.votes[i]) {
                io += (v == LFVote::IO);
                real += (v == LFVote::REAL);
            }
            out.io_probability[i] =
                io + real == 0 ? 0.5 : static_cast<double>(io) / static_cast<double>(io + real);
        }
        for (const auto& name : matrix.lf_names) out.lf_accuracies[name] = 1.0;
        out.class_prior = 0.5;
    } else {
        double pi = 0.3;
        std::vector<double> acc(M, 0.7);
        std::vector<double> r(N, pi);
        std::vector<std::int64_t> col_votes(M, 0);
        for (const auto& row : matrix.votes) {
            for (std::size_t c = 0; c < M; ++c) {
                col_votes[c] += (row[order[c]] != LFVote::ABSTAIN);
            }
        }
        double prev_ll = -std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < 100; ++iter) {
            // E-step
            double ll = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double lw_io = std::log(pi);
                double lw_real = std::log1p(-pi);
                for (std::size_t c = 0; c < M; ++c) {
                    const LFVote v = matrix.votes[i][order[c]];
                    if (v == LFVote::ABSTAIN) continue;
                    lw_io += std::log(v == LFVote::IO ? acc[c] : 1.0 - acc[c]);
                    lw_real += std::log(v == LFVote::REAL ? acc[c] : 1.0 - acc[c]);
                }
                const double mx = std::max(lw_io, lw_real);
                const double lse = mx + std::log(std::exp(lw_io - mx) + std::exp(lw_real - mx));
                r[i] = std::exp(lw_io - lse);
                ll += lse;
            }
            if (std::abs(ll - prev_ll) < 1e-6) break;
            prev_ll = ll;
            // M-step
            double rsum = std::accumulate(r.begin(), r.end(), 0.0);
            pi = std::clamp(rsum / static_cast<double>(N), 1e-6, 1.0 - 1e-6);
            for (std::size_t c = 0; c < M; ++c) {
                if (col_votes[c] == 0) continue;  // never votes: no information
                double agree = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const LFVote v = matrix.votes[i][order[c]];
                    if (v == LFVote::IO) agree += r[i];
                    else if (v == LFVote::REAL) agree += 1.0 - r[i];
                }
                acc[c] = std::clamp(agree / static_cast<double>(col_votes[c]), 1e-3, 1.0 - 1e-3);
            }
        }
        // Final E-step so posteriors match the final parameters.
        for (std::size_t i = 0; i < N; ++i) {
            double lw_io = std::log(pi);
            double lw_real = std::log1p(-pi);
            for (std::size_t c = 0; c < M; ++c) {
                const LFVote v = matrix.votes[i][order[c]];
                if (v == LFVote::ABSTAIN) continue;
                lw_io += std::log(v == LFVote::IO ? acc[c] : 1.0 - acc[c]);
                lw_real += std::log(v == LFVote::REAL ? acc[c] : 1.0 - acc[c]);
            }
            const double mx = std::max(lw_io, lw_real);
            out.io_probability[i] =
                std::exp(lw_io - mx) / (std::exp(lw_io - mx) + std::exp(lw_real - mx));
        }
        for (std::size_t c = 0; c < M; ++c) {
            out.lf_accuracies[matrix.lf_names[order[c]]] = acc[c];
        }
        out.class_prior = pi;
    }

    out.labels.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        out.labels[i] = out.io_probability[i] >= threshold ? 1 : 0;
    }
    return out;
}

std::vector<int> threshold_labels(const WeakLabels& weak, double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw std::invalid_argument("threshold_labels: threshold must be in (0,1)");
    }
    std::vector<int> labels(weak.io_probability.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = weak.io_probability[i] >= threshold ? 1 : 0;
    }
    return labels;
}

void write_weak_labels_csv(const WeakLabels& weak, const LabelMatrix& matrix,
                           const std::string& path) {
    if (matrix.account_ids != weak.account_ids) {
        throw std::invalid_argument("write_weak_labels_csv: row order mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write weak labels: " + path);
    out << "account_id,io_probability,label";
    for (const auto& name : matrix.lf_names) out << ',' << name;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < weak.account_ids.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", weak.io_probability[i]);
        out << weak.account_ids[i] << ',' << buf << ',' << weak.labels[i];
        for (LFVote v : matrix.votes[i]) out << ',' << vote_name(v);
        out << '\n';
    }
}

WeakLabels load_weak_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weak labels: " + path);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("weak labels file is empty: " + path);
    }
    WeakLabels out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() < 3) {
            throw std::runtime_error("malformed weak labels row: " + line);
        }
        out.account_ids.push_back(fields[0]);
        out.io_probability.push_back(std::stod(fields[1]));
        out.labels.push_back(std::stoi(fields[2]));
    }
    return out;
}

}  // namespace ioforge
