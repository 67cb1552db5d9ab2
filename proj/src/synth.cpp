#include "ioforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "ioforge/rng.hpp"
#include "json.hpp"

namespace ioforge {

PlantedTopicsData make_planted_topics(const PlantedTopicsSpec& spec, std::uint64_t seed) {
    PlantedTopicsData data;
    data.topic_vocab.resize(spec.num_topics);
    for (int k = 0; k < spec.num_topics; ++k) {
        for (int j = 0; j < spec.words_per_topic; ++j) {
            data.topic_vocab[k].push_back("t" + std::to_string(k) + "w" + std::to_string(j));
        }
    }
    auto eng = make_engine(derive_seed(seed, "planted_topics"));
    std::uniform_int_distribution<int> pick_word(0, spec.words_per_topic - 1);
    int doc_index = 0;
    for (int k = 0; k < spec.num_topics; ++k) {
        for (int m = 0; m < spec.docs_per_topic; ++m) {
            TokenizedDoc doc;
            doc.doc_id = "d" + std::to_string(doc_index++);
            for (int t = 0; t < spec.tokens_per_doc; ++t) {
                doc.tokens.push_back(data.topic_vocab[k][pick_word(eng)]);
            }
            data.docs.push_back(std::move(doc));
            data.true_topic.push_back(k);
        }
    }
    return data;
}

PlantedBlocksData make_planted_blocks(std::size_t n_vertices, int n_blocks, double p_in,
                                      double p_out, std::uint64_t seed) {
    PlantedBlocksData data;
    NarrativeNetwork& net = data.net;
    const std::size_t per_block =
        (n_vertices + static_cast<std::size_t>(n_blocks) - 1) / static_cast<std::size_t>(n_blocks);
    char buf[32];
    for (std::size_t v = 0; v < n_vertices; ++v) {
        std::snprintf(buf, sizeof(buf), "v%04zu", v);
        net.vertices.push_back(buf);
        net.index_of[buf] = v;
        data.true_block.push_back(static_cast<int>(v / per_block));
    }
    net.out_edges.resize(n_vertices);
    net.stats.resize(n_vertices);

    auto eng = make_engine(derive_seed(seed, "planted_blocks"));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n_vertices; ++i) {
        for (std::size_t j = i + 1; j < n_vertices; ++j) {
            const double p = data.true_block[i] == data.true_block[j] ? p_in : p_out;
            if (unif(eng) < p) {
                net.out_edges[i][j]++;
                net.stats[i].retweets_received++;
                net.stats[j].tweet_count++;
            }
        }
    }
    return data;
}

namespace {

std::string padded(const std::string& prefix, int i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%03d", prefix.c_str(), i);
    return buf;
}

}  // namespace

SynthCorpusData synth_corpus(const SynthCorpusSpec& spec, std::uint64_t seed) {
    if (spec.num_topics < 1 || spec.words_per_topic < 1 || spec.tokens_per_tweet < 1) {
        throw std::invalid_argument("synth_corpus: topics/words/tokens must be positive");
    }
    if (spec.narrative_topic < 0 || spec.narrative_topic >= spec.num_topics) {
        throw std::invalid_argument("synth_corpus: narrative_topic out of range");
    }
    if (spec.organic_accounts < 0 || spec.troll_accounts < 0 || spec.media_accounts < 0 ||
        spec.tweets_per_account < 0 || spec.cascade_sources < 0) {
        throw std::invalid_argument("synth_corpus: counts must be nonnegative");
    }
    if (spec.cascade_sources > spec.troll_accounts) {
        throw std::invalid_argument("synth_corpus: more cascade sources than trolls");
    }
    if (spec.cascade_sources > 0 && (spec.cascade_branching < 1 || spec.cascade_depth < 1)) {
        throw std::invalid_argument("synth_corpus: cascades need branching/depth >= 1");
    }
    if (spec.originals_per_source < 1) {
        throw std::invalid_argument("synth_corpus: originals_per_source must be >= 1");
    }
    for (int r : spec.retweets_per_level) {
        if (r < 1) throw std::invalid_argument("synth_corpus: retweets_per_level must be >= 1");
    }
    for (int e : spec.amplifier_extra_originals) {
        if (e < 0) {
            throw std::invalid_argument("synth_corpus: amplifier_extra_originals must be >= 0");
        }
    }
    if (spec.bystander_accounts < 0 || spec.bystander_originals < 1) {
        throw std::invalid_argument("synth_corpus: bad bystander settings");
    }
    if (spec.amplifier_noise_links < 0 || spec.bystander_retweet_links < 0 ||
        spec.source_noise_links < 0 || spec.amplifier_noise_max < 1 ||
        spec.bystander_retweet_max < 1 || spec.source_noise_max < 1) {
        throw std::invalid_argument("synth_corpus: bad noise-retweet settings");
    }
    if (spec.amplifier_noise_links > spec.bystander_accounts) {
        throw std::invalid_argument(
            "synth_corpus: amplifier_noise_links needs that many bystanders");
    }
    if (spec.branch_keep_prob <= 0.0 || spec.branch_keep_prob > 1.0) {
        throw std::invalid_argument("synth_corpus: branch_keep_prob must be in (0,1]");
    }

    SynthCorpusData data;
    data.narrative_hashtag = spec.narrative_hashtag;
    data.topic_vocab.resize(spec.num_topics);
    for (int k = 0; k < spec.num_topics; ++k) {
        for (int j = 0; j < spec.words_per_topic; ++j) {
            data.topic_vocab[k].push_back("t" + std::to_string(k) + "w" + std::to_string(j));
        }
    }

    Corpus& corpus = data.corpus;
    std::vector<std::string> organic_ids, media_ids;
    auto add_account = [&](const std::string& id, const std::string& screen,
                           std::int64_t profile_len, std::int64_t followers,
                           std::int64_t following, std::int64_t faves, AccountStatus status,
                           KnownLabel label) {
        AccountRecord rec;
        rec.account_id = id;
        rec.screen_name = screen;
        rec.profile_length = profile_len;
        rec.follower_count = followers;
        rec.following_count = following;
        rec.num_faves = faves;
        rec.status = status;
        rec.known_label = spec.mark_known_labels ? label : KnownLabel::unknown;
        corpus.accounts.emplace(id, rec);
    };
    for (int i = 0; i < spec.media_accounts; ++i) {
        const std::string id = padded("media_", i);
        media_ids.push_back(id);
        add_account(id, padded("NewsDesk", i), 120, 100000 + 1000 * i, 800, 2000,
                    AccountStatus::active, KnownLabel::known_benign);
    }
    for (int i = 0; i < spec.organic_accounts; ++i) {
        const std::string id = padded("org_", i);
        organic_ids.push_back(id);
        // Small, spread-out follower counts keep the graph covariate varied
        // without a large mean; the ratio stays inside (0.75, 4).
        add_account(id, padded("user", i), 80, 40 + 3 * i, 30 + 2 * i, 1500,
                    AccountStatus::active, KnownLabel::unknown);
    }
    for (int i = 0; i < spec.troll_accounts; ++i) {
        const std::string id = padded("troll_", i);
        data.io_accounts.push_back(id);
        // Follower counts sit in the ordinary-user range so graph covariates
        // do not single trolls out; the empty profile, the 3500 following,
        // and the five faves still mark them for the labeling functions.
        add_account(id, padded("patriot", i), 0, 35 + 5 * i, 3500, 5,
                    AccountStatus::suspended, KnownLabel::known_io);
    }
    std::vector<std::string> bystander_ids;
    for (int i = 0; i < spec.bystander_accounts; ++i) {
        const std::string id = padded("stray_", i);
        bystander_ids.push_back(id);
        add_account(id, padded("observer", i), 80, 45 + 4 * i, 35 + 3 * i, 1500,
                    AccountStatus::active, KnownLabel::unknown);
    }
    if (corpus.accounts.empty()) {
        throw std::invalid_argument("synth_corpus: no accounts configured");
    }

    auto eng = make_engine(derive_seed(seed, "synth_corpus"));
    std::uniform_int_distribution<int> pick_topic(0, spec.num_topics - 1);
    std::uniform_int_distribution<int> pick_word(0, spec.words_per_topic - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::int64_t tick = 0;
    auto next_time = [&] { return spec.start_time + spec.time_step * tick++; };
    auto topic_text = [&](int k) {
        std::string text;
        for (int t = 0; t < spec.tokens_per_tweet; ++t) {
            if (!text.empty()) text += ' ';
            text += data.topic_vocab[k][pick_word(eng)];
        }
        return text;
    };
    std::int64_t tweet_serial = 0;
    auto add_tweet = [&](const std::string& account_id, std::string text, bool troll_links) {
        Tweet tw;
        tw.tweet_id = "tw" + std::to_string(100000 + tweet_serial++);
        tw.account_id = account_id;
        tw.created_at = next_time();
        tw.text = std::move(text);
        tw.lang = "en";
        if (troll_links) {
            tw.urls = {"http://mirror.example/a" + std::to_string(tweet_serial),
                       "http://mirror.example/b" + std::to_string(tweet_serial)};
            tw.text += " " + tw.urls[0] + " " + tw.urls[1];
        }
        corpus.tweets.push_back(tw);
        return corpus.tweets.back().tweet_id;
    };

    // Organic activity: media and ordinary users sample topics uniformly,
    // trolls concentrate on the narrative topic.
    for (int t = 0; t < spec.tweets_per_account; ++t) {
        for (const auto& id : media_ids) add_tweet(id, topic_text(pick_topic(eng)), false);
        for (const auto& id : organic_ids) add_tweet(id, topic_text(pick_topic(eng)), false);
        for (const auto& id : bystander_ids) add_tweet(id, topic_text(pick_topic(eng)), false);
        for (const auto& id : data.io_accounts) {
            const int k = unif(eng) < 0.8 ? spec.narrative_topic : pick_topic(eng);
            add_tweet(id, topic_text(k), true);
        }
    }

    auto add_narrative_original = [&](const std::string& account_id, const std::string& id) {
        Tweet tw;
        tw.tweet_id = id;
        tw.account_id = account_id;
        tw.created_at = next_time();
        tw.text = topic_text(spec.narrative_topic) + " #" + spec.narrative_hashtag;
        tw.lang = "en";
        tw.hashtags = {spec.narrative_hashtag};
        corpus.tweets.push_back(tw);
        return corpus.tweets.back().tweet_id;
    };
    // A retweetable narrative original: author, tweet id, and body text.
    struct Post {
        std::string account;
        std::string tweet_id;
        std::string text;
    };
    auto add_retweet = [&](const std::string& author, const Post& target,
                           const std::string& id) {
        Tweet tw;
        tw.tweet_id = id;
        tw.account_id = author;
        tw.created_at = next_time();
        tw.text = "RT @" + corpus.accounts.at(target.account).screen_name + ": " + target.text;
        tw.lang = "en";
        tw.is_retweet = true;
        tw.retweet_of_account = target.account;
        tw.retweet_of_tweet = target.tweet_id;
        tw.hashtags = {spec.narrative_hashtag};
        corpus.tweets.push_back(tw);
    };
    std::vector<Post> bystander_posts;
    for (int i = 0; i < spec.bystander_accounts; ++i) {
        for (int o = 0; o < spec.bystander_originals; ++o) {
            const std::string id = add_narrative_original(
                bystander_ids[static_cast<std::size_t>(i)],
                "stray" + std::to_string(i) + "_orig" + std::to_string(o));
            if (o == 0) {
                bystander_posts.push_back({bystander_ids[static_cast<std::size_t>(i)], id,
                                           corpus.tweets.back().text});
            }
        }
    }

    // Retweet cascades: one hashtagged original per source, amplified down a
    // tree where every vertex is retweeted by `branching` fresh accounts.
    // Amplifier pool: remaining trolls plus ordinary accounts. Media accounts
    // stay outside the cascades so their organization-scale follower counts
    // do not enter the narrative graph.
    std::vector<std::string> pool;
    for (int i = spec.cascade_sources; i < spec.troll_accounts; ++i) {
        pool.push_back(data.io_accounts[static_cast<std::size_t>(i)]);
    }
    pool.insert(pool.end(), organic_ids.begin(), organic_ids.end());
    std::size_t nodes_per_cascade = 0;
    for (int lvl = 1, width = 1; lvl <= spec.cascade_depth; ++lvl) {
        width *= spec.cascade_branching;
        nodes_per_cascade += static_cast<std::size_t>(width);
    }
    if (spec.cascade_sources > 0 && pool.size() < nodes_per_cascade) {
        throw std::invalid_argument("synth_corpus: not enough accounts to amplify cascades");
    }
    std::shuffle(pool.begin(), pool.end(), eng);
    auto per_level = [](const std::vector<int>& table, int lvl, int fallback) {
        if (table.empty()) return fallback;
        return table[std::min(static_cast<std::size_t>(lvl - 1), table.size() - 1)];
    };
    auto retweets_at = [&](int lvl) { return per_level(spec.retweets_per_level, lvl, 1); };
    auto extras_at = [&](int lvl) {
        return per_level(spec.amplifier_extra_originals, lvl, 0);
    };
    std::size_t pool_pos = 0;
    // Originals by deepest-level amplifiers: safe bystander retweet targets
    // (two hops from any source, so retweeting them adds no modeled exposure).
    std::vector<Post> leaf_posts;
    int noise_serial = 0;
    // Draws `links` distinct indices from 0..n-1 by partial Fisher-Yates.
    std::vector<std::size_t> noise_idx;
    auto pick_distinct = [&](std::size_t n, int links) {
        noise_idx.resize(n);
        for (std::size_t j = 0; j < n; ++j) noise_idx[j] = j;
        const std::size_t take = std::min(static_cast<std::size_t>(links), n);
        for (std::size_t j = 0; j < take; ++j) {
            const std::size_t k =
                j + std::min(static_cast<std::size_t>(unif(eng) * static_cast<double>(n - j)),
                             n - j - 1);
            std::swap(noise_idx[j], noise_idx[k]);
        }
        return take;
    };
    auto noise_multiplicity = [&](int max_mult) {
        if (max_mult <= 1) return 1;
        return std::min(1 + static_cast<int>(unif(eng) * max_mult), max_mult);
    };
    for (int s = 0; s < spec.cascade_sources; ++s) {
        const std::string& source = data.io_accounts[static_cast<std::size_t>(s)];
        data.cascade_source_ids.push_back(source);
        std::string original = topic_text(spec.narrative_topic);
        original += " #" + spec.narrative_hashtag;
        std::set<std::string> used = {source};

        struct Node {
            std::string account;
            std::string tweet_id;
            // Exposure counts to the source by hop, raw[n] = paths of length
            // n+1 weighted by retweet multiplicities.
            std::vector<std::int64_t> raw;
            bool is_source = false;
        };
        std::vector<Node> frontier;
        for (int o = 0; o < spec.originals_per_source; ++o) {
            Tweet tw;
            tw.tweet_id = "cascade" + std::to_string(s) + "_orig" + std::to_string(o);
            tw.account_id = source;
            tw.created_at = next_time();
            tw.text = o == 0 ? original : topic_text(spec.narrative_topic) + " #" +
                                              spec.narrative_hashtag;
            tw.lang = "en";
            tw.hashtags = {spec.narrative_hashtag};
            corpus.tweets.push_back(tw);
            if (o == 0) frontier.push_back({source, tw.tweet_id, {}, true});
        }
        if (spec.source_noise_links > 0) {
            int links = spec.source_noise_links;
            if (spec.planted_outcomes && links > 1) {
                links = std::min(1 + static_cast<int>(unif(eng) * links), links);
            }
            const std::size_t take = pick_distinct(bystander_posts.size(), links);
            for (std::size_t j = 0; j < take; ++j) {
                const Post& target = bystander_posts[noise_idx[j]];
                const int mult = noise_multiplicity(spec.source_noise_max);
                for (int m = 0; m < mult; ++m) {
                    add_retweet(source, target, "noise_src" + std::to_string(noise_serial++));
                }
            }
        }
        int rt_serial = 0;
        for (int lvl = 1; lvl <= spec.cascade_depth; ++lvl) {
            std::vector<Node> next;
            const int max_repeats = retweets_at(lvl);
            for (const Node& parent : frontier) {
                for (int b = 0; b < spec.cascade_branching; ++b) {
                    // The source always keeps its first amplifier so the
                    // cascade never dies at the root.
                    const bool forced = lvl == 1 && b == 0;
                    if (!forced && spec.branch_keep_prob < 1.0 &&
                        unif(eng) >= spec.branch_keep_prob) {
                        continue;
                    }
                    std::string amp;
                    for (std::size_t tries = 0; tries <= pool.size(); ++tries) {
                        const std::string& cand = pool[pool_pos++ % pool.size()];
                        if (used.insert(cand).second) {
                            amp = cand;
                            break;
                        }
                    }
                    if (amp.empty()) {
                        throw std::invalid_argument(
                            "synth_corpus: not enough accounts to amplify cascades");
                    }
                    int repeats = max_repeats;
                    if (spec.planted_outcomes && max_repeats > 1) {
                        repeats = 1 + static_cast<int>(unif(eng) * max_repeats);
                        repeats = std::min(repeats, max_repeats);
                    }
                    std::string last_id;
                    for (int r = 0; r < repeats; ++r) {
                        Tweet tw;
                        tw.tweet_id = "cascade" + std::to_string(s) + "_rt" +
                                      std::to_string(rt_serial++);
                        tw.account_id = amp;
                        tw.created_at = next_time();
                        tw.text = "RT @" + corpus.accounts.at(parent.account).screen_name +
                                  ": " + original;
                        tw.lang = "en";
                        tw.is_retweet = true;
                        tw.retweet_of_account = parent.account;
                        tw.retweet_of_tweet = parent.tweet_id;
                        tw.hashtags = {spec.narrative_hashtag};
                        corpus.tweets.push_back(tw);
                        last_id = tw.tweet_id;
                    }
                    Node node;
                    node.account = amp;
                    node.tweet_id = last_id;
                    node.raw.assign(static_cast<std::size_t>(spec.cascade_depth), 0);
                    node.raw[0] = parent.is_source ? repeats : 0;
                    for (std::size_t n = 1; n < node.raw.size(); ++n) {
                        const std::int64_t up =
                            n - 1 < parent.raw.size() ? parent.raw[n - 1] : 0;
                        node.raw[n] = repeats * up;
                    }
                    int extras = extras_at(lvl);
                    if (spec.planted_outcomes) {
                        double rate = spec.planted_mu;
                        double weight = spec.planted_tau;
                        for (std::size_t n = 0; n < node.raw.size(); ++n) {
                            weight *= n == 0 ? spec.planted_gamma1 : spec.planted_gamma2;
                            rate += weight * std::log1p(static_cast<double>(node.raw[n]));
                        }
                        std::poisson_distribution<int> extra_count(std::exp(rate));
                        extras = extra_count(eng);
                    }
                    for (int e = 0; e < extras; ++e) {
                        const std::string ex_id = add_narrative_original(
                            amp, "cascade" + std::to_string(s) + "_ex" +
                                     std::to_string(rt_serial) + "_" + std::to_string(e));
                        if (e == 0 && lvl == spec.cascade_depth) {
                            leaf_posts.push_back({amp, ex_id, corpus.tweets.back().text});
                        }
                    }
                    if (spec.amplifier_noise_links > 0) {
                        const std::size_t take = pick_distinct(bystander_posts.size(),
                                                               spec.amplifier_noise_links);
                        for (std::size_t j = 0; j < take; ++j) {
                            const Post& target = bystander_posts[noise_idx[j]];
                            const int mult = noise_multiplicity(spec.amplifier_noise_max);
                            for (int m = 0; m < mult; ++m) {
                                add_retweet(amp, target,
                                            "noise_amp" + std::to_string(noise_serial++));
                            }
                        }
                    }
                    next.push_back(std::move(node));
                }
            }
            frontier = std::move(next);
        }
    }

    if (spec.bystander_retweet_links > 0) {
        std::vector<Post> targets;
        for (int i = 0; i < spec.bystander_accounts; ++i) {
            const std::string& author = bystander_ids[static_cast<std::size_t>(i)];
            targets.clear();
            for (const Post& p : bystander_posts) {
                if (p.account != author) targets.push_back(p);
            }
            targets.insert(targets.end(), leaf_posts.begin(), leaf_posts.end());
            int links = spec.bystander_retweet_links;
            if (spec.planted_outcomes && links > 2) {
                links = std::min(2 + static_cast<int>(unif(eng) * (links - 1)), links);
            }
            const std::size_t take = pick_distinct(targets.size(), links);
            for (std::size_t j = 0; j < take; ++j) {
                const Post& target = targets[noise_idx[j]];
                const int mult = noise_multiplicity(spec.bystander_retweet_max);
                for (int m = 0; m < mult; ++m) {
                    add_retweet(author, target, "noise_by" + std::to_string(noise_serial++));
                }
            }
        }
    }

    std::sort(corpus.tweets.begin(), corpus.tweets.end(), [](const Tweet& a, const Tweet& b) {
        return a.created_at != b.created_at ? a.created_at < b.created_at
                                            : a.tweet_id < b.tweet_id;
    });
    if (!corpus.tweets.empty()) {
        corpus.time_range =
            TimeRange{corpus.tweets.front().created_at, corpus.tweets.back().created_at};
    }
    return data;
}

void write_synth_corpus(const SynthCorpusData& data, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    save_corpus(data.corpus, (dir / "tweets.jsonl").string(), (dir / "accounts.jsonl").string());

    nlohmann::ordered_json truth;
    truth["narrative_hashtag"] = data.narrative_hashtag;
    truth["topic_vocab"] = data.topic_vocab;
    truth["io_accounts"] = data.io_accounts;
    truth["cascade_sources"] = data.cascade_source_ids;
    std::ofstream out(dir / "truth.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "truth.json").string());
    out << truth.dump(2) << '\n';
}

SynthOutcomesData synth_network_outcomes(const SynthOutcomesSpec& spec,
                                         const OutcomeParams& truth, std::uint64_t seed) {
    if (spec.n_vertices == 0) {
        throw std::invalid_argument("synth_network_outcomes: need at least one vertex");
    }
    if (spec.edge_prob < 0.0 || spec.edge_prob > 1.0) {
        throw std::invalid_argument("synth_network_outcomes: edge_prob outside [0,1]");
    }
    if (spec.weight_min < 1 || spec.weight_max < spec.weight_min) {
        throw std::invalid_argument("synth_network_outcomes: bad weight range");
    }
    if (spec.num_sources > spec.n_vertices) {
        throw std::invalid_argument("synth_network_outcomes: more sources than vertices");
    }
    if (truth.beta.size() != spec.num_covariates) {
        throw std::invalid_argument("synth_network_outcomes: truth.beta size mismatch");
    }

    SynthOutcomesData data;
    data.truth = truth;
    const std::size_t n = spec.n_vertices;
    data.c.resize(n);
    {
        auto eng = make_engine(derive_seed(seed, "graph"));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::uniform_int_distribution<std::int64_t> weight(spec.weight_min, spec.weight_max);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                if (unif(eng) < spec.edge_prob) data.c[i][j] = weight(eng);
            }
        }
    }
    data.Z.assign(n, 0);
    {
        auto eng = make_engine(derive_seed(seed, "sources"));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t k = 0; k < spec.num_sources; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, n - 1);
            std::swap(order[k], order[pick(eng)]);
            data.Z[order[k]] = 1;
        }
    }
    data.X.assign(n, std::vector<double>(spec.num_covariates, 0.0));
    if (spec.num_covariates > 0) {
        auto eng = make_engine(derive_seed(seed, "covariates"));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& row : data.X) {
            for (double& x : row) x = normal(eng);
        }
    }
    {
        auto eng = make_engine(derive_seed(seed, "influence"));
        data.adjacency = draw_influence(data.c, eng);
    }
    data.Y = simulate_outcomes(truth, data.adjacency, data.Z, data.X,
                               derive_seed(seed, "outcomes"));
    return data;
}

}  // namespace ioforge
