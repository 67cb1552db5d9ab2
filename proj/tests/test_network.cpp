#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "ioforge/network.hpp"
#include "ioforge/rng.hpp"
#include "ioforge/synth.hpp"
#include "oracles.hpp"

using namespace ioforge;

namespace {

Tweet make_tweet(const std::string& id, const std::string& account, std::int64_t at,
                 const std::string& text) {
    Tweet t;
    t.tweet_id = id;
    t.account_id = account;
    t.created_at = at;
    t.text = text;
    t.lang = "en";
    return t;
}

Tweet make_retweet(const std::string& id, const std::string& account,
                   const std::string& source, std::int64_t at) {
    Tweet t = make_tweet(id, account, at, "RT @" + source + ": x");
    t.is_retweet = true;
    t.retweet_of_account = source;
    return t;
}

void add_account(Corpus& c, const std::string& id, std::int64_t followers = 0) {
    AccountRecord a;
    a.account_id = id;
    a.screen_name = id;
    a.follower_count = followers;
    c.accounts[id] = a;
}

void sort_tweets(Corpus& c) {
    std::sort(c.tweets.begin(), c.tweets.end(), [](const Tweet& a, const Tweet& b) {
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.tweet_id < b.tweet_id;
    });
}

Narrative narrative_over(const Corpus& c) {
    Narrative n;
    n.topic_index = 0;
    for (const Tweet& t : c.tweets) n.tweet_ids.push_back(t.tweet_id);
    std::sort(n.tweet_ids.begin(), n.tweet_ids.end());
    return n;
}

// simple NarrativeNetwork builder for synthetic graphs
NarrativeNetwork graph_of(std::size_t n,
                          const std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>>&
                              edges) {
    NarrativeNetwork net;
    for (std::size_t i = 0; i < n; i++) {
        const std::string id = "v" + std::to_string(i);
        net.vertices.push_back(id);
        net.index_of[id] = i;
    }
    net.out_edges.resize(n);
    net.stats.resize(n);
    for (const auto& [i, j, w] : edges) net.out_edges[i][j] += w;
    return net;
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "ioforge_network_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("build_network counts, drops self-retweets, records stats") {
    Corpus c;
    add_account(c, "alice", 500);
    add_account(c, "bob");
    add_account(c, "carol");
    c.tweets.push_back(make_tweet("t1", "alice", 100, "original"));
    c.tweets.push_back(make_retweet("t2", "bob", "alice", 200));
    c.tweets.push_back(make_retweet("t3", "bob", "alice", 300));
    c.tweets.push_back(make_retweet("t4", "carol", "carol", 400));  // self-retweet
    c.tweets.push_back(make_tweet("t5", "carol", 500, "unrelated"));
    sort_tweets(c);

    const NarrativeNetwork net = build_network(c, narrative_over(c));
    REQUIRE(net.vertices == std::vector<std::string>{"alice", "bob", "carol"});
    const std::size_t a = net.index_of.at("alice"), b = net.index_of.at("bob"),
                      k = net.index_of.at("carol");

    // j retweets i twice -> c_ij = 2
    CHECK(edge_count(net, a, b) == 2);
    CHECK(edge_count(net, b, a) == 0);
    // self-retweet dropped
    CHECK(edge_count(net, k, k) == 0);
    CHECK(total_edge_count(net) == 2);

    CHECK(net.stats[a].tweet_count == 1);
    CHECK(net.stats[a].retweets_received == 2);
    CHECK(net.stats[a].follower_count == 500);
    CHECK(net.stats[a].first_tweet_time == 100);
    CHECK(net.stats[b].tweet_count == 2);
    CHECK(net.stats[b].retweets_received == 0);
    CHECK(net.stats[b].first_tweet_time == 200);
    CHECK(net.stats[k].tweet_count == 2);
    CHECK(net.stats[k].first_tweet_time == 400);
}

TEST_CASE("build_network: no retweets -> edgeless network over matched authors") {
    Corpus c;
    add_account(c, "a");
    add_account(c, "b");
    c.tweets.push_back(make_tweet("t1", "a", 1, "x"));
    c.tweets.push_back(make_tweet("t2", "b", 2, "y"));
    sort_tweets(c);

    const NarrativeNetwork net = build_network(c, narrative_over(c));
    CHECK(net.vertices.size() == 2);
    CHECK(total_edge_count(net) == 0);
}

TEST_CASE("build_network: retweet source outside matched authors becomes a vertex") {
    Corpus c;
    add_account(c, "poster");
    add_account(c, "amplifier");
    c.tweets.push_back(make_tweet("t0", "poster", 1, "seed"));
    c.tweets.push_back(make_retweet("t1", "amplifier", "poster", 2));
    sort_tweets(c);

    Narrative n;
    n.tweet_ids = {"t1"};  // only the retweet is matched
    const NarrativeNetwork net = build_network(c, n);
    CHECK(net.vertices == std::vector<std::string>{"amplifier", "poster"});
    CHECK(edge_count(net, net.index_of.at("poster"), net.index_of.at("amplifier")) == 1);
    // source's first matched activity is the retweet's timestamp
    CHECK(net.stats[net.index_of.at("poster")].first_tweet_time == 2);
    CHECK(net.stats[net.index_of.at("poster")].tweet_count == 0);

    Narrative missing;
    missing.tweet_ids = {"nope"};
    CHECK_THROWS(build_network(c, missing));
}

TEST_CASE("conservation: total edge count equals narrative retweet events") {
    std::mt19937_64 eng = make_engine(77);
    Corpus c;
    const int n_accounts = 8;
    for (int i = 0; i < n_accounts; i++) add_account(c, "u" + std::to_string(i));
    std::uniform_int_distribution<int> pick(0, n_accounts - 1);
    int expected = 0;
    for (int t = 0; t < 200; t++) {
        const int author = pick(eng);
        const int source = pick(eng);
        if (t % 3 == 0) {
            c.tweets.push_back(
                make_tweet("t" + std::to_string(t), "u" + std::to_string(author), t, "post"));
        } else {
            c.tweets.push_back(make_retweet("t" + std::to_string(t),
                                            "u" + std::to_string(author),
                                            "u" + std::to_string(source), t));
            if (author != source) expected++;
        }
    }
    sort_tweets(c);
    const NarrativeNetwork net = build_network(c, narrative_over(c));
    CHECK(total_edge_count(net) == expected);
}

TEST_CASE("pagerank: symmetric 2-cycle -> both 0.5") {
    const NarrativeNetwork net = graph_of(2, {{0, 1, 1}, {1, 0, 1}});
    const auto pr = pagerank(net);
    CHECK(pr[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(pr[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("pagerank: edgeless network -> uniform 1/N") {
    const NarrativeNetwork net = graph_of(5, {});
    const auto pr = pagerank(net);
    for (double v : pr) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("pagerank: a heavily retweeted source outranks its amplifiers") {
    // b and c each retweet a five times
    const NarrativeNetwork net = graph_of(3, {{0, 1, 5}, {0, 2, 5}});
    const auto pr = pagerank(net);
    CHECK(pr[0] > pr[1]);
    CHECK(pr[0] > pr[2]);
    CHECK(pr[1] == doctest::Approx(pr[2]).epsilon(1e-9));
}

TEST_CASE("pagerank matches dense-linear-solve oracle on 100 random digraphs") {
    std::mt19937_64 eng = make_engine(4242);
    std::uniform_int_distribution<std::size_t> size_dist(1, 10);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> weight_dist(1, 5);

    for (int trial = 0; trial < 100; trial++) {
        const std::size_t n = size_dist(eng);
        std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> edges;
        // walk_weights[to][from]: walker moves retweeter -> source
        std::vector<std::vector<double>> walk(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < n; j++) {
                if (i == j || unif(eng) > 0.35) continue;
                const std::int64_t w = weight_dist(eng);
                edges.push_back({i, j, w});  // influence i->j: j retweeted i
                walk[i][j] += static_cast<double>(w);
            }
        const NarrativeNetwork net = graph_of(n, edges);
        const auto pr = pagerank(net, 0.85, 1e-14);
        const auto oracle = oracles::dense_pagerank(walk, 0.85);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            CHECK(pr[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
            sum += pr[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("sbm: complete graph selects B=1 over B=2") {
    std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> edges;
    for (std::size_t i = 0; i < 4; i++)
        for (std::size_t j = i + 1; j < 4; j++) edges.push_back({i, j, 1});
    const NarrativeNetwork net = graph_of(4, edges);

    // analytic description lengths for K4: one block vs the even split
    const double dl1 = sbm_description_length(net, {0, 0, 0, 0});
    const double dl2 = sbm_description_length(net, {0, 0, 1, 1});
    const double fit1 = 6.0 * std::log(12.0);
    const double h16 = (7.0 / 6.0) * std::log(7.0 / 6.0) - (1.0 / 6.0) * std::log(1.0 / 6.0);
    CHECK(dl1 == doctest::Approx(fit1 + 6.0 * h16).epsilon(1e-12));
    const double fit2 = 2.0 * std::log(18.0) + 4.0 * std::log(9.0);
    const double h05 = 1.5 * std::log(1.5) - 0.5 * std::log(0.5);
    CHECK(dl2 == doctest::Approx(fit2 + 6.0 * h05 + 4.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(dl1 < dl2);

    const Partition p = fit_sbm(net, {1, 2}, 50, 9);
    CHECK(p.num_blocks == 1);
    CHECK(p.description_length == doctest::Approx(dl1).epsilon(1e-12));
}

TEST_CASE("sbm: single vertex -> one block") {
    const NarrativeNetwork net = graph_of(1, {});
    const Partition p = fit_sbm(net, {1, 2, 3}, 10, 1);
    CHECK(p.num_blocks == 1);
    CHECK(p.block_of == std::vector<int>{0});
}

TEST_CASE("sbm: planted 2-block graph recovered exactly in >= 18/20 seeds") {
    int exact = 0;
    for (std::uint64_t seed = 1; seed <= 20; seed++) {
        const PlantedBlocksData data = make_planted_blocks(60, 2, 0.3, 0.01, seed);
        const Partition p = fit_sbm(data.net, {1, 2, 3}, 60, seed);
        if (p.num_blocks != 2) continue;
        // compare up to label permutation
        bool same = true, flipped = true;
        for (std::size_t v = 0; v < 60; v++) {
            if (p.block_of[v] != data.true_block[v]) same = false;
            if (p.block_of[v] != 1 - data.true_block[v]) flipped = false;
        }
        if (same || flipped) exact++;
    }
    CHECK(exact >= 18);
}

TEST_CASE("sbm: returned partition is locally optimal (zero-temperature stability)") {
    const PlantedBlocksData data = make_planted_blocks(40, 2, 0.4, 0.02, 3);
    const Partition p = fit_sbm(data.net, {2}, 40, 3);
    const double dl = p.description_length;
    // no single-vertex move strictly improves the description length
    for (std::size_t v = 0; v < data.net.vertices.size(); v++) {
        for (int s = 0; s < p.num_blocks; s++) {
            if (s == p.block_of[v]) continue;
            std::vector<int> moved = p.block_of;
            moved[v] = s;
            CHECK(sbm_description_length(data.net, moved) >= dl - 1e-9);
        }
    }
}

TEST_CASE("graphml export round-trips the edge multiset") {
    Corpus c;
    add_account(c, "alice");
    add_account(c, "bob");
    add_account(c, "carol");
    c.tweets.push_back(make_tweet("t1", "alice", 1, "post"));
    c.tweets.push_back(make_retweet("t2", "bob", "alice", 2));
    c.tweets.push_back(make_retweet("t3", "bob", "alice", 3));
    c.tweets.push_back(make_retweet("t4", "carol", "bob", 4));
    sort_tweets(c);
    const NarrativeNetwork net = build_network(c, narrative_over(c));

    Partition part;
    part.block_of = {0, 1, 1};
    part.num_blocks = 2;
    VertexAttributes attrs;
    attrs["score"] = {{"alice", 0.9}, {"bob", 0.1}};

    const auto dir = temp_dir();
    const std::string path = (dir / "net.graphml").string();
    export_graphml(net, part, attrs, path);

    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string xml = ss.str();

    std::multiset<std::tuple<std::string, std::string, long>> got;
    const std::regex edge_re(
        "<edge source=\"([^\"]*)\" target=\"([^\"]*)\"><data "
        "key=\"weight\">([0-9]+)</data></edge>");
    for (auto it = std::sregex_iterator(xml.begin(), xml.end(), edge_re);
         it != std::sregex_iterator(); ++it)
        got.insert({(*it)[1], (*it)[2], std::stol((*it)[3])});
    const std::multiset<std::tuple<std::string, std::string, long>> want = {
        {"alice", "bob", 2}, {"bob", "carol", 1}};
    CHECK(got == want);
    CHECK(xml.find("<data key=\"community\">0</data>") != std::string::npos);
    CHECK(xml.find("<data key=\"score\">") != std::string::npos);

    // DOT exports without error and names every vertex
    const std::string dot_path = (dir / "net.dot").string();
    export_dot(net, part, attrs, dot_path);
    std::ifstream din(dot_path);
    std::stringstream ds;
    ds << din.rdbuf();
    for (const std::string& v : net.vertices)
        CHECK(ds.str().find("\"" + v + "\"") != std::string::npos);
}

TEST_CASE("empty network exports a valid empty document") {
    NarrativeNetwork net;
    const auto dir = temp_dir();
    const std::string path = (dir / "empty.graphml").string();
    export_graphml(net, std::nullopt, {}, path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("<graphml") != std::string::npos);
    CHECK(ss.str().find("</graphml>") != std::string::npos);
    CHECK(ss.str().find("<node") == std::string::npos);
}

TEST_CASE("attribute for non-vertex is an error") {
    const NarrativeNetwork net = graph_of(2, {{0, 1, 1}});
    VertexAttributes attrs;
    attrs["score"] = {{"ghost", 1.0}};
    const auto dir = temp_dir();
    CHECK_THROWS(export_graphml(net, std::nullopt, attrs, (dir / "x.graphml").string()));
    CHECK_THROWS(export_dot(net, std::nullopt, attrs, (dir / "x.dot").string()));
}

TEST_CASE("community and centrality CSVs") {
    const NarrativeNetwork net = graph_of(2, {{0, 1, 3}});
    Partition p;
    p.block_of = {0, 1};
    p.num_blocks = 2;
    const auto dir = temp_dir();
    const std::string cpath = (dir / "comm.csv").string();
    write_community_csv(net, p, cpath);
    std::ifstream in(cpath);
    std::string line;
    std::getline(in, line);
    CHECK(line == "account_id,block");
    std::getline(in, line);
    CHECK(line == "v0,0");
    std::getline(in, line);
    CHECK(line == "v1,1");

    const std::string spath = (dir / "cent.csv").string();
    write_centrality_csv(net, {0.75, 0.25}, spath);
    std::ifstream sin(spath);
    std::getline(sin, line);
    CHECK(line == "account_id,score");
    std::getline(sin, line);
    CHECK(line == "v0,0.75");
}
