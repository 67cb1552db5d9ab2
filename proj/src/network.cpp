#include "ioforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ioforge/rng.hpp"

namespace ioforge {

namespace {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::int64_t edge_count(const NarrativeNetwork& net, std::size_t i, std::size_t j) {
    if (i >= net.vertices.size() || j >= net.vertices.size()) return 0;
    auto it = net.out_edges[i].find(j);
    return it == net.out_edges[i].end() ? 0 : it->second;
}

std::int64_t total_edge_count(const NarrativeNetwork& net) {
    std::int64_t total = 0;
    for (const auto& row : net.out_edges)
        for (const auto& [j, c] : row) {
            (void)j;
            total += c;
        }
    return total;
}

std::int64_t weighted_out_degree(const NarrativeNetwork& net, std::size_t i) {
    std::int64_t total = 0;
    for (const auto& [j, c] : net.out_edges[i]) {
        (void)j;
        total += c;
    }
    return total;
}

std::int64_t weighted_in_degree(const NarrativeNetwork& net, std::size_t j) {
    std::int64_t total = 0;
    for (const auto& row : net.out_edges) {
        auto it = row.find(j);
        if (it != row.end()) total += it->second;
    }
    return total;
}

NarrativeNetwork build_network(const Corpus& corpus, const Narrative& narrative) {
    std::unordered_map<std::string, const Tweet*> by_id;
    by_id.reserve(corpus.tweets.size());
    for (const Tweet& t : corpus.tweets) by_id[t.tweet_id] = &t;

    std::vector<const Tweet*> matched;
    matched.reserve(narrative.tweet_ids.size());
    for (const std::string& id : narrative.tweet_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::runtime_error("build_network: narrative tweet not in corpus: " + id);
        matched.push_back(it->second);
    }

    std::set<std::string> vertex_set;
    for (const Tweet* t : matched) {
        vertex_set.insert(t->account_id);
        if (t->is_retweet && t->retweet_of_account &&
            *t->retweet_of_account != t->account_id)
            vertex_set.insert(*t->retweet_of_account);
    }

    NarrativeNetwork net;
    net.vertices.assign(vertex_set.begin(), vertex_set.end());
    for (std::size_t i = 0; i < net.vertices.size(); i++) net.index_of[net.vertices[i]] = i;
    net.out_edges.resize(net.vertices.size());
    net.stats.resize(net.vertices.size());
    for (std::size_t i = 0; i < net.vertices.size(); i++) {
        auto it = corpus.accounts.find(net.vertices[i]);
        if (it != corpus.accounts.end())
            net.stats[i].follower_count = it->second.follower_count;
        net.stats[i].first_tweet_time = std::numeric_limits<std::int64_t>::max();
    }

    auto note_time = [&](std::size_t v, std::int64_t at) {
        net.stats[v].first_tweet_time = std::min(net.stats[v].first_tweet_time, at);
    };
    for (const Tweet* t : matched) {
        const std::size_t author = net.index_of.at(t->account_id);
        net.stats[author].tweet_count++;
        note_time(author, t->created_at);
        if (!t->is_retweet || !t->retweet_of_account) continue;
        if (*t->retweet_of_account == t->account_id) continue;  // self-retweet
        const std::size_t source = net.index_of.at(*t->retweet_of_account);
        net.out_edges[source][author]++;  // influence source -> retweeter
        net.stats[source].retweets_received++;
        note_time(source, t->created_at);
    }
    for (VertexStats& s : net.stats)
        if (s.first_tweet_time == std::numeric_limits<std::int64_t>::max())
            s.first_tweet_time = 0;
    return net;
}

std::vector<double> pagerank(const NarrativeNetwork& net, double damping, double tol) {
    const std::size_t n = net.vertices.size();
    if (n == 0) throw std::runtime_error("pagerank: empty network");

    // walk orientation: retweeter j steps to source i along c_ij
    std::vector<double> walk_out(n, 0.0);  // total retweets made by j
    for (std::size_t i = 0; i < n; i++)
        for (const auto& [j, c] : net.out_edges[i]) walk_out[j] += static_cast<double>(c);

    std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
    for (int iter = 0; iter < 100000; iter++) {
        double dangling = 0.0;
        for (std::size_t j = 0; j < n; j++)
            if (walk_out[j] == 0.0) dangling += x[j];
        const double base = (1.0 - damping + damping * dangling) / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::size_t i = 0; i < n; i++)
            for (const auto& [j, c] : net.out_edges[i])
                next[i] += damping * x[j] * static_cast<double>(c) / walk_out[j];
        double diff = 0.0;
        for (std::size_t i = 0; i < n; i++) diff += std::abs(next[i] - x[i]);
        x.swap(next);
        if (diff <= tol) break;
    }
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : x) v /= sum;
    return x;
}

namespace {

// undirected collapse of the count graph
struct UGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> adj;  // (u, weight)
    std::vector<std::int64_t> degree;                                    // weighted
    std::int64_t total_edges = 0;                                        // sum of weights
};

UGraph collapse(const NarrativeNetwork& net) {
    UGraph g;
    g.n = net.vertices.size();
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> und;
    for (std::size_t i = 0; i < g.n; i++)
        for (const auto& [j, c] : net.out_edges[i]) {
            const auto key = std::minmax(i, j);
            und[{key.first, key.second}] += c;
        }
    g.adj.resize(g.n);
    g.degree.assign(g.n, 0);
    for (const auto& [key, w] : und) {
        g.adj[key.first].push_back({key.second, w});
        g.adj[key.second].push_back({key.first, w});
        g.degree[key.first] += w;
        g.degree[key.second] += w;
        g.total_edges += w;
    }
    return g;
}

double h_complexity(double x) {
    if (x <= 0.0) return 0.0;
    return (1.0 + x) * std::log(1.0 + x) - x * std::log(x);
}

// state for incremental description-length moves
struct SbmState {
    const UGraph* g = nullptr;
    int slots = 0;                              // block id universe 0..slots-1
    std::vector<int> block_of;                  // per vertex
    std::vector<std::vector<std::int64_t>> e;   // slots x slots, e[r][r] = 2*internal
    std::vector<std::int64_t> e_r;              // row sums
    std::vector<std::int64_t> n_r;              // vertices per block
    int occupied = 0;

    void init(const UGraph& graph, const std::vector<int>& assignment, int num_slots) {
        g = &graph;
        slots = num_slots;
        block_of = assignment;
        e.assign(slots, std::vector<std::int64_t>(slots, 0));
        e_r.assign(slots, 0);
        n_r.assign(slots, 0);
        for (std::size_t v = 0; v < g->n; v++) n_r[block_of[v]]++;
        for (std::size_t v = 0; v < g->n; v++)
            for (const auto& [u, w] : g->adj[v]) {
                if (u < v) continue;  // each undirected edge once
                const int r = block_of[v], s = block_of[u];
                if (r == s) {
                    e[r][r] += 2 * w;
                } else {
                    e[r][s] += w;
                    e[s][r] += w;
                }
                e_r[r] += w;
                e_r[s] += w;
            }
        occupied = 0;
        for (int r = 0; r < slots; r++)
            if (n_r[r] > 0) occupied++;
    }

    double fit_term() const {
        double f = 0.0;
        for (int r = 0; r < slots; r++)
            for (int s = 0; s < slots; s++)
                if (e[r][s] > 0)
                    f += static_cast<double>(e[r][s]) *
                         std::log(static_cast<double>(e[r][s]) /
                                  (static_cast<double>(e_r[r]) * static_cast<double>(e_r[s])));
        return -0.5 * f;
    }

    double penalty(int b) const {
        const double n = static_cast<double>(g->n);
        double p = n * std::log(static_cast<double>(b));
        if (g->total_edges > 0) {
            const double ecount = static_cast<double>(g->total_edges);
            const double x = static_cast<double>(b) * (static_cast<double>(b) + 1.0) /
                             (2.0 * ecount);
            p += ecount * h_complexity(x);
        }
        return p;
    }

    double description_length() const { return fit_term() + penalty(occupied); }

    // fit-term contribution of all entries whose row or column is r or s
    double affected_fit(int r, int s) const {
        auto g_term = [&](int a, int b) -> double {
            if (e[a][b] <= 0) return 0.0;
            return static_cast<double>(e[a][b]) *
                   std::log(static_cast<double>(e[a][b]) /
                            (static_cast<double>(e_r[a]) * static_cast<double>(e_r[b])));
        };
        double f = 0.0;
        for (int y = 0; y < slots; y++) {
            if (y == r || y == s) continue;
            f += 2.0 * (g_term(r, y) + g_term(s, y));
        }
        f += g_term(r, r) + g_term(s, s) + 2.0 * g_term(r, s);
        return -0.5 * f;
    }

    // apply the e/e_r/n_r updates of moving v: r -> s (does not touch block_of)
    void apply_move(std::size_t v, int r, int s) {
        std::int64_t k_v = 0;
        for (const auto& [u, w] : g->adj[v]) {
            if (u == v) continue;  // no self-loops by construction
            const int b = block_of[u];
            k_v += w;
            if (b == r) {
                e[r][r] -= 2 * w;
                e[r][s] += w;
                e[s][r] += w;
            } else if (b == s) {
                e[r][s] -= w;
                e[s][r] -= w;
                e[s][s] += 2 * w;
            } else {
                e[r][b] -= w;
                e[b][r] -= w;
                e[s][b] += w;
                e[b][s] += w;
            }
        }
        e_r[r] -= k_v;
        e_r[s] += k_v;
        n_r[r]--;
        n_r[s]++;
        if (n_r[r] == 0) occupied--;
        if (n_r[s] == 1) occupied++;
    }

    // delta description length of moving v to block s (state restored)
    double move_delta(std::size_t v, int s) {
        const int r = block_of[v];
        if (r == s) return 0.0;
        const double fit_before = affected_fit(r, s);
        const int occ_before = occupied;
        apply_move(v, r, s);
        const double fit_after = affected_fit(r, s);
        const double d = (fit_after - fit_before) + (penalty(occupied) - penalty(occ_before));
        apply_move(v, s, r);  // revert; only neighbor blocks are read
        return d;
    }

    void commit_move(std::size_t v, int s) {
        const int r = block_of[v];
        if (r == s) return;
        apply_move(v, r, s);
        block_of[v] = s;
    }
};

}  // namespace

double sbm_description_length(const NarrativeNetwork& net, const std::vector<int>& block_of) {
    if (block_of.size() != net.vertices.size())
        throw std::runtime_error("sbm_description_length: assignment size mismatch");
    if (net.vertices.empty()) return 0.0;
    const UGraph g = collapse(net);
    const int max_block = *std::max_element(block_of.begin(), block_of.end());
    SbmState st;
    st.init(g, block_of, max_block + 1);
    return st.description_length();
}

Partition fit_sbm(const NarrativeNetwork& net, const std::vector<int>& b_range, int sweeps,
                  std::uint64_t seed) {
    if (b_range.empty()) throw std::runtime_error("fit_sbm: empty B range");
    const std::size_t n = net.vertices.size();
    Partition best;
    if (n == 0) {
        best.num_blocks = 0;
        best.description_length = 0.0;
        return best;
    }
    const UGraph g = collapse(net);

    bool have_best = false;
    for (int b_raw : b_range) {
        const int b = std::max(1, std::min<int>(b_raw, static_cast<int>(n)));
        std::mt19937_64 eng = make_engine(derive_seed(seed, "sbm:B=" + std::to_string(b)));

        // agglomerative init: every vertex its own block, greedy best merges
        SbmState st;
        std::vector<int> singleton(n);
        for (std::size_t v = 0; v < n; v++) singleton[v] = static_cast<int>(v);
        st.init(g, singleton, static_cast<int>(n));
        std::vector<int> active;
        for (int r = 0; r < st.slots; r++)
            if (st.n_r[r] > 0) active.push_back(r);
        while (static_cast<int>(active.size()) > b) {
            // best merge (a absorbs c) by fit-term delta; the occupied-count
            // penalty change is identical for every pair
            double best_delta = std::numeric_limits<double>::infinity();
            std::size_t best_ai = 0, best_ci = 1;
            for (std::size_t ai = 0; ai < active.size(); ai++) {
                for (std::size_t ci = ai + 1; ci < active.size(); ci++) {
                    const int a = active[ai], c = active[ci];
                    auto g_term = [&](std::int64_t w, std::int64_t da,
                                      std::int64_t db) -> double {
                        if (w <= 0) return 0.0;
                        return static_cast<double>(w) *
                               std::log(static_cast<double>(w) /
                                        (static_cast<double>(da) * static_cast<double>(db)));
                    };
                    double before = 0.0, after = 0.0;
                    const std::int64_t ea = st.e_r[a], ec = st.e_r[c];
                    for (int y : active) {
                        if (y == a || y == c) continue;
                        before += 2.0 * (g_term(st.e[a][y], ea, st.e_r[y]) +
                                         g_term(st.e[c][y], ec, st.e_r[y]));
                        after += 2.0 * g_term(st.e[a][y] + st.e[c][y], ea + ec, st.e_r[y]);
                    }
                    before += g_term(st.e[a][a], ea, ea) + g_term(st.e[c][c], ec, ec) +
                              2.0 * g_term(st.e[a][c], ea, ec);
                    after += g_term(st.e[a][a] + st.e[c][c] + 2 * st.e[a][c], ea + ec, ea + ec);
                    const double delta = -0.5 * (after - before);
                    if (delta < best_delta) {
                        best_delta = delta;
                        best_ai = ai;
                        best_ci = ci;
                    }
                }
            }
            const int a = active[best_ai], c = active[best_ci];
            // merge block c into a
            for (std::size_t v = 0; v < n; v++)
                if (st.block_of[v] == c) st.block_of[v] = a;
            for (int y = 0; y < st.slots; y++) {
                if (y == a || y == c) continue;
                st.e[a][y] += st.e[c][y];
                st.e[y][a] += st.e[y][c];
                st.e[c][y] = 0;
                st.e[y][c] = 0;
            }
            st.e[a][a] += st.e[c][c] + 2 * st.e[a][c];
            st.e[a][c] = 0;
            st.e[c][a] = 0;
            st.e[c][c] = 0;
            st.e_r[a] += st.e_r[c];
            st.e_r[c] = 0;
            st.n_r[a] += st.n_r[c];
            st.n_r[c] = 0;
            st.occupied--;
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_ci));
        }

        // compact to slots 0..b-1 and rebuild exact counts
        std::map<int, int> relabel;
        for (std::size_t v = 0; v < n; v++)
            if (!relabel.count(st.block_of[v]))
                relabel[st.block_of[v]] = static_cast<int>(relabel.size());
        std::vector<int> assignment(n);
        for (std::size_t v = 0; v < n; v++) assignment[v] = relabel[st.block_of[v]];
        st.init(g, assignment, b);

        double current_dl = st.description_length();
        std::vector<int> best_assign = st.block_of;
        double best_dl = current_dl;

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::uniform_int_distribution<int> pick_block(0, b - 1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        // Metropolis phase (T=1)
        for (int sweep = 0; sweep < sweeps; sweep++) {
            std::shuffle(order.begin(), order.end(), eng);
            for (std::size_t v : order) {
                const int s = pick_block(eng);
                if (s == st.block_of[v]) continue;
                const double delta = st.move_delta(v, s);
                if (delta <= 0.0 || unif(eng) < std::exp(-delta)) {
                    st.commit_move(v, s);
                    current_dl += delta;
                    if (current_dl < best_dl) {
                        best_dl = current_dl;
                        best_assign = st.block_of;
                    }
                }
            }
        }

        // greedy phase (T=0) from the best state seen
        st.init(g, best_assign, b);
        current_dl = st.description_length();
        for (int sweep = 0; sweep < std::max(sweeps, 1); sweep++) {
            bool moved = false;
            for (std::size_t v = 0; v < n; v++) {
                int arg = st.block_of[v];
                double best_move = -1e-12;
                for (int s = 0; s < b; s++) {
                    if (s == st.block_of[v]) continue;
                    const double delta = st.move_delta(v, s);
                    if (delta < best_move) {
                        best_move = delta;
                        arg = s;
                    }
                }
                if (arg != st.block_of[v]) {
                    const double before = current_dl;
                    st.commit_move(v, arg);
                    current_dl += best_move;
                    if (current_dl > before)
                        throw std::logic_error("fit_sbm: description length increased at T=0");
                    moved = true;
                }
            }
            if (!moved) break;
        }

        // contiguous relabel + exact recompute
        std::map<int, int> final_relabel;
        for (std::size_t v = 0; v < n; v++)
            if (!final_relabel.count(st.block_of[v]))
                final_relabel[st.block_of[v]] = static_cast<int>(final_relabel.size());
        Partition p;
        p.block_of.resize(n);
        for (std::size_t v = 0; v < n; v++) p.block_of[v] = final_relabel[st.block_of[v]];
        p.num_blocks = static_cast<int>(final_relabel.size());
        p.description_length = sbm_description_length(net, p.block_of);

        if (!have_best || p.description_length < best.description_length) {
            best = p;
            have_best = true;
        }
    }
    return best;
}

namespace {

void check_attrs(const NarrativeNetwork& net, const VertexAttributes& attrs) {
    for (const auto& [name, values] : attrs)
        for (const auto& [vertex, v] : values) {
            (void)v;
            if (!net.index_of.count(vertex))
                throw std::runtime_error("export: attribute '" + name +
                                         "' references non-vertex: " + vertex);
        }
}

}  // namespace

void export_graphml(const NarrativeNetwork& net, const std::optional<Partition>& partition,
                    const VertexAttributes& attrs, const std::string& path) {
    check_attrs(net, attrs);
    if (partition && partition->block_of.size() != net.vertices.size())
        throw std::runtime_error("export_graphml: partition size mismatch");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out << "  <key id=\"tweet_count\" for=\"node\" attr.name=\"tweet_count\" "
           "attr.type=\"long\"/>\n";
    out << "  <key id=\"retweets_received\" for=\"node\" attr.name=\"retweets_received\" "
           "attr.type=\"long\"/>\n";
    out << "  <key id=\"follower_count\" for=\"node\" attr.name=\"follower_count\" "
           "attr.type=\"long\"/>\n";
    out << "  <key id=\"first_tweet_time\" for=\"node\" attr.name=\"first_tweet_time\" "
           "attr.type=\"long\"/>\n";
    if (partition)
        out << "  <key id=\"community\" for=\"node\" attr.name=\"community\" "
               "attr.type=\"int\"/>\n";
    for (const auto& [name, values] : attrs) {
        (void)values;
        out << "  <key id=\"" << xml_escape(name) << "\" for=\"node\" attr.name=\""
            << xml_escape(name) << "\" attr.type=\"double\"/>\n";
    }
    out << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n";
    out << "  <graph id=\"narrative\" edgedefault=\"directed\">\n";
    for (std::size_t i = 0; i < net.vertices.size(); i++) {
        const std::string& id = net.vertices[i];
        out << "    <node id=\"" << xml_escape(id) << "\">\n";
        out << "      <data key=\"tweet_count\">" << net.stats[i].tweet_count << "</data>\n";
        out << "      <data key=\"retweets_received\">" << net.stats[i].retweets_received
            << "</data>\n";
        out << "      <data key=\"follower_count\">" << net.stats[i].follower_count
            << "</data>\n";
        out << "      <data key=\"first_tweet_time\">" << net.stats[i].first_tweet_time
            << "</data>\n";
        if (partition)
            out << "      <data key=\"community\">" << partition->block_of[i] << "</data>\n";
        for (const auto& [name, values] : attrs) {
            auto it = values.find(id);
            if (it != values.end())
                out << "      <data key=\"" << xml_escape(name) << "\">"
                    << format_g17(it->second) << "</data>\n";
        }
        out << "    </node>\n";
    }
    for (std::size_t i = 0; i < net.vertices.size(); i++)
        for (const auto& [j, c] : net.out_edges[i]) {
            out << "    <edge source=\"" << xml_escape(net.vertices[i]) << "\" target=\""
                << xml_escape(net.vertices[j]) << "\">";
            out << "<data key=\"weight\">" << c << "</data></edge>\n";
        }
    out << "  </graph>\n</graphml>\n";
}

void export_dot(const NarrativeNetwork& net, const std::optional<Partition>& partition,
                const VertexAttributes& attrs, const std::string& path) {
    check_attrs(net, attrs);
    if (partition && partition->block_of.size() != net.vertices.size())
        throw std::runtime_error("export_dot: partition size mismatch");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "digraph narrative {\n";
    for (std::size_t i = 0; i < net.vertices.size(); i++) {
        out << "  \"" << dot_escape(net.vertices[i]) << "\" [tweet_count="
            << net.stats[i].tweet_count;
        if (partition) out << ", community=" << partition->block_of[i];
        for (const auto& [name, values] : attrs) {
            auto it = values.find(net.vertices[i]);
            if (it != values.end())
                out << ", " << name << "=\"" << format_g17(it->second) << "\"";
        }
        out << "];\n";
    }
    for (std::size_t i = 0; i < net.vertices.size(); i++)
        for (const auto& [j, c] : net.out_edges[i])
            out << "  \"" << dot_escape(net.vertices[i]) << "\" -> \""
                << dot_escape(net.vertices[j]) << "\" [weight=" << c << "];\n";
    out << "}\n";
}

void write_community_csv(const NarrativeNetwork& net, const Partition& partition,
                         const std::string& path) {
    if (partition.block_of.size() != net.vertices.size())
        throw std::runtime_error("write_community_csv: partition size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "account_id,block\n";
    for (std::size_t i = 0; i < net.vertices.size(); i++)
        out << net.vertices[i] << "," << partition.block_of[i] << "\n";
}

void write_centrality_csv(const NarrativeNetwork& net, const std::vector<double>& scores,
                          const std::string& path) {
    if (scores.size() != net.vertices.size())
        throw std::runtime_error("write_centrality_csv: score size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "account_id,score\n";
    for (std::size_t i = 0; i < net.vertices.size(); i++)
        out << net.vertices[i] << "," << format_g17(scores[i]) << "\n";
}

}  // namespace ioforge
