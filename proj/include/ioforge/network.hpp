#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ioforge/corpus.hpp"
#include "ioforge/topics.hpp"

namespace ioforge {

struct VertexStats {
    std::int64_t tweet_count = 0;        // matched tweets authored
    std::int64_t retweets_received = 0;  // matched retweets of this account
    std::int64_t follower_count = 0;
    std::int64_t first_tweet_time = 0;   // earliest matched activity (UTC seconds)
};

// Influence flows source -> amplifier: edge count c_ij is the number of
// matched retweets where j retweeted i.
struct NarrativeNetwork {
    std::vector<std::string> vertices;            // sorted account ids
    std::map<std::string, std::size_t> index_of;  // account id -> vertex index
    // out_edges[i][j] = c_ij (j retweeted i, c_ij times)
    std::vector<std::map<std::size_t, std::int64_t>> out_edges;
    std::vector<VertexStats> stats;
};

std::int64_t edge_count(const NarrativeNetwork& net, std::size_t i, std::size_t j);
std::int64_t total_edge_count(const NarrativeNetwork& net);
std::int64_t weighted_out_degree(const NarrativeNetwork& net, std::size_t i);
std::int64_t weighted_in_degree(const NarrativeNetwork& net, std::size_t j);

// Vertices: authors of matched tweets plus endpoints of matched retweet
// edges; self-retweets dropped. Narrative tweet ids must exist in the corpus.
NarrativeNetwork build_network(const Corpus& corpus, const Narrative& narrative);

// Power iteration over the endorsement orientation (a retweet by j of i is a
// walk step j -> i), uniform teleport, dangling mass spread uniformly.
// Returns per-vertex scores aligned with net.vertices, summing to 1 +- 1e-9.
std::vector<double> pagerank(const NarrativeNetwork& net, double damping = 0.85,
                             double tol = 1e-10);

struct Partition {
    std::vector<int> block_of;  // per vertex index, contiguous 0..B-1
    int num_blocks = 0;
    double description_length = 0.0;  // nats
};

// Degree-corrected SBM description length (nats) of a block assignment over
// the undirected collapse of the count graph: fit term
// -(1/2) sum_rs e_rs ln(e_rs/(e_r e_s)) plus model complexity
// E*h(B(B+1)/(2E)) + N ln B with h(x)=(1+x)ln(1+x)-x ln x; B counts occupied
// blocks and e_rr doubles internal edge weight.
double sbm_description_length(const NarrativeNetwork& net, const std::vector<int>& block_of);

// For each B in b_range: agglomerative initialization down to B blocks, then
// `sweeps` single-vertex Metropolis sweeps (accept on description-length
// decrease, else with Boltzmann probability) followed by greedy sweeps to a
// local minimum. Returns the minimum-description-length partition.
Partition fit_sbm(const NarrativeNetwork& net, const std::vector<int>& b_range,
                  int sweeps = 100, std::uint64_t seed = 0);

// Per-vertex numeric attribute layers keyed by attribute name then account
// id; every referenced account must be a vertex.
using VertexAttributes = std::map<std::string, std::map<std::string, double>>;

void export_graphml(const NarrativeNetwork& net, const std::optional<Partition>& partition,
                    const VertexAttributes& attrs, const std::string& path);
void export_dot(const NarrativeNetwork& net, const std::optional<Partition>& partition,
                const VertexAttributes& attrs, const std::string& path);

void write_community_csv(const NarrativeNetwork& net, const Partition& partition,
                         const std::string& path);
void write_centrality_csv(const NarrativeNetwork& net, const std::vector<double>& scores,
                          const std::string& path);

}  // namespace ioforge
