#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ioforge/causal.hpp"
#include "ioforge/corpus.hpp"
#include "ioforge/network.hpp"
#include "ioforge/topics.hpp"

namespace ioforge {

// ---- planted-topic corpus (topic recovery oracle) -------------------------

struct PlantedTopicsSpec {
    int num_topics = 3;
    int words_per_topic = 10;  // disjoint vocabularies ("t<k>w<j>")
    int docs_per_topic = 1000;
    int tokens_per_doc = 10;
};

struct PlantedTopicsData {
    std::vector<TokenizedDoc> docs;
    std::vector<std::vector<std::string>> topic_vocab;  // truth, per topic
    std::vector<int> true_topic;                        // per doc
};

// Documents drawn uniformly from their topic's disjoint vocabulary.
PlantedTopicsData make_planted_topics(const PlantedTopicsSpec& spec, std::uint64_t seed);

// ---- planted-partition network (community recovery oracle) ----------------

struct PlantedBlocksData {
    NarrativeNetwork net;
    std::vector<int> true_block;  // per vertex index
};

// Vertices split evenly into n_blocks groups ("v<i>"); each unordered pair
// gets a unit directed edge with probability p_in (same block) or p_out.
PlantedBlocksData make_planted_blocks(std::size_t n_vertices, int n_blocks, double p_in,
                                      double p_out, std::uint64_t seed);

// ---- synthetic tweet corpus (end-to-end pipeline fixture) ------------------

struct SynthCorpusSpec {
    int num_topics = 3;
    int words_per_topic = 12;   // disjoint vocabularies ("t<k>w<j>")
    int organic_accounts = 30;  // ordinary users, mostly REAL-leaning metadata
    int troll_accounts = 6;     // bare profile, large following, link spam
    int media_accounts = 3;     // organization-scale follower counts
    int tweets_per_account = 20;
    int tokens_per_tweet = 9;
    int cascade_sources = 2;    // trolls seeding retweet cascades
    int cascade_branching = 2;  // amplifier slots per cascade vertex
    int cascade_depth = 2;      // retweet generations below the original
    // Probability each amplifier slot is filled (1 = deterministic full
    // tree). Below 1 the source always keeps at least one amplifier.
    double branch_keep_prob = 1.0;
    int originals_per_source = 1;  // hashtagged originals each source posts
    // Retweets an amplifier posts of its parent, by level (last entry repeats
    // for deeper levels; empty means one retweet per link).
    std::vector<int> retweets_per_level;
    // Extra hashtagged originals an amplifier posts, by level (last entry
    // repeats; empty means none). Lets narrative activity scale with cascade
    // exposure rather than degree alone. Ignored under planted_outcomes.
    std::vector<int> amplifier_extra_originals;
    // When true, retweet multiplicities draw uniformly from 1..max (the
    // retweets_per_level entry) and each amplifier's extra originals draw
    // from the narrative outcome model at its exact cascade exposure:
    // extras ~ Poisson(exp(mu + tau * sum_n prod_{k<=n} gamma_k * s_n)).
    bool planted_outcomes = false;
    double planted_mu = 0.7;
    double planted_tau = 1.2;
    double planted_gamma1 = 0.7;
    double planted_gamma2 = 0.5;  // reused beyond the second hop
    int bystander_accounts = 0;   // accounts posting hashtagged originals
    int bystander_originals = 1;  // outside any cascade (zero exposure)
    // Noise retweet edges that decorrelate graph degree from cascade
    // exposure: amplifiers and sources also retweet random bystander
    // originals, and bystanders retweet other bystanders or deepest-level
    // amplifiers (never anything that would add modeled exposure at a
    // baseline account). Multiplicities draw uniformly from 1..max; under
    // planted_outcomes the per-account link count itself draws uniformly
    // from 2..links (1..links for sources) so retweets-made varies across
    // zero-exposure accounts. Zero links disables the edges.
    int amplifier_noise_links = 0;
    int amplifier_noise_max = 3;
    int bystander_retweet_links = 0;
    int bystander_retweet_max = 3;
    int source_noise_links = 0;
    int source_noise_max = 1;
    int narrative_topic = 0;    // cascades draw text from this topic
    std::string narrative_hashtag = "opstorm";
    bool mark_known_labels = true;  // trolls known_io, media known_benign
    std::int64_t start_time = 1500000000;
    std::int64_t time_step = 60;
};

struct SynthCorpusData {
    Corpus corpus;
    std::vector<std::vector<std::string>> topic_vocab;  // truth, per topic
    std::vector<std::string> io_accounts;               // troll ids
    std::vector<std::string> cascade_source_ids;        // subset of io_accounts
    std::string narrative_hashtag;
};

// Archetype corpus. Organic accounts tweet random planted topics with
// ordinary-user metadata; media accounts do the same with organization-scale
// follower counts; trolls have empty profiles, >3000 following, link-heavy
// tweets, and push the narrative topic. Each cascade source posts one
// hashtagged narrative original retweeted down a tree with the configured
// branching and depth (distinct amplifiers per vertex; levels below the first
// retweet the retweet above them). Deterministic given the seed.
SynthCorpusData synth_corpus(const SynthCorpusSpec& spec, std::uint64_t seed);

// Writes tweets.jsonl, accounts.jsonl, and truth.json under out_dir (created
// if missing).
void write_synth_corpus(const SynthCorpusData& data, const std::string& out_dir);

// ---- synthetic network outcomes (causal recovery fixture) -----------------

struct SynthOutcomesSpec {
    std::size_t n_vertices = 200;
    double edge_prob = 0.02;         // directed Erdos-Renyi, no self-loops
    std::int64_t weight_min = 8;     // uniform integer edge counts
    std::int64_t weight_max = 15;
    std::size_t num_sources = 30;    // vertices with Z_i = 1
    std::size_t num_covariates = 0;  // standard-normal columns
};

struct SynthOutcomesData {
    EdgeCounts c;          // influence-prior means (retweet counts)
    EdgeCounts adjacency;  // realized influence draw A ~ Poisson(c)
    Rows X;                // covariates (empty rows when num_covariates == 0)
    std::vector<int> Z;
    std::vector<std::int64_t> Y;  // simulated from the realized adjacency
    OutcomeParams truth;
};

// Graph, sources, covariates, influence realization, and outcomes all derive
// from `seed`; truth.beta must have num_covariates entries.
SynthOutcomesData synth_network_outcomes(const SynthOutcomesSpec& spec,
                                         const OutcomeParams& truth, std::uint64_t seed);

}  // namespace ioforge
