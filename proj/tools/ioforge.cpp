#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ioforge/harness.hpp"
#include "ioforge/synth.hpp"

namespace {

struct StageOpts {
    std::string config;
    std::int64_t seed = 0;
    std::vector<std::string> overrides;
    std::string topics;
    std::string hashtag;
    CLI::App* sub = nullptr;
};

ioforge::PipelineConfig build_config(const StageOpts& opts) {
    ioforge::PipelineConfig cfg = ioforge::load_config(opts.config);
    if (opts.sub->count("--seed") > 0) {
        ioforge::apply_override(cfg, "seed", std::to_string(opts.seed));
    }
    for (const std::string& kv : opts.overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        }
        ioforge::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.sub->count("--topics") > 0) {
        ioforge::apply_override(cfg, "narrative.topics", opts.topics);
    }
    if (opts.sub->count("--hashtag") > 0) {
        ioforge::apply_override(cfg, "narrative.hashtag", opts.hashtag);
    }
    return cfg;
}

void print_result(const ioforge::StageResult& result) {
    std::string line = result.stage + ":";
    for (const std::string& rel : result.outputs) line += " " + rel;
    std::puts(line.c_str());
}

std::string type_name(ioforge::ConfigType t) {
    switch (t) {
        case ioforge::ConfigType::string: return "string";
        case ioforge::ConfigType::integer: return "integer";
        case ioforge::ConfigType::number: return "number";
        case ioforge::ConfigType::boolean: return "boolean";
        case ioforge::ConfigType::list: return "list";
    }
    return "string";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ioforge: influence-operation detection pipeline"};
    app.require_subcommand(1);

    std::vector<std::unique_ptr<StageOpts>> stage_opts;
    auto add_stage_options = [&](CLI::App* sub, bool narrative_flags) -> StageOpts* {
        stage_opts.push_back(std::make_unique<StageOpts>());
        StageOpts* opts = stage_opts.back().get();
        opts->sub = sub;
        sub->add_option("--config", opts->config, "Pipeline config file")->required();
        sub->add_option("--seed", opts->seed, "Override the master seed");
        sub->add_option("--set", opts->overrides, "Override one config key (key=value)");
        if (narrative_flags) {
            sub->add_option("--topics", opts->topics,
                            "Comma-separated topic indices for the narrative");
            sub->add_option("--hashtag", opts->hashtag,
                            "Select by hashtag and skip topic matching");
        }
        return opts;
    };

    std::map<CLI::App*, StageOpts*> opts_of;
    std::map<CLI::App*, std::string> stage_of;
    for (const std::string& stage : ioforge::stage_order()) {
        CLI::App* sub = app.add_subcommand(stage, "Run the " + stage + " stage");
        opts_of[sub] = add_stage_options(sub, stage == "select-narrative");
        stage_of[sub] = stage;
    }
    CLI::App* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
    opts_of[pipeline] = add_stage_options(pipeline, true);

    CLI::App* synth = app.add_subcommand("synth-corpus", "Generate a synthetic test corpus");
    ioforge::SynthCorpusSpec spec;
    std::string synth_out;
    std::uint64_t synth_seed = 0;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--topics", spec.num_topics, "Planted topics");
    synth->add_option("--words-per-topic", spec.words_per_topic, "Vocabulary per topic");
    synth->add_option("--organic", spec.organic_accounts, "Ordinary accounts");
    synth->add_option("--trolls", spec.troll_accounts, "Troll accounts");
    synth->add_option("--media", spec.media_accounts, "Media accounts");
    synth->add_option("--tweets-per-account", spec.tweets_per_account,
                      "Organic tweets per account");
    synth->add_option("--cascade-sources", spec.cascade_sources, "Retweet-cascade sources");
    synth->add_option("--cascade-branching", spec.cascade_branching, "Amplifiers per vertex");
    synth->add_option("--cascade-depth", spec.cascade_depth, "Retweet generations");
    synth->add_option("--branch-keep-prob", spec.branch_keep_prob,
                      "Probability each amplifier slot is filled");
    synth->add_option("--originals-per-source", spec.originals_per_source,
                      "Hashtagged originals each source posts");
    synth->add_option("--retweets-per-level", spec.retweets_per_level,
                      "Retweets per cascade link, by level (comma-separated)")
        ->delimiter(',');
    synth->add_option("--amplifier-extra-originals", spec.amplifier_extra_originals,
                      "Extra hashtagged originals per amplifier, by level (comma-separated)")
        ->delimiter(',');
    synth->add_option("--bystanders", spec.bystander_accounts,
                      "Accounts posting hashtagged originals outside any cascade");
    synth->add_option("--bystander-originals", spec.bystander_originals,
                      "Hashtagged originals per bystander");
    synth->add_flag("--planted-outcomes",
                    [&spec](std::int64_t) { spec.planted_outcomes = true; },
                    "Draw amplifier posting counts from the exposure model");
    synth->add_option("--amplifier-noise-links", spec.amplifier_noise_links,
                      "Bystander originals each amplifier also retweets");
    synth->add_option("--amplifier-noise-max", spec.amplifier_noise_max,
                      "Max multiplicity of amplifier noise retweets");
    synth->add_option("--bystander-retweet-links", spec.bystander_retweet_links,
                      "Zero-exposure targets each bystander retweets");
    synth->add_option("--bystander-retweet-max", spec.bystander_retweet_max,
                      "Max multiplicity of bystander noise retweets");
    synth->add_option("--source-noise-links", spec.source_noise_links,
                      "Bystander originals each cascade source also retweets");
    synth->add_option("--source-noise-max", spec.source_noise_max,
                      "Max multiplicity of source noise retweets");
    synth->add_option("--planted-mu", spec.planted_mu, "Planted baseline log-rate");
    synth->add_option("--planted-tau", spec.planted_tau, "Planted exposure effect");
    synth->add_option("--planted-gamma1", spec.planted_gamma1, "Planted first-hop decay");
    synth->add_option("--planted-gamma2", spec.planted_gamma2, "Planted later-hop decay");
    synth->add_option("--narrative-topic", spec.narrative_topic, "Topic pushed by cascades");
    synth->add_option("--hashtag", spec.narrative_hashtag, "Cascade hashtag");
    synth->add_flag("--no-known-labels",
                    [&spec](std::int64_t) { spec.mark_known_labels = false; },
                    "Leave ground-truth labels off the accounts");

    CLI::App* config_help =
        app.add_subcommand("config-help", "List every config key with type and default");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (sub == config_help) {
            std::printf("%-26s %-8s %-12s %s\n", "key", "type", "default", "description");
            for (const auto& [key, keyspec] : ioforge::config_schema()) {
                std::printf("%-26s %-8s %-12s %s\n", key.c_str(),
                            type_name(keyspec.type).c_str(),
                            keyspec.default_value.empty() ? "(empty)"
                                                          : keyspec.default_value.c_str(),
                            keyspec.help.c_str());
            }
            return 0;
        }
        if (sub == synth) {
            const ioforge::SynthCorpusData data = ioforge::synth_corpus(spec, synth_seed);
            ioforge::write_synth_corpus(data, synth_out);
            std::printf("synth-corpus: %zu accounts, %zu tweets -> %s\n",
                        data.corpus.accounts.size(), data.corpus.tweets.size(),
                        synth_out.c_str());
            return 0;
        }
        const ioforge::PipelineConfig cfg = build_config(*opts_of.at(sub));
        if (sub == pipeline) {
            for (const ioforge::StageResult& r : ioforge::run_pipeline(cfg)) print_result(r);
        } else {
            print_result(ioforge::run_stage(stage_of.at(sub), cfg));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ioforge: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
