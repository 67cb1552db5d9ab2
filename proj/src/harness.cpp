#include "ioforge/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ioforge/causal.hpp"
#include "ioforge/corpus.hpp"
#include "ioforge/features.hpp"
#include "ioforge/forest.hpp"
#include "ioforge/network.hpp"
#include "ioforge/rng.hpp"
#include "ioforge/timeutil.hpp"
#include "ioforge/tokenize.hpp"
#include "ioforge/topics.hpp"
#include "ioforge/weaklabel.hpp"
#include "json.hpp"

namespace ioforge {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_integer(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size()) return false;
    out = v;
    return true;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return false;
    out = v;
    return true;
}

void validate_value(const std::string& key, const ConfigKeySpec& spec, const std::string& value) {
    switch (spec.type) {
        case ConfigType::integer: {
            std::int64_t v;
            if (!parse_integer(value, v)) {
                throw std::invalid_argument("config key '" + key + "': expected an integer, got '" +
                                            value + "'");
            }
            break;
        }
        case ConfigType::number: {
            double v;
            if (!parse_number(value, v)) {
                throw std::invalid_argument("config key '" + key + "': expected a number, got '" +
                                            value + "'");
            }
            break;
        }
        case ConfigType::boolean:
            if (value != "true" && value != "false") {
                throw std::invalid_argument("config key '" + key +
                                            "': expected true or false, got '" + value + "'");
            }
            break;
        case ConfigType::string:
        case ConfigType::list:
            break;
    }
}

}  // namespace

const std::map<std::string, ConfigKeySpec>& config_schema() {
    using T = ConfigType;
    static const std::map<std::string, ConfigKeySpec> schema = {
        {"run_dir", {T::string, "", "Directory receiving artifacts and manifest.json"}},
        {"seed", {T::integer, "0", "Master seed; every stage derives its own sub-seed"}},
        {"ingest.tweets", {T::string, "", "Tweet JSONL file to ingest"}},
        {"ingest.accounts", {T::string, "", "Optional account-metadata JSONL file"}},
        {"ingest.known_io", {T::string, "", "Optional newline-delimited known-IO account ids"}},
        {"ingest.known_benign",
         {T::string, "", "Optional newline-delimited known-benign account ids"}},
        {"ingest.max_malformed", {T::number, "0.1", "Malformed-line budget per input file"}},
        {"filter.keywords",
         {T::list, "", "Case-insensitive text substrings to keep; empty keeps all"}},
        {"filter.langs", {T::list, "", "Language allowlist; empty keeps all"}},
        {"filter.start", {T::string, "", "ISO-8601 UTC window start; empty uses the corpus start"}},
        {"filter.end", {T::string, "", "ISO-8601 UTC window end; empty uses the corpus end"}},
        {"filter.cap_per_account",
         {T::integer, "0", "Seeded per-account tweet cap; 0 leaves accounts uncapped"}},
        {"topics.lang", {T::string, "en", "Language whose tweets the topic model covers"}},
        {"topics.k", {T::integer, "10", "Number of topics"}},
        {"topics.alpha", {T::number, "-1", "Document-topic Dirichlet alpha; negative means 50/K"}},
        {"topics.beta", {T::number, "0.01", "Topic-word Dirichlet beta"}},
        {"topics.iterations", {T::integer, "500", "Collapsed Gibbs sweeps"}},
        {"topics.words_per_topic", {T::integer, "10", "Top words per topic in the report"}},
        {"narrative.topics", {T::list, "", "Analyst-selected topic indices for the narrative"}},
        {"narrative.threshold",
         {T::number, "0.5", "Minimum document-topic weight for a tweet to match"}},
        {"narrative.hashtag",
         {T::string, "", "Hashtag shortcut: match by tag and skip topic matching"}},
        {"label.news", {T::string, "", "External-news domain/account list file"}},
        {"label.method", {T::string, "em", "Label aggregation method: em or vote"}},
        {"label.threshold", {T::number, "0.7", "IO-probability cutoff for the binary label"}},
        {"features.ngram_min_count",
         {T::integer, "15", "Drop n-grams whose total count is at or below this"}},
        {"select.behavioral", {T::integer, "10", "Behavioral features kept by selection"}},
        {"select.language", {T::integer, "30", "Language features kept by selection"}},
        {"select.ngram", {T::integer, "500", "N-gram features kept by selection"}},
        {"forest.trees", {T::integer, "100", "Trees in the classifier"}},
        {"forest.max_features",
         {T::integer, "-1", "Features tried per split; non-positive means sqrt"}},
        {"forest.min_samples_leaf", {T::integer, "1", "Minimum samples per leaf"}},
        {"forest.max_depth", {T::integer, "-1", "Tree depth cap; negative means unlimited"}},
        {"train.cv_rounds", {T::integer, "20", "Shuffle-split evaluation rounds"}},
        {"train.cv_test_fraction", {T::number, "0.1", "Test fraction per evaluation round"}},
        {"train.cv_mode",
         {T::string, "all", "Evaluation mode: all or omit_heuristic_positives"}},
        {"train.operating_threshold",
         {T::number, "0.6", "Score cutoff for operating precision/recall"}},
        {"network.damping", {T::number, "0.85", "PageRank damping factor"}},
        {"network.tol", {T::number, "1e-10", "PageRank convergence tolerance"}},
        {"network.write_dot", {T::boolean, "false", "Also emit a Graphviz rendering"}},
        {"communities.b_min", {T::integer, "1", "Smallest block count tried"}},
        {"communities.b_max", {T::integer, "10", "Largest block count tried"}},
        {"communities.sweeps", {T::integer, "100", "Metropolis sweeps per block count"}},
        {"impact.n_hop", {T::integer, "2", "Exposure hops in the outcome model"}},
        {"impact.chains", {T::integer, "4", "MCMC chains"}},
        {"impact.warmup", {T::integer, "1000", "Warm-up iterations per chain"}},
        {"impact.samples", {T::integer, "1000", "Kept draws per chain"}},
        {"impact.refresh_every", {T::integer, "10", "Influence-draw refresh period"}},
        {"impact.sources",
         {T::list, "", "Treated account ids; empty treats authors of original matched tweets"}},
        {"impact.targets",
         {T::string, "all", "Impact targets: all, top_pagerank:<K>, or account ids"}},
        {"impact.sampled_imputation",
         {T::boolean, "false", "Impute sampled outcomes instead of expectations"}},
        {"report.score_bins", {T::integer, "10", "Score-histogram bins over [0,1]"}},
    };
    return schema;
}

const std::string& PipelineConfig::str(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    return it->second;
}

std::int64_t PipelineConfig::integer(const std::string& key) const {
    std::int64_t v = 0;
    if (!parse_integer(str(key), v)) {
        throw std::invalid_argument("config key '" + key + "' is not an integer");
    }
    return v;
}

double PipelineConfig::number(const std::string& key) const {
    double v = 0.0;
    if (!parse_number(str(key), v)) {
        throw std::invalid_argument("config key '" + key + "' is not a number");
    }
    return v;
}

bool PipelineConfig::boolean(const std::string& key) const { return str(key) == "true"; }

std::vector<std::string> PipelineConfig::list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string PipelineConfig::run_dir() const { return str("run_dir"); }

std::uint64_t PipelineConfig::master_seed() const {
    return static_cast<std::uint64_t>(integer("seed"));
}

std::uint64_t PipelineConfig::stage_seed(const std::string& stage) const {
    return derive_seed(master_seed(), "stage:" + stage);
}

PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig cfg;
    for (const auto& [key, spec] : config_schema()) cfg.values[key] = spec.default_value;

    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value, got '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        apply_override(cfg, key, value);
    }
    if (cfg.values.at("run_dir").empty()) {
        throw std::invalid_argument("config: run_dir is required");
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto it = config_schema().find(key);
    if (it == config_schema().end()) {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
    validate_value(key, it->second, value);
    cfg.values[key] = value;
}

// ---- manifest ---------------------------------------------------------------

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for digest: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

RunManifest load_manifest(const std::string& path) {
    RunManifest m;
    std::ifstream in(path);
    if (!in) return m;
    ordered_json j = ordered_json::parse(in);
    m.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("stages")) {
        for (const auto& [name, rec] : j.at("stages").items()) {
            StageRecord r;
            r.sequence = rec.value("sequence", -1);
            r.seed = rec.value("seed", std::uint64_t{0});
            r.config_digest = rec.value("config_digest", std::string());
            if (rec.contains("inputs")) {
                for (const auto& [p, d] : rec.at("inputs").items()) {
                    r.inputs[p] = d.get<std::string>();
                }
            }
            if (rec.contains("outputs")) {
                for (const auto& [p, d] : rec.at("outputs").items()) {
                    r.outputs[p] = d.get<std::string>();
                }
            }
            m.stages[name] = std::move(r);
        }
    }
    return m;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
    ordered_json j;
    j["master_seed"] = manifest.master_seed;
    ordered_json stages = ordered_json::object();
    for (const auto& [name, rec] : manifest.stages) {
        ordered_json r;
        r["sequence"] = rec.sequence;
        r["seed"] = rec.seed;
        r["config_digest"] = rec.config_digest;
        r["inputs"] = ordered_json::object();
        for (const auto& [p, d] : rec.inputs) r["inputs"][p] = d;
        r["outputs"] = ordered_json::object();
        for (const auto& [p, d] : rec.outputs) r["outputs"][p] = d;
        stages[name] = std::move(r);
    }
    j["stages"] = std::move(stages);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

const std::vector<std::string>& stage_order() {
    static const std::vector<std::string> order = {
        "ingest",   "topics",  "select-narrative", "label",       "featurize", "train",
        "classify", "network", "communities",      "impact",      "report",
    };
    return order;
}

namespace {

int stage_index(const std::string& stage) {
    const auto& order = stage_order();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == stage) return static_cast<int>(i);
    }
    std::string all;
    for (const auto& s : order) {
        if (!all.empty()) all += ", ";
        all += s;
    }
    throw std::invalid_argument("unknown stage '" + stage + "'; stages are: " + all);
}

// Settings digest; run_dir is excluded so re-runs in different directories
// agree.
std::string config_digest(const PipelineConfig& cfg) {
    std::string canonical;
    for (const auto& [key, value] : cfg.values) {
        if (key == "run_dir") continue;
        canonical += key;
        canonical += '=';
        canonical += value;
        canonical += '\n';
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical)));
    return buf;
}

struct StageCtx {
    const PipelineConfig& cfg;
    std::string stage;
    fs::path run;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;

    // Upstream artifact inside the run directory; the error names the stage
    // that produces it.
    fs::path in(const std::string& rel, const std::string& producer) {
        const fs::path p = run / rel;
        if (!fs::exists(p)) {
            throw std::runtime_error("stage '" + stage + "' needs '" + rel +
                                     "' produced by stage '" + producer + "'; run `ioforge " +
                                     producer + "` first");
        }
        inputs[rel] = file_digest(p.string());
        return p;
    }

    // External file named in the config.
    std::string external(const std::string& path, const std::string& key) {
        if (path.empty()) {
            throw std::invalid_argument("config key '" + key + "' is required by stage '" +
                                        stage + "'");
        }
        if (!fs::exists(path)) {
            throw std::runtime_error("stage '" + stage + "': config key '" + key +
                                     "' points at missing file '" + path + "'");
        }
        inputs[path] = file_digest(path);
        return path;
    }

    fs::path out(const std::string& rel) { return run / rel; }

    void record_out(const std::string& rel) { outputs[rel] = file_digest((run / rel).string()); }
};

Corpus load_corpus_artifact(StageCtx& ctx) {
    const fs::path tweets = ctx.in("corpus.tweets.jsonl", "ingest");
    ctx.in("corpus.accounts.jsonl", "ingest");
    IngestOptions opts;
    opts.accounts_path = (ctx.run / "corpus.accounts.jsonl").string();
    opts.max_malformed_fraction = 0.0;  // our own artifact must be clean
    return ingest_jsonl(tweets.string(), opts);
}

// Tokenized documents for the topic stages: one document per tweet in the
// model language (doc id = tweet id).
std::vector<TokenizedDoc> language_docs(const Corpus& corpus, const std::string& lang) {
    std::vector<TokenizedDoc> docs;
    for (const Tweet& t : corpus.tweets) {
        if (!lang.empty() && t.lang != lang) continue;
        docs.push_back({t.tweet_id, tokenize(t.text)});
    }
    return docs;
}

Narrative load_narrative_artifact(StageCtx& ctx) {
    const fs::path p = ctx.in("narrative.json", "select-narrative");
    return load_narrative(p.string());
}

// ---- stage bodies -----------------------------------------------------------

void stage_ingest(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    IngestOptions opts;
    const std::string tweets = ctx.external(cfg.str("ingest.tweets"), "ingest.tweets");
    if (!cfg.str("ingest.accounts").empty()) {
        opts.accounts_path = ctx.external(cfg.str("ingest.accounts"), "ingest.accounts");
    }
    if (!cfg.str("ingest.known_io").empty()) {
        opts.known_io_path = ctx.external(cfg.str("ingest.known_io"), "ingest.known_io");
    }
    if (!cfg.str("ingest.known_benign").empty()) {
        opts.known_benign_path =
            ctx.external(cfg.str("ingest.known_benign"), "ingest.known_benign");
    }
    opts.max_malformed_fraction = cfg.number("ingest.max_malformed");
    Corpus corpus = ingest_jsonl(tweets, opts);

    const std::vector<std::string> keywords = cfg.list("filter.keywords");
    const std::vector<std::string> langs = cfg.list("filter.langs");
    const std::string start_s = cfg.str("filter.start");
    const std::string end_s = cfg.str("filter.end");
    if (!keywords.empty() || !langs.empty() || !start_s.empty() || !end_s.empty()) {
        TimeRange window = corpus.time_range.value_or(TimeRange{0, 0});
        if (!start_s.empty()) {
            const auto t = parse_iso8601_utc(start_s);
            if (!t) throw std::invalid_argument("config key 'filter.start': bad timestamp '" +
                                                start_s + "'");
            window.start = *t;
        }
        if (!end_s.empty()) {
            const auto t = parse_iso8601_utc(end_s);
            if (!t) throw std::invalid_argument("config key 'filter.end': bad timestamp '" +
                                                end_s + "'");
            window.end = *t;
        }
        corpus = filter(corpus, keywords, langs, window);
    }
    const std::int64_t cap = cfg.integer("filter.cap_per_account");
    if (cap < 0) throw std::invalid_argument("config key 'filter.cap_per_account': negative");
    if (cap > 0) {
        corpus = cap_tweets_per_account(corpus, static_cast<std::size_t>(cap),
                                        derive_seed(ctx.seed, "cap"));
    }

    save_corpus(corpus, ctx.out("corpus.tweets.jsonl").string(),
                ctx.out("corpus.accounts.jsonl").string());
    ctx.record_out("corpus.tweets.jsonl");
    ctx.record_out("corpus.accounts.jsonl");
}

void stage_topics(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const Corpus corpus = load_corpus_artifact(ctx);
    const std::string lang = cfg.str("topics.lang");
    const std::vector<TokenizedDoc> docs = language_docs(corpus, lang);
    if (docs.empty()) {
        throw std::runtime_error("topics: no tweets in language '" + lang + "'");
    }
    LdaConfig lda;
    lda.K = static_cast<int>(cfg.integer("topics.k"));
    lda.alpha = cfg.number("topics.alpha");
    lda.beta = cfg.number("topics.beta");
    lda.iterations = static_cast<int>(cfg.integer("topics.iterations"));
    lda.seed = derive_seed(ctx.seed, "lda");
    const TopicModel model = fit_lda(docs, lda);

    write_topic_report(model, static_cast<std::size_t>(cfg.integer("topics.words_per_topic")),
                       ctx.out("topics_report.json").string());
    ctx.record_out("topics_report.json");

    ordered_json j;
    j["k"] = model.K;
    j["alpha"] = model.alpha;
    j["beta"] = model.beta;
    j["iterations"] = model.iterations;
    j["seed"] = model.seed;
    j["language"] = lang;
    j["empty_docs_dropped"] = model.empty_docs_dropped;
    j["vocab"] = model.vocab.tokens;
    j["doc_ids"] = model.doc_ids;
    j["theta"] = model.theta;
    std::ofstream out(ctx.out("topics_model.json"));
    if (!out) throw std::runtime_error("cannot write topics_model.json");
    out << j.dump() << '\n';
    out.close();
    ctx.record_out("topics_model.json");
}

void stage_select_narrative(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const Corpus corpus = load_corpus_artifact(ctx);
    Narrative narrative;
    narrative.match_threshold = cfg.number("narrative.threshold");

    std::string hashtag = cfg.str("narrative.hashtag");
    if (!hashtag.empty()) {
        if (hashtag[0] == '#') hashtag = hashtag.substr(1);
        hashtag = to_lower(hashtag);
        std::set<std::string> matched;
        for (const Tweet& t : corpus.tweets) {
            if (std::find(t.hashtags.begin(), t.hashtags.end(), hashtag) == t.hashtags.end()) {
                continue;
            }
            if (!matched.insert(t.tweet_id).second) continue;
            for (const std::string& tok : tokenize(t.text)) {
                ++narrative.token_frequencies[tok];
            }
        }
        narrative.topic_index = -1;
        narrative.tweet_ids.assign(matched.begin(), matched.end());
    } else {
        const std::vector<std::string> topic_strs = cfg.list("narrative.topics");
        if (topic_strs.empty()) {
            throw std::invalid_argument(
                "select-narrative needs narrative.topics or narrative.hashtag");
        }
        const fs::path model_path = ctx.in("topics_model.json", "topics");
        std::ifstream in(model_path);
        ordered_json j = ordered_json::parse(in);
        TopicModel model;
        model.K = j.at("k").get<int>();
        model.vocab.tokens = j.at("vocab").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i) {
            model.vocab.ids[model.vocab.tokens[i]] = static_cast<int>(i);
        }
        model.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
        model.theta = j.at("theta").get<std::vector<std::vector<double>>>();
        const std::string lang = j.at("language").get<std::string>();

        const std::vector<TokenizedDoc> docs = language_docs(corpus, lang);
        std::set<std::string> matched;
        bool first = true;
        for (const std::string& ts : topic_strs) {
            std::int64_t idx = -1;
            if (!parse_integer(ts, idx) || idx < 0 || idx >= model.K) {
                throw std::invalid_argument("config key 'narrative.topics': bad topic index '" +
                                            ts + "'");
            }
            const Narrative part = match_narrative(model, docs, static_cast<int>(idx),
                                                   narrative.match_threshold);
            if (first) {
                narrative.topic_index = part.topic_index;
                first = false;
            }
            matched.insert(part.tweet_ids.begin(), part.tweet_ids.end());
            for (const auto& [tok, count] : part.token_frequencies) {
                narrative.token_frequencies[tok] += count;
            }
        }
        narrative.tweet_ids.assign(matched.begin(), matched.end());
        narrative.language = lang;
    }

    if (narrative.tweet_ids.empty()) {
        throw std::runtime_error("select-narrative matched no tweets");
    }
    write_narrative(narrative, ctx.out("narrative.json").string());
    ctx.record_out("narrative.json");
}

void stage_label(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const Corpus corpus = load_corpus_artifact(ctx);
    NewsList news;
    if (!cfg.str("label.news").empty()) {
        news = load_news_list(ctx.external(cfg.str("label.news"), "label.news"));
    }
    const auto profiles = compute_profiles(corpus, news);
    const LabelMatrix matrix = build_label_matrix(profiles);
    const std::string method_s = cfg.str("label.method");
    LabelModelMethod method;
    if (method_s == "em") {
        method = LabelModelMethod::em;
    } else if (method_s == "vote") {
        method = LabelModelMethod::vote;
    } else {
        throw std::invalid_argument("config key 'label.method': expected em or vote, got '" +
                                    method_s + "'");
    }
    const WeakLabels weak = fit_label_model(matrix, method, cfg.number("label.threshold"));
    write_weak_labels_csv(weak, matrix, ctx.out("labels.csv").string());
    ctx.record_out("labels.csv");

    ordered_json j;
    j["method"] = method_s;
    j["threshold"] = weak.threshold;
    j["class_prior"] = weak.class_prior;
    j["lf_accuracies"] = ordered_json::object();
    for (const auto& [name, acc] : weak.lf_accuracies) j["lf_accuracies"][name] = acc;
    std::ofstream out(ctx.out("label_model.json"));
    if (!out) throw std::runtime_error("cannot write label_model.json");
    out << j.dump(2) << '\n';
    out.close();
    ctx.record_out("label_model.json");
}

void stage_featurize(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const Corpus corpus = load_corpus_artifact(ctx);
    NewsList news;
    if (!cfg.str("label.news").empty()) {
        news = load_news_list(ctx.external(cfg.str("label.news"), "label.news"));
    }
    const FeatureMatrix matrix =
        assemble_features(corpus, news, default_language_universe(),
                          cfg.integer("features.ngram_min_count"));
    write_feature_matrix(matrix, (ctx.run / "features").string());
    ctx.record_out("features.schema.json");
    ctx.record_out("features.rows.txt");
    ctx.record_out("features.triplets.csv");
}

// Weak labels joined to feature rows; known truth overrides, and the
// heuristic mask flags positives that rest on heuristics alone.
void training_targets(const Corpus& corpus, const WeakLabels& weak,
                      const std::vector<std::string>& row_ids, std::vector<int>& y,
                      std::vector<char>& heuristic_mask) {
    std::map<std::string, int> weak_of;
    for (std::size_t i = 0; i < weak.account_ids.size(); ++i) {
        weak_of[weak.account_ids[i]] = weak.labels[i];
    }
    y.clear();
    heuristic_mask.clear();
    for (const std::string& id : row_ids) {
        auto it = weak_of.find(id);
        if (it == weak_of.end()) {
            throw std::runtime_error("labels.csv does not cover account '" + id +
                                     "'; re-run `ioforge label` on the current corpus");
        }
        int label = it->second;
        KnownLabel known = KnownLabel::unknown;
        auto acct = corpus.accounts.find(id);
        if (acct != corpus.accounts.end()) known = acct->second.known_label;
        if (known == KnownLabel::known_io) label = 1;
        if (known == KnownLabel::known_benign) label = 0;
        y.push_back(label);
        heuristic_mask.push_back(label == 1 && known != KnownLabel::known_io ? 1 : 0);
    }
}

void stage_train(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const Corpus corpus = load_corpus_artifact(ctx);
    ctx.in("features.schema.json", "featurize");
    ctx.in("features.rows.txt", "featurize");
    ctx.in("features.triplets.csv", "featurize");
    const FeatureMatrix matrix = load_feature_matrix((ctx.run / "features").string());
    const WeakLabels weak =
        load_weak_labels_csv(ctx.in("labels.csv", "label").string());

    std::vector<int> y;
    std::vector<char> heuristic_mask;
    training_targets(corpus, weak, matrix.account_ids, y, heuristic_mask);

    SelectSizes sizes;
    sizes.behavioral = static_cast<std::size_t>(cfg.integer("select.behavioral"));
    sizes.language = static_cast<std::size_t>(cfg.integer("select.language"));
    sizes.ngram = static_cast<std::size_t>(cfg.integer("select.ngram"));
    const FeatureSchema selected =
        select_features(matrix, y, sizes, derive_seed(ctx.seed, "select"));
    const FeatureMatrix reduced = reduce_matrix(matrix, selected);
    write_feature_schema(selected, ctx.out("selected_schema.json").string());
    ctx.record_out("selected_schema.json");

    ForestParams params;
    params.n_trees = static_cast<int>(cfg.integer("forest.trees"));
    params.max_features = static_cast<int>(cfg.integer("forest.max_features"));
    params.min_samples_leaf = static_cast<int>(cfg.integer("forest.min_samples_leaf"));
    params.max_depth = static_cast<int>(cfg.integer("forest.max_depth"));
    params.seed = derive_seed(ctx.seed, "forest");
    const Forest forest = train(reduced.X, y, selected.names, params);
    save_forest(forest, ctx.out("forest.json").string());
    ctx.record_out("forest.json");

    CvOptions cv;
    cv.rounds = static_cast<int>(cfg.integer("train.cv_rounds"));
    cv.test_fraction = cfg.number("train.cv_test_fraction");
    const std::string mode = cfg.str("train.cv_mode");
    if (mode == "all") {
        cv.mode = CvMode::all;
    } else if (mode == "omit_heuristic_positives") {
        cv.mode = CvMode::omit_heuristic_positives;
    } else {
        throw std::invalid_argument(
            "config key 'train.cv_mode': expected all or omit_heuristic_positives, got '" +
            mode + "'");
    }
    cv.heuristic_mask = heuristic_mask;
    cv.operating_threshold = cfg.number("train.operating_threshold");
    cv.seed = derive_seed(ctx.seed, "cv");
    const EvalReport report = cross_validate(reduced.X, y, params, cv);
    write_eval_report_csv(report, ctx.out("eval_rounds.csv").string());
    ctx.record_out("eval_rounds.csv");
    write_eval_summary_json(report, ctx.out("eval_summary.json").string());
    ctx.record_out("eval_summary.json");
}

void stage_classify(StageCtx& ctx) {
    ctx.in("features.schema.json", "featurize");
    ctx.in("features.rows.txt", "featurize");
    ctx.in("features.triplets.csv", "featurize");
    const FeatureMatrix matrix = load_feature_matrix((ctx.run / "features").string());
    const FeatureSchema selected =
        load_feature_schema(ctx.in("selected_schema.json", "train").string());
    const FeatureMatrix reduced = reduce_matrix(matrix, selected);
    const Forest forest = load_forest(ctx.in("forest.json", "train").string());
    verify_schema(forest, selected.names);
    const std::vector<double> scores = predict_proba(forest, reduced.X);

    std::ofstream out(ctx.out("scores.csv"));
    if (!out) throw std::runtime_error("cannot write scores.csv");
    out << "account_id,score\n";
    for (std::size_t i = 0; i < reduced.account_ids.size(); ++i) {
        out << reduced.account_ids[i] << ',' << format_g17(scores[i]) << '\n';
    }
    out.close();
    ctx.record_out("scores.csv");
}

NarrativeNetwork rebuild_network(StageCtx& ctx, Corpus& corpus_out, Narrative& narrative_out) {
    corpus_out = load_corpus_artifact(ctx);
    narrative_out = load_narrative_artifact(ctx);
    NarrativeNetwork net = build_network(corpus_out, narrative_out);
    if (net.vertices.empty()) {
        throw std::runtime_error("stage '" + ctx.stage + "': the narrative has no network");
    }
    return net;
}

void stage_network(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    Corpus corpus;
    Narrative narrative;
    const NarrativeNetwork net = rebuild_network(ctx, corpus, narrative);
    const std::vector<double> pr =
        pagerank(net, cfg.number("network.damping"), cfg.number("network.tol"));
    write_centrality_csv(net, pr, ctx.out("pagerank.csv").string());
    ctx.record_out("pagerank.csv");

    std::ofstream out(ctx.out("vertices.csv"));
    if (!out) throw std::runtime_error("cannot write vertices.csv");
    out << "account_id,tweet_count,retweets_received,follower_count,first_tweet_time,"
           "screen_name\n";
    for (std::size_t i = 0; i < net.vertices.size(); ++i) {
        const VertexStats& st = net.stats[i];
        std::string screen;
        auto it = corpus.accounts.find(net.vertices[i]);
        if (it != corpus.accounts.end()) screen = it->second.screen_name;
        out << net.vertices[i] << ',' << st.tweet_count << ',' << st.retweets_received << ','
            << st.follower_count << ',' << st.first_tweet_time << ',' << screen << '\n';
    }
    out.close();
    ctx.record_out("vertices.csv");

    VertexAttributes attrs;
    for (std::size_t i = 0; i < net.vertices.size(); ++i) {
        attrs["pagerank"][net.vertices[i]] = pr[i];
    }
    export_graphml(net, std::nullopt, attrs, ctx.out("network.graphml").string());
    ctx.record_out("network.graphml");
    if (cfg.boolean("network.write_dot")) {
        export_dot(net, std::nullopt, attrs, ctx.out("network.dot").string());
        ctx.record_out("network.dot");
    }
}

void stage_communities(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    Corpus corpus;
    Narrative narrative;
    const NarrativeNetwork net = rebuild_network(ctx, corpus, narrative);
    const std::int64_t b_min = cfg.integer("communities.b_min");
    const std::int64_t b_max = cfg.integer("communities.b_max");
    if (b_min < 1 || b_max < b_min) {
        throw std::invalid_argument("config keys communities.b_min/b_max: need 1 <= min <= max");
    }
    std::vector<int> b_range;
    for (std::int64_t b = b_min; b <= b_max; ++b) b_range.push_back(static_cast<int>(b));
    const Partition partition =
        fit_sbm(net, b_range, static_cast<int>(cfg.integer("communities.sweeps")),
                derive_seed(ctx.seed, "sbm"));
    write_community_csv(net, partition, ctx.out("communities.csv").string());
    ctx.record_out("communities.csv");

    ordered_json j;
    j["num_blocks"] = partition.num_blocks;
    j["description_length"] = partition.description_length;
    std::ofstream out(ctx.out("communities.json"));
    if (!out) throw std::runtime_error("cannot write communities.json");
    out << j.dump(2) << '\n';
    out.close();
    ctx.record_out("communities.json");
}

Partition load_partition(const fs::path& path, const NarrativeNetwork& net) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::map<std::string, int> block_of;
    int max_block = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.rfind(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("communities.csv: malformed line '" + line + "'");
        }
        const int block = std::stoi(line.substr(comma + 1));
        block_of[line.substr(0, comma)] = block;
        max_block = std::max(max_block, block);
    }
    Partition partition;
    partition.num_blocks = max_block + 1;
    partition.block_of.reserve(net.vertices.size());
    for (const std::string& id : net.vertices) {
        auto it = block_of.find(id);
        if (it == block_of.end()) {
            throw std::runtime_error("communities.csv does not cover account '" + id +
                                     "'; re-run `ioforge communities` on the current corpus");
        }
        partition.block_of.push_back(it->second);
    }
    return partition;
}

void stage_impact(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    Corpus corpus;
    Narrative narrative;
    const NarrativeNetwork net = rebuild_network(ctx, corpus, narrative);
    const Partition partition =
        load_partition(ctx.in("communities.csv", "communities"), net);
    const Covariates cov = build_covariates(net, &partition);

    const std::size_t n = net.vertices.size();
    std::vector<std::int64_t> Y(n);
    for (std::size_t i = 0; i < n; ++i) Y[i] = net.stats[i].tweet_count;

    std::vector<int> Z(n, 0);
    const std::vector<std::string> source_ids = cfg.list("impact.sources");
    if (!source_ids.empty()) {
        for (const std::string& id : source_ids) {
            auto it = net.index_of.find(id);
            if (it == net.index_of.end()) {
                throw std::invalid_argument(
                    "config key 'impact.sources': account '" + id +
                    "' is not a vertex of the narrative network");
            }
            Z[it->second] = 1;
        }
    } else {
        // Default rule: authors of original (non-retweet) matched tweets.
        std::map<std::string, const Tweet*> by_id;
        for (const Tweet& t : corpus.tweets) by_id[t.tweet_id] = &t;
        for (const std::string& tid : narrative.tweet_ids) {
            auto it = by_id.find(tid);
            if (it == by_id.end() || it->second->is_retweet) continue;
            auto vx = net.index_of.find(it->second->account_id);
            if (vx != net.index_of.end()) Z[vx->second] = 1;
        }
    }

    CausalConfig cc;
    cc.n_hop = static_cast<int>(cfg.integer("impact.n_hop"));
    cc.chains = static_cast<int>(cfg.integer("impact.chains"));
    cc.warmup = static_cast<int>(cfg.integer("impact.warmup"));
    cc.samples = static_cast<int>(cfg.integer("impact.samples"));
    cc.refresh_every = static_cast<int>(cfg.integer("impact.refresh_every"));
    cc.seed = derive_seed(ctx.seed, "fit");
    const OutcomeModelPosterior posterior = fit_outcome_model(Y, Z, net.out_edges, cov, cc);
    write_posterior_csv(posterior, ctx.out("posterior.csv").string());
    ctx.record_out("posterior.csv");

    const PosteriorPredictive ppc = posterior_predictive_check(
        posterior, Y, Z, net.out_edges, cov.X, derive_seed(ctx.seed, "ppc"));

    std::vector<std::size_t> targets;
    const std::string targets_s = cfg.str("impact.targets");
    if (targets_s == "all") {
        for (std::size_t i = 0; i < n; ++i) targets.push_back(i);
    } else if (targets_s.rfind("top_pagerank:", 0) == 0) {
        std::int64_t k = 0;
        if (!parse_integer(targets_s.substr(13), k) || k < 1) {
            throw std::invalid_argument("config key 'impact.targets': bad '" + targets_s + "'");
        }
        const std::vector<double> pr =
            pagerank(net, cfg.number("network.damping"), cfg.number("network.tol"));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pr[a] != pr[b] ? pr[a] > pr[b] : net.vertices[a] < net.vertices[b];
        });
        order.resize(std::min(static_cast<std::size_t>(k), n));
        targets = order;
    } else {
        for (const std::string& id : cfg.list("impact.targets")) {
            auto it = net.index_of.find(id);
            if (it == net.index_of.end()) {
                throw std::invalid_argument("config key 'impact.targets': account '" + id +
                                            "' is not a vertex of the narrative network");
            }
            targets.push_back(it->second);
        }
        if (targets.empty()) {
            throw std::invalid_argument("config key 'impact.targets': no targets given");
        }
    }

    const bool sampled = cfg.boolean("impact.sampled_imputation");
    std::vector<std::string> target_ids;
    std::vector<ImpactEstimate> impacts;
    for (std::size_t j : targets) {
        target_ids.push_back(net.vertices[j]);
        impacts.push_back(estimate_impact(j, posterior, net.out_edges, cov.X, {},
                                          derive_seed(ctx.seed, "zeta"), sampled));
    }
    write_impact_csv(target_ids, impacts, ctx.out("impact.csv").string());
    ctx.record_out("impact.csv");

    ordered_json j;
    j["n_hop"] = posterior.n_hop;
    j["chains"] = posterior.chains;
    j["samples"] = posterior.samples;
    j["converged"] = posterior.converged;
    j["split_rhat"] = ordered_json::object();
    for (const auto& [name, v] : posterior.split_rhat) j["split_rhat"][name] = v;
    j["acceptance"] = ordered_json::object();
    for (const auto& [name, v] : posterior.acceptance) j["acceptance"][name] = v;
    j["ppc"] = {{"p_total", ppc.p_total}, {"p_zero", ppc.p_zero}};
    std::int64_t treated = 0;
    for (int z : Z) treated += z;
    j["num_treated"] = treated;
    j["num_targets"] = targets.size();
    std::ofstream out(ctx.out("impact_diagnostics.json"));
    if (!out) throw std::runtime_error("cannot write impact_diagnostics.json");
    out << j.dump(2) << '\n';
    out.close();
    ctx.record_out("impact_diagnostics.json");
}

// ---- report helpers ---------------------------------------------------------

std::vector<std::string> split_n(const std::string& line, std::size_t parts) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i + 1 < parts; ++i) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            throw std::runtime_error("malformed CSV line '" + line + "'");
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    out.push_back(line.substr(pos));
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

struct VertexRow {
    std::int64_t tweet_count = 0;
    std::int64_t retweets_received = 0;
    std::int64_t follower_count = 0;
    std::int64_t first_tweet_time = 0;
    std::string screen_name;
};

void stage_report(StageCtx& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const Corpus corpus = load_corpus_artifact(ctx);

    auto read_rows = [](const fs::path& path, std::size_t parts) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        std::string line;
        std::getline(in, line);  // header
        std::vector<std::vector<std::string>> rows;
        while (std::getline(in, line)) {
            if (!line.empty()) rows.push_back(split_n(line, parts));
        }
        return rows;
    };

    std::map<std::string, double> score_of;
    for (const auto& row : read_rows(ctx.in("scores.csv", "classify"), 2)) {
        score_of[row[0]] = std::strtod(row[1].c_str(), nullptr);
    }
    struct Impact {
        std::string id;
        double mean, lo, hi;
    };
    std::vector<Impact> impacts;
    for (const auto& row : read_rows(ctx.in("impact.csv", "impact"), 4)) {
        impacts.push_back({row[0], std::strtod(row[1].c_str(), nullptr),
                           std::strtod(row[2].c_str(), nullptr),
                           std::strtod(row[3].c_str(), nullptr)});
    }
    std::map<std::string, double> pagerank_of;
    for (const auto& row : read_rows(ctx.in("pagerank.csv", "network"), 2)) {
        pagerank_of[row[0]] = std::strtod(row[1].c_str(), nullptr);
    }
    std::map<std::string, VertexRow> vertex_of;
    for (const auto& row : read_rows(ctx.in("vertices.csv", "network"), 6)) {
        VertexRow v;
        v.tweet_count = std::strtoll(row[1].c_str(), nullptr, 10);
        v.retweets_received = std::strtoll(row[2].c_str(), nullptr, 10);
        v.follower_count = std::strtoll(row[3].c_str(), nullptr, 10);
        v.first_tweet_time = std::strtoll(row[4].c_str(), nullptr, 10);
        v.screen_name = row[5];
        vertex_of[row[0]] = v;
    }
    std::map<std::string, int> block_of;
    int num_blocks = 0;
    for (const auto& row : read_rows(ctx.in("communities.csv", "communities"), 2)) {
        const int b = std::stoi(row[1]);
        block_of[row[0]] = b;
        num_blocks = std::max(num_blocks, b + 1);
    }

    // Table 1: the narrative's accounts ranked by estimated impact.
    std::sort(impacts.begin(), impacts.end(), [](const Impact& a, const Impact& b) {
        return a.mean != b.mean ? a.mean > b.mean : a.id < b.id;
    });
    {
        std::ofstream out(ctx.out("table1.csv"));
        if (!out) throw std::runtime_error("cannot write table1.csv");
        out << "screen_name,account_id,tweets,retweets_received,followers,first_tweet_time,"
               "pagerank,impact_mean,impact_lo,impact_hi\n";
        for (const Impact& im : impacts) {
            VertexRow v;
            auto it = vertex_of.find(im.id);
            if (it != vertex_of.end()) v = it->second;
            double pr = 0.0;
            auto pit = pagerank_of.find(im.id);
            if (pit != pagerank_of.end()) pr = pit->second;
            out << csv_quote(v.screen_name) << ',' << im.id << ',' << v.tweet_count << ','
                << v.retweets_received << ',' << v.follower_count << ','
                << format_iso8601_utc(v.first_tweet_time) << ',' << format_g17(pr) << ','
                << format_g17(im.mean) << ',' << format_g17(im.lo) << ',' << format_g17(im.hi)
                << '\n';
        }
        out.close();
        ctx.record_out("table1.csv");
    }

    // Score/impact scatter; accounts without ground truth read "unknown".
    {
        std::vector<const Impact*> joined;
        for (const Impact& im : impacts) {
            if (score_of.count(im.id)) joined.push_back(&im);
        }
        std::sort(joined.begin(), joined.end(),
                  [](const Impact* a, const Impact* b) { return a->id < b->id; });
        std::ofstream out(ctx.out("scatter.csv"));
        if (!out) throw std::runtime_error("cannot write scatter.csv");
        out << "account_id,score,impact,known_label\n";
        for (const Impact* im : joined) {
            std::string label = "unknown";
            auto it = corpus.accounts.find(im->id);
            if (it != corpus.accounts.end()) label = to_string(it->second.known_label);
            out << im->id << ',' << format_g17(score_of.at(im->id)) << ','
                << format_g17(im->mean) << ',' << label << '\n';
        }
        out.close();
        ctx.record_out("scatter.csv");
    }

    const std::int64_t bins_i = cfg.integer("report.score_bins");
    if (bins_i < 1) throw std::invalid_argument("config key 'report.score_bins': must be >= 1");
    const std::size_t bins = static_cast<std::size_t>(bins_i);
    auto bin_of = [&](double score) {
        const auto b = static_cast<std::size_t>(score * static_cast<double>(bins));
        return std::min(b, bins - 1);
    };

    // Score histograms split by account status.
    {
        const std::vector<std::string> statuses = {"active", "suspended", "deleted", "unknown"};
        std::map<std::string, std::vector<std::int64_t>> counts;
        for (const auto& s : statuses) counts[s].assign(bins, 0);
        for (const auto& [id, score] : score_of) {
            std::string status = "unknown";
            auto it = corpus.accounts.find(id);
            if (it != corpus.accounts.end()) status = to_string(it->second.status);
            ++counts[status][bin_of(score)];
        }
        std::ofstream out(ctx.out("score_hist.csv"));
        if (!out) throw std::runtime_error("cannot write score_hist.csv");
        out << "status,bin_lo,bin_hi,count\n";
        for (const auto& status : statuses) {
            for (std::size_t b = 0; b < bins; ++b) {
                out << status << ',' << format_g(static_cast<double>(b) / bins) << ','
                    << format_g(static_cast<double>(b + 1) / bins) << ',' << counts[status][b]
                    << '\n';
            }
        }
        out.close();
        ctx.record_out("score_hist.csv");
    }

    // Community / score cross-tab over scored network vertices.
    {
        std::vector<std::vector<std::int64_t>> counts(
            static_cast<std::size_t>(num_blocks), std::vector<std::int64_t>(bins, 0));
        for (const auto& [id, block] : block_of) {
            auto it = score_of.find(id);
            if (it == score_of.end()) continue;
            ++counts[static_cast<std::size_t>(block)][bin_of(it->second)];
        }
        std::ofstream out(ctx.out("community_scores.csv"));
        if (!out) throw std::runtime_error("cannot write community_scores.csv");
        out << "block,bin_lo,bin_hi,count\n";
        for (int blk = 0; blk < num_blocks; ++blk) {
            for (std::size_t b = 0; b < bins; ++b) {
                out << blk << ',' << format_g(static_cast<double>(b) / bins) << ','
                    << format_g(static_cast<double>(b + 1) / bins) << ','
                    << counts[static_cast<std::size_t>(blk)][b] << '\n';
            }
        }
        out.close();
        ctx.record_out("community_scores.csv");
    }
}

}  // namespace

StageResult run_stage(const std::string& stage, const PipelineConfig& cfg) {
    const int sequence = stage_index(stage);
    if (cfg.run_dir().empty()) throw std::invalid_argument("config: run_dir is required");
    fs::create_directories(cfg.run_dir());

    StageCtx ctx{cfg, stage, fs::path(cfg.run_dir()), cfg.stage_seed(stage), {}, {}};
    if (stage == "ingest") {
        stage_ingest(ctx);
    } else if (stage == "topics") {
        stage_topics(ctx);
    } else if (stage == "select-narrative") {
        stage_select_narrative(ctx);
    } else if (stage == "label") {
        stage_label(ctx);
    } else if (stage == "featurize") {
        stage_featurize(ctx);
    } else if (stage == "train") {
        stage_train(ctx);
    } else if (stage == "classify") {
        stage_classify(ctx);
    } else if (stage == "network") {
        stage_network(ctx);
    } else if (stage == "communities") {
        stage_communities(ctx);
    } else if (stage == "impact") {
        stage_impact(ctx);
    } else {
        stage_report(ctx);
    }

    const fs::path manifest_path = ctx.run / "manifest.json";
    RunManifest manifest = load_manifest(manifest_path.string());
    manifest.master_seed = cfg.master_seed();
    StageRecord rec;
    rec.sequence = sequence;
    rec.seed = ctx.seed;
    rec.config_digest = config_digest(cfg);
    rec.inputs = ctx.inputs;
    rec.outputs = ctx.outputs;
    manifest.stages[stage] = std::move(rec);
    save_manifest(manifest, manifest_path.string());

    StageResult result;
    result.stage = stage;
    for (const auto& [rel, digest] : ctx.outputs) result.outputs.push_back(rel);
    return result;
}

std::vector<StageResult> run_pipeline(const PipelineConfig& cfg) {
    std::vector<StageResult> results;
    for (const std::string& stage : stage_order()) {
        results.push_back(run_stage(stage, cfg));
    }
    return results;
}

}  // namespace ioforge
