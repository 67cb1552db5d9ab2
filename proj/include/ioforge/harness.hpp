#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ioforge {

// ---- pipeline configuration ------------------------------------------------

enum class ConfigType { string, integer, number, boolean, list };

struct ConfigKeySpec {
    ConfigType type = ConfigType::string;
    std::string default_value;  // canonical text form
    std::string help;
};

// Every recognized key with its type, default, and one-line description.
const std::map<std::string, ConfigKeySpec>& config_schema();

struct PipelineConfig {
    // Complete key set (defaults merged under explicit settings).
    std::map<std::string, std::string> values;

    const std::string& str(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    double number(const std::string& key) const;
    bool boolean(const std::string& key) const;
    // Comma-split, whitespace-trimmed, empty entries dropped.
    std::vector<std::string> list(const std::string& key) const;

    std::string run_dir() const;
    std::uint64_t master_seed() const;
    // Per-stage sub-seed derived from the master seed and the stage name.
    std::uint64_t stage_seed(const std::string& stage) const;
};

// Parses `key = value` lines; blank lines and lines starting with '#' are
// ignored. Unknown keys, values that do not parse at the declared type, and a
// missing run_dir all throw with the offending key named.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config(const std::string& path);

// Applies one key=value override with the same validation as the parser.
void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value);

// ---- run manifest ----------------------------------------------------------

struct StageRecord {
    int sequence = -1;  // canonical position in stage_order()
    std::uint64_t seed = 0;
    std::string config_digest;                  // digest of the settings (run_dir excluded)
    std::map<std::string, std::string> inputs;  // path (run-dir-relative when inside) -> digest
    std::map<std::string, std::string> outputs;
};

struct RunManifest {
    std::uint64_t master_seed = 0;
    std::map<std::string, StageRecord> stages;
};

// FNV-1a 64-bit digest of the file bytes, 16 hex digits. Throws if unreadable.
std::string file_digest(const std::string& path);

// Missing file yields an empty manifest.
RunManifest load_manifest(const std::string& path);
void save_manifest(const RunManifest& manifest, const std::string& path);

// ---- stages ----------------------------------------------------------------

// The pipeline stages in canonical execution order:
// ingest, topics, select-narrative, label, featurize, train, classify,
// network, communities, impact, report.
const std::vector<std::string>& stage_order();

struct StageResult {
    std::string stage;
    std::vector<std::string> outputs;  // run-dir-relative artifact paths
};

// Runs one stage against cfg.run_dir(): checks that every upstream artifact
// exists (the error names the stage to run first), writes this stage's
// artifacts, and records the stage in manifest.json at the run-dir root.
StageResult run_stage(const std::string& stage, const PipelineConfig& cfg);

// All eleven stages in canonical order.
std::vector<StageResult> run_pipeline(const PipelineConfig& cfg);

}  // namespace ioforge
