#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tcmdw/warehouse.hpp"

namespace tcmdw {

enum class SourceFormat { Csv, Jsonl };
enum class SourceKind { Dimension, Fact };
enum class RuleKind { Rename, Constant, Lookup, Scale, DateParse, DomainCheck };
enum class LookupMiss { Reject, Unknown, Passthrough };

// One transform step. Rules run in order per row; the first failing rule
// rejects the row with its reason.
struct Rule {
    RuleKind kind = RuleKind::Rename;
    std::string field;                           // input field (rename: from)
    std::string to;                              // rename target
    std::string value;                           // constant value
    std::map<std::string, std::string> mapping;  // lookup table
    LookupMiss on_miss = LookupMiss::Reject;
    double factor = 1.0;                         // scale
    std::string pattern;                         // date_parse, e.g. "YYYY-MM-DD"
    double min = 0.0;                            // domain_check bounds
    double max = 0.0;
};

using RuleSet = std::vector<Rule>;

struct SourceConfig {
    std::string uri;  // file path, resolved
    SourceFormat format = SourceFormat::Csv;
    SourceKind kind = SourceKind::Fact;
    std::string table;  // target lookup table for dimension sources
    std::vector<std::pair<std::string, std::string>> field_map;  // source column -> staged field
    RuleSet rules;
    std::string batch_id;
    bool infer_members = true;
};

struct StagedRow {
    std::map<std::string, std::string> fields;
    std::size_t record_number = 0;  // 1-based within the source
    std::string original;
};

struct RejectRecord {
    std::string original;
    int rule_index = -1;  // -1 when the failure is outside the rule pipeline
    std::string reason;
    std::string detail;
};

struct StagedBatch {
    std::vector<StagedRow> rows;
    std::vector<RejectRecord> rejects;  // per-row extract failures
};

// A row ready for loading: staged field name -> value, all strings in
// canonical form after transformation.
using ConformedRow = std::map<std::string, std::string>;

struct LoadReport {
    std::string batch_id;
    std::int64_t rows_in = 0;
    std::int64_t inserted = 0;
    std::int64_t skipped_duplicate_batch = 0;
    std::int64_t rejected = 0;
    std::int64_t inferred_members = 0;
    std::vector<RejectRecord> reject_sample;  // first 100
};

// Reads the source and stages rows with fields renamed per field_map.
// Throws SourceUnreadable / HeaderMismatch; malformed records become
// per-row rejects.
StagedBatch extract(const SourceConfig& cfg);

// Static rule check against the fields flowing out of field_map. Throws
// Error(ConfigInvalid) naming the offending rule index.
void validate_rules(const RuleSet& rules, const std::vector<std::string>& initial_fields);

// Applies rules in order per row; |rows in| == |conformed| + |rejects|.
std::pair<std::vector<ConformedRow>, std::vector<RejectRecord>> transform(
    const std::vector<StagedRow>& rows, const RuleSet& rules);

// Loads conformed fact rows: natural keys resolved to surrogate keys,
// unknown members inferred or mapped to key 0, batch replay skipped via
// lineage. Also records the batch's lineage (upstream_rejects folds extract
// and transform failures into the lineage totals).
LoadReport load_facts(Warehouse& wh, const std::vector<ConformedRow>& rows,
                      const std::string& batch_id, bool infer_members,
                      const std::string& source_uri = "", const std::string& rules_digest = "",
                      std::int64_t upstream_rejects = 0,
                      std::vector<RejectRecord> upstream_sample = {});

// Same contract for dimension seed rows: one upsert per row into `table`.
LoadReport load_dimension(Warehouse& wh, const std::string& table,
                          const std::vector<ConformedRow>& rows, const std::string& batch_id,
                          const std::string& source_uri = "", const std::string& rules_digest = "",
                          std::int64_t upstream_rejects = 0,
                          std::vector<RejectRecord> upstream_sample = {});

struct PipelineConfig {
    std::filesystem::path warehouse;
    std::vector<SourceConfig> sources;
};

struct SourceResult {
    std::string uri;
    SourceKind kind = SourceKind::Fact;
    std::string table;
    bool ok = false;
    std::string error;
    LoadReport report;
};

struct PipelineReport {
    std::vector<SourceResult> sources;
    std::int64_t total_inserted_facts = 0;
    std::int64_t total_rejected = 0;
    bool all_ok = true;
};

// Strict parse of the pipeline config document; relative source uris are
// resolved against the config file's directory.
PipelineConfig parse_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir);

// Runs every source in config order, dimension sources before fact sources.
// A failing source is recorded and the remaining sources still run.
PipelineReport run_pipeline(Warehouse& wh, const PipelineConfig& cfg);

nlohmann::json rules_to_json(const RuleSet& rules);

}  // namespace tcmdw
