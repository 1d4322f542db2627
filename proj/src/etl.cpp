#include "tcmdw/etl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tcmdw/csv.hpp"
#include "tcmdw/errors.hpp"
#include "tcmdw/metadata.hpp"

namespace tcmdw {

using nlohmann::json;

namespace {

constexpr std::size_t kRejectSampleLimit = 100;

void push_sample(std::vector<RejectRecord>& sample, RejectRecord record) {
    if (sample.size() < kRejectSampleLimit) sample.push_back(std::move(record));
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return d;
}

}  // namespace

// ---------------------------------------------------------------- extract

StagedBatch extract(const SourceConfig& cfg) {
    std::ifstream in(cfg.uri, std::ios::binary);
    if (!in) throw Error(ErrorCode::SourceUnreadable, "cannot open " + cfg.uri);

    StagedBatch batch;
    if (cfg.format == SourceFormat::Csv) {
        CsvReader reader(in);
        auto header = reader.next();
        if (!header) throw Error(ErrorCode::SourceUnreadable, cfg.uri + " has no header row");
        std::map<std::string, std::size_t> column_index;
        for (std::size_t i = 0; i < header->size(); ++i) column_index[(*header)[i]] = i;
        std::vector<std::pair<std::size_t, std::string>> picks;  // column index -> staged field
        for (const auto& [src, dst] : cfg.field_map) {
            auto it = column_index.find(src);
            if (it == column_index.end()) {
                throw Error(ErrorCode::HeaderMismatch,
                            "column '" + src + "' named in field_map is absent from " + cfg.uri);
            }
            picks.emplace_back(it->second, dst);
        }
        std::size_t record_number = 0;
        while (auto record = reader.next()) {
            ++record_number;
            if (record->size() != header->size()) {
                batch.rejects.push_back({csv_join(*record), -1, "MalformedRecord",
                                         "expected " + std::to_string(header->size()) + " fields, got " +
                                             std::to_string(record->size())});
                continue;
            }
            StagedRow row;
            row.record_number = record_number;
            row.original = csv_join(*record);
            for (const auto& [col, dst] : picks) row.fields[dst] = (*record)[col];
            batch.rows.push_back(std::move(row));
        }
    } else {
        std::string line;
        std::size_t record_number = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ++record_number;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                batch.rejects.push_back({line, -1, "MalformedRecord", "not a JSON object"});
                continue;
            }
            StagedRow row;
            row.record_number = record_number;
            row.original = line;
            bool ok = true;
            for (const auto& [src, dst] : cfg.field_map) {
                auto it = j.find(src);
                if (it == j.end() || it->is_null()) {
                    batch.rejects.push_back({line, -1, "MissingField", "no field '" + src + "'"});
                    ok = false;
                    break;
                }
                if (it->is_string()) {
                    row.fields[dst] = it->get<std::string>();
                } else if (it->is_number_integer()) {
                    row.fields[dst] = std::to_string(it->get<std::int64_t>());
                } else if (it->is_number_float()) {
                    row.fields[dst] = canonical(Value(it->get<double>()));
                } else if (it->is_boolean()) {
                    row.fields[dst] = it->get<bool>() ? "true" : "false";
                } else {
                    batch.rejects.push_back({line, -1, "BadValue", "field '" + src + "' is not scalar"});
                    ok = false;
                    break;
                }
            }
            if (ok) batch.rows.push_back(std::move(row));
        }
    }
    return batch;
}

// -------------------------------------------------------------- transform

void validate_rules(const RuleSet& rules, const std::vector<std::string>& initial_fields) {
    std::set<std::string> fields(initial_fields.begin(), initial_fields.end());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& rule = rules[i];
        const std::string where = "rule " + std::to_string(i);
        auto require = [&](const std::string& f) {
            if (!fields.count(f)) {
                throw Error(ErrorCode::ConfigInvalid,
                            where + " reads field '" + f + "' which does not exist at that point");
            }
        };
        switch (rule.kind) {
            case RuleKind::Rename:
                require(rule.field);
                fields.erase(rule.field);
                fields.insert(rule.to);
                break;
            case RuleKind::Constant:
                fields.insert(rule.field);
                break;
            case RuleKind::Lookup:
            case RuleKind::DateParse:
                require(rule.field);
                break;
            case RuleKind::Scale:
                if (rule.factor <= 0.0) {
                    throw Error(ErrorCode::ConfigInvalid, where + " has non-positive scale factor");
                }
                require(rule.field);
                break;
            case RuleKind::DomainCheck:
                if (rule.min > rule.max) {
                    throw Error(ErrorCode::ConfigInvalid, where + " has min > max");
                }
                require(rule.field);
                break;
        }
    }
}

namespace {

// Pattern tokens YYYY, MM, DD; everything else matches literally.
std::optional<std::int64_t> parse_date_pattern(const std::string& value, const std::string& pattern) {
    std::int64_t year = -1, month = -1, day = -1;
    std::size_t vi = 0;
    for (std::size_t pi = 0; pi < pattern.size();) {
        auto digits = [&](std::size_t n, std::int64_t& out) -> bool {
            if (vi + n > value.size()) return false;
            std::int64_t acc = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const char c = value[vi + k];
                if (c < '0' || c > '9') return false;
                acc = acc * 10 + (c - '0');
            }
            out = acc;
            vi += n;
            return true;
        };
        if (pattern.compare(pi, 4, "YYYY") == 0) {
            if (!digits(4, year)) return std::nullopt;
            pi += 4;
        } else if (pattern.compare(pi, 2, "MM") == 0) {
            if (!digits(2, month)) return std::nullopt;
            pi += 2;
        } else if (pattern.compare(pi, 2, "DD") == 0) {
            if (!digits(2, day)) return std::nullopt;
            pi += 2;
        } else {
            if (vi >= value.size() || value[vi] != pattern[pi]) return std::nullopt;
            ++vi;
            ++pi;
        }
    }
    if (vi != value.size() || year < 0 || month < 0 || day < 0) return std::nullopt;
    const std::int64_t ymd = year * 10000 + month * 100 + day;
    if (!valid_yyyymmdd(ymd)) return std::nullopt;
    return ymd;
}

}  // namespace

std::pair<std::vector<ConformedRow>, std::vector<RejectRecord>> transform(
    const std::vector<StagedRow>& rows, const RuleSet& rules) {
    std::vector<ConformedRow> conformed;
    std::vector<RejectRecord> rejects;
    conformed.reserve(rows.size());

    for (const auto& staged : rows) {
        ConformedRow fields = staged.fields;
        int failed_at = -1;
        std::string reason, detail;
        for (std::size_t i = 0; i < rules.size() && failed_at < 0; ++i) {
            const auto& rule = rules[i];
            switch (rule.kind) {
                case RuleKind::Rename: {
                    auto node = fields.extract(rule.field);
                    fields[rule.to] = std::move(node.mapped());
                    break;
                }
                case RuleKind::Constant:
                    fields[rule.field] = rule.value;
                    break;
                case RuleKind::Lookup: {
                    auto& v = fields[rule.field];
                    auto hit = rule.mapping.find(v);
                    if (hit != rule.mapping.end()) {
                        v = hit->second;
                    } else if (rule.on_miss == LookupMiss::Unknown) {
                        v = kUnknownText;
                    } else if (rule.on_miss == LookupMiss::Reject) {
                        failed_at = static_cast<int>(i);
                        reason = "UnmappedValue";
                        detail = "'" + v + "' has no mapping for field " + rule.field;
                    }
                    break;
                }
                case RuleKind::Scale: {
                    auto& v = fields[rule.field];
                    const auto num = parse_number(v);
                    if (!num) {
                        failed_at = static_cast<int>(i);
                        reason = "BadNumber";
                        detail = "'" + v + "' in field " + rule.field;
                        break;
                    }
                    // half-up to integer milligrams
                    v = std::to_string(static_cast<std::int64_t>(std::floor(*num * rule.factor + 0.5)));
                    break;
                }
                case RuleKind::DateParse: {
                    auto& v = fields[rule.field];
                    const auto ymd = parse_date_pattern(v, rule.pattern);
                    if (!ymd) {
                        failed_at = static_cast<int>(i);
                        reason = "BadDate";
                        detail = "'" + v + "' does not match " + rule.pattern;
                        break;
                    }
                    v = std::to_string(*ymd);
                    break;
                }
                case RuleKind::DomainCheck: {
                    const auto& v = fields.at(rule.field);
                    const auto num = parse_number(v);
                    if (!num) {
                        failed_at = static_cast<int>(i);
                        reason = "BadNumber";
                        detail = "'" + v + "' in field " + rule.field;
                    } else if (*num < rule.min || *num > rule.max) {
                        failed_at = static_cast<int>(i);
                        reason = "DomainViolation";
                        detail = rule.field + " = " + v + " outside [" + std::to_string(rule.min) +
                                 ", " + std::to_string(rule.max) + "]";
                    }
                    break;
                }
            }
        }
        if (failed_at >= 0) {
            rejects.push_back({staged.original, failed_at, reason, detail});
        } else {
            conformed.push_back(std::move(fields));
        }
    }
    return {std::move(conformed), std::move(rejects)};
}

// ------------------------------------------------------------------- load

namespace {

LoadReport skipped_batch_report(const std::string& batch_id, std::size_t rows) {
    LoadReport report;
    report.batch_id = batch_id;
    report.rows_in = static_cast<std::int64_t>(rows);
    report.skipped_duplicate_batch = static_cast<std::int64_t>(rows);
    return report;
}

void finish_lineage(Warehouse& wh, const LoadReport& report, const std::string& uri,
                    const std::string& rules_digest, const std::string& started,
                    std::int64_t upstream_rejects) {
    LineageRecord record;
    record.batch_id = report.batch_id;
    record.source_uri = uri;
    record.ruleset_digest = rules_digest;
    record.started = started;
    record.finished = rfc3339_now();
    record.rows_in = report.rows_in + upstream_rejects;
    record.rows_out = report.inserted;
    record.rows_rejected = report.rejected + upstream_rejects;
    record.rows_skipped = report.skipped_duplicate_batch;
    record.inferred_members = report.inferred_members;
    wh.record_lineage(record);
}

std::string row_repr(const ConformedRow& row) {
    json j(row);
    return j.dump();
}

}  // namespace

LoadReport load_facts(Warehouse& wh, const std::vector<ConformedRow>& rows,
                      const std::string& batch_id, bool infer_members,
                      const std::string& source_uri, const std::string& rules_digest,
                      std::int64_t upstream_rejects, std::vector<RejectRecord> upstream_sample) {
    const std::string started = rfc3339_now();
    if (wh.has_batch(batch_id)) return skipped_batch_report(batch_id, rows.size());

    const auto& fact = wh.schema().fact;
    LoadReport report;
    report.batch_id = batch_id;
    report.rows_in = static_cast<std::int64_t>(rows.size());
    report.reject_sample = std::move(upstream_sample);
    const std::int64_t inferred_before = wh.inferred_member_count();

    std::vector<FactRow> pending;
    std::vector<const ConformedRow*> pending_src;
    pending.reserve(rows.size());

    for (const auto& row : rows) {
        FactRow out;
        std::string reason, detail;
        bool ok = true;

        for (const auto& dim_name : fact.dimensions) {
            const auto* dim = wh.schema().find_dimension(dim_name);
            const auto& base = base_table(*dim);
            auto it = row.find(base.natural_key);
            if (it == row.end()) {
                reason = "MissingField";
                detail = "no field '" + base.natural_key + "' for dimension " + dim_name;
                ok = false;
                break;
            }
            const auto* key_attr = base.find_attribute(base.natural_key);
            Value natural;
            try {
                natural = parse_value(key_attr->kind, it->second);
            } catch (const Error&) {
                reason = "InvalidNaturalKey";
                detail = "'" + it->second + "' is not a valid " + value_kind_name(key_attr->kind) +
                         " for dimension " + dim_name;
                ok = false;
                break;
            }
            const std::string natural_c = canonical(natural);
            std::int64_t key;
            if (auto found = wh.find_member(base.name, natural_c)) {
                key = *found;
            } else if (wh.date_derivable(base.name)) {
                key = wh.ensure_date_member(base.name, std::get<std::int64_t>(natural));
            } else if (infer_members) {
                std::map<std::string, Value> placeholder;
                for (const auto& attr : base.attributes) {
                    if (attr.name != base.natural_key) placeholder[attr.name] = kInferredText;
                }
                key = wh.upsert_member(base.name, natural, placeholder, {}, true);
            } else {
                key = kUnknownKey;
            }
            out.dim_keys.push_back(key);
        }
        if (ok) {
            for (const auto& degenerate : fact.degenerate_keys) {
                auto it = row.find(degenerate.name);
                if (it == row.end()) {
                    reason = "MissingField";
                    detail = "no field '" + degenerate.name + "'";
                    ok = false;
                    break;
                }
                try {
                    out.degenerate.push_back(parse_value(degenerate.kind, it->second));
                } catch (const Error&) {
                    reason = "BadValue";
                    detail = "'" + it->second + "' for degenerate key " + degenerate.name;
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            for (const auto& measure : fact.measures) {
                auto it = row.find(measure.name);
                if (it == row.end()) {
                    reason = "MissingField";
                    detail = "no field '" + measure.name + "'";
                    ok = false;
                    break;
                }
                try {
                    out.measures.push_back(
                        std::get<std::int64_t>(parse_value(ValueKind::Integer, it->second)));
                } catch (const Error&) {
                    reason = "BadNumber";
                    detail = "'" + it->second + "' for measure " + measure.name;
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            report.rejected += 1;
            push_sample(report.reject_sample, {row_repr(row), -1, reason, detail});
            continue;
        }
        pending.push_back(std::move(out));
        pending_src.push_back(&row);
    }

    const auto outcomes = wh.append_facts(pending);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].accepted) {
            report.inserted += 1;
        } else {
            report.rejected += 1;
            push_sample(report.reject_sample,
                        {row_repr(*pending_src[i]), -1, outcomes[i].reason, outcomes[i].detail});
        }
    }
    report.inferred_members = wh.inferred_member_count() - inferred_before;
    finish_lineage(wh, report, source_uri, rules_digest, started, upstream_rejects);
    return report;
}

LoadReport load_dimension(Warehouse& wh, const std::string& table,
                          const std::vector<ConformedRow>& rows, const std::string& batch_id,
                          const std::string& source_uri, const std::string& rules_digest,
                          std::int64_t upstream_rejects, std::vector<RejectRecord> upstream_sample) {
    const std::string started = rfc3339_now();
    if (wh.has_batch(batch_id)) return skipped_batch_report(batch_id, rows.size());

    // resolve the table before looping so an unknown table is a call error
    const auto* dim = [&]() -> const DimensionDef* {
        for (const auto& d : wh.schema().dimensions) {
            if (d.find_table(table)) return &d;
        }
        throw Error(ErrorCode::UnknownTable, "no lookup table named '" + table + "'");
    }();
    const auto& def = *dim->find_table(table);

    LoadReport report;
    report.batch_id = batch_id;
    report.rows_in = static_cast<std::int64_t>(rows.size());
    report.reject_sample = std::move(upstream_sample);
    const std::int64_t inferred_before = wh.inferred_member_count();

    for (const auto& row : rows) {
        std::string reason, detail;
        bool ok = true;

        Value natural;
        std::map<std::string, Value> attrs;
        std::map<std::string, Value> parent_naturals;

        auto key_it = row.find(def.natural_key);
        if (key_it == row.end()) {
            reason = "MissingAttribute";
            detail = "no field '" + def.natural_key + "'";
            ok = false;
        } else {
            try {
                natural = parse_value(def.find_attribute(def.natural_key)->kind, key_it->second);
            } catch (const Error&) {
                reason = "BadValue";
                detail = "'" + key_it->second + "' is not a valid natural key";
                ok = false;
            }
        }
        for (const auto& attr : def.attributes) {
            if (!ok) break;
            if (attr.name == def.natural_key) continue;
            auto it = row.find(attr.name);
            if (it == row.end()) {
                reason = "MissingAttribute";
                detail = "no field '" + attr.name + "'";
                ok = false;
                break;
            }
            try {
                attrs[attr.name] = parse_value(attr.kind, it->second);
            } catch (const Error&) {
                reason = "BadValue";
                detail = "'" + it->second + "' for attribute " + attr.name;
                ok = false;
            }
        }
        for (const auto& parent : def.parents) {
            if (!ok) break;
            const auto& parent_def = *dim->find_table(parent);
            auto it = row.find(parent_def.natural_key);
            if (it == row.end()) continue;  // absent parent -> Unknown member
            try {
                parent_naturals[parent] = parse_value(
                    parent_def.find_attribute(parent_def.natural_key)->kind, it->second);
            } catch (const Error&) {
                reason = "BadValue";
                detail = "'" + it->second + "' for parent " + parent;
                ok = false;
            }
        }
        if (!ok) {
            report.rejected += 1;
            push_sample(report.reject_sample, {row_repr(row), -1, reason, detail});
            continue;
        }
        try {
            wh.upsert_member(table, natural, attrs, parent_naturals);
            report.inserted += 1;
        } catch (const Error& e) {
            report.rejected += 1;
            push_sample(report.reject_sample, {row_repr(row), -1, error_code_name(e.code()), e.what()});
        }
    }
    report.inferred_members = wh.inferred_member_count() - inferred_before;
    finish_lineage(wh, report, source_uri, rules_digest, started, upstream_rejects);
    return report;
}

// --------------------------------------------------------------- pipeline

namespace {

SourceFormat format_from_string(const std::string& s) {
    if (s == "csv") return SourceFormat::Csv;
    if (s == "jsonl") return SourceFormat::Jsonl;
    throw Error(ErrorCode::ConfigInvalid, "unknown source format '" + s + "'");
}

SourceKind kind_from_string(const std::string& s) {
    if (s == "dimension") return SourceKind::Dimension;
    if (s == "fact") return SourceKind::Fact;
    throw Error(ErrorCode::ConfigInvalid, "unknown source kind '" + s + "'");
}

LookupMiss on_miss_from_string(const std::string& s) {
    if (s == "reject") return LookupMiss::Reject;
    if (s == "unknown") return LookupMiss::Unknown;
    if (s == "passthrough") return LookupMiss::Passthrough;
    throw Error(ErrorCode::ConfigInvalid, "unknown on_miss policy '" + s + "'");
}

Rule rule_from_json(const json& j, std::size_t index) {
    const std::string where = "rule " + std::to_string(index);
    if (!j.is_object() || !j.contains("op")) {
        throw Error(ErrorCode::ConfigInvalid, where + " must be an object with an 'op'");
    }
    const std::string op = j.at("op").get<std::string>();
    Rule rule;
    try {
        if (op == "rename") {
            rule.kind = RuleKind::Rename;
            rule.field = j.at("from").get<std::string>();
            rule.to = j.at("to").get<std::string>();
        } else if (op == "constant") {
            rule.kind = RuleKind::Constant;
            rule.field = j.at("field").get<std::string>();
            rule.value = j.at("value").get<std::string>();
        } else if (op == "lookup") {
            rule.kind = RuleKind::Lookup;
            rule.field = j.at("field").get<std::string>();
            for (auto it = j.at("mapping").begin(); it != j.at("mapping").end(); ++it) {
                rule.mapping[it.key()] = it.value().get<std::string>();
            }
            rule.on_miss = on_miss_from_string(j.value("on_miss", "reject"));
        } else if (op == "scale") {
            rule.kind = RuleKind::Scale;
            rule.field = j.at("field").get<std::string>();
            rule.factor = j.at("factor").get<double>();
        } else if (op == "date_parse") {
            rule.kind = RuleKind::DateParse;
            rule.field = j.at("field").get<std::string>();
            rule.pattern = j.at("pattern").get<std::string>();
        } else if (op == "domain_check") {
            rule.kind = RuleKind::DomainCheck;
            rule.field = j.at("field").get<std::string>();
            rule.min = j.at("min").get<double>();
            rule.max = j.at("max").get<double>();
        } else {
            throw Error(ErrorCode::ConfigInvalid, where + " has unknown op '" + op + "'");
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, where + ": " + e.what());
    }
    return rule;
}

}  // namespace

nlohmann::json rules_to_json(const RuleSet& rules) {
    json out = json::array();
    for (const auto& r : rules) {
        json j;
        switch (r.kind) {
            case RuleKind::Rename:
                j = {{"op", "rename"}, {"from", r.field}, {"to", r.to}};
                break;
            case RuleKind::Constant:
                j = {{"op", "constant"}, {"field", r.field}, {"value", r.value}};
                break;
            case RuleKind::Lookup: {
                const char* policy = r.on_miss == LookupMiss::Reject    ? "reject"
                                     : r.on_miss == LookupMiss::Unknown ? "unknown"
                                                                        : "passthrough";
                j = {{"op", "lookup"}, {"field", r.field}, {"mapping", r.mapping}, {"on_miss", policy}};
                break;
            }
            case RuleKind::Scale:
                j = {{"op", "scale"}, {"field", r.field}, {"factor", r.factor}};
                break;
            case RuleKind::DateParse:
                j = {{"op", "date_parse"}, {"field", r.field}, {"pattern", r.pattern}};
                break;
            case RuleKind::DomainCheck:
                j = {{"op", "domain_check"}, {"field", r.field}, {"min", r.min}, {"max", r.max}};
                break;
        }
        out.push_back(std::move(j));
    }
    return out;
}

PipelineConfig pipeline_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object() || !doc.contains("warehouse") || !doc.contains("sources")) {
        throw Error(ErrorCode::ConfigInvalid, "pipeline config needs 'warehouse' and 'sources'");
    }
    PipelineConfig cfg;
    std::filesystem::path wh_path = doc.at("warehouse").get<std::string>();
    cfg.warehouse = wh_path.is_absolute() ? wh_path : base_dir / wh_path;

    std::set<std::string> batch_ids;
    for (std::size_t i = 0; i < doc.at("sources").size(); ++i) {
        const auto& sj = doc.at("sources")[i];
        const std::string where = "sources[" + std::to_string(i) + "]";
        for (auto it = sj.begin(); it != sj.end(); ++it) {
            static const std::set<std::string> allowed = {"uri",      "format", "kind",
                                                          "table",    "field_map", "rules",
                                                          "batch_id", "infer_members"};
            if (!allowed.count(it.key())) {
                throw Error(ErrorCode::ConfigInvalid, where + " has unknown key '" + it.key() + "'");
            }
        }
        SourceConfig src;
        try {
            std::filesystem::path uri = sj.at("uri").get<std::string>();
            src.uri = (uri.is_absolute() ? uri : base_dir / uri).string();
            src.format = format_from_string(sj.at("format").get<std::string>());
            src.kind = kind_from_string(sj.at("kind").get<std::string>());
            if (src.kind == SourceKind::Dimension) src.table = sj.at("table").get<std::string>();
            for (auto it = sj.at("field_map").begin(); it != sj.at("field_map").end(); ++it) {
                src.field_map.emplace_back(it.key(), it.value().get<std::string>());
            }
            if (sj.contains("rules")) {
                for (std::size_t r = 0; r < sj.at("rules").size(); ++r) {
                    src.rules.push_back(rule_from_json(sj.at("rules")[r], r));
                }
            }
            src.batch_id = sj.at("batch_id").get<std::string>();
            src.infer_members = sj.value("infer_members", true);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::ConfigInvalid, where + ": " + e.what());
        }
        if (src.batch_id.empty()) {
            throw Error(ErrorCode::ConfigInvalid, where + " has an empty batch_id");
        }
        if (!batch_ids.insert(src.batch_id).second) {
            throw Error(ErrorCode::ConfigInvalid, where + " repeats batch_id '" + src.batch_id + "'");
        }
        cfg.sources.push_back(std::move(src));
    }
    return cfg;
}

PipelineConfig parse_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::SourceUnreadable, "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    return pipeline_config_from_json(doc, path.parent_path());
}

PipelineReport run_pipeline(Warehouse& wh, const PipelineConfig& cfg) {
    // dimension sources load before fact sources, stable within each kind
    std::vector<const SourceConfig*> order;
    for (const auto& s : cfg.sources) {
        if (s.kind == SourceKind::Dimension) order.push_back(&s);
    }
    for (const auto& s : cfg.sources) {
        if (s.kind == SourceKind::Fact) order.push_back(&s);
    }

    PipelineReport pipeline;
    for (const auto* src : order) {
        SourceResult result;
        result.uri = src->uri;
        result.kind = src->kind;
        result.table = src->table;
        try {
            std::vector<std::string> staged_fields;
            for (const auto& [from, to] : src->field_map) {
                (void)from;
                staged_fields.push_back(to);
            }
            validate_rules(src->rules, staged_fields);
            const std::string digest = ruleset_digest(rules_to_json(src->rules));

            StagedBatch batch = extract(*src);
            auto [conformed, transform_rejects] = transform(batch.rows, src->rules);

            std::vector<RejectRecord> sample;
            for (const auto& r : batch.rejects) push_sample(sample, r);
            for (const auto& r : transform_rejects) push_sample(sample, r);
            const auto upstream =
                static_cast<std::int64_t>(batch.rejects.size() + transform_rejects.size());

            if (src->kind == SourceKind::Dimension) {
                result.report = load_dimension(wh, src->table, conformed, src->batch_id, src->uri,
                                               digest, upstream, std::move(sample));
            } else {
                result.report = load_facts(wh, conformed, src->batch_id, src->infer_members,
                                           src->uri, digest, upstream, std::move(sample));
                pipeline.total_inserted_facts += result.report.inserted;
            }
            result.report.rejected += upstream;
            result.report.rows_in += upstream;
            pipeline.total_rejected += result.report.rejected;
            result.ok = true;
        } catch (const Error& e) {
            result.ok = false;
            result.error = e.what();
            pipeline.all_ok = false;
        }
        pipeline.sources.push_back(std::move(result));
    }
    return pipeline;
}

}  // namespace tcmdw
