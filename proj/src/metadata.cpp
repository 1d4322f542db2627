#include "tcmdw/metadata.hpp"

#include <nlohmann/json.hpp>

#include "tcmdw/digest.hpp"
#include "tcmdw/text_table.hpp"

namespace tcmdw {

using nlohmann::json;
using nlohmann::ordered_json;

DataDictionary data_dictionary(const Warehouse& wh) {
    const auto& schema = wh.schema();
    DataDictionary dict;
    dict.schema_name = schema.name;
    dict.schema_digest = schema_digest(schema);

    DictionaryTable fact;
    fact.name = schema.fact.name;
    fact.kind = "fact";
    fact.row_count = wh.fact_count();
    for (const auto& dim_name : schema.fact.dimensions) {
        const auto* dim = schema.find_dimension(dim_name);
        fact.columns.push_back({dim_name + "_key", "integer",
                                "surrogate key into " + base_table(*dim).name});
    }
    for (const auto& k : schema.fact.degenerate_keys) {
        fact.columns.push_back({k.name, value_kind_name(k.kind), "degenerate key"});
    }
    for (const auto& m : schema.fact.measures) {
        fact.columns.push_back({m.name, "integer", "additive measure (" + m.unit + ")"});
    }
    dict.tables.push_back(std::move(fact));

    for (const auto& dim : schema.dimensions) {
        for (const auto& t : dim.tables) {
            DictionaryTable table;
            table.name = t.name;
            table.kind = "lookup";
            table.row_count = wh.member_count(t.name);
            table.parents = t.parents;
            for (const auto& attr : t.attributes) {
                table.columns.push_back({attr.name, value_kind_name(attr.kind), attr.description});
            }
            dict.tables.push_back(std::move(table));
        }
    }
    return dict;
}

ordered_json dictionary_to_json(const DataDictionary& dict) {
    ordered_json out;
    out["schema"] = dict.schema_name;
    out["schema_digest"] = dict.schema_digest;
    out["tables"] = ordered_json::array();
    for (const auto& t : dict.tables) {
        ordered_json tj;
        tj["name"] = t.name;
        tj["kind"] = t.kind;
        tj["row_count"] = t.row_count;
        if (!t.parents.empty()) tj["parents"] = t.parents;
        tj["columns"] = ordered_json::array();
        for (const auto& c : t.columns) {
            tj["columns"].push_back({{"name", c.name}, {"kind", c.kind}, {"description", c.description}});
        }
        out["tables"].push_back(std::move(tj));
    }
    return out;
}

std::string render_dictionary(const DataDictionary& dict) {
    std::string out = "warehouse " + dict.schema_name + "  (schema " +
                      dict.schema_digest.substr(0, 12) + ")\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : dict.tables) {
        std::string parents;
        for (const auto& p : t.parents) parents += (parents.empty() ? "" : ", ") + p;
        rows.push_back({t.name, t.kind, std::to_string(t.row_count), parents});
    }
    out += render_text_table({"table", "kind", "rows", "parents"}, rows);
    for (const auto& t : dict.tables) {
        out += "\n" + t.name + "\n";
        std::vector<std::vector<std::string>> cols;
        for (const auto& c : t.columns) cols.push_back({c.name, c.kind, c.description});
        out += render_text_table({"column", "kind", "description"}, cols);
    }
    return out;
}

void record_lineage(Warehouse& wh, const LineageRecord& record) { wh.record_lineage(record); }

const LineageRecord& get_lineage(const Warehouse& wh, const std::string& batch_id) {
    return wh.get_lineage(batch_id);
}

ordered_json lineage_to_json(const LineageRecord& r) {
    ordered_json j;
    j["batch_id"] = r.batch_id;
    j["source_uri"] = r.source_uri;
    j["ruleset_digest"] = r.ruleset_digest;
    j["started"] = r.started;
    j["finished"] = r.finished;
    j["rows_in"] = r.rows_in;
    j["rows_out"] = r.rows_out;
    j["rows_rejected"] = r.rows_rejected;
    j["rows_skipped"] = r.rows_skipped;
    j["inferred_members"] = r.inferred_members;
    return j;
}

std::string render_lineage(const std::vector<LineageRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
        rows.push_back({r.batch_id, r.source_uri, r.ruleset_digest.substr(0, 12), r.finished,
                        std::to_string(r.rows_in), std::to_string(r.rows_out),
                        std::to_string(r.rows_rejected), std::to_string(r.rows_skipped),
                        std::to_string(r.inferred_members)});
    }
    return render_text_table(
        {"batch_id", "source", "rules", "finished", "in", "out", "rejected", "skipped", "inferred"},
        rows);
}

std::string ruleset_digest(const json& rules) {
    return sha256_hex(json(rules).dump());
}

}  // namespace tcmdw
