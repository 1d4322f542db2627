#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tcmdw/warehouse.hpp"

namespace tcmdw {

struct DictionaryColumn {
    std::string name;
    std::string kind;
    std::string description;
};

struct DictionaryTable {
    std::string name;
    std::string kind;  // fact | lookup
    std::vector<DictionaryColumn> columns;
    std::int64_t row_count = 0;
    std::vector<std::string> parents;
};

struct DataDictionary {
    std::string schema_name;
    std::string schema_digest;
    std::vector<DictionaryTable> tables;  // fact first, then lookups in schema order
};

// Self-description of the warehouse: tables, columns with the schema
// document's descriptions verbatim, and live row counts.
DataDictionary data_dictionary(const Warehouse& wh);

nlohmann::ordered_json dictionary_to_json(const DataDictionary& dict);
std::string render_dictionary(const DataDictionary& dict);  // aligned text tables

// Lineage log operations. The log is append-only and carried through
// checkpoint/restore inside the warehouse directory.
void record_lineage(Warehouse& wh, const LineageRecord& record);
const LineageRecord& get_lineage(const Warehouse& wh, const std::string& batch_id);

nlohmann::ordered_json lineage_to_json(const LineageRecord& record);
std::string render_lineage(const std::vector<LineageRecord>& records);

// SHA-256 over the rule list serialized with sorted keys and no whitespace;
// the implementation-independent identity of "which rules produced this data".
std::string ruleset_digest(const nlohmann::json& rules);

}  // namespace tcmdw
