#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tcmdw/value.hpp"

namespace tcmdw {

inline const std::string kAllLevel = "All";

struct AttributeDef {
    std::string name;
    ValueKind kind = ValueKind::Text;
    std::string description;
};

// One lookup table of a snowflaked dimension. `parents` names the coarser
// tables this one references; a member row carries one surrogate key per
// parent. Most tables have zero or one parent; Sources in the built-in
// schema has two (SourceTypes and Countries).
struct LookupTableDef {
    std::string name;
    std::string natural_key;
    std::vector<AttributeDef> attributes;
    std::vector<std::string> parents;

    const AttributeDef* find_attribute(std::string_view attr) const;
};

struct HierarchyLevel {
    std::string level;
    std::string attribute;
};

// Ordered finest-to-coarsest. "All" is implied above the coarsest entry and
// never listed.
struct Hierarchy {
    std::string name;
    std::vector<HierarchyLevel> levels;
};

struct DimensionDef {
    std::string name;
    std::vector<LookupTableDef> tables;
    std::vector<Hierarchy> hierarchies;

    const LookupTableDef* find_table(std::string_view table) const;
    const Hierarchy* find_hierarchy(std::string_view hierarchy) const;
};

// All v1 measures are additive; averages are derived from sum and count.
struct MeasureDef {
    std::string name;
    std::string unit;
    std::int64_t min = 1;
};

struct DegenerateKey {
    std::string name;
    ValueKind kind = ValueKind::Text;
};

struct FactDef {
    std::string name;
    std::vector<std::string> dimensions;
    std::vector<DegenerateKey> degenerate_keys;
    std::vector<MeasureDef> measures;

    int dimension_index(std::string_view dimension) const;  // -1 if absent
    int measure_index(std::string_view measure) const;
};

struct SchemaDef {
    std::string name;
    std::vector<DimensionDef> dimensions;
    FactDef fact;

    const DimensionDef* find_dimension(std::string_view dimension) const;
    int dimension_count() const { return static_cast<int>(fact.dimensions.size()); }
};

enum class Severity { Error, Warning };

struct ValidationIssue {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    std::string location;  // JSON pointer into the schema document
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool valid() const;
    std::size_t error_count() const;
    std::size_t warning_count() const;
};

// Strict parser for the schema file format: unknown keys are a SyntaxError.
// Throws Error with codes SyntaxError, DuplicateName or MissingSection.
SchemaDef parse_schema(std::string_view text);

// Document form mirroring the file format; parse_schema(schema_to_json(s))
// is structurally identical to s.
nlohmann::ordered_json schema_to_json(const SchemaDef& schema);

// Key-sorted, whitespace-free rendering; input to schema_digest.
std::string schema_canonical_json(const SchemaDef& schema);
std::string schema_digest(const SchemaDef& schema);

ValidationReport validate_schema(const SchemaDef& schema);

// The fixed warehouse schema for the TCM workload: fact FormulaList over the
// Date, Formula, Herb and Source dimensions, nine tables in total.
SchemaDef builtin_tcm_schema();

// --- resolved navigation helpers (meaningful once validation passes) ---

struct LevelBinding {
    std::string level;
    std::string table;
    std::string attribute;
};

// Distinct hierarchy levels of a dimension in declaration order, excluding
// the implicit "All".
std::vector<LevelBinding> dimension_levels(const DimensionDef& dim);

// The unique table no other table references as a parent.
const LookupTableDef& base_table(const DimensionDef& dim);

// Tables from the base to `table`, inclusive; empty when unreachable.
std::vector<const LookupTableDef*> path_from_base(const DimensionDef& dim, std::string_view table);

}  // namespace tcmdw
