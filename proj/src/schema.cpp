#include "tcmdw/schema.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tcmdw/digest.hpp"
#include "tcmdw/errors.hpp"

namespace tcmdw {

using nlohmann::json;
using nlohmann::ordered_json;

const AttributeDef* LookupTableDef::find_attribute(std::string_view attr) const {
    for (const auto& a : attributes) {
        if (a.name == attr) return &a;
    }
    return nullptr;
}

const LookupTableDef* DimensionDef::find_table(std::string_view table) const {
    for (const auto& t : tables) {
        if (t.name == table) return &t;
    }
    return nullptr;
}

const Hierarchy* DimensionDef::find_hierarchy(std::string_view hierarchy) const {
    for (const auto& h : hierarchies) {
        if (h.name == hierarchy) return &h;
    }
    return nullptr;
}

int FactDef::dimension_index(std::string_view dimension) const {
    for (std::size_t i = 0; i < dimensions.size(); ++i) {
        if (dimensions[i] == dimension) return static_cast<int>(i);
    }
    return -1;
}

int FactDef::measure_index(std::string_view measure) const {
    for (std::size_t i = 0; i < measures.size(); ++i) {
        if (measures[i].name == measure) return static_cast<int>(i);
    }
    return -1;
}

const DimensionDef* SchemaDef::find_dimension(std::string_view dimension) const {
    for (const auto& d : dimensions) {
        if (d.name == dimension) return &d;
    }
    return nullptr;
}

bool ValidationReport::valid() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
    return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const auto& i) {
        return i.severity == Severity::Error;
    }));
}

std::size_t ValidationReport::warning_count() const {
    return issues.size() - error_count();
}

// ---------------------------------------------------------------- parsing

namespace {

void require_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw Error(ErrorCode::SyntaxError, "unknown key '" + it.key() + "' at " + where);
        }
    }
}

const ordered_json& need(const ordered_json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw Error(ErrorCode::SyntaxError, "missing key '" + std::string(key) + "' at " + where);
    }
    return *it;
}

std::string need_identifier(const ordered_json& obj, const char* key, const std::string& where) {
    const auto& j = need(obj, key, where);
    if (!j.is_string() || !is_identifier(j.get_ref<const std::string&>())) {
        throw Error(ErrorCode::SyntaxError,
                    "'" + std::string(key) + "' at " + where + " must be an identifier");
    }
    return j.get<std::string>();
}

AttributeDef parse_attribute(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::SyntaxError, "attribute at " + where + " must be an object");
    require_keys(j, {"name", "kind", "description"}, where);
    AttributeDef attr;
    attr.name = need_identifier(j, "name", where);
    const auto& kind = need(j, "kind", where);
    if (!kind.is_string()) throw Error(ErrorCode::SyntaxError, "'kind' at " + where + " must be a string");
    attr.kind = value_kind_from_string(kind.get_ref<const std::string&>());
    if (auto it = j.find("description"); it != j.end()) {
        if (!it->is_string()) throw Error(ErrorCode::SyntaxError, "'description' at " + where + " must be a string");
        attr.description = it->get<std::string>();
    }
    return attr;
}

LookupTableDef parse_table(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::SyntaxError, "table at " + where + " must be an object");
    require_keys(j, {"name", "natural_key", "attributes", "parent"}, where);
    LookupTableDef table;
    table.name = need_identifier(j, "name", where);
    table.natural_key = need_identifier(j, "natural_key", where);
    const auto& attrs = need(j, "attributes", where);
    if (!attrs.is_array() || attrs.empty()) {
        throw Error(ErrorCode::SyntaxError, "'attributes' at " + where + " must be a non-empty array");
    }
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        table.attributes.push_back(parse_attribute(attrs[i], where + ".attributes[" + std::to_string(i) + "]"));
    }
    if (auto it = j.find("parent"); it != j.end()) {
        if (it->is_string()) {
            table.parents.push_back(it->get<std::string>());
        } else if (it->is_array()) {
            for (const auto& p : *it) {
                if (!p.is_string()) {
                    throw Error(ErrorCode::SyntaxError, "'parent' entries at " + where + " must be strings");
                }
                table.parents.push_back(p.get<std::string>());
            }
        } else {
            throw Error(ErrorCode::SyntaxError, "'parent' at " + where + " must be a string or array");
        }
    }
    return table;
}

Hierarchy parse_hierarchy(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::SyntaxError, "hierarchy at " + where + " must be an object");
    require_keys(j, {"name", "levels"}, where);
    Hierarchy h;
    h.name = need_identifier(j, "name", where);
    const auto& levels = need(j, "levels", where);
    if (!levels.is_array()) throw Error(ErrorCode::SyntaxError, "'levels' at " + where + " must be an array");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::string lw = where + ".levels[" + std::to_string(i) + "]";
        const auto& lj = levels[i];
        if (!lj.is_object()) throw Error(ErrorCode::SyntaxError, "level at " + lw + " must be an object");
        require_keys(lj, {"level", "attribute"}, lw);
        HierarchyLevel level;
        level.level = need_identifier(lj, "level", lw);
        level.attribute = need_identifier(lj, "attribute", lw);
        h.levels.push_back(std::move(level));
    }
    return h;
}

DimensionDef parse_dimension(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::SyntaxError, "dimension at " + where + " must be an object");
    require_keys(j, {"name", "tables", "hierarchies"}, where);
    DimensionDef dim;
    dim.name = need_identifier(j, "name", where);
    const auto& tables = need(j, "tables", where);
    if (!tables.is_array()) throw Error(ErrorCode::SyntaxError, "'tables' at " + where + " must be an array");
    for (std::size_t i = 0; i < tables.size(); ++i) {
        dim.tables.push_back(parse_table(tables[i], where + ".tables[" + std::to_string(i) + "]"));
    }
    const auto& hiers = need(j, "hierarchies", where);
    if (!hiers.is_array()) throw Error(ErrorCode::SyntaxError, "'hierarchies' at " + where + " must be an array");
    for (std::size_t i = 0; i < hiers.size(); ++i) {
        dim.hierarchies.push_back(parse_hierarchy(hiers[i], where + ".hierarchies[" + std::to_string(i) + "]"));
    }
    return dim;
}

FactDef parse_fact(const ordered_json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SyntaxError, "'fact' must be an object");
    require_keys(j, {"name", "dimensions", "degenerate_keys", "measures"}, "fact");
    FactDef fact;
    fact.name = need_identifier(j, "name", "fact");
    const auto& dims = need(j, "dimensions", "fact");
    if (!dims.is_array()) throw Error(ErrorCode::SyntaxError, "'fact.dimensions' must be an array");
    for (const auto& d : dims) {
        if (!d.is_string()) throw Error(ErrorCode::SyntaxError, "'fact.dimensions' entries must be strings");
        fact.dimensions.push_back(d.get<std::string>());
    }
    if (auto it = j.find("degenerate_keys"); it != j.end()) {
        if (!it->is_array()) throw Error(ErrorCode::SyntaxError, "'fact.degenerate_keys' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = "fact.degenerate_keys[" + std::to_string(i) + "]";
            const auto& kj = (*it)[i];
            if (!kj.is_object()) throw Error(ErrorCode::SyntaxError, where + " must be an object");
            require_keys(kj, {"name", "kind"}, where);
            DegenerateKey key;
            key.name = need_identifier(kj, "name", where);
            key.kind = value_kind_from_string(need(kj, "kind", where).get<std::string>());
            fact.degenerate_keys.push_back(std::move(key));
        }
    }
    if (auto it = j.find("measures"); it != j.end()) {
        if (!it->is_array()) throw Error(ErrorCode::SyntaxError, "'fact.measures' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = "fact.measures[" + std::to_string(i) + "]";
            const auto& mj = (*it)[i];
            if (!mj.is_object()) throw Error(ErrorCode::SyntaxError, where + " must be an object");
            require_keys(mj, {"name", "unit", "min"}, where);
            MeasureDef m;
            m.name = need_identifier(mj, "name", where);
            const auto& unit = need(mj, "unit", where);
            if (!unit.is_string()) throw Error(ErrorCode::SyntaxError, where + ".unit must be a string");
            m.unit = unit.get<std::string>();
            const auto& min = need(mj, "min", where);
            if (!min.is_number_integer()) throw Error(ErrorCode::SyntaxError, where + ".min must be an integer");
            m.min = min.get<std::int64_t>();
            fact.measures.push_back(std::move(m));
        }
    }
    return fact;
}

}  // namespace

SchemaDef parse_schema(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::SyntaxError, "schema document must be a JSON object");
    require_keys(doc, {"name", "fact", "dimensions"}, "document root");

    SchemaDef schema;
    auto name = doc.find("name");
    if (name == doc.end()) throw Error(ErrorCode::MissingSection, "schema document has no 'name'");
    if (!name->is_string() || !is_identifier(name->get_ref<const std::string&>())) {
        throw Error(ErrorCode::SyntaxError, "'name' must be an identifier");
    }
    schema.name = name->get<std::string>();

    auto fact = doc.find("fact");
    if (fact == doc.end()) throw Error(ErrorCode::MissingSection, "schema document has no 'fact'");
    schema.fact = parse_fact(*fact);

    auto dims = doc.find("dimensions");
    if (dims == doc.end() || !dims->is_array() || dims->empty()) {
        throw Error(ErrorCode::MissingSection, "schema document has no dimensions");
    }
    for (std::size_t i = 0; i < dims->size(); ++i) {
        schema.dimensions.push_back(parse_dimension((*dims)[i], "dimensions[" + std::to_string(i) + "]"));
    }

    // Table names must be unique across the fact table and every lookup table.
    std::set<std::string> seen;
    auto claim = [&](const std::string& table) {
        if (!seen.insert(table).second) {
            throw Error(ErrorCode::DuplicateName, "table '" + table + "' declared more than once");
        }
    };
    claim(schema.fact.name);
    for (const auto& d : schema.dimensions) {
        for (const auto& t : d.tables) claim(t.name);
    }
    return schema;
}

ordered_json schema_to_json(const SchemaDef& schema) {
    ordered_json doc;
    doc["name"] = schema.name;

    ordered_json fact;
    fact["name"] = schema.fact.name;
    fact["dimensions"] = schema.fact.dimensions;
    fact["degenerate_keys"] = ordered_json::array();
    for (const auto& k : schema.fact.degenerate_keys) {
        fact["degenerate_keys"].push_back({{"name", k.name}, {"kind", value_kind_name(k.kind)}});
    }
    fact["measures"] = ordered_json::array();
    for (const auto& m : schema.fact.measures) {
        fact["measures"].push_back({{"name", m.name}, {"unit", m.unit}, {"min", m.min}});
    }
    doc["fact"] = std::move(fact);

    doc["dimensions"] = ordered_json::array();
    for (const auto& d : schema.dimensions) {
        ordered_json dj;
        dj["name"] = d.name;
        dj["tables"] = ordered_json::array();
        for (const auto& t : d.tables) {
            ordered_json tj;
            tj["name"] = t.name;
            tj["natural_key"] = t.natural_key;
            tj["attributes"] = ordered_json::array();
            for (const auto& a : t.attributes) {
                tj["attributes"].push_back(
                    {{"name", a.name}, {"kind", value_kind_name(a.kind)}, {"description", a.description}});
            }
            if (t.parents.size() == 1) {
                tj["parent"] = t.parents.front();
            } else if (t.parents.size() > 1) {
                tj["parent"] = t.parents;
            }
            dj["tables"].push_back(std::move(tj));
        }
        dj["hierarchies"] = ordered_json::array();
        for (const auto& h : d.hierarchies) {
            ordered_json hj;
            hj["name"] = h.name;
            hj["levels"] = ordered_json::array();
            for (const auto& l : h.levels) {
                hj["levels"].push_back({{"level", l.level}, {"attribute", l.attribute}});
            }
            dj["hierarchies"].push_back(std::move(hj));
        }
        doc["dimensions"].push_back(std::move(dj));
    }
    return doc;
}

std::string schema_canonical_json(const SchemaDef& schema) {
    // json (not ordered_json) sorts object keys, giving a canonical byte form.
    return json::parse(schema_to_json(schema).dump()).dump();
}

std::string schema_digest(const SchemaDef& schema) {
    return sha256_hex(schema_canonical_json(schema));
}

// ------------------------------------------------------------- validation

namespace {

void add_issue(ValidationReport& report, Severity severity, std::string code,
               std::string message, std::string location) {
    report.issues.push_back({severity, std::move(code), std::move(message), std::move(location)});
}

void validate_dimension(const DimensionDef& dim, std::size_t dim_idx,
                        ValidationReport& report) {
    const std::string base_loc = "/dimensions/" + std::to_string(dim_idx);
    if (dim.tables.empty()) {
        add_issue(report, Severity::Error, "NoTables",
                  "dimension '" + dim.name + "' declares no lookup tables", base_loc + "/tables");
        return;
    }

    // natural_key must be a declared attribute
    for (std::size_t t = 0; t < dim.tables.size(); ++t) {
        const auto& table = dim.tables[t];
        if (!table.find_attribute(table.natural_key)) {
            add_issue(report, Severity::Error, "NaturalKeyNotDeclared",
                      "natural key '" + table.natural_key + "' of table '" + table.name +
                          "' is not a declared attribute",
                      base_loc + "/tables/" + std::to_string(t) + "/natural_key");
        }
    }

    // parent links: resolve, in-degree, single root, cycles
    std::map<std::string, int> in_degree;
    for (const auto& t : dim.tables) in_degree[t.name] = 0;
    bool links_ok = true;
    for (std::size_t t = 0; t < dim.tables.size(); ++t) {
        const auto& table = dim.tables[t];
        for (std::size_t p = 0; p < table.parents.size(); ++p) {
            const auto& parent = table.parents[p];
            const std::string loc = base_loc + "/tables/" + std::to_string(t) + "/parent";
            if (!dim.find_table(parent)) {
                add_issue(report, Severity::Error, "UnknownParentTable",
                          "table '" + table.name + "' references unknown parent '" + parent + "'", loc);
                links_ok = false;
                continue;
            }
            if (parent == table.name) {
                add_issue(report, Severity::Error, "ParentCycle",
                          "table '" + table.name + "' is its own parent", loc);
                links_ok = false;
                continue;
            }
            in_degree[parent] += 1;
        }
    }
    if (links_ok) {
        std::vector<std::string> roots;
        for (const auto& [name, deg] : in_degree) {
            if (deg == 0) roots.push_back(name);
            if (deg > 1) {
                add_issue(report, Severity::Error, "NotATree",
                          "table '" + name + "' is referenced as parent by more than one table",
                          base_loc + "/tables");
                links_ok = false;
            }
        }
        if (links_ok && roots.empty()) {
            add_issue(report, Severity::Error, "ParentCycle",
                      "parent links in dimension '" + dim.name + "' form a cycle", base_loc + "/tables");
            links_ok = false;
        } else if (links_ok && roots.size() > 1) {
            std::string names;
            for (const auto& r : roots) names += (names.empty() ? "" : ", ") + r;
            add_issue(report, Severity::Error, "MultipleRoots",
                      "dimension '" + dim.name + "' has more than one root table (" + names + ")",
                      base_loc + "/tables");
            links_ok = false;
        } else if (links_ok) {
            // reachability from the base; with in-degrees <= 1 and one root,
            // an unreachable table implies a cycle among the rest
            std::set<std::string> reached;
            std::vector<const LookupTableDef*> frontier{dim.find_table(roots.front())};
            reached.insert(roots.front());
            while (!frontier.empty()) {
                const auto* cur = frontier.back();
                frontier.pop_back();
                for (const auto& p : cur->parents) {
                    if (reached.insert(p).second) frontier.push_back(dim.find_table(p));
                }
            }
            if (reached.size() != dim.tables.size()) {
                add_issue(report, Severity::Error, "ParentCycle",
                          "parent links in dimension '" + dim.name + "' form a cycle", base_loc + "/tables");
                links_ok = false;
            }
        }
    }

    // hierarchies
    std::map<std::string, std::string> level_attr;  // level -> attribute, across hierarchies
    std::set<std::string> used_attributes;
    for (std::size_t h = 0; h < dim.hierarchies.size(); ++h) {
        const auto& hier = dim.hierarchies[h];
        const std::string hier_loc = base_loc + "/hierarchies/" + std::to_string(h);
        if (hier.levels.empty()) {
            add_issue(report, Severity::Error, "EmptyHierarchy",
                      "hierarchy '" + hier.name + "' has no levels", hier_loc + "/levels");
            continue;
        }
        std::set<std::string> seen_levels;
        for (std::size_t l = 0; l < hier.levels.size(); ++l) {
            const auto& level = hier.levels[l];
            const std::string level_loc = hier_loc + "/levels/" + std::to_string(l);
            if (level.level == kAllLevel) {
                add_issue(report, Severity::Error, "ReservedLevelName",
                          "'All' is implicit and may not be declared", level_loc + "/level");
                continue;
            }
            if (!seen_levels.insert(level.level).second) {
                add_issue(report, Severity::Error, "DuplicateLevel",
                          "level '" + level.level + "' repeats within hierarchy '" + hier.name + "'",
                          level_loc + "/level");
            }
            if (auto it = level_attr.find(level.level); it != level_attr.end()) {
                if (it->second != level.attribute) {
                    add_issue(report, Severity::Error, "LevelBindingConflict",
                              "level '" + level.level + "' binds to both '" + it->second + "' and '" +
                                  level.attribute + "'",
                              level_loc + "/attribute");
                }
            } else {
                level_attr[level.level] = level.attribute;
            }
            // attribute must exist on a table reachable from the base
            bool found = false;
            if (links_ok) {
                for (const auto& table : dim.tables) {
                    if (!path_from_base(dim, table.name).empty() && table.find_attribute(level.attribute)) {
                        found = true;
                        break;
                    }
                }
            } else {
                for (const auto& table : dim.tables) {
                    if (table.find_attribute(level.attribute)) {
                        found = true;
                        break;
                    }
                }
            }
            if (!found) {
                add_issue(report, Severity::Error, "UnknownAttribute",
                          "hierarchy level '" + level.level + "' references unknown attribute '" +
                              level.attribute + "'",
                          level_loc + "/attribute");
            } else {
                used_attributes.insert(level.attribute);
            }
        }
    }

    // attributes that feed neither a hierarchy level nor the natural key
    for (std::size_t t = 0; t < dim.tables.size(); ++t) {
        const auto& table = dim.tables[t];
        for (std::size_t a = 0; a < table.attributes.size(); ++a) {
            const auto& attr = table.attributes[a];
            if (attr.name != table.natural_key && !used_attributes.count(attr.name)) {
                add_issue(report, Severity::Warning, "UnusedAttribute",
                          "attribute '" + attr.name + "' of table '" + table.name +
                              "' is not used by any hierarchy",
                          base_loc + "/tables/" + std::to_string(t) + "/attributes/" + std::to_string(a));
            }
        }
    }
}

}  // namespace

ValidationReport validate_schema(const SchemaDef& schema) {
    ValidationReport report;

    std::set<std::string> names;
    auto claim = [&](const std::string& table, const std::string& loc) {
        if (!names.insert(table).second) {
            add_issue(report, Severity::Error, "DuplicateName",
                      "table '" + table + "' declared more than once", loc);
        }
    };
    claim(schema.fact.name, "/fact/name");
    for (std::size_t d = 0; d < schema.dimensions.size(); ++d) {
        for (std::size_t t = 0; t < schema.dimensions[d].tables.size(); ++t) {
            claim(schema.dimensions[d].tables[t].name,
                  "/dimensions/" + std::to_string(d) + "/tables/" + std::to_string(t) + "/name");
        }
    }

    if (schema.fact.dimensions.empty()) {
        add_issue(report, Severity::Error, "NoDimensionRefs", "fact table references no dimensions",
                  "/fact/dimensions");
    }
    if (schema.fact.measures.empty()) {
        add_issue(report, Severity::Error, "NoMeasures", "fact table declares no measures",
                  "/fact/measures");
    }
    std::set<std::string> dim_refs;
    for (std::size_t i = 0; i < schema.fact.dimensions.size(); ++i) {
        const auto& ref = schema.fact.dimensions[i];
        const std::string loc = "/fact/dimensions/" + std::to_string(i);
        if (!schema.find_dimension(ref)) {
            add_issue(report, Severity::Error, "UnresolvedDimension",
                      "fact references undeclared dimension '" + ref + "'", loc);
        }
        if (!dim_refs.insert(ref).second) {
            add_issue(report, Severity::Error, "DuplicateDimensionRef",
                      "fact references dimension '" + ref + "' more than once", loc);
        }
    }

    for (std::size_t d = 0; d < schema.dimensions.size(); ++d) {
        validate_dimension(schema.dimensions[d], d, report);
    }
    return report;
}

// ------------------------------------------------ resolved navigation

std::vector<LevelBinding> dimension_levels(const DimensionDef& dim) {
    std::vector<LevelBinding> out;
    std::unordered_set<std::string> seen;
    for (const auto& hier : dim.hierarchies) {
        for (const auto& level : hier.levels) {
            if (!seen.insert(level.level).second) continue;
            // bind to the nearest table from the base that holds the attribute
            std::string table;
            std::size_t best = SIZE_MAX;
            for (const auto& t : dim.tables) {
                if (!t.find_attribute(level.attribute)) continue;
                const auto path = path_from_base(dim, t.name);
                if (!path.empty() && path.size() < best) {
                    best = path.size();
                    table = t.name;
                }
            }
            out.push_back({level.level, table, level.attribute});
        }
    }
    return out;
}

const LookupTableDef& base_table(const DimensionDef& dim) {
    std::set<std::string> referenced;
    for (const auto& t : dim.tables) {
        for (const auto& p : t.parents) referenced.insert(p);
    }
    for (const auto& t : dim.tables) {
        if (!referenced.count(t.name)) return t;
    }
    throw Error(ErrorCode::InvalidSchema, "dimension '" + dim.name + "' has no base table");
}

std::vector<const LookupTableDef*> path_from_base(const DimensionDef& dim, std::string_view table) {
    std::vector<const LookupTableDef*> path;
    const LookupTableDef* cur = &base_table(dim);
    // depth-first search along parent links; the tree property makes the
    // first hit the unique path
    std::vector<std::vector<const LookupTableDef*>> stack{{cur}};
    while (!stack.empty()) {
        auto candidate = std::move(stack.back());
        stack.pop_back();
        if (candidate.back()->name == table) return candidate;
        for (const auto& p : candidate.back()->parents) {
            const auto* next = dim.find_table(p);
            if (!next) continue;
            auto extended = candidate;
            extended.push_back(next);
            stack.push_back(std::move(extended));
        }
    }
    return {};
}

// ------------------------------------------------------- built-in schema

SchemaDef builtin_tcm_schema() {
    SchemaDef schema;
    schema.name = "tcmdw";

    schema.fact.name = "FormulaList";
    schema.fact.dimensions = {"Date", "Formula", "Herb", "Source"};
    schema.fact.degenerate_keys = {{"prescription_id", ValueKind::Text}};
    schema.fact.measures = {{"quantity", "milligrams", 1}};

    DimensionDef date;
    date.name = "Date";
    date.tables.push_back({"Dates",
                           "day",
                           {{"day", ValueKind::Date, "calendar day (yyyymmdd)"},
                            {"month", ValueKind::Integer, "calendar month (yyyymm)"},
                            {"quarter", ValueKind::Text, "calendar quarter (yyyyQq)"},
                            {"year", ValueKind::Integer, "calendar year"}},
                           {}});
    date.hierarchies.push_back({"calendar",
                                {{"day", "day"}, {"month", "month"}, {"quarter", "quarter"}, {"year", "year"}}});
    schema.dimensions.push_back(std::move(date));

    DimensionDef formula;
    formula.name = "Formula";
    formula.tables.push_back({"Formulas",
                              "formula",
                              {{"formula", ValueKind::Text, "formula name"}},
                              {"FormulaTypes"}});
    formula.tables.push_back({"FormulaTypes",
                              "formula_type",
                              {{"formula_type", ValueKind::Text, "formula classification"}},
                              {}});
    formula.hierarchies.push_back({"by_type", {{"formula", "formula"}, {"formula_type", "formula_type"}}});
    schema.dimensions.push_back(std::move(formula));

    DimensionDef herb;
    herb.name = "Herb";
    herb.tables.push_back({"Herbs",
                           "herb",
                           {{"herb", ValueKind::Text, "herb name"}},
                           {"HerbTypes"}});
    herb.tables.push_back({"HerbTypes",
                           "herb_type",
                           {{"herb_type", ValueKind::Text, "herb classification"}},
                           {}});
    herb.hierarchies.push_back({"by_type", {{"herb", "herb"}, {"herb_type", "herb_type"}}});
    schema.dimensions.push_back(std::move(herb));

    DimensionDef source;
    source.name = "Source";
    source.tables.push_back({"Sources",
                             "source",
                             {{"source", ValueKind::Text, "prescribing source name"}},
                             {"SourceTypes", "Countries"}});
    source.tables.push_back({"SourceTypes",
                             "source_type",
                             {{"source_type", ValueKind::Text, "kind of prescribing source"}},
                             {}});
    source.tables.push_back({"Countries",
                             "country",
                             {{"country", ValueKind::Text, "prescribing country"}},
                             {}});
    source.hierarchies.push_back({"by_type", {{"source", "source"}, {"source_type", "source_type"}}});
    source.hierarchies.push_back({"by_geography", {{"source", "source"}, {"country", "country"}}});
    schema.dimensions.push_back(std::move(source));

    return schema;
}

}  // namespace tcmdw
