#include "tcmdw/query.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "tcmdw/errors.hpp"
#include "tcmdw/text_table.hpp"
#include "tcmdw/value.hpp"

namespace tcmdw {

using nlohmann::json;
using nlohmann::ordered_json;

Agg agg_from_string(const std::string& s) {
    if (s == "sum") return Agg::Sum;
    if (s == "count") return Agg::Count;
    if (s == "min") return Agg::Min;
    if (s == "max") return Agg::Max;
    if (s == "avg") return Agg::Avg;
    throw Error(ErrorCode::BadValue, "unknown aggregator '" + s + "'");
}

const char* agg_name(Agg agg) {
    switch (agg) {
        case Agg::Sum: return "sum";
        case Agg::Count: return "count";
        case Agg::Min: return "min";
        case Agg::Max: return "max";
        case Agg::Avg: return "avg";
    }
    return "?";
}

std::string AggTuple::render(Agg agg) const {
    switch (agg) {
        case Agg::Sum: return std::to_string(sum);
        case Agg::Count: return std::to_string(count);
        case Agg::Min: return std::to_string(min);
        case Agg::Max: return std::to_string(max);
        case Agg::Avg: return render_average(sum, count);
    }
    return "?";
}

QuerySpec query_spec_from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::BadValue, "query spec must be a JSON object");
    static const std::set<std::string> allowed = {"group_by", "filters", "measures"};
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw Error(ErrorCode::BadValue, "unknown key '" + it.key() + "' in query spec");
        }
    }
    QuerySpec spec;
    try {
        if (doc.contains("group_by")) {
            for (const auto& g : doc.at("group_by")) {
                spec.group_by.push_back({g.at("dimension").get<std::string>(),
                                         g.value("hierarchy", ""),
                                         g.at("level").get<std::string>()});
            }
        }
        if (doc.contains("filters")) {
            for (const auto& f : doc.at("filters")) {
                FilterSpec filter;
                filter.dimension = f.at("dimension").get<std::string>();
                filter.hierarchy = f.value("hierarchy", "");
                filter.level = f.at("level").get<std::string>();
                for (const auto& v : f.at("in")) {
                    if (v.is_string()) {
                        filter.values.push_back(v.get<std::string>());
                    } else if (v.is_number_integer()) {
                        filter.values.push_back(std::to_string(v.get<std::int64_t>()));
                    } else if (v.is_number_float()) {
                        filter.values.push_back(canonical(Value(v.get<double>())));
                    } else {
                        throw Error(ErrorCode::BadValue, "filter values must be scalars");
                    }
                }
                spec.filters.push_back(std::move(filter));
            }
        }
        if (doc.contains("measures")) {
            for (const auto& m : doc.at("measures")) {
                spec.measures.push_back(
                    {m.at("measure").get<std::string>(), agg_from_string(m.at("agg").get<std::string>())});
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::BadValue, std::string("bad query spec: ") + e.what());
    }
    return spec;
}

ordered_json query_spec_to_json(const QuerySpec& spec) {
    ordered_json doc;
    doc["group_by"] = ordered_json::array();
    for (const auto& g : spec.group_by) {
        ordered_json gj = {{"dimension", g.dimension}, {"level", g.level}};
        if (!g.hierarchy.empty()) gj["hierarchy"] = g.hierarchy;
        doc["group_by"].push_back(std::move(gj));
    }
    doc["filters"] = ordered_json::array();
    for (const auto& f : spec.filters) {
        ordered_json fj = {{"dimension", f.dimension}, {"level", f.level}, {"in", f.values}};
        if (!f.hierarchy.empty()) fj["hierarchy"] = f.hierarchy;
        doc["filters"].push_back(std::move(fj));
    }
    doc["measures"] = ordered_json::array();
    for (const auto& m : spec.measures) {
        doc["measures"].push_back({{"measure", m.measure}, {"agg", agg_name(m.agg)}});
    }
    return doc;
}

namespace {

void check_level_reference(const SchemaDef& schema, const std::string& dimension,
                           const std::string& hierarchy, const std::string& level) {
    const auto* dim = schema.find_dimension(dimension);
    if (!dim || schema.fact.dimension_index(dimension) < 0) {
        throw Error(ErrorCode::UnknownDimension, "no dimension '" + dimension + "'");
    }
    bool found = false;
    for (const auto& binding : dimension_levels(*dim)) {
        if (binding.level == level) {
            found = true;
            break;
        }
    }
    if (!found) {
        throw Error(ErrorCode::UnknownLevel,
                    "no level '" + level + "' in dimension " + dimension);
    }
    if (!hierarchy.empty()) {
        const auto* h = dim->find_hierarchy(hierarchy);
        if (!h) {
            throw Error(ErrorCode::UnknownLevel,
                        "no hierarchy '" + hierarchy + "' in dimension " + dimension);
        }
        bool in_hierarchy = false;
        for (const auto& l : h->levels) {
            if (l.level == level) {
                in_hierarchy = true;
                break;
            }
        }
        if (!in_hierarchy) {
            throw Error(ErrorCode::UnknownLevel,
                        "level '" + level + "' is not part of hierarchy " + hierarchy);
        }
    }
}

}  // namespace

void validate_query_spec(const SchemaDef& schema, const QuerySpec& spec) {
    std::set<std::string> grouped;
    for (const auto& g : spec.group_by) {
        check_level_reference(schema, g.dimension, g.hierarchy, g.level);
        if (!grouped.insert(g.dimension).second) {
            throw Error(ErrorCode::BadValue,
                        "dimension '" + g.dimension + "' grouped more than once");
        }
    }
    for (const auto& f : spec.filters) {
        check_level_reference(schema, f.dimension, f.hierarchy, f.level);
        if (f.values.empty()) {
            throw Error(ErrorCode::BadValue, "filter on " + f.dimension + " has no values");
        }
    }
    if (spec.measures.empty()) {
        throw Error(ErrorCode::UnknownMeasure, "query requests no measures");
    }
    for (const auto& m : spec.measures) {
        if (schema.fact.measure_index(m.measure) < 0) {
            throw Error(ErrorCode::UnknownMeasure, "no measure '" + m.measure + "'");
        }
    }
}

std::string render_result_table(const ResultSet& result) {
    return render_text_table(result.columns, result.rows);
}

std::string render_result_csv(const ResultSet& result) {
    return render_csv_table(result.columns, result.rows);
}

ordered_json result_to_json(const ResultSet& result) {
    ordered_json out;
    out["columns"] = result.columns;
    out["rows"] = ordered_json::array();
    for (const auto& row : result.rows) out["rows"].push_back(row);
    return out;
}

}  // namespace tcmdw
