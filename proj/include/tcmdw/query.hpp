#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tcmdw/schema.hpp"

namespace tcmdw {

enum class Agg { Sum, Count, Min, Max, Avg };

Agg agg_from_string(const std::string& s);
const char* agg_name(Agg agg);

struct GroupBy {
    std::string dimension;
    std::string hierarchy;  // optional; disambiguates navigation
    std::string level;
};

struct FilterSpec {
    std::string dimension;
    std::string hierarchy;  // optional
    std::string level;
    std::vector<std::string> values;  // canonical member values
};

struct MeasureRequest {
    std::string measure;
    Agg agg = Agg::Sum;
};

struct QuerySpec {
    std::vector<GroupBy> group_by;
    std::vector<FilterSpec> filters;
    std::vector<MeasureRequest> measures;
};

QuerySpec query_spec_from_json(const nlohmann::json& doc);
nlohmann::ordered_json query_spec_to_json(const QuerySpec& spec);

// Checks every referenced dimension, hierarchy, level and measure against the
// schema. Throws UnknownDimension / UnknownLevel / UnknownMeasure / BadValue.
void validate_query_spec(const SchemaDef& schema, const QuerySpec& spec);

// Deterministic tabular answer: group-by level columns, then one column per
// requested measure aggregate; rows sorted lexicographically by coordinates.
struct ResultSet {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const ResultSet&) const = default;
};

std::string render_result_table(const ResultSet& result);
std::string render_result_csv(const ResultSet& result);
nlohmann::ordered_json result_to_json(const ResultSet& result);

// Additive aggregate tuple; avg derives from sum/count at render time.
struct AggTuple {
    std::int64_t sum = 0;
    std::int64_t count = 0;
    std::int64_t min = INT64_MAX;
    std::int64_t max = INT64_MIN;

    void fold(std::int64_t v) {
        sum += v;
        count += 1;
        if (v < min) min = v;
        if (v > max) max = v;
    }

    void merge(const AggTuple& other) {
        sum += other.sum;
        count += other.count;
        if (other.min < min) min = other.min;
        if (other.max > max) max = other.max;
    }

    std::string render(Agg agg) const;

    bool operator==(const AggTuple&) const = default;
};

}  // namespace tcmdw
