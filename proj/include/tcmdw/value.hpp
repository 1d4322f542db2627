#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json_fwd.hpp>

namespace tcmdw {

// Attribute value kinds declared in schema documents.
enum class ValueKind { Text, Integer, Decimal, Date };

ValueKind value_kind_from_string(std::string_view s);
const char* value_kind_name(ValueKind kind);

// A stored attribute value. Dates are held as yyyymmdd integers.
using Value = std::variant<std::string, std::int64_t, double>;

// Canonical string rendering used for natural-key identity, cube coordinates,
// query filters and report cells. Integers and dates render as plain decimal
// digits, decimals as the shortest round-trip form.
std::string canonical(const Value& v);

// Parses text into a typed value; throws Error(BadValue) on mismatch.
Value parse_value(ValueKind kind, std::string_view text);

Value value_from_json(ValueKind kind, const nlohmann::json& j);
nlohmann::json value_to_json(const Value& v);

// --- calendar helpers over yyyymmdd integers ---

bool valid_yyyymmdd(std::int64_t day);
std::int64_t month_of(std::int64_t day);     // yyyymm
std::int64_t year_of(std::int64_t day);      // yyyy
std::string quarter_of(std::int64_t day);    // "yyyyQq"
std::string yyyymmdd_to_iso(std::int64_t day);  // "yyyy-mm-dd"

// Exact rendering of the rational sum/count to six decimal places, rounding
// half-up on the seventh digit. Used for every avg a query or report emits.
std::string render_average(std::int64_t sum, std::int64_t count);

// 100 * (numer_a/denom_a - numer_b/denom_b) / (numer_b/denom_b) rendered to
// two decimal places, half-up. Used for the report's relative-difference column.
std::string render_percent_diff(std::int64_t sum_a, std::int64_t count_a,
                                std::int64_t sum_b, std::int64_t count_b);

bool is_identifier(std::string_view s);

}  // namespace tcmdw
