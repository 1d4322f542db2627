#include "tcmdw/value.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "tcmdw/errors.hpp"

namespace tcmdw {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::MissingSection: return "MissingSection";
        case ErrorCode::InvalidSchema: return "InvalidSchema";
        case ErrorCode::PathNotEmpty: return "PathNotEmpty";
        case ErrorCode::UnknownTable: return "UnknownTable";
        case ErrorCode::MissingAttribute: return "MissingAttribute";
        case ErrorCode::UnknownLevel: return "UnknownLevel";
        case ErrorCode::UnknownDimension: return "UnknownDimension";
        case ErrorCode::CorruptManifest: return "CorruptManifest";
        case ErrorCode::DigestMismatch: return "DigestMismatch";
        case ErrorCode::WarehouseLocked: return "WarehouseLocked";
        case ErrorCode::StaleWarehouse: return "StaleWarehouse";
        case ErrorCode::SourceUnreadable: return "SourceUnreadable";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::UnknownMeasure: return "UnknownMeasure";
        case ErrorCode::AtApex: return "AtApex";
        case ErrorCode::AtBase: return "AtBase";
        case ErrorCode::AmbiguousHierarchy: return "AmbiguousHierarchy";
        case ErrorCode::StaleCube: return "StaleCube";
        case ErrorCode::DuplicateBatch: return "DuplicateBatch";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::UnknownReport: return "UnknownReport";
        case ErrorCode::MissingParam: return "MissingParam";
        case ErrorCode::BadValue: return "BadValue";
        case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

ValueKind value_kind_from_string(std::string_view s) {
    if (s == "text") return ValueKind::Text;
    if (s == "integer") return ValueKind::Integer;
    if (s == "decimal") return ValueKind::Decimal;
    if (s == "date") return ValueKind::Date;
    throw Error(ErrorCode::SyntaxError, "unknown value kind '" + std::string(s) + "'");
}

const char* value_kind_name(ValueKind kind) {
    switch (kind) {
        case ValueKind::Text: return "text";
        case ValueKind::Integer: return "integer";
        case ValueKind::Decimal: return "decimal";
        case ValueKind::Date: return "date";
    }
    return "?";
}

std::string canonical(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    const double d = std::get<double>(v);
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    (void)ec;
    return std::string(buf.data(), ptr);
}

namespace {

std::int64_t parse_int(std::string_view text) {
    std::int64_t out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::BadValue, "not an integer: '" + std::string(text) + "'");
    }
    return out;
}

}  // namespace

Value parse_value(ValueKind kind, std::string_view text) {
    switch (kind) {
        case ValueKind::Text:
            return std::string(text);
        case ValueKind::Integer:
            return parse_int(text);
        case ValueKind::Date: {
            const std::int64_t day = parse_int(text);
            if (!valid_yyyymmdd(day)) {
                throw Error(ErrorCode::BadValue, "not a yyyymmdd date: '" + std::string(text) + "'");
            }
            return day;
        }
        case ValueKind::Decimal: {
            // std::from_chars for double is incomplete on some libstdc++;
            // strtod with a full-consumption check behaves identically here.
            std::string s(text);
            char* end = nullptr;
            const double d = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size()) {
                throw Error(ErrorCode::BadValue, "not a decimal: '" + s + "'");
            }
            return d;
        }
    }
    throw Error(ErrorCode::BadValue, "unhandled kind");
}

Value value_from_json(ValueKind kind, const nlohmann::json& j) {
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        // The reserved member rows carry text sentinels in typed columns.
        if (kind != ValueKind::Text && (s == "UNKNOWN" || s == "INFERRED")) return s;
        return parse_value(kind, s);
    }
    if (j.is_number_integer()) {
        const std::int64_t i = j.get<std::int64_t>();
        if (kind == ValueKind::Date && !valid_yyyymmdd(i)) {
            throw Error(ErrorCode::BadValue, "not a yyyymmdd date: " + std::to_string(i));
        }
        if (kind == ValueKind::Text) return std::to_string(i);
        if (kind == ValueKind::Decimal) return static_cast<double>(i);
        return i;
    }
    if (j.is_number_float()) {
        if (kind == ValueKind::Decimal) return j.get<double>();
        throw Error(ErrorCode::BadValue, "decimal value for " + std::string(value_kind_name(kind)) + " column");
    }
    throw Error(ErrorCode::BadValue, "unsupported JSON value: " + j.dump());
}

nlohmann::json value_to_json(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    return std::get<double>(v);
}

bool valid_yyyymmdd(std::int64_t day) {
    if (day < 10000101 || day > 99991231) return false;
    const std::int64_t y = day / 10000;
    const std::int64_t m = (day / 100) % 100;
    const std::int64_t d = day % 100;
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    std::int64_t len = lengths[m - 1];
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) len = 29;
    return d <= len;
}

std::int64_t month_of(std::int64_t day) { return day / 100; }
std::int64_t year_of(std::int64_t day) { return day / 10000; }

std::string quarter_of(std::int64_t day) {
    const std::int64_t m = (day / 100) % 100;
    const std::int64_t q = (m - 1) / 3 + 1;
    return std::to_string(day / 10000) + "Q" + std::to_string(q);
}

std::string yyyymmdd_to_iso(std::int64_t day) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lld",
                  static_cast<long long>(day / 10000),
                  static_cast<long long>((day / 100) % 100),
                  static_cast<long long>(day % 100));
    return buf;
}

std::string render_average(std::int64_t sum, std::int64_t count) {
    if (count == 0) throw Error(ErrorCode::BadValue, "average of empty cell");
    const bool negative = (sum < 0) != (count < 0) && sum != 0;
    unsigned __int128 s = sum < 0 ? -static_cast<__int128>(sum) : sum;
    unsigned __int128 c = count < 0 ? -static_cast<__int128>(count) : count;
    const unsigned __int128 scaled = s * 1000000u + c / 2;
    const unsigned __int128 q = scaled / c;
    const auto whole = static_cast<unsigned long long>(q / 1000000u);
    const auto frac = static_cast<unsigned long long>(q % 1000000u);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%llu.%06llu", negative ? "-" : "", whole, frac);
    return buf;
}

std::string render_percent_diff(std::int64_t sum_a, std::int64_t count_a,
                                std::int64_t sum_b, std::int64_t count_b) {
    if (count_a == 0 || count_b == 0 || sum_b == 0) {
        throw Error(ErrorCode::BadValue, "percent difference undefined");
    }
    // 100 * (sa/ca - sb/cb) / (sb/cb) = 100 * (sa*cb - sb*ca) / (sb*ca)
    __int128 numer = static_cast<__int128>(sum_a) * count_b - static_cast<__int128>(sum_b) * count_a;
    __int128 denom = static_cast<__int128>(sum_b) * count_a;
    const bool negative = (numer < 0) != (denom < 0) && numer != 0;
    unsigned __int128 n = numer < 0 ? -numer : numer;
    unsigned __int128 d = denom < 0 ? -denom : denom;
    const unsigned __int128 scaled = n * 10000u + d / 2;  // 100 * value, 2 decimals
    const unsigned __int128 q = scaled / d;
    const auto whole = static_cast<unsigned long long>(q / 100u);
    const auto frac = static_cast<unsigned long long>(q % 100u);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%llu.%02llu", negative ? "-" : "", whole, frac);
    return buf;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || s.size() > 128) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

}  // namespace tcmdw
