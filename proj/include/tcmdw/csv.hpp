#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tcmdw {

// Minimal RFC-4180 CSV support: comma separator, double-quote quoting with
// "" escapes, quoted fields may contain commas, quotes and newlines.

std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record (possibly spanning lines inside quotes). Returns
    // nullopt at end of input. Throws Error(BadValue) on a lone quote.
    std::optional<std::vector<std::string>> next();

    std::size_t records_read() const { return records_; }

private:
    std::istream& in_;
    std::size_t records_ = 0;
};

}  // namespace tcmdw
