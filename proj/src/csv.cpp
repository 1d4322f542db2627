#include "tcmdw/csv.hpp"

#include <istream>

#include "tcmdw/errors.hpp"

namespace tcmdw {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_escape(fields[i]);
    }
    return out;
}

std::optional<std::vector<std::string>> CsvReader::next() {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return std::nullopt;

    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    while (true) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw Error(ErrorCode::BadValue, "unterminated quoted CSV field");
            break;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    cur.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r') {
            if (in_.peek() == '\n') in_.get();
            break;
        } else {
            cur.push_back(ch);
        }
        c = in_.get();
    }
    fields.push_back(std::move(cur));
    ++records_;
    return fields;
}

}  // namespace tcmdw
