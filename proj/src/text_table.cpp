#include "tcmdw/text_table.hpp"

#include "tcmdw/csv.hpp"

namespace tcmdw {

std::string render_text_table(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }

    auto emit_row = [&](std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out += cells[c];
            if (c + 1 < cells.size()) {
                out.append(widths[c] - cells[c].size() + 2, ' ');
            }
        }
        out.push_back('\n');
    };

    std::string out;
    emit_row(out, header);
    std::vector<std::string> rule(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) rule[c] = std::string(widths[c], '-');
    emit_row(out, rule);
    for (const auto& row : rows) emit_row(out, row);
    return out;
}

std::string render_csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
    std::string out = csv_join(header) + "\r\n";
    for (const auto& row : rows) out += csv_join(row) + "\r\n";
    return out;
}

}  // namespace tcmdw
