#pragma once

#include <string>
#include <vector>

namespace tcmdw {

// Fixed-width aligned text table with a rule line under the header:
//
//   herb       avg_china    avg_overall
//   ---------  -----------  -----------
//   Da Zao     9123.000000  8876.500000
//
// Left-aligns every cell; columns sized to the widest entry.
std::string render_text_table(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows);

// RFC-4180 rendering of the same grid, header first, "\r\n" line ends.
std::string render_csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows);

}  // namespace tcmdw
