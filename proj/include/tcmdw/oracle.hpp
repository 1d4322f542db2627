#pragma once

#include "tcmdw/query.hpp"
#include "tcmdw/warehouse.hpp"

namespace tcmdw {

// Brute-force reference: answers the spec by a single scan_facts pass,
// resolving every coordinate through the member chains. No cube involvement;
// this is the contract query() is checked against.
ResultSet oracle_query(const Warehouse& wh, const QuerySpec& spec);

}  // namespace tcmdw
