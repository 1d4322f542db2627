#pragma once

#include <map>
#include <string>
#include <vector>

#include "tcmdw/cube.hpp"
#include "tcmdw/query.hpp"
#include "tcmdw/warehouse.hpp"

namespace tcmdw {

// Analytical reports over the TCM warehouse workload. The engine below is
// schema-generic; these reports bind to the built-in schema's dimension and
// level names (Formula.formula, Date.year, Source.country, Herb.herb) and
// throw UnknownLevel when pointed at a warehouse that lacks them.

struct ReportDef {
    std::string name;  // ingredient_comparison | herb_cooccurrence | yearly_trend
    std::map<std::string, std::string> params;
};

struct ReportParamSpec {
    std::string name;
    bool required = false;
    std::string default_value;
    std::string description;
};

struct ReportTemplate {
    std::string name;
    std::string description;
    std::vector<ReportParamSpec> params;
    QuerySpec plan;  // underlying query shape, validated against the schema
};

std::vector<ReportTemplate> builtin_report_defs();

enum class ReportFormat { Table, Csv, ChartSpec };

ReportFormat report_format_from_string(const std::string& s);

struct RenderedReport {
    ReportFormat format = ReportFormat::Table;
    std::string content;
};

// Renders a report from the cube (comparison and trend) or a fact scan
// (co-occurrence). Every number equals the corresponding full-scan result;
// rendering adds only the documented avg and percent-difference formulas.
RenderedReport render_report(const Cube& cube, const Warehouse& wh, const ReportDef& def,
                             ReportFormat format);

}  // namespace tcmdw
