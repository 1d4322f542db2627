#include "tcmdw/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "tcmdw/errors.hpp"
#include "tcmdw/text_table.hpp"

namespace tcmdw {

using nlohmann::ordered_json;

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "table") return ReportFormat::Table;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "chartspec") return ReportFormat::ChartSpec;
    throw Error(ErrorCode::BadValue, "unknown report format '" + s + "'");
}

namespace {

const std::string& need_param(const ReportDef& def, const std::string& name) {
    auto it = def.params.find(name);
    if (it == def.params.end()) {
        throw Error(ErrorCode::MissingParam, "report " + def.name + " needs --param " + name + "=...");
    }
    return it->second;
}

std::string measure_of(const Warehouse& wh, const ReportDef& def) {
    auto it = def.params.find("measure");
    if (it != def.params.end()) return it->second;
    return wh.schema().fact.measures.front().name;
}

struct SumCount {
    std::int64_t sum = 0;
    std::int64_t count = 0;
};

// group values -> (sum, count) from a two-measure-column ResultSet
std::map<std::string, SumCount> sums_by_key(const ResultSet& result) {
    std::map<std::string, SumCount> out;
    for (const auto& row : result.rows) {
        out[row[0]] = {std::strtoll(row[1].c_str(), nullptr, 10),
                       std::strtoll(row[2].c_str(), nullptr, 10)};
    }
    return out;
}

struct ReportGrid {
    std::string title;
    std::string x_axis;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // columns rendered as chart series: index into header -> numeric flag
    std::vector<std::size_t> series_columns;
};

ReportGrid ingredient_comparison(const Cube& cube, const Warehouse& wh, const ReportDef& def) {
    const std::string& formula = need_param(def, "formula");
    const std::string& year = need_param(def, "year");
    const std::string& country = need_param(def, "country");
    const std::string measure = measure_of(wh, def);

    QuerySpec overall;
    overall.group_by = {{"Herb", "", "herb"}};
    overall.filters = {{"Formula", "", "formula", {formula}}, {"Date", "", "year", {year}}};
    overall.measures = {{measure, Agg::Sum}, {measure, Agg::Count}};

    QuerySpec in_country = overall;
    in_country.filters.push_back({"Source", "", "country", {country}});

    const auto overall_cells = sums_by_key(query(cube, overall));
    const auto country_cells = sums_by_key(query(cube, in_country));

    ReportGrid grid;
    grid.title = formula + " ingredient consumption, " + country + " vs overall, " + year;
    grid.x_axis = "herb";
    grid.header = {"herb", "avg_" + country, "avg_overall", "diff_pct"};
    grid.series_columns = {1, 2};
    for (const auto& [herb, all] : overall_cells) {
        std::vector<std::string> row{herb};
        auto it = country_cells.find(herb);
        if (it != country_cells.end() && it->second.count > 0) {
            row.push_back(render_average(it->second.sum, it->second.count));
            row.push_back(render_average(all.sum, all.count));
            row.push_back(render_percent_diff(it->second.sum, it->second.count, all.sum, all.count));
        } else {
            row.push_back("-");
            row.push_back(render_average(all.sum, all.count));
            row.push_back("-");
        }
        grid.rows.push_back(std::move(row));
    }
    return grid;
}

ReportGrid yearly_trend(const Cube& cube, const Warehouse& wh, const ReportDef& def) {
    const std::string& formula = need_param(def, "formula");
    const std::string measure = measure_of(wh, def);

    QuerySpec spec;
    spec.group_by = {{"Date", "", "year"}};
    spec.filters = {{"Formula", "", "formula", {formula}}};
    spec.measures = {{measure, Agg::Sum}, {measure, Agg::Count}};

    const auto result = query(cube, spec);
    ReportGrid grid;
    grid.title = formula + " consumption by year";
    grid.x_axis = "year";
    grid.header = {"year", "sum_" + measure, "count"};
    grid.series_columns = {1, 2};
    for (const auto& row : result.rows) grid.rows.push_back(row);
    return grid;
}

ReportGrid herb_cooccurrence(const Warehouse& wh, const ReportDef& def) {
    if (wh.schema().fact.degenerate_keys.empty()) {
        throw Error(ErrorCode::UnknownLevel, "schema has no prescription identifier");
    }
    std::vector<LevelFilter> predicate;
    if (auto it = def.params.find("formula"); it != def.params.end()) {
        predicate.push_back({"Formula", "formula", {it->second}});
    }
    if (auto it = def.params.find("year"); it != def.params.end()) {
        predicate.push_back({"Date", "year", {it->second}});
    }
    const int herb_dim = wh.schema().fact.dimension_index("Herb");
    if (herb_dim < 0) throw Error(ErrorCode::UnknownDimension, "no Herb dimension");

    // prescription -> distinct herbs, then one count per unordered pair
    std::map<std::string, std::set<std::string>> herbs_by_rx;
    wh.scan_facts(predicate, [&](const FactRow& row) {
        herbs_by_rx[canonical(row.degenerate.front())].insert(
            wh.level_value(herb_dim, row.dim_keys[static_cast<std::size_t>(herb_dim)], "herb"));
    });
    std::map<std::pair<std::string, std::string>, std::int64_t> pairs;
    for (const auto& [rx, herbs] : herbs_by_rx) {
        (void)rx;
        for (auto a = herbs.begin(); a != herbs.end(); ++a) {
            auto b = a;
            for (++b; b != herbs.end(); ++b) pairs[{*a, *b}] += 1;
        }
    }
    std::vector<std::pair<std::pair<std::string, std::string>, std::int64_t>> sorted(pairs.begin(),
                                                                                     pairs.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    ReportGrid grid;
    grid.title = "herb co-occurrence by prescription";
    grid.x_axis = "pair";
    grid.header = {"herb_a", "herb_b", "prescriptions"};
    grid.series_columns = {2};
    for (const auto& [pair, count] : sorted) {
        grid.rows.push_back({pair.first, pair.second, std::to_string(count)});
    }
    return grid;
}

std::string chartspec_of(const ReportGrid& grid) {
    ordered_json doc;
    doc["title"] = grid.title;
    doc["x_axis"] = grid.x_axis;
    doc["series"] = ordered_json::array();
    for (std::size_t column : grid.series_columns) {
        ordered_json series;
        series["name"] = grid.header[column];
        series["points"] = ordered_json::array();
        for (const auto& row : grid.rows) {
            std::string x = row[0];
            if (grid.header.size() > 2 && grid.x_axis == "pair") x = row[0] + " + " + row[1];
            const std::string& cell = row[column];
            if (cell == "-") continue;
            series["points"].push_back({{"x", x}, {"y", std::strtod(cell.c_str(), nullptr)}});
        }
        doc["series"].push_back(std::move(series));
    }
    return doc.dump(2) + "\n";
}

}  // namespace

std::vector<ReportTemplate> builtin_report_defs() {
    std::vector<ReportTemplate> out;

    ReportTemplate comparison;
    comparison.name = "ingredient_comparison";
    comparison.description =
        "per-herb average consumption of one formula, one country versus overall";
    comparison.params = {{"formula", true, "Ge Gen Tang", "formula to analyse"},
                         {"year", true, "2010", "calendar year"},
                         {"country", true, "China", "country compared against the overall average"},
                         {"measure", false, "quantity", "measure to average"}};
    comparison.plan.group_by = {{"Herb", "", "herb"}};
    comparison.plan.filters = {{"Formula", "", "formula", {"Ge Gen Tang"}},
                               {"Date", "", "year", {"2010"}},
                               {"Source", "", "country", {"China"}}};
    comparison.plan.measures = {{"quantity", Agg::Avg}};
    out.push_back(std::move(comparison));

    ReportTemplate cooccurrence;
    cooccurrence.name = "herb_cooccurrence";
    cooccurrence.description = "prescriptions containing each unordered herb pair";
    cooccurrence.params = {{"formula", false, "", "restrict to one formula"},
                           {"year", false, "", "restrict to one calendar year"}};
    cooccurrence.plan.group_by = {{"Herb", "", "herb"}};
    cooccurrence.plan.measures = {{"quantity", Agg::Count}};
    out.push_back(std::move(cooccurrence));

    ReportTemplate trend;
    trend.name = "yearly_trend";
    trend.description = "total and count of one formula's consumption per year";
    trend.params = {{"formula", true, "Ge Gen Tang", "formula to analyse"},
                    {"measure", false, "quantity", "measure to total"}};
    trend.plan.group_by = {{"Date", "", "year"}};
    trend.plan.filters = {{"Formula", "", "formula", {"Ge Gen Tang"}}};
    trend.plan.measures = {{"quantity", Agg::Sum}, {"quantity", Agg::Count}};
    out.push_back(std::move(trend));

    return out;
}

RenderedReport render_report(const Cube& cube, const Warehouse& wh, const ReportDef& def,
                             ReportFormat format) {
    if (cube.source_checkpoint() != wh.last_checkpoint_digest()) {
        throw Error(ErrorCode::StaleCube,
                    "cube was built from checkpoint " + cube.source_checkpoint().substr(0, 12) +
                        ", warehouse is at " + wh.last_checkpoint_digest().substr(0, 12));
    }

    ReportGrid grid;
    if (def.name == "ingredient_comparison") {
        grid = ingredient_comparison(cube, wh, def);
    } else if (def.name == "yearly_trend") {
        grid = yearly_trend(cube, wh, def);
    } else if (def.name == "herb_cooccurrence") {
        grid = herb_cooccurrence(wh, def);
    } else {
        throw Error(ErrorCode::UnknownReport, "no report named '" + def.name + "'");
    }

    RenderedReport rendered;
    rendered.format = format;
    switch (format) {
        case ReportFormat::Table:
            rendered.content = render_text_table(grid.header, grid.rows);
            break;
        case ReportFormat::Csv:
            rendered.content = render_csv_table(grid.header, grid.rows);
            break;
        case ReportFormat::ChartSpec:
            rendered.content = chartspec_of(grid);
            break;
    }
    return rendered;
}

}  // namespace tcmdw
