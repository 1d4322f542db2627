#include "tcmdw/oracle.hpp"

#include <map>
#include <set>

namespace tcmdw {

ResultSet oracle_query(const Warehouse& wh, const QuerySpec& spec) {
    const auto& schema = wh.schema();
    validate_query_spec(schema, spec);
    const std::size_t nm = schema.fact.measures.size();

    std::vector<LevelFilter> predicate;
    for (const auto& f : spec.filters) {
        predicate.push_back(
            {f.dimension, f.level, std::set<std::string>(f.values.begin(), f.values.end())});
    }

    struct GroupColumn {
        int dim;
        std::string level;
    };
    std::vector<GroupColumn> groups;
    for (const auto& g : spec.group_by) {
        groups.push_back({schema.fact.dimension_index(g.dimension), g.level});
    }
    std::vector<std::size_t> measure_idx;
    for (const auto& m : spec.measures) {
        measure_idx.push_back(static_cast<std::size_t>(schema.fact.measure_index(m.measure)));
    }

    std::map<std::vector<std::string>, std::vector<AggTuple>> cells;
    wh.scan_facts(predicate, [&](const FactRow& row) {
        std::vector<std::string> key;
        key.reserve(groups.size());
        for (const auto& g : groups) {
            key.push_back(wh.level_value(g.dim, row.dim_keys[static_cast<std::size_t>(g.dim)], g.level));
        }
        auto [it, inserted] = cells.try_emplace(std::move(key), std::vector<AggTuple>(nm));
        (void)inserted;
        for (std::size_t m = 0; m < nm; ++m) it->second[m].fold(row.measures[m]);
    });

    ResultSet result;
    for (const auto& g : spec.group_by) result.columns.push_back(g.level);
    for (const auto& m : spec.measures) {
        result.columns.push_back(std::string(agg_name(m.agg)) + "(" + m.measure + ")");
    }
    for (const auto& [key, aggs] : cells) {
        std::vector<std::string> row = key;
        for (std::size_t mi = 0; mi < spec.measures.size(); ++mi) {
            row.push_back(aggs[measure_idx[mi]].render(spec.measures[mi].agg));
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace tcmdw
