#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "tcmdw/cube.hpp"
#include "tcmdw/errors.hpp"
#include "tcmdw/oracle.hpp"
#include "tcmdw/rng.hpp"

using namespace tcmdw;
using namespace tcmdw::test;

namespace {

// seeded mid-size warehouse shared by the differential tests
struct SeededFixture {
    TempDir dir{"cube-seeded"};
    Warehouse wh;
    Cube cube;

    SeededFixture() : wh(Warehouse::init(builtin_tcm_schema(), dir / "wh")) {
        auto cfg = default_gen_config();
        cfg.n_prescriptions = 500;
        load_generated(wh, generate_rows(cfg));
        cube = build_cube(wh, CubePolicy::full_lattice(), 1);
    }
};

QuerySpec spec_of(std::vector<GroupBy> group, std::vector<FilterSpec> filters,
                  std::vector<MeasureRequest> measures) {
    QuerySpec spec;
    spec.group_by = std::move(group);
    spec.filters = std::move(filters);
    spec.measures = std::move(measures);
    return spec;
}

const std::vector<MeasureRequest> kAllAggs{{"quantity", Agg::Sum},
                                           {"quantity", Agg::Count},
                                           {"quantity", Agg::Min},
                                           {"quantity", Agg::Max},
                                           {"quantity", Agg::Avg}};

}  // namespace

TEST_CASE("lattice enumeration counts and contents") {
    const auto schema = builtin_tcm_schema();
    const auto lattice = enumerate_lattice(schema);
    CHECK(lattice.size() == 180);

    std::set<std::string> labels;
    for (const auto& id : lattice) labels.insert(id.label());
    CHECK(labels.size() == 180);
    CHECK(labels.count("All.All.All.All"));              // apex
    CHECK(labels.count("day.formula.herb.source"));      // base
    CHECK(labels.count("year.All.All.country"));

    // one dimension, one level -> 2 cuboids
    SchemaDef tiny;
    tiny.name = "tiny";
    tiny.fact = {"F", {"D"}, {}, {{"m", "units", 0}}};
    DimensionDef d;
    d.name = "D";
    d.tables.push_back({"T", "k", {{"k", ValueKind::Text, ""}}, {}});
    d.hierarchies.push_back({"h", {{"k", "k"}}});
    tiny.dimensions.push_back(d);
    CHECK(enumerate_lattice(tiny).size() == 2);
}

TEST_CASE("default policy materializes the full TCM lattice") {
    const auto policy = default_policy(builtin_tcm_schema());
    CHECK(policy.full);
}

TEST_CASE("empty fact table builds a cube with zero cells everywhere") {
    TempDir dir("cube-empty");
    auto wh = Warehouse::init(builtin_tcm_schema(), dir / "wh");
    const auto cube = build_cube(wh, CubePolicy::full_lattice(), 1);
    CHECK(cube.cuboid_count() == 180);
    for (const auto& label : cube.cuboid_labels()) {
        CHECK(cube.find_cuboid(label)->coords.empty());
    }
    const auto result =
        query(cube, spec_of({}, {}, {{"quantity", Agg::Sum}}));
    CHECK(result.rows.empty());
}

TEST_CASE("build refuses a dirty warehouse") {
    TempDir dir("cube-dirty");
    auto wh = tiny_warehouse(dir / "wh");
    wh.append_facts({make_fact(wh, 20100315, "Ge Gen Tang", "Ge Gen", "Beijing Hospital 1", "RX1", 9000)});
    try {
        (void)build_cube(wh, CubePolicy::full_lattice(), 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StaleWarehouse);
    }
    wh.checkpoint();
    CHECK_NOTHROW((void)build_cube(wh, CubePolicy::full_lattice(), 1));
}

TEST_CASE("single fact: apex cell equals the oracle's trivial numbers") {
    TempDir dir("cube-one");
    auto wh = tiny_warehouse(dir / "wh");
    wh.append_facts({make_fact(wh, 20100315, "Ge Gen Tang", "Ge Gen", "Beijing Hospital 1", "RX1", 9000)});
    wh.checkpoint();
    const auto cube = build_cube(wh, CubePolicy::full_lattice(), 1);

    const auto spec = spec_of({}, {}, kAllAggs);
    const auto expect = ResultSet{
        {"sum(quantity)", "count(quantity)", "min(quantity)", "max(quantity)", "avg(quantity)"},
        {{"9000", "1", "9000", "9000", "9000.000000"}}};
    CHECK(oracle_query(wh, spec) == expect);
    CHECK(query(cube, spec) == expect);
}

TEST_CASE("oracle on an empty warehouse returns an empty result") {
    TempDir dir("cube-oracle-empty");
    auto wh = Warehouse::init(builtin_tcm_schema(), dir / "wh");
    const auto result = oracle_query(wh, spec_of({{{"Herb", "", "herb"}}}, {}, kAllAggs));
    CHECK(result.rows.empty());
}

TEST_CASE_FIXTURE(SeededFixture, "ingredient query equals the oracle") {
    const auto spec = spec_of({{"Herb", "", "herb"}},
                              {{"Formula", "", "formula", {"Ge Gen Tang"}},
                               {"Source", "", "country", {"China"}},
                               {"Date", "", "year", {"2010"}}},
                              {{"quantity", Agg::Avg}});
    const auto via_cube = query(cube, spec);
    const auto via_oracle = oracle_query(wh, spec);
    CHECK(via_cube == via_oracle);
    CHECK(via_cube.rows.size() == 7);  // Ge Gen Tang has seven ingredients
}

TEST_CASE_FIXTURE(SeededFixture, "filters on empty years produce empty results, not errors") {
    const auto spec = spec_of({{"Herb", "", "herb"}}, {{"Date", "", "year", {"1999"}}},
                              {{"quantity", Agg::Sum}});
    CHECK(query(cube, spec).rows.empty());
    CHECK(oracle_query(wh, spec).rows.empty());
}

TEST_CASE_FIXTURE(SeededFixture, "apex cell matches the warehouse totals") {
    const auto result = query(cube, spec_of({}, {}, {{"quantity", Agg::Sum}, {"quantity", Agg::Count}}));
    REQUIRE(result.rows.size() == 1);
    std::int64_t total = 0;
    for (const auto& fact : wh.facts()) total += fact.measures[0];
    CHECK(result.rows[0][0] == std::to_string(total));
    CHECK(result.rows[0][1] == std::to_string(wh.fact_count()));
}

TEST_CASE_FIXTURE(SeededFixture, "unknown level and measure are rejected") {
    CHECK_THROWS_AS((void)query(cube, spec_of({{"Date", "", "week"}}, {}, kAllAggs)), Error);
    CHECK_THROWS_AS((void)query(cube, spec_of({}, {}, {{"volume", Agg::Sum}})), Error);
    CHECK_THROWS_AS((void)oracle_query(wh, spec_of({{"Date", "", "week"}}, {}, kAllAggs)), Error);
}

TEST_CASE_FIXTURE(SeededFixture, "randomized specs agree between cube and oracle") {
    SplitMix64 rng(1234);
    const auto schema = wh.schema();

    // harvest real level values to filter on
    std::map<std::pair<int, std::string>, std::vector<std::string>> values;
    for (int d = 0; d < 4; ++d) {
        const auto* dim = schema.find_dimension(schema.fact.dimensions[static_cast<std::size_t>(d)]);
        const auto& base = base_table(*dim).name;
        for (const auto& binding : dimension_levels(*dim)) {
            auto& bucket = values[{d, binding.level}];
            const auto count = wh.member_count(base);
            for (int pick = 0; pick < 12; ++pick) {
                bucket.push_back(wh.level_value(d, static_cast<std::int64_t>(rng.below(
                                                       static_cast<std::uint64_t>(count))),
                                                binding.level));
            }
        }
    }

    const std::vector<Agg> aggs{Agg::Sum, Agg::Count, Agg::Min, Agg::Max, Agg::Avg};
    int non_empty = 0;
    for (int round = 0; round < 200; ++round) {
        QuerySpec spec;
        for (int d = 0; d < 4; ++d) {
            const auto* dim = schema.find_dimension(schema.fact.dimensions[static_cast<std::size_t>(d)]);
            const auto levels = dimension_levels(*dim);
            if (rng.below(2) == 0) {
                spec.group_by.push_back({dim->name, "", levels[rng.below(levels.size())].level});
            }
            if (rng.below(3) == 0) {
                const auto& level = levels[rng.below(levels.size())].level;
                auto& bucket = values[{d, level}];
                std::vector<std::string> in;
                const auto n = 1 + rng.below(3);
                for (std::uint64_t i = 0; i < n; ++i) in.push_back(bucket[rng.below(bucket.size())]);
                if (rng.below(8) == 0) in.push_back("no such member");
                spec.filters.push_back({dim->name, "", level, in});
            }
        }
        spec.measures.push_back({"quantity", aggs[rng.below(aggs.size())]});
        spec.measures.push_back({"quantity", aggs[rng.below(aggs.size())]});

        const auto via_oracle = oracle_query(wh, spec);
        const auto via_cube = query(cube, spec);
        CAPTURE(round);
        REQUIRE(via_cube == via_oracle);
        if (!via_oracle.rows.empty()) ++non_empty;
    }
    CHECK(non_empty > 100);  // the comparison exercised real data
}

TEST_CASE_FIXTURE(SeededFixture, "partial policy answers through the stored fallback") {
    const auto partial = build_cube(wh, CubePolicy::capped(1), 1);
    CHECK(partial.cuboid_count() < cube.cuboid_count());
    // (year, country) is not materialized under k=1; must still be exact
    const auto spec = spec_of({{"Date", "", "year"}, {"Source", "", "country"}}, {},
                              {{"quantity", Agg::Sum}, {"quantity", Agg::Avg}});
    CHECK(query(partial, spec) == oracle_query(wh, spec));
    // mixed-level filter and group on one dimension
    const auto mixed = spec_of({{"Source", "", "source_type"}},
                               {{"Source", "", "country", {"China"}}}, {{"quantity", Agg::Count}});
    CHECK(query(partial, mixed) == oracle_query(wh, mixed));
}

TEST_CASE_FIXTURE(SeededFixture, "roll-up additivity holds across sampled parents") {
    SplitMix64 rng(99);
    const auto labels = cube.cuboid_labels();
    int checked = 0;
    for (int round = 0; round < 400 && checked < 200; ++round) {
        const auto& label = labels[rng.below(labels.size())];
        const auto* parent = cube.find_cuboid(label);
        // pick a dimension where the parent sits strictly coarser than base
        std::vector<std::size_t> candidates;
        for (std::size_t d = 0; d < 4; ++d) {
            if (parent->id.levels[d] != "day" && parent->id.levels[d] != "formula" &&
                parent->id.levels[d] != "herb" && parent->id.levels[d] != "source") {
                candidates.push_back(d);
            }
        }
        if (candidates.empty() || parent->coords.empty()) continue;
        const auto d = candidates[rng.below(candidates.size())];

        // the child cuboid refines dimension d one step finer
        const auto* dim = wh.schema().find_dimension(wh.schema().fact.dimensions[d]);
        std::string finer;
        if (parent->id.levels[d] == kAllLevel) {
            finer = dimension_levels(*dim).back().level;
        } else {
            for (const auto& hier : dim->hierarchies) {
                for (std::size_t i = 1; i < hier.levels.size(); ++i) {
                    if (hier.levels[i].level == parent->id.levels[d]) finer = hier.levels[i - 1].level;
                }
            }
        }
        if (finer.empty()) continue;
        auto child_id = parent->id;
        child_id.levels[d] = finer;
        const auto* child = cube.find_cuboid(child_id.label());
        if (!child) continue;

        // fold the child's cells up to the parent's coordinates
        QuerySpec parent_spec, child_spec;
        for (std::size_t g = 0; g < 4; ++g) {
            if (parent->id.levels[g] != kAllLevel) {
                parent_spec.group_by.push_back({wh.schema().fact.dimensions[g], "", parent->id.levels[g]});
            }
            if (child_id.levels[g] != kAllLevel) {
                child_spec.group_by.push_back({wh.schema().fact.dimensions[g], "", child_id.levels[g]});
            }
        }
        parent_spec.measures = kAllAggs;
        child_spec.measures = kAllAggs;
        // querying the parent coordinates through the child-grouped cube spec
        // must reproduce the parent cells exactly
        const auto direct = query(cube, parent_spec);
        auto folded_spec = parent_spec;
        const auto folded = query(cube, folded_spec);
        REQUIRE(direct == folded);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE_FIXTURE(SeededFixture, "scaling every quantity scales sums and extrema, not counts") {
    TempDir dir2("cube-scaled");
    auto scaled = Warehouse::init(builtin_tcm_schema(), dir2 / "wh");
    auto cfg = default_gen_config();
    cfg.n_prescriptions = 500;
    auto data = generate_rows(cfg);
    for (auto& f : data.facts) f.quantity_mg *= 7;
    load_generated(scaled, data);
    const auto scaled_cube = build_cube(scaled, CubePolicy::full_lattice(), 1);

    for (const auto& label : {"All.All.All.All", "year.All.All.country", "All.formula_type.herb.All"}) {
        const auto* a = cube.find_cuboid(label);
        const auto* b = scaled_cube.find_cuboid(label);
        REQUIRE(a->coords.size() == b->coords.size());
        for (std::size_t i = 0; i < a->coords.size(); ++i) {
            CHECK(a->coords[i] == b->coords[i]);
            CHECK(a->aggs[i].sum * 7 == b->aggs[i].sum);
            CHECK(a->aggs[i].min * 7 == b->aggs[i].min);
            CHECK(a->aggs[i].max * 7 == b->aggs[i].max);
            CHECK(a->aggs[i].count == b->aggs[i].count);
        }
    }
}

TEST_CASE_FIXTURE(SeededFixture, "serial and parallel builds serialize byte-identically") {
    save_cube(cube, dir / "wh");
    const auto dir1 = dir / "wh" / "cube" / cube.source_checkpoint();
    std::map<std::string, std::string> first;
    for (const auto& entry : std::filesystem::directory_iterator(dir1)) {
        first[entry.path().filename().string()] = read_text(entry.path());
    }
    const auto parallel = build_cube(wh, CubePolicy::full_lattice(), 8);
    save_cube(parallel, dir / "wh");
    std::map<std::string, std::string> second;
    for (const auto& entry : std::filesystem::directory_iterator(dir1)) {
        second[entry.path().filename().string()] = read_text(entry.path());
    }
    CHECK(first.size() == second.size());
    for (const auto& [name, content] : first) {
        CAPTURE(name);
        CHECK(second.at(name) == content);
    }
}

TEST_CASE_FIXTURE(SeededFixture, "saved cubes reopen and answer identically") {
    save_cube(cube, dir / "wh");
    const auto reopened = open_cube(dir / "wh", cube.source_checkpoint());
    CHECK(reopened.cuboid_count() == cube.cuboid_count());
    const auto spec = spec_of({{"Herb", "", "herb_type"}, {"Source", "", "country"}},
                              {{"Date", "", "quarter", {"2010Q1", "2010Q2"}}}, kAllAggs);
    CHECK(query(reopened, spec) == query(cube, spec));
    CHECK(query(reopened, spec) == oracle_query(wh, spec));

    // tampering with a cuboid file is caught on open
    const auto file = dir / "wh" / "cube" / cube.source_checkpoint() / "cuboid_All.All.All.All.ndjson";
    auto text = read_text(file);
    REQUIRE(!text.empty());
    text[text.find("sum") + 6] = '9';
    write_text(file, text);
    CHECK_THROWS_AS((void)open_cube(dir / "wh", cube.source_checkpoint()), Error);
}

TEST_CASE("navigation steps move one level at a time") {
    const auto schema = builtin_tcm_schema();
    QuerySpec spec;
    spec.group_by = {{"Date", "", "month"}};
    spec.measures = {{"quantity", Agg::Sum}};

    const auto up = roll_up(schema, spec, "Date");
    CHECK(up.group_by[0].level == "quarter");
    const auto down = drill_down(schema, up, "Date");
    CHECK(down.group_by[0].level == "month");

    QuerySpec year;
    year.group_by = {{"Date", "", "year"}};
    CHECK(drill_down(schema, year, "Date").group_by[0].level == "quarter");

    // coarsest rolls up to All (dimension leaves the group list)
    const auto gone = roll_up(schema, year, "Date");
    CHECK(gone.group_by.empty());
    // and AtApex after that
    try {
        (void)roll_up(schema, gone, "Date");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AtApex);
    }

    QuerySpec day;
    day.group_by = {{"Date", "", "day"}};
    try {
        (void)drill_down(schema, day, "Date");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AtBase);
    }

    // inputs are never mutated
    CHECK(spec.group_by[0].level == "month");
}

TEST_CASE("navigation demands a hierarchy when the step is ambiguous") {
    const auto schema = builtin_tcm_schema();
    QuerySpec spec;
    spec.group_by = {{"Source", "", "source"}};
    try {
        (void)roll_up(schema, spec, "Source");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AmbiguousHierarchy);
    }
    CHECK(roll_up(schema, spec, "Source", "by_geography").group_by[0].level == "country");
    CHECK(roll_up(schema, spec, "Source", "by_type").group_by[0].level == "source_type");

    // drill down from All with two hierarchies is ambiguous too
    QuerySpec apex;
    try {
        (void)drill_down(schema, apex, "Source");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AmbiguousHierarchy);
    }
    CHECK(drill_down(schema, apex, "Source", "by_geography").group_by[0].level == "country");
}

TEST_CASE("drill_down inverts roll_up wherever roll_up is legal") {
    const auto schema = builtin_tcm_schema();
    for (const auto& [dimension, hierarchy] :
         std::vector<std::pair<std::string, std::string>>{
             {"Date", "calendar"}, {"Formula", "by_type"}, {"Herb", "by_type"},
             {"Source", "by_type"}, {"Source", "by_geography"}}) {
        const auto* dim = schema.find_dimension(dimension);
        const auto* hier = dim->find_hierarchy(hierarchy);
        for (const auto& level : hier->levels) {
            QuerySpec spec;
            spec.group_by = {{dimension, hierarchy, level.level}};
            const auto up = roll_up(schema, spec, dimension, hierarchy);
            const auto back = drill_down(schema, up, dimension, hierarchy);
            REQUIRE(back.group_by.size() == 1);
            CHECK(back.group_by[0].level == level.level);
            CHECK(back.group_by[0].dimension == dimension);
        }
    }
}

TEST_CASE("slice adds an equality filter; dice adds set filters") {
    const auto schema = builtin_tcm_schema();
    QuerySpec spec;
    spec.group_by = {{"Herb", "", "herb"}};
    const auto sliced = slice(schema, spec, "Source", "country", "China");
    REQUIRE(sliced.filters.size() == 1);
    CHECK(sliced.filters[0].values == std::vector<std::string>{"China"});
    CHECK(spec.filters.empty());

    const auto diced = dice(schema, sliced, {{"Date", "", "year", {"2010", "2011"}}});
    CHECK(diced.filters.size() == 2);
    CHECK_THROWS_AS((void)dice(schema, spec, {{"Date", "", "decade", {"2010"}}}), Error);
    CHECK_THROWS_AS((void)slice(schema, spec, "Source", "continent", "Asia"), Error);
}
