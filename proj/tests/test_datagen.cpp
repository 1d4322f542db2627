#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "helpers.hpp"
#include "tcmdw/datagen.hpp"
#include "tcmdw/errors.hpp"
#include "tcmdw/etl.hpp"

using namespace tcmdw;
using namespace tcmdw::test;
using nlohmann::json;

namespace {

GenConfig small_config() {
    GenConfig cfg = default_gen_config();
    cfg.n_prescriptions = 300;
    return cfg;
}

}  // namespace

TEST_CASE("generation is byte-deterministic in the config") {
    TempDir dir("gen-det");
    const auto cfg = small_config();
    const auto m1 = generate_dataset(cfg, dir / "a");
    const auto m2 = generate_dataset(cfg, dir / "b");
    CHECK(m1 == m2);
    for (const auto& [name, entry] : m1.at("files").items()) {
        (void)entry;
        CHECK(read_text(dir / "a" / name) == read_text(dir / "b" / name));
    }
    // a different seed changes the data
    auto other = cfg;
    other.seed = 43;
    const auto m3 = generate_dataset(other, dir / "c");
    CHECK(m3.at("files") != m1.at("files"));
}

TEST_CASE("default catalog ships Ge Gen Tang as a cold and flu formula") {
    const auto cfg = default_gen_config();
    bool found = false;
    for (const auto& f : cfg.catalog) {
        if (f.name == "Ge Gen Tang") {
            found = true;
            CHECK(f.formula_type == "Cold and Flu");
        }
    }
    CHECK(found);
}

TEST_CASE("every prescription emits exactly its formula's ingredient set") {
    const auto cfg = small_config();
    const auto data = generate_rows(cfg);
    std::map<std::string, std::vector<std::string>> by_rx_formula;  // rx -> herbs in order
    std::map<std::string, std::string> rx_formula;
    for (const auto& f : data.facts) {
        by_rx_formula[f.prescription_id].push_back(f.herb);
        rx_formula[f.prescription_id] = f.formula;
    }
    CHECK(by_rx_formula.size() == static_cast<std::size_t>(cfg.n_prescriptions));
    std::map<std::string, std::vector<std::string>> catalog_herbs;
    for (const auto& f : cfg.catalog) {
        for (const auto& ing : f.ingredients) catalog_herbs[f.name].push_back(ing.herb);
    }
    for (const auto& [rx, herbs] : by_rx_formula) {
        CHECK(herbs == catalog_herbs.at(rx_formula.at(rx)));
    }
}

TEST_CASE("every fact references natural keys present in the seeds") {
    const auto data = generate_rows(small_config());
    std::set<std::string> herbs, formulas, sources;
    std::set<std::int64_t> days;
    for (const auto& [h, t] : data.herbs) {
        (void)t;
        herbs.insert(h);
    }
    for (const auto& [f, t] : data.formulas) {
        (void)t;
        formulas.insert(f);
    }
    for (const auto& s : data.sources) sources.insert(s.name);
    days.insert(data.days.begin(), data.days.end());
    for (const auto& f : data.facts) {
        CHECK(herbs.count(f.herb));
        CHECK(formulas.count(f.formula));
        CHECK(sources.count(f.source));
        CHECK(days.count(f.day));
        CHECK(f.quantity_mg >= 1);
    }
}

TEST_CASE("default config separates China from the overall average by at least 5%") {
    // full-scan oracle over the generated rows, no warehouse involved
    const auto cfg = default_gen_config();
    const auto data = generate_rows(cfg);
    std::map<std::string, std::string> source_country;
    for (const auto& s : data.sources) source_country[s.name] = s.country;

    std::map<std::string, std::pair<std::int64_t, std::int64_t>> china, overall;
    std::set<std::string> china_herbs, overall_herbs;
    for (const auto& f : data.facts) {
        if (f.formula != "Ge Gen Tang" || f.day / 10000 != 2010) continue;
        overall[f.herb].first += f.quantity_mg;
        overall[f.herb].second += 1;
        overall_herbs.insert(f.herb);
        if (source_country.at(f.source) == "China") {
            china[f.herb].first += f.quantity_mg;
            china[f.herb].second += 1;
            china_herbs.insert(f.herb);
        }
    }
    REQUIRE(!overall.empty());
    CHECK(china_herbs == overall_herbs);  // same ingredient set, ratios differ
    bool separated = false;
    for (const auto& [herb, sums] : overall) {
        const double all_avg = static_cast<double>(sums.first) / static_cast<double>(sums.second);
        const auto& [csum, ccount] = china.at(herb);
        const double china_avg = static_cast<double>(csum) / static_cast<double>(ccount);
        if (std::abs(100.0 * (china_avg - all_avg) / all_avg) >= 5.0) separated = true;
    }
    CHECK(separated);
}

TEST_CASE("generated dataset loads with zero rejects and zero inferred members") {
    TempDir dir("gen-load");
    auto cfg = small_config();
    generate_dataset(cfg, dir / "data");
    { auto wh = Warehouse::init(builtin_tcm_schema(), dir / "wh"); wh.checkpoint(); }

    json doc;
    doc["warehouse"] = (dir / "wh").string();
    doc["sources"] = json::array();
    auto dim = [&](const std::string& table, const std::string& file, json fields) {
        json s;
        s["uri"] = (dir / "data" / file).string();
        s["format"] = "csv";
        s["kind"] = "dimension";
        s["table"] = table;
        s["field_map"] = std::move(fields);
        s["batch_id"] = "seed-" + table;
        return s;
    };
    doc["sources"].push_back(dim("FormulaTypes", "seed_FormulaTypes.csv", {{"formula_type", "formula_type"}}));
    doc["sources"].push_back(dim("HerbTypes", "seed_HerbTypes.csv", {{"herb_type", "herb_type"}}));
    doc["sources"].push_back(dim("SourceTypes", "seed_SourceTypes.csv", {{"source_type", "source_type"}}));
    doc["sources"].push_back(dim("Countries", "seed_Countries.csv", {{"country", "country"}}));
    doc["sources"].push_back(
        dim("Formulas", "seed_Formulas.csv", {{"formula", "formula"}, {"formula_type", "formula_type"}}));
    doc["sources"].push_back(dim("Herbs", "seed_Herbs.csv", {{"herb", "herb"}, {"herb_type", "herb_type"}}));
    doc["sources"].push_back(dim("Sources", "seed_Sources.csv",
                                 {{"source", "source"}, {"source_type", "source_type"}, {"country", "country"}}));
    doc["sources"].push_back(dim("Dates", "seed_Dates.csv",
                                 {{"day", "day"}, {"month", "month"}, {"quarter", "quarter"}, {"year", "year"}}));
    json fact;
    fact["uri"] = (dir / "data" / "facts.csv").string();
    fact["format"] = "csv";
    fact["kind"] = "fact";
    fact["field_map"] = {{"prescription_id", "prescription_id"}, {"date", "day"},
                         {"formula", "formula"},                 {"herb", "herb"},
                         {"source", "source"},                   {"quantity_mg", "quantity"}};
    fact["rules"] = json::array({{{"op", "date_parse"}, {"field", "day"}, {"pattern", "YYYY-MM-DD"}},
                                 {{"op", "domain_check"}, {"field", "quantity"}, {"min", 1}, {"max", 1000000}}});
    fact["batch_id"] = "facts";
    fact["infer_members"] = false;
    doc["sources"].push_back(fact);

    auto wh = Warehouse::open(dir / "wh", true);
    const auto report = run_pipeline(wh, pipeline_config_from_json(doc, dir.path()));
    CHECK(report.all_ok);
    CHECK(report.total_rejected == 0);
    CHECK(wh.inferred_member_count() == 0);

    // inserted facts match the generator manifest count
    const auto manifest = json::parse(read_text(dir / "data" / "gen_manifest.json"));
    CHECK(report.total_inserted_facts == manifest.at("fact_count").get<std::int64_t>());
    CHECK(wh.fact_count() == manifest.at("fact_count").get<std::int64_t>());
}

TEST_CASE("config json round-trips and rejects bad values") {
    const auto cfg = default_gen_config();
    const auto doc = json::parse(gen_config_to_json(cfg).dump());
    const auto back = gen_config_from_json(doc);
    CHECK(gen_config_digest(back) == gen_config_digest(cfg));

    auto bad = doc;
    bad["countries"][0]["multiplier"] = 0.0;
    CHECK_THROWS_AS((void)gen_config_from_json(bad), Error);
    auto unknown = doc;
    unknown["volume"] = 9;
    CHECK_THROWS_AS((void)gen_config_from_json(unknown), Error);
}

TEST_CASE("output directory must be empty or absent") {
    TempDir dir("gen-path");
    write_text(dir / "sentinel.txt", "x");
    try {
        generate_dataset(small_config(), dir.path());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PathNotEmpty);
    }
}
