#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "tcmdw/errors.hpp"
#include "tcmdw/etl.hpp"
#include "tcmdw/metadata.hpp"

using namespace tcmdw;
using namespace tcmdw::test;
using nlohmann::json;

namespace {

SourceConfig csv_source(const std::filesystem::path& uri,
                        std::vector<std::pair<std::string, std::string>> field_map) {
    SourceConfig cfg;
    cfg.uri = uri.string();
    cfg.format = SourceFormat::Csv;
    cfg.field_map = std::move(field_map);
    cfg.batch_id = "test-batch";
    return cfg;
}

StagedRow staged(std::map<std::string, std::string> fields) {
    StagedRow row;
    row.fields = std::move(fields);
    row.original = json(row.fields).dump();
    return row;
}

}  // namespace

TEST_CASE("csv extract stages rows with renamed fields") {
    TempDir dir("etl-csv");
    write_text(dir / "in.csv", "name,qty\nGe Gen,12\nGui Zhi,6\nGan Cao,3\n");
    auto batch = extract(csv_source(dir / "in.csv", {{"name", "herb"}, {"qty", "quantity"}}));
    REQUIRE(batch.rows.size() == 3);
    CHECK(batch.rejects.empty());
    CHECK(batch.rows[0].fields.at("herb") == "Ge Gen");
    CHECK(batch.rows[0].fields.at("quantity") == "12");
}

TEST_CASE("field_map naming an absent csv column is a HeaderMismatch") {
    TempDir dir("etl-header");
    write_text(dir / "in.csv", "name\nGe Gen\n");
    try {
        extract(csv_source(dir / "in.csv", {{"qty", "quantity"}}));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HeaderMismatch);
    }
}

TEST_CASE("unreadable source throws SourceUnreadable") {
    try {
        extract(csv_source("/no/such/file.csv", {}));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SourceUnreadable);
    }
}

TEST_CASE("one bad jsonl line among ten rejects exactly that line") {
    TempDir dir("etl-jsonl");
    std::string body;
    for (int i = 0; i < 5; ++i) body += "{\"herb\": \"H" + std::to_string(i) + "\"}\n";
    body += "{this is not json}\n";
    for (int i = 5; i < 10; ++i) body += "{\"herb\": \"H" + std::to_string(i) + "\"}\n";
    write_text(dir / "in.jsonl", body);

    SourceConfig cfg;
    cfg.uri = (dir / "in.jsonl").string();
    cfg.format = SourceFormat::Jsonl;
    cfg.field_map = {{"herb", "herb"}};
    cfg.batch_id = "b";
    auto batch = extract(cfg);
    CHECK(batch.rows.size() == 9);
    REQUIRE(batch.rejects.size() == 1);
    CHECK(batch.rejects[0].reason == "MalformedRecord");
}

TEST_CASE("scale multiplies and rounds half-up to integer milligrams") {
    RuleSet rules{{RuleKind::Scale, "quantity", "", "", {}, LookupMiss::Reject, 3.0, "", 0, 0}};
    auto [conformed, rejects] = transform({staged({{"quantity", "2000"}})}, rules);
    REQUIRE(conformed.size() == 1);
    CHECK(conformed[0].at("quantity") == "6000");

    RuleSet half{{RuleKind::Scale, "quantity", "", "", {}, LookupMiss::Reject, 0.5, "", 0, 0}};
    auto [c2, r2] = transform({staged({{"quantity", "5"}})}, half);
    CHECK(c2[0].at("quantity") == "3");  // 2.5 rounds half-up
    CHECK(r2.empty());
    CHECK(rejects.empty());
}

TEST_CASE("lookup miss policies: reject, unknown, passthrough") {
    Rule rule;
    rule.kind = RuleKind::Lookup;
    rule.field = "country";
    rule.mapping = {{"CN", "China"}};

    rule.on_miss = LookupMiss::Reject;
    auto [c1, r1] = transform({staged({{"country", "XX"}})}, {rule});
    CHECK(c1.empty());
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].reason == "UnmappedValue");
    CHECK(r1[0].rule_index == 0);

    rule.on_miss = LookupMiss::Unknown;
    auto [c2, r2] = transform({staged({{"country", "XX"}})}, {rule});
    CHECK(c2[0].at("country") == "UNKNOWN");

    rule.on_miss = LookupMiss::Passthrough;
    auto [c3, r3] = transform({staged({{"country", "XX"}})}, {rule});
    CHECK(c3[0].at("country") == "XX");

    auto [c4, r4] = transform({staged({{"country", "CN"}})}, {rule});
    CHECK(c4[0].at("country") == "China");
    CHECK(r2.empty());
    CHECK(r3.empty());
    CHECK(r4.empty());
}

TEST_CASE("date_parse canonicalizes to yyyymmdd and rejects bad dates") {
    Rule rule;
    rule.kind = RuleKind::DateParse;
    rule.field = "date";
    rule.pattern = "YYYY-MM-DD";
    auto [ok, bad] = transform({staged({{"date", "2010-03-15"}})}, {rule});
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].at("date") == "20100315");

    auto [none, rejected] = transform({staged({{"date", "2010-13-40"}})}, {rule});
    CHECK(none.empty());
    REQUIRE(rejected.size() == 1);
    CHECK(rejected[0].reason == "BadDate");
    CHECK(bad.empty());
}

TEST_CASE("transform conserves rows: |in| == |conformed| + |rejects|") {
    RuleSet rules;
    Rule check;
    check.kind = RuleKind::DomainCheck;
    check.field = "q";
    check.min = 1;
    check.max = 100;
    rules.push_back(check);

    std::vector<StagedRow> rows;
    for (int i = -20; i < 180; ++i) rows.push_back(staged({{"q", std::to_string(i)}}));
    auto [conformed, rejects] = transform(rows, rules);
    CHECK(conformed.size() + rejects.size() == rows.size());
    CHECK(conformed.size() == 100);
}

TEST_CASE("rule order matters in static validation") {
    // lookup before the rename that creates its field: invalid
    Rule rename;
    rename.kind = RuleKind::Rename;
    rename.field = "qty";
    rename.to = "quantity";
    Rule check;
    check.kind = RuleKind::DomainCheck;
    check.field = "quantity";
    check.min = 0;
    check.max = 1e9;

    CHECK_NOTHROW(validate_rules({rename, check}, {"qty"}));
    try {
        validate_rules({check, rename}, {"qty"});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
}

TEST_CASE("load_facts inserts, infers members and dedupes batches") {
    TempDir dir("etl-load");
    auto wh = tiny_warehouse(dir / "wh");
    std::vector<ConformedRow> rows;
    for (int i = 0; i < 100; ++i) {
        rows.push_back({{"day", "20100315"},
                        {"formula", "Ge Gen Tang"},
                        {"herb", "Ge Gen"},
                        {"source", "Beijing Hospital 1"},
                        {"prescription_id", "RX" + std::to_string(i)},
                        {"quantity", "9000"}});
    }
    const auto report = load_facts(wh, rows, "batch-1", true);
    CHECK(report.rows_in == 100);
    CHECK(report.inserted == 100);
    CHECK(report.rejected == 0);
    CHECK(report.inferred_members == 0);
    CHECK(wh.fact_count() == 100);

    const auto replay = load_facts(wh, rows, "batch-1", true);
    CHECK(replay.inserted == 0);
    CHECK(replay.skipped_duplicate_batch == 100);
    CHECK(wh.fact_count() == 100);

    // unknown herb with infer_members: inferred member, fact accepted
    std::vector<ConformedRow> inferred_rows{{{"day", "20100401"},
                                             {"formula", "Ge Gen Tang"},
                                             {"herb", "Unknown Root X"},
                                             {"source", "Beijing Hospital 1"},
                                             {"prescription_id", "RX-inf"},
                                             {"quantity", "500"}}};
    const auto inferred = load_facts(wh, inferred_rows, "batch-2", true);
    CHECK(inferred.inserted == 1);
    CHECK(inferred.inferred_members >= 1);
    const auto key = wh.find_member("Herbs", "Unknown Root X").value();
    CHECK(wh.member("Herbs", key).inferred);

    // same unknown member without inference goes to key 0
    std::vector<ConformedRow> unknown_rows{{{"day", "20100401"},
                                            {"formula", "Ge Gen Tang"},
                                            {"herb", "Mystery Herb"},
                                            {"source", "Beijing Hospital 1"},
                                            {"prescription_id", "RX-unk"},
                                            {"quantity", "500"}}};
    const auto unknown = load_facts(wh, unknown_rows, "batch-3", false);
    CHECK(unknown.inserted == 1);
    CHECK(unknown.inferred_members == 0);
    CHECK(!wh.find_member("Herbs", "Mystery Herb").has_value());
    CHECK(wh.facts().back().dim_keys[2] == kUnknownKey);
}

TEST_CASE("load_dimension upserts rows and records lineage") {
    TempDir dir("etl-loaddim");
    auto wh = Warehouse::init(builtin_tcm_schema(), dir / "wh");
    std::vector<ConformedRow> rows{{{"herb_type", "Root"}}, {{"herb_type", "Twig"}}};
    const auto report = load_dimension(wh, "HerbTypes", rows, "seed-1", "seed.csv", "d");
    CHECK(report.inserted == 2);
    CHECK(wh.member_count("HerbTypes") == 3);
    CHECK(wh.get_lineage("seed-1").rows_out == 2);

    // missing attribute rejects the row, not the batch
    std::vector<ConformedRow> bad{{{"wrong_field", "x"}}};
    const auto rejected = load_dimension(wh, "HerbTypes", bad, "seed-2");
    CHECK(rejected.inserted == 0);
    CHECK(rejected.rejected == 1);
    REQUIRE(!rejected.reject_sample.empty());
    CHECK(rejected.reject_sample[0].reason == "MissingAttribute");
}

TEST_CASE("pipeline runs dimensions before facts and survives a broken source") {
    TempDir dir("etl-pipeline");
    { auto wh = Warehouse::init(builtin_tcm_schema(), dir / "wh"); wh.checkpoint(); }
    write_text(dir / "herb_types.csv", "herb_type\nRoot\n");
    write_text(dir / "herbs.csv", "herb,herb_type\nGe Gen,Root\n");
    write_text(dir / "formula_types.csv", "formula_type\nCold and Flu\n");
    write_text(dir / "formulas.csv", "formula,formula_type\nGe Gen Tang,Cold and Flu\n");
    write_text(dir / "source_types.csv", "source_type\nHospital\n");
    write_text(dir / "countries.csv", "country\nChina\n");
    write_text(dir / "sources.csv", "source,source_type,country\nBeijing Hospital 1,Hospital,China\n");
    write_text(dir / "facts.csv",
               "prescription_id,date,formula,herb,source,quantity_mg\n"
               "RX1,2010-03-15,Ge Gen Tang,Ge Gen,Beijing Hospital 1,9000\n");

    json doc;
    doc["warehouse"] = (dir / "wh").string();
    auto dim = [&](const std::string& file, const std::string& table, json field_map) {
        json s;
        s["uri"] = (dir / file).string();
        s["format"] = "csv";
        s["kind"] = "dimension";
        s["table"] = table;
        s["field_map"] = std::move(field_map);
        s["batch_id"] = "seed-" + table;
        return s;
    };
    // fact source listed first on purpose; dimensions must still load first
    json fact;
    fact["uri"] = (dir / "facts.csv").string();
    fact["format"] = "csv";
    fact["kind"] = "fact";
    fact["field_map"] = {{"prescription_id", "prescription_id"}, {"date", "day"},
                         {"formula", "formula"},                 {"herb", "herb"},
                         {"source", "source"},                   {"quantity_mg", "quantity"}};
    fact["rules"] = json::array({{{"op", "date_parse"}, {"field", "day"}, {"pattern", "YYYY-MM-DD"}}});
    fact["batch_id"] = "facts-1";
    doc["sources"] = json::array();
    doc["sources"].push_back(fact);
    doc["sources"].push_back(dim("herb_types.csv", "HerbTypes", {{"herb_type", "herb_type"}}));
    doc["sources"].push_back(dim("herbs.csv", "Herbs", {{"herb", "herb"}, {"herb_type", "herb_type"}}));
    doc["sources"].push_back(
        dim("formula_types.csv", "FormulaTypes", {{"formula_type", "formula_type"}}));
    doc["sources"].push_back(
        dim("formulas.csv", "Formulas", {{"formula", "formula"}, {"formula_type", "formula_type"}}));
    doc["sources"].push_back(dim("source_types.csv", "SourceTypes", {{"source_type", "source_type"}}));
    doc["sources"].push_back(dim("countries.csv", "Countries", {{"country", "country"}}));
    doc["sources"].push_back(dim(
        "sources.csv", "Sources",
        {{"source", "source"}, {"source_type", "source_type"}, {"country", "country"}}));
    json broken = dim("missing.csv", "HerbTypes", {{"herb_type", "herb_type"}});
    broken["uri"] = (dir / "missing.csv").string();
    broken["batch_id"] = "seed-broken";
    doc["sources"].push_back(broken);

    const auto cfg = pipeline_config_from_json(doc, dir.path());
    auto wh = Warehouse::open(dir / "wh", true);
    const auto report = run_pipeline(wh, cfg);

    REQUIRE(report.sources.size() == 9);
    CHECK(report.sources.back().kind == SourceKind::Fact);  // facts ran last
    CHECK(report.sources.back().ok);
    CHECK(report.sources.back().report.inserted == 1);
    int failed = 0;
    for (const auto& s : report.sources) {
        if (!s.ok) ++failed;
    }
    CHECK(failed == 1);  // only the missing file
    CHECK(!report.all_ok);
    CHECK(wh.fact_count() == 1);
    CHECK(wh.inferred_member_count() == 0);

    // replaying the identical pipeline leaves the fact count unchanged
    const auto replay = run_pipeline(wh, cfg);
    CHECK(replay.total_inserted_facts == 0);
    CHECK(wh.fact_count() == 1);
}

TEST_CASE("ruleset digest is sensitive to any rule edit") {
    RuleSet rules;
    Rule rule;
    rule.kind = RuleKind::Scale;
    rule.field = "quantity";
    rule.factor = 3.0;
    rules.push_back(rule);
    const auto d1 = ruleset_digest(rules_to_json(rules));
    rules[0].factor = 3.5;
    const auto d2 = ruleset_digest(rules_to_json(rules));
    CHECK(d1 != d2);
}
