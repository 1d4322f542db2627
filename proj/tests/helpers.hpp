#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "tcmdw/datagen.hpp"
#include "tcmdw/schema.hpp"
#include "tcmdw/warehouse.hpp"

namespace tcmdw::test {

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::string tpl = (std::filesystem::temp_directory_path() / (tag + ".XXXXXX")).string();
        path_ = ::mkdtemp(tpl.data());
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Minimal populated TCM warehouse: two formulas, three herbs, two sources in
// two countries, facts across 2010/2011.
inline Warehouse tiny_warehouse(const std::filesystem::path& root) {
    Warehouse wh = Warehouse::init(builtin_tcm_schema(), root);
    wh.upsert_member("FormulaTypes", std::string("Cold and Flu"), {});
    wh.upsert_member("HerbTypes", std::string("Root"), {});
    wh.upsert_member("HerbTypes", std::string("Twig"), {});
    wh.upsert_member("SourceTypes", std::string("Hospital"), {});
    wh.upsert_member("Countries", std::string("China"), {});
    wh.upsert_member("Countries", std::string("Australia"), {});
    wh.upsert_member("Formulas", std::string("Ge Gen Tang"), {},
                     {{"FormulaTypes", std::string("Cold and Flu")}});
    wh.upsert_member("Herbs", std::string("Ge Gen"), {}, {{"HerbTypes", std::string("Root")}});
    wh.upsert_member("Herbs", std::string("Gui Zhi"), {}, {{"HerbTypes", std::string("Twig")}});
    wh.upsert_member("Herbs", std::string("Gan Cao"), {}, {{"HerbTypes", std::string("Root")}});
    wh.upsert_member("Sources", std::string("Beijing Hospital 1"), {},
                     {{"SourceTypes", std::string("Hospital")}, {"Countries", std::string("China")}});
    wh.upsert_member("Sources", std::string("Sydney Hospital 1"), {},
                     {{"SourceTypes", std::string("Hospital")}, {"Countries", std::string("Australia")}});
    return wh;
}

inline FactRow make_fact(Warehouse& wh, std::int64_t day, const std::string& formula,
                         const std::string& herb, const std::string& source,
                         const std::string& rx, std::int64_t quantity) {
    FactRow row;
    row.dim_keys = {wh.ensure_date_member("Dates", day), wh.find_member("Formulas", formula).value(),
                    wh.find_member("Herbs", herb).value(), wh.find_member("Sources", source).value()};
    row.degenerate = {Value(rx)};
    row.measures = {quantity};
    return row;
}

// Loads generator output straight into a warehouse through the member and
// fact interfaces, bypassing the CSV pipeline. Checkpoints at the end.
inline void load_generated(Warehouse& wh, const GeneratedData& data) {
    for (const auto& t : data.formula_types) wh.upsert_member("FormulaTypes", t, {});
    for (const auto& t : data.herb_types) wh.upsert_member("HerbTypes", t, {});
    for (const auto& t : data.source_types) wh.upsert_member("SourceTypes", t, {});
    for (const auto& c : data.countries) wh.upsert_member("Countries", c, {});
    for (const auto& [name, type] : data.formulas) {
        wh.upsert_member("Formulas", name, {}, {{"FormulaTypes", type}});
    }
    for (const auto& [name, type] : data.herbs) {
        wh.upsert_member("Herbs", name, {}, {{"HerbTypes", type}});
    }
    for (const auto& s : data.sources) {
        wh.upsert_member("Sources", s.name, {},
                         {{"SourceTypes", s.type}, {"Countries", s.country}});
    }
    for (const auto day : data.days) wh.ensure_date_member("Dates", day);

    std::vector<FactRow> rows;
    rows.reserve(data.facts.size());
    for (const auto& f : data.facts) {
        FactRow row;
        row.dim_keys = {wh.find_member("Dates", std::to_string(f.day)).value(),
                        wh.find_member("Formulas", f.formula).value(),
                        wh.find_member("Herbs", f.herb).value(),
                        wh.find_member("Sources", f.source).value()};
        row.degenerate = {Value(f.prescription_id)};
        row.measures = {f.quantity_mg};
        rows.push_back(std::move(row));
    }
    wh.append_facts(rows);
    wh.checkpoint();
}

}  // namespace tcmdw::test
