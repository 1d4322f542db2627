#include "tcmdw/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "tcmdw/csv.hpp"
#include "tcmdw/digest.hpp"
#include "tcmdw/errors.hpp"
#include "tcmdw/rng.hpp"
#include "tcmdw/value.hpp"

namespace tcmdw {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Source kinds the warehouse ingests from, per the intake taxonomy.
const std::vector<std::string> kSourceTypes = {
    "Practitioner", "Hospital", "PharmaceuticalCompany", "ResearchCentre", "OnlineResource"};

constexpr double kNoiseLow = 0.9;
constexpr double kNoiseHigh = 1.1;

}  // namespace

GenConfig default_gen_config() {
    GenConfig cfg;
    cfg.seed = 42;
    cfg.n_prescriptions = 10000;
    cfg.years = {2009, 2010, 2011};
    cfg.countries = {{"China", 1.15}, {"Australia", 1.0}, {"Germany", 0.95}, {"Canada", 1.05}};
    cfg.sources_per_country = 5;
    cfg.catalog = {
        {"Ge Gen Tang",
         "Cold and Flu",
         {{"Ge Gen", "Root", 12000},
          {"Ma Huang", "Aerial", 9000},
          {"Gui Zhi", "Twig", 6000},
          {"Shao Yao", "Root", 6000},
          {"Sheng Jiang", "Rhizome", 9000},
          {"Gan Cao", "Root", 6000},
          {"Da Zao", "Fruit", 9000}}},
        {"Gui Zhi Tang",
         "Cold and Flu",
         {{"Gui Zhi", "Twig", 9000},
          {"Shao Yao", "Root", 9000},
          {"Sheng Jiang", "Rhizome", 9000},
          {"Gan Cao", "Root", 6000},
          {"Da Zao", "Fruit", 9000}}},
        {"Ma Huang Tang",
         "Cold and Flu",
         {{"Ma Huang", "Aerial", 9000},
          {"Gui Zhi", "Twig", 6000},
          {"Xing Ren", "Seed", 9000},
          {"Gan Cao", "Root", 3000}}},
        {"Si Jun Zi Tang",
         "Tonic",
         {{"Ren Shen", "Root", 9000},
          {"Bai Zhu", "Rhizome", 9000},
          {"Fu Ling", "Fungus", 9000},
          {"Gan Cao", "Root", 6000}}},
        {"Si Wu Tang",
         "Tonic",
         {{"Shu Di Huang", "Root", 12000},
          {"Dang Gui", "Root", 9000},
          {"Bai Shao", "Root", 9000},
          {"Chuan Xiong", "Rhizome", 6000}}},
        {"Er Chen Tang",
         "Digestive",
         {{"Ban Xia", "Rhizome", 12000},
          {"Chen Pi", "Peel", 9000},
          {"Fu Ling", "Fungus", 6000},
          {"Gan Cao", "Root", 3000}}},
        {"Bu Zhong Yi Qi Tang",
         "Tonic",
         {{"Huang Qi", "Root", 15000},
          {"Ren Shen", "Root", 9000},
          {"Bai Zhu", "Rhizome", 9000},
          {"Gan Cao", "Root", 6000},
          {"Dang Gui", "Root", 6000},
          {"Chen Pi", "Peel", 6000},
          {"Sheng Ma", "Rhizome", 3000},
          {"Chai Hu", "Root", 3000}}},
        {"Xiao Yao San",
         "Digestive",
         {{"Chai Hu", "Root", 9000},
          {"Dang Gui", "Root", 9000},
          {"Bai Shao", "Root", 9000},
          {"Bai Zhu", "Rhizome", 9000},
          {"Fu Ling", "Fungus", 9000},
          {"Sheng Jiang", "Rhizome", 6000},
          {"Bo He", "Leaf", 3000},
          {"Gan Cao", "Root", 4500}}},
    };
    return cfg;
}

namespace {

void validate_config(const GenConfig& cfg) {
    if (cfg.n_prescriptions < 0) throw Error(ErrorCode::InvalidConfig, "n_prescriptions < 0");
    if (cfg.years.empty()) throw Error(ErrorCode::InvalidConfig, "no years configured");
    for (int y : cfg.years) {
        if (y < 1000 || y > 9999) throw Error(ErrorCode::InvalidConfig, "year out of range");
    }
    if (cfg.countries.empty()) throw Error(ErrorCode::InvalidConfig, "no countries configured");
    for (const auto& c : cfg.countries) {
        if (c.multiplier <= 0.0) {
            throw Error(ErrorCode::InvalidConfig, "multiplier for " + c.name + " must be > 0");
        }
    }
    if (cfg.catalog.empty()) throw Error(ErrorCode::InvalidConfig, "catalog is empty");
    for (const auto& f : cfg.catalog) {
        if (f.ingredients.empty()) {
            throw Error(ErrorCode::InvalidConfig, "formula " + f.name + " has no ingredients");
        }
        for (const auto& ing : f.ingredients) {
            if (ing.base_quantity_mg < 1) {
                throw Error(ErrorCode::InvalidConfig,
                            "ingredient " + ing.herb + " must have base quantity >= 1 mg");
            }
        }
    }
    if (cfg.sources_per_country < 1) {
        throw Error(ErrorCode::InvalidConfig, "sources_per_country must be >= 1");
    }
}

}  // namespace

GeneratedData generate_rows(const GenConfig& cfg) {
    validate_config(cfg);
    GeneratedData data;

    std::set<std::string> seen;
    for (const auto& f : cfg.catalog) {
        data.formulas.emplace_back(f.name, f.formula_type);
        if (seen.insert(f.formula_type).second) data.formula_types.push_back(f.formula_type);
    }
    seen.clear();
    for (const auto& f : cfg.catalog) {
        for (const auto& ing : f.ingredients) {
            if (seen.insert(ing.herb).second) data.herbs.emplace_back(ing.herb, ing.herb_type);
        }
    }
    seen.clear();
    for (const auto& [herb, type] : data.herbs) {
        (void)herb;
        if (seen.insert(type).second) data.herb_types.push_back(type);
    }
    data.source_types = kSourceTypes;
    for (const auto& c : cfg.countries) data.countries.push_back(c.name);
    for (const auto& c : cfg.countries) {
        for (int i = 1; i <= cfg.sources_per_country; ++i) {
            const auto& type = kSourceTypes[static_cast<std::size_t>(i - 1) % kSourceTypes.size()];
            data.sources.push_back({c.name + " " + type + " " + std::to_string(i), type, c.name});
        }
    }
    for (int year : cfg.years) {
        for (int month = 1; month <= 12; ++month) {
            for (int day = 1; day <= 31; ++day) {
                const std::int64_t ymd = static_cast<std::int64_t>(year) * 10000 + month * 100 + day;
                if (valid_yyyymmdd(ymd)) data.days.push_back(ymd);
            }
        }
    }

    SplitMix64 rng(cfg.seed);
    data.prescription_count = cfg.n_prescriptions;
    for (std::int64_t p = 1; p <= cfg.n_prescriptions; ++p) {
        const auto& formula = cfg.catalog[rng.below(cfg.catalog.size())];
        const std::int64_t day = data.days[rng.below(data.days.size())];
        const auto& source = data.sources[rng.below(data.sources.size())];
        double multiplier = 1.0;
        for (const auto& c : cfg.countries) {
            if (c.name == source.country) {
                multiplier = c.multiplier;
                break;
            }
        }
        char rx[32];
        std::snprintf(rx, sizeof(rx), "RX%08lld", static_cast<long long>(p));
        for (const auto& ing : formula.ingredients) {
            const double noise = rng.uniform(kNoiseLow, kNoiseHigh);
            auto quantity = static_cast<std::int64_t>(
                std::floor(static_cast<double>(ing.base_quantity_mg) * multiplier * noise + 0.5));
            if (quantity < 1) quantity = 1;
            data.facts.push_back({rx, day, formula.name, ing.herb, source.name, quantity});
        }
    }
    return data;
}

// ----------------------------------------------------------------- config

GenConfig gen_config_from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    static const std::set<std::string> allowed = {"seed",      "n_prescriptions",     "years",
                                                  "countries", "sources_per_country", "catalog"};
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw Error(ErrorCode::InvalidConfig, "unknown key '" + it.key() + "'");
        }
    }
    GenConfig cfg = default_gen_config();
    try {
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("n_prescriptions")) {
            cfg.n_prescriptions = doc.at("n_prescriptions").get<std::int64_t>();
        }
        if (doc.contains("years")) cfg.years = doc.at("years").get<std::vector<int>>();
        if (doc.contains("sources_per_country")) {
            cfg.sources_per_country = doc.at("sources_per_country").get<int>();
        }
        if (doc.contains("countries")) {
            cfg.countries.clear();
            for (const auto& cj : doc.at("countries")) {
                cfg.countries.push_back(
                    {cj.at("name").get<std::string>(), cj.at("multiplier").get<double>()});
            }
        }
        if (doc.contains("catalog")) {
            cfg.catalog.clear();
            for (const auto& fj : doc.at("catalog")) {
                FormulaSpec f;
                f.name = fj.at("name").get<std::string>();
                f.formula_type = fj.at("formula_type").get<std::string>();
                for (const auto& ij : fj.at("ingredients")) {
                    f.ingredients.push_back({ij.at("herb").get<std::string>(),
                                             ij.at("herb_type").get<std::string>(),
                                             ij.at("base_quantity_mg").get<std::int64_t>()});
                }
                cfg.catalog.push_back(std::move(f));
            }
        }
    } catch (const std::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    validate_config(cfg);
    return cfg;
}

ordered_json gen_config_to_json(const GenConfig& cfg) {
    ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["n_prescriptions"] = cfg.n_prescriptions;
    doc["years"] = cfg.years;
    doc["countries"] = ordered_json::array();
    for (const auto& c : cfg.countries) {
        doc["countries"].push_back({{"name", c.name}, {"multiplier", c.multiplier}});
    }
    doc["sources_per_country"] = cfg.sources_per_country;
    doc["catalog"] = ordered_json::array();
    for (const auto& f : cfg.catalog) {
        ordered_json fj;
        fj["name"] = f.name;
        fj["formula_type"] = f.formula_type;
        fj["ingredients"] = ordered_json::array();
        for (const auto& ing : f.ingredients) {
            fj["ingredients"].push_back({{"herb", ing.herb},
                                         {"herb_type", ing.herb_type},
                                         {"base_quantity_mg", ing.base_quantity_mg}});
        }
        doc["catalog"].push_back(std::move(fj));
    }
    return doc;
}

std::string gen_config_digest(const GenConfig& cfg) {
    return sha256_hex(json::parse(gen_config_to_json(cfg).dump()).dump());
}

// ----------------------------------------------------------------- output

namespace {

void write_file(const std::filesystem::path& path, const std::string& content, json& files) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
    out.flush();
    files[path.filename().string()] = {{"bytes", content.size()}, {"sha256", sha256_hex(content)}};
}

std::string csv_of(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
    std::string out = csv_join(header) + "\n";
    for (const auto& row : rows) out += csv_join(row) + "\n";
    return out;
}

}  // namespace

json generate_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir) {
    const GeneratedData data = generate_rows(cfg);
    if (std::filesystem::exists(out_dir) && !std::filesystem::is_empty(out_dir)) {
        throw Error(ErrorCode::PathNotEmpty, out_dir.string() + " is not empty");
    }
    std::filesystem::create_directories(out_dir);

    json files;
    auto single_column = [](const std::vector<std::string>& values) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& v : values) rows.push_back({v});
        return rows;
    };

    write_file(out_dir / "seed_FormulaTypes.csv",
               csv_of({"formula_type"}, single_column(data.formula_types)), files);
    write_file(out_dir / "seed_HerbTypes.csv", csv_of({"herb_type"}, single_column(data.herb_types)),
               files);
    write_file(out_dir / "seed_SourceTypes.csv",
               csv_of({"source_type"}, single_column(data.source_types)), files);
    write_file(out_dir / "seed_Countries.csv", csv_of({"country"}, single_column(data.countries)),
               files);

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& [name, type] : data.formulas) rows.push_back({name, type});
        write_file(out_dir / "seed_Formulas.csv", csv_of({"formula", "formula_type"}, rows), files);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& [name, type] : data.herbs) rows.push_back({name, type});
        write_file(out_dir / "seed_Herbs.csv", csv_of({"herb", "herb_type"}, rows), files);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& s : data.sources) rows.push_back({s.name, s.type, s.country});
        write_file(out_dir / "seed_Sources.csv", csv_of({"source", "source_type", "country"}, rows),
                   files);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto day : data.days) {
            rows.push_back({std::to_string(day), std::to_string(month_of(day)), quarter_of(day),
                            std::to_string(year_of(day))});
        }
        write_file(out_dir / "seed_Dates.csv", csv_of({"day", "month", "quarter", "year"}, rows),
                   files);
    }
    {
        std::string out = csv_join({"prescription_id", "date", "formula", "herb", "source",
                                    "quantity_mg"}) +
                          "\n";
        for (const auto& f : data.facts) {
            out += csv_join({f.prescription_id, yyyymmdd_to_iso(f.day), f.formula, f.herb, f.source,
                             std::to_string(f.quantity_mg)}) +
                   "\n";
        }
        write_file(out_dir / "facts.csv", out, files);
    }

    json manifest;
    manifest["config_digest"] = gen_config_digest(cfg);
    manifest["prescription_count"] = data.prescription_count;
    manifest["fact_count"] = data.facts.size();
    manifest["files"] = std::move(files);
    {
        std::ofstream out(out_dir / "gen_manifest.json", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write gen_manifest.json");
        out << manifest.dump(2) << "\n";
    }
    return manifest;
}

}  // namespace tcmdw
