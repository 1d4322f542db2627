#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tcmdw {

// Synthetic fixture data. Formula and herb names follow well-known classical
// formulas for flavour; quantities and distributions are generator defaults,
// not medical ground truth.

struct Ingredient {
    std::string herb;
    std::string herb_type;
    std::int64_t base_quantity_mg = 0;
};

struct FormulaSpec {
    std::string name;
    std::string formula_type;
    std::vector<Ingredient> ingredients;
};

struct CountrySpec {
    std::string name;
    double multiplier = 1.0;  // scales every ingredient quantity prescribed there
};

struct GenConfig {
    std::uint64_t seed = 42;
    std::int64_t n_prescriptions = 10000;
    std::vector<int> years = {2009, 2010, 2011};
    std::vector<CountrySpec> countries;
    std::vector<FormulaSpec> catalog;
    int sources_per_country = 5;
};

GenConfig default_gen_config();
GenConfig gen_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json gen_config_to_json(const GenConfig& cfg);
std::string gen_config_digest(const GenConfig& cfg);

struct GeneratedFact {
    std::string prescription_id;
    std::int64_t day = 0;  // yyyymmdd
    std::string formula;
    std::string herb;
    std::string source;
    std::int64_t quantity_mg = 0;
};

struct SourceSeed {
    std::string name;
    std::string type;
    std::string country;
};

struct GeneratedData {
    std::vector<std::string> formula_types;
    std::vector<std::string> herb_types;
    std::vector<std::string> source_types;
    std::vector<std::string> countries;
    std::vector<std::pair<std::string, std::string>> formulas;  // name, type
    std::vector<std::pair<std::string, std::string>> herbs;     // name, type
    std::vector<SourceSeed> sources;
    std::vector<std::int64_t> days;  // every day of the configured years
    std::vector<GeneratedFact> facts;
    std::int64_t prescription_count = 0;
};

// Pure function of the config: one splitmix64 stream drives every draw, so
// equal configs produce identical data on any platform.
GeneratedData generate_rows(const GenConfig& cfg);

// Writes seed_<table>.csv for all eight lookup tables, facts.csv and
// gen_manifest.json into out_dir; returns the manifest. Throws PathNotEmpty /
// InvalidConfig.
nlohmann::json generate_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace tcmdw
