#include "tcmdw/cube.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "tcmdw/digest.hpp"
#include "tcmdw/errors.hpp"

namespace tcmdw {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

using CoordKey = std::array<std::uint32_t, kMaxDimensions>;

namespace {

struct CoordKeyHash {
    std::size_t operator()(const CoordKey& key) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (std::uint32_t v : key) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

// Accumulates cells during a fold, then emits them sorted by coordinates.
class CellStore {
public:
    CellStore(std::size_t measures, std::size_t reserve) : measures_(measures) {
        index_.reserve(reserve);
    }

    std::uint32_t slot(const CoordKey& key) {
        auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(keys_.size()));
        if (inserted) {
            keys_.push_back(key);
            aggs_.resize(aggs_.size() + measures_);
        }
        return it->second;
    }

    AggTuple& agg(std::uint32_t slot, std::size_t measure) { return aggs_[slot * measures_ + measure]; }

    void finish(Cube::Cuboid& out) const {
        std::vector<std::uint32_t> order(keys_.size());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return keys_[a] < keys_[b]; });
        out.coords.reserve(keys_.size());
        out.aggs.reserve(aggs_.size());
        for (std::uint32_t slot : order) {
            out.coords.push_back(keys_[slot]);
            for (std::size_t m = 0; m < measures_; ++m) out.aggs.push_back(aggs_[slot * measures_ + m]);
        }
    }

    std::size_t size() const { return keys_.size(); }

private:
    std::size_t measures_;
    std::unordered_map<CoordKey, std::uint32_t, CoordKeyHash> index_;
    std::vector<CoordKey> keys_;
    std::vector<AggTuple> aggs_;
};

void write_cube_file(const fs::path& path, const std::string& content, json& files) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
    out.flush();
    files[path.filename().string()] = {{"bytes", content.size()}, {"sha256", sha256_hex(content)}};
}

}  // namespace

// ---------------------------------------------------------------- lattice

std::string CuboidId::label() const {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) out.push_back('.');
        out += levels[i];
    }
    return out;
}

std::vector<CuboidId> enumerate_lattice(const SchemaDef& schema) {
    std::vector<std::vector<std::string>> choices;
    for (const auto& dim_name : schema.fact.dimensions) {
        const auto* dim = schema.find_dimension(dim_name);
        if (!dim) throw Error(ErrorCode::InvalidSchema, "unresolved dimension " + dim_name);
        std::vector<std::string> levels;
        for (const auto& binding : dimension_levels(*dim)) levels.push_back(binding.level);
        levels.push_back(kAllLevel);
        choices.push_back(std::move(levels));
    }
    std::vector<CuboidId> lattice;
    std::vector<std::size_t> pick(choices.size(), 0);
    while (true) {
        CuboidId id;
        for (std::size_t d = 0; d < choices.size(); ++d) id.levels.push_back(choices[d][pick[d]]);
        lattice.push_back(std::move(id));
        // advance mixed-radix counter, last dimension fastest
        std::size_t d = choices.size();
        while (d > 0) {
            --d;
            if (++pick[d] < choices[d].size()) break;
            pick[d] = 0;
            if (d == 0) return lattice;
        }
    }
}

CubePolicy default_policy(const SchemaDef& schema) {
    return enumerate_lattice(schema).size() <= 512 ? CubePolicy::full_lattice() : CubePolicy::capped(2);
}

// ------------------------------------------------------------------- cube

Cube::Cube() = default;

const json& Cube::policy_record() const { return *policy_record_; }

const Cube::Cuboid* Cube::find_cuboid(const std::string& label) const {
    auto it = cuboids_.find(label);
    return it == cuboids_.end() ? nullptr : &it->second;
}

std::vector<std::string> Cube::cuboid_labels() const {
    std::vector<std::string> out;
    for (const auto& [label, cuboid] : cuboids_) {
        (void)cuboid;
        out.push_back(label);
    }
    return out;
}

std::string Cube::coord_value(const Cuboid& cuboid, std::size_t dim, std::uint32_t id) const {
    const int li = cuboid.level_idx[dim];
    if (li == -2) return dims_[dim].naturals[id];
    return dims_[dim].level_values[static_cast<std::size_t>(li)][id];
}

// ------------------------------------------------------------------ build

namespace {

CuboidId base_cuboid_id(const SchemaDef& schema) {
    CuboidId id;
    for (const auto& dim_name : schema.fact.dimensions) {
        const auto* dim = schema.find_dimension(dim_name);
        id.levels.push_back(dimension_levels(*dim).front().level);
    }
    return id;
}

CuboidId apex_cuboid_id(const SchemaDef& schema) {
    CuboidId id;
    id.levels.assign(schema.fact.dimensions.size(), kAllLevel);
    return id;
}

int non_all_levels(const CuboidId& id) {
    int n = 0;
    for (const auto& level : id.levels) {
        if (level != kAllLevel) ++n;
    }
    return n;
}

}  // namespace

Cube build_cube(const Warehouse& wh, const CubePolicy& policy, int workers) {
    if (wh.last_checkpoint_digest().empty() || wh.dirty()) {
        throw Error(ErrorCode::StaleWarehouse, "warehouse modified since last checkpoint");
    }
    const SchemaDef& schema = wh.schema();
    const std::size_t nd = schema.fact.dimensions.size();
    if (nd > kMaxDimensions) {
        throw Error(ErrorCode::InvalidSchema,
                    "more than " + std::to_string(kMaxDimensions) + " fact dimensions");
    }
    const std::size_t nm = schema.fact.measures.size();

    Cube cube;
    cube.schema_ = schema;
    cube.schema_digest_ = schema_digest(schema);
    cube.source_checkpoint_ = wh.last_checkpoint_digest();
    {
        json record;
        if (policy.full) {
            record["mode"] = "full";
        } else {
            record["mode"] = "max_levels";
            record["k"] = policy.max_levels;
            json extra = json::array();
            for (const auto& id : policy.extra) extra.push_back(id.label());
            record["extra"] = std::move(extra);
        }
        cube.policy_record_ = std::make_shared<json>(std::move(record));
    }

    // per-dimension dictionaries and member -> detail-id maps
    std::vector<std::vector<std::uint32_t>> member_to_detail(nd);
    cube.detail_is_base_ = true;
    for (std::size_t d = 0; d < nd; ++d) {
        const auto* dim = schema.find_dimension(schema.fact.dimensions[d]);
        const auto& base = base_table(*dim);
        const auto bindings = dimension_levels(*dim);

        Cube::DimensionDict dict;
        for (const auto& binding : bindings) {
            dict.level_index[binding.level] = static_cast<int>(dict.level_names.size());
            dict.level_names.push_back(binding.level);
        }
        if (bindings.empty() || bindings.front().table != base.name ||
            bindings.front().attribute != base.natural_key) {
            cube.detail_is_base_ = false;
        }

        const auto& members = wh.members(base.name);
        std::vector<std::string> per_member_natural(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
            per_member_natural[k] = canonical(members[k].natural);
        }
        dict.naturals = per_member_natural;
        std::sort(dict.naturals.begin(), dict.naturals.end());
        dict.naturals.erase(std::unique(dict.naturals.begin(), dict.naturals.end()),
                            dict.naturals.end());
        for (std::size_t i = 0; i < dict.naturals.size(); ++i) {
            dict.natural_index[dict.naturals[i]] = static_cast<std::uint32_t>(i);
        }
        member_to_detail[d].resize(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
            member_to_detail[d][k] = dict.natural_index.at(per_member_natural[k]);
        }

        dict.member_levels.resize(dict.level_names.size());
        dict.level_values.resize(dict.level_names.size());
        for (std::size_t li = 0; li < dict.level_names.size(); ++li) {
            std::vector<std::string> per_member(members.size());
            for (std::size_t k = 0; k < members.size(); ++k) {
                per_member[k] = wh.level_value(static_cast<int>(d), static_cast<std::int64_t>(k),
                                               dict.level_names[li]);
            }
            auto distinct = per_member;
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            std::unordered_map<std::string, std::uint32_t> value_index;
            value_index.reserve(distinct.size());
            for (std::size_t i = 0; i < distinct.size(); ++i) {
                value_index[distinct[i]] = static_cast<std::uint32_t>(i);
            }
            dict.member_levels[li].resize(dict.naturals.size());
            for (std::size_t k = 0; k < members.size(); ++k) {
                dict.member_levels[li][member_to_detail[d][k]] = value_index.at(per_member[k]);
            }
            dict.level_values[li] = std::move(distinct);
        }
        cube.dims_.push_back(std::move(dict));
    }

    // finest-grain aggregate, keyed by natural-value ids
    {
        const auto& facts = wh.facts();
        CellStore store(nm, std::min<std::size_t>(facts.size(), 1u << 20));
        for (const auto& fact : facts) {
            CoordKey key{};
            for (std::size_t d = 0; d < nd; ++d) {
                key[d] = member_to_detail[d][static_cast<std::size_t>(fact.dim_keys[d])];
            }
            const auto slot = store.slot(key);
            for (std::size_t m = 0; m < nm; ++m) store.agg(slot, m).fold(fact.measures[m]);
        }
        cube.detail_.id.levels.assign(nd, "<detail>");
        cube.detail_.level_idx.assign(nd, -2);
        store.finish(cube.detail_);
    }

    // policy selection, lattice order
    const auto lattice = enumerate_lattice(schema);
    const auto base_id = base_cuboid_id(schema);
    const auto apex_id = apex_cuboid_id(schema);
    std::set<std::string> lattice_labels;
    for (const auto& id : lattice) lattice_labels.insert(id.label());
    std::set<std::string> wanted;
    for (const auto& id : policy.extra) {
        if (!lattice_labels.count(id.label())) {
            throw Error(ErrorCode::BadValue, "cuboid '" + id.label() + "' is not in the lattice");
        }
        wanted.insert(id.label());
    }
    wanted.insert(base_id.label());
    wanted.insert(apex_id.label());
    std::vector<CuboidId> selected;
    for (const auto& id : lattice) {
        if (policy.full || non_all_levels(id) <= policy.max_levels || wanted.count(id.label())) {
            selected.push_back(id);
        }
    }

    // fold each selected cuboid from the finest-grain cells; cuboids are
    // independent, so the kernel parallelizes across them
    std::vector<Cube::Cuboid> built(selected.size());
    const auto& detail = cube.detail_;
    const std::int64_t n = static_cast<std::int64_t>(selected.size());
    const int threads = workers > 0 ? workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (workers != 1)
    for (std::int64_t i = 0; i < n; ++i) {
        const CuboidId& id = selected[static_cast<std::size_t>(i)];
        Cube::Cuboid out;
        out.id = id;
        for (std::size_t d = 0; d < nd; ++d) {
            out.level_idx.push_back(id.levels[d] == kAllLevel
                                        ? -1
                                        : cube.dims_[d].level_index.at(id.levels[d]));
        }
        CellStore store(nm, std::min<std::size_t>(detail.coords.size(), 1u << 20));
        for (std::size_t ci = 0; ci < detail.coords.size(); ++ci) {
            CoordKey key{};
            for (std::size_t d = 0; d < nd; ++d) {
                const int li = out.level_idx[d];
                key[d] = li < 0 ? kAllCoord
                                : cube.dims_[d].member_levels[static_cast<std::size_t>(li)]
                                                             [detail.coords[ci][d]];
            }
            const auto slot = store.slot(key);
            for (std::size_t m = 0; m < nm; ++m) store.agg(slot, m).merge(detail.aggs[ci * nm + m]);
        }
        store.finish(out);
        built[static_cast<std::size_t>(i)] = std::move(out);
    }

    for (auto& cuboid : built) {
        const std::string label = cuboid.id.label();
        cube.cuboids_.emplace(label, std::move(cuboid));
    }
    return cube;
}

// -------------------------------------------------------------- save/open

namespace {

std::string cuboid_body(const Cube& cube, const Cube::Cuboid& cuboid, const SchemaDef& schema,
                        bool detail_coords) {
    const std::size_t nd = schema.fact.dimensions.size();
    const std::size_t nm = schema.fact.measures.size();
    std::string body;
    for (std::size_t ci = 0; ci < cuboid.coords.size(); ++ci) {
        ordered_json coords;
        for (std::size_t d = 0; d < nd; ++d) {
            if (cuboid.level_idx[d] == -1) continue;
            const char* name = detail_coords ? schema.fact.dimensions[d].c_str()
                                             : cuboid.id.levels[d].c_str();
            coords[name] = cube.coord_value(cuboid, d, cuboid.coords[ci][d]);
        }
        ordered_json measures;
        for (std::size_t m = 0; m < nm; ++m) {
            const auto& agg = cuboid.aggs[ci * nm + m];
            measures[schema.fact.measures[m].name] = {
                {"sum", agg.sum}, {"count", agg.count}, {"min", agg.min}, {"max", agg.max}};
        }
        ordered_json line;
        line["coords"] = std::move(coords);
        line["measures"] = std::move(measures);
        body += line.dump();
        body.push_back('\n');
    }
    return body;
}

}  // namespace

void save_cube(const Cube& cube, const fs::path& warehouse_root) {
    const fs::path dir = warehouse_root / "cube" / cube.source_checkpoint_;
    if (fs::exists(dir)) fs::remove_all(dir);
    fs::create_directories(dir);

    const auto& schema = cube.schema_;
    json files;

    for (std::size_t d = 0; d < cube.dims_.size(); ++d) {
        const auto& dict = cube.dims_[d];
        std::string body;
        for (std::size_t did = 0; did < dict.naturals.size(); ++did) {
            ordered_json levels;
            for (std::size_t li = 0; li < dict.level_names.size(); ++li) {
                levels[dict.level_names[li]] = dict.level_values[li][dict.member_levels[li][did]];
            }
            ordered_json line;
            line["member"] = dict.naturals[did];
            line["levels"] = std::move(levels);
            body += line.dump();
            body.push_back('\n');
        }
        write_cube_file(dir / ("dim_levels_" + schema.fact.dimensions[d] + ".ndjson"), body, files);
    }

    for (const auto& [label, cuboid] : cube.cuboids_) {
        write_cube_file(dir / ("cuboid_" + label + ".ndjson"),
                        cuboid_body(cube, cuboid, schema, false), files);
    }
    if (!cube.detail_is_base_) {
        write_cube_file(dir / "cuboid__detail.ndjson", cuboid_body(cube, cube.detail_, schema, true),
                        files);
    }

    json manifest;
    manifest["schema"] = json::parse(schema_to_json(schema).dump());
    manifest["schema_digest"] = cube.schema_digest_;
    manifest["source_checkpoint"] = cube.source_checkpoint_;
    manifest["policy"] = *cube.policy_record_;
    manifest["detail_is_base"] = cube.detail_is_base_;
    {
        json labels = json::array();
        for (const auto& [label, cuboid] : cube.cuboids_) {
            (void)cuboid;
            labels.push_back(label);
        }
        manifest["cuboids"] = std::move(labels);
    }
    manifest["files"] = std::move(files);

    std::ofstream out(dir / "cube_manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write cube manifest");
    out << manifest.dump(2) << "\n";
}

Cube open_cube(const fs::path& warehouse_root, const std::string& checkpoint_digest) {
    const fs::path dir = warehouse_root / "cube" / checkpoint_digest;
    const fs::path mpath = dir / "cube_manifest.json";
    if (!fs::exists(mpath)) {
        throw Error(ErrorCode::NotFound, "no cube built for checkpoint " + checkpoint_digest);
    }
    json manifest;
    try {
        std::ifstream in(mpath, std::ios::binary);
        manifest = json::parse(in);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::CorruptManifest, e.what());
    }

    Cube cube;
    try {
        cube.schema_ = parse_schema(manifest.at("schema").dump());
        cube.schema_digest_ = manifest.at("schema_digest").get<std::string>();
        cube.source_checkpoint_ = manifest.at("source_checkpoint").get<std::string>();
        cube.policy_record_ = std::make_shared<json>(manifest.at("policy"));
        cube.detail_is_base_ = manifest.at("detail_is_base").get<bool>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::CorruptManifest, e.what());
    }
    const auto& schema = cube.schema_;
    const std::size_t nd = schema.fact.dimensions.size();
    const std::size_t nm = schema.fact.measures.size();

    for (const auto& [name, entry] : manifest.at("files").items()) {
        const auto want = entry.at("sha256").get<std::string>();
        if (sha256_file(dir / name) != want) {
            throw Error(ErrorCode::DigestMismatch, name + " digest mismatch");
        }
    }

    auto read_lines = [&](const std::string& name, const std::function<void(const json&)>& fn) {
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) throw Error(ErrorCode::CorruptManifest, "missing cube file " + name);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            fn(json::parse(line));
        }
    };

    for (std::size_t d = 0; d < nd; ++d) {
        const auto* dim = schema.find_dimension(schema.fact.dimensions[d]);
        Cube::DimensionDict dict;
        for (const auto& binding : dimension_levels(*dim)) {
            dict.level_index[binding.level] = static_cast<int>(dict.level_names.size());
            dict.level_names.push_back(binding.level);
        }
        std::vector<std::vector<std::string>> per_member(dict.level_names.size());
        read_lines("dim_levels_" + schema.fact.dimensions[d] + ".ndjson", [&](const json& j) {
            dict.naturals.push_back(j.at("member").get<std::string>());
            for (std::size_t li = 0; li < dict.level_names.size(); ++li) {
                per_member[li].push_back(j.at("levels").at(dict.level_names[li]).get<std::string>());
            }
        });
        for (std::size_t i = 0; i < dict.naturals.size(); ++i) {
            dict.natural_index[dict.naturals[i]] = static_cast<std::uint32_t>(i);
        }
        dict.member_levels.resize(dict.level_names.size());
        dict.level_values.resize(dict.level_names.size());
        for (std::size_t li = 0; li < dict.level_names.size(); ++li) {
            auto distinct = per_member[li];
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            std::unordered_map<std::string, std::uint32_t> value_index;
            for (std::size_t i = 0; i < distinct.size(); ++i) {
                value_index[distinct[i]] = static_cast<std::uint32_t>(i);
            }
            dict.member_levels[li].resize(dict.naturals.size());
            for (std::size_t k = 0; k < dict.naturals.size(); ++k) {
                dict.member_levels[li][k] = value_index.at(per_member[li][k]);
            }
            dict.level_values[li] = std::move(distinct);
        }
        cube.dims_.push_back(std::move(dict));
    }

    auto load_cuboid = [&](const std::string& file, const CuboidId& id, bool detail_coords) {
        Cube::Cuboid cuboid;
        cuboid.id = id;
        for (std::size_t d = 0; d < nd; ++d) {
            cuboid.level_idx.push_back(detail_coords ? -2
                                       : id.levels[d] == kAllLevel
                                           ? -1
                                           : cube.dims_[d].level_index.at(id.levels[d]));
        }
        read_lines(file, [&](const json& j) {
            CoordKey key{};
            for (std::size_t d = 0; d < nd; ++d) {
                const int li = cuboid.level_idx[d];
                if (li == -1) {
                    key[d] = kAllCoord;
                    continue;
                }
                const char* name = detail_coords ? schema.fact.dimensions[d].c_str()
                                                 : id.levels[d].c_str();
                const auto value = j.at("coords").at(name).get<std::string>();
                if (li == -2) {
                    key[d] = cube.dims_[d].natural_index.at(value);
                } else {
                    const auto& values = cube.dims_[d].level_values[static_cast<std::size_t>(li)];
                    const auto it = std::lower_bound(values.begin(), values.end(), value);
                    key[d] = static_cast<std::uint32_t>(it - values.begin());
                }
            }
            cuboid.coords.push_back(key);
            for (std::size_t m = 0; m < nm; ++m) {
                const auto& mj = j.at("measures").at(schema.fact.measures[m].name);
                AggTuple agg;
                agg.sum = mj.at("sum").get<std::int64_t>();
                agg.count = mj.at("count").get<std::int64_t>();
                agg.min = mj.at("min").get<std::int64_t>();
                agg.max = mj.at("max").get<std::int64_t>();
                cuboid.aggs.push_back(agg);
            }
        });
        return cuboid;
    };

    for (const auto& label : manifest.at("cuboids")) {
        const std::string name = label.get<std::string>();
        CuboidId id;
        std::size_t pos = 0;
        while (true) {
            const auto dot = name.find('.', pos);
            if (dot == std::string::npos) {
                id.levels.push_back(name.substr(pos));
                break;
            }
            id.levels.push_back(name.substr(pos, dot - pos));
            pos = dot + 1;
        }
        if (id.levels.size() != nd) {
            throw Error(ErrorCode::CorruptManifest, "bad cuboid label " + name);
        }
        cube.cuboids_.emplace(name, load_cuboid("cuboid_" + name + ".ndjson", id, false));
    }

    if (cube.detail_is_base_) {
        const auto base_id = base_cuboid_id(schema);
        const auto* base = cube.find_cuboid(base_id.label());
        if (!base) throw Error(ErrorCode::CorruptManifest, "base cuboid missing");
        cube.detail_ = *base;
        cube.detail_.level_idx.assign(nd, -2);
    } else {
        CuboidId id;
        id.levels.assign(nd, "<detail>");
        cube.detail_ = load_cuboid("cuboid__detail.ndjson", id, true);
    }
    return cube;
}

// ------------------------------------------------------------------ query

namespace {

// finer-or-equal within some declared hierarchy chain
bool finer_or_equal(const DimensionDef& dim, const std::string& fine, const std::string& coarse) {
    if (fine == coarse) return true;
    if (coarse == kAllLevel) return true;
    for (const auto& hier : dim.hierarchies) {
        int fi = -1, ci = -1;
        for (std::size_t i = 0; i < hier.levels.size(); ++i) {
            if (hier.levels[i].level == fine) fi = static_cast<int>(i);
            if (hier.levels[i].level == coarse) ci = static_cast<int>(i);
        }
        if (fi >= 0 && ci >= 0 && fi <= ci) return true;
    }
    return false;
}

struct LevelEval {
    // value id of a cell at the requested level: direct coordinate when
    // map == nullptr, else map[coordinate id]
    const std::vector<std::uint32_t>* map = nullptr;

    std::uint32_t value(std::uint32_t coord) const { return map ? (*map)[coord] : coord; }
};

}  // namespace

ResultSet query(const Cube& cube, const QuerySpec& spec) {
    const auto& schema = cube.schema_;
    validate_query_spec(schema, spec);
    const std::size_t nd = schema.fact.dimensions.size();
    const std::size_t nm = schema.fact.measures.size();

    // referenced levels per dimension
    std::vector<std::set<int>> referenced(nd);
    auto level_of = [&](const std::string& dimension, const std::string& level) {
        const int d = schema.fact.dimension_index(dimension);
        return std::pair<int, int>(d, cube.dims_[static_cast<std::size_t>(d)].level_index.at(level));
    };
    for (const auto& g : spec.group_by) {
        auto [d, li] = level_of(g.dimension, g.level);
        referenced[static_cast<std::size_t>(d)].insert(li);
    }
    for (const auto& f : spec.filters) {
        auto [d, li] = level_of(f.dimension, f.level);
        referenced[static_cast<std::size_t>(d)].insert(li);
    }

    // choose the source grain per dimension: the finest referenced level when
    // the references are comparable and roll up cleanly, otherwise the
    // finest stored cells
    std::vector<int> required(nd, -1);  // -1 All, -2 detail, else level idx
    // cross-level maps, keyed by (dim, from level, to level)
    std::map<std::tuple<std::size_t, int, int>, std::vector<std::uint32_t>> lifted;
    bool use_detail = false;
    for (std::size_t d = 0; d < nd && !use_detail; ++d) {
        if (referenced[d].empty()) continue;
        const auto* dim = schema.find_dimension(schema.fact.dimensions[d]);
        const auto& dict = cube.dims_[d];
        int finest = -1;
        for (int candidate : referenced[d]) {
            bool refines_all = true;
            for (int other : referenced[d]) {
                if (!finer_or_equal(*dim, dict.level_names[static_cast<std::size_t>(candidate)],
                                    dict.level_names[static_cast<std::size_t>(other)])) {
                    refines_all = false;
                    break;
                }
            }
            if (refines_all) {
                finest = candidate;
                break;
            }
        }
        if (finest < 0) {
            required[d] = -2;
            use_detail = true;
            break;
        }
        required[d] = finest;
        for (int other : referenced[d]) {
            if (other == finest) continue;
            // value-level roll-up map; bail out to detail if the member data
            // does not determine it
            std::vector<std::uint32_t> map(dict.level_values[static_cast<std::size_t>(finest)].size(),
                                           kAllCoord);
            const auto& from = dict.member_levels[static_cast<std::size_t>(finest)];
            const auto& to = dict.member_levels[static_cast<std::size_t>(other)];
            bool functional = true;
            for (std::size_t did = 0; did < from.size(); ++did) {
                auto& slot = map[from[did]];
                if (slot == kAllCoord) {
                    slot = to[did];
                } else if (slot != to[did]) {
                    functional = false;
                    break;
                }
            }
            if (!functional) {
                use_detail = true;
                break;
            }
            lifted[{d, finest, other}] = std::move(map);
        }
    }

    const Cube::Cuboid* source = nullptr;
    if (!use_detail) {
        CuboidId id;
        for (std::size_t d = 0; d < nd; ++d) {
            id.levels.push_back(required[d] == -1
                                    ? kAllLevel
                                    : cube.dims_[d].level_names[static_cast<std::size_t>(required[d])]);
        }
        source = cube.find_cuboid(id.label());
    }
    if (!source) source = &cube.detail_;

    // bind filters and group columns against the source cells
    auto eval_for = [&](std::size_t d, int level) {
        LevelEval eval;
        const int cell_level = source->level_idx[d];
        if (cell_level == -2) {
            eval.map = &cube.dims_[d].member_levels[static_cast<std::size_t>(level)];
        } else if (cell_level != level) {
            eval.map = &lifted.at({d, cell_level, level});
        }
        return eval;
    };

    struct BoundFilter {
        std::size_t dim;
        LevelEval eval;
        std::vector<char> pass;  // by value id
    };
    std::vector<BoundFilter> filters;
    bool impossible = false;
    for (const auto& f : spec.filters) {
        auto [d, li] = level_of(f.dimension, f.level);
        BoundFilter bound;
        bound.dim = static_cast<std::size_t>(d);
        bound.eval = eval_for(bound.dim, li);
        const auto& values = cube.dims_[bound.dim].level_values[static_cast<std::size_t>(li)];
        bound.pass.assign(values.size(), 0);
        bool any = false;
        for (const auto& v : f.values) {
            const auto it = std::lower_bound(values.begin(), values.end(), v);
            if (it != values.end() && *it == v) {
                bound.pass[static_cast<std::size_t>(it - values.begin())] = 1;
                any = true;
            }
        }
        if (!any) impossible = true;
        filters.push_back(std::move(bound));
    }

    struct BoundGroup {
        std::size_t dim;
        int level;
        LevelEval eval;
    };
    std::vector<BoundGroup> groups;
    for (const auto& g : spec.group_by) {
        auto [d, li] = level_of(g.dimension, g.level);
        groups.push_back({static_cast<std::size_t>(d), li, eval_for(static_cast<std::size_t>(d), li)});
    }

    std::vector<std::size_t> measure_idx;
    for (const auto& m : spec.measures) {
        measure_idx.push_back(static_cast<std::size_t>(schema.fact.measure_index(m.measure)));
    }

    ResultSet result;
    for (const auto& g : spec.group_by) result.columns.push_back(g.level);
    for (const auto& m : spec.measures) {
        result.columns.push_back(std::string(agg_name(m.agg)) + "(" + m.measure + ")");
    }

    if (impossible) return result;

    std::map<std::vector<std::uint32_t>, std::vector<AggTuple>> cells;
    for (std::size_t ci = 0; ci < source->coords.size(); ++ci) {
        bool pass = true;
        for (const auto& f : filters) {
            const auto id = f.eval.value(source->coords[ci][f.dim]);
            if (!f.pass[id]) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;
        std::vector<std::uint32_t> key;
        key.reserve(groups.size());
        for (const auto& g : groups) key.push_back(g.eval.value(source->coords[ci][g.dim]));
        auto [it, inserted] = cells.try_emplace(std::move(key), std::vector<AggTuple>(nm));
        for (std::size_t m = 0; m < nm; ++m) it->second[m].merge(source->aggs[ci * nm + m]);
        (void)inserted;
    }

    for (const auto& [key, aggs] : cells) {
        std::vector<std::string> row;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            row.push_back(
                cube.dims_[groups[gi].dim].level_values[static_cast<std::size_t>(groups[gi].level)]
                                                       [key[gi]]);
        }
        for (std::size_t mi = 0; mi < spec.measures.size(); ++mi) {
            row.push_back(aggs[measure_idx[mi]].render(spec.measures[mi].agg));
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

// ------------------------------------------------------------- navigation

namespace {

const DimensionDef& need_dimension(const SchemaDef& schema, const std::string& dimension) {
    const auto* dim = schema.find_dimension(dimension);
    if (!dim || schema.fact.dimension_index(dimension) < 0) {
        throw Error(ErrorCode::UnknownDimension, "no dimension '" + dimension + "'");
    }
    return *dim;
}

int level_position(const Hierarchy& hier, const std::string& level) {
    for (std::size_t i = 0; i < hier.levels.size(); ++i) {
        if (hier.levels[i].level == level) return static_cast<int>(i);
    }
    return -1;
}

// Resolves which hierarchy a navigation step moves along.
const Hierarchy& resolve_hierarchy(const DimensionDef& dim, const std::string& level,
                                   const std::string& requested, bool for_roll_up) {
    if (!requested.empty()) {
        const auto* h = dim.find_hierarchy(requested);
        if (!h) {
            throw Error(ErrorCode::UnknownLevel,
                        "no hierarchy '" + requested + "' in dimension " + dim.name);
        }
        if (level_position(*h, level) < 0) {
            throw Error(ErrorCode::UnknownLevel,
                        "level '" + level + "' is not part of hierarchy " + requested);
        }
        return *h;
    }
    std::vector<const Hierarchy*> candidates;
    for (const auto& h : dim.hierarchies) {
        if (level_position(h, level) >= 0) candidates.push_back(&h);
    }
    if (candidates.empty()) {
        throw Error(ErrorCode::UnknownLevel, "no hierarchy holds level '" + level + "'");
    }
    if (candidates.size() == 1) return *candidates.front();
    // several hierarchies hold this level; the step is unambiguous only if
    // they all move to the same neighbour
    std::set<std::string> next;
    for (const auto* h : candidates) {
        const int pos = level_position(*h, level);
        if (for_roll_up) {
            next.insert(pos + 1 < static_cast<int>(h->levels.size())
                            ? h->levels[static_cast<std::size_t>(pos + 1)].level
                            : kAllLevel);
        } else {
            next.insert(pos > 0 ? h->levels[static_cast<std::size_t>(pos - 1)].level : "<base>");
        }
    }
    if (next.size() > 1) {
        throw Error(ErrorCode::AmbiguousHierarchy,
                    "dimension " + dim.name + " has multiple hierarchies through level '" + level +
                        "'; name one");
    }
    return *candidates.front();
}

}  // namespace

QuerySpec roll_up(const SchemaDef& schema, const QuerySpec& spec, const std::string& dimension,
                  const std::string& hierarchy) {
    const auto& dim = need_dimension(schema, dimension);
    QuerySpec out = spec;
    for (auto it = out.group_by.begin(); it != out.group_by.end(); ++it) {
        if (it->dimension != dimension) continue;
        const auto& hier =
            resolve_hierarchy(dim, it->level, !hierarchy.empty() ? hierarchy : it->hierarchy, true);
        const int pos = level_position(hier, it->level);
        if (pos + 1 < static_cast<int>(hier.levels.size())) {
            it->level = hier.levels[static_cast<std::size_t>(pos + 1)].level;
            it->hierarchy = hier.name;
        } else {
            out.group_by.erase(it);  // coarsest rolls up to All
        }
        return out;
    }
    throw Error(ErrorCode::AtApex, "dimension " + dimension + " is already at All");
}

QuerySpec drill_down(const SchemaDef& schema, const QuerySpec& spec, const std::string& dimension,
                     const std::string& hierarchy) {
    const auto& dim = need_dimension(schema, dimension);
    QuerySpec out = spec;
    for (auto& g : out.group_by) {
        if (g.dimension != dimension) continue;
        const auto& hier =
            resolve_hierarchy(dim, g.level, !hierarchy.empty() ? hierarchy : g.hierarchy, false);
        const int pos = level_position(hier, g.level);
        if (pos == 0) {
            throw Error(ErrorCode::AtBase, "dimension " + dimension + " is already at its finest level");
        }
        g.level = hier.levels[static_cast<std::size_t>(pos - 1)].level;
        g.hierarchy = hier.name;
        return out;
    }
    // drilling down from All enters at the hierarchy's coarsest level
    const Hierarchy* hier = nullptr;
    if (!hierarchy.empty()) {
        hier = dim.find_hierarchy(hierarchy);
        if (!hier) {
            throw Error(ErrorCode::UnknownLevel,
                        "no hierarchy '" + hierarchy + "' in dimension " + dimension);
        }
    } else if (dim.hierarchies.size() == 1) {
        hier = &dim.hierarchies.front();
    } else {
        throw Error(ErrorCode::AmbiguousHierarchy,
                    "dimension " + dimension + " has multiple hierarchies; name one");
    }
    out.group_by.push_back({dimension, hier->name, hier->levels.back().level});
    return out;
}

QuerySpec slice(const SchemaDef& schema, const QuerySpec& spec, const std::string& dimension,
                const std::string& level, const std::string& member) {
    const auto& dim = need_dimension(schema, dimension);
    bool found = false;
    for (const auto& binding : dimension_levels(dim)) {
        if (binding.level == level) {
            found = true;
            break;
        }
    }
    if (!found) {
        throw Error(ErrorCode::UnknownLevel, "no level '" + level + "' in dimension " + dimension);
    }
    QuerySpec out = spec;
    out.filters.push_back({dimension, "", level, {member}});
    return out;
}

QuerySpec dice(const SchemaDef& schema, const QuerySpec& spec,
               const std::vector<FilterSpec>& filters) {
    QuerySpec out = spec;
    for (const auto& f : filters) {
        QuerySpec probe;
        probe.filters.push_back(f);
        probe.measures = {{schema.fact.measures.front().name, Agg::Sum}};
        validate_query_spec(schema, probe);
        out.filters.push_back(f);
    }
    return out;
}

}  // namespace tcmdw
