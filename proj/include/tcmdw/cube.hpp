#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tcmdw/query.hpp"
#include "tcmdw/warehouse.hpp"

namespace tcmdw {

// The engine packs cell coordinates into fixed arrays; schemas are capped at
// eight fact dimensions (the built-in schema uses four).
inline constexpr std::size_t kMaxDimensions = 8;
inline constexpr std::uint32_t kAllCoord = 0xFFFFFFFFu;

// One group-by combination: a chosen level per fact dimension, or "All".
struct CuboidId {
    std::vector<std::string> levels;

    std::string label() const;  // levels joined with '.'
    bool operator==(const CuboidId&) const = default;
};

// Every combination of per-dimension level choices (declared levels plus
// "All"); the last dimension varies fastest.
std::vector<CuboidId> enumerate_lattice(const SchemaDef& schema);

struct CubePolicy {
    bool full = true;
    int max_levels = 2;            // cuboids with at most this many non-All levels
    std::vector<CuboidId> extra;   // explicitly requested cuboids

    static CubePolicy full_lattice() { return {true, 0, {}}; }
    static CubePolicy capped(int k) { return {false, k, {}}; }
};

// Full lattice when it has at most 512 cuboids, otherwise every cuboid with
// <= 2 non-All levels plus apex and base.
CubePolicy default_policy(const SchemaDef& schema);

// Materialized cube over one warehouse checkpoint. Immutable once built;
// safe for concurrent query callers.
class Cube {
public:
    struct Cuboid {
        CuboidId id;
        std::vector<int> level_idx;  // per dimension; -1 = All
        std::vector<std::array<std::uint32_t, kMaxDimensions>> coords;  // sorted
        std::vector<AggTuple> aggs;  // coords.size() * measure count, row-major
    };

    const SchemaDef& schema() const { return schema_; }
    const std::string& schema_digest() const { return schema_digest_; }
    const std::string& source_checkpoint() const { return source_checkpoint_; }
    const nlohmann::json& policy_record() const;

    std::size_t cuboid_count() const { return cuboids_.size(); }
    const Cuboid* find_cuboid(const std::string& label) const;
    std::vector<std::string> cuboid_labels() const;  // sorted

    // Coordinate id -> canonical string for a materialized cuboid column.
    std::string coord_value(const Cuboid& cuboid, std::size_t dim, std::uint32_t id) const;

private:
    friend Cube build_cube(const Warehouse&, const CubePolicy&, int);
    friend void save_cube(const Cube&, const std::filesystem::path&);
    friend Cube open_cube(const std::filesystem::path&, const std::string&);
    friend ResultSet query(const Cube&, const QuerySpec&);
    Cube();

    struct DimensionDict {
        std::vector<std::string> level_names;                     // declaration order
        std::map<std::string, int> level_index;
        std::vector<std::string> naturals;                        // sorted canonical natural keys
        std::unordered_map<std::string, std::uint32_t> natural_index;
        std::vector<std::vector<std::uint32_t>> member_levels;    // [level][detail id] -> value id
        std::vector<std::vector<std::string>> level_values;       // [level][value id], sorted
    };

    SchemaDef schema_;
    std::string schema_digest_;
    std::string source_checkpoint_;
    std::shared_ptr<nlohmann::json> policy_record_;
    std::vector<DimensionDict> dims_;
    std::map<std::string, Cuboid> cuboids_;  // by label
    Cuboid detail_;             // fallback aggregate keyed by natural-value ids
    bool detail_is_base_ = true;  // detail coordinates coincide with the base cuboid
};

// Materializes the policy-selected cuboid set (always including apex and
// base). workers == 1 runs the serial reference path; any other value runs
// the OpenMP kernels (0 = library default thread count). The result is
// defined to be identical for every worker count.
Cube build_cube(const Warehouse& wh, const CubePolicy& policy, int workers = 0);

// Serialization under <root>/cube/<source checkpoint digest>/.
void save_cube(const Cube& cube, const std::filesystem::path& warehouse_root);
Cube open_cube(const std::filesystem::path& warehouse_root, const std::string& checkpoint_digest);

// Answers from the exactly matching materialized cuboid when present,
// otherwise aggregates up from the finest stored cells; results are
// identical to oracle_query either way.
ResultSet query(const Cube& cube, const QuerySpec& spec);

// --- navigation over query specs (inputs are never mutated) ---

QuerySpec roll_up(const SchemaDef& schema, const QuerySpec& spec, const std::string& dimension,
                  const std::string& hierarchy = "");
QuerySpec drill_down(const SchemaDef& schema, const QuerySpec& spec, const std::string& dimension,
                     const std::string& hierarchy = "");
QuerySpec slice(const SchemaDef& schema, const QuerySpec& spec, const std::string& dimension,
                const std::string& level, const std::string& member);
QuerySpec dice(const SchemaDef& schema, const QuerySpec& spec,
               const std::vector<FilterSpec>& filters);

}  // namespace tcmdw
