#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcmdw/schema.hpp"
#include "tcmdw/value.hpp"

namespace tcmdw {

// Key 0 is the reserved Unknown member present in every lookup table.
inline constexpr std::int64_t kUnknownKey = 0;
inline const std::string kUnknownText = "UNKNOWN";
inline const std::string kInferredText = "INFERRED";

struct DimensionMember {
    std::int64_t key = 0;
    Value natural;
    std::map<std::string, Value> attributes;       // includes the natural key attribute
    std::map<std::string, std::int64_t> parent_keys;  // parent table -> surrogate key
    bool inferred = false;
};

struct FactRow {
    std::vector<std::int64_t> dim_keys;   // aligned with fact.dimensions
    std::vector<Value> degenerate;        // aligned with fact.degenerate_keys
    std::vector<std::int64_t> measures;   // aligned with fact.measures
};

// Per-row result of append_facts: rows are accepted or rejected individually.
struct FactOutcome {
    bool accepted = false;
    std::string reason;   // ForeignKeyViolation | DomainViolation | MalformedRow
    std::string detail;
};

struct LineageRecord {
    std::string batch_id;
    std::string source_uri;
    std::string ruleset_digest;
    std::string started;    // RFC 3339 UTC
    std::string finished;
    std::int64_t rows_in = 0;
    std::int64_t rows_out = 0;
    std::int64_t rows_rejected = 0;
    std::int64_t rows_skipped = 0;
    std::int64_t inferred_members = 0;
};

// Conjunctive filter over resolved hierarchy levels; values are canonical
// strings.
struct LevelFilter {
    std::string dimension;
    std::string level;
    std::set<std::string> values;
};

std::string rfc3339_now();

// Persistent warehouse store. Dimension rows are type-1 upserts; fact rows
// are append-only and written through to disk as they are accepted. A single
// writer holds the .lock file; readers open checkpointed state.
class Warehouse {
public:
    static Warehouse init(const SchemaDef& schema, const std::filesystem::path& root);
    static Warehouse open(const std::filesystem::path& root, bool writable);

    Warehouse(Warehouse&&) noexcept = default;
    Warehouse& operator=(Warehouse&&) noexcept = default;
    Warehouse(const Warehouse&) = delete;
    Warehouse& operator=(const Warehouse&) = delete;
    ~Warehouse();

    const SchemaDef& schema() const { return schema_; }
    const std::filesystem::path& root() const { return root_; }

    // --- dimension members ---

    // Inserts or overwrites (type-1) the member named by `natural`. Missing
    // parents are created as inferred placeholders; parents not supplied at
    // all resolve to the Unknown member.
    std::int64_t upsert_member(const std::string& table, const Value& natural,
                               const std::map<std::string, Value>& attributes,
                               const std::map<std::string, Value>& parent_naturals = {},
                               bool inferred = false);

    std::optional<std::int64_t> find_member(const std::string& table, const std::string& natural_canonical) const;
    const DimensionMember& member(const std::string& table, std::int64_t key) const;
    const std::vector<DimensionMember>& members(const std::string& table) const;
    std::int64_t member_count(const std::string& table) const;
    std::vector<std::string> table_names() const;  // lookup tables, schema order
    std::int64_t inferred_member_count() const;

    // Members of a table whose attributes are fully derivable from a date
    // natural key are created on demand (the Dates table in the built-in
    // schema). Returns the member key.
    bool date_derivable(const std::string& table) const;
    std::int64_t ensure_date_member(const std::string& table, std::int64_t day);

    // --- facts ---

    std::vector<FactOutcome> append_facts(const std::vector<FactRow>& rows);
    std::int64_t fact_count() const { return static_cast<std::int64_t>(facts_.size()); }
    const std::vector<FactRow>& facts() const { return facts_; }

    // Canonical value of `level` for the base-table member `key` of the
    // fact's dim_index-th dimension, resolved through the snowflake chain.
    std::string level_value(int dim_index, std::int64_t member_key, const std::string& level) const;

    // Streams facts passing the predicate in insertion order. Throws
    // Error(UnknownLevel) when the predicate names an undeclared level.
    void scan_facts(const std::vector<LevelFilter>& predicate,
                    const std::function<void(const FactRow&)>& fn) const;

    // --- lineage ---

    bool has_batch(const std::string& batch_id) const;
    void record_lineage(const LineageRecord& record);  // Error(DuplicateBatch)
    const LineageRecord& get_lineage(const std::string& batch_id) const;  // Error(NotFound)
    const std::vector<LineageRecord>& lineage() const { return lineage_; }

    // --- durability ---

    // Flushes every table and writes the manifest; returns its SHA-256.
    std::string checkpoint();
    const std::string& last_checkpoint_digest() const { return checkpoint_digest_; }
    bool dirty() const { return dirty_; }

    static std::filesystem::path manifest_path(const std::filesystem::path& root);

private:
    Warehouse() = default;

    struct Table {
        std::vector<DimensionMember> rows;
        std::unordered_map<std::string, std::int64_t> by_natural;  // canonical -> key
    };

    struct ResolvedLevel {
        std::string table;
        std::string attribute;
        std::vector<std::string> path;  // tables from base to `table`, inclusive
    };

    struct LockHandle {
        std::filesystem::path path;
        ~LockHandle();
    };

    const LookupTableDef& table_def(const std::string& table) const;
    const DimensionDef& dimension_of_table(const std::string& table) const;
    Table& table_state(const std::string& table);
    const Table& table_state(const std::string& table) const;
    void resolve_schema();
    void write_member_line(std::ostream& out, const std::string& table, const DimensionMember& m) const;
    std::string fact_line(const FactRow& row) const;
    void open_fact_stream();
    void acquire_lock();

    SchemaDef schema_;
    std::filesystem::path root_;
    std::map<std::string, Table> tables_;
    std::vector<FactRow> facts_;
    std::vector<LineageRecord> lineage_;
    std::set<std::string> lineage_ids_;

    // per fact dimension: level name -> resolution
    std::vector<std::map<std::string, ResolvedLevel>> levels_;
    std::vector<std::string> base_tables_;  // per fact dimension

    std::unique_ptr<std::ofstream> fact_out_;
    std::unique_ptr<LockHandle> lock_;
    std::uint64_t fact_bytes_ = 0;
    bool writable_ = false;
    bool dirty_ = false;
    std::string checkpoint_digest_;
};

}  // namespace tcmdw
