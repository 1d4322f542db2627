#include "tcmdw/warehouse.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <ctime>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tcmdw/digest.hpp"
#include "tcmdw/errors.hpp"

namespace tcmdw {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string rfc3339_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kLineageName = "lineage.ndjson";
constexpr const char* kLockName = ".lock";

std::string dim_file_name(const std::string& table) { return "dim_" + table + ".ndjson"; }
std::string fact_file_name(const std::string& fact) { return "fact_" + fact + ".ndjson"; }

void atomic_write(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

json lineage_to_json(const LineageRecord& r) {
    return json{{"batch_id", r.batch_id},
                {"source_uri", r.source_uri},
                {"ruleset_digest", r.ruleset_digest},
                {"started", r.started},
                {"finished", r.finished},
                {"rows_in", r.rows_in},
                {"rows_out", r.rows_out},
                {"rows_rejected", r.rows_rejected},
                {"rows_skipped", r.rows_skipped},
                {"inferred_members", r.inferred_members}};
}

LineageRecord lineage_from_json(const json& j) {
    LineageRecord r;
    r.batch_id = j.at("batch_id").get<std::string>();
    r.source_uri = j.at("source_uri").get<std::string>();
    r.ruleset_digest = j.at("ruleset_digest").get<std::string>();
    r.started = j.at("started").get<std::string>();
    r.finished = j.at("finished").get<std::string>();
    r.rows_in = j.at("rows_in").get<std::int64_t>();
    r.rows_out = j.at("rows_out").get<std::int64_t>();
    r.rows_rejected = j.at("rows_rejected").get<std::int64_t>();
    r.rows_skipped = j.at("rows_skipped").get<std::int64_t>();
    r.inferred_members = j.at("inferred_members").get<std::int64_t>();
    return r;
}

}  // namespace

Warehouse::LockHandle::~LockHandle() {
    std::error_code ec;
    fs::remove(path, ec);
}

Warehouse::~Warehouse() {
    if (fact_out_) fact_out_->flush();
}

void Warehouse::acquire_lock() {
    const fs::path lock = root_ / kLockName;
    int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw Error(ErrorCode::WarehouseLocked,
                    "writer lock held for warehouse at " + root_.string());
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
    lock_ = std::make_unique<LockHandle>();
    lock_->path = lock;
}

void Warehouse::resolve_schema() {
    levels_.clear();
    base_tables_.clear();
    for (const auto& dim_name : schema_.fact.dimensions) {
        const auto* dim = schema_.find_dimension(dim_name);
        if (!dim) throw Error(ErrorCode::InvalidSchema, "unresolved dimension " + dim_name);
        base_tables_.push_back(base_table(*dim).name);
        std::map<std::string, ResolvedLevel> resolved;
        for (const auto& binding : dimension_levels(*dim)) {
            ResolvedLevel rl;
            rl.table = binding.table;
            rl.attribute = binding.attribute;
            for (const auto* t : path_from_base(*dim, binding.table)) rl.path.push_back(t->name);
            resolved[binding.level] = std::move(rl);
        }
        levels_.push_back(std::move(resolved));
    }
}

const LookupTableDef& Warehouse::table_def(const std::string& table) const {
    for (const auto& dim : schema_.dimensions) {
        if (const auto* t = dim.find_table(table)) return *t;
    }
    throw Error(ErrorCode::UnknownTable, "no lookup table named '" + table + "'");
}

const DimensionDef& Warehouse::dimension_of_table(const std::string& table) const {
    for (const auto& dim : schema_.dimensions) {
        if (dim.find_table(table)) return dim;
    }
    throw Error(ErrorCode::UnknownTable, "no lookup table named '" + table + "'");
}

Warehouse::Table& Warehouse::table_state(const std::string& table) {
    auto it = tables_.find(table);
    if (it == tables_.end()) throw Error(ErrorCode::UnknownTable, "no lookup table named '" + table + "'");
    return it->second;
}

const Warehouse::Table& Warehouse::table_state(const std::string& table) const {
    auto it = tables_.find(table);
    if (it == tables_.end()) throw Error(ErrorCode::UnknownTable, "no lookup table named '" + table + "'");
    return it->second;
}

std::vector<std::string> Warehouse::table_names() const {
    std::vector<std::string> out;
    for (const auto& dim : schema_.dimensions) {
        for (const auto& t : dim.tables) out.push_back(t.name);
    }
    return out;
}

// ------------------------------------------------------------------- init

Warehouse Warehouse::init(const SchemaDef& schema, const fs::path& root) {
    const auto report = validate_schema(schema);
    if (!report.valid()) {
        std::string detail;
        for (const auto& issue : report.issues) {
            if (issue.severity == Severity::Error) {
                detail += (detail.empty() ? "" : "; ") + issue.code + " at " + issue.location;
            }
        }
        throw Error(ErrorCode::InvalidSchema, detail);
    }
    if (fs::exists(root) && !fs::is_empty(root)) {
        throw Error(ErrorCode::PathNotEmpty, root.string() + " is not empty");
    }
    fs::create_directories(root);

    Warehouse wh;
    wh.schema_ = schema;
    wh.root_ = root;
    wh.writable_ = true;
    wh.acquire_lock();
    wh.resolve_schema();

    for (const auto& dim : schema.dimensions) {
        for (const auto& t : dim.tables) {
            DimensionMember unknown;
            unknown.key = kUnknownKey;
            unknown.natural = kUnknownText;
            for (const auto& attr : t.attributes) unknown.attributes[attr.name] = kUnknownText;
            for (const auto& p : t.parents) unknown.parent_keys[p] = kUnknownKey;
            Table state;
            state.rows.push_back(std::move(unknown));
            state.by_natural[kUnknownText] = kUnknownKey;
            wh.tables_.emplace(t.name, std::move(state));
        }
    }
    wh.open_fact_stream();
    wh.checkpoint();
    return wh;
}

void Warehouse::open_fact_stream() {
    const fs::path path = root_ / fact_file_name(schema_.fact.name);
    fact_out_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*fact_out_) throw Error(ErrorCode::IoError, "cannot open " + path.string());
}

// ---------------------------------------------------------------- members

std::int64_t Warehouse::upsert_member(const std::string& table, const Value& natural,
                                      const std::map<std::string, Value>& attributes,
                                      const std::map<std::string, Value>& parent_naturals,
                                      bool inferred) {
    const auto& def = table_def(table);
    auto& state = table_state(table);

    const std::string natural_c = canonical(natural);
    if (natural_c == kUnknownText) {
        throw Error(ErrorCode::BadValue, "'" + kUnknownText + "' is the reserved member key");
    }

    std::map<std::string, Value> merged = attributes;
    merged[def.natural_key] = natural;
    for (const auto& [name, value] : merged) {
        if (!def.find_attribute(name)) {
            throw Error(ErrorCode::BadValue, "undeclared attribute '" + name + "' for table " + table);
        }
        (void)value;
    }
    for (const auto& attr : def.attributes) {
        if (!merged.count(attr.name)) {
            throw Error(ErrorCode::MissingAttribute,
                        "attribute '" + attr.name + "' missing for table " + table);
        }
    }

    std::map<std::string, std::int64_t> parent_keys;
    for (const auto& parent : def.parents) {
        auto it = parent_naturals.find(parent);
        if (it == parent_naturals.end()) {
            parent_keys[parent] = kUnknownKey;
            continue;
        }
        const std::string parent_c = canonical(it->second);
        if (auto existing = find_member(parent, parent_c)) {
            parent_keys[parent] = *existing;
            continue;
        }
        // late-arriving parent: create a placeholder to keep the chain intact
        const auto& parent_def = table_def(parent);
        std::map<std::string, Value> placeholder;
        bool derivable = date_derivable(parent);
        std::int64_t day = 0;
        if (derivable) {
            if (const auto* i = std::get_if<std::int64_t>(&it->second); i && valid_yyyymmdd(*i)) {
                day = *i;
            } else {
                derivable = false;
            }
        }
        if (derivable) {
            parent_keys[parent] = ensure_date_member(parent, day);
        } else {
            for (const auto& attr : parent_def.attributes) {
                if (attr.name != parent_def.natural_key) placeholder[attr.name] = kInferredText;
            }
            parent_keys[parent] = upsert_member(parent, it->second, placeholder, {}, true);
        }
    }

    dirty_ = true;
    auto it = state.by_natural.find(natural_c);
    if (it != state.by_natural.end()) {
        auto& row = state.rows[static_cast<std::size_t>(it->second)];
        row.attributes = std::move(merged);
        row.parent_keys = std::move(parent_keys);
        row.inferred = inferred;
        return it->second;
    }
    DimensionMember row;
    row.key = static_cast<std::int64_t>(state.rows.size());
    row.natural = natural;
    row.attributes = std::move(merged);
    row.parent_keys = std::move(parent_keys);
    row.inferred = inferred;
    state.by_natural[natural_c] = row.key;
    state.rows.push_back(std::move(row));
    return state.rows.back().key;
}

std::optional<std::int64_t> Warehouse::find_member(const std::string& table,
                                                   const std::string& natural_canonical) const {
    const auto& state = table_state(table);
    auto it = state.by_natural.find(natural_canonical);
    if (it == state.by_natural.end()) return std::nullopt;
    return it->second;
}

const DimensionMember& Warehouse::member(const std::string& table, std::int64_t key) const {
    const auto& state = table_state(table);
    if (key < 0 || key >= static_cast<std::int64_t>(state.rows.size())) {
        throw Error(ErrorCode::BadValue, "no member " + std::to_string(key) + " in " + table);
    }
    return state.rows[static_cast<std::size_t>(key)];
}

const std::vector<DimensionMember>& Warehouse::members(const std::string& table) const {
    return table_state(table).rows;
}

std::int64_t Warehouse::member_count(const std::string& table) const {
    return static_cast<std::int64_t>(table_state(table).rows.size());
}

std::int64_t Warehouse::inferred_member_count() const {
    std::int64_t n = 0;
    for (const auto& [name, state] : tables_) {
        (void)name;
        for (const auto& row : state.rows) {
            if (row.inferred) ++n;
        }
    }
    return n;
}

bool Warehouse::date_derivable(const std::string& table) const {
    const auto& def = table_def(table);
    const auto* key_attr = def.find_attribute(def.natural_key);
    if (!key_attr || key_attr->kind != ValueKind::Date) return false;
    for (const auto& attr : def.attributes) {
        if (attr.name == def.natural_key) continue;
        if (attr.name != "month" && attr.name != "quarter" && attr.name != "year") return false;
    }
    return true;
}

std::int64_t Warehouse::ensure_date_member(const std::string& table, std::int64_t day) {
    if (!valid_yyyymmdd(day)) {
        throw Error(ErrorCode::BadValue, "not a yyyymmdd date: " + std::to_string(day));
    }
    if (auto key = find_member(table, std::to_string(day))) return *key;
    const auto& def = table_def(table);
    std::map<std::string, Value> attrs;
    for (const auto& attr : def.attributes) {
        if (attr.name == def.natural_key) continue;
        if (attr.name == "month") attrs["month"] = month_of(day);
        else if (attr.name == "quarter") attrs["quarter"] = quarter_of(day);
        else if (attr.name == "year") attrs["year"] = year_of(day);
    }
    return upsert_member(table, day, attrs);
}

// ------------------------------------------------------------------ facts

std::string Warehouse::fact_line(const FactRow& row) const {
    ordered_json j;
    ordered_json keys;
    for (std::size_t d = 0; d < schema_.fact.dimensions.size(); ++d) {
        keys[schema_.fact.dimensions[d]] = row.dim_keys[d];
    }
    j["_keys"] = std::move(keys);
    for (std::size_t k = 0; k < schema_.fact.degenerate_keys.size(); ++k) {
        j[schema_.fact.degenerate_keys[k].name] = value_to_json(row.degenerate[k]);
    }
    for (std::size_t m = 0; m < schema_.fact.measures.size(); ++m) {
        j[schema_.fact.measures[m].name] = row.measures[m];
    }
    return j.dump();
}

std::vector<FactOutcome> Warehouse::append_facts(const std::vector<FactRow>& rows) {
    if (!writable_ || !fact_out_) {
        throw Error(ErrorCode::IoError, "warehouse not open for writing");
    }
    std::vector<FactOutcome> outcomes;
    outcomes.reserve(rows.size());
    for (const auto& row : rows) {
        FactOutcome outcome;
        if (row.dim_keys.size() != schema_.fact.dimensions.size() ||
            row.degenerate.size() != schema_.fact.degenerate_keys.size() ||
            row.measures.size() != schema_.fact.measures.size()) {
            outcome.reason = "MalformedRow";
            outcome.detail = "field counts do not match the fact definition";
            outcomes.push_back(std::move(outcome));
            continue;
        }
        bool ok = true;
        for (std::size_t d = 0; d < row.dim_keys.size() && ok; ++d) {
            const auto& state = table_state(base_tables_[d]);
            if (row.dim_keys[d] < 0 || row.dim_keys[d] >= static_cast<std::int64_t>(state.rows.size())) {
                outcome.reason = "ForeignKeyViolation";
                outcome.detail = schema_.fact.dimensions[d] + " key " + std::to_string(row.dim_keys[d]) +
                                 " does not exist";
                ok = false;
            }
        }
        for (std::size_t m = 0; m < row.measures.size() && ok; ++m) {
            if (row.measures[m] < schema_.fact.measures[m].min) {
                outcome.reason = "DomainViolation";
                outcome.detail = schema_.fact.measures[m].name + " = " + std::to_string(row.measures[m]) +
                                 " below minimum " + std::to_string(schema_.fact.measures[m].min);
                ok = false;
            }
        }
        if (!ok) {
            outcomes.push_back(std::move(outcome));
            continue;
        }
        const std::string line = fact_line(row) + "\n";
        *fact_out_ << line;
        fact_bytes_ += line.size();
        facts_.push_back(row);
        dirty_ = true;
        outcome.accepted = true;
        outcomes.push_back(std::move(outcome));
    }
    fact_out_->flush();
    return outcomes;
}

std::string Warehouse::level_value(int dim_index, std::int64_t member_key,
                                   const std::string& level) const {
    const auto& resolved = levels_.at(static_cast<std::size_t>(dim_index));
    auto it = resolved.find(level);
    if (it == resolved.end()) {
        throw Error(ErrorCode::UnknownLevel,
                    "no level '" + level + "' in dimension " +
                        schema_.fact.dimensions[static_cast<std::size_t>(dim_index)]);
    }
    const auto& rl = it->second;
    const DimensionMember* m = &member(rl.path.front(), member_key);
    for (std::size_t step = 1; step < rl.path.size(); ++step) {
        const auto pk = m->parent_keys.count(rl.path[step]) ? m->parent_keys.at(rl.path[step]) : kUnknownKey;
        m = &member(rl.path[step], pk);
    }
    return canonical(m->attributes.at(rl.attribute));
}

void Warehouse::scan_facts(const std::vector<LevelFilter>& predicate,
                           const std::function<void(const FactRow&)>& fn) const {
    struct Bound {
        int dim;
        const std::string* level;
        const std::set<std::string>* values;
    };
    std::vector<Bound> bound;
    for (const auto& filter : predicate) {
        const int d = schema_.fact.dimension_index(filter.dimension);
        if (d < 0) {
            throw Error(ErrorCode::UnknownDimension, "no dimension '" + filter.dimension + "'");
        }
        if (!levels_[static_cast<std::size_t>(d)].count(filter.level)) {
            throw Error(ErrorCode::UnknownLevel,
                        "no level '" + filter.level + "' in dimension " + filter.dimension);
        }
        bound.push_back({d, &filter.level, &filter.values});
    }
    for (const auto& row : facts_) {
        bool pass = true;
        for (const auto& b : bound) {
            const std::string v = level_value(b.dim, row.dim_keys[static_cast<std::size_t>(b.dim)], *b.level);
            if (!b.values->count(v)) {
                pass = false;
                break;
            }
        }
        if (pass) fn(row);
    }
}

// ---------------------------------------------------------------- lineage

bool Warehouse::has_batch(const std::string& batch_id) const { return lineage_ids_.count(batch_id) > 0; }

void Warehouse::record_lineage(const LineageRecord& record) {
    if (record.rows_in != record.rows_out + record.rows_rejected + record.rows_skipped) {
        throw Error(ErrorCode::BadValue, "lineage totals do not add up for batch " + record.batch_id);
    }
    if (!lineage_ids_.insert(record.batch_id).second) {
        throw Error(ErrorCode::DuplicateBatch, "batch '" + record.batch_id + "' already recorded");
    }
    lineage_.push_back(record);
    dirty_ = true;
}

const LineageRecord& Warehouse::get_lineage(const std::string& batch_id) const {
    for (const auto& r : lineage_) {
        if (r.batch_id == batch_id) return r;
    }
    throw Error(ErrorCode::NotFound, "no lineage for batch '" + batch_id + "'");
}

// ------------------------------------------------------------- durability

void Warehouse::write_member_line(std::ostream& out, const std::string& table,
                                  const DimensionMember& m) const {
    const auto& def = table_def(table);
    ordered_json j;
    j["_key"] = m.key;
    j["_inferred"] = m.inferred;
    if (!def.parents.empty()) {
        ordered_json parents;
        for (const auto& p : def.parents) {
            parents[p] = m.parent_keys.count(p) ? m.parent_keys.at(p) : kUnknownKey;
        }
        j["_parents"] = std::move(parents);
    }
    for (const auto& attr : def.attributes) {
        j[attr.name] = value_to_json(m.attributes.at(attr.name));
    }
    out << j.dump() << "\n";
}

std::filesystem::path Warehouse::manifest_path(const fs::path& root) { return root / kManifestName; }

std::string Warehouse::checkpoint() {
    if (!writable_) throw Error(ErrorCode::IoError, "warehouse not open for writing");
    fact_out_->flush();

    json files;
    for (const auto& dim : schema_.dimensions) {
        for (const auto& t : dim.tables) {
            std::ostringstream content;
            for (const auto& row : tables_.at(t.name).rows) write_member_line(content, t.name, row);
            const std::string body = content.str();
            atomic_write(root_ / dim_file_name(t.name), body);
            files[dim_file_name(t.name)] = {{"bytes", body.size()}, {"sha256", sha256_hex(body)}};
        }
    }
    {
        std::ostringstream content;
        for (const auto& r : lineage_) content << lineage_to_json(r).dump() << "\n";
        const std::string body = content.str();
        atomic_write(root_ / kLineageName, body);
        files[kLineageName] = {{"bytes", body.size()}, {"sha256", sha256_hex(body)}};
    }
    const std::string fact_name = fact_file_name(schema_.fact.name);
    files[fact_name] = {{"bytes", fact_bytes_},
                        {"sha256", sha256_file_prefix(root_ / fact_name, fact_bytes_)}};

    json counters;
    for (const auto& [name, state] : tables_) counters[name] = state.rows.size();

    json manifest;
    manifest["engine"] = "tcmdw";
    manifest["format_version"] = 1;
    manifest["schema"] = json::parse(schema_to_json(schema_).dump());
    manifest["schema_digest"] = schema_digest(schema_);
    manifest["counters"] = std::move(counters);
    manifest["fact_count"] = facts_.size();
    manifest["files"] = std::move(files);

    atomic_write(manifest_path(root_), manifest.dump(2) + "\n");
    checkpoint_digest_ = sha256_file(manifest_path(root_));
    dirty_ = false;
    return checkpoint_digest_;
}

Warehouse Warehouse::open(const fs::path& root, bool writable) {
    const fs::path mpath = manifest_path(root);
    if (!fs::exists(mpath)) {
        throw Error(ErrorCode::CorruptManifest, "no manifest at " + mpath.string());
    }
    json manifest;
    try {
        std::ifstream in(mpath, std::ios::binary);
        manifest = json::parse(in);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::CorruptManifest, e.what());
    }

    Warehouse wh;
    wh.root_ = root;
    try {
        wh.schema_ = parse_schema(manifest.at("schema").dump());
        if (manifest.at("schema_digest").get<std::string>() != schema_digest(wh.schema_)) {
            throw Error(ErrorCode::CorruptManifest, "schema digest mismatch");
        }
        if (manifest.at("engine").get<std::string>() != "tcmdw") {
            throw Error(ErrorCode::CorruptManifest, "not a tcmdw warehouse");
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::CorruptManifest, e.what());
    }
    wh.resolve_schema();

    const auto& files = manifest.at("files");
    auto verify = [&](const std::string& name, bool prefix) -> std::uint64_t {
        if (!files.contains(name)) {
            throw Error(ErrorCode::CorruptManifest, "manifest misses file entry " + name);
        }
        const auto bytes = files.at(name).at("bytes").get<std::uint64_t>();
        const auto want = files.at(name).at("sha256").get<std::string>();
        const std::string got = prefix ? sha256_file_prefix(root / name, bytes) : sha256_file(root / name);
        if (got != want) {
            throw Error(ErrorCode::DigestMismatch, name + " digest mismatch");
        }
        if (!prefix && fs::file_size(root / name) != bytes) {
            throw Error(ErrorCode::DigestMismatch, name + " size mismatch");
        }
        return bytes;
    };

    for (const auto& dim : wh.schema_.dimensions) {
        for (const auto& t : dim.tables) {
            verify(dim_file_name(t.name), false);
            Table state;
            std::ifstream in(root / dim_file_name(t.name), std::ios::binary);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json j;
                try {
                    j = json::parse(line);
                } catch (const std::exception& e) {
                    throw Error(ErrorCode::CorruptManifest, std::string("bad member row: ") + e.what());
                }
                DimensionMember m;
                m.key = j.at("_key").get<std::int64_t>();
                m.inferred = j.at("_inferred").get<bool>();
                if (j.contains("_parents")) {
                    for (auto it = j["_parents"].begin(); it != j["_parents"].end(); ++it) {
                        m.parent_keys[it.key()] = it.value().get<std::int64_t>();
                    }
                }
                for (const auto& attr : t.attributes) {
                    m.attributes[attr.name] = value_from_json(attr.kind, j.at(attr.name));
                }
                m.natural = m.attributes.at(t.natural_key);
                if (m.key != static_cast<std::int64_t>(state.rows.size())) {
                    throw Error(ErrorCode::CorruptManifest, "non-dense keys in " + t.name);
                }
                if (m.key != kUnknownKey) {
                    state.by_natural[canonical(m.natural)] = m.key;
                } else {
                    state.by_natural[kUnknownText] = kUnknownKey;
                }
                state.rows.push_back(std::move(m));
            }
            const auto counted = manifest.at("counters").at(t.name).get<std::size_t>();
            if (counted != state.rows.size()) {
                throw Error(ErrorCode::CorruptManifest, "counter mismatch for " + t.name);
            }
            wh.tables_.emplace(t.name, std::move(state));
        }
    }

    const std::string fact_name = fact_file_name(wh.schema_.fact.name);
    wh.fact_bytes_ = verify(fact_name, true);
    {
        std::ifstream in(root / fact_name, std::ios::binary);
        std::string buffer(wh.fact_bytes_, '\0');
        in.read(buffer.data(), static_cast<std::streamsize>(wh.fact_bytes_));
        std::istringstream stream(buffer);
        std::string line;
        while (std::getline(stream, line)) {
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const std::exception& e) {
                throw Error(ErrorCode::CorruptManifest, std::string("bad fact row: ") + e.what());
            }
            FactRow row;
            for (const auto& d : wh.schema_.fact.dimensions) {
                row.dim_keys.push_back(j.at("_keys").at(d).get<std::int64_t>());
            }
            for (const auto& k : wh.schema_.fact.degenerate_keys) {
                row.degenerate.push_back(value_from_json(k.kind, j.at(k.name)));
            }
            for (const auto& m : wh.schema_.fact.measures) {
                row.measures.push_back(j.at(m.name).get<std::int64_t>());
            }
            wh.facts_.push_back(std::move(row));
        }
        if (wh.facts_.size() != manifest.at("fact_count").get<std::size_t>()) {
            throw Error(ErrorCode::CorruptManifest, "fact count mismatch");
        }
    }

    verify(kLineageName, false);
    {
        std::ifstream in(root / kLineageName, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                auto record = lineage_from_json(json::parse(line));
                wh.lineage_ids_.insert(record.batch_id);
                wh.lineage_.push_back(std::move(record));
            } catch (const std::exception& e) {
                throw Error(ErrorCode::CorruptManifest, std::string("bad lineage row: ") + e.what());
            }
        }
    }

    wh.checkpoint_digest_ = sha256_file(mpath);
    if (writable) {
        wh.writable_ = true;
        wh.acquire_lock();
        // drop any rows appended after the last checkpoint
        if (fs::file_size(root / fact_name) > wh.fact_bytes_) {
            fs::resize_file(root / fact_name, wh.fact_bytes_);
        }
        wh.open_fact_stream();
    }
    return wh;
}

}  // namespace tcmdw
