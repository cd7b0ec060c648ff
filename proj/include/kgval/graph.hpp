#pragma once
// Triplet store: TSV ingestion, string interning, existence set and
// per-relation (subject, object) pair indices.
//
// Both graphs (target and external) use the same representation. After
// alignment the external graph is rewritten into the shared ID space; its
// vocabularies are then the shared ones and relation IDs are offset past the
// target's relations.

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <zlib.h>

#include "kgval/common.hpp"

namespace kgval {

struct Triplet {
    EntityId subject = 0;
    RelationId relation = 0;
    EntityId object = 0;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletHash {
    std::size_t operator()(const Triplet& t) const noexcept {
        std::uint64_t h = splitmix64(t.subject);
        h = splitmix64(h ^ t.relation);
        h = splitmix64(h ^ t.object);
        return static_cast<std::size_t>(h);
    }
};

using TripletSet = std::unordered_set<Triplet, TripletHash>;
using EntityPair = std::pair<EntityId, EntityId>;

inline std::uint64_t pack_pair(EntityId s, EntityId o) {
    return (static_cast<std::uint64_t>(s) << 32) | o;
}

enum class GraphTag { target, external };

// Interning string table. IDs are dense, assigned in first-occurrence order.
class Vocabulary {
public:
    // Returns the existing ID for a known name, otherwise appends.
    std::uint32_t intern(std::string_view name) {
        if (auto it = index_.find(name); it != index_.end()) return it->second;
        return append(std::string(name));
    }

    // Always appends a new ID. The name indexes to its first ID only, which
    // lets the shared relation table hold same-named relations from both
    // graphs without merging them (target occurrence wins lookups).
    std::uint32_t append(std::string name) {
        const auto id = static_cast<std::uint32_t>(names_.size());
        names_.push_back(std::move(name));
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<std::uint32_t> find(std::string_view name) const {
        if (auto it = index_.find(name); it != index_.end()) return it->second;
        return std::nullopt;
    }

    const std::string& name(std::uint32_t id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }

private:
    struct SvHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    struct SvEq {
        using is_transparent = void;
        bool operator()(std::string_view a, std::string_view b) const noexcept { return a == b; }
    };

    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t, SvHash, SvEq> index_;
};

struct TripletRow {
    std::string subject;
    std::string relation;
    std::string object;
};

// Immutable after construction; queries are read-only and thread-safe.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    KnowledgeGraph(GraphTag tag, Vocabulary entities, Vocabulary relations,
                   const std::vector<Triplet>& raw_triplets)
        : tag_(tag), entities_(std::move(entities)), relations_(std::move(relations)) {
        pairs_by_relation_.resize(relations_.size());
        pair_sets_.resize(relations_.size());
        triplets_.reserve(raw_triplets.size());
        for (const Triplet& t : raw_triplets) {
            if (t.subject >= entities_.size() || t.object >= entities_.size() ||
                t.relation >= relations_.size()) {
                throw std::logic_error("triplet references an ID outside the vocabulary");
            }
            if (!exists_.insert(t).second) {
                ++duplicates_dropped_;
                continue;
            }
            triplets_.push_back(t);
            pairs_by_relation_[t.relation].emplace_back(t.subject, t.object);
            pair_sets_[t.relation].insert(pack_pair(t.subject, t.object));
        }
        if (triplets_.empty()) throw DataError("graph has no triplets");
    }

    GraphTag tag() const { return tag_; }
    const Vocabulary& entities() const { return entities_; }
    const Vocabulary& relations() const { return relations_; }
    const std::vector<Triplet>& triplets() const { return triplets_; }
    std::size_t duplicates_dropped() const { return duplicates_dropped_; }

    bool contains(const Triplet& t) const { return exists_.contains(t); }

    bool has_pair(RelationId r, EntityId s, EntityId o) const {
        return r < pair_sets_.size() && pair_sets_[r].contains(pack_pair(s, o));
    }

    // (subject, object) pairs of triplets with relation r, in ingestion order.
    // Triplets are deduplicated, so each pair appears exactly once per relation.
    const std::vector<EntityPair>& entity_pairs(RelationId r) const {
        if (r >= relations_.size()) {
            throw DataError("unknown relation id " + std::to_string(r));
        }
        return pairs_by_relation_[r];
    }

    const std::unordered_set<std::uint64_t>& pair_set(RelationId r) const {
        if (r >= relations_.size()) {
            throw DataError("unknown relation id " + std::to_string(r));
        }
        return pair_sets_[r];
    }

    std::size_t size() const { return triplets_.size(); }

    std::string to_string(const Triplet& t) const {
        return entities_.name(t.subject) + "\t" + relations_.name(t.relation) + "\t" +
               entities_.name(t.object);
    }

private:
    GraphTag tag_ = GraphTag::target;
    Vocabulary entities_;
    Vocabulary relations_;
    std::vector<Triplet> triplets_;
    TripletSet exists_;
    std::vector<std::vector<EntityPair>> pairs_by_relation_;
    std::vector<std::unordered_set<std::uint64_t>> pair_sets_;
    std::size_t duplicates_dropped_ = 0;
};

namespace detail {

inline std::string read_file_bytes(const std::string& path) {
    if (path.size() > 3 && path.ends_with(".gz")) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (!gz) throw DataError("cannot open " + path);
        std::string out;
        char buf[1 << 16];
        int n = 0;
        while ((n = gzread(gz, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
        const bool bad = n < 0;
        gzclose(gz);
        if (bad) throw DataError("gzip read failed for " + path);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace detail

// Parses 3-column TSV content. Fields are trimmed of surrounding whitespace
// and kept case-sensitive; blank lines are skipped. LF and CRLF both work.
inline std::vector<TripletRow> parse_triplet_tsv(std::string_view content,
                                                 const std::string& origin) {
    std::vector<TripletRow> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string_view line = content.substr(
            pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;

        std::array<std::string_view, 3> fields;
        std::size_t field = 0;
        std::size_t start = 0;
        bool bad = false;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                if (field == 3) {
                    bad = true;
                    break;
                }
                fields[field++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (bad || field != 3) {
            throw DataError(origin + ":" + std::to_string(line_no) +
                            ": expected 3 tab-separated fields");
        }
        TripletRow row{std::string(trim(fields[0])), std::string(trim(fields[1])),
                       std::string(trim(fields[2]))};
        if (row.subject.empty() || row.relation.empty() || row.object.empty()) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": empty field");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Builds a graph from in-memory rows. First occurrence defines IDs, so the
// same rows always produce the same graph.
inline KnowledgeGraph ingest_rows(const std::vector<TripletRow>& rows, GraphTag tag) {
    if (rows.empty()) throw DataError("no triplets to ingest");
    Vocabulary entities;
    Vocabulary relations;
    std::vector<Triplet> triplets;
    triplets.reserve(rows.size());
    for (const TripletRow& row : rows) {
        Triplet t;
        t.subject = entities.intern(row.subject);
        t.relation = relations.intern(row.relation);
        t.object = entities.intern(row.object);
        triplets.push_back(t);
    }
    return KnowledgeGraph(tag, std::move(entities), std::move(relations), triplets);
}

// Loads a triplet TSV (plain or .gz). Duplicate lines are dropped; the count
// is kept on the graph for reporting.
inline KnowledgeGraph ingest(const std::string& path, GraphTag tag) {
    const std::string content = detail::read_file_bytes(path);
    const std::vector<TripletRow> rows = parse_triplet_tsv(content, path);
    if (rows.empty()) throw DataError(path + ": empty graph file");
    return ingest_rows(rows, tag);
}

inline bool contains(const KnowledgeGraph& g, const Triplet& t) { return g.contains(t); }

inline const std::vector<EntityPair>& entity_pairs(const KnowledgeGraph& g, RelationId r) {
    return g.entity_pairs(r);
}

}  // namespace kgval
