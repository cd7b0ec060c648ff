#pragma once
// Entity alignment between the target and external graphs.
//
// Overlapping entities are discovered by exact string matching on canonical
// names, optionally extended by one alias hop (acronyms / known aliases from
// an ontology table). Matched external entities are merged onto the target
// entity's ID, so aligned entities share one embedding slot by construction.
// The shared ID space is target-first: target entities keep their IDs,
// unmatched external entities are appended after them. Relations are never
// merged; external relations are appended after the target's.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgval/common.hpp"
#include "kgval/graph.hpp"

namespace kgval {

enum class EntityOrigin { target, external, shared };

// Symmetric alias groups. A string may belong to at most one group;
// an alias listed under two canonicals is a configuration error.
class AliasTable {
public:
    void add(const std::string& canonical, const std::string& alias) {
        if (canonical == alias) return;
        auto [it, inserted] = alias_to_canonical_.emplace(alias, canonical);
        if (!inserted && it->second != canonical) {
            throw ConfigError("alias '" + alias + "' maps to both '" + it->second +
                              "' and '" + canonical + "'");
        }
        if (inserted) groups_[canonical].push_back(alias);
    }

    // One alias hop in both directions: the canonical of s (if s is an alias)
    // and the aliases of s (if s is a canonical), in insertion order.
    std::vector<std::string> linked(const std::string& s) const {
        std::vector<std::string> out;
        if (auto it = alias_to_canonical_.find(s); it != alias_to_canonical_.end()) {
            out.push_back(it->second);
        }
        if (auto it = groups_.find(s); it != groups_.end()) {
            out.insert(out.end(), it->second.begin(), it->second.end());
        }
        return out;
    }

    bool empty() const { return alias_to_canonical_.empty(); }

private:
    std::unordered_map<std::string, std::string> alias_to_canonical_;
    std::unordered_map<std::string, std::vector<std::string>> groups_;
};

// Alias TSV: canonical\talias per line.
inline AliasTable load_alias_table(const std::string& path) {
    const std::string content = detail::read_file_bytes(path);
    AliasTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string_view line = std::string_view(content).substr(
            pos, eol == std::string_view::npos ? content.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected 2 tab-separated fields");
        }
        const std::string canonical(trim(line.substr(0, tab)));
        const std::string alias(trim(line.substr(tab + 1)));
        if (canonical.empty() || alias.empty()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": empty field");
        }
        table.add(canonical, alias);
    }
    return table;
}

// Total map from external entity IDs into the shared space, plus the shared
// vocabularies both graphs use after the merge.
struct AlignmentMap {
    std::vector<EntityId> entity_map;  // external entity ID -> shared entity ID
    std::size_t overlap_count = 0;

    Vocabulary shared_entities;   // target entities first, then unmatched external
    Vocabulary shared_relations;  // target relations first, then all external
    RelationId relation_offset = 0;
    std::size_t target_entity_count = 0;
    std::size_t target_relation_count = 0;
    std::vector<std::uint8_t> target_is_shared;  // per target entity ID

    EntityOrigin origin(EntityId shared_id) const {
        if (shared_id >= target_entity_count) return EntityOrigin::external;
        return target_is_shared[shared_id] ? EntityOrigin::shared : EntityOrigin::target;
    }

    RelationId map_external_relation(RelationId external_id) const {
        return external_id + relation_offset;
    }
};

// Exact string matching plus one alias hop. When overlap_fraction < 1, a
// seeded uniform subsample keeps exactly ceil(fraction * matches) of the
// matched pairs and demotes the rest to fresh IDs.
inline AlignmentMap align(const Vocabulary& target_entities, const Vocabulary& target_relations,
                          const Vocabulary& external_entities,
                          const Vocabulary& external_relations, const AliasTable& aliases = {},
                          double overlap_fraction = 1.0, std::uint64_t seed = 0) {
    if (overlap_fraction <= 0.0 || overlap_fraction > 1.0) {
        throw ConfigError("overlap fraction must be in (0, 1]");
    }

    AlignmentMap out;
    out.target_entity_count = target_entities.size();
    out.target_relation_count = target_relations.size();
    out.relation_offset = static_cast<RelationId>(target_relations.size());
    out.target_is_shared.assign(target_entities.size(), 0);

    const std::size_t n_ext = external_entities.size();
    std::vector<std::int64_t> match(n_ext, -1);
    std::vector<std::uint32_t> matched_ids;
    for (std::uint32_t e = 0; e < n_ext; ++e) {
        const std::string& name = external_entities.name(e);
        std::optional<std::uint32_t> hit = target_entities.find(name);
        if (!hit && !aliases.empty()) {
            for (const std::string& candidate : aliases.linked(name)) {
                if ((hit = target_entities.find(candidate))) break;
            }
        }
        if (hit) {
            match[e] = *hit;
            matched_ids.push_back(e);
        }
    }

    if (overlap_fraction < 1.0 && !matched_ids.empty()) {
        const auto keep = static_cast<std::size_t>(
            std::ceil(overlap_fraction * static_cast<double>(matched_ids.size())));
        std::mt19937_64 rng(derive_seed(seed, "overlap-subsample"));
        std::shuffle(matched_ids.begin(), matched_ids.end(), rng);
        for (std::size_t i = keep; i < matched_ids.size(); ++i) match[matched_ids[i]] = -1;
        matched_ids.resize(keep);
    }
    out.overlap_count = matched_ids.size();

    for (std::uint32_t id = 0; id < target_entities.size(); ++id) {
        out.shared_entities.append(target_entities.name(id));
    }
    out.entity_map.resize(n_ext);
    for (std::uint32_t e = 0; e < n_ext; ++e) {
        if (match[e] >= 0) {
            out.entity_map[e] = static_cast<EntityId>(match[e]);
            out.target_is_shared[static_cast<std::size_t>(match[e])] = 1;
        } else {
            out.entity_map[e] = out.shared_entities.append(external_entities.name(e));
        }
    }

    for (std::uint32_t r = 0; r < target_relations.size(); ++r) {
        out.shared_relations.append(target_relations.name(r));
    }
    for (std::uint32_t r = 0; r < external_relations.size(); ++r) {
        out.shared_relations.append(external_relations.name(r));
    }
    return out;
}

// Shared space for a run without an external graph.
inline AlignmentMap single_graph_space(const KnowledgeGraph& g1) {
    AlignmentMap out;
    out.target_entity_count = g1.entities().size();
    out.target_relation_count = g1.relations().size();
    out.relation_offset = static_cast<RelationId>(g1.relations().size());
    out.target_is_shared.assign(g1.entities().size(), 0);
    for (std::uint32_t id = 0; id < g1.entities().size(); ++id) {
        out.shared_entities.append(g1.entities().name(id));
    }
    for (std::uint32_t r = 0; r < g1.relations().size(); ++r) {
        out.shared_relations.append(g1.relations().name(r));
    }
    return out;
}

// Rewrites the external graph into the shared ID space and rebuilds indices.
inline KnowledgeGraph remap(const KnowledgeGraph& g2, const AlignmentMap& m) {
    if (m.entity_map.size() != g2.entities().size()) {
        throw std::logic_error("alignment map does not cover the external vocabulary");
    }
    std::vector<Triplet> remapped;
    remapped.reserve(g2.size());
    for (const Triplet& t : g2.triplets()) {
        remapped.push_back(Triplet{m.entity_map[t.subject], m.map_external_relation(t.relation),
                                   m.entity_map[t.object]});
    }
    return KnowledgeGraph(GraphTag::external, m.shared_entities, m.shared_relations, remapped);
}

// The target graph's IDs are already shared-space prefixes; this swaps in the
// shared vocabularies so its indices span the full relation range.
inline KnowledgeGraph lift(const KnowledgeGraph& g1, const AlignmentMap& m) {
    return KnowledgeGraph(GraphTag::target, m.shared_entities, m.shared_relations, g1.triplets());
}

}  // namespace kgval
