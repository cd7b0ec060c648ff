#pragma once
// Negative sample generation.
//
// Conventional negatives corrupt one entity slot of an observed triplet under
// the local closed-world assumption. Cross-KG negatives bridge the two graphs
// through conflicting relations: two relations from different graphs are
// mutually negative when they share no (subject, object) pair. Replacing a
// relation (or an entity pair) of an external triplet with a conflicting
// counterpart yields a triplet that tends to be false, and every candidate is
// still filtered against both existence sets.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "kgval/common.hpp"
#include "kgval/graph.hpp"

namespace kgval {

inline constexpr int kMaxSampleRetries = 100;

// Pairs present under relation r1 in g1 and under r2 in g2. Both graphs must
// be in the shared ID space.
inline std::vector<EntityPair> overlapping_pairs(const KnowledgeGraph& g1, RelationId r1,
                                                 const KnowledgeGraph& g2, RelationId r2) {
    std::vector<EntityPair> out;
    for (const EntityPair& p : g1.entity_pairs(r1)) {
        if (g2.has_pair(r2, p.first, p.second)) out.push_back(p);
    }
    return out;
}

// N(r) per relation over the shared relation ID space. Target relations are
// IDs [0, boundary); external relations are IDs [boundary, size).
struct NegativeRelationIndex {
    std::vector<std::vector<RelationId>> negatives;
    RelationId boundary = 0;

    const std::vector<RelationId>& of(RelationId r) const { return negatives.at(r); }
    bool is_external(RelationId r) const { return r >= boundary; }
};

// Computed once before training; emptiness of each pair intersection is
// tested by probing the smaller pair set into the larger one's hash set.
inline NegativeRelationIndex build_negative_relation_index(const KnowledgeGraph& g1,
                                                           const KnowledgeGraph& g2,
                                                           RelationId boundary) {
    const auto total = static_cast<RelationId>(g1.relations().size());
    NegativeRelationIndex idx;
    idx.boundary = boundary;
    idx.negatives.resize(total);
    for (RelationId r1 = 0; r1 < boundary; ++r1) {
        const auto& pairs1 = g1.entity_pairs(r1);
        for (RelationId r2 = boundary; r2 < total; ++r2) {
            const auto& pairs2 = g2.entity_pairs(r2);
            bool disjoint = true;
            if (pairs1.size() <= pairs2.size()) {
                for (const EntityPair& p : pairs1) {
                    if (g2.has_pair(r2, p.first, p.second)) {
                        disjoint = false;
                        break;
                    }
                }
            } else {
                for (const EntityPair& p : pairs2) {
                    if (g1.has_pair(r1, p.first, p.second)) {
                        disjoint = false;
                        break;
                    }
                }
            }
            if (disjoint) {
                idx.negatives[r1].push_back(r2);
                idx.negatives[r2].push_back(r1);
            }
        }
    }
    return idx;
}

namespace detail {

inline bool in_either(const Triplet& t, const KnowledgeGraph& g1, const KnowledgeGraph* g2) {
    return g1.contains(t) || (g2 && g2->contains(t));
}

}  // namespace detail

// k corruptions of t, each replacing the subject or the object (side uniform,
// replacement uniform over the shared entity vocabulary), none present in
// either graph. Throws SamplingError when the retry budget runs out.
inline std::vector<Triplet> corrupt_conventional(const Triplet& t, std::uint32_t k,
                                                 std::mt19937_64& rng, std::size_t num_entities,
                                                 const KnowledgeGraph& g1,
                                                 const KnowledgeGraph* g2 = nullptr) {
    std::uniform_int_distribution<EntityId> pick_entity(
        0, static_cast<EntityId>(num_entities - 1));
    std::uniform_int_distribution<int> pick_side(0, 1);
    std::vector<Triplet> out;
    out.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxSampleRetries; ++attempt) {
            Triplet cand = t;
            if (pick_side(rng) == 0) {
                cand.subject = pick_entity(rng);
            } else {
                cand.object = pick_entity(rng);
            }
            if (!detail::in_either(cand, g1, g2)) {
                out.push_back(cand);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw SamplingError("could not corrupt triplet after " +
                                std::to_string(kMaxSampleRetries) + " attempts");
        }
    }
    return out;
}

// (s2, r1, o2) with r1 drawn uniformly from N(r2). Cross-KG sampling is only
// defined for external triplets. Returns nullopt when no candidate survives
// the existence filter (the caller drops this category for the triplet).
inline std::optional<Triplet> replace_relation(const Triplet& t2, const NegativeRelationIndex& idx,
                                               std::mt19937_64& rng, const KnowledgeGraph& g1,
                                               const KnowledgeGraph& g2) {
    if (!idx.is_external(t2.relation)) {
        throw std::logic_error("cross-KG sampling requires an external triplet");
    }
    const auto& candidates = idx.of(t2.relation);
    if (candidates.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    for (int attempt = 0; attempt < kMaxSampleRetries; ++attempt) {
        Triplet cand{t2.subject, candidates[pick(rng)], t2.object};
        if (!detail::in_either(cand, g1, &g2)) return cand;
    }
    return std::nullopt;
}

// (s1, r2, o1) where (s1, o1) satisfies a relation conflicting with t2's.
// The conflicting relation is drawn uniformly among those with a nonempty
// pair set, then one of its pairs is drawn uniformly.
inline std::optional<Triplet> replace_entities(const Triplet& t2, const NegativeRelationIndex& idx,
                                               const KnowledgeGraph& g1, std::mt19937_64& rng,
                                               const KnowledgeGraph& g2) {
    if (!idx.is_external(t2.relation)) {
        throw std::logic_error("cross-KG sampling requires an external triplet");
    }
    std::vector<RelationId> eligible;
    for (RelationId r1 : idx.of(t2.relation)) {
        if (!g1.entity_pairs(r1).empty()) eligible.push_back(r1);
    }
    if (eligible.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick_rel(0, eligible.size() - 1);
    for (int attempt = 0; attempt < kMaxSampleRetries; ++attempt) {
        const RelationId r1 = eligible[pick_rel(rng)];
        const auto& pairs = g1.entity_pairs(r1);
        std::uniform_int_distribution<std::size_t> pick_pair(0, pairs.size() - 1);
        const EntityPair& p = pairs[pick_pair(rng)];
        Triplet cand{p.first, t2.relation, p.second};
        if (!detail::in_either(cand, g1, &g2)) return cand;
    }
    return std::nullopt;
}

// Negatives generated for one positive triplet.
struct NegativeBatch {
    std::vector<Triplet> conventional;
    std::vector<Triplet> relation_replaced;  // external positives only
    std::vector<Triplet> entity_replaced;    // external positives only
};

inline NegativeBatch generate_negatives(const Triplet& positive, bool external,
                                        std::uint32_t k_conventional, bool cross,
                                        const NegativeRelationIndex* idx, std::mt19937_64& rng,
                                        std::size_t num_entities, const KnowledgeGraph& g1,
                                        const KnowledgeGraph* g2) {
    NegativeBatch batch;
    batch.conventional = corrupt_conventional(positive, k_conventional, rng, num_entities, g1, g2);
    if (external && cross && idx) {
        if (auto r = replace_relation(positive, *idx, rng, g1, *g2)) {
            batch.relation_replaced.push_back(*r);
        }
        if (auto e = replace_entities(positive, *idx, g1, rng, *g2)) {
            batch.entity_replaced.push_back(*e);
        }
    }
    return batch;
}

}  // namespace kgval
