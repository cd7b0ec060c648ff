#pragma once
// Embedding parameter storage, score functions and their analytic gradients.
//
// Kinds:
//   DistMult  phi = <e_s, r, e_o>
//   ComplEx   phi = Re(<e_s, r, conj(e_o)>), vectors split as [re | im]
//   SimplE    phi = ((h_s, r, t_o) + (h_o, r_inv, t_s)) / 2,
//             entities split as [head | tail], relations as [r | r_inv]
//   TransE    phi = -|e_s + r - e_o|_2 (baseline; trained with margin loss)
//
// All parameters live in two flat double arrays (entities, relations) with a
// fixed per-slot width, so a checkpoint round-trips bit-exactly. Aligned
// entities share one slot because alignment merged their IDs.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgval/common.hpp"
#include "kgval/graph.hpp"

namespace kgval {

enum class ModelKind : std::uint8_t { DistMult = 0, ComplEx = 1, SimplE = 2, TransE = 3 };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::DistMult: return "distmult";
        case ModelKind::ComplEx: return "complex";
        case ModelKind::SimplE: return "simple";
        case ModelKind::TransE: return "transe";
    }
    return "unknown";
}

inline ModelKind model_kind_from_name(const std::string& name) {
    if (name == "distmult") return ModelKind::DistMult;
    if (name == "complex") return ModelKind::ComplEx;
    if (name == "simple") return ModelKind::SimplE;
    if (name == "transe") return ModelKind::TransE;
    throw ConfigError("unknown model kind '" + name + "'");
}

// Confidence weighting requires a multiplicative score function; the TransE
// baseline is excluded.
inline bool is_multiplicative(ModelKind k) { return k != ModelKind::TransE; }

inline std::size_t entity_width(ModelKind k, std::uint32_t dim) {
    return (k == ModelKind::ComplEx || k == ModelKind::SimplE) ? 2u * dim : dim;
}

inline std::size_t relation_width(ModelKind k, std::uint32_t dim) {
    return (k == ModelKind::ComplEx || k == ModelKind::SimplE) ? 2u * dim : dim;
}

// Sparse gradient accumulator. Slots appear in first-touch order and adds
// happen in traversal order, so a fixed batch order gives fixed sums.
class GradientBuffer {
public:
    std::span<double> entity(EntityId id, std::size_t width) {
        return slot(entity_key(id), width);
    }
    std::span<double> relation(RelationId id, std::size_t width) {
        return slot(relation_key(id), width);
    }

    std::span<const double> find_entity(EntityId id) const { return find(entity_key(id)); }
    std::span<const double> find_relation(RelationId id) const { return find(relation_key(id)); }

    struct Entry {
        bool is_relation;
        std::uint32_t id;
        std::span<const double> grad;
    };

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t i = 0; i < order_.size(); ++i) {
            const std::uint64_t key = order_[i];
            fn(Entry{(key >> 32) != 0, static_cast<std::uint32_t>(key & 0xffffffffu),
                     std::span<const double>(grads_[i])});
        }
    }

    std::size_t touched() const { return order_.size(); }
    bool empty() const { return order_.empty(); }

    void clear() {
        pos_.clear();
        order_.clear();
        grads_.clear();
    }

private:
    static std::uint64_t entity_key(EntityId id) { return id; }
    static std::uint64_t relation_key(RelationId id) { return (1ull << 32) | id; }

    std::span<double> slot(std::uint64_t key, std::size_t width) {
        auto [it, inserted] = pos_.emplace(key, order_.size());
        if (inserted) {
            order_.push_back(key);
            grads_.emplace_back(width, 0.0);
        }
        return grads_[it->second];
    }

    std::span<const double> find(std::uint64_t key) const {
        if (auto it = pos_.find(key); it != pos_.end()) return grads_[it->second];
        return {};
    }

    std::unordered_map<std::uint64_t, std::size_t> pos_;
    std::vector<std::uint64_t> order_;
    std::vector<std::vector<double>> grads_;

    friend class AdamOptimizer;
};

class EmbeddingModel {
public:
    // Parameters are drawn i.i.d. uniform on [-6/sqrt(d), 6/sqrt(d)],
    // entities first, slot-major, so the layout is seed-deterministic.
    EmbeddingModel(ModelKind kind, std::uint32_t dim, std::size_t num_entities,
                   std::size_t num_relations, std::uint64_t seed)
        : kind_(kind), dim_(dim), num_entities_(num_entities), num_relations_(num_relations),
          seed_(seed) {
        if (dim == 0) throw ConfigError("embedding dimension must be positive");
        if (num_entities == 0 || num_relations == 0) {
            throw ConfigError("model needs at least one entity and one relation");
        }
        entity_params_.resize(num_entities * entity_width(kind, dim));
        relation_params_.resize(num_relations * relation_width(kind, dim));
        const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
        std::mt19937_64 rng(derive_seed(seed, "model-init"));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        for (double& v : entity_params_) v = uniform(rng);
        for (double& v : relation_params_) v = uniform(rng);
    }

    ModelKind kind() const { return kind_; }
    std::uint32_t dim() const { return dim_; }
    std::size_t num_entities() const { return num_entities_; }
    std::size_t num_relations() const { return num_relations_; }
    std::uint64_t seed() const { return seed_; }

    std::size_t entity_stride() const { return entity_width(kind_, dim_); }
    std::size_t relation_stride() const { return relation_width(kind_, dim_); }

    std::span<double> entity(EntityId id) {
        return {entity_params_.data() + id * entity_stride(), entity_stride()};
    }
    std::span<const double> entity(EntityId id) const {
        return {entity_params_.data() + id * entity_stride(), entity_stride()};
    }
    std::span<double> relation(RelationId id) {
        return {relation_params_.data() + id * relation_stride(), relation_stride()};
    }
    std::span<const double> relation(RelationId id) const {
        return {relation_params_.data() + id * relation_stride(), relation_stride()};
    }

    std::vector<double>& entity_params() { return entity_params_; }
    const std::vector<double>& entity_params() const { return entity_params_; }
    std::vector<double>& relation_params() { return relation_params_; }
    const std::vector<double>& relation_params() const { return relation_params_; }

    double score(const Triplet& t) const {
        const auto s = entity(t.subject);
        const auto r = relation(t.relation);
        const auto o = entity(t.object);
        const std::uint32_t d = dim_;
        double acc = 0.0;
        switch (kind_) {
            case ModelKind::DistMult:
                for (std::uint32_t i = 0; i < d; ++i) acc += s[i] * r[i] * o[i];
                return acc;
            case ModelKind::ComplEx:
                // [re | im] halves; conj(o) flips the object's imaginary part.
                for (std::uint32_t i = 0; i < d; ++i) {
                    const double sr = s[i], si = s[d + i];
                    const double rr = r[i], ri = r[d + i];
                    const double orr = o[i], oi = o[d + i];
                    acc += sr * rr * orr + si * rr * oi + sr * ri * oi - si * ri * orr;
                }
                return acc;
            case ModelKind::SimplE:
                // entity spans are [head | tail], relation spans are [r | r_inv]
                for (std::uint32_t i = 0; i < d; ++i) {
                    acc += s[i] * r[i] * o[d + i] + o[i] * r[d + i] * s[d + i];
                }
                return 0.5 * acc;
            case ModelKind::TransE:
                for (std::uint32_t i = 0; i < d; ++i) {
                    const double v = s[i] + r[i] - o[i];
                    acc += v * v;
                }
                return -std::sqrt(acc);
        }
        return 0.0;
    }

    double probability(const Triplet& t) const { return sigmoid(score(t)); }

    // Accumulates d(phi)/d(theta) * upstream into the buffer, touching exactly
    // the slots of t's subject, relation and object. A self-loop (subject ==
    // object) accumulates both contributions into the one shared slot.
    void score_grad(const Triplet& t, double upstream, GradientBuffer& gb) const {
        const auto s = entity(t.subject);
        const auto r = relation(t.relation);
        const auto o = entity(t.object);
        auto gs = gb.entity(t.subject, entity_stride());
        auto gr = gb.relation(t.relation, relation_stride());
        auto go = gb.entity(t.object, entity_stride());
        const std::uint32_t d = dim_;
        switch (kind_) {
            case ModelKind::DistMult:
                for (std::uint32_t i = 0; i < d; ++i) {
                    gs[i] += upstream * r[i] * o[i];
                    gr[i] += upstream * s[i] * o[i];
                    go[i] += upstream * s[i] * r[i];
                }
                return;
            case ModelKind::ComplEx:
                for (std::uint32_t i = 0; i < d; ++i) {
                    const double sr = s[i], si = s[d + i];
                    const double rr = r[i], ri = r[d + i];
                    const double orr = o[i], oi = o[d + i];
                    gs[i] += upstream * (rr * orr + ri * oi);
                    gs[d + i] += upstream * (rr * oi - ri * orr);
                    gr[i] += upstream * (sr * orr + si * oi);
                    gr[d + i] += upstream * (sr * oi - si * orr);
                    go[i] += upstream * (sr * rr - si * ri);
                    go[d + i] += upstream * (si * rr + sr * ri);
                }
                return;
            case ModelKind::SimplE:
                for (std::uint32_t i = 0; i < d; ++i) {
                    const double half = 0.5 * upstream;
                    gs[i] += half * r[i] * o[d + i];       // d/d h_s
                    gr[i] += half * s[i] * o[d + i];       // d/d r
                    go[d + i] += half * s[i] * r[i];       // d/d t_o
                    go[i] += half * r[d + i] * s[d + i];   // d/d h_o
                    gr[d + i] += half * o[i] * s[d + i];   // d/d r_inv
                    gs[d + i] += half * o[i] * r[d + i];   // d/d t_s
                }
                return;
            case ModelKind::TransE: {
                double norm = 0.0;
                for (std::uint32_t i = 0; i < d; ++i) {
                    const double v = s[i] + r[i] - o[i];
                    norm += v * v;
                }
                norm = std::sqrt(norm);
                if (norm == 0.0) return;  // subgradient 0 at the stationary point
                for (std::uint32_t i = 0; i < d; ++i) {
                    const double g = upstream * -(s[i] + r[i] - o[i]) / norm;
                    gs[i] += g;
                    gr[i] += g;
                    go[i] -= g;
                }
                return;
            }
        }
    }

private:
    ModelKind kind_;
    std::uint32_t dim_;
    std::size_t num_entities_;
    std::size_t num_relations_;
    std::uint64_t seed_;
    std::vector<double> entity_params_;
    std::vector<double> relation_params_;
};

// L2 penalty over the slots already touched in the buffer (applied per batch).
// Returns coeff * sum |theta|^2 and adds 2 * coeff * theta to the gradients.
inline double l2_penalty_and_grad(const EmbeddingModel& m, GradientBuffer& gb, double coeff) {
    if (coeff < 0.0) throw ConfigError("l2 coefficient must be nonnegative");
    if (coeff == 0.0) return 0.0;
    double penalty = 0.0;
    gb.for_each([&](const GradientBuffer::Entry& e) {
        const std::span<const double> params =
            e.is_relation ? m.relation(e.id) : m.entity(e.id);
        std::span<double> grad = e.is_relation ? gb.relation(e.id, params.size())
                                               : gb.entity(e.id, params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            penalty += coeff * params[i] * params[i];
            grad[i] += 2.0 * coeff * params[i];
        }
    });
    return penalty;
}

}  // namespace kgval
