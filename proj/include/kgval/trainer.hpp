#pragma once
// Confidence-aware joint training over the target and external graphs.
//
// Per target positive s1 with conventional negatives S' and confidence weight
// w = pi(P(s1)):            -w * sum_{s' in S'} [log P(s1) + log(1 - P(s'))]
// Per external positive s2:  -[log P(s2) + sum log(1 - P(s'))] over the
// conventional, entity-replaced and relation-replaced categories.
// Final objective: L_G1 + lambda * L_G2.
//
// The confidence weight is evaluated from the current parameters each step
// and treated as a constant; no gradient flows through pi. The TransE
// baseline instead trains with the pairwise margin loss and never uses
// confidence weighting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kgval/adam.hpp"
#include "kgval/common.hpp"
#include "kgval/graph.hpp"
#include "kgval/model.hpp"
#include "kgval/negative.hpp"

namespace kgval {

struct TrainerConfig {
    double learning_rate = 0.001;
    std::uint32_t batch_size = 256;
    std::uint32_t epochs = 50;
    double lambda = 1.0;          // weight of the external-graph loss
    double theta = 0.5;           // confidence threshold
    double l2_coeff = 0.001;
    std::uint32_t neg_conventional = 1;  // negatives per positive
    bool neg_cross = true;               // cross-KG categories (1 each) on external positives
    bool confidence = true;
    std::uint32_t confidence_warmup = 1;  // epochs with pi == 1 before gating starts
    double margin = 1.0;                  // gamma, TransE baseline only
    std::uint64_t seed = 0;
};

// pi(P): P when P >= theta, else 0. A gated positive contributes neither loss
// nor gradient for the step.
inline double confidence(double p, double theta) { return p >= theta ? p : 0.0; }

// Eq-style target loss for one positive with a fixed (detached) weight.
// The positive's log term appears once per negative.
inline double weighted_target_loss(const EmbeddingModel& m, const Triplet& pos,
                                   std::span<const Triplet> negs, double weight,
                                   GradientBuffer* gb) {
    if (weight == 0.0 || negs.empty()) return 0.0;
    const double phi_pos = m.score(pos);
    const double p_pos = sigmoid(phi_pos);
    const auto k = static_cast<double>(negs.size());
    double loss = -weight * k * log_sigmoid(phi_pos);
    if (gb) m.score_grad(pos, -weight * k * (1.0 - p_pos), *gb);
    for (const Triplet& neg : negs) {
        const double phi_neg = m.score(neg);
        loss -= weight * log_sigmoid(-phi_neg);
        if (gb) m.score_grad(neg, weight * sigmoid(phi_neg), *gb);
    }
    return loss;
}

// Confidence-weighted loss on a target positive. The weight is pi(P) from the
// current model (or 1 during warm-up); warm-up realizes the "initial
// confidence 1" convention before any scores are calibrated.
inline double target_loss(const EmbeddingModel& m, const Triplet& pos,
                          std::span<const Triplet> negs, double theta, bool warmup,
                          GradientBuffer* gb, double* weight_out = nullptr) {
    const double w = warmup ? 1.0 : confidence(m.probability(pos), theta);
    if (weight_out) *weight_out = w;
    return weighted_target_loss(m, pos, negs, w, gb);
}

// Unweighted logistic loss on an external positive; the positive's log term
// appears once and empty negative categories simply drop out. Gradients are
// scaled by `scale` (lambda); the returned loss is unscaled.
inline double external_loss(const EmbeddingModel& m, const Triplet& pos,
                            std::span<const Triplet> negs_conventional,
                            std::span<const Triplet> negs_entity,
                            std::span<const Triplet> negs_relation, double scale,
                            GradientBuffer* gb) {
    const double phi_pos = m.score(pos);
    double loss = -log_sigmoid(phi_pos);
    if (gb && scale != 0.0) m.score_grad(pos, -scale * (1.0 - sigmoid(phi_pos)), *gb);
    const auto add_negs = [&](std::span<const Triplet> negs) {
        for (const Triplet& neg : negs) {
            const double phi_neg = m.score(neg);
            loss -= log_sigmoid(-phi_neg);
            if (gb && scale != 0.0) m.score_grad(neg, scale * sigmoid(phi_neg), *gb);
        }
    };
    add_negs(negs_conventional);
    add_negs(negs_entity);
    add_negs(negs_relation);
    return loss;
}

// Pairwise margin loss for the TransE baseline:
// sum_{s'} max(phi(s') - phi(s) + gamma, 0).
inline double margin_loss(const EmbeddingModel& m, const Triplet& pos,
                          std::span<const Triplet> negs, double gamma, double scale,
                          GradientBuffer* gb) {
    if (negs.empty()) return 0.0;
    const double phi_pos = m.score(pos);
    double loss = 0.0;
    int active = 0;
    for (const Triplet& neg : negs) {
        const double term = m.score(neg) - phi_pos + gamma;
        if (term <= 0.0) continue;
        loss += term;
        ++active;
        if (gb && scale != 0.0) m.score_grad(neg, scale, *gb);
    }
    if (gb && scale != 0.0 && active > 0) {
        m.score_grad(pos, -scale * static_cast<double>(active), *gb);
    }
    return loss;
}

struct EpochLog {
    std::uint32_t epoch = 0;
    double mean_loss_g1 = 0.0;
    double mean_loss_g2 = 0.0;
    double gated_fraction = 0.0;
};

struct TrainResult {
    EmbeddingModel model;
    std::vector<EpochLog> log;
};

// Runs the optimization loop. Both graphs must already be in the shared ID
// space (g1 lifted, g2 remapped); idx is required only when cross-KG sampling
// is enabled. Each step draws one batch from each graph, sized so that one
// epoch covers both graphs once, and applies a joint Adam update.
//
// target_vocab_size, when nonzero, restricts conventional corruption of
// target positives to the target's own entities (the shared-space prefix);
// replacement entities for external positives always draw from the full
// shared vocabulary.
inline TrainResult train(const KnowledgeGraph& g1, const KnowledgeGraph* g2,
                         const NegativeRelationIndex* idx, ModelKind kind, std::uint32_t dim,
                         const TrainerConfig& cfg, std::size_t target_vocab_size = 0) {
    if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
    if (cfg.neg_conventional == 0) throw ConfigError("need at least one conventional negative");
    if (cfg.theta < 0.0 || cfg.theta >= 1.0) throw ConfigError("theta must be in [0, 1)");
    if (cfg.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (g2 && cfg.neg_cross && !idx) {
        throw ConfigError("cross-KG sampling enabled but no negative relation index built");
    }

    const std::size_t num_entities = g1.entities().size();
    const std::size_t num_relations = g1.relations().size();
    const std::size_t g1_pool = target_vocab_size == 0 ? num_entities : target_vocab_size;
    if (g1_pool > num_entities) throw ConfigError("target vocabulary exceeds the shared space");
    TrainResult result{EmbeddingModel(kind, dim, num_entities, num_relations, cfg.seed), {}};
    EmbeddingModel& model = result.model;

    const std::size_t n1 = g1.size();
    const std::size_t n2 = g2 ? g2->size() : 0;
    const bool use_external = g2 && cfg.lambda > 0.0;
    const std::size_t steps = (n1 + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t batch2 = use_external ? (n2 + steps - 1) / steps : 0;
    const bool use_confidence = cfg.confidence && is_multiplicative(kind);
    const bool cross = cfg.neg_cross && idx != nullptr;

    std::vector<std::uint32_t> order1(n1);
    std::iota(order1.begin(), order1.end(), 0u);
    std::vector<std::uint32_t> order2(n2);
    std::iota(order2.begin(), order2.end(), 0u);

    AdamOptimizer optimizer(cfg.learning_rate);
    GradientBuffer grads;

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 shuffle1(derive_seed(cfg.seed, "shuffle-g1", epoch));
        std::shuffle(order1.begin(), order1.end(), shuffle1);
        std::mt19937_64 neg1(derive_seed(cfg.seed, "neg-g1", epoch));
        std::mt19937_64 shuffle2(derive_seed(cfg.seed, "shuffle-g2", epoch));
        std::mt19937_64 neg2(derive_seed(cfg.seed, "neg-g2", epoch));
        if (use_external) std::shuffle(order2.begin(), order2.end(), shuffle2);

        const bool warmup = use_confidence && epoch < cfg.confidence_warmup;
        double loss1_sum = 0.0;
        double loss2_sum = 0.0;
        std::size_t gated = 0;

        for (std::size_t step = 0; step < steps; ++step) {
            grads.clear();
            double step_loss = 0.0;

            const std::size_t b1 = step * cfg.batch_size;
            const std::size_t e1 = std::min(n1, b1 + cfg.batch_size);
            for (std::size_t i = b1; i < e1; ++i) {
                const Triplet& pos = g1.triplets()[order1[i]];
                const std::vector<Triplet> negs =
                    corrupt_conventional(pos, cfg.neg_conventional, neg1, g1_pool, g1, g2);
                double item = 0.0;
                if (kind == ModelKind::TransE) {
                    item = margin_loss(model, pos, negs, cfg.margin, 1.0, &grads);
                } else if (use_confidence) {
                    double weight = 1.0;
                    item = target_loss(model, pos, negs, cfg.theta, warmup, &grads, &weight);
                    if (!warmup && weight == 0.0) ++gated;
                } else {
                    item = weighted_target_loss(model, pos, negs, 1.0, &grads);
                }
                loss1_sum += item;
                step_loss += item;
            }

            if (use_external) {
                const std::size_t b2 = step * batch2;
                const std::size_t e2 = std::min(n2, b2 + batch2);
                for (std::size_t i = b2; i < e2; ++i) {
                    const Triplet& pos = g2->triplets()[order2[i]];
                    const NegativeBatch negs =
                        generate_negatives(pos, /*external=*/true, cfg.neg_conventional, cross,
                                           idx, neg2, num_entities, g1, g2);
                    double item = 0.0;
                    if (kind == ModelKind::TransE) {
                        std::vector<Triplet> all = negs.conventional;
                        all.insert(all.end(), negs.entity_replaced.begin(),
                                   negs.entity_replaced.end());
                        all.insert(all.end(), negs.relation_replaced.begin(),
                                   negs.relation_replaced.end());
                        item = margin_loss(model, pos, all, cfg.margin, cfg.lambda, &grads);
                    } else {
                        item = external_loss(model, pos, negs.conventional, negs.entity_replaced,
                                             negs.relation_replaced, cfg.lambda, &grads);
                    }
                    loss2_sum += item;
                    step_loss += cfg.lambda * item;
                }
            }

            step_loss += l2_penalty_and_grad(model, grads, cfg.l2_coeff);
            if (!std::isfinite(step_loss)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(step));
            }
            optimizer.apply(model, grads);
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.mean_loss_g1 = loss1_sum / static_cast<double>(n1);
        entry.mean_loss_g2 = use_external ? loss2_sum / static_cast<double>(n2) : 0.0;
        entry.gated_fraction =
            use_confidence && !warmup ? static_cast<double>(gated) / static_cast<double>(n1) : 0.0;
        result.log.push_back(entry);
    }
    return result;
}

}  // namespace kgval
