#pragma once
// Validation-as-ranking: score every evaluation triplet, sort ascending (most
// suspect first), and aggregate Mean Raw/Filtered Rank, Recall of Ranking and
// Precision@K over the labeled negatives. Also the synthetic error generator
// and the stratified tuning/test split.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgval/common.hpp"
#include "kgval/graph.hpp"
#include "kgval/model.hpp"
#include "kgval/negative.hpp"

namespace kgval {

struct LabeledTriplet {
    Triplet triplet;
    int label = 1;  // +1 observed/positive, -1 error/negative
};

// Labeled evaluation set D = D+ u D-, kept in ingestion order (the order is
// the documented tie-breaker when scores are equal).
struct EvaluationSet {
    std::vector<LabeledTriplet> items;

    std::size_t positives() const {
        std::size_t n = 0;
        for (const auto& it : items) n += it.label > 0;
        return n;
    }
    std::size_t negatives() const { return items.size() - positives(); }
};

struct RankedTriplet {
    Triplet triplet;
    double score = 0.0;
    std::uint32_t rank = 0;  // 1-based, ascending by score
    int label = 0;
};

struct RankingReport {
    std::vector<RankedTriplet> by_rank;

    std::vector<std::uint32_t> negative_ranks() const {
        std::vector<std::uint32_t> out;
        for (const auto& rt : by_rank) {
            if (rt.label < 0) out.push_back(rt.rank);
        }
        return out;
    }
};

// Scores with phi and sorts ascending; P = sigmoid(phi) is monotone in phi,
// so ranking by raw score and by probability coincide. Ties break by
// ingestion index.
inline RankingReport rank(const EmbeddingModel& m, const EvaluationSet& d, unsigned threads = 1) {
    if (d.items.empty()) throw DataError("empty evaluation set");
    std::vector<double> scores(d.items.size());
    parallel_for(d.items.size(), threads,
                 [&](std::size_t i) { scores[i] = m.score(d.items[i].triplet); });

    std::vector<std::uint32_t> order(d.items.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return scores[a] < scores[b];
    });

    RankingReport report;
    report.by_rank.reserve(d.items.size());
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
        const std::uint32_t i = order[pos];
        report.by_rank.push_back(
            RankedTriplet{d.items[i].triplet, scores[i], pos + 1, d.items[i].label});
    }
    return report;
}

inline double mean_raw_rank(std::span<const std::uint32_t> negative_ranks) {
    if (negative_ranks.empty()) throw DataError("no negative triplets in evaluation set");
    std::uint64_t sum = 0;
    for (std::uint32_t r : negative_ranks) sum += r;
    return static_cast<double>(sum) / static_cast<double>(negative_ranks.size());
}

// Mean over the ascending-sorted negative ranks of (rank_i - i). Since the
// subtracted positions always sum to n(n+1)/2, this equals the raw mean minus
// (n+1)/2, which keeps the identity between the two metrics exact.
inline double mean_filtered_rank(std::span<const std::uint32_t> negative_ranks) {
    const double raw = mean_raw_rank(negative_ranks);
    return raw - static_cast<double>(negative_ranks.size() + 1) / 2.0;
}

inline double precision_at(std::span<const std::uint32_t> negative_ranks, std::size_t k,
                           std::size_t total) {
    if (k < 1 || k > total) throw DataError("precision cutoff out of range");
    std::size_t hits = 0;
    for (std::uint32_t r : negative_ranks) hits += r <= k;
    return static_cast<double>(hits) / static_cast<double>(k);
}

// Fraction of negatives ranked within the top |D-|; identical to
// Precision@|D-| by definition.
inline double recall_of_ranking(std::span<const std::uint32_t> negative_ranks, std::size_t total) {
    if (negative_ranks.empty()) throw DataError("no negative triplets in evaluation set");
    return precision_at(negative_ranks, negative_ranks.size(), total);
}

inline double mean_raw_rank(const RankingReport& r) { return mean_raw_rank(r.negative_ranks()); }
inline double mean_filtered_rank(const RankingReport& r) {
    return mean_filtered_rank(r.negative_ranks());
}
inline double recall_of_ranking(const RankingReport& r) {
    return recall_of_ranking(r.negative_ranks(), r.by_rank.size());
}
inline double precision_at(const RankingReport& r, std::size_t k) {
    return precision_at(r.negative_ranks(), k, r.by_rank.size());
}

// Samples n observed triplets and corrupts the head or tail of each (side and
// replacement entity uniform) into a triplet absent from the graph. Returns
// the sampled positives and their corruptions; the corruptions are distinct.
inline std::pair<std::vector<Triplet>, std::vector<Triplet>> inject_errors(
    const KnowledgeGraph& g, std::size_t n, std::mt19937_64& rng) {
    if (n > g.size()) throw DataError("cannot sample more triplets than the graph holds");
    std::vector<std::uint32_t> order(g.size());
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);

    std::uniform_int_distribution<EntityId> pick_entity(
        0, static_cast<EntityId>(g.entities().size() - 1));
    std::uniform_int_distribution<int> pick_side(0, 1);

    std::vector<Triplet> positives;
    std::vector<Triplet> negatives;
    TripletSet emitted;
    positives.reserve(n);
    negatives.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Triplet& source = g.triplets()[order[i]];
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxSampleRetries; ++attempt) {
            Triplet cand = source;
            if (pick_side(rng) == 0) {
                cand.subject = pick_entity(rng);
            } else {
                cand.object = pick_entity(rng);
            }
            if (!g.contains(cand) && !emitted.contains(cand)) {
                positives.push_back(source);
                negatives.push_back(cand);
                emitted.insert(cand);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw SamplingError("could not corrupt sampled triplet after " +
                                std::to_string(kMaxSampleRetries) + " attempts");
        }
    }
    return {std::move(positives), std::move(negatives)};
}

// Seeded stratified split: round(fraction * count) per label class goes to
// the first (tuning) set, the rest to the second (test) set. Original order
// is preserved within each side.
inline std::pair<EvaluationSet, EvaluationSet> split_eval(const EvaluationSet& d, double fraction,
                                                          std::mt19937_64& rng) {
    if (fraction <= 0.0 || fraction >= 1.0) throw ConfigError("split fraction must be in (0, 1)");
    std::vector<std::uint32_t> pos_idx;
    std::vector<std::uint32_t> neg_idx;
    for (std::uint32_t i = 0; i < d.items.size(); ++i) {
        (d.items[i].label > 0 ? pos_idx : neg_idx).push_back(i);
    }
    const auto take = [&](std::vector<std::uint32_t>& idx) {
        const auto want = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(idx.size())));
        if (want == 0 || want >= idx.size()) {
            throw DataError("split would leave an empty tuning or test side");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<std::uint32_t> chosen(idx.begin(), idx.begin() + want);
        return chosen;
    };
    std::vector<std::uint32_t> tune_pos = take(pos_idx);
    std::vector<std::uint32_t> tune_neg = take(neg_idx);

    std::vector<bool> in_tune(d.items.size(), false);
    for (std::uint32_t i : tune_pos) in_tune[i] = true;
    for (std::uint32_t i : tune_neg) in_tune[i] = true;

    EvaluationSet tune;
    EvaluationSet test;
    for (std::uint32_t i = 0; i < d.items.size(); ++i) {
        (in_tune[i] ? tune : test).items.push_back(d.items[i]);
    }
    return {std::move(tune), std::move(test)};
}

// Labeled evaluation TSV: subject\trelation\tobject\tlabel with label +1/-1.
// The evaluation set is a set: a triplet may appear only once.
template <typename EntityResolve, typename RelationResolve>
EvaluationSet parse_labeled_tsv(std::string_view content, const std::string& origin,
                                EntityResolve&& entity_id, RelationResolve&& relation_id) {
    EvaluationSet out;
    TripletSet seen;
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

        std::array<std::string_view, 4> fields;
        std::size_t field = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                if (field == 4) {
                    field = 5;
                    break;
                }
                fields[field++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (field != 4) {
            throw DataError(origin + ":" + std::to_string(line_no) +
                            ": expected 4 tab-separated fields");
        }
        LabeledTriplet item;
        item.triplet.subject = entity_id(trim(fields[0]), line_no);
        item.triplet.relation = relation_id(trim(fields[1]), line_no);
        item.triplet.object = entity_id(trim(fields[2]), line_no);
        const std::string_view label = trim(fields[3]);
        if (label == "+1" || label == "1") {
            item.label = 1;
        } else if (label == "-1") {
            item.label = -1;
        } else {
            throw DataError(origin + ":" + std::to_string(line_no) + ": label must be +1 or -1");
        }
        if (!seen.insert(item.triplet).second) {
            throw DataError(origin + ":" + std::to_string(line_no) +
                            ": duplicate evaluation triplet");
        }
        out.items.push_back(item);
    }
    if (out.items.empty()) throw DataError(origin + ": empty evaluation set");
    return out;
}

}  // namespace kgval
