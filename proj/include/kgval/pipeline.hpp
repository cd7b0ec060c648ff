#pragma once
// End-to-end commands behind the CLI: train, validate, corrupt, bench and
// ingest-check, all driven by one RunConfig so a run can be reproduced from
// the config embedded in its outputs.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgval/alignment.hpp"
#include "kgval/checkpoint.hpp"
#include "kgval/common.hpp"
#include "kgval/evaluation.hpp"
#include "kgval/graph.hpp"
#include "kgval/model.hpp"
#include "kgval/negative.hpp"
#include "kgval/trainer.hpp"

namespace kgval {

using json = nlohmann::json;

struct RunConfig {
    // paths
    std::string target;
    std::string external;
    std::string aliases;
    std::string eval;
    std::string checkpoint;
    std::string out;
    std::string log;

    // model
    std::string model = "distmult";
    std::uint32_t dim = 64;

    TrainerConfig trainer;

    // data shaping
    double overlap_fraction = 1.0;
    std::uint64_t external_triplets = 0;  // 0 = use all

    // corrupt
    std::uint64_t corrupt_n = 0;
    double tune_fraction = 0.2;

    // bench
    std::vector<std::uint64_t> bench_sizes;
    std::uint32_t bench_reps = 5;

    // validate
    std::vector<std::uint64_t> precision_ks = {100, 200, 500};

    std::uint64_t seed = 0;
    std::uint32_t threads = 1;
};

inline json to_json(const RunConfig& c) {
    json j;
    j["target"] = c.target;
    j["external"] = c.external;
    j["aliases"] = c.aliases;
    j["eval"] = c.eval;
    j["checkpoint"] = c.checkpoint;
    j["out"] = c.out;
    j["log"] = c.log;
    j["model"] = c.model;
    j["dim"] = c.dim;
    j["lr"] = c.trainer.learning_rate;
    j["batch"] = c.trainer.batch_size;
    j["epochs"] = c.trainer.epochs;
    j["lambda"] = c.trainer.lambda;
    j["theta"] = c.trainer.theta;
    j["l2"] = c.trainer.l2_coeff;
    j["neg_conventional"] = c.trainer.neg_conventional;
    j["neg_cross"] = c.trainer.neg_cross;
    j["confidence"] = c.trainer.confidence;
    j["confidence_warmup"] = c.trainer.confidence_warmup;
    j["margin"] = c.trainer.margin;
    j["overlap_fraction"] = c.overlap_fraction;
    j["external_triplets"] = c.external_triplets;
    j["corrupt_n"] = c.corrupt_n;
    j["tune_fraction"] = c.tune_fraction;
    j["bench_sizes"] = c.bench_sizes;
    j["bench_reps"] = c.bench_reps;
    j["precision_at"] = c.precision_ks;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("target", c.target);
    get("external", c.external);
    get("aliases", c.aliases);
    get("eval", c.eval);
    get("checkpoint", c.checkpoint);
    get("out", c.out);
    get("log", c.log);
    get("model", c.model);
    get("dim", c.dim);
    get("lr", c.trainer.learning_rate);
    get("batch", c.trainer.batch_size);
    get("epochs", c.trainer.epochs);
    get("lambda", c.trainer.lambda);
    get("theta", c.trainer.theta);
    get("l2", c.trainer.l2_coeff);
    get("neg_conventional", c.trainer.neg_conventional);
    get("neg_cross", c.trainer.neg_cross);
    get("confidence", c.trainer.confidence);
    get("confidence_warmup", c.trainer.confidence_warmup);
    get("margin", c.trainer.margin);
    get("overlap_fraction", c.overlap_fraction);
    get("external_triplets", c.external_triplets);
    get("corrupt_n", c.corrupt_n);
    get("tune_fraction", c.tune_fraction);
    get("bench_sizes", c.bench_sizes);
    get("bench_reps", c.bench_reps);
    get("precision_at", c.precision_ks);
    get("seed", c.seed);
    get("threads", c.threads);
    return c;
}

// Seeded subsample of the external graph (the "size of the external KG"
// experiment). Keeps the original triplet order of the survivors so IDs stay
// deterministic.
inline KnowledgeGraph subsample_graph(const KnowledgeGraph& g, std::uint64_t keep,
                                      std::uint64_t seed) {
    if (keep == 0 || keep >= g.size()) return g;
    std::vector<std::uint32_t> order(g.size());
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(derive_seed(seed, "external-subsample"));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<TripletRow> rows;
    rows.reserve(keep);
    for (std::uint32_t i : order) {
        const Triplet& t = g.triplets()[i];
        rows.push_back(TripletRow{g.entities().name(t.subject), g.relations().name(t.relation),
                                  g.entities().name(t.object)});
    }
    return ingest_rows(rows, g.tag());
}

struct TrainArtifacts {
    Checkpoint checkpoint;
    std::vector<EpochLog> log;
    std::size_t overlap_count = 0;
    std::size_t external_size = 0;
    std::size_t target_duplicates = 0;
    std::size_t external_duplicates = 0;
};

// ingest -> align -> remap -> index -> train. The returned checkpoint embeds
// the full config for provenance.
inline TrainArtifacts run_train(const RunConfig& cfg) {
    if (cfg.target.empty()) throw ConfigError("train needs --target");
    const ModelKind kind = model_kind_from_name(cfg.model);
    TrainerConfig tcfg = cfg.trainer;
    tcfg.seed = cfg.seed;

    const KnowledgeGraph g1 = ingest(cfg.target, GraphTag::target);

    std::optional<KnowledgeGraph> g2_shared;
    std::optional<NegativeRelationIndex> index;
    AlignmentMap alignment;
    if (!cfg.external.empty()) {
        KnowledgeGraph g2 = ingest(cfg.external, GraphTag::external);
        g2 = subsample_graph(g2, cfg.external_triplets, cfg.seed);
        AliasTable aliases;
        if (!cfg.aliases.empty()) aliases = load_alias_table(cfg.aliases);
        alignment = align(g1.entities(), g1.relations(), g2.entities(), g2.relations(), aliases,
                          cfg.overlap_fraction, cfg.seed);
        g2_shared = remap(g2, alignment);
    } else {
        alignment = single_graph_space(g1);
    }
    const KnowledgeGraph g1_shared = lift(g1, alignment);
    if (g2_shared && cfg.trainer.neg_cross) {
        index = build_negative_relation_index(g1_shared, *g2_shared, alignment.relation_offset);
    }

    TrainResult trained =
        train(g1_shared, g2_shared ? &*g2_shared : nullptr, index ? &*index : nullptr, kind,
              cfg.dim, tcfg, alignment.target_entity_count);

    TrainArtifacts artifacts{
        Checkpoint{std::move(trained.model), {}, {}, to_json(cfg).dump()},
        std::move(trained.log),
        alignment.overlap_count,
        g2_shared ? g2_shared->size() : 0,
        g1.duplicates_dropped(),
        g2_shared ? g2_shared->duplicates_dropped() : 0};
    const Vocabulary& ents = alignment.shared_entities;
    const Vocabulary& rels = alignment.shared_relations;
    artifacts.checkpoint.entity_names.reserve(ents.size());
    for (std::uint32_t i = 0; i < ents.size(); ++i) {
        artifacts.checkpoint.entity_names.push_back(ents.name(i));
    }
    artifacts.checkpoint.relation_names.reserve(rels.size());
    for (std::uint32_t i = 0; i < rels.size(); ++i) {
        artifacts.checkpoint.relation_names.push_back(rels.name(i));
    }
    return artifacts;
}

inline json epoch_log_json(const EpochLog& e) {
    json j;
    j["epoch"] = e.epoch;
    j["mean_loss_g1"] = e.mean_loss_g1;
    j["mean_loss_g2"] = e.mean_loss_g2;
    j["gated_fraction"] = e.gated_fraction;
    return j;
}

// Writes the checkpoint to cfg.out and one JSON line per epoch to cfg.log
// (stdout when no log path is given).
inline void cmd_train(const RunConfig& cfg) {
    if (cfg.out.empty()) throw ConfigError("train needs --out for the checkpoint");
    const TrainArtifacts artifacts = run_train(cfg);
    if (artifacts.target_duplicates > 0 || artifacts.external_duplicates > 0) {
        std::cerr << "dropped duplicate triplets: target " << artifacts.target_duplicates
                  << ", external " << artifacts.external_duplicates << "\n";
    }
    save_checkpoint(artifacts.checkpoint, cfg.out);
    std::ofstream log_file;
    if (!cfg.log.empty()) {
        log_file.open(cfg.log, std::ios::trunc);
        if (!log_file) throw DataError("cannot write training log to " + cfg.log);
    }
    std::ostream& log_out = cfg.log.empty() ? std::cout : log_file;
    for (const EpochLog& e : artifacts.log) log_out << epoch_log_json(e).dump() << "\n";
}

// Resolves a labeled evaluation TSV against a checkpoint's vocabulary.
inline EvaluationSet load_eval_set(const std::string& path, const Checkpoint& ckpt) {
    std::unordered_map<std::string_view, std::uint32_t> entity_ids;
    entity_ids.reserve(ckpt.entity_names.size());
    for (std::uint32_t i = 0; i < ckpt.entity_names.size(); ++i) {
        entity_ids.emplace(ckpt.entity_names[i], i);
    }
    std::unordered_map<std::string_view, std::uint32_t> relation_ids;
    for (std::uint32_t i = 0; i < ckpt.relation_names.size(); ++i) {
        relation_ids.emplace(ckpt.relation_names[i], i);  // first (target) occurrence wins
    }
    const std::string content = detail::read_file_bytes(path);
    const auto resolve = [&](const auto& map, std::string_view name, std::size_t line,
                             const char* what) -> std::uint32_t {
        if (auto it = map.find(name); it != map.end()) return it->second;
        throw DataError(path + ":" + std::to_string(line) + ": " + what + " '" +
                        std::string(name) + "' is not in the checkpoint vocabulary");
    };
    return parse_labeled_tsv(
        content, path,
        [&](std::string_view name, std::size_t line) {
            return resolve(entity_ids, name, line, "entity");
        },
        [&](std::string_view name, std::size_t line) {
            return resolve(relation_ids, name, line, "relation");
        });
}

inline json metrics_json(const RankingReport& report, const std::vector<std::uint64_t>& ks) {
    const std::vector<std::uint32_t> neg = report.negative_ranks();
    const std::size_t total = report.by_rank.size();
    json m;
    m["recall"] = recall_of_ranking(neg, total);
    m["mean_rank_raw"] = mean_raw_rank(neg);
    m["mean_rank_filter"] = mean_filtered_rank(neg);
    json pk = json::object();
    for (std::uint64_t k : ks) {
        if (k >= 1 && k <= total) pk[std::to_string(k)] = precision_at(neg, k, total);
    }
    m["precision_at"] = pk;
    return m;
}

// Ranked report over a labeled evaluation set, most-suspect first.
inline json run_validate(const RunConfig& cfg) {
    if (cfg.checkpoint.empty()) throw ConfigError("validate needs --checkpoint");
    if (cfg.eval.empty()) throw ConfigError("validate needs --eval");
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    const EvaluationSet eval_set = load_eval_set(cfg.eval, ckpt);
    const RankingReport report = rank(ckpt.model, eval_set, cfg.threads);

    json out;
    out["config"] = json{{"validate", to_json(cfg)}, {"train", json::parse(ckpt.config_json)}};
    out["metrics"] = metrics_json(report, cfg.precision_ks);
    json ranking = json::array();
    for (const RankedTriplet& rt : report.by_rank) {
        json row;
        row["s"] = ckpt.entity_names[rt.triplet.subject];
        row["r"] = ckpt.relation_names[rt.triplet.relation];
        row["o"] = ckpt.entity_names[rt.triplet.object];
        row["score"] = rt.score;
        row["rank"] = rt.rank;
        row["label"] = rt.label;
        ranking.push_back(std::move(row));
    }
    out["ranking"] = std::move(ranking);
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
}

inline void cmd_validate(const RunConfig& cfg) {
    const json report = run_validate(cfg);
    const std::string text = report.dump(2) + "\n";
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        write_text_file(cfg.out, text);
    }
}

inline std::string labeled_tsv_text(const KnowledgeGraph& g, const EvaluationSet& set) {
    std::string out;
    for (const LabeledTriplet& item : set.items) {
        out += g.to_string(item.triplet);
        out += item.label > 0 ? "\t+1\n" : "\t-1\n";
    }
    return out;
}

// Synthetic error generation: samples corrupt_n observed triplets, corrupts
// one entity slot of each, and writes <out> plus a stratified
// <out>.tune.tsv / <out>.test.tsv split.
inline void cmd_corrupt(const RunConfig& cfg) {
    if (cfg.target.empty()) throw ConfigError("corrupt needs --target");
    if (cfg.out.empty()) throw ConfigError("corrupt needs --out");
    if (cfg.corrupt_n == 0) throw ConfigError("corrupt needs --n > 0");
    const KnowledgeGraph g = ingest(cfg.target, GraphTag::target);
    std::mt19937_64 rng(derive_seed(cfg.seed, "inject-errors"));
    const auto [positives, negatives] = inject_errors(g, cfg.corrupt_n, rng);

    EvaluationSet all;
    for (const Triplet& t : positives) all.items.push_back(LabeledTriplet{t, 1});
    for (const Triplet& t : negatives) all.items.push_back(LabeledTriplet{t, -1});
    write_text_file(cfg.out, labeled_tsv_text(g, all));

    std::string base = cfg.out;
    if (base.ends_with(".tsv")) base.resize(base.size() - 4);
    std::mt19937_64 split_rng(derive_seed(cfg.seed, "split-eval"));
    const auto [tune, test] = split_eval(all, cfg.tune_fraction, split_rng);
    write_text_file(base + ".tune.tsv", labeled_tsv_text(g, tune));
    write_text_file(base + ".test.tsv", labeled_tsv_text(g, test));
}

struct BenchRow {
    std::uint64_t size = 0;
    double median_seconds = 0.0;
};

// Scoring throughput over synthetic triplets drawn from the checkpoint's
// vocabulary: bench_reps timed passes per size, median reported.
inline std::vector<BenchRow> run_bench(const RunConfig& cfg) {
    if (cfg.checkpoint.empty()) throw ConfigError("bench needs --checkpoint");
    if (cfg.bench_sizes.empty()) throw ConfigError("bench needs --sizes");
    if (!std::is_sorted(cfg.bench_sizes.begin(), cfg.bench_sizes.end())) {
        throw ConfigError("bench sizes must be ascending");
    }
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    const EmbeddingModel& model = ckpt.model;

    std::mt19937_64 rng(derive_seed(cfg.seed, "bench"));
    std::uniform_int_distribution<EntityId> pick_entity(
        0, static_cast<EntityId>(model.num_entities() - 1));
    std::uniform_int_distribution<RelationId> pick_relation(
        0, static_cast<RelationId>(model.num_relations() - 1));

    std::vector<BenchRow> rows;
    volatile double sink = 0.0;  // keep the scoring loop observable
    for (std::uint64_t size : cfg.bench_sizes) {
        std::vector<Triplet> batch(size);
        for (Triplet& t : batch) {
            t = Triplet{pick_entity(rng), pick_relation(rng), pick_entity(rng)};
        }
        std::vector<double> times;
        times.reserve(cfg.bench_reps + 1);
        for (std::uint32_t rep = 0; rep <= cfg.bench_reps; ++rep) {  // first pass warms caches
            const auto start = std::chrono::steady_clock::now();
            double acc = 0.0;
            for (const Triplet& t : batch) acc += model.score(t);
            const auto stop = std::chrono::steady_clock::now();
            sink = sink + acc;
            if (rep > 0) times.push_back(std::chrono::duration<double>(stop - start).count());
        }
        std::sort(times.begin(), times.end());
        rows.push_back(BenchRow{size, times[times.size() / 2]});
    }
    return rows;
}

inline void cmd_bench(const RunConfig& cfg) {
    const std::vector<BenchRow> rows = run_bench(cfg);
    std::string csv = "size,median_seconds\n";
    for (const BenchRow& row : rows) {
        csv += std::to_string(row.size) + "," + std::to_string(row.median_seconds) + "\n";
    }
    if (cfg.out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(cfg.out, csv);
    }
}

inline json graph_stats(const KnowledgeGraph& g) {
    json j;
    j["entities"] = g.entities().size();
    j["relations"] = g.relations().size();
    j["triplets"] = g.size();
    j["duplicates_dropped"] = g.duplicates_dropped();
    return j;
}

// Parses the inputs, reports vocabulary/triplet statistics and (when both
// graphs are given) the discovered overlap.
inline json run_ingest_check(const RunConfig& cfg) {
    if (cfg.target.empty()) throw ConfigError("ingest-check needs --target");
    json out;
    const KnowledgeGraph g1 = ingest(cfg.target, GraphTag::target);
    out["target"] = graph_stats(g1);
    if (!cfg.external.empty()) {
        const KnowledgeGraph g2 = ingest(cfg.external, GraphTag::external);
        out["external"] = graph_stats(g2);
        AliasTable aliases;
        if (!cfg.aliases.empty()) aliases = load_alias_table(cfg.aliases);
        const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(),
                                     g2.relations(), aliases, cfg.overlap_fraction, cfg.seed);
        out["overlap_entities"] = m.overlap_count;
    }
    return out;
}

inline void cmd_ingest_check(const RunConfig& cfg) {
    std::cout << run_ingest_check(cfg).dump(2) << "\n";
}

}  // namespace kgval
