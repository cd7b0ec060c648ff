#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "kgval/alignment.hpp"
#include "kgval/negative.hpp"
#include "util.hpp"

using namespace kgval;
using kgval::test::graph_from_tsv;

namespace {

struct SharedFixture {
    KnowledgeGraph g1;
    KnowledgeGraph g2;
    AlignmentMap map;
    NegativeRelationIndex idx;
};

SharedFixture make_shared(const KnowledgeGraph& raw1, const KnowledgeGraph& raw2) {
    AlignmentMap m =
        align(raw1.entities(), raw1.relations(), raw2.entities(), raw2.relations());
    KnowledgeGraph g1 = lift(raw1, m);
    KnowledgeGraph g2 = remap(raw2, m);
    NegativeRelationIndex idx = build_negative_relation_index(g1, g2, m.relation_offset);
    return SharedFixture{std::move(g1), std::move(g2), std::move(m), std::move(idx)};
}

SharedFixture fig2() {
    return make_shared(ingest(kgval::test::data_file("fig2_target.tsv"), GraphTag::target),
                       ingest(kgval::test::data_file("fig2_external.tsv"), GraphTag::external));
}

std::set<RelationId> as_set(const std::vector<RelationId>& v) { return {v.begin(), v.end()}; }

// Exhaustive definition: r1 and r2 conflict iff no (s,o) pair satisfies both.
bool brute_force_disjoint(const KnowledgeGraph& g1, RelationId r1, const KnowledgeGraph& g2,
                          RelationId r2) {
    for (const EntityPair& a : g1.entity_pairs(r1)) {
        for (const EntityPair& b : g2.entity_pairs(r2)) {
            if (a == b) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("overlapping pairs of locatedat/locatedin is {(Washington, USA)}") {
    const SharedFixture f = fig2();
    const RelationId locatedat = *f.map.shared_relations.find("locatedat");
    const RelationId locatedin = *f.map.shared_relations.find("locatedin");
    const auto pairs = overlapping_pairs(f.g1, locatedat, f.g2, locatedin);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == EntityPair{*f.map.shared_entities.find("Washington"),
                                 *f.map.shared_entities.find("USA")});
}

TEST_CASE("a relation overlaps fully with itself across identical graphs") {
    std::mt19937_64 rng(5);
    const auto rows = kgval::test::random_rows(rng, 30, 8, 2);
    const KnowledgeGraph a = ingest_rows(rows, GraphTag::target);
    const KnowledgeGraph b = ingest_rows(rows, GraphTag::external);
    const SharedFixture f = make_shared(a, b);
    for (RelationId r = 0; r < f.map.relation_offset; ++r) {
        const RelationId twin =
            *f.map.shared_relations.find(a.relations().name(r)) + f.map.relation_offset;
        const auto pairs = overlapping_pairs(f.g1, r, f.g2, twin);
        CHECK(pairs.size() == f.g1.entity_pairs(r).size());
    }
}

TEST_CASE("negative relation set of livesin covers the whole external graph") {
    const SharedFixture f = fig2();
    const RelationId livesin = *f.map.shared_relations.find("livesin");
    const RelationId locatedat = *f.map.shared_relations.find("locatedat");
    const RelationId locatedin = *f.map.shared_relations.find("locatedin");
    const RelationId hasneighbor = *f.map.shared_relations.find("hasneighbor");

    CHECK(as_set(f.idx.of(livesin)) == std::set<RelationId>{locatedin, hasneighbor});
    // locatedat shares (Washington, USA) with locatedin, so only hasneighbor conflicts
    CHECK(as_set(f.idx.of(locatedat)) == std::set<RelationId>{hasneighbor});
    CHECK(as_set(f.idx.of(hasneighbor)) == std::set<RelationId>{livesin, locatedat});
}

TEST_CASE("negative relation index matches brute force on random instances") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 25; ++round) {
        const KnowledgeGraph raw1 =
            ingest_rows(kgval::test::random_rows(rng, 40, 10, 4), GraphTag::target);
        const KnowledgeGraph raw2 =
            ingest_rows(kgval::test::random_rows(rng, 40, 10, 4), GraphTag::external);
        const SharedFixture f = make_shared(raw1, raw2);
        const RelationId total = f.map.shared_relations.size();
        for (RelationId r1 = 0; r1 < f.map.relation_offset; ++r1) {
            for (RelationId r2 = f.map.relation_offset; r2 < total; ++r2) {
                const bool expect = brute_force_disjoint(f.g1, r1, f.g2, r2);
                const bool in12 = as_set(f.idx.of(r1)).contains(r2);
                const bool in21 = as_set(f.idx.of(r2)).contains(r1);
                CHECK(in12 == expect);
                CHECK(in21 == expect);  // symmetry
            }
        }
    }
}

TEST_CASE("empty external relation is negative to every target relation") {
    // hasneighbor's pairs never mention livesin's pair, and an external
    // relation whose pairs miss every target pair conflicts with all of them
    const KnowledgeGraph raw1 = graph_from_tsv("a\tr0\tb\nc\tr1\td\n");
    const KnowledgeGraph raw2 = graph_from_tsv("x\tq\ty\n", GraphTag::external);
    const SharedFixture f = make_shared(raw1, raw2);
    const RelationId q = *f.map.shared_relations.find("q");
    CHECK(f.idx.of(q).size() == f.map.relation_offset);
}

TEST_CASE("conventional corruption avoids both existence sets") {
    const SharedFixture f = fig2();
    std::mt19937_64 rng(17);
    const Triplet pos = f.g1.triplets()[2];  // (Obama, livesin, Washington)
    for (int i = 0; i < 1000; ++i) {
        const auto negs =
            corrupt_conventional(pos, 1, rng, f.map.shared_entities.size(), f.g1, &f.g2);
        REQUIRE(negs.size() == 1);
        CHECK_FALSE(f.g1.contains(negs[0]));
        CHECK_FALSE(f.g2.contains(negs[0]));
        const bool subject_kept = negs[0].subject == pos.subject;
        const bool object_kept = negs[0].object == pos.object;
        CHECK((subject_kept || object_kept));
        CHECK(negs[0].relation == pos.relation);
    }
}

TEST_CASE("corruption fails on a saturated graph") {
    // two entities, one relation, all four triplets present
    const KnowledgeGraph g = graph_from_tsv("a\tr\ta\na\tr\tb\nb\tr\ta\nb\tr\tb\n");
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(corrupt_conventional(g.triplets()[0], 1, rng, 2, g), SamplingError);
}

TEST_CASE("relation replacement reproduces the Mexico example") {
    const SharedFixture f = fig2();
    const RelationId hasneighbor = *f.map.shared_relations.find("hasneighbor");
    const Triplet mexico_usa{*f.map.shared_entities.find("Mexico"), hasneighbor,
                             *f.map.shared_entities.find("USA")};
    REQUIRE(f.g2.contains(mexico_usa));

    std::mt19937_64 rng(2);
    const Triplet expected{*f.map.shared_entities.find("Mexico"),
                           *f.map.shared_relations.find("locatedat"),
                           *f.map.shared_entities.find("USA")};
    bool seen = false;
    for (int i = 0; i < 200; ++i) {
        const auto neg = replace_relation(mexico_usa, f.idx, rng, f.g1, f.g2);
        REQUIRE(neg.has_value());
        CHECK(as_set(f.idx.of(hasneighbor)).contains(neg->relation));
        CHECK_FALSE(f.g1.contains(*neg));
        CHECK_FALSE(f.g2.contains(*neg));
        seen |= *neg == expected;
    }
    CHECK(seen);
}

TEST_CASE("entity replacement reproduces the Washington example") {
    const SharedFixture f = fig2();
    const RelationId hasneighbor = *f.map.shared_relations.find("hasneighbor");
    const Triplet mexico_usa{*f.map.shared_entities.find("Mexico"), hasneighbor,
                             *f.map.shared_entities.find("USA")};

    std::mt19937_64 rng(3);
    const Triplet expected{*f.map.shared_entities.find("Washington"), hasneighbor,
                           *f.map.shared_entities.find("USA")};
    bool seen = false;
    for (int i = 0; i < 200; ++i) {
        const auto neg = replace_entities(mexico_usa, f.idx, f.g1, rng, f.g2);
        REQUIRE(neg.has_value());
        CHECK(neg->relation == hasneighbor);
        // the pair must satisfy some conflicting target relation
        bool pair_found = false;
        for (RelationId r1 : f.idx.of(hasneighbor)) {
            pair_found |= f.g1.has_pair(r1, neg->subject, neg->object);
        }
        CHECK(pair_found);
        CHECK_FALSE(f.g1.contains(*neg));
        CHECK_FALSE(f.g2.contains(*neg));
        seen |= *neg == expected;
    }
    CHECK(seen);
}

TEST_CASE("cross-KG sampling signals no-candidate instead of failing") {
    // identical graphs: every relation pair overlaps, so N(r) is empty
    std::mt19937_64 rng(4);
    const auto rows = kgval::test::random_rows(rng, 20, 6, 2);
    const SharedFixture f = make_shared(ingest_rows(rows, GraphTag::target),
                                        ingest_rows(rows, GraphTag::external));
    const Triplet t2 = f.g2.triplets()[0];
    REQUIRE(f.idx.of(t2.relation).empty());
    CHECK_FALSE(replace_relation(t2, f.idx, rng, f.g1, f.g2).has_value());
    CHECK_FALSE(replace_entities(t2, f.idx, f.g1, rng, f.g2).has_value());
}

TEST_CASE("cross-KG samplers reject target-graph triplets") {
    const SharedFixture f = fig2();
    std::mt19937_64 rng(6);
    const Triplet g1_triplet = f.g1.triplets()[0];
    CHECK_THROWS_AS(replace_relation(g1_triplet, f.idx, rng, f.g1, f.g2), std::logic_error);
    CHECK_THROWS_AS(replace_entities(g1_triplet, f.idx, f.g1, rng, f.g2), std::logic_error);
}

TEST_CASE("fixed seeds reproduce identical negative batches") {
    const SharedFixture f = fig2();
    const Triplet t2 = f.g2.triplets()[1];
    const auto run = [&](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<NegativeBatch> batches;
        for (int i = 0; i < 20; ++i) {
            batches.push_back(generate_negatives(t2, true, 3, true, &f.idx, rng,
                                                 f.map.shared_entities.size(), f.g1, &f.g2));
        }
        return batches;
    };
    const auto a = run(99);
    const auto b = run(99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].conventional == b[i].conventional);
        CHECK(a[i].relation_replaced == b[i].relation_replaced);
        CHECK(a[i].entity_replaced == b[i].entity_replaced);
        CHECK(a[i].conventional.size() == 3);
    }
}
