#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "kgval/alignment.hpp"
#include "util.hpp"

using namespace kgval;
using kgval::test::graph_from_tsv;

namespace {

KnowledgeGraph fig2_target() {
    return ingest(kgval::test::data_file("fig2_target.tsv"), GraphTag::target);
}

KnowledgeGraph fig2_external() {
    return ingest(kgval::test::data_file("fig2_external.tsv"), GraphTag::external);
}

}  // namespace

TEST_CASE("exact matches merge onto target IDs, the rest get fresh IDs") {
    const KnowledgeGraph g1 = fig2_target();
    const KnowledgeGraph g2 = fig2_external();
    const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(), g2.relations());

    CHECK(m.overlap_count == 2);  // Washington, USA
    CHECK(m.entity_map[*g2.entities().find("Washington")] == *g1.entities().find("Washington"));
    CHECK(m.entity_map[*g2.entities().find("USA")] == *g1.entities().find("USA"));
    // Mexico (country) is not Mexico City; it gets an appended ID
    CHECK(m.entity_map[*g2.entities().find("Mexico")] == g1.entities().size());
    CHECK(m.shared_entities.size() == 5);
    CHECK(m.shared_relations.size() == 4);
    CHECK(m.relation_offset == 2);

    CHECK(m.origin(*g1.entities().find("USA")) == EntityOrigin::shared);
    CHECK(m.origin(*g1.entities().find("Obama")) == EntityOrigin::target);
    CHECK(m.origin(static_cast<EntityId>(g1.entities().size())) == EntityOrigin::external);
}

TEST_CASE("remap rewrites the external graph into shared IDs") {
    const KnowledgeGraph g1 = fig2_target();
    const KnowledgeGraph g2 = fig2_external();
    const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(), g2.relations());
    const KnowledgeGraph g2s = remap(g2, m);

    CHECK(g2s.size() == g2.size());
    const Triplet probe{*g1.entities().find("Washington"),
                        *m.shared_relations.find("locatedin"), *g1.entities().find("USA")};
    CHECK(g2s.contains(probe));
}

TEST_CASE("empty external vocabulary aligns to an empty map") {
    const KnowledgeGraph g1 = fig2_target();
    const Vocabulary empty;
    const AlignmentMap m = align(g1.entities(), g1.relations(), empty, empty);
    CHECK(m.entity_map.empty());
    CHECK(m.overlap_count == 0);
    CHECK(m.shared_entities.size() == g1.entities().size());
}

TEST_CASE("alias hops map differently-named entities and agree with all-pairs matching") {
    const KnowledgeGraph g1 = graph_from_tsv("USA\tr\tCanada\n");
    const KnowledgeGraph g2 =
        graph_from_tsv("United_States\tq\tOttawa\n", GraphTag::external);
    AliasTable aliases;
    aliases.add("USA", "United_States");

    const AlignmentMap m =
        align(g1.entities(), g1.relations(), g2.entities(), g2.relations(), aliases);
    CHECK(m.overlap_count == 1);
    CHECK(m.entity_map[*g2.entities().find("United_States")] == *g1.entities().find("USA"));

    // quadratic oracle: compare every external string against every target
    // string directly and through the alias link
    std::size_t oracle_matches = 0;
    for (std::uint32_t e2 = 0; e2 < g2.entities().size(); ++e2) {
        for (std::uint32_t e1 = 0; e1 < g1.entities().size(); ++e1) {
            const std::string& a = g2.entities().name(e2);
            const std::string& b = g1.entities().name(e1);
            bool linked = a == b;
            for (const std::string& c : aliases.linked(a)) linked |= c == b;
            if (linked) {
                ++oracle_matches;
                CHECK(m.entity_map[e2] == e1);
            }
        }
    }
    CHECK(oracle_matches == m.overlap_count);
}

TEST_CASE("alias conflicts are configuration errors") {
    AliasTable aliases;
    aliases.add("USA", "America");
    CHECK_THROWS_AS(aliases.add("Canada", "America"), ConfigError);
    CHECK_THROWS_WITH(aliases.add("Canada", "America"),
                      Catch::Matchers::ContainsSubstring("America"));
}

TEST_CASE("alias table loads from 2-column TSV") {
    const std::string path =
        kgval::test::write_temp("alias.tsv", "USA\tUnited_States\nUSA\tU.S.\n");
    const AliasTable t = load_alias_table(path);
    const auto linked = t.linked("USA");
    CHECK(linked == std::vector<std::string>{"United_States", "U.S."});
    const std::string bad = kgval::test::write_temp("alias_bad.tsv", "one_column\n");
    CHECK_THROWS_AS(load_alias_table(bad), DataError);
}

TEST_CASE("overlap subsampling keeps exactly ceil(p * N) mappings") {
    std::string target_tsv;
    std::string external_tsv;
    for (int i = 0; i < 10; ++i) {
        target_tsv += "shared" + std::to_string(i) + "\tr\tt" + std::to_string(i) + "\n";
        external_tsv += "shared" + std::to_string(i) + "\tq\tx" + std::to_string(i) + "\n";
    }
    const KnowledgeGraph g1 = graph_from_tsv(target_tsv);
    const KnowledgeGraph g2 = graph_from_tsv(external_tsv, GraphTag::external);
    for (double p : {0.35, 0.5, 0.71, 1.0}) {
        const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(),
                                     g2.relations(), {}, p, /*seed=*/9);
        CHECK(m.overlap_count == static_cast<std::size_t>(std::ceil(p * 10)));
    }
    // same seed, same selection
    const AlignmentMap a = align(g1.entities(), g1.relations(), g2.entities(), g2.relations(),
                                 {}, 0.5, 42);
    const AlignmentMap b = align(g1.entities(), g1.relations(), g2.entities(), g2.relations(),
                                 {}, 0.5, 42);
    CHECK(a.entity_map == b.entity_map);
}

TEST_CASE("remap with disjoint vocabularies only offsets IDs") {
    const KnowledgeGraph g1 = graph_from_tsv("a\tr\tb\n");
    const KnowledgeGraph g2 = graph_from_tsv("c\tq\td\nd\tq\tc\n", GraphTag::external);
    const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(), g2.relations());
    REQUIRE(m.overlap_count == 0);
    const KnowledgeGraph g2s = remap(g2, m);
    CHECK(g2s.size() == g2.size());
    for (std::size_t i = 0; i < g2.size(); ++i) {
        CHECK(g2s.triplets()[i].subject == g2.triplets()[i].subject + g1.entities().size());
        CHECK(g2s.triplets()[i].object == g2.triplets()[i].object + g1.entities().size());
        CHECK(g2s.triplets()[i].relation == g2.triplets()[i].relation + m.relation_offset);
    }
}

TEST_CASE("remap preserves pair sets under the rename oracle") {
    std::mt19937_64 rng(23);
    const KnowledgeGraph g1 =
        ingest_rows(kgval::test::random_rows(rng, 50, 9, 3), GraphTag::target);
    const KnowledgeGraph g2 =
        ingest_rows(kgval::test::random_rows(rng, 70, 12, 4), GraphTag::external);
    const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(), g2.relations());
    const KnowledgeGraph g2s = remap(g2, m);

    CHECK(g2s.size() == g2.size());
    for (RelationId r = 0; r < g2.relations().size(); ++r) {
        std::set<EntityPair> oracle;
        for (const EntityPair& p : g2.entity_pairs(r)) {
            oracle.insert({m.entity_map[p.first], m.entity_map[p.second]});
        }
        const auto& got = g2s.entity_pairs(m.map_external_relation(r));
        CHECK(std::set<EntityPair>(got.begin(), got.end()) == oracle);
    }
}

TEST_CASE("same-named relations stay distinct across graphs") {
    const KnowledgeGraph g1 = graph_from_tsv("a\tlocatedin\tb\n");
    const KnowledgeGraph g2 = graph_from_tsv("a\tlocatedin\tc\n", GraphTag::external);
    const AlignmentMap m = align(g1.entities(), g1.relations(), g2.entities(), g2.relations());
    CHECK(m.shared_relations.size() == 2);
    // lookups resolve to the target's relation
    CHECK(*m.shared_relations.find("locatedin") == 0);
    CHECK(m.shared_relations.name(1) == "locatedin");
}
