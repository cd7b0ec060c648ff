#pragma once
// Test helpers: temp files and tiny graph builders.

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "kgval/graph.hpp"

namespace kgval::test {

inline std::filesystem::path temp_dir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("kgval_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

inline std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path.string();
}

inline std::string data_file(const std::string& name) {
    return std::string(KGVAL_TEST_DATA_DIR) + "/" + name;
}

inline KnowledgeGraph graph_from_tsv(const std::string& content,
                                     GraphTag tag = GraphTag::target) {
    return ingest_rows(parse_triplet_tsv(content, "<memory>"), tag);
}

// Random well-formed rows over small vocabularies ent0..entN / relK.
inline std::vector<TripletRow> random_rows(std::mt19937_64& rng, std::size_t n,
                                           std::size_t num_entities, std::size_t num_relations) {
    std::uniform_int_distribution<std::size_t> ent(0, num_entities - 1);
    std::uniform_int_distribution<std::size_t> rel(0, num_relations - 1);
    std::vector<TripletRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(TripletRow{"ent" + std::to_string(ent(rng)),
                                  "rel" + std::to_string(rel(rng)),
                                  "ent" + std::to_string(ent(rng))});
    }
    return rows;
}

}  // namespace kgval::test
