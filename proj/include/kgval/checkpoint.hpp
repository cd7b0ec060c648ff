#pragma once
// Binary model checkpoint. Stores the kind, dimensionality, seed, vocabulary
// sizes and names, the raw parameter arrays, and the run configuration that
// produced it (as a JSON blob). Doubles are written raw, so save -> load ->
// save round-trips bit-exactly.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "kgval/common.hpp"
#include "kgval/model.hpp"

namespace kgval {

struct Checkpoint {
    EmbeddingModel model;
    std::vector<std::string> entity_names;    // shared-space order
    std::vector<std::string> relation_names;  // target relations then external
    std::string config_json;
};

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'K', 'G', 'V', 'C', 'K', 'P', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated checkpoint");
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    const auto len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw DataError("truncated checkpoint");
    return s;
}

inline void write_doubles(std::ostream& out, const std::vector<double>& v) {
    write_pod(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline void read_doubles(std::istream& in, std::vector<double>& v) {
    const auto n = read_pod<std::uint64_t>(in);
    if (n != v.size()) throw DataError("checkpoint parameter block has unexpected size");
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw DataError("truncated checkpoint");
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint to " + path);
    out.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
    detail::write_pod(out, static_cast<std::uint8_t>(ckpt.model.kind()));
    detail::write_pod(out, ckpt.model.dim());
    detail::write_pod(out, ckpt.model.seed());
    detail::write_pod(out, static_cast<std::uint64_t>(ckpt.model.num_entities()));
    detail::write_pod(out, static_cast<std::uint64_t>(ckpt.model.num_relations()));
    for (const auto& name : ckpt.entity_names) detail::write_string(out, name);
    for (const auto& name : ckpt.relation_names) detail::write_string(out, name);
    detail::write_doubles(out, ckpt.model.entity_params());
    detail::write_doubles(out, ckpt.model.relation_params());
    detail::write_string(out, ckpt.config_json);
    if (!out) throw DataError("failed writing checkpoint to " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0) {
        throw DataError(path + " is not a checkpoint file");
    }
    const auto kind_byte = detail::read_pod<std::uint8_t>(in);
    if (kind_byte > static_cast<std::uint8_t>(ModelKind::TransE)) {
        throw DataError(path + " has an unknown model kind");
    }
    const auto kind = static_cast<ModelKind>(kind_byte);
    const auto dim = detail::read_pod<std::uint32_t>(in);
    const auto seed = detail::read_pod<std::uint64_t>(in);
    const auto num_entities = detail::read_pod<std::uint64_t>(in);
    const auto num_relations = detail::read_pod<std::uint64_t>(in);

    Checkpoint ckpt{EmbeddingModel(kind, dim, num_entities, num_relations, seed), {}, {}, {}};
    ckpt.entity_names.reserve(num_entities);
    for (std::uint64_t i = 0; i < num_entities; ++i) {
        ckpt.entity_names.push_back(detail::read_string(in));
    }
    ckpt.relation_names.reserve(num_relations);
    for (std::uint64_t i = 0; i < num_relations; ++i) {
        ckpt.relation_names.push_back(detail::read_string(in));
    }
    detail::read_doubles(in, ckpt.model.entity_params());
    detail::read_doubles(in, ckpt.model.relation_params());
    ckpt.config_json = detail::read_string(in);
    return ckpt;
}

}  // namespace kgval
