#include "bomf/fusion.hpp"
#include "bomf/io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace bomf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kMagic = "bomf-checkpoint";

std::string encode_le(std::span<const double> weights) {
    std::string bytes(weights.size() * 8, '\0');
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(weights[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    return bytes;
}

std::vector<double> decode_le(const std::string& bytes) {
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]))
                    << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

} // namespace

fs::path sidecar_path(const fs::path& payload) {
    auto p = payload;
    p += ".json";
    return p;
}

void save_checkpoint(const fs::path& path, std::span<const double> weights, const CheckpointMeta& meta) {
    const json header = {{"magic", kMagic}, {"version", 1},       {"dim", weights.size()},
                         {"id", meta.id},   {"step", meta.step}, {"dtype", "f64"},
                         {"endianness", "little"}};
    write_file_atomic(path, encode_le(weights));
    write_file_atomic(sidecar_path(path), header.dump(2) + "\n");
}

Member load_checkpoint(const fs::path& path) {
    using K = CheckpointError::Kind;
    const auto side = sidecar_path(path);
    if (!fs::exists(side)) throw CheckpointError(K::io, "missing checkpoint header " + side.string());
    json header;
    try {
        header = json::parse(read_file(side));
    } catch (const json::exception& e) {
        throw CheckpointError(K::bad_header, "unparseable checkpoint header " + side.string() + ": " + e.what());
    }
    if (!header.is_object() || header.value("magic", std::string{}) != kMagic)
        throw CheckpointError(K::bad_magic, "not a checkpoint header: " + side.string());
    if (header.value("dtype", std::string{}) != "f64" || header.value("endianness", std::string{}) != "little")
        throw CheckpointError(K::bad_header, "unsupported dtype/endianness in " + side.string());
    if (!header.contains("dim") || !header["dim"].is_number_unsigned())
        throw CheckpointError(K::bad_header, "missing dim in " + side.string());
    const auto dim = header["dim"].get<std::size_t>();

    if (!fs::exists(path)) throw CheckpointError(K::io, "missing checkpoint payload " + path.string());
    const auto bytes = read_file(path);
    if (bytes.size() < dim * 8 || bytes.size() % 8 != 0)
        throw CheckpointError(K::truncated, "checkpoint payload truncated: " + path.string());
    if (bytes.size() != dim * 8)
        throw CheckpointError(K::dim_mismatch, "checkpoint payload holds " + std::to_string(bytes.size() / 8) +
                                                   " values, header says " + std::to_string(dim));
    Member m;
    m.id = header.value("id", std::int64_t{0});
    m.step = header.value("step", std::int64_t{0});
    m.weights = decode_le(bytes);
    return m;
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
    json j;
    j["schema"] = 1;
    j["members"] = json::array();
    for (const auto& p : manifest.payloads) j["members"].push_back(p.generic_string());
    if (!manifest.task_json.empty()) j["task"] = json::parse(manifest.task_json);
    write_file_atomic(path, j.dump(2) + "\n");
}

Manifest read_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InvalidArgument("bad manifest " + path.string() + ": " + e.what());
    }
    if (!j.contains("members") || !j["members"].is_array())
        throw InvalidArgument("manifest " + path.string() + " has no members array");
    Manifest m;
    const auto base = path.parent_path();
    for (const auto& e : j["members"]) {
        const fs::path p = e.get<std::string>();
        m.payloads.push_back(p.is_absolute() ? p : base / p);
    }
    if (j.contains("task")) m.task_json = j["task"].dump();
    return m;
}

MemberSet load_members(const fs::path& manifest_path) {
    const auto manifest = read_manifest(manifest_path);
    std::vector<Member> members;
    for (const auto& p : manifest.payloads) members.push_back(load_checkpoint(p));
    return MemberSet(std::move(members));
}

fs::path write_member_dir(const fs::path& dir, const MemberSet& members, const std::string& task_json) {
    fs::create_directories(dir);
    Manifest manifest;
    manifest.task_json = task_json;
    for (const auto& m : members.members()) {
        const fs::path name = "member_" + std::to_string(m.id) + ".ckpt";
        save_checkpoint(dir / name, m.weights, {m.id, m.step});
        manifest.payloads.push_back(name);
    }
    const auto path = dir / "manifest.json";
    save_manifest(path, manifest);
    return path;
}

} // namespace bomf
