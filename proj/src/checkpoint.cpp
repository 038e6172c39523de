#include "acmamba/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>

#include <json.hpp>

#include "acmamba/errors.hpp"

namespace acmamba {

namespace {

constexpr char kMagic[4] = {'A', 'C', 'M', 'K'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

void saveCheckpoint(const Autoencoder& model, const std::string& path) {
    const auto layout = paramLayout(model);
    nlohmann::json params = nlohmann::json::array();
    for (const auto& e : layout)
        params.push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}});
    nlohmann::json manifest = {{"format", "acmamba-checkpoint"},
                               {"version", 1},
                               {"in_dim", model.inDim()},
                               {"hidden_dim", model.hiddenDim()},
                               {"state_dim", model.stateDim()},
                               {"dtype", "f32"},
                               {"order", "col_major"},
                               {"params", params}};
    const std::string header = manifest.dump();

    const VecXd flat = flattenTensors(model);
    std::vector<float> payload(static_cast<std::size_t>(flat.size()));
    for (Index i = 0; i < flat.size(); ++i)
        payload[static_cast<std::size_t>(i)] = static_cast<float>(flat(i));

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    const std::uint32_t len = static_cast<std::uint32_t>(header.size());
    const unsigned char len_le[4] = {
        static_cast<unsigned char>(len & 0xff),
        static_cast<unsigned char>((len >> 8) & 0xff),
        static_cast<unsigned char>((len >> 16) & 0xff),
        static_cast<unsigned char>((len >> 24) & 0xff)};
    if (std::fwrite(kMagic, 1, 4, f.get()) != 4 ||
        std::fwrite(len_le, 1, 4, f.get()) != 4 ||
        std::fwrite(header.data(), 1, header.size(), f.get()) != header.size() ||
        std::fwrite(payload.data(), 4, payload.size(), f.get()) != payload.size())
        throw IoError("short write to '" + path + "'");
}

Autoencoder loadCheckpoint(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw MissingFileError("no such file: '" + path + "'");
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open '" + path + "' for reading");

    unsigned char head[8];
    if (std::fread(head, 1, 8, f.get()) != 8 || std::memcmp(head, kMagic, 4) != 0)
        throw CorruptHeaderError("'" + path + "': not a checkpoint file");
    const std::uint32_t len = static_cast<std::uint32_t>(head[4]) |
                              (static_cast<std::uint32_t>(head[5]) << 8) |
                              (static_cast<std::uint32_t>(head[6]) << 16) |
                              (static_cast<std::uint32_t>(head[7]) << 24);
    std::string header(len, '\0');
    if (std::fread(header.data(), 1, len, f.get()) != len)
        throw CorruptHeaderError("'" + path + "': truncated manifest");

    Index in_dim = 0, hidden = 0, state = 0;
    try {
        const auto j = nlohmann::json::parse(header);
        if (j.at("format") != "acmamba-checkpoint" || j.at("dtype") != "f32")
            throw CorruptHeaderError("'" + path + "': unsupported checkpoint format");
        in_dim = j.at("in_dim").get<Index>();
        hidden = j.at("hidden_dim").get<Index>();
        state = j.at("state_dim").get<Index>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptHeaderError("'" + path + "': " + e.what());
    }

    Autoencoder model = makeAutoencoder<double>(in_dim, hidden, state, 0);
    const Index n = paramCount(model);

    const std::size_t expect = static_cast<std::size_t>(n) * 4;
    const std::size_t file_size = std::filesystem::file_size(path);
    if (file_size != 8 + len + expect)
        throw SizeMismatchError("'" + path + "': payload size does not match shapes");

    std::vector<float> payload(static_cast<std::size_t>(n));
    if (std::fread(payload.data(), 4, payload.size(), f.get()) != payload.size())
        throw IoError("short read from '" + path + "'");

    VecXd flat(n);
    for (Index i = 0; i < n; ++i) flat(i) = payload[static_cast<std::size_t>(i)];
    assignTensors(model, flat);
    model.initialized = true;
    return model;
}

} // namespace acmamba
