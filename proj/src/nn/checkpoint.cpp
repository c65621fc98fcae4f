#include "porogen/nn/checkpoint.hpp"

#include <fstream>

#include "porogen/core/errors.hpp"

namespace porogen::nn {

namespace {
constexpr const char* kMagic = "POROGEN-CKPT-1";
}

void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                      const std::string& blob) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open checkpoint for writing: " + path.string());
    std::string h = header.dump();
    out << kMagic << "\n" << h.size() << "\n" << h;
    out << blob.size() << "\n" << blob;
    if (!out) throw ValidationError("checkpoint write failed: " + path.string());
}

nlohmann::json read_checkpoint(const std::filesystem::path& path, std::string& blob) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path.string());
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic) throw ValidationError("not a checkpoint file: " + path.string());
    std::size_t hlen = 0;
    in >> hlen;
    in.ignore(1);
    std::string h(hlen, '\0');
    in.read(h.data(), static_cast<std::streamsize>(hlen));
    std::size_t blen = 0;
    in >> blen;
    in.ignore(1);
    blob.assign(blen, '\0');
    in.read(blob.data(), static_cast<std::streamsize>(blen));
    if (!in) throw ValidationError("truncated checkpoint: " + path.string());
    return nlohmann::json::parse(h);
}

}  // namespace porogen::nn
