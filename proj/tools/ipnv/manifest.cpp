#include "cli.hpp"

#include "ipnv/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <fmt/format.h>

#include <memory>

namespace ipnv::cli {

std::string sha256_hex(std::string_view bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
        throw IoError("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

void write_run_manifest(const std::filesystem::path& directory, const ManifestRecord& record)
{
    nlohmann::ordered_json j;
    j["tool"] = "ipnv";
    j["version"] = kToolVersion;
    j["command"] = record.command;
    j["parameters"] = record.parameters;
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& path : record.inputs) {
        inputs.push_back({{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}});
    }
    j["inputs"] = std::move(inputs);
    auto outputs = nlohmann::ordered_json::array();
    for (const auto& path : record.outputs) {
        outputs.push_back(path.string());
    }
    j["outputs"] = std::move(outputs);
    j["duration_seconds"] = record.duration.count();
    write_file_atomic(directory / kManifestFile, j.dump(2) + "\n");
}

} // namespace ipnv::cli
