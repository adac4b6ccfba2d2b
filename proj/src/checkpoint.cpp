#include "inferum/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace inferum {

namespace {

using nlohmann::json;

const char kMagic[4] = {'I', 'N', 'F', 'R'};

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.write(buf, sizeof(T)); // platform is little-endian; documented in the format
}

template <typename T>
T read_le(std::istream& in) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (!in)
        throw std::runtime_error("checkpoint: truncated file");
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

json arch_to_json(const PolicyArch& arch) {
    return json{{"obs_dim", arch.obs_dim},
                {"action_count", arch.action_count},
                {"num_agents", arch.num_agents},
                {"latent_dim", arch.latent_dim},
                {"hidden_sizes", arch.hidden_sizes}};
}

PolicyArch arch_from_json(const json& j) {
    PolicyArch arch;
    arch.obs_dim = j.at("obs_dim").get<int>();
    arch.action_count = j.at("action_count").get<int>();
    arch.num_agents = j.at("num_agents").get<int>();
    arch.latent_dim = j.at("latent_dim").get<int>();
    arch.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
    arch.validate();
    return arch;
}

void write_body(std::ostream& out, const PolicyParams& params, const std::string& metadata) {
    out.write(kMagic, 4);
    write_le<uint32_t>(out, kCheckpointVersion);
    write_le<uint64_t>(out, metadata.size());
    out.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
    for (double v : params.theta)
        write_le<double>(out, v);
}

} // namespace

void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const std::string& extra_metadata_json) {
    if (static_cast<long>(params.theta.size()) != params.arch.param_count())
        throw std::invalid_argument("save_checkpoint: theta length does not match arch");
    json meta = json::object();
    if (!extra_metadata_json.empty()) {
        meta = json::parse(extra_metadata_json);
        if (!meta.is_object())
            throw std::invalid_argument("save_checkpoint: metadata must be a JSON object");
    }
    meta["arch"] = arch_to_json(params.arch);
    meta["format"] = "inferum-checkpoint";
    meta["theta_count"] = params.theta.size();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("save_checkpoint: cannot open '" + path + "' for writing");
    write_body(f, params, meta.dump());
    if (!f)
        throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

void resave_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("resave_checkpoint: cannot open '" + path + "' for writing");
    write_body(f, ckpt.params, ckpt.metadata_json);
    if (!f)
        throw std::runtime_error("resave_checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_checkpoint: '" + path + "' is not an INFR checkpoint");
    const uint32_t version = read_le<uint32_t>(f);
    if (version != kCheckpointVersion)
        throw std::runtime_error("load_checkpoint: unsupported format version " +
                                 std::to_string(version));
    const uint64_t meta_len = read_le<uint64_t>(f);
    Checkpoint ckpt;
    ckpt.metadata_json.resize(meta_len);
    f.read(ckpt.metadata_json.data(), static_cast<std::streamsize>(meta_len));
    if (!f)
        throw std::runtime_error("load_checkpoint: truncated metadata block");

    json meta = json::parse(ckpt.metadata_json);
    ckpt.params.arch = arch_from_json(meta.at("arch"));
    const long count = ckpt.params.arch.param_count();
    ckpt.params.theta.resize(count);
    for (long i = 0; i < count; ++i)
        ckpt.params.theta[i] = read_le<double>(f);
    char extra;
    if (f.read(&extra, 1))
        throw std::runtime_error("load_checkpoint: trailing bytes after theta");
    return ckpt;
}

std::string file_digest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("file_digest: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return json_digest(ss.str());
}

std::string json_digest(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace inferum
