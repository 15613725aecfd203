#include "earlyguard/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "earlyguard/errors.hpp"

namespace earlyguard {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("model file truncated while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

nlohmann::json normalizer_to_json(const Normalizer& n) {
    return nlohmann::json{{"mu", n.mu}, {"sigma", n.sigma}, {"fitted_on", n.fitted_on}};
}

Normalizer normalizer_from_json(const nlohmann::json& j) {
    Normalizer n;
    const auto mu = j.at("mu").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    if (mu.size() != kNumFeatures || sigma.size() != kNumFeatures)
        throw ValidationError("model normalizer must carry exactly " + std::to_string(kNumFeatures) + " features");
    std::copy(mu.begin(), mu.end(), n.mu.begin());
    std::copy(sigma.begin(), sigma.end(), n.sigma.begin());
    n.fitted_on = j.at("fitted_on").get<std::uint64_t>();
    return n;
}

}  // namespace

void save_model(const GruNetwork& net, const std::filesystem::path& path) {
    nlohmann::json header{
        {"config", hyperconfig_to_json(net.config)},
        {"input_dim", net.input_dim},
        {"init_seed", net.init_seed},
        {"train_seed", net.train_seed},
        {"trained", net.trained},
    };
    header["normalizer"] = net.normalizer ? normalizer_to_json(*net.normalizer) : nlohmann::json(nullptr);
    auto tensors = nlohmann::json::array();
    for (const auto& d : net.layout)
        tensors.push_back({{"name", d.name}, {"rows", d.rows}, {"cols", d.cols}});
    header["tensors"] = std::move(tensors);

    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write model file '" + path.string() + "'");
    out.write(kModelMagic, 4);
    put_u32(out, kModelFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(hs.size()));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    out.write(reinterpret_cast<const char*>(net.params.data()),
              static_cast<std::streamsize>(net.params.size()) * static_cast<std::streamsize>(sizeof(double)));
    if (!out) throw FileError("write failed for model file '" + path.string() + "'");
}

GruNetwork load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open model file '" + path.string() + "'");

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0)
        throw ValidationError("'" + path.string() + "' is not a model file (bad magic)");
    const std::uint32_t version = get_u32(in, "format version");
    if (version != kModelFormatVersion)
        throw ValidationError("model file '" + path.string() + "' uses unsupported format version " +
                              std::to_string(version) + " (supported: " + std::to_string(kModelFormatVersion) + ")");
    const std::uint32_t hlen = get_u32(in, "header length");
    std::string hs(hlen, '\0');
    if (!in.read(hs.data(), hlen)) throw ValidationError("model file truncated while reading header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model header is not valid JSON: ") + e.what());
    }

    GruNetwork net;
    try {
        net.config = hyperconfig_from_json(header.at("config"));
        net.input_dim = header.at("input_dim").get<int>();
        net.init_seed = header.at("init_seed").get<std::uint64_t>();
        net.train_seed = header.at("train_seed").get<std::uint64_t>();
        net.trained = header.at("trained").get<bool>();
        if (!header.at("normalizer").is_null()) net.normalizer = normalizer_from_json(header.at("normalizer"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad model header: ") + e.what());
    }

    net.layout = tensor_layout(net.config, net.input_dim);
    const auto& tensors = header.at("tensors");
    if (tensors.size() != net.layout.size())
        throw ValidationError("model tensor list does not match the declared architecture");
    for (std::size_t i = 0; i < net.layout.size(); ++i) {
        const auto& t = tensors[i];
        if (t.at("name").get<std::string>() != net.layout[i].name ||
            t.at("rows").get<Eigen::Index>() != net.layout[i].rows ||
            t.at("cols").get<Eigen::Index>() != net.layout[i].cols)
            throw ValidationError("model tensor '" + t.at("name").get<std::string>() +
                                  "' does not match the declared architecture");
    }

    const TensorDesc& last = net.layout.back();
    net.params.resize(last.offset + last.size());
    if (!in.read(reinterpret_cast<char*>(net.params.data()),
                 static_cast<std::streamsize>(net.params.size()) * static_cast<std::streamsize>(sizeof(double))))
        throw ValidationError("model file truncated while reading parameters");
    char extra;
    if (in.read(&extra, 1)) throw ValidationError("model file has trailing bytes after parameters");
    return net;
}

}  // namespace earlyguard
