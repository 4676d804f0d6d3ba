#include "criticbench/models/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "criticbench/errors.hpp"

namespace criticbench::models {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'C', 'B', 'M', '1'};

std::string encode_blob(const std::vector<double>& params) {
    std::string out;
    out.reserve(params.size() * 8);
    for (double v : params) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
    return out;
}

void write_checkpoint(const std::filesystem::path& path, const json& header,
                      const std::vector<double>& params) {
    const std::string header_str = header.dump();
    std::string out;
    out.append(kMagic, sizeof kMagic);
    const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
    out += header_str;
    out += encode_blob(params);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw io_error(io_error::kind::not_found, path.string() + ": cannot open for writing");
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw io_error(io_error::kind::truncated, path.string() + ": short write");
}

struct Loaded {
    json header;
    std::vector<double> params;
};

Loaded read_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw io_error(io_error::kind::not_found, path.string() + ": cannot open for reading");
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string buf = std::move(ss).str();

    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw io_error(io_error::kind::bad_magic,
                       path.string() + ": bad magic (not a .cbm file)");
    }
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) {
        len |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[4 + i])) << (8 * i);
    }
    if (buf.size() < 8 + static_cast<std::size_t>(len)) {
        throw io_error(io_error::kind::truncated, path.string() + ": truncated JSON header");
    }
    Loaded out;
    try {
        out.header = json::parse(buf.substr(8, len));
    } catch (const json::parse_error& e) {
        throw io_error(io_error::kind::bad_header,
                       path.string() + ": invalid JSON header: " + e.what());
    }

    const std::size_t blob_bytes = buf.size() - 8 - len;
    if (blob_bytes % 8 != 0) {
        throw io_error(io_error::kind::truncated,
                       path.string() + ": parameter blob is not a multiple of 8 bytes");
    }
    out.params.resize(blob_bytes / 8);
    for (std::size_t i = 0; i < out.params.size(); ++i) {
        std::uint64_t bits = 0;
        const std::size_t base = 8 + len + i * 8;
        for (int b = 0; b < 8; ++b) {
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[base + b]))
                    << (8 * b);
        }
        std::memcpy(&out.params[i], &bits, sizeof(double));
    }
    return out;
}

template <typename T>
T field(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) {
        throw io_error(io_error::kind::bad_header, path + ": missing header field '" +
                                                       std::string(key) + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw io_error(io_error::kind::bad_header,
                       path + ": header field '" + std::string(key) + "': " + e.what());
    }
}

} // namespace

json distribution_to_json(const data::DistributionSpec& spec) {
    json j;
    j["kind"] = data::distribution_kind_name(spec.kind);
    j["dimension"] = spec.dimension;
    switch (spec.kind) {
        case data::DistributionKind::kGaussianMixture: {
            json comps = json::array();
            for (const auto& c : spec.components) {
                comps.push_back(
                    {{"mean", c.mean}, {"covariance", c.covariance}, {"weight", c.weight}});
            }
            j["components"] = std::move(comps);
            break;
        }
        case data::DistributionKind::kRing:
            j["radius"] = spec.ring_radius;
            j["noise"] = spec.ring_noise;
            break;
        case data::DistributionKind::kUniformBox:
            j["lo"] = spec.box_lo;
            j["hi"] = spec.box_hi;
            break;
    }
    return j;
}

data::DistributionSpec distribution_from_json(const json& j, const std::string& path) {
    data::DistributionSpec spec;
    spec.kind = data::distribution_kind_from_name(field<std::string>(j, "kind", path));
    spec.dimension = field<std::size_t>(j, "dimension", path);
    switch (spec.kind) {
        case data::DistributionKind::kGaussianMixture: {
            if (!j.contains("components") || !j.at("components").is_array()) {
                throw config_error(path + ".components: array required");
            }
            for (const auto& cj : j.at("components")) {
                data::MixtureComponent c;
                c.mean = field<std::vector<double>>(cj, "mean", path + ".components");
                c.covariance =
                    field<std::vector<double>>(cj, "covariance", path + ".components");
                c.weight = field<double>(cj, "weight", path + ".components");
                spec.components.push_back(std::move(c));
            }
            break;
        }
        case data::DistributionKind::kRing:
            spec.ring_radius = field<double>(j, "radius", path);
            spec.ring_noise = field<double>(j, "noise", path);
            break;
        case data::DistributionKind::kUniformBox:
            spec.box_lo = field<std::vector<double>>(j, "lo", path);
            spec.box_hi = field<std::vector<double>>(j, "hi", path);
            break;
    }
    spec.validate();
    return spec;
}

json corruption_to_json(const data::CorruptionSpec& spec) {
    return {{"kind", data::corruption_kind_name(spec.kind)}, {"level", spec.level}};
}

data::CorruptionSpec corruption_from_json(const json& j, const std::string& path) {
    data::CorruptionSpec spec;
    spec.kind = data::corruption_kind_from_name(field<std::string>(j, "kind", path));
    spec.level = field<double>(j, "level", path);
    spec.validate();
    return spec;
}

void save_critic(const CriticNetwork& critic, const std::filesystem::path& path) {
    json header;
    header["format"] = "cbm";
    header["version"] = 1;
    header["model"] = "critic";
    header["widths"] = critic.arch().widths;
    header["activation"] = ad::activation_name(critic.arch().activation);
    header["head"] = ad::output_head_name(critic.arch().head);
    header["criterion"] = criterion_name(critic.criterion());
    header["param_count"] = critic.param_count();
    write_checkpoint(path, header, critic.parameters());
}

CriticNetwork load_critic(const std::filesystem::path& path) {
    Loaded in = read_checkpoint(path);
    const std::string p = path.string();
    if (field<std::string>(in.header, "model", p) != "critic") {
        throw io_error(io_error::kind::bad_header, p + ": checkpoint is not a critic");
    }
    CriticArch arch;
    arch.widths = field<std::vector<std::size_t>>(in.header, "widths", p);
    arch.activation =
        ad::activation_from_name(field<std::string>(in.header, "activation", p));
    arch.head = ad::output_head_from_name(field<std::string>(in.header, "head", p));
    const Criterion criterion =
        criterion_from_name(field<std::string>(in.header, "criterion", p));

    CriticNetwork critic(arch, criterion);
    if (in.params.size() != critic.param_count() ||
        field<std::size_t>(in.header, "param_count", p) != critic.param_count()) {
        throw io_error(io_error::kind::invariant,
                       p + ": parameter blob size does not match the architecture");
    }
    critic.mutable_parameters() = std::move(in.params);
    return critic;
}

void save_generator(const GeneratorModel& gen, const std::filesystem::path& path) {
    json header;
    header["format"] = "cbm";
    header["version"] = 1;
    header["model"] = "generator";
    if (gen.kind() == GeneratorKind::kAnalytic) {
        header["kind"] = "analytic";
        header["base"] = distribution_to_json(gen.base());
        header["corruption"] = corruption_to_json(gen.corruption());
        header["param_count"] = 0;
        write_checkpoint(path, header, {});
        return;
    }
    header["kind"] = "neural";
    header["noise_dim"] = gen.arch().noise_dim;
    header["widths"] = gen.arch().widths;
    header["activation"] = ad::activation_name(gen.arch().activation);
    header["param_count"] = gen.parameters().size();
    write_checkpoint(path, header, gen.parameters());
}

GeneratorModel load_generator(const std::filesystem::path& path) {
    Loaded in = read_checkpoint(path);
    const std::string p = path.string();
    if (field<std::string>(in.header, "model", p) != "generator") {
        throw io_error(io_error::kind::bad_header, p + ": checkpoint is not a generator");
    }
    const std::string kind = field<std::string>(in.header, "kind", p);
    if (kind == "analytic") {
        if (!in.header.contains("base") || !in.header.contains("corruption")) {
            throw io_error(io_error::kind::bad_header,
                           p + ": analytic generator needs 'base' and 'corruption' fields");
        }
        return GeneratorModel::analytic(
            distribution_from_json(in.header.at("base"), p + ".base"),
            corruption_from_json(in.header.at("corruption"), p + ".corruption"));
    }
    if (kind != "neural") {
        throw io_error(io_error::kind::bad_header, p + ": unknown generator kind '" + kind +
                                                       "'");
    }
    GeneratorArch arch;
    arch.noise_dim = field<std::size_t>(in.header, "noise_dim", p);
    arch.widths = field<std::vector<std::size_t>>(in.header, "widths", p);
    arch.activation =
        ad::activation_from_name(field<std::string>(in.header, "activation", p));
    if (in.params.size() != CriticNetwork::param_count_for(arch.widths)) {
        throw io_error(io_error::kind::invariant,
                       p + ": parameter blob size does not match the architecture");
    }
    return GeneratorModel::neural_with_params(std::move(arch), std::move(in.params));
}

} // namespace criticbench::models
