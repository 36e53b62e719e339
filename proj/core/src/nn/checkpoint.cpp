#include "discrimq/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "discrimq/errors.hpp"

namespace discrimq::nn {

namespace {

constexpr char kMagic[4] = {'D', 'Q', 'C', 'K'};

template <typename T>
constexpr char const* dtype_name() {
    return sizeof(T) == 4 ? "float32" : "float64";
}

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
    for (std::size_t b = 0; b < sizeof(U); ++b) {
        out.push_back(static_cast<std::uint8_t>((value >> (8 * b)) & 0xFFu));
    }
}

template <typename U>
U get_le(std::vector<std::uint8_t> const& in, std::size_t& pos) {
    if (pos + sizeof(U) > in.size()) {
        throw ParseError("checkpoint truncated");
    }
    U value = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
        value |= static_cast<U>(in[pos + b]) << (8 * b);
    }
    pos += sizeof(U);
    return value;
}

template <typename T>
using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

}  // namespace

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(ParamStore<T> const& params, nlohmann::json const& meta) {
    nlohmann::json manifest;
    manifest["format_version"] = kCheckpointVersion;
    manifest["dtype"] = dtype_name<T>();
    manifest["step"] = params.step();
    manifest["meta"] = meta;
    auto& tensors = manifest["tensors"] = nlohmann::json::array();
    for (auto const& e : params.entries()) {
        tensors.push_back({{"name", e.name},
                           {"rows", e.value.rows()},
                           {"cols", e.value.cols()},
                           {"trainable", e.trainable}});
    }
    std::string const text = manifest.dump();

    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint64_t>(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (auto const& e : params.entries()) {
        for (T v : e.value.data()) {
            put_le<Bits<T>>(out, std::bit_cast<Bits<T>>(v));
        }
    }
    return out;
}

template <typename T>
Checkpoint<T> decode_checkpoint(std::vector<std::uint8_t> const& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ParseError("not a checkpoint container (bad magic)");
    }
    std::size_t pos = 4;
    auto const version = get_le<std::uint32_t>(bytes, pos);
    if (version != kCheckpointVersion) {
        throw SchemaError("unsupported checkpoint format version " + std::to_string(version));
    }
    auto const length = get_le<std::uint64_t>(bytes, pos);
    if (pos + length > bytes.size()) {
        throw ParseError("checkpoint manifest truncated");
    }
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + length));
    } catch (nlohmann::json::exception const& ex) {
        throw ParseError(std::string("checkpoint manifest: ") + ex.what());
    }
    pos += length;
    if (manifest.value("dtype", "") != dtype_name<T>()) {
        throw SchemaError("checkpoint dtype " + manifest.value("dtype", std::string("?")) + " does not match " +
                          dtype_name<T>());
    }

    Checkpoint<T> ck;
    for (auto const& t : manifest.at("tensors")) {
        ParamId const p = ck.params.add(t.at("name").get<std::string>(), t.at("rows").get<std::size_t>(),
                                        t.at("cols").get<std::size_t>(), t.value("trainable", true));
        for (auto& v : ck.params.value(p).data()) {
            v = std::bit_cast<T>(get_le<Bits<T>>(bytes, pos));
        }
    }
    if (pos != bytes.size()) {
        throw ParseError("checkpoint has trailing bytes");
    }
    ck.params.set_step(manifest.at("step").get<std::uint64_t>());
    ck.meta = manifest.value("meta", nlohmann::json::object());
    return ck;
}

template <typename T>
void save_checkpoint(std::filesystem::path const& path, ParamStore<T> const& params, nlohmann::json const& meta) {
    auto const bytes = encode_checkpoint(params, meta);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write checkpoint: " + path.string());
    }
    out.write(reinterpret_cast<char const*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
Checkpoint<T> load_checkpoint(std::filesystem::path const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read checkpoint: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint<T>(bytes);
}

template <typename T>
void assign_params(ParamStore<T>& target, ParamStore<T> const& source) {
    if (target.size() != source.size()) {
        throw SchemaError("checkpoint tensor count does not match the model");
    }
    for (auto const& e : source.entries()) {
        ParamId const p = target.id(e.name);
        auto& dst = target.value(p);
        if (dst.rows() != e.value.rows() || dst.cols() != e.value.cols()) {
            throw ShapeError("checkpoint tensor '" + e.name + "' has a different shape than the model");
        }
        dst = e.value;
    }
    target.set_step(source.step());
}

#define DISCRIMQ_INSTANTIATE(T)                                                                          \
    template std::vector<std::uint8_t> encode_checkpoint<T>(ParamStore<T> const&, nlohmann::json const&); \
    template Checkpoint<T> decode_checkpoint<T>(std::vector<std::uint8_t> const&);                       \
    template void save_checkpoint<T>(std::filesystem::path const&, ParamStore<T> const&,                 \
                                     nlohmann::json const&);                                             \
    template Checkpoint<T> load_checkpoint<T>(std::filesystem::path const&);                             \
    template void assign_params<T>(ParamStore<T>&, ParamStore<T> const&);

DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)

#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::nn
