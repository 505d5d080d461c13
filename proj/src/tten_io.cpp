#include "ttda/tten_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ttda {

namespace {

constexpr char kMagic[4] = {'T', 'T', 'E', 'N'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw std::runtime_error("TTEN: unexpected end of stream");
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_tten(const DenseTensor& t, std::ostream& out) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
    for (Index d : t.shape()) write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    for (Index i = 0; i < t.size(); ++i) write_le<double>(out, t.data()[i]);
    if (!out) throw std::runtime_error("TTEN: write failed");
}

void write_tten(const DenseTensor& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("TTEN: cannot open " + path.string() + " for writing");
    write_tten(t, out);
}

DenseTensor read_tten(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("TTEN: bad magic");
    const int version = in.get();
    if (version != kVersion) throw std::runtime_error("TTEN: unsupported version");
    const auto n_modes = read_le<std::uint32_t>(in);
    Shape shape(n_modes);
    for (auto& d : shape) {
        d = static_cast<Index>(read_le<std::uint64_t>(in));
        if (d <= 0) throw std::runtime_error("TTEN: non-positive mode size");
    }
    Vector data(shape_product(shape));
    for (Index i = 0; i < data.size(); ++i) data[i] = read_le<double>(in);
    return DenseTensor(std::move(shape), std::move(data));
}

DenseTensor read_tten(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("TTEN: cannot open " + path.string());
    return read_tten(in);
}

}  // namespace ttda
