#include "cne/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace cne {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'E', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 1;
constexpr std::uint8_t kDtypeU8 = 2;
constexpr std::size_t kMaxRank = 8;

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string encode_header(std::uint8_t dtype, const std::vector<std::size_t>& dims) {
    if (dims.empty() || dims.size() > kMaxRank)
        throw CnetError(CnetErrc::bad_rank,
                        "cnet: rank must be in [1, 8], got " + std::to_string(dims.size()));
    std::string out;
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    out.push_back(static_cast<char>(dtype));
    out.push_back(static_cast<char>(dims.size()));
    for (std::size_t d : dims) {
        if (d > 0xFFFFFFFFull)
            throw CnetError(CnetErrc::size_mismatch, "cnet: extent exceeds u32");
        put_u32le(out, static_cast<std::uint32_t>(d));
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw CnetError(CnetErrc::io_failure,
                        "cnet: cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CnetError(CnetErrc::io_failure, "cnet: write failed for " + path.string());
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CnetError(CnetErrc::io_failure, "cnet: cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct Header {
    std::uint8_t dtype = 0;
    std::vector<std::size_t> dims;
    std::size_t payload_offset = 0;  // absolute, from the start of `bytes`
    std::size_t element_count = 0;
};

Header parse_header(std::span<const unsigned char> bytes, std::size_t pos) {
    if (bytes.size() < pos + 7)
        throw CnetError(CnetErrc::truncated, "cnet: record shorter than a header");
    const unsigned char* p = bytes.data() + pos;
    if (std::memcmp(p, kMagic, 4) != 0)
        throw CnetError(CnetErrc::bad_magic, "cnet: bad magic");
    if (p[4] != kVersion)
        throw CnetError(CnetErrc::bad_version,
                        "cnet: unsupported version " + std::to_string(p[4]));
    Header h;
    h.dtype = p[5];
    if (h.dtype != kDtypeF32 && h.dtype != kDtypeU8)
        throw CnetError(CnetErrc::bad_dtype, "cnet: unknown dtype code " + std::to_string(h.dtype));
    const std::size_t rank = p[6];
    if (rank < 1 || rank > kMaxRank)
        throw CnetError(CnetErrc::bad_rank, "cnet: rank " + std::to_string(rank) + " out of [1, 8]");
    h.payload_offset = pos + 7 + rank * 4;
    if (bytes.size() < h.payload_offset)
        throw CnetError(CnetErrc::truncated, "cnet: header truncated");
    h.dims.resize(rank);
    h.element_count = 1;
    for (std::size_t d = 0; d < rank; ++d) {
        h.dims[d] = get_u32le(p + 7 + d * 4);
        if (h.dims[d] == 0)
            throw CnetError(CnetErrc::size_mismatch, "cnet: zero extent");
        h.element_count *= h.dims[d];
    }
    const std::size_t elem_size = (h.dtype == kDtypeF32) ? 4 : 1;
    if (bytes.size() < h.payload_offset + h.element_count * elem_size)
        throw CnetError(CnetErrc::truncated, "cnet: payload truncated");
    return h;
}

}  // namespace

std::string encode_tensor(const Tensor& t) {
    std::string bytes = encode_header(kDtypeF32, t.dims());
    bytes.reserve(bytes.size() + t.size() * 4);
    for (float v : t.values()) put_u32le(bytes, std::bit_cast<std::uint32_t>(v));
    return bytes;
}

Tensor decode_tensor(std::span<const unsigned char> bytes, std::size_t* pos) {
    const Header h = parse_header(bytes, *pos);
    if (h.dtype != kDtypeF32)
        throw CnetError(CnetErrc::bad_dtype, "cnet: expected an f32 tensor record");
    std::vector<float> values(h.element_count);
    for (std::size_t i = 0; i < h.element_count; ++i) {
        values[i] = std::bit_cast<float>(get_u32le(bytes.data() + h.payload_offset + i * 4));
        if (!std::isfinite(values[i]))
            throw CnetError(CnetErrc::size_mismatch, "cnet: non-finite value in payload");
    }
    *pos = h.payload_offset + h.element_count * 4;
    return Tensor(h.dims, std::move(values));
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
    write_file(path, encode_tensor(t));
}

Tensor load_tensor(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    std::size_t pos = 0;
    Tensor t = decode_tensor(bytes, &pos);
    if (pos != bytes.size())
        throw CnetError(CnetErrc::size_mismatch,
                        "cnet: payload length does not match dims in " + path.string());
    return t;
}

void save_mask(const LabelMask& mask, const std::filesystem::path& path) {
    std::string bytes = encode_header(kDtypeU8, {mask.height, mask.width});
    bytes.append(reinterpret_cast<const char*>(mask.ids.data()), mask.ids.size());
    write_file(path, bytes);
}

LabelMask load_mask(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const Header h = parse_header(bytes, 0);
    if (h.dtype != kDtypeU8 || h.dims.size() != 2)
        throw CnetError(CnetErrc::bad_dtype,
                        "cnet: expected rank-2 u8 mask in " + path.string());
    if (bytes.size() != h.payload_offset + h.element_count)
        throw CnetError(CnetErrc::size_mismatch,
                        "cnet: payload length does not match dims in " + path.string());
    std::vector<std::uint8_t> ids(bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset),
                                  bytes.end());
    return LabelMask(h.dims[0], h.dims[1], std::move(ids));
}

}  // namespace cne
