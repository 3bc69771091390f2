#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "cne/tensor.hpp"

namespace cne {

// "CNET v1" container:
//   bytes 0-3  magic "CNET"
//   byte  4    version, currently 1
//   byte  5    dtype code: 1 = f32, 2 = u8
//   byte  6    rank R, 1..8
//   R x u32    little-endian extents
//   payload    row-major values, f32 little-endian or u8
enum class CnetErrc {
    bad_magic,
    bad_version,
    bad_dtype,
    bad_rank,
    truncated,
    size_mismatch,
    io_failure,
};

class CnetError : public std::runtime_error {
public:
    CnetError(CnetErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    CnetErrc code() const { return code_; }

private:
    CnetErrc code_;
};

void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

// LabelMask round-trips as a rank-2 u8 CNET file.
void save_mask(const LabelMask& mask, const std::filesystem::path& path);
LabelMask load_mask(const std::filesystem::path& path);

// In-memory encoding, used both for the standalone files above and for CNET
// blobs embedded in larger containers (model files). decode_tensor reads one
// record starting at *pos and advances *pos past it.
std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const unsigned char> bytes, std::size_t* pos);

}  // namespace cne
