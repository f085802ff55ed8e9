#include "okp/okpf.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "bytes.hpp"
#include "okp/error.hpp"

namespace okp {

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::IoFailure, "read error on " + path.string());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoFailure, "write error on " + path.string());
}

}  // namespace detail

namespace {

constexpr std::uint8_t kMagic[4] = {0x4F, 0x4B, 0x50, 0x46};

}  // namespace

std::vector<std::uint8_t> encode_okpf(const FeatureMap& map) {
    if (!map.all_finite()) fail(ErrorCode::NonFiniteValue, "feature map contains NaN or Inf");
    const GridGeometry& g = map.geometry();
    detail::ByteWriter w;
    w.reserve(kOkpfHeaderSize + map.data().size() * 4);
    for (auto b : kMagic) w.u8(b);
    w.u8(kOkpfVersion);
    w.u32(static_cast<std::uint32_t>(map.rows()));
    w.u32(static_cast<std::uint32_t>(map.cols()));
    w.u32(static_cast<std::uint32_t>(map.channels()));
    for (std::uint32_t field : {g.src_w, g.src_h, g.patch, g.stride, g.raw_w, g.raw_h,
                                g.pad_left, g.pad_top}) {
        w.u32(field);
    }
    for (float x : map.data()) w.f32(x);
    return w.take();
}

FeatureMap decode_okpf(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    if (bytes.size() < 4) fail(ErrorCode::BadMagic, "file too short for OKPF magic");
    for (auto b : kMagic) {
        if (r.u8() != b) fail(ErrorCode::BadMagic, "not an OKPF file");
    }
    const std::uint8_t version = r.u8();
    if (version != kOkpfVersion) {
        fail(ErrorCode::UnsupportedVersion, "OKPF version " + std::to_string(version));
    }
    const std::uint64_t rows = r.u32();
    const std::uint64_t cols = r.u32();
    const std::uint64_t channels = r.u32();
    GridGeometry g;
    g.src_w = r.u32();
    g.src_h = r.u32();
    g.patch = r.u32();
    g.stride = r.u32();
    g.raw_w = r.u32();
    g.raw_h = r.u32();
    g.pad_left = r.u32();
    g.pad_top = r.u32();

    std::uint64_t count = 0;
    if (__builtin_mul_overflow(rows, cols, &count) ||
        __builtin_mul_overflow(count, channels, &count) || count > (UINT64_MAX / 4)) {
        fail(ErrorCode::TruncatedPayload, "header declares an impossible payload size");
    }
    if (r.remaining() != count * 4) {
        fail(ErrorCode::TruncatedPayload,
             "header declares " + std::to_string(count) + " floats but payload holds " +
                 std::to_string(r.remaining()) + " bytes");
    }
    std::vector<float> data(count);
    for (auto& x : data) {
        x = r.f32();
        if (!std::isfinite(x)) fail(ErrorCode::NonFiniteValue, "payload contains NaN or Inf");
    }
    return FeatureMap(rows, cols, channels, std::move(data), g);
}

FeatureMap read_feature_file(const std::filesystem::path& path) {
    return decode_okpf(detail::read_file_bytes(path));
}

void write_feature_file(const FeatureMap& map, const std::filesystem::path& path) {
    detail::write_file_bytes(path, encode_okpf(map));
}

}  // namespace okp
