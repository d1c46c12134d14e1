#pragma once

#include "semdac/core/common.hpp"
#include "semdac/quant/rvq.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace semdac {

// On-disk header of the .sdac format, all fields little-endian in declared
// order. Row 0 of the payload grid is always the semantic quantizer.
struct BitstreamHeader {
  static constexpr uint8_t kVersion = 1;
  uint32_t sample_rate = 16000;
  uint32_t n_frames = 0;
  uint16_t pad_samples = 0;  // trailing zeros appended by pad_to_hop
  std::vector<uint16_t> codebook_sizes;

  int n_quantizers() const { return (int)codebook_sizes.size(); }

  void validate() const {
    require(sample_rate >= 1, Err::format, "bitstream sample rate must be positive");
    require(!codebook_sizes.empty() && codebook_sizes.size() <= 255, Err::format,
            "bitstream needs 1..255 quantizers");
    for (uint16_t s : codebook_sizes)
      require(s >= 2, Err::format, "bitstream codebook sizes must be >= 2");
  }
};

namespace detail {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 24));
}
inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

class BitReader {
 public:
  BitReader(const uint8_t* data, size_t len) : data_(data), bits_(len * 8) {}
  uint32_t read(int n) {
    require(pos_ + n <= bits_, Err::corrupt, "bitstream payload truncated");
    uint32_t v = 0;
    for (int i = 0; i < n; ++i, ++pos_)
      v = (v << 1) | ((data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u);
    return v;
  }
  size_t consumed_bits() const { return pos_; }
  size_t total_bits() const { return bits_; }

 private:
  const uint8_t* data_;
  size_t bits_;
  size_t pos_ = 0;
};

}  // namespace detail

inline size_t payload_bytes(const BitstreamHeader& h) {
  std::vector<int> sizes(h.codebook_sizes.begin(), h.codebook_sizes.end());
  return h.n_frames == 0 ? 0 : (size_t(h.n_frames) * bits_per_frame(sizes) + 7) / 8;
}

// Header then, frame-major, each index in exactly ceil(log2(size)) bits,
// MSB-first; the final partial byte is zero-padded.
inline std::vector<uint8_t> pack(const BitstreamHeader& header, const TokenGrid& grid) {
  header.validate();
  require(grid.n_quantizers() == header.n_quantizers(), Err::value,
          "grid/header quantizer count mismatch");
  require((uint32_t)grid.n_frames() == header.n_frames, Err::value,
          "grid/header frame count mismatch");
  std::vector<int> bits(header.n_quantizers());
  for (int q = 0; q < header.n_quantizers(); ++q) {
    bits[q] = bits_for_size(header.codebook_sizes[q]);
    require(grid.codebook_sizes[q] == header.codebook_sizes[q], Err::value,
            "grid/header codebook size mismatch");
  }
  grid.validate();

  std::vector<uint8_t> out;
  out.reserve(16 + 2 * header.codebook_sizes.size() + payload_bytes(header));
  out.insert(out.end(), {'S', 'D', 'A', 'C'});
  out.push_back(BitstreamHeader::kVersion);
  detail::put_u32(out, header.sample_rate);
  detail::put_u32(out, header.n_frames);
  detail::put_u16(out, header.pad_samples);
  out.push_back(uint8_t(header.n_quantizers()));
  for (uint16_t s : header.codebook_sizes) detail::put_u16(out, s);

  uint8_t acc = 0;
  int filled = 0;
  for (int t = 0; t < grid.n_frames(); ++t)
    for (int q = 0; q < grid.n_quantizers(); ++q) {
      const uint32_t code = (uint32_t)grid.codes(q, t);
      for (int i = bits[q] - 1; i >= 0; --i) {
        acc = uint8_t((acc << 1) | ((code >> i) & 1u));
        if (++filled == 8) {
          out.push_back(acc);
          acc = 0;
          filled = 0;
        }
      }
    }
  if (filled > 0) out.push_back(uint8_t(acc << (8 - filled)));
  return out;
}

inline std::pair<BitstreamHeader, TokenGrid> unpack(const std::vector<uint8_t>& bytes) {
  require(bytes.size() >= 16, Err::format, "bitstream too short for header");
  require(bytes[0] == 'S' && bytes[1] == 'D' && bytes[2] == 'A' && bytes[3] == 'C', Err::format,
          "bad bitstream magic");
  require(bytes[4] == BitstreamHeader::kVersion, Err::format, "unsupported bitstream version");
  auto rd_u32 = [&](size_t off) {
    return uint32_t(bytes[off]) | uint32_t(bytes[off + 1]) << 8 | uint32_t(bytes[off + 2]) << 16 |
           uint32_t(bytes[off + 3]) << 24;
  };
  auto rd_u16 = [&](size_t off) { return uint16_t(bytes[off] | (bytes[off + 1] << 8)); };

  BitstreamHeader h;
  h.sample_rate = rd_u32(5);
  h.n_frames = rd_u32(9);
  h.pad_samples = rd_u16(13);
  const int nq = bytes[15];
  require(nq >= 1, Err::format, "bitstream declares zero quantizers");
  size_t off = 16;
  require(bytes.size() >= off + 2 * (size_t)nq, Err::format, "bitstream header truncated");
  for (int q = 0; q < nq; ++q, off += 2) h.codebook_sizes.push_back(rd_u16(off));
  h.validate();

  std::vector<int> bits(nq);
  for (int q = 0; q < nq; ++q) bits[q] = bits_for_size(h.codebook_sizes[q]);

  const size_t need = payload_bytes(h);
  require(bytes.size() - off == need, Err::format,
          bytes.size() - off < need ? "bitstream payload truncated" : "bitstream payload oversized");

  TokenGrid grid;
  grid.codes.resize(nq, (int)h.n_frames);
  for (int q = 0; q < nq; ++q) grid.codebook_sizes.push_back(h.codebook_sizes[q]);

  detail::BitReader reader(bytes.data() + off, need);
  for (uint32_t t = 0; t < h.n_frames; ++t)
    for (int q = 0; q < nq; ++q) {
      const uint32_t code = reader.read(bits[q]);
      require(code < h.codebook_sizes[q], Err::corrupt, "token index exceeds codebook size");
      grid.codes(q, (int)t) = (int)code;
    }
  // trailing pad bits must be zero
  while (reader.consumed_bits() < reader.total_bits())
    require(reader.read(1) == 0, Err::corrupt, "nonzero padding bits in bitstream");
  return {h, grid};
}

// Actual on-disk rate of a packed stream: payload bits over audio seconds.
inline double file_bitrate_kbps(const BitstreamHeader& h) {
  require(h.n_frames > 0, Err::value, "file bitrate needs at least one frame");
  std::vector<int> sizes(h.codebook_sizes.begin(), h.codebook_sizes.end());
  const double payload_bits = double(h.n_frames) * bits_per_frame(sizes);
  const double hop = 320.0;  // encoder stride product at 16 kHz
  const double duration_s = (double(h.n_frames) * hop - h.pad_samples) / h.sample_rate;
  require(duration_s > 0, Err::value, "non-positive stream duration");
  return payload_bits / duration_s / 1000.0;
}

}  // namespace semdac
