#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/codec/bitstream.hpp"
#include "semdac/model/semdac_model.hpp"

#include <cstdint>
#include <vector>

namespace semdac {

// clip -> hop padding -> encoder -> RVQ -> packed .sdac bytes
template <typename S>
std::vector<uint8_t> codec_encode(const SemdacModel<S>& model, const AudioClip& clip) {
  require(clip.sample_rate == model.cfg.sample_rate, Err::value,
          "codec requires " + std::to_string(model.cfg.sample_rate) + " Hz input");
  PaddedClip padded = pad_to_hop(clip, model.cfg.hop_total());
  auto latents = model.encode(padded.clip);
  auto rvq_out = rvq_forward(latents.values, model.cfg.rvq, model.rvq.codebooks());

  BitstreamHeader header;
  header.sample_rate = (uint32_t)clip.sample_rate;
  header.n_frames = (uint32_t)latents.n_frames();
  header.pad_samples = (uint16_t)padded.pad_samples;
  for (int s : model.cfg.rvq.codebook_sizes()) header.codebook_sizes.push_back((uint16_t)s);
  return pack(header, rvq_out.grid);
}

// packed .sdac bytes -> decoded clip at the exact original length
template <typename S>
AudioClip codec_decode(const SemdacModel<S>& model, const std::vector<uint8_t>& bytes) {
  auto [header, grid] = unpack(bytes);
  require((int)header.sample_rate == model.cfg.sample_rate, Err::format,
          "bitstream sample rate does not match the model");
  const auto expected = model.cfg.rvq.codebook_sizes();
  require((int)header.codebook_sizes.size() == (int)expected.size(), Err::format,
          "bitstream quantizer count does not match the model");
  for (size_t q = 0; q < expected.size(); ++q)
    require((int)header.codebook_sizes[q] == expected[q], Err::format,
            "bitstream codebook sizes do not match the model");
  require(header.pad_samples < (uint32_t)model.cfg.hop_total(), Err::format,
          "bitstream pad exceeds one hop");
  require(header.n_frames > 0 || header.pad_samples == 0, Err::format,
          "empty stream cannot carry padding");
  if (header.n_frames == 0) return AudioClip{{}, model.cfg.sample_rate};

  auto [sem, ac] = model.dequantize(grid);
  AudioClip wav = model.decode(sem, ac);
  wav.samples.resize(wav.samples.size() - header.pad_samples);
  return wav;
}

// in-memory round trip (evaluation path)
template <typename S>
AudioClip codec_roundtrip(const SemdacModel<S>& model, const AudioClip& clip) {
  return codec_decode(model, codec_encode(model, clip));
}

}  // namespace semdac
