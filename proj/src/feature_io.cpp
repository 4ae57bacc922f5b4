// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/feature_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "pcn/errors.hpp"

namespace pcn {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
  return v;
}

std::string at(std::size_t offset) { return " at byte offset " + std::to_string(offset); }

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError(std::string(what) + " does not fit the PCFV header");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Tensor FeatureClip::frame(std::size_t t) const {
  if (t >= num_frames) {
    throw InputError("frame " + std::to_string(t) + " out of range for clip of " +
                     std::to_string(num_frames));
  }
  const std::size_t n = frame_size();
  std::vector<double> v(frames.begin() + static_cast<long>(t * n),
                        frames.begin() + static_cast<long>((t + 1) * n));
  return Tensor({channels, height, width}, std::move(v));
}

void FeatureClip::validate() const {
  if (num_frames < 1 || channels < 1 || height < 1 || width < 1) {
    throw InputError("clip dimensions must all be >= 1");
  }
  if (frames.size() != num_frames * frame_size()) {
    throw InputError("clip payload has " + std::to_string(frames.size()) +
                     " values, dimensions require " + std::to_string(num_frames * frame_size()));
  }
}

std::vector<std::uint8_t> encode_feature_clip(const FeatureClip& clip) {
  clip.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kPcfvHeaderBytes + 4 * clip.frames.size());
  out.insert(out.end(), {'P', 'C', 'F', 'V'});
  put_u32(out, kPcfvVersion | (clip.pixels ? kPcfvPixelsFlag : 0u));
  put_u32(out, checked_u32(clip.num_frames, "frame count"));
  put_u32(out, checked_u32(clip.channels, "channel count"));
  put_u32(out, checked_u32(clip.height, "height"));
  put_u32(out, checked_u32(clip.width, "width"));
  put_u32(out, checked_u32(clip.label, "label"));
  for (float f : clip.frames) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

FeatureClip decode_feature_clip(std::span<const std::uint8_t> bytes, std::string source_id) {
  if (bytes.size() < kPcfvHeaderBytes) {
    throw FormatError("truncated PCFV header: " + std::to_string(bytes.size()) + " bytes" +
                      at(bytes.size()));
  }
  if (std::memcmp(bytes.data(), "PCFV", 4) != 0) throw FormatError("bad PCFV magic" + at(0));
  const std::uint32_t version = get_u32(bytes, 4);
  if ((version & 0x00FFFFFFu) != kPcfvVersion) {
    throw FormatError("unsupported PCFV version " + std::to_string(version & 0x00FFFFFFu) + at(4));
  }
  if ((version >> 24) & ~1u) throw FormatError("unknown PCFV flag bits" + at(7));
  FeatureClip clip;
  clip.pixels = (version & kPcfvPixelsFlag) != 0;
  clip.num_frames = get_u32(bytes, 8);
  clip.channels = get_u32(bytes, 12);
  clip.height = get_u32(bytes, 16);
  clip.width = get_u32(bytes, 20);
  clip.label = get_u32(bytes, 24);
  clip.source_id = std::move(source_id);
  const std::size_t dims[] = {clip.num_frames, clip.channels, clip.height, clip.width};
  for (std::size_t i = 0; i < 4; ++i) {
    if (dims[i] == 0) throw FormatError("zero dimension in PCFV header" + at(8 + 4 * i));
  }
  const std::size_t count = clip.num_frames * clip.frame_size();
  const std::size_t payload = bytes.size() - kPcfvHeaderBytes;
  if (payload != 4 * count) {
    const std::size_t offset = kPcfvHeaderBytes + std::min(payload, 4 * count);
    throw FormatError("PCFV header declares " + std::to_string(count) + " floats but payload has " +
                      std::to_string(payload) + " bytes" + at(offset));
  }
  clip.frames.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    clip.frames[i] = std::bit_cast<float>(get_u32(bytes, kPcfvHeaderBytes + 4 * i));
  }
  return clip;
}

void write_feature_clip(const FeatureClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_feature_clip(clip);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path.string());
}

FeatureClip read_feature_clip(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_feature_clip(bytes, path.stem().string());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace pcn
