// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcn/tensor.hpp"

namespace pcn {

/// A labeled [T, C, H, W] sequence of per-frame maps.
///
/// Frames are held as float32, exactly as stored on disk, and promoted to
/// float64 by frame(). `pixels` marks raw grayscale/RGB images in 0..255
/// rather than encoder features.
struct FeatureClip {
  std::size_t num_frames = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> frames;
  std::size_t label = 0;
  std::string source_id;
  bool pixels = false;

  std::size_t frame_size() const { return channels * height * width; }
  /// Frame t as a float64 [C,H,W] tensor.
  Tensor frame(std::size_t t) const;
  void validate() const;
};

// PCFV container, little-endian:
//   "PCFV" | u32 version | u32 T | u32 C | u32 H | u32 W | u32 label | f32 payload
// version is 1 in its low 24 bits; bit 0 of the high byte flags pixel clips.
inline constexpr std::uint32_t kPcfvVersion = 1;
inline constexpr std::uint32_t kPcfvPixelsFlag = 1u << 24;
inline constexpr std::size_t kPcfvHeaderBytes = 28;

std::vector<std::uint8_t> encode_feature_clip(const FeatureClip& clip);
FeatureClip decode_feature_clip(std::span<const std::uint8_t> bytes, std::string source_id = {});

void write_feature_clip(const FeatureClip& clip, const std::filesystem::path& path);
FeatureClip read_feature_clip(const std::filesystem::path& path);

}  // namespace pcn
