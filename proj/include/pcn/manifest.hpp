// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pcn/feature_io.hpp"

namespace pcn {

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory unless absolute
  std::size_t label = 0;
  std::size_t frames = 0;
};

/// JSON: {version, classes:[string], split, entries:[{path, label, frames}]}.
struct DatasetManifest {
  int version = 1;
  std::vector<std::string> classes;
  std::string split;
  std::vector<ManifestEntry> entries;

  /// Labels in range, paths unique, at least one class.
  void validate() const;
};

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// A manifest with every clip loaded.
struct Dataset {
  DatasetManifest manifest;
  std::vector<FeatureClip> clips;

  std::size_t num_classes() const { return manifest.classes.size(); }
  std::size_t size() const { return clips.size(); }
};

/// Reads the manifest and every referenced PCFV file. Checks that labels
/// and frame counts agree with the files and that all clips share C, H, W.
Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace pcn
