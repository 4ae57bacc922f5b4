// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "pcn/errors.hpp"

namespace pcn {

using nlohmann::json;

void DatasetManifest::validate() const {
  if (classes.empty()) throw InputError("manifest declares no classes");
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.label >= classes.size()) {
      throw InputError("manifest entry " + e.path + " has label " + std::to_string(e.label) +
                       " but only " + std::to_string(classes.size()) + " classes");
    }
    if (!seen.insert(e.path).second) throw InputError("duplicate manifest path " + e.path);
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  json j;
  j["version"] = manifest.version;
  j["classes"] = manifest.classes;
  j["split"] = manifest.split;
  j["entries"] = json::array();
  for (const auto& e : manifest.entries) {
    j["entries"].push_back({{"path", e.path}, {"label", e.label}, {"frames", e.frames}});
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw Error("failed writing " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open manifest " + path.string());
  DatasetManifest m;
  try {
    const json j = json::parse(is);
    m.version = j.at("version").get<int>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.split = j.value("split", std::string{});
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("path").get<std::string>(), e.at("label").get<std::size_t>(),
                           e.at("frames").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (m.version != 1) {
    throw FormatError("unsupported manifest version " + std::to_string(m.version) + " in " +
                      path.string());
  }
  m.validate();
  return m;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset ds;
  ds.manifest = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  ds.clips.reserve(ds.manifest.entries.size());
  for (const auto& e : ds.manifest.entries) {
    const std::filesystem::path rel(e.path);
    const std::filesystem::path p = rel.is_absolute() ? rel : base / rel;
    FeatureClip clip = read_feature_clip(p);
    if (clip.label != e.label) {
      throw InputError(p.string() + ": file label " + std::to_string(clip.label) +
                       " disagrees with manifest label " + std::to_string(e.label));
    }
    if (clip.num_frames != e.frames) {
      throw InputError(p.string() + ": file has " + std::to_string(clip.num_frames) +
                       " frames, manifest says " + std::to_string(e.frames));
    }
    if (!ds.clips.empty()) {
      const auto& first = ds.clips.front();
      if (clip.channels != first.channels || clip.height != first.height ||
          clip.width != first.width || clip.pixels != first.pixels) {
        throw InputError(p.string() + ": frame layout differs from the first clip");
      }
    }
    clip.source_id = e.path;
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

}  // namespace pcn
