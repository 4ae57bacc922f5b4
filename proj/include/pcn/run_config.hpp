// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcn/gradcheck.hpp"
#include "pcn/model.hpp"
#include "pcn/moving_shapes.hpp"
#include "pcn/trainer.hpp"

namespace pcn {

enum class Profile { kDesk, kPaper };

std::string to_string(Profile profile);
/// Throws UsageError on anything but "desk" or "paper".
Profile profile_from_string(const std::string& name);

enum class ValueKind { kUInt, kDouble, kBool, kString, kUIntList, kDoubleList };

struct KeySpec {
  std::string name;
  ValueKind kind;
  std::string help;
};

/// Every dotted key a run config accepts, sorted by name.
const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(const std::string& name);

/// Flat dotted-key view over every setting a subcommand needs. Values are
/// kept as text exactly as given; typed getters parse on access.
class RunConfig {
 public:
  /// Every key set to the profile's value.
  static RunConfig preset(Profile profile);

  /// Raw key/value pairs from a TOML file. Tables nest into dotted keys.
  /// Throws UsageError on unknown keys or malformed values.
  static std::map<std::string, std::vector<std::string>> read_toml(
      const std::filesystem::path& path);

  /// Checks the key and the value's type; throws UsageError otherwise.
  void set(const std::string& key, std::vector<std::string> values);
  void set(const std::string& key, const std::string& value) { set(key, std::vector{value}); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  Profile profile() const;
  std::uint64_t get_uint(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<std::size_t> get_uint_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Loadable TOML: top-level keys first, then one table per prefix.
  std::string to_toml() const;

  const std::map<std::string, std::vector<std::string>>& values() const { return values_; }

 private:
  const std::vector<std::string>& raw(const std::string& key) const;

  std::map<std::string, std::vector<std::string>> values_;
};

/// profile (flag > file > desk) → preset → file → overrides in order.
/// The seed falls back to PREDNET_SEED when neither the file nor an
/// override sets it.
struct ConfigSources {
  std::optional<std::filesystem::path> file;
  std::optional<std::string> profile;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> env_seed;
};

RunConfig resolve_config(const ConfigSources& sources);

/// Typed views. num_classes and input_channels come from the dataset.
ModelConfig model_config(const RunConfig& run, std::size_t num_classes);
TrainConfig train_config(const RunConfig& run);
MovingShapesConfig moving_shapes_config(const RunConfig& run);
GradcheckConfig gradcheck_config(const RunConfig& run);

}  // namespace pcn
