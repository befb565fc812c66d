// Copyright 2026 The cdur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdur {

/// Layered flat configuration: defaults < config file < command-line
/// overrides. Keys are dotted paths ("post.phi_hi"); the file format is
/// TOML-style `key = value` lines with `#` comments. Unknown keys are
/// rejected against the registered key set.
class Config {
 public:
  Config() = default;

  static Config defaults();

  void set(const std::string& key, const std::string& value);
  void merge_file(const std::string& path);
  /// "key=value" strings, e.g. from repeated --set flags.
  void merge_overrides(const std::vector<std::string>& assignments);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Serialized `key = value` lines, sorted; written into run directories.
  std::string echo() const;
  void write(const std::string& path) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Error class for bad config input (unknown key, unparsable value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cdur
