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

#include "cdur/config.hpp"

#include <fstream>
#include <sstream>

namespace cdur {

namespace {

const std::map<std::string, std::string>& default_entries() {
  static const std::map<std::string, std::string> kDefaults = {
      {"features.sample_rate", "44100"},
      {"features.mel_bins", "64"},
      {"features.hop_ms", "20"},
      {"features.window_ms", "40"},
      {"features.fft_size", "2048"},
      {"model.channels", "32,128,128,128,128"},
      {"model.gru_hidden", "128"},
      {"model.dropout", "0.3"},
      {"model.leaky_slope", "0.1"},
      {"model.pooling", "linsoft"},
      {"model.subsample.p", "4"},
      {"model.subsample.stages", "2x4,2x4,1x4"},
      {"augment.enabled", "true"},
      {"augment.specaug.gamma_t", "2"},
      {"augment.specaug.eta_t0", "60"},
      {"augment.specaug.gamma_f", "2"},
      {"augment.specaug.eta_f0", "12"},
      {"augment.timeshift.std", "10"},
      {"train.batch_size", "64"},
      {"train.lr", "1e-4"},
      {"train.weight_decay", "0.01"},
      {"train.lr_reduce_patience", "3"},
      {"train.lr_reduce_factor", "0.1"},
      {"train.early_stop_patience", "7"},
      {"train.max_epochs", "100"},
      {"train.label_smoothing.epsilon", "0"},
      {"train.seed", "1"},
      {"train.val_fraction", "0.1"},
      {"post.method", "triple"},
      {"post.phi_hi", "0.75"},
      {"post.phi_low", "0.2"},
      {"post.phi_clip", "0.5"},
      {"post.phi_bin", "0.5"},
      {"post.phi_tag", "0.5"},
      {"post.omega", "5"},
      {"synth.sample_rate", "22050"},
      {"synth.clip_seconds", "10"},
      {"synth.min_event_seconds", "0.5"},
      {"synth.max_event_seconds", "4"},
      {"synth.min_events_per_clip", "1"},
      {"synth.max_events_per_clip", "3"},
      {"synth.snr_db_min", "10"},
      {"synth.snr_db_max", "25"},
      {"synth.background_level", "0.02"},
      {"synth.preset", "disjoint"},
  };
  return kDefaults;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.values_ = default_entries();
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!default_entries().count(key)) throw ConfigError("unknown config key: " + key);
  values_[key] = value;
}

void Config::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    // Strip optional quotes around string values.
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::merge_overrides(const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + a);
    set(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
  }
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config key not set: " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_str(key);
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + s);
  }
  if (pos != s.size()) throw ConfigError("config key " + key + ": not a number: " + s);
  return v;
}

std::int64_t Config::get_int(const std::string& key) const {
  double v = get_double(key);
  auto i = static_cast<std::int64_t>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config key " + key + ": expected integer");
  return i;
}

bool Config::get_bool(const std::string& key) const {
  const std::string s = get_str(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key " + key + ": expected true/false");
}

std::string Config::echo() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

void Config::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config echo: " + path);
  out << echo();
}

}  // namespace cdur
