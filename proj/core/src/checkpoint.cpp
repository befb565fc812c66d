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

#include "cdur/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace cdur {

namespace fs = std::filesystem;

namespace {

std::string sanitize(const std::string& name) {
  std::string s = name;
  for (auto& c : s)
    if (c == '/' || c == '\\') c = '_';
  return s;
}

std::string join_sizes(const std::vector<std::size_t>& v, char sep) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? std::string(1, sep) : "") << v[i];
  return out.str();
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else
      cur += c;
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

void save_checkpoint(const std::string& dir, CdurModel& model,
                     const std::vector<std::string>& labels, std::uint64_t seed, int epoch) {
  fs::create_directories(dir);
  std::ostringstream manifest;
  const CdurConfig& cfg = model.config();
  manifest << "config.mel_bins = " << cfg.mel_bins << "\n";
  manifest << "config.num_events = " << cfg.num_events << "\n";
  manifest << "config.channels = " << join_sizes(cfg.channels, ',') << "\n";
  manifest << "config.gru_hidden = " << cfg.gru_hidden << "\n";
  manifest << "config.leaky_slope = " << cfg.leaky_slope << "\n";
  manifest << "config.dropout = " << cfg.dropout << "\n";
  manifest << "config.subsample_p = " << cfg.subsample_p << "\n";
  {
    std::ostringstream st;
    for (std::size_t i = 0; i < cfg.stages.size(); ++i)
      st << (i ? "," : "") << cfg.stages[i].first << "x" << cfg.stages[i].second;
    manifest << "config.stages = " << st.str() << "\n";
  }
  manifest << "config.pooling = " << to_string(cfg.pooling) << "\n";
  {
    std::ostringstream ls;
    for (std::size_t i = 0; i < labels.size(); ++i) ls << (i ? "," : "") << labels[i];
    manifest << "labels = " << ls.str() << "\n";
  }
  manifest << "seed = " << seed << "\n";
  manifest << "epoch = " << epoch << "\n";

  for (const auto& p : model.params()) {
    const std::string file = sanitize(p.name) + ".tnsr";
    tensor_save(p.node->value, (fs::path(dir) / file).string());
    manifest << "param." << p.name << " = " << file << "\n";
  }
  for (const auto& b : model.buffers()) {
    const std::string file = sanitize(b.name) + ".tnsr";
    tensor_save(*b.tensor, (fs::path(dir) / file).string());
    manifest << "buffer." << b.name << " = " << file << "\n";
  }
  std::ofstream out((fs::path(dir) / "manifest.txt").string());
  if (!out) throw std::runtime_error("checkpoint: cannot write manifest in " + dir);
  out << manifest.str();
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
  const auto kv = read_kv((fs::path(dir) / "manifest.txt").string());
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("checkpoint manifest missing key: " + key);
    return it->second;
  };

  LoadedCheckpoint ck;
  ck.config.mel_bins = std::stoul(need("config.mel_bins"));
  ck.config.num_events = std::stoul(need("config.num_events"));
  ck.config.channels.clear();
  for (const auto& c : split(need("config.channels"), ',')) ck.config.channels.push_back(std::stoul(c));
  ck.config.gru_hidden = std::stoul(need("config.gru_hidden"));
  ck.config.leaky_slope = std::stod(need("config.leaky_slope"));
  ck.config.dropout = std::stod(need("config.dropout"));
  ck.config.subsample_p = std::stod(need("config.subsample_p"));
  ck.config.stages.clear();
  for (const auto& s : split(need("config.stages"), ',')) {
    auto x = s.find('x');
    if (x == std::string::npos) throw std::runtime_error("checkpoint: bad stage spec " + s);
    ck.config.stages.emplace_back(std::stoul(s.substr(0, x)), std::stoul(s.substr(x + 1)));
  }
  ck.config.pooling = pool_kind_from_string(need("config.pooling"));
  ck.labels = split(need("labels"), ',');
  ck.seed = std::stoull(need("seed"));
  ck.epoch = std::stoi(need("epoch"));

  Rng rng(ck.seed);
  ck.model = std::make_unique<CdurModel>(ck.config, rng);
  for (auto& p : ck.model->params()) {
    const std::string file = need("param." + p.name);
    Tensor t = tensor_load((fs::path(dir) / file).string());
    if (!t.same_shape(p.node->value))
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
    p.node->value = std::move(t);
  }
  for (auto& b : ck.model->buffers()) {
    const std::string file = need("buffer." + b.name);
    Tensor t = tensor_load((fs::path(dir) / file).string());
    if (!t.same_shape(*b.tensor))
      throw std::runtime_error("checkpoint: shape mismatch for " + b.name);
    *b.tensor = std::move(t);
  }
  return ck;
}

}  // namespace cdur
