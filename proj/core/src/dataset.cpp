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

#include "cdur/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cdur {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r')
      cur += c;
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else
      cur += c;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_seconds(const std::string& s, const std::string& path, int lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ":" + std::to_string(lineno) + ": bad time value '" + s + "'");
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream create_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace

std::map<std::string, std::set<std::string>> read_weak_tsv(const std::string& path) {
  auto in = open_or_throw(path);
  std::map<std::string, std::set<std::string>> weak;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (lineno == 1 && fields.size() >= 1 && fields[0] == "filename") continue;  // header
    if (fields.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 2 tab-separated fields");
    auto labels = split_commas(fields[1]);
    weak[fields[0]].insert(labels.begin(), labels.end());
  }
  return weak;
}

void write_weak_tsv(const std::string& path,
                    const std::map<std::string, std::set<std::string>>& weak) {
  auto out = create_or_throw(path);
  out << "filename\tevent_labels\n";
  for (const auto& [clip, labels] : weak) {
    out << clip << '\t';
    bool first = true;
    for (const auto& l : labels) {
      out << (first ? "" : ",") << l;
      first = false;
    }
    out << '\n';
  }
}

EventList read_strong_tsv(const std::string& path) {
  auto in = open_or_throw(path);
  EventList events;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (lineno == 1 && fields.size() >= 1 && fields[0] == "filename") continue;  // header
    if (fields.size() != 4)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields");
    Event ev;
    ev.clip_id = fields[0];
    ev.onset = parse_seconds(fields[1], path, lineno);
    ev.offset = parse_seconds(fields[2], path, lineno);
    ev.label = fields[3];
    if (ev.onset >= ev.offset)
      throw DataError(path + ":" + std::to_string(lineno) + ": onset >= offset");
    events.push_back(std::move(ev));
  }
  return events;
}

void write_strong_tsv(const std::string& path, const EventList& events) {
  auto out = create_or_throw(path);
  out << "filename\tonset\toffset\tevent_label\n";
  char buf[64];
  for (const auto& ev : events) {
    std::snprintf(buf, sizeof(buf), "%.3f\t%.3f", ev.onset, ev.offset);
    out << ev.clip_id << '\t' << buf << '\t' << ev.label << '\n';
  }
}

std::vector<ManifestRow> read_feature_manifest(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<ManifestRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields");
    rows.push_back({fields[0], fields[1], std::stoul(fields[2])});
  }
  return rows;
}

void write_feature_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  auto out = create_or_throw(path);
  for (const auto& r : rows)
    out << r.clip_id << '\t' << r.feature_path << '\t' << r.num_frames << '\n';
}

std::map<std::string, double> read_durations_tsv(const std::string& path) {
  auto in = open_or_throw(path);
  std::map<std::string, double> durations;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 2 tab-separated fields");
    durations[fields[0]] = parse_seconds(fields[1], path, lineno);
  }
  return durations;
}

void write_durations_tsv(const std::string& path,
                         const std::map<std::string, double>& durations) {
  auto out = create_or_throw(path);
  char buf[32];
  for (const auto& [clip, d] : durations) {
    std::snprintf(buf, sizeof(buf), "%.3f", d);
    out << clip << '\t' << buf << '\n';
  }
}

std::vector<std::string> vocabulary(const std::vector<ClipRecord>& records) {
  std::set<std::string> vocab;
  for (const auto& r : records) vocab.insert(r.weak_labels.begin(), r.weak_labels.end());
  return {vocab.begin(), vocab.end()};
}

std::pair<std::vector<ClipRecord>, std::vector<ClipRecord>> stratified_split(
    const std::vector<ClipRecord>& records, double train_fraction, Rng& rng) {
  if (train_fraction < 0.0 || train_fraction > 1.0)
    throw DataError("stratified_split: fraction outside [0, 1]");

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const auto& l : records[i].weak_labels) by_label[l].push_back(i);

  for (const auto& [label, clips] : by_label)
    if (clips.size() < 2)
      std::cerr << "stratified_split: label '" << label
                << "' occurs once; assigning its clip to train\n";

  // Remaining desired counts per fold per label (0 = train, 1 = val).
  std::map<std::string, double> desire_train, desire_val;
  for (const auto& [label, clips] : by_label) {
    desire_train[label] = train_fraction * static_cast<double>(clips.size());
    desire_val[label] = (1.0 - train_fraction) * static_cast<double>(clips.size());
  }

  std::vector<int> assignment(records.size(), -1);
  double cap_train = train_fraction * static_cast<double>(records.size());
  double cap_val = static_cast<double>(records.size()) - cap_train;

  // Iterative stratification: handle the currently rarest label first.
  while (true) {
    std::string rarest;
    std::size_t rarest_count = SIZE_MAX;
    for (const auto& [label, clips] : by_label) {
      std::size_t remaining = 0;
      for (auto i : clips)
        if (assignment[i] < 0) ++remaining;
      if (remaining > 0 && remaining < rarest_count) {
        rarest_count = remaining;
        rarest = label;
      }
    }
    if (rarest_count == SIZE_MAX) break;

    std::vector<std::size_t> todo;
    for (auto i : by_label[rarest])
      if (assignment[i] < 0) todo.push_back(i);
    // Shuffle so ties break reproducibly but without positional bias.
    for (std::size_t i = todo.size(); i > 1; --i)
      std::swap(todo[i - 1], todo[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);

    const bool single = by_label[rarest].size() < 2;
    for (auto i : todo) {
      double gain_train = 0.0, gain_val = 0.0;
      for (const auto& l : records[i].weak_labels) {
        gain_train += desire_train[l];
        gain_val += desire_val[l];
      }
      bool to_train;
      if (single)
        to_train = true;
      else if (gain_train != gain_val)
        to_train = gain_train > gain_val;
      else
        to_train = cap_train >= cap_val;
      assignment[i] = to_train ? 0 : 1;
      for (const auto& l : records[i].weak_labels) {
        (to_train ? desire_train : desire_val)[l] -= 1.0;
      }
      (to_train ? cap_train : cap_val) -= 1.0;
    }
  }
  // Label-free clips balance the overall fold sizes.
  for (std::size_t i = 0; i < records.size(); ++i)
    if (assignment[i] < 0) {
      assignment[i] = cap_train >= cap_val ? 0 : 1;
      (assignment[i] == 0 ? cap_train : cap_val) -= 1.0;
    }

  std::pair<std::vector<ClipRecord>, std::vector<ClipRecord>> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    (assignment[i] == 0 ? out.first : out.second).push_back(records[i]);
  return out;
}

std::vector<std::vector<std::size_t>> balanced_batches(const std::vector<ClipRecord>& records,
                                                       std::size_t batch_size, Rng& rng) {
  const auto vocab = vocabulary(records);
  if (batch_size < vocab.size())
    throw DataError("balanced_batches: batch size " + std::to_string(batch_size) +
                    " smaller than vocabulary size " + std::to_string(vocab.size()));
  if (records.empty()) return {};

  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
  };

  std::vector<std::size_t> queue(records.size());
  for (std::size_t i = 0; i < queue.size(); ++i) queue[i] = i;
  shuffle(queue);
  std::size_t qpos = 0;

  // Cyclic per-label reuse pools for when the epoch queue runs dry.
  std::map<std::string, std::vector<std::size_t>> pools;
  std::map<std::string, std::size_t> pool_pos;
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const auto& l : records[i].weak_labels) pools[l].push_back(i);
  for (auto& [l, pool] : pools) shuffle(pool);

  const std::size_t num_batches = (records.size() + batch_size - 1) / batch_size;
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < num_batches; ++b) {
    std::vector<std::size_t> batch;
    std::set<std::string> covered;
    auto note = [&](std::size_t idx) {
      batch.push_back(idx);
      covered.insert(records[idx].weak_labels.begin(), records[idx].weak_labels.end());
    };

    // One carrier per label, preferring clips still owed to this epoch.
    for (const auto& label : vocab) {
      if (covered.count(label)) continue;
      bool taken = false;
      for (std::size_t k = qpos; k < queue.size(); ++k) {
        if (records[queue[k]].weak_labels.count(label)) {
          note(queue[k]);
          queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(k));
          taken = true;
          break;
        }
      }
      if (!taken) {
        auto& pool = pools[label];
        note(pool[pool_pos[label]++ % pool.size()]);
      }
    }
    // Fill the rest from the epoch queue, then reuse.
    while (batch.size() < batch_size) {
      if (qpos < queue.size())
        note(queue[qpos++]);
      else if (!vocab.empty()) {
        const auto& label = vocab[batch.size() % vocab.size()];
        auto& pool = pools[label];
        note(pool[pool_pos[label]++ % pool.size()]);
      } else {
        note((b * batch_size + batch.size()) % records.size());
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace cdur
