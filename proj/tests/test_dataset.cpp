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

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cdur/dataset.hpp"

using namespace cdur;

namespace {
std::string tmp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<ClipRecord> make_records(int n, Rng& rng,
                                     const std::vector<std::string>& vocab) {
  std::vector<ClipRecord> recs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    recs[static_cast<std::size_t>(i)].clip_id = "c" + std::to_string(i) + ".wav";
    for (const auto& label : vocab)
      if (rng.next_double() < 0.4) recs[static_cast<std::size_t>(i)].weak_labels.insert(label);
  }
  return recs;
}
}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("weak TSV round trip") {
  const auto path = tmp_file("cdur_weak.tsv");
  std::map<std::string, std::set<std::string>> weak;
  weak["a.wav"] = {"dog", "cat"};
  weak["b.wav"] = {};
  write_weak_tsv(path, weak);
  CHECK(read_weak_tsv(path) == weak);
  std::remove(path.c_str());
}

TEST_CASE("strong TSV round trip and validation") {
  const auto path = tmp_file("cdur_strong.tsv");
  EventList events = {{"a.wav", 0.5, 1.25, "dog"}, {"a.wav", 2.0, 2.125, "cat"}};
  write_strong_tsv(path, events);
  const EventList back = read_strong_tsv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].clip_id == "a.wav");
  CHECK(back[0].onset == 0.5);
  CHECK(back[1].label == "cat");

  {
    std::ofstream f(path);
    f << "filename\tonset\toffset\tevent_label\n";
    f << "a.wav\t2.0\t1.0\tdog\n";  // onset >= offset
  }
  CHECK_THROWS_AS(read_strong_tsv(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("manifest and durations round trip") {
  const auto path = tmp_file("cdur_manifest.tsv");
  std::vector<ManifestRow> rows = {{"a.wav", "/tmp/a.tnsr", 512}, {"b.wav", "/tmp/b.tnsr", 100}};
  write_feature_manifest(path, rows);
  const auto back = read_feature_manifest(path);
  REQUIRE(back.size() == 2);
  CHECK(back[1].num_frames == 100);

  write_durations_tsv(path, {{"a.wav", 10.0}});
  CHECK(read_durations_tsv(path).at("a.wav") == 10.0);
  std::remove(path.c_str());
}

TEST_CASE("vocabulary is the sorted label union") {
  Rng rng(1);
  auto recs = make_records(10, rng, {"zebra", "ant", "mole"});
  const auto vocab = vocabulary(recs);
  for (std::size_t i = 1; i < vocab.size(); ++i) CHECK(vocab[i - 1] < vocab[i]);
}

TEST_CASE("stratified split partitions the records and respects the fraction") {
  Rng rng(2);
  const auto recs = make_records(100, rng, {"a", "b", "c"});
  Rng split_rng(3);
  auto [train, val] = stratified_split(recs, 0.8, split_rng);
  CHECK(train.size() + val.size() == 100);
  CHECK(train.size() >= 70);
  CHECK(train.size() <= 90);
  std::set<std::string> seen;
  for (const auto& r : train) CHECK(seen.insert(r.clip_id).second);
  for (const auto& r : val) CHECK(seen.insert(r.clip_id).second);

  // Per-label shares stay close to the requested fraction.
  for (const auto& label : {"a", "b", "c"}) {
    int total = 0, in_train = 0;
    for (const auto& r : recs) total += r.weak_labels.count(label);
    for (const auto& r : train) in_train += r.weak_labels.count(label);
    if (total >= 5)
      CHECK(std::abs(static_cast<double>(in_train) / total - 0.8) < 0.15);
  }
}

TEST_CASE("single-occurrence labels land in train") {
  std::vector<ClipRecord> recs(20);
  for (int i = 0; i < 20; ++i) {
    recs[static_cast<std::size_t>(i)].clip_id = "c" + std::to_string(i);
    recs[static_cast<std::size_t>(i)].weak_labels = {"common"};
  }
  recs[7].weak_labels.insert("rare");
  Rng rng(4);
  auto [train, val] = stratified_split(recs, 0.5, rng);
  bool rare_in_train = false;
  for (const auto& r : train) rare_in_train |= r.weak_labels.count("rare") > 0;
  CHECK(rare_in_train);
}

TEST_CASE("balanced batches cover every clip and every label per batch") {
  Rng rng(5);
  auto recs = make_records(37, rng, {"a", "b", "c"});
  // Ensure every label occurs at least once overall.
  recs[0].weak_labels = {"a"};
  recs[1].weak_labels = {"b"};
  recs[2].weak_labels = {"c"};
  Rng batch_rng(6);
  const auto batches = balanced_batches(recs, 8, batch_rng);
  CHECK(batches.size() == (37 + 7) / 8);

  std::set<std::size_t> seen;
  for (const auto& batch : batches) {
    CHECK(batch.size() <= 8);
    std::set<std::string> labels;
    for (std::size_t i : batch) {
      seen.insert(i);
      for (const auto& l : recs[i].weak_labels) labels.insert(l);
    }
    CHECK(labels.count("a"));
    CHECK(labels.count("b"));
    CHECK(labels.count("c"));
  }
  CHECK(seen.size() == 37);  // every clip appears in the epoch
}

TEST_CASE("batch size below the vocabulary size is rejected") {
  Rng rng(7);
  auto recs = make_records(10, rng, {"a", "b", "c", "d"});
  recs[0].weak_labels = {"a"};
  recs[1].weak_labels = {"b"};
  recs[2].weak_labels = {"c"};
  recs[3].weak_labels = {"d"};
  Rng batch_rng(8);
  CHECK_THROWS_AS(balanced_batches(recs, 2, batch_rng), DataError);
}

TEST_SUITE_END();
