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

#include "cdur/metrics.hpp"
#include "cdur/rng.hpp"

using namespace cdur;

namespace {
Event ev(const std::string& clip, double on, double off, const std::string& label) {
  return Event{clip, on, off, label};
}
}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("prf is zero on empty counts (0/0 -> 0)") {
  const PRF p = prf_from_counts({0, 0, 0});
  CHECK(p.precision == 0.0);
  CHECK(p.recall == 0.0);
  CHECK(p.f1 == 0.0);
}

TEST_CASE("tagging F1 with a strict threshold") {
  std::map<std::string, Tensor> probs;
  probs["a.wav"] = Tensor({2}, {0.9, 0.5});  // 0.5 is NOT > 0.5
  probs["b.wav"] = Tensor({2}, {0.2, 0.8});
  std::map<std::string, std::set<std::string>> gt;
  gt["a.wav"] = {"cat", "dog"};
  gt["b.wav"] = {"dog"};
  const ScoreReport r = tagging_f1(probs, gt, {"cat", "dog"}, 0.5);
  // cat: tp=1 (a), fn=0, fp=0. dog: tp=1 (b), fn=1 (a), fp=0.
  CHECK(r.per_event.at("cat").tp == 1);
  CHECK(r.per_event.at("dog").tp == 1);
  CHECK(r.per_event.at("dog").fn == 1);
  CHECK(r.micro().precision == doctest::Approx(1.0));
  CHECK(r.micro().recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("segment F1 uses positive-measure overlap on 1 s segments") {
  const std::map<std::string, double> durations = {{"c", 4.0}};
  // GT occupies [0.5, 2.5): segments 0,1,2. Prediction [1.0, 2.0): 1 only.
  const ScoreReport r =
      segment_f1({ev("c", 1.0, 2.0, "x")}, {ev("c", 0.5, 2.5, "x")}, durations, {"x"});
  CHECK(r.per_event.at("x").tp == 1);
  CHECK(r.per_event.at("x").fn == 2);
  CHECK(r.per_event.at("x").fp == 0);
}

TEST_CASE("segment boundary: touching a segment edge is not overlap") {
  const std::map<std::string, double> durations = {{"c", 3.0}};
  // Prediction [1.0, 2.0) exactly: no measure inside segment 0 or 2.
  const ScoreReport r =
      segment_f1({ev("c", 1.0, 2.0, "x")}, {ev("c", 1.0, 2.0, "x")}, durations, {"x"});
  CHECK(r.per_event.at("x").tp == 1);
  CHECK(r.per_event.at("x").fp == 0);
  CHECK(r.per_event.at("x").fn == 0);
}

TEST_CASE("event F1 onset collar boundary: exactly 0.2 matches") {
  const ScoreReport hit =
      event_f1({ev("c", 1.2, 3.0, "x")}, {ev("c", 1.0, 3.0, "x")}, {"x"});
  CHECK(hit.per_event.at("x").tp == 1);
  CHECK(hit.per_event.at("x").fp == 0);
  CHECK(hit.per_event.at("x").fn == 0);
}

TEST_CASE("event F1 onset collar boundary: 0.2 + 1e-6 is a miss") {
  const ScoreReport miss =
      event_f1({ev("c", 1.2 + 1e-6, 3.0, "x")}, {ev("c", 1.0, 3.0, "x")}, {"x"});
  CHECK(miss.per_event.at("x").tp == 0);
  CHECK(miss.per_event.at("x").fp == 1);
  CHECK(miss.per_event.at("x").fn == 1);
}

TEST_CASE("event F1 offset tolerance widens with long events") {
  // GT lasts 10 s -> offset tolerance max(0.2, 0.2 * 10) = 2 s.
  const ScoreReport r =
      event_f1({ev("c", 0.0, 11.9, "x")}, {ev("c", 0.0, 10.0, "x")}, {"x"});
  CHECK(r.per_event.at("x").tp == 1);
  const ScoreReport miss =
      event_f1({ev("c", 0.0, 12.1, "x")}, {ev("c", 0.0, 10.0, "x")}, {"x"});
  CHECK(miss.per_event.at("x").tp == 0);
}

TEST_CASE("event matching is one-to-one") {
  // Two predictions near one GT event: one TP, one FP.
  const ScoreReport r = event_f1(
      {ev("c", 1.0, 2.0, "x"), ev("c", 1.1, 2.1, "x")}, {ev("c", 1.0, 2.0, "x")}, {"x"});
  CHECK(r.per_event.at("x").tp == 1);
  CHECK(r.per_event.at("x").fp == 1);
  CHECK(r.per_event.at("x").fn == 0);
}

TEST_CASE("events never match across labels or clips") {
  const ScoreReport wrong_label =
      event_f1({ev("c", 1.0, 2.0, "y")}, {ev("c", 1.0, 2.0, "x")}, {"x", "y"});
  CHECK(wrong_label.micro().f1 == 0.0);
  const ScoreReport wrong_clip =
      event_f1({ev("other", 1.0, 2.0, "x")}, {ev("c", 1.0, 2.0, "x")}, {"x"});
  CHECK(wrong_clip.micro().f1 == 0.0);
}

TEST_CASE("micro equals macro with a single label (1000 random cases)") {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    EventList pred, gt;
    const int np = static_cast<int>(rng.uniform_int(0, 6));
    const int ng = static_cast<int>(rng.uniform_int(0, 6));
    for (int k = 0; k < np; ++k) {
      const double on = rng.next_double() * 8.0;
      pred.push_back(ev("c", on, on + 0.5 + rng.next_double(), "x"));
    }
    for (int k = 0; k < ng; ++k) {
      const double on = rng.next_double() * 8.0;
      gt.push_back(ev("c", on, on + 0.5 + rng.next_double(), "x"));
    }
    const ScoreReport r = event_f1(pred, gt, {"x"});
    CHECK(r.micro().f1 == doctest::Approx(r.macro().f1));
  }
}

TEST_CASE("report TSV has micro and macro rows") {
  const ScoreReport r = event_f1({ev("c", 0, 1, "x")}, {ev("c", 0, 1, "x")}, {"x"});
  const std::string tsv = r.to_tsv();
  CHECK(tsv.find("__micro__") != std::string::npos);
  CHECK(tsv.find("__macro__") != std::string::npos);
}

TEST_SUITE_END();
