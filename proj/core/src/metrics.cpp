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

#include "cdur/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cdur {

PRF prf_from_counts(const Counts& c) {
  PRF r;
  r.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  r.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

PRF ScoreReport::prf(const std::string& label) const {
  auto it = per_event.find(label);
  if (it == per_event.end()) throw std::invalid_argument("ScoreReport: unknown label " + label);
  return prf_from_counts(it->second);
}

PRF ScoreReport::micro() const {
  Counts total;
  for (const auto& [_, c] : per_event) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return prf_from_counts(total);
}

PRF ScoreReport::macro() const {
  PRF acc;
  if (per_event.empty()) return acc;
  for (const auto& [_, c] : per_event) {
    PRF p = prf_from_counts(c);
    acc.precision += p.precision;
    acc.recall += p.recall;
    acc.f1 += p.f1;
  }
  const auto n = static_cast<double>(per_event.size());
  return {acc.precision / n, acc.recall / n, acc.f1 / n};
}

std::string ScoreReport::to_tsv() const {
  std::ostringstream out;
  out << "event\ttp\tfp\tfn\tprecision\trecall\tf1\n";
  auto row = [&](const std::string& name, const Counts& c, const PRF& p) {
    out << name << '\t' << c.tp << '\t' << c.fp << '\t' << c.fn << '\t' << p.precision << '\t'
        << p.recall << '\t' << p.f1 << '\n';
  };
  for (const auto& label : labels) {
    auto it = per_event.find(label);
    const Counts c = it != per_event.end() ? it->second : Counts{};
    row(label, c, prf_from_counts(c));
  }
  Counts total;
  for (const auto& [_, c] : per_event) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  row("__micro__", total, micro());
  out << "__macro__\t-\t-\t-\t" << macro().precision << '\t' << macro().recall << '\t'
      << macro().f1 << '\n';
  return out.str();
}

void ScoreReport::write_tsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_tsv();
}

void ScoreReport::write_kv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& label : labels) {
    auto it = per_event.find(label);
    const Counts c = it != per_event.end() ? it->second : Counts{};
    const PRF p = prf_from_counts(c);
    out << label << ".tp = " << c.tp << '\n';
    out << label << ".fp = " << c.fp << '\n';
    out << label << ".fn = " << c.fn << '\n';
    out << label << ".precision = " << p.precision << '\n';
    out << label << ".recall = " << p.recall << '\n';
    out << label << ".f1 = " << p.f1 << '\n';
  }
  out << "micro.precision = " << micro().precision << '\n';
  out << "micro.recall = " << micro().recall << '\n';
  out << "micro.f1 = " << micro().f1 << '\n';
  out << "macro.precision = " << macro().precision << '\n';
  out << "macro.recall = " << macro().recall << '\n';
  out << "macro.f1 = " << macro().f1 << '\n';
}

namespace {

ScoreReport make_report(const std::vector<std::string>& labels) {
  ScoreReport r;
  r.labels = labels;
  for (const auto& l : labels) r.per_event[l];  // every vocabulary entry scored
  return r;
}

void check_label(const std::vector<std::string>& labels, const std::string& l,
                 const char* where) {
  if (std::find(labels.begin(), labels.end(), l) == labels.end())
    throw std::invalid_argument(std::string(where) + ": label not in vocabulary: " + l);
}

}  // namespace

ScoreReport tagging_f1(const std::map<std::string, Tensor>& clip_probs,
                       const std::map<std::string, std::set<std::string>>& gt_tags,
                       const std::vector<std::string>& labels, double phi_tag) {
  ScoreReport r = make_report(labels);
  for (const auto& [clip, probs] : clip_probs) {
    if (probs.size() != labels.size())
      throw std::invalid_argument("tagging_f1: probability vector length mismatch");
    std::set<std::string> gt;
    if (auto it = gt_tags.find(clip); it != gt_tags.end()) gt = it->second;
    for (const auto& g : gt) check_label(labels, g, "tagging_f1");
    for (std::size_t e = 0; e < labels.size(); ++e) {
      const bool predicted = probs[e] > phi_tag;
      const bool present = gt.count(labels[e]) > 0;
      if (predicted && present)
        ++r.per_event[labels[e]].tp;
      else if (predicted)
        ++r.per_event[labels[e]].fp;
      else if (present)
        ++r.per_event[labels[e]].fn;
    }
  }
  return r;
}

ScoreReport segment_f1(const EventList& pred, const EventList& gt,
                       const std::map<std::string, double>& clip_durations,
                       const std::vector<std::string>& labels, double segment_s) {
  if (segment_s <= 0) throw std::invalid_argument("segment_f1: segment size must be positive");
  ScoreReport r = make_report(labels);

  // clip -> label -> active segment set
  auto activate = [&](const EventList& events,
                      std::map<std::string, std::map<std::string, std::set<std::int64_t>>>& out,
                      const char* where) {
    for (const auto& ev : events) {
      check_label(labels, ev.label, where);
      auto it = clip_durations.find(ev.clip_id);
      if (it == clip_durations.end())
        throw std::invalid_argument("segment_f1: missing duration for clip " + ev.clip_id);
      const auto num_segments =
          static_cast<std::int64_t>(std::ceil(it->second / segment_s));
      auto first = static_cast<std::int64_t>(std::floor(ev.onset / segment_s));
      auto last = static_cast<std::int64_t>(std::ceil(ev.offset / segment_s));
      for (std::int64_t s = std::max<std::int64_t>(0, first);
           s < std::min(last, num_segments); ++s) {
        // Positive-measure overlap with [s*seg, (s+1)*seg).
        if (ev.onset < (s + 1) * segment_s && ev.offset > s * segment_s)
          out[ev.clip_id][ev.label].insert(s);
      }
    }
  };

  std::map<std::string, std::map<std::string, std::set<std::int64_t>>> pred_act, gt_act;
  activate(pred, pred_act, "segment_f1(pred)");
  activate(gt, gt_act, "segment_f1(gt)");

  for (const auto& [clip, _] : clip_durations) {
    for (const auto& label : labels) {
      const auto* ps = pred_act.count(clip) && pred_act[clip].count(label)
                           ? &pred_act[clip][label]
                           : nullptr;
      const auto* gs =
          gt_act.count(clip) && gt_act[clip].count(label) ? &gt_act[clip][label] : nullptr;
      static const std::set<std::int64_t> kEmpty;
      const auto& p = ps ? *ps : kEmpty;
      const auto& g = gs ? *gs : kEmpty;
      for (auto s : p)
        g.count(s) ? ++r.per_event[label].tp : ++r.per_event[label].fp;
      for (auto s : g)
        if (!p.count(s)) ++r.per_event[label].fn;
    }
  }
  return r;
}

ScoreReport event_f1(const EventList& pred, const EventList& gt,
                     const std::vector<std::string>& labels, double t_collar,
                     double offset_pct) {
  ScoreReport r = make_report(labels);

  // Group by (clip, label); matching never crosses either.
  std::map<std::pair<std::string, std::string>, std::vector<Event>> pred_g, gt_g;
  for (const auto& ev : pred) {
    check_label(labels, ev.label, "event_f1(pred)");
    pred_g[{ev.clip_id, ev.label}].push_back(ev);
  }
  for (const auto& ev : gt) {
    check_label(labels, ev.label, "event_f1(gt)");
    gt_g[{ev.clip_id, ev.label}].push_back(ev);
  }

  auto by_onset = [](const Event& a, const Event& b) { return a.onset < b.onset; };

  for (auto& [key, preds] : pred_g) {
    std::sort(preds.begin(), preds.end(), by_onset);
    std::vector<Event> gts;
    if (auto it = gt_g.find(key); it != gt_g.end()) gts = it->second;
    std::sort(gts.begin(), gts.end(), by_onset);
    std::vector<bool> used(gts.size(), false);

    auto& counts = r.per_event[key.second];
    for (const auto& p : preds) {
      bool matched = false;
      for (std::size_t i = 0; i < gts.size() && !matched; ++i) {
        if (used[i]) continue;
        const Event& g = gts[i];
        const double offset_tol = std::max(t_collar, offset_pct * (g.offset - g.onset));
        if (std::abs(p.onset - g.onset) <= t_collar &&
            std::abs(p.offset - g.offset) <= offset_tol) {
          used[i] = true;
          matched = true;
        }
      }
      matched ? ++counts.tp : ++counts.fp;
    }
    for (std::size_t i = 0; i < gts.size(); ++i)
      if (!used[i]) ++counts.fn;
  }
  // Ground-truth groups with no predictions at all are pure misses.
  for (const auto& [key, gts] : gt_g)
    if (!pred_g.count(key)) r.per_event[key.second].fn += static_cast<std::int64_t>(gts.size());
  return r;
}

}  // namespace cdur
