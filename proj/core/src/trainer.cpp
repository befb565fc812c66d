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

#include "cdur/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cdur/checkpoint.hpp"
#include "cdur/config.hpp"

namespace cdur {

std::string TrainLog::to_tsv() const {
  std::ostringstream os;
  os << "epoch\ttrain_loss\tval_loss\tlr\n";
  os.precision(10);
  for (const auto& e : epochs)
    os << e.epoch << '\t' << e.train_loss << '\t' << e.val_loss << '\t' << e.lr << '\n';
  return os.str();
}

void TrainLog::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write train log: " + path);
  f << to_tsv();
}

Standardizer Standardizer::fit(const std::vector<Tensor>& frames) {
  if (frames.empty()) throw DataError("standardizer: no training features");
  const std::size_t d = frames.front().dim(1);
  Tensor sum({d}), sumsq({d});
  std::size_t n = 0;
  for (const auto& f : frames) {
    if (f.dim(1) != d) throw DataError("standardizer: inconsistent feature width");
    for (std::size_t t = 0; t < f.dim(0); ++t)
      for (std::size_t j = 0; j < d; ++j) {
        const double v = f.at(t, j);
        sum.data()[j] += v;
        sumsq.data()[j] += v * v;
      }
    n += f.dim(0);
  }
  Standardizer s;
  s.mean = Tensor({d});
  s.std = Tensor({d});
  for (std::size_t j = 0; j < d; ++j) {
    const double m = sum.data()[j] / static_cast<double>(n);
    const double var = sumsq.data()[j] / static_cast<double>(n) - m * m;
    s.mean.data()[j] = m;
    s.std.data()[j] = std::sqrt(std::max(var, 0.0)) + 1e-8;
  }
  return s;
}

Tensor Standardizer::apply(const Tensor& frames) const {
  const std::size_t d = mean.dim(0);
  if (frames.dim(1) != d) throw DataError("standardizer: feature width mismatch");
  Tensor out = frames;
  for (std::size_t t = 0; t < out.dim(0); ++t)
    for (std::size_t j = 0; j < d; ++j)
      out.at(t, j) = (out.at(t, j) - mean.data()[j]) / std.data()[j];
  return out;
}

void Standardizer::save(const std::string& path) const {
  Tensor packed({2, mean.dim(0)});
  for (std::size_t j = 0; j < mean.dim(0); ++j) {
    packed.at(0, j) = mean.data()[j];
    packed.at(1, j) = std.data()[j];
  }
  tensor_save(packed, path);
}

Standardizer Standardizer::load(const std::string& path) {
  const Tensor packed = tensor_load(path);
  if (packed.rank() != 2 || packed.dim(0) != 2)
    throw DataError("standardizer: bad file " + path);
  Standardizer s;
  const std::size_t d = packed.dim(1);
  s.mean = Tensor({d});
  s.std = Tensor({d});
  for (std::size_t j = 0; j < d; ++j) {
    s.mean.data()[j] = packed.at(0, j);
    s.std.data()[j] = packed.at(1, j);
  }
  return s;
}

Tensor weak_target(const std::set<std::string>& labels, const std::vector<std::string>& vocab) {
  Tensor t({vocab.size()});
  for (std::size_t e = 0; e < vocab.size(); ++e)
    if (labels.count(vocab[e])) t.data()[e] = 1.0;
  return t;
}

Trainer::Trainer(CdurModel& model, const TrainConfig& cfg, const std::vector<std::string>& labels)
    : model_(model), cfg_(cfg), labels_(labels),
      optim_(AdamW::Options{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay}) {
  if (labels_.size() != model.config().num_events)
    throw ConfigError("trainer: label count does not match model output size");
}

namespace {

std::vector<ClipRecord> as_records(const std::vector<PreparedClip>& clips,
                                   const std::vector<std::string>& labels) {
  std::vector<ClipRecord> recs(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    recs[i].clip_id = clips[i].clip_id;
    for (std::size_t e = 0; e < labels.size(); ++e)
      if (clips[i].targets.data()[e] > 0.5) recs[i].weak_labels.insert(labels[e]);
  }
  return recs;
}

std::vector<Tensor> snapshot(std::vector<Param>& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (auto& p : params) out.push_back(p.node->value);
  return out;
}

void restore(std::vector<Param>& params, const std::vector<Tensor>& snap) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].node->value = snap[i];
}

}  // namespace

double Trainer::run_epoch(const std::vector<PreparedClip>& clips, Rng& rng, bool training) {
  std::vector<std::vector<std::size_t>> batches;
  if (training) {
    batches = balanced_batches(as_records(clips, labels_), cfg_.batch_size, rng);
  } else {
    for (std::size_t i = 0; i < clips.size(); i += cfg_.batch_size) {
      std::vector<std::size_t> b;
      for (std::size_t j = i; j < std::min(i + cfg_.batch_size, clips.size()); ++j)
        b.push_back(j);
      batches.push_back(std::move(b));
    }
  }

  double loss_sum = 0.0;
  std::size_t count = 0;
  for (const auto& batch : batches) {
    std::vector<Tensor> storage;
    storage.reserve(batch.size());
    Tensor targets({batch.size(), labels_.size()});
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const PreparedClip& clip = clips[batch[b]];
      Tensor frames = clip.frames;
      if (training && cfg_.augment) {
        LogMelSpectrogram spec;
        spec.frames = std::move(frames);
        spec.mel_bins = static_cast<int>(spec.frames.dim(1));
        spec = time_shift(spec, cfg_.time_shift, rng);
        SpecAugParams aug = cfg_.spec_aug;
        aug.eta_t0 = std::min<int>(aug.eta_t0, static_cast<int>(spec.frames.dim(0)) - 1);
        aug.eta_f0 = std::min<int>(aug.eta_f0, static_cast<int>(spec.frames.dim(1)) - 1);
        spec = spec_augment(spec, aug, rng);
        frames = std::move(spec.frames);
      }
      storage.push_back(std::move(frames));
      Tensor target = clip.targets;
      if (training && cfg_.label_smoothing > 0)
        target = smooth_labels(target, cfg_.label_smoothing);
      for (std::size_t e = 0; e < labels_.size(); ++e)
        targets.at(b, e) = target.data()[e];
    }
    std::vector<const Tensor*> ptrs;
    for (const auto& t : storage) ptrs.push_back(&t);

    BatchForward fwd = model_.forward(ptrs, training, rng);
    ad::Ptr loss = ad::bce_loss(fwd.clip_probs, targets);
    const double l = loss->value.data()[0];
    if (!std::isfinite(l)) return std::numeric_limits<double>::quiet_NaN();
    if (training) {
      ad::backward(loss);
      optim_.step(model_.params());
    }
    loss_sum += l * static_cast<double>(batch.size());
    count += batch.size();
  }
  return count ? loss_sum / static_cast<double>(count) : 0.0;
}

TrainLog Trainer::fit(const std::vector<PreparedClip>& train, const std::vector<PreparedClip>& val,
                      Rng& rng) {
  TrainLog log;
  log.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best = snapshot(model_.params());
  std::vector<Tensor> last_good = best;
  std::size_t since_best = 0, since_plateau = 0;

  for (std::size_t epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
    Rng epoch_rng = rng.fork(epoch);
    const double train_loss = run_epoch(train, epoch_rng, true);
    if (!std::isfinite(train_loss)) {
      restore(model_.params(), last_good);
      log.diverged = true;
      break;
    }
    Rng val_rng = epoch_rng.fork(0);
    const double val_loss = run_epoch(val.empty() ? train : val, val_rng, false);
    if (!std::isfinite(val_loss)) {
      restore(model_.params(), last_good);
      log.diverged = true;
      break;
    }
    last_good = snapshot(model_.params());
    log.epochs.push_back({epoch, train_loss, val_loss, optim_.lr()});

    if (val_loss < log.best_val_loss) {
      log.best_val_loss = val_loss;
      log.best_epoch = epoch;
      best = last_good;
      since_best = 0;
      since_plateau = 0;
    } else {
      ++since_best;
      ++since_plateau;
      if (since_plateau >= cfg_.plateau_patience && cfg_.plateau_patience > 0) {
        optim_.set_lr(optim_.lr() * cfg_.plateau_factor);
        since_plateau = 0;
      }
    }
    if (since_best >= cfg_.early_stop_patience) break;
  }

  restore(model_.params(), best);
  if (!cfg_.checkpoint_dir.empty())
    save_checkpoint(cfg_.checkpoint_dir, model_, labels_, cfg_.seed,
                    static_cast<int>(log.best_epoch));
  return log;
}

InferenceResult run_inference(CdurModel& model, const Tensor& frames, const std::string& clip_id,
                              const std::vector<std::string>& labels, PostMethod method,
                              const Thresholds& th, double frame_rate,
                              std::size_t median_window) {
  ProbabilitySet probs = model.infer(frames);
  InferenceResult out;
  out.clip_probs = probs.clip_probs;
  out.frame_probs = probs.upsampled;

  BinarySequence binary;
  switch (method) {
    case PostMethod::None:
      binary = binarize(out.frame_probs, th.phi_bin, frame_rate);
      break;
    case PostMethod::Median:
      binary = median_filter(binarize(out.frame_probs, th.phi_bin, frame_rate),
                             static_cast<int>(median_window));
      break;
    case PostMethod::Double:
      binary = double_threshold(out.frame_probs, th.phi_hi, th.phi_low, frame_rate);
      break;
    case PostMethod::Triple:
      binary = triple_threshold(out.frame_probs, out.clip_probs, th, frame_rate);
      break;
  }
  out.events = decode_events(binary, labels, clip_id);
  return out;
}

PseudoLabelReport pseudo_label(CdurModel& model, const std::vector<PreparedClip>& clips,
                               const std::vector<std::string>& labels, const Thresholds& th,
                               double frame_rate, double phi_tag) {
  PseudoLabelReport report;
  report.clips_total = clips.size();
  for (const auto& clip : clips) {
    InferenceResult res =
        run_inference(model, clip.frames, clip.clip_id, labels, PostMethod::Triple, th, frame_rate);
    EventList kept;
    for (const auto& ev : res.events) {
      const auto it = std::find(labels.begin(), labels.end(), ev.label);
      const std::size_t e = static_cast<std::size_t>(it - labels.begin());
      if (res.clip_probs.data()[e] > phi_tag) kept.push_back(ev);
    }
    if (!kept.empty()) ++report.clips_kept;
    for (auto& ev : kept) report.events.push_back(std::move(ev));
  }
  return report;
}

}  // namespace cdur
