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

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cdur/checkpoint.hpp"
#include "cdur/config.hpp"
#include "cdur/melspec.hpp"
#include "cdur/metrics.hpp"
#include "cdur/synth.hpp"
#include "cdur/trainer.hpp"

namespace fs = std::filesystem;
using namespace cdur;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

CdurConfig model_config(const Config& cfg, std::size_t num_events) {
  CdurConfig m;
  m.mel_bins = static_cast<std::size_t>(cfg.get_int("features.mel_bins"));
  m.num_events = num_events;
  m.channels.clear();
  for (const auto& c : split_csv(cfg.get_str("model.channels")))
    m.channels.push_back(static_cast<std::size_t>(std::stoul(c)));
  m.leaky_slope = cfg.get_double("model.leaky_slope");
  m.stages.clear();
  for (const auto& s : split_csv(cfg.get_str("model.subsample.stages"))) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw ConfigError("bad stage spec: " + s);
    m.stages.emplace_back(std::stoul(s.substr(0, x)), std::stoul(s.substr(x + 1)));
  }
  m.subsample_p = cfg.get_double("model.subsample.p");
  m.dropout = cfg.get_double("model.dropout");
  m.gru_hidden = static_cast<std::size_t>(cfg.get_int("model.gru_hidden"));
  m.pooling = pool_kind_from_string(cfg.get_str("model.pooling"));
  m.validate();
  return m;
}

MelConfig mel_config(const Config& cfg) {
  MelConfig m;
  m.sample_rate = static_cast<int>(cfg.get_int("features.sample_rate"));
  m.mel_bins = static_cast<int>(cfg.get_int("features.mel_bins"));
  m.hop_ms = cfg.get_double("features.hop_ms");
  m.window_ms = cfg.get_double("features.window_ms");
  m.fft_size = static_cast<int>(cfg.get_int("features.fft_size"));
  return m;
}

Thresholds thresholds_from(const Config& cfg) {
  Thresholds th;
  th.phi_hi = cfg.get_double("post.phi_hi");
  th.phi_low = cfg.get_double("post.phi_low");
  th.phi_clip = cfg.get_double("post.phi_clip");
  th.phi_bin = cfg.get_double("post.phi_bin");
  th.phi_tag = cfg.get_double("post.phi_tag");
  return th;
}

struct FeatureSet {
  std::vector<ManifestRow> rows;
  std::map<std::string, Tensor> features;  // unstandardized
};

FeatureSet load_features(const std::string& dir) {
  FeatureSet fsn;
  fsn.rows = read_feature_manifest((fs::path(dir) / "manifest.tsv").string());
  for (const auto& r : fsn.rows) fsn.features[r.clip_id] = tensor_load(r.feature_path);
  return fsn;
}

std::vector<PreparedClip> prepare(const FeatureSet& fsn, const Standardizer& st,
                                  const std::map<std::string, std::set<std::string>>& weak,
                                  const std::vector<std::string>& labels) {
  std::vector<PreparedClip> out;
  for (const auto& r : fsn.rows) {
    PreparedClip c;
    c.clip_id = r.clip_id;
    c.frames = st.apply(fsn.features.at(r.clip_id));
    const auto it = weak.find(r.clip_id);
    c.targets = weak_target(it == weak.end() ? std::set<std::string>{} : it->second, labels);
    out.push_back(std::move(c));
  }
  return out;
}

void write_tags(const std::string& path, const std::vector<std::string>& labels,
                const std::map<std::string, Tensor>& clip_probs) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << "filename\tevent_label\tprobability\n";
  f.precision(10);
  for (const auto& [clip, probs] : clip_probs)
    for (std::size_t e = 0; e < labels.size(); ++e)
      f << clip << '\t' << labels[e] << '\t' << probs.data()[e] << '\n';
}

std::map<std::string, Tensor> read_tags(const std::string& path,
                                        std::vector<std::string>* labels_out) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::string line;
  std::getline(f, line);  // header
  std::map<std::string, std::map<std::string, double>> raw;
  std::set<std::string> labels;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string clip, label, prob;
    if (!std::getline(is, clip, '\t') || !std::getline(is, label, '\t') ||
        !std::getline(is, prob, '\t'))
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 fields");
    raw[clip][label] = std::stod(prob);
    labels.insert(label);
  }
  std::vector<std::string> vocab(labels.begin(), labels.end());
  std::map<std::string, Tensor> out;
  for (const auto& [clip, m] : raw) {
    Tensor t({vocab.size()});
    for (std::size_t e = 0; e < vocab.size(); ++e) {
      const auto it = m.find(vocab[e]);
      if (it != m.end()) t.data()[e] = it->second;
    }
    out[clip] = std::move(t);
  }
  if (labels_out) *labels_out = std::move(vocab);
  return out;
}

// -- subcommands ------------------------------------------------------------

int cmd_synth(const Config& cfg, const std::string& out_dir, std::size_t n_clips,
              std::uint64_t seed) {
  SynthConfig sc = cfg.get_str("synth.preset") == "hard" ? SynthConfig::hard_preset()
                                                         : SynthConfig::disjoint_preset();
  sc.sample_rate = static_cast<int>(cfg.get_int("synth.sample_rate"));
  sc.clip_seconds = cfg.get_double("synth.clip_seconds");
  sc.min_event_seconds = cfg.get_double("synth.min_event_seconds");
  sc.max_event_seconds = cfg.get_double("synth.max_event_seconds");
  sc.min_events_per_clip = static_cast<int>(cfg.get_int("synth.min_events_per_clip"));
  sc.max_events_per_clip = static_cast<int>(cfg.get_int("synth.max_events_per_clip"));
  sc.snr_db_min = cfg.get_double("synth.snr_db_min");
  sc.snr_db_max = cfg.get_double("synth.snr_db_max");
  sc.background_level = cfg.get_double("synth.background_level");
  Rng rng(seed);
  SynthResult res = synth_dataset(sc, n_clips, out_dir, rng);
  std::cout << "wrote " << res.clips.size() << " clips to " << out_dir << "\n";
  return kExitOk;
}

int cmd_features(const Config& cfg, const std::string& audio_dir, const std::string& out_dir) {
  const MelConfig mc = mel_config(cfg);
  fs::create_directories(out_dir);
  std::vector<std::string> wavs;
  for (const auto& entry : fs::directory_iterator(audio_dir))
    if (entry.path().extension() == ".wav") wavs.push_back(entry.path().string());
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) throw DataError("no .wav files under " + audio_dir);

  std::vector<ManifestRow> rows;
  for (const auto& w : wavs) {
    const Waveform audio = load_wav(w, mc.sample_rate);
    const LogMelSpectrogram spec = log_mel(audio, mc);
    spec.frames.check_finite("log-mel of " + w);
    const std::string clip_id = fs::path(w).filename().string();
    const std::string out = (fs::path(out_dir) / (fs::path(w).stem().string() + ".tnsr")).string();
    tensor_save(spec.frames, out);
    rows.push_back({clip_id, out, spec.num_frames()});
  }
  write_feature_manifest((fs::path(out_dir) / "manifest.tsv").string(), rows);
  cfg.write((fs::path(out_dir) / "features.conf").string());
  std::cout << "wrote " << rows.size() << " feature files to " << out_dir << "\n";
  return kExitOk;
}

int cmd_train(const Config& cfg, const std::string& features_dir, const std::string& weak_path,
              const std::string& run_dir) {
  fs::create_directories(run_dir);
  cfg.write((fs::path(run_dir) / "config.conf").string());

  const auto weak = read_weak_tsv(weak_path);
  FeatureSet fsn = load_features(features_dir);

  std::vector<ClipRecord> records;
  for (const auto& r : fsn.rows) {
    ClipRecord rec;
    rec.clip_id = r.clip_id;
    rec.feature_path = r.feature_path;
    const auto it = weak.find(r.clip_id);
    if (it != weak.end()) rec.weak_labels = it->second;
    records.push_back(std::move(rec));
  }
  const std::vector<std::string> labels = vocabulary(records);
  if (labels.empty()) throw DataError("no labels in " + weak_path);

  const auto seed = static_cast<std::uint64_t>(cfg.get_int("train.seed"));
  Rng rng(seed);
  Rng split_rng = rng.fork(1);
  const double val_fraction = cfg.get_double("train.val_fraction");
  auto [train_recs, val_recs] = stratified_split(records, 1.0 - val_fraction, split_rng);

  std::vector<Tensor> train_frames;
  for (const auto& r : train_recs) train_frames.push_back(fsn.features.at(r.clip_id));
  const Standardizer st = Standardizer::fit(train_frames);
  st.save((fs::path(run_dir) / "standardizer.tnsr").string());

  auto prep = [&](const std::vector<ClipRecord>& recs) {
    std::vector<PreparedClip> out;
    for (const auto& r : recs) {
      PreparedClip c;
      c.clip_id = r.clip_id;
      c.frames = st.apply(fsn.features.at(r.clip_id));
      c.targets = weak_target(r.weak_labels, labels);
      out.push_back(std::move(c));
    }
    return out;
  };
  const auto train_clips = prep(train_recs);
  const auto val_clips = prep(val_recs);

  Rng model_rng = rng.fork(2);
  CdurModel model(model_config(cfg, labels.size()), model_rng);

  TrainConfig tc;
  tc.batch_size = static_cast<std::size_t>(cfg.get_int("train.batch_size"));
  tc.max_epochs = static_cast<std::size_t>(cfg.get_int("train.max_epochs"));
  tc.lr = cfg.get_double("train.lr");
  tc.weight_decay = cfg.get_double("train.weight_decay");
  tc.plateau_factor = cfg.get_double("train.lr_reduce_factor");
  tc.plateau_patience = static_cast<std::size_t>(cfg.get_int("train.lr_reduce_patience"));
  tc.early_stop_patience = static_cast<std::size_t>(cfg.get_int("train.early_stop_patience"));
  tc.label_smoothing = cfg.get_double("train.label_smoothing.epsilon");
  tc.augment = cfg.get_bool("augment.enabled");
  tc.spec_aug.gamma_t = static_cast<int>(cfg.get_int("augment.specaug.gamma_t"));
  tc.spec_aug.eta_t0 = static_cast<int>(cfg.get_int("augment.specaug.eta_t0"));
  tc.spec_aug.gamma_f = static_cast<int>(cfg.get_int("augment.specaug.gamma_f"));
  tc.spec_aug.eta_f0 = static_cast<int>(cfg.get_int("augment.specaug.eta_f0"));
  tc.time_shift.std_frames = cfg.get_double("augment.timeshift.std");
  tc.seed = seed;
  tc.checkpoint_dir = (fs::path(run_dir) / "checkpoint").string();

  Trainer trainer(model, tc, labels);
  Rng fit_rng = rng.fork(3);
  TrainLog log = trainer.fit(train_clips, val_clips, fit_rng);
  log.write((fs::path(run_dir) / "trainlog.tsv").string());
  if (log.diverged) throw NumericError("training diverged; last finite checkpoint kept");
  std::cout << "best epoch " << log.best_epoch << " val_loss " << log.best_val_loss << "\n";
  return kExitOk;
}

int cmd_infer(const Config& cfg, const std::string& run_dir, const std::string& features_dir,
              const std::string& out_dir) {
  fs::create_directories(out_dir);
  LoadedCheckpoint ckpt = load_checkpoint((fs::path(run_dir) / "checkpoint").string());
  const Standardizer st = Standardizer::load((fs::path(run_dir) / "standardizer.tnsr").string());
  FeatureSet fsn = load_features(features_dir);
  const double frame_rate = 1000.0 / cfg.get_double("features.hop_ms");
  const PostMethod method = post_method_from_string(cfg.get_str("post.method"));
  const Thresholds th = thresholds_from(cfg);
  const auto omega = static_cast<std::size_t>(cfg.get_int("post.omega"));

  EventList events;
  std::map<std::string, Tensor> clip_probs;
  for (const auto& r : fsn.rows) {
    const Tensor frames = st.apply(fsn.features.at(r.clip_id));
    InferenceResult res =
        run_inference(*ckpt.model, frames, r.clip_id, ckpt.labels, method, th, frame_rate, omega);
    clip_probs[r.clip_id] = res.clip_probs;
    for (auto& e : res.events) events.push_back(std::move(e));
  }
  write_strong_tsv((fs::path(out_dir) / "events.tsv").string(), events);
  write_tags((fs::path(out_dir) / "tags.tsv").string(), ckpt.labels, clip_probs);
  std::cout << "wrote " << events.size() << " events for " << fsn.rows.size() << " clips\n";
  return kExitOk;
}

int cmd_evaluate(const Config& cfg, const std::string& hyp_dir, const std::string& ref_strong,
                 const std::string& ref_weak, const std::string& durations_path,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  const EventList hyp = read_strong_tsv((fs::path(hyp_dir) / "events.tsv").string());
  const EventList ref = read_strong_tsv(ref_strong);
  const auto durations = read_durations_tsv(durations_path);

  std::set<std::string> label_set;
  for (const auto& e : ref) label_set.insert(e.label);
  const std::vector<std::string> labels(label_set.begin(), label_set.end());

  const ScoreReport seg = segment_f1(hyp, ref, durations, labels);
  const ScoreReport evt = event_f1(hyp, ref, labels);
  seg.write_tsv((fs::path(out_dir) / "segment.tsv").string());
  evt.write_tsv((fs::path(out_dir) / "event.tsv").string());

  std::cout.precision(4);
  std::cout << "segment micro-F1 " << seg.micro().f1 << " macro-F1 " << seg.macro().f1 << "\n";
  std::cout << "event   micro-F1 " << evt.micro().f1 << " macro-F1 " << evt.macro().f1 << "\n";

  const std::string tags_path = (fs::path(hyp_dir) / "tags.tsv").string();
  if (!ref_weak.empty() && fs::exists(tags_path)) {
    std::vector<std::string> tag_labels;
    const auto clip_probs = read_tags(tags_path, &tag_labels);
    const auto gt = read_weak_tsv(ref_weak);
    const ScoreReport tag = tagging_f1(clip_probs, gt, tag_labels, cfg.get_double("post.phi_tag"));
    tag.write_tsv((fs::path(out_dir) / "tagging.tsv").string());
    std::cout << "tagging micro-F1 " << tag.micro().f1 << " macro-F1 " << tag.macro().f1 << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const Config& cfg, const std::string& run_dir, const std::string& features_dir,
              const std::string& ref_strong, const std::string& out_path) {
  LoadedCheckpoint ckpt = load_checkpoint((fs::path(run_dir) / "checkpoint").string());
  const Standardizer st = Standardizer::load((fs::path(run_dir) / "standardizer.tnsr").string());
  FeatureSet fsn = load_features(features_dir);
  const EventList ref = read_strong_tsv(ref_strong);
  const double frame_rate = 1000.0 / cfg.get_double("features.hop_ms");

  std::set<std::string> label_set;
  for (const auto& e : ref) label_set.insert(e.label);
  const std::vector<std::string> labels(label_set.begin(), label_set.end());

  // One forward pass per clip; the threshold grid reuses the probabilities.
  std::map<std::string, ProbabilitySet> probs;
  for (const auto& r : fsn.rows)
    probs[r.clip_id] = ckpt.model->infer(st.apply(fsn.features.at(r.clip_id)));

  const std::vector<double> clip_grid = {0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> low_grid = {0.1, 0.2, 0.3, 0.4};
  const std::vector<double> hi_grid = {0.5, 0.6, 0.7, 0.75, 0.8, 0.9};

  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw DataError("cannot write " + out_path);
  f << "phi_clip\tphi_low\tphi_hi\tevent_micro_f1\tevent_macro_f1\n";
  f.precision(10);
  for (double pc : clip_grid)
    for (double pl : low_grid)
      for (double ph : hi_grid) {
        if (pl >= ph) continue;
        Thresholds th;
        th.phi_clip = pc;
        th.phi_low = pl;
        th.phi_hi = ph;
        EventList hyp;
        for (const auto& [clip, p] : probs) {
          const BinarySequence b = triple_threshold(p.upsampled, p.clip_probs, th, frame_rate);
          for (auto& e : decode_events(b, ckpt.labels, clip)) hyp.push_back(std::move(e));
        }
        const ScoreReport evt = event_f1(hyp, ref, labels);
        f << pc << '\t' << pl << '\t' << ph << '\t' << evt.micro().f1 << '\t' << evt.macro().f1
          << '\n';
      }
  std::cout << "wrote sweep to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cdur: weakly supervised sound event detection"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config/--set appear after the subcommand

  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("--config", config_file, "TOML-style key = value config file");
  app.add_option("--set", overrides, "config override key=value (repeatable)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string synth_out = "data";
  std::size_t synth_clips = 100;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--clips", synth_clips, "number of clips");
  synth->add_option("--seed", synth_seed, "rng seed");

  auto* features = app.add_subcommand("features", "extract log-mel features");
  std::string feat_audio, feat_out;
  features->add_option("--audio", feat_audio, "directory of .wav files")->required();
  features->add_option("--out", feat_out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model from weak labels");
  std::string train_features, train_weak, train_run;
  train->add_option("--features", train_features, "feature directory")->required();
  train->add_option("--weak", train_weak, "weak label TSV")->required();
  train->add_option("--run", train_run, "run directory (created)")->required();

  auto* infer = app.add_subcommand("infer", "run inference and post-processing");
  std::string infer_run, infer_features, infer_out;
  infer->add_option("--run", infer_run, "training run directory")->required();
  infer->add_option("--features", infer_features, "feature directory")->required();
  infer->add_option("--out", infer_out, "output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score events against references");
  std::string eval_hyp, eval_ref, eval_weak, eval_dur, eval_out;
  evaluate->add_option("--hyp", eval_hyp, "inference output directory")->required();
  evaluate->add_option("--ref", eval_ref, "reference strong TSV")->required();
  evaluate->add_option("--weak-ref", eval_weak, "reference weak TSV (for tagging F1)");
  evaluate->add_option("--durations", eval_dur, "clip durations TSV")->required();
  evaluate->add_option("--out", eval_out, "report directory")->required();

  auto* sweep = app.add_subcommand("sweep", "grid over triple-threshold settings");
  std::string sweep_run, sweep_features, sweep_ref, sweep_out;
  sweep->add_option("--run", sweep_run, "training run directory")->required();
  sweep->add_option("--features", sweep_features, "feature directory")->required();
  sweep->add_option("--ref", sweep_ref, "reference strong TSV")->required();
  sweep->add_option("--out", sweep_out, "output TSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Config cfg = Config::defaults();
    if (!config_file.empty()) cfg.merge_file(config_file);
    cfg.merge_overrides(overrides);

    if (synth->parsed()) return cmd_synth(cfg, synth_out, synth_clips, synth_seed);
    if (features->parsed()) return cmd_features(cfg, feat_audio, feat_out);
    if (train->parsed()) return cmd_train(cfg, train_features, train_weak, train_run);
    if (infer->parsed()) return cmd_infer(cfg, infer_run, infer_features, infer_out);
    if (evaluate->parsed())
      return cmd_evaluate(cfg, eval_hyp, eval_ref, eval_weak, eval_dur, eval_out);
    if (sweep->parsed()) return cmd_sweep(cfg, sweep_run, sweep_features, sweep_ref, sweep_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const TensorFormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const WavError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
