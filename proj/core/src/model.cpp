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

#include "cdur/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace cdur {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Time length after a chain of truncating subsampling stages.
std::size_t subsampled_len(std::size_t t, const std::vector<std::pair<std::size_t, std::size_t>>& stages) {
  for (const auto& [st, sf] : stages) t = ceil_div(t, st);
  return t;
}

}  // namespace

std::size_t CdurConfig::time_factor() const {
  std::size_t v = 1;
  for (const auto& [st, sf] : stages) v *= st;
  return v;
}

void CdurConfig::validate() const {
  if (num_events == 0) throw std::invalid_argument("CdurConfig: num_events must be positive");
  if (mel_bins == 0) throw std::invalid_argument("CdurConfig: mel_bins must be positive");
  if (channels.size() != 5) throw std::invalid_argument("CdurConfig: expected 5 conv blocks");
  if (stages.size() != 3) throw std::invalid_argument("CdurConfig: expected 3 subsample stages");
  if (subsample_p < 1.0) throw std::invalid_argument("CdurConfig: subsample p must be >= 1");
  std::size_t d = mel_bins;
  for (const auto& [st, sf] : stages) {
    if (st == 0 || sf == 0) throw std::invalid_argument("CdurConfig: zero subsample factor");
    d = ceil_div(d, sf);
  }
  if (d != 1)
    throw std::invalid_argument(
        "CdurConfig: stage freq factors must collapse the mel axis to 1");
}

CdurModel::CdurModel(CdurConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t in_ch = 1;
  for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
    const std::string base = "block" + std::to_string(i + 1);
    bns_.emplace_back(base + ".bn", in_ch);
    convs_.emplace_back(base + ".conv", in_ch, cfg_.channels[i], rng);
    in_ch = cfg_.channels[i];
  }
  const std::size_t gru_in = cfg_.channels.back();
  gru_fwd_ = std::make_unique<GruDirection>("gru.fwd", gru_in, cfg_.gru_hidden, rng);
  gru_bwd_ = std::make_unique<GruDirection>("gru.bwd", gru_in, cfg_.gru_hidden, rng);
  head_ = std::make_unique<Linear>("head", 2 * cfg_.gru_hidden, cfg_.num_events, rng);
  if (cfg_.pooling == PoolKind::Attention)
    attention_head_ =
        std::make_unique<Linear>("attention_head", 2 * cfg_.gru_hidden, cfg_.num_events, rng);
  if (cfg_.pooling == PoolKind::Auto)
    auto_alpha_ = ad::variable(Tensor::full({cfg_.num_events}, 1.0), "pool.alpha");

  for (auto& bn : bns_) bn.collect(params_);
  for (const auto& conv : convs_) conv.collect(params_);
  gru_fwd_->collect(params_);
  gru_bwd_->collect(params_);
  head_->collect(params_);
  if (attention_head_) attention_head_->collect(params_);
  if (auto_alpha_) params_.push_back({auto_alpha_->name, auto_alpha_});
  for (auto& bn : bns_) bn.collect_buffers(buffers_);
}

BatchForward CdurModel::forward(const std::vector<const Tensor*>& clips, bool train, Rng& rng) {
  if (clips.empty()) throw std::invalid_argument("CdurModel::forward: empty batch");
  const std::size_t B = clips.size();
  std::size_t t_max = 0;
  for (const auto* c : clips) {
    if (c->rank() != 2 || c->dim(1) != cfg_.mel_bins)
      throw std::invalid_argument("CdurModel::forward: clip features must be [T, " +
                                  std::to_string(cfg_.mel_bins) + "]");
    if (c->dim(0) < cfg_.time_factor())
      throw std::invalid_argument("CdurModel::forward: clip shorter than subsample factor");
    t_max = std::max(t_max, c->dim(0));
  }

  // Zero-pad to the longest clip; padded frames are masked out of pooling.
  Tensor batch({B, 1, t_max, cfg_.mel_bins});
  BatchForward result;
  for (std::size_t b = 0; b < B; ++b) {
    std::copy(clips[b]->vec().begin(), clips[b]->vec().end(),
              batch.data() + b * t_max * cfg_.mel_bins);
    result.valid.push_back(subsampled_len(clips[b]->dim(0), cfg_.stages));
  }

  ad::Ptr x = ad::constant(std::move(batch), "features");
  const std::size_t stage_after[3] = {0, 2, 4};
  std::size_t stage_idx = 0;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = bns_[i].forward(x, train);
    x = convs_[i].forward(x);
    x = ad::leaky_relu(x, cfg_.leaky_slope);
    if (stage_idx < cfg_.stages.size() && i == stage_after[stage_idx]) {
      x = ad::lp_pool2d(x, cfg_.stages[stage_idx].first, cfg_.stages[stage_idx].second,
                        cfg_.subsample_p);
      ++stage_idx;
    }
  }
  x = ad::dropout(x, cfg_.dropout, rng, train);

  const std::size_t t_sub = x->value.dim(2);
  result.frames = t_sub;
  std::vector<ad::Ptr> steps(t_sub);
  for (std::size_t t = 0; t < t_sub; ++t) steps[t] = ad::time_slice(x, t);

  const auto fwd = gru_fwd_->forward(steps, /*reverse=*/false);
  const auto bwd = gru_bwd_->forward(steps, /*reverse=*/true);
  std::vector<ad::Ptr> joined(t_sub);
  for (std::size_t t = 0; t < t_sub; ++t) joined[t] = ad::concat_cols(fwd[t], bwd[t]);

  ad::Ptr stacked = ad::concat_rows(joined);  // [T'*B, 2H], time-major
  ad::Ptr frame_probs =
      ad::batchify_time(ad::sigmoid(head_->forward(stacked)), t_sub, B);  // [B*T', E]

  ad::Ptr attention;
  if (cfg_.pooling == PoolKind::Attention)
    attention = ad::batchify_time(ad::sigmoid(attention_head_->forward(stacked)), t_sub, B);

  result.frame_probs = frame_probs;
  result.clip_probs = ad::pool_clips(frame_probs, cfg_.pooling, B, t_sub, result.valid,
                                     auto_alpha_, attention);
  return result;
}

ProbabilitySet CdurModel::infer(const Tensor& features) {
  Rng dummy(0);
  BatchForward fw = forward({&features}, /*train=*/false, dummy);
  const std::size_t E = cfg_.num_events;
  const std::size_t t_valid = fw.valid[0];

  ProbabilitySet out;
  out.frame_probs = Tensor({t_valid, E});
  std::copy(fw.frame_probs->value.vec().begin(),
            fw.frame_probs->value.vec().begin() + t_valid * E, out.frame_probs.data());
  out.clip_probs = Tensor({E});
  std::copy(fw.clip_probs->value.vec().begin(), fw.clip_probs->value.vec().end(),
            out.clip_probs.data());
  out.upsampled = linear_upsample(out.frame_probs, cfg_.time_factor());
  return out;
}

std::size_t count_parameters(const CdurConfig& cfg, std::map<std::string, std::size_t>* breakdown) {
  cfg.validate();
  Rng rng(0);
  CdurModel model(cfg, rng);
  std::size_t total = 0;
  for (const auto& p : model.params()) {
    total += p.node->value.size();
    if (breakdown) (*breakdown)[p.name] = p.node->value.size();
  }
  return total;
}

}  // namespace cdur
