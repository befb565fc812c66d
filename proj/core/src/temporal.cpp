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

#include "cdur/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdur {

PoolKind pool_kind_from_string(const std::string& name) {
  if (name == "linsoft") return PoolKind::LinSoft;
  if (name == "max") return PoolKind::Max;
  if (name == "soft") return PoolKind::Soft;
  if (name == "auto") return PoolKind::Auto;
  if (name == "attention") return PoolKind::Attention;
  throw std::invalid_argument("unknown pooling method: " + name);
}

std::string to_string(PoolKind kind) {
  switch (kind) {
    case PoolKind::LinSoft: return "linsoft";
    case PoolKind::Max: return "max";
    case PoolKind::Soft: return "soft";
    case PoolKind::Auto: return "auto";
    case PoolKind::Attention: return "attention";
  }
  return "?";
}

namespace {

struct Window {
  std::size_t t0, t1, f0, f1;  // half-open
  std::size_t count() const { return (t1 - t0) * (f1 - f0); }
};

template <typename Fn>
void for_each_window(std::size_t T, std::size_t D, std::size_t kt, std::size_t kf, Fn&& fn) {
  const std::size_t out_t = (T + kt - 1) / kt;
  const std::size_t out_f = (D + kf - 1) / kf;
  for (std::size_t bt = 0; bt < out_t; ++bt)
    for (std::size_t bf = 0; bf < out_f; ++bf)
      fn(bt, bf, Window{bt * kt, std::min((bt + 1) * kt, T), bf * kf, std::min((bf + 1) * kf, D)});
}

void check_lp_args(const Tensor& x, std::size_t kt, std::size_t kf, double p) {
  if (x.rank() != 2) throw std::invalid_argument("lp_subsample: expected rank-2 tensor");
  if (kt == 0 || kf == 0) throw std::invalid_argument("lp_subsample: zero kernel");
  if (p < 1.0) throw std::invalid_argument("lp_subsample: p must be >= 1");
}

}  // namespace

Tensor lp_subsample(const Tensor& x, std::size_t kt, std::size_t kf, double p) {
  check_lp_args(x, kt, kf, p);
  const std::size_t T = x.dim(0), D = x.dim(1);
  Tensor out({(T + kt - 1) / kt, (D + kf - 1) / kf});
  for_each_window(T, D, kt, kf, [&](std::size_t bt, std::size_t bf, Window w) {
    double lo = 0.0;
    for (std::size_t t = w.t0; t < w.t1; ++t)
      for (std::size_t f = w.f0; f < w.f1; ++f) lo = std::min(lo, x.at(t, f));
    double acc = 0.0;
    for (std::size_t t = w.t0; t < w.t1; ++t)
      for (std::size_t f = w.f0; f < w.f1; ++f) acc += std::pow(x.at(t, f) - lo, p);
    const double mean_pow = acc / static_cast<double>(w.count());
    out.at(bt, bf) = std::pow(mean_pow, 1.0 / p) + lo;
  });
  return out;
}

Tensor lp_subsample_backward(const Tensor& x, std::size_t kt, std::size_t kf, double p,
                             const Tensor& grad_out) {
  check_lp_args(x, kt, kf, p);
  const std::size_t T = x.dim(0), D = x.dim(1);
  Tensor grad_in(x.shape());
  for_each_window(T, D, kt, kf, [&](std::size_t bt, std::size_t bf, Window w) {
    const double g = grad_out.at(bt, bf);
    if (g == 0.0) return;
    const std::size_t n = w.count();
    double lo = 0.0;
    std::size_t argmin_t = w.t0, argmin_f = w.f0;
    for (std::size_t t = w.t0; t < w.t1; ++t)
      for (std::size_t f = w.f0; f < w.f1; ++f)
        if (x.at(t, f) < lo) {
          lo = x.at(t, f);
          argmin_t = t;
          argmin_f = f;
        }
    double acc = 0.0;
    for (std::size_t t = w.t0; t < w.t1; ++t)
      for (std::size_t f = w.f0; f < w.f1; ++f) acc += std::pow(x.at(t, f) - lo, p);
    const double m = std::pow(acc / static_cast<double>(n), 1.0 / p);

    // d out / d u_i for the shifted window u = x - lo.
    double gsum = 0.0;
    for (std::size_t t = w.t0; t < w.t1; ++t)
      for (std::size_t f = w.f0; f < w.f1; ++f) {
        double gi;
        if (m > 0.0)
          gi = std::pow(x.at(t, f) - lo, p - 1.0) * std::pow(m, 1.0 - p) / static_cast<double>(n);
        else
          gi = p == 1.0 ? 1.0 / static_cast<double>(n) : 0.0;
        grad_in.at(t, f) += g * gi;
        gsum += gi;
      }
    // The shift itself depends on the window minimum when negative.
    if (lo < 0.0) grad_in.at(argmin_t, argmin_f) += g * (1.0 - gsum);
  });
  return grad_in;
}

Tensor linear_upsample(const Tensor& seq, std::size_t factor) {
  if (seq.rank() != 2) throw std::invalid_argument("linear_upsample: expected rank-2 tensor");
  if (factor == 0) throw std::invalid_argument("linear_upsample: zero factor");
  const std::size_t T = seq.dim(0), E = seq.dim(1);
  if (T == 0) throw std::invalid_argument("linear_upsample: empty sequence");
  if (factor == 1) return seq;

  Tensor out({T * factor, E});
  for (std::size_t i = 0; i < T * factor; ++i) {
    const double pos = static_cast<double>(i) / static_cast<double>(factor);
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), T - 1);
    const std::size_t hi = std::min(lo + 1, T - 1);
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t e = 0; e < E; ++e)
      out.at(i, e) = (1.0 - frac) * seq.at(lo, e) + frac * seq.at(hi, e);
  }
  return out;
}

namespace {

std::size_t effective_frames(const Tensor& probs, std::optional<std::size_t> valid) {
  const std::size_t T = probs.dim(0);
  std::size_t n = valid.value_or(T);
  if (n == 0 || n > T) throw std::invalid_argument("temporal_pool: bad valid_frames");
  return n;
}

void check_pool_params(const Tensor& probs, PoolKind kind, const PoolParams& params) {
  if (probs.rank() != 2) throw std::invalid_argument("temporal_pool: expected [T, E]");
  const std::size_t E = probs.dim(1);
  if (kind == PoolKind::Auto) {
    if (!params.alpha || params.alpha->size() != E)
      throw std::invalid_argument("temporal_pool: Auto needs alpha[E]");
  }
  if (kind == PoolKind::Attention) {
    if (!params.attention || !params.attention->same_shape(probs))
      throw std::invalid_argument("temporal_pool: Attention needs weights[T, E]");
  }
}

// Stable softmax weights over the first n frames of column e.
std::vector<double> softmax_weights(const Tensor& probs, std::size_t e, std::size_t n,
                                    double alpha) {
  double mx = -1e300;
  for (std::size_t t = 0; t < n; ++t) mx = std::max(mx, alpha * probs.at(t, e));
  std::vector<double> w(n);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    w[t] = std::exp(alpha * probs.at(t, e) - mx);
    sum += w[t];
  }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace

Tensor temporal_pool(const Tensor& frame_probs, PoolKind kind, const PoolParams& params,
                     std::optional<std::size_t> valid_frames) {
  check_pool_params(frame_probs, kind, params);
  const std::size_t n = effective_frames(frame_probs, valid_frames);
  const std::size_t E = frame_probs.dim(1);
  Tensor out({E});
  for (std::size_t e = 0; e < E; ++e) {
    switch (kind) {
      case PoolKind::LinSoft: {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const double a = frame_probs.at(t, e);
          s1 += a;
          s2 += a * a;
        }
        out[e] = s1 > 0.0 ? s2 / s1 : 0.0;
        break;
      }
      case PoolKind::Max: {
        double m = frame_probs.at(0, e);
        for (std::size_t t = 1; t < n; ++t) m = std::max(m, frame_probs.at(t, e));
        out[e] = m;
        break;
      }
      case PoolKind::Soft:
      case PoolKind::Auto: {
        const double alpha = kind == PoolKind::Soft ? 1.0 : (*params.alpha)[e];
        const auto w = softmax_weights(frame_probs, e, n, alpha);
        double y = 0.0;
        for (std::size_t t = 0; t < n; ++t) y += w[t] * frame_probs.at(t, e);
        out[e] = y;
        break;
      }
      case PoolKind::Attention: {
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          num += params.attention->at(t, e) * frame_probs.at(t, e);
          den += params.attention->at(t, e);
        }
        out[e] = den > 0.0 ? num / den : 0.0;
        break;
      }
    }
  }
  return out;
}

PoolGradients temporal_pool_backward(const Tensor& frame_probs, PoolKind kind,
                                     const PoolParams& params, const Tensor& grad_out,
                                     std::optional<std::size_t> valid_frames) {
  check_pool_params(frame_probs, kind, params);
  const std::size_t n = effective_frames(frame_probs, valid_frames);
  const std::size_t E = frame_probs.dim(1);
  if (grad_out.size() != E) throw std::invalid_argument("temporal_pool_backward: grad shape");

  PoolGradients g;
  g.d_frames = Tensor(frame_probs.shape());
  if (kind == PoolKind::Auto) g.d_alpha = Tensor({E});
  if (kind == PoolKind::Attention) g.d_attention = Tensor(frame_probs.shape());

  for (std::size_t e = 0; e < E; ++e) {
    const double go = grad_out[e];
    switch (kind) {
      case PoolKind::LinSoft: {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const double a = frame_probs.at(t, e);
          s1 += a;
          s2 += a * a;
        }
        if (s1 <= 0.0) break;
        const double y = s2 / s1;
        for (std::size_t t = 0; t < n; ++t)
          g.d_frames.at(t, e) = go * (2.0 * frame_probs.at(t, e) - y) / s1;
        break;
      }
      case PoolKind::Max: {
        std::size_t arg = 0;
        for (std::size_t t = 1; t < n; ++t)
          if (frame_probs.at(t, e) > frame_probs.at(arg, e)) arg = t;
        g.d_frames.at(arg, e) = go;
        break;
      }
      case PoolKind::Soft:
      case PoolKind::Auto: {
        const double alpha = kind == PoolKind::Soft ? 1.0 : (*params.alpha)[e];
        const auto w = softmax_weights(frame_probs, e, n, alpha);
        double y = 0.0, ex2 = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          y += w[t] * frame_probs.at(t, e);
          ex2 += w[t] * frame_probs.at(t, e) * frame_probs.at(t, e);
        }
        for (std::size_t t = 0; t < n; ++t)
          g.d_frames.at(t, e) = go * w[t] * (1.0 + alpha * (frame_probs.at(t, e) - y));
        if (kind == PoolKind::Auto) g.d_alpha[e] = go * (ex2 - y * y);
        break;
      }
      case PoolKind::Attention: {
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          num += params.attention->at(t, e) * frame_probs.at(t, e);
          den += params.attention->at(t, e);
        }
        if (den <= 0.0) break;
        const double y = num / den;
        for (std::size_t t = 0; t < n; ++t) {
          g.d_frames.at(t, e) = go * params.attention->at(t, e) / den;
          g.d_attention.at(t, e) = go * (frame_probs.at(t, e) - y) / den;
        }
        break;
      }
    }
  }
  return g;
}

}  // namespace cdur
