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

#include "cdur/autodiff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace cdur::ad {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<EMat>;
using CMapMat = Eigen::Map<const EMat>;

Ptr make_node(Tensor value, std::vector<Ptr> inputs, std::function<void(Node&)> backward_fn,
              std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->inputs = std::move(inputs);
  n->name = std::move(name);
  n->requires_grad = false;
  for (const auto& in : n->inputs)
    if (in->requires_grad) n->requires_grad = true;
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

void ensure_grad(Node& n) {
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
}

void check_same_shape(const Ptr& a, const Ptr& b, const char* op) {
  if (!a->value.same_shape(b->value))
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Ptr variable(Tensor value, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->name = std::move(name);
  return n;
}

Ptr constant(Tensor value, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = false;
  n->name = std::move(name);
  return n;
}

void backward(const Ptr& loss) {
  if (loss->value.size() != 1) throw std::invalid_argument("backward: loss must be scalar");

  // Iterative DFS to get a topological order (children before parents).
  std::vector<Ptr> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Ptr, std::size_t>> stack{{loss, 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->inputs.size()) {
      Ptr child = node->inputs[idx++];
      if (seen.insert(child.get()).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (const auto& n : order) {
    ensure_grad(*n);
    n->grad.fill(0.0);
  }
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->requires_grad && (*it)->backward_fn) (*it)->backward_fn(**it);
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

Ptr add(const Ptr& a, const Ptr& b) {
  check_same_shape(a, b, "add");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_node(std::move(out), {a, b},
                   [](Node& n) {
                     auto &ga = n.inputs[0]->grad, &gb = n.inputs[1]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i) {
                       ga[i] += n.grad[i];
                       gb[i] += n.grad[i];
                     }
                   },
                   "add");
}

Ptr sub(const Ptr& a, const Ptr& b) {
  check_same_shape(a, b, "sub");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  return make_node(std::move(out), {a, b},
                   [](Node& n) {
                     auto &ga = n.inputs[0]->grad, &gb = n.inputs[1]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i) {
                       ga[i] += n.grad[i];
                       gb[i] -= n.grad[i];
                     }
                   },
                   "sub");
}

Ptr mul(const Ptr& a, const Ptr& b) {
  check_same_shape(a, b, "mul");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return make_node(std::move(out), {a, b},
                   [](Node& n) {
                     const auto &va = n.inputs[0]->value, &vb = n.inputs[1]->value;
                     auto &ga = n.inputs[0]->grad, &gb = n.inputs[1]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i) {
                       ga[i] += n.grad[i] * vb[i];
                       gb[i] += n.grad[i] * va[i];
                     }
                   },
                   "mul");
}

Ptr scale(const Ptr& a, double c) {
  Tensor out = a->value;
  for (auto& v : out.vec()) v *= c;
  return make_node(std::move(out), {a},
                   [c](Node& n) {
                     auto& ga = n.inputs[0]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += c * n.grad[i];
                   },
                   "scale");
}

Ptr sigmoid(const Ptr& a) {
  Tensor out = a->value;
  for (auto& v : out.vec()) v = 1.0 / (1.0 + std::exp(-v));
  Tensor saved = out;
  return make_node(std::move(out), {a},
                   [saved](Node& n) {
                     auto& ga = n.inputs[0]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i)
                       ga[i] += n.grad[i] * saved[i] * (1.0 - saved[i]);
                   },
                   "sigmoid");
}

Ptr tanh_op(const Ptr& a) {
  Tensor out = a->value;
  for (auto& v : out.vec()) v = std::tanh(v);
  Tensor saved = out;
  return make_node(std::move(out), {a},
                   [saved](Node& n) {
                     auto& ga = n.inputs[0]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i)
                       ga[i] += n.grad[i] * (1.0 - saved[i] * saved[i]);
                   },
                   "tanh");
}

Ptr leaky_relu(const Ptr& a, double slope) {
  Tensor out = a->value;
  for (auto& v : out.vec())
    if (v < 0) v *= slope;
  return make_node(std::move(out), {a},
                   [slope](Node& n) {
                     const auto& va = n.inputs[0]->value;
                     auto& ga = n.inputs[0]->grad;
                     for (std::size_t i = 0; i < n.grad.size(); ++i)
                       ga[i] += n.grad[i] * (va[i] < 0 ? slope : 1.0);
                   },
                   "leaky_relu");
}

Ptr sum(const Ptr& a) {
  double acc = 0.0;
  for (double v : a->value.vec()) acc += v;
  return make_node(Tensor::scalar(acc), {a},
                   [](Node& n) {
                     auto& ga = n.inputs[0]->grad;
                     for (auto& g : ga.vec()) g += n.grad[0];
                   },
                   "sum");
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

Ptr matmul(const Ptr& a, const Ptr& b) {
  if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.dim(1) != b->value.dim(0))
    throw std::invalid_argument("matmul: incompatible shapes");
  const std::size_t m = a->value.dim(0), k = a->value.dim(1), n = b->value.dim(1);
  Tensor out({m, n});
  MapMat(out.data(), m, n) = CMapMat(a->value.data(), m, k) * CMapMat(b->value.data(), k, n);
  return make_node(std::move(out), {a, b},
                   [m, k, n](Node& node) {
                     CMapMat go(node.grad.data(), m, n);
                     CMapMat va(node.inputs[0]->value.data(), m, k);
                     CMapMat vb(node.inputs[1]->value.data(), k, n);
                     MapMat(node.inputs[0]->grad.data(), m, k).noalias() += go * vb.transpose();
                     MapMat(node.inputs[1]->grad.data(), k, n).noalias() += va.transpose() * go;
                   },
                   "matmul");
}

Ptr add_rowvec(const Ptr& x, const Ptr& bias) {
  if (x->value.rank() != 2 || bias->value.size() != x->value.dim(1))
    throw std::invalid_argument("add_rowvec: shape mismatch");
  const std::size_t m = x->value.dim(0), n = x->value.dim(1);
  Tensor out = x->value;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) += bias->value[c];
  return make_node(std::move(out), {x, bias},
                   [m, n](Node& node) {
                     auto& gx = node.inputs[0]->grad;
                     auto& gb = node.inputs[1]->grad;
                     for (std::size_t r = 0; r < m; ++r)
                       for (std::size_t c = 0; c < n; ++c) {
                         gx[r * n + c] += node.grad[r * n + c];
                         gb[c] += node.grad[r * n + c];
                       }
                   },
                   "add_rowvec");
}

Ptr col_slice(const Ptr& x, std::size_t c0, std::size_t c1) {
  if (x->value.rank() != 2 || c1 > x->value.dim(1) || c0 >= c1)
    throw std::invalid_argument("col_slice: bad range");
  const std::size_t m = x->value.dim(0), n = x->value.dim(1), w = c1 - c0;
  Tensor out({m, w});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < w; ++c) out.at(r, c) = x->value.at(r, c0 + c);
  return make_node(std::move(out), {x},
                   [m, n, w, c0](Node& node) {
                     auto& gx = node.inputs[0]->grad;
                     for (std::size_t r = 0; r < m; ++r)
                       for (std::size_t c = 0; c < w; ++c)
                         gx[r * n + c0 + c] += node.grad[r * w + c];
                   },
                   "col_slice");
}

Ptr concat_rows(const std::vector<Ptr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  const std::size_t n = parts[0]->value.dim(1);
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p->value.rank() != 2 || p->value.dim(1) != n)
      throw std::invalid_argument("concat_rows: column mismatch");
    rows += p->value.dim(0);
  }
  Tensor out({rows, n});
  std::size_t r = 0;
  for (const auto& p : parts) {
    std::copy(p->value.vec().begin(), p->value.vec().end(), out.data() + r * n);
    r += p->value.dim(0);
  }
  return make_node(std::move(out), parts,
                   [n](Node& node) {
                     std::size_t off = 0;
                     for (auto& in : node.inputs) {
                       auto& gi = in->grad;
                       for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += node.grad[off + i];
                       off += gi.size();
                     }
                     (void)n;
                   },
                   "concat_rows");
}

Ptr concat_cols(const Ptr& a, const Ptr& b) {
  if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.dim(0) != b->value.dim(0))
    throw std::invalid_argument("concat_cols: row mismatch");
  const std::size_t m = a->value.dim(0), n1 = a->value.dim(1), n2 = b->value.dim(1);
  Tensor out({m, n1 + n2});
  for (std::size_t r = 0; r < m; ++r) {
    std::copy(a->value.data() + r * n1, a->value.data() + (r + 1) * n1,
              out.data() + r * (n1 + n2));
    std::copy(b->value.data() + r * n2, b->value.data() + (r + 1) * n2,
              out.data() + r * (n1 + n2) + n1);
  }
  return make_node(std::move(out), {a, b},
                   [m, n1, n2](Node& node) {
                     auto &ga = node.inputs[0]->grad, &gb = node.inputs[1]->grad;
                     for (std::size_t r = 0; r < m; ++r) {
                       for (std::size_t c = 0; c < n1; ++c)
                         ga[r * n1 + c] += node.grad[r * (n1 + n2) + c];
                       for (std::size_t c = 0; c < n2; ++c)
                         gb[r * n2 + c] += node.grad[r * (n1 + n2) + n1 + c];
                     }
                   },
                   "concat_cols");
}

// ---------------------------------------------------------------------------
// conv / batchnorm / pooling / dropout
// ---------------------------------------------------------------------------

namespace {

// im2col for a 3x3 same-padding kernel: [C,H,W] plane -> [C*9, H*W].
void im2col_3x3(const double* x, std::size_t C, std::size_t H, std::size_t W, double* col) {
  const auto iH = static_cast<std::int64_t>(H), iW = static_cast<std::int64_t>(W);
  for (std::size_t c = 0; c < C; ++c)
    for (int dh = -1; dh <= 1; ++dh)
      for (int dw = -1; dw <= 1; ++dw) {
        double* row = col + ((c * 3 + (dh + 1)) * 3 + (dw + 1)) * H * W;
        for (std::int64_t h = 0; h < iH; ++h) {
          const std::int64_t sh = h + dh;
          for (std::int64_t w = 0; w < iW; ++w) {
            const std::int64_t sw = w + dw;
            row[h * iW + w] = (sh >= 0 && sh < iH && sw >= 0 && sw < iW)
                                  ? x[(c * H + sh) * W + sw]
                                  : 0.0;
          }
        }
      }
}

void col2im_3x3_add(const double* col, std::size_t C, std::size_t H, std::size_t W, double* gx) {
  const auto iH = static_cast<std::int64_t>(H), iW = static_cast<std::int64_t>(W);
  for (std::size_t c = 0; c < C; ++c)
    for (int dh = -1; dh <= 1; ++dh)
      for (int dw = -1; dw <= 1; ++dw) {
        const double* row = col + ((c * 3 + (dh + 1)) * 3 + (dw + 1)) * H * W;
        for (std::int64_t h = 0; h < iH; ++h) {
          const std::int64_t sh = h + dh;
          if (sh < 0 || sh >= iH) continue;
          for (std::int64_t w = 0; w < iW; ++w) {
            const std::int64_t sw = w + dw;
            if (sw >= 0 && sw < iW) gx[(c * H + sh) * W + sw] += row[h * iW + w];
          }
        }
      }
}

}  // namespace

Ptr conv2d_3x3(const Ptr& x, const Ptr& w, const Ptr& b) {
  if (x->value.rank() != 4) throw std::invalid_argument("conv2d: expected [B,C,H,W] input");
  if (w->value.rank() != 4 || w->value.dim(2) != 3 || w->value.dim(3) != 3 ||
      w->value.dim(1) != x->value.dim(1))
    throw std::invalid_argument("conv2d: weight must be [O,C,3,3] matching input channels");
  const std::size_t B = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2),
                    W = x->value.dim(3), O = w->value.dim(0);
  if (b->value.size() != O) throw std::invalid_argument("conv2d: bias length mismatch");

  Tensor out({B, O, H, W});
  Tensor col({C * 9, H * W});
  CMapMat wm(w->value.data(), O, C * 9);
  for (std::size_t bi = 0; bi < B; ++bi) {
    im2col_3x3(x->value.data() + bi * C * H * W, C, H, W, col.data());
    MapMat ym(out.data() + bi * O * H * W, O, H * W);
    ym.noalias() = wm * CMapMat(col.data(), C * 9, H * W);
    for (std::size_t o = 0; o < O; ++o) ym.row(o).array() += b->value[o];
  }
  return make_node(
      std::move(out), {x, w, b},
      [B, C, H, W, O](Node& node) {
        auto& xin = *node.inputs[0];
        auto& win = *node.inputs[1];
        auto& bin = *node.inputs[2];
        Tensor col({C * 9, H * W});
        Tensor gcol({C * 9, H * W});
        CMapMat wm(win.value.data(), O, C * 9);
        MapMat gw(win.grad.data(), O, C * 9);
        for (std::size_t bi = 0; bi < B; ++bi) {
          CMapMat go(node.grad.data() + bi * O * H * W, O, H * W);
          im2col_3x3(xin.value.data() + bi * C * H * W, C, H, W, col.data());
          gw.noalias() += go * CMapMat(col.data(), C * 9, H * W).transpose();
          for (std::size_t o = 0; o < O; ++o) bin.grad[o] += go.row(o).sum();
          MapMat(gcol.data(), C * 9, H * W).noalias() = wm.transpose() * go;
          col2im_3x3_add(gcol.data(), C, H, W, xin.grad.data() + bi * C * H * W);
        }
      },
      "conv2d");
}

Ptr batch_norm(const Ptr& x, const Ptr& gamma, const Ptr& beta, Tensor& running_mean,
               Tensor& running_var, bool train, double momentum, double eps) {
  if (x->value.rank() != 4) throw std::invalid_argument("batch_norm: expected [B,C,H,W]");
  const std::size_t B = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2),
                    W = x->value.dim(3);
  if (gamma->value.size() != C || beta->value.size() != C || running_mean.size() != C ||
      running_var.size() != C)
    throw std::invalid_argument("batch_norm: per-channel parameter length mismatch");

  const std::size_t plane = H * W, nper = B * plane;
  Tensor mean({C}), var({C});
  if (train) {
    for (std::size_t c = 0; c < C; ++c) {
      double m = 0.0;
      for (std::size_t bi = 0; bi < B; ++bi) {
        const double* p = x->value.data() + (bi * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) m += p[i];
      }
      m /= static_cast<double>(nper);
      double v = 0.0;
      for (std::size_t bi = 0; bi < B; ++bi) {
        const double* p = x->value.data() + (bi * C + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) v += (p[i] - m) * (p[i] - m);
      }
      v /= static_cast<double>(nper);
      mean[c] = m;
      var[c] = v;
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * m;
      // Unbiased variance in the running buffer, as eval-mode consumers expect.
      const double unbiased = nper > 1 ? v * nper / (nper - 1.0) : v;
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * unbiased;
    }
  } else {
    mean = running_mean;
    var = running_var;
  }

  Tensor xhat(x->value.shape());
  Tensor out(x->value.shape());
  Tensor inv_std({C});
  for (std::size_t c = 0; c < C; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  for (std::size_t bi = 0; bi < B; ++bi)
    for (std::size_t c = 0; c < C; ++c) {
      const double* p = x->value.data() + (bi * C + c) * plane;
      double* ph = xhat.data() + (bi * C + c) * plane;
      double* po = out.data() + (bi * C + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        ph[i] = (p[i] - mean[c]) * inv_std[c];
        po[i] = gamma->value[c] * ph[i] + beta->value[c];
      }
    }

  return make_node(
      std::move(out), {x, gamma, beta},
      [B, C, plane, nper, train, xhat, inv_std](Node& node) {
        auto& xin = *node.inputs[0];
        auto& gin = *node.inputs[1];
        auto& bin = *node.inputs[2];
        for (std::size_t c = 0; c < C; ++c) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::size_t bi = 0; bi < B; ++bi) {
            const double* gy = node.grad.data() + (bi * C + c) * plane;
            const double* xh = xhat.data() + (bi * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              sum_dy += gy[i];
              sum_dy_xhat += gy[i] * xh[i];
            }
          }
          gin.grad[c] += sum_dy_xhat;
          bin.grad[c] += sum_dy;
          const double g = gin.value[c] * inv_std[c];
          const double mean_dy = sum_dy / static_cast<double>(nper);
          const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(nper);
          for (std::size_t bi = 0; bi < B; ++bi) {
            const double* gy = node.grad.data() + (bi * C + c) * plane;
            const double* xh = xhat.data() + (bi * C + c) * plane;
            double* gx = xin.grad.data() + (bi * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              if (train)
                gx[i] += g * (gy[i] - mean_dy - xh[i] * mean_dy_xhat);
              else
                gx[i] += g * gy[i];
            }
          }
        }
      },
      "batch_norm");
}

Ptr lp_pool2d(const Ptr& x, std::size_t kt, std::size_t kf, double p) {
  if (x->value.rank() != 4) throw std::invalid_argument("lp_pool2d: expected [B,C,H,W]");
  const std::size_t B = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2),
                    W = x->value.dim(3);
  const std::size_t oh = (H + kt - 1) / kt, ow = (W + kf - 1) / kf;
  Tensor out({B, C, oh, ow});
  for (std::size_t bi = 0; bi < B; ++bi)
    for (std::size_t c = 0; c < C; ++c) {
      Tensor plane({H, W},
                   {x->value.vec().begin() + (bi * C + c) * H * W,
                    x->value.vec().begin() + (bi * C + c + 1) * H * W});
      Tensor pooled = lp_subsample(plane, kt, kf, p);
      std::copy(pooled.vec().begin(), pooled.vec().end(), out.data() + (bi * C + c) * oh * ow);
    }
  return make_node(std::move(out), {x},
                   [B, C, H, W, oh, ow, kt, kf, p](Node& node) {
                     auto& xin = *node.inputs[0];
                     for (std::size_t bi = 0; bi < B; ++bi)
                       for (std::size_t c = 0; c < C; ++c) {
                         Tensor plane({H, W},
                                      {xin.value.vec().begin() + (bi * C + c) * H * W,
                                       xin.value.vec().begin() + (bi * C + c + 1) * H * W});
                         Tensor go({oh, ow},
                                   {node.grad.vec().begin() + (bi * C + c) * oh * ow,
                                    node.grad.vec().begin() + (bi * C + c + 1) * oh * ow});
                         Tensor gx = lp_subsample_backward(plane, kt, kf, p, go);
                         double* dst = xin.grad.data() + (bi * C + c) * H * W;
                         for (std::size_t i = 0; i < gx.size(); ++i) dst[i] += gx[i];
                       }
                   },
                   "lp_pool2d");
}

Ptr dropout(const Ptr& x, double rate, Rng& rng, bool train) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate outside [0, 1)");
  if (!train || rate == 0.0) return x;
  Tensor mask(x->value.shape());
  const double keep = 1.0 - rate;
  for (auto& m : mask.vec()) m = rng.next_double() < rate ? 0.0 : 1.0 / keep;
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_node(std::move(out), {x},
                   [mask](Node& node) {
                     auto& gx = node.inputs[0]->grad;
                     for (std::size_t i = 0; i < gx.size(); ++i)
                       gx[i] += node.grad[i] * mask[i];
                   },
                   "dropout");
}

Ptr time_slice(const Ptr& x, std::size_t t) {
  if (x->value.rank() != 4 || x->value.dim(3) != 1)
    throw std::invalid_argument("time_slice: expected [B,C,T,1]");
  const std::size_t B = x->value.dim(0), C = x->value.dim(1), T = x->value.dim(2);
  if (t >= T) throw std::invalid_argument("time_slice: t out of range");
  Tensor out({B, C});
  for (std::size_t bi = 0; bi < B; ++bi)
    for (std::size_t c = 0; c < C; ++c) out.at(bi, c) = x->value[(bi * C + c) * T + t];
  return make_node(std::move(out), {x},
                   [B, C, T, t](Node& node) {
                     auto& gx = node.inputs[0]->grad;
                     for (std::size_t bi = 0; bi < B; ++bi)
                       for (std::size_t c = 0; c < C; ++c)
                         gx[(bi * C + c) * T + t] += node.grad[bi * C + c];
                   },
                   "time_slice");
}

Ptr batchify_time(const Ptr& x, std::size_t T, std::size_t B) {
  if (x->value.rank() != 2 || x->value.dim(0) != T * B)
    throw std::invalid_argument("batchify_time: expected [T*B, E]");
  const std::size_t E = x->value.dim(1);
  Tensor out({B * T, E});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t b = 0; b < B; ++b)
      std::copy(x->value.data() + (t * B + b) * E, x->value.data() + (t * B + b + 1) * E,
                out.data() + (b * T + t) * E);
  return make_node(std::move(out), {x},
                   [T, B, E](Node& node) {
                     auto& gx = node.inputs[0]->grad;
                     for (std::size_t t = 0; t < T; ++t)
                       for (std::size_t b = 0; b < B; ++b)
                         for (std::size_t e = 0; e < E; ++e)
                           gx[(t * B + b) * E + e] += node.grad[(b * T + t) * E + e];
                   },
                   "batchify_time");
}

Ptr pool_clips(const Ptr& x, PoolKind kind, std::size_t batch, std::size_t frames,
               const std::vector<std::size_t>& valid, const Ptr& alpha, const Ptr& attention) {
  if (x->value.rank() != 2 || x->value.dim(0) != batch * frames)
    throw std::invalid_argument("pool_clips: expected [B*T, E]");
  if (valid.size() != batch) throw std::invalid_argument("pool_clips: valid length mismatch");
  const std::size_t E = x->value.dim(1);

  std::vector<Ptr> inputs{x};
  if (kind == PoolKind::Auto) {
    if (!alpha) throw std::invalid_argument("pool_clips: Auto needs alpha");
    inputs.push_back(alpha);
  }
  if (kind == PoolKind::Attention) {
    if (!attention) throw std::invalid_argument("pool_clips: Attention needs weights");
    inputs.push_back(attention);
  }

  auto item = [frames, E](const Tensor& src, std::size_t bi) {
    Tensor t({frames, E});
    std::copy(src.vec().begin() + bi * frames * E, src.vec().begin() + (bi + 1) * frames * E,
              t.data());
    return t;
  };

  Tensor out({batch, E});
  for (std::size_t bi = 0; bi < batch; ++bi) {
    Tensor fp = item(x->value, bi);
    Tensor attn;
    PoolParams params;
    if (kind == PoolKind::Auto) params.alpha = &alpha->value;
    if (kind == PoolKind::Attention) {
      attn = item(attention->value, bi);
      params.attention = &attn;
    }
    Tensor pooled = temporal_pool(fp, kind, params, valid[bi]);
    std::copy(pooled.vec().begin(), pooled.vec().end(), out.data() + bi * E);
  }

  return make_node(
      std::move(out), inputs,
      [kind, batch, frames, E, valid, item](Node& node) {
        auto& xin = *node.inputs[0];
        Node* alpha_in = kind == PoolKind::Auto ? node.inputs[1].get() : nullptr;
        Node* attn_in = kind == PoolKind::Attention ? node.inputs[1].get() : nullptr;
        for (std::size_t bi = 0; bi < batch; ++bi) {
          Tensor fp = item(xin.value, bi);
          Tensor attn;
          PoolParams params;
          if (alpha_in) params.alpha = &alpha_in->value;
          if (attn_in) {
            attn = item(attn_in->value, bi);
            params.attention = &attn;
          }
          Tensor go({E});
          std::copy(node.grad.vec().begin() + bi * E, node.grad.vec().begin() + (bi + 1) * E,
                    go.data());
          PoolGradients g = temporal_pool_backward(fp, kind, params, go, valid[bi]);
          double* gx = xin.grad.data() + bi * frames * E;
          for (std::size_t i = 0; i < g.d_frames.size(); ++i) gx[i] += g.d_frames[i];
          if (alpha_in)
            for (std::size_t e = 0; e < E; ++e) alpha_in->grad[e] += g.d_alpha[e];
          if (attn_in) {
            double* ga = attn_in->grad.data() + bi * frames * E;
            for (std::size_t i = 0; i < g.d_attention.size(); ++i) ga[i] += g.d_attention[i];
          }
        }
      },
      "pool_clips");
}

Ptr bce_loss(const Ptr& pred, const Tensor& targets) {
  if (!pred->value.same_shape(targets))
    throw std::invalid_argument("bce_loss: prediction/target shape mismatch");
  if (pred->value.rank() != 2) throw std::invalid_argument("bce_loss: expected [B, E]");
  const std::size_t B = pred->value.dim(0), E = pred->value.dim(1);
  constexpr double kClamp = 1e-7;

  double loss = 0.0;
  for (std::size_t i = 0; i < pred->value.size(); ++i) {
    const double y = std::clamp(pred->value[i], kClamp, 1.0 - kClamp);
    const double t = targets[i];
    loss -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
  }
  loss /= static_cast<double>(B * E);

  return make_node(Tensor::scalar(loss), {pred},
                   [targets, B, E](Node& node) {
                     auto& pin = *node.inputs[0];
                     const double go = node.grad[0] / static_cast<double>(B * E);
                     for (std::size_t i = 0; i < pin.value.size(); ++i) {
                       const double raw = pin.value[i];
                       if (raw <= kClamp || raw >= 1.0 - kClamp) continue;  // clamped flat
                       const double t = targets[i];
                       pin.grad[i] += go * (-t / raw + (1.0 - t) / (1.0 - raw));
                     }
                   },
                   "bce_loss");
}

GradCheckResult gradient_check(const std::function<Ptr(const std::vector<Ptr>&)>& f,
                               std::vector<Ptr> leaves, double h) {
  Ptr loss = f(leaves);
  backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(leaves.size());
  for (const auto& leaf : leaves) analytic.push_back(leaf->grad);

  GradCheckResult result;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    auto& leaf = leaves[li];
    for (std::size_t i = 0; i < leaf->value.size(); ++i) {
      const double orig = leaf->value[i];
      leaf->value[i] = orig + h;
      const double up = f(leaves)->value[0];
      leaf->value[i] = orig - h;
      const double down = f(leaves)->value[0];
      leaf->value[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[li].size() > i ? analytic[li][i] : 0.0;
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_input =
            (leaf->name.empty() ? "leaf" + std::to_string(li) : leaf->name) + "[" +
            std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace cdur::ad
