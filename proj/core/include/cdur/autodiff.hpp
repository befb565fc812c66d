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

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cdur/rng.hpp"
#include "cdur/temporal.hpp"
#include "cdur/tensor.hpp"

namespace cdur::ad {

struct Node;
using Ptr = std::shared_ptr<Node>;

/// One value in the computation graph. The graph is a DAG built by the op
/// functions below; backward() walks it in reverse topological order.
struct Node {
  Tensor value;
  Tensor grad;  // allocated by backward()
  bool requires_grad = false;
  std::vector<Ptr> inputs;
  // Reads this->grad, accumulates into inputs' grads.
  std::function<void(Node&)> backward_fn;
  std::string name;
};

/// Leaf with gradient tracking (parameters, checked inputs).
Ptr variable(Tensor value, std::string name = "");
/// Leaf without gradient tracking (data, targets).
Ptr constant(Tensor value, std::string name = "");

/// Reverse-mode accumulation from a scalar loss. Zeroes the grads of every
/// reachable node first, so one call per optimization step.
void backward(const Ptr& loss);

// -- elementwise and reductions --------------------------------------------
Ptr add(const Ptr& a, const Ptr& b);
Ptr sub(const Ptr& a, const Ptr& b);
Ptr mul(const Ptr& a, const Ptr& b);
Ptr scale(const Ptr& a, double c);
Ptr sigmoid(const Ptr& a);
Ptr tanh_op(const Ptr& a);
Ptr leaky_relu(const Ptr& a, double slope);
Ptr sum(const Ptr& a);

// -- linear algebra ---------------------------------------------------------
/// [m,k] x [k,n] -> [m,n]
Ptr matmul(const Ptr& a, const Ptr& b);
/// Adds a length-n row vector to every row of [m,n].
Ptr add_rowvec(const Ptr& x, const Ptr& bias);
/// Columns [c0, c1) of an [m,n] matrix.
Ptr col_slice(const Ptr& x, std::size_t c0, std::size_t c1);
/// Concatenates rows: k tensors of shape [r_i, n] -> [sum r_i, n].
Ptr concat_rows(const std::vector<Ptr>& parts);
/// Concatenates columns: [m, n1] + [m, n2] -> [m, n1+n2].
Ptr concat_cols(const Ptr& a, const Ptr& b);

// -- network-specific ops ---------------------------------------------------
/// 3x3 same-padding convolution. x: [B,C,H,W], w: [O,C,3,3], b: [O].
Ptr conv2d_3x3(const Ptr& x, const Ptr& w, const Ptr& b);

/// Batch normalization over (B,H,W) per channel of [B,C,H,W].
/// Train mode uses batch statistics and updates the running buffers;
/// eval mode reads the running buffers.
Ptr batch_norm(const Ptr& x, const Ptr& gamma, const Ptr& beta, Tensor& running_mean,
               Tensor& running_var, bool train, double momentum = 0.1, double eps = 1e-5);

/// Power-mean pooling over (kt, kf) kernels of each [H,W] plane of [B,C,H,W].
Ptr lp_pool2d(const Ptr& x, std::size_t kt, std::size_t kf, double p);

/// Inverted dropout; identity when train == false.
Ptr dropout(const Ptr& x, double rate, Rng& rng, bool train);

/// Time step t of [B,C,T,1] as a [B,C] matrix.
Ptr time_slice(const Ptr& x, std::size_t t);

/// Reorders a time-major stack of per-step rows [T*B, E] into batch-major
/// [B*T, E] (pure permutation).
Ptr batchify_time(const Ptr& x, std::size_t T, std::size_t B);

/// Clip-level pooling of frame probabilities. x: [B*T,E] (time-major per
/// batch item), valid[b] frames of item b take part in the sums.
/// alpha: [E] (Auto), attention: [B*T,E] (Attention); pass nullptr otherwise.
Ptr pool_clips(const Ptr& x, PoolKind kind, std::size_t batch, std::size_t frames,
               const std::vector<std::size_t>& valid, const Ptr& alpha = nullptr,
               const Ptr& attention = nullptr);

/// Mean-over-batch of the per-clip BCE against fixed targets [B,E].
/// Predictions are clamped to [1e-7, 1 - 1e-7] inside the loss.
Ptr bce_loss(const Ptr& pred, const Tensor& targets);

// -- verification -----------------------------------------------------------
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_input;
  bool ok(double tol) const { return max_rel_error <= tol; }
};

/// Compares analytic gradients against central finite differences
/// (h = 1e-6) for every element of every input. `f` rebuilds the graph from
/// the leaves on each call and returns a scalar.
GradCheckResult gradient_check(const std::function<Ptr(const std::vector<Ptr>&)>& f,
                               std::vector<Ptr> leaves, double h = 1e-6);

}  // namespace cdur::ad
