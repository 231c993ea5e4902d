// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Differentiable primitives. Every function appends one node to the tape of
// its first operand; all operands must live on the same tape.

#pragma once

#include <cstddef>
#include <vector>

#include "catequiv/autodiff.hpp"
#include "catequiv/rng.hpp"

namespace catequiv::core::ops {

enum class Padding { kCircular, kZero };

struct Conv1dOptions {
  std::size_t groups = 1;
  std::size_t dilation = 1;
  Padding padding = Padding::kCircular;
};

/// "Same"-length 1-D correlation over time.
///
///   y[o, t] = sum_{i in group(o)} sum_k w[o, i, k] * x[i, t + (k - (K-1)/2) * d]
///
/// With circular padding the time index is taken mod T, so the map commutes
/// with cyclic shifts exactly (each output is accumulated in the same order
/// for every t). With zero padding out-of-range samples read as 0.
///
/// x: [C_in x T], w: [C_out x (C_in / groups) x K]; K odd; d * (K - 1) < T.
Var conv1d(Var x, Var w, const Conv1dOptions& options = {});

/// Reference O(C * T * K) evaluation of conv1d by explicit modular indexing.
/// Kept for tests and debugging; not tape-recorded.
Tensor conv1d_reference(const Tensor& x, const Tensor& w,
                        const Conv1dOptions& options = {});

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var a);
Var sum(Var a);

Var reshape(Var a, Shape shape);
/// Repeats `a` `copies` times along axis 0. Gradients of the copies are
/// summed back into the single source, which is how weight tying is realised.
Var tile(Var a, std::size_t copies);
/// Rows [begin, end) of a rank-2 tensor.
Var slice_rows(Var a, std::size_t begin, std::size_t end);
/// Concatenation along axis 0; trailing extents must agree.
Var concat(const std::vector<Var>& parts);

/// y[c, t] = x[c, t] + b[c].
Var add_channel_bias(Var x, Var b);

/// Euclidean norm over `axis`, which is removed from the shape. The
/// gradient at a zero-norm fibre is taken to be zero.
Var l2_norm(Var x, std::size_t axis);
/// Arithmetic mean over `axis`, which is removed from the shape.
Var mean(Var x, std::size_t axis);
/// Global average pooling over time (the last axis).
Var gap_time(Var x);

/// W [K x D] * z [D] + b [K].
Var affine(Var weight, Var z, Var bias);

/// Inverted dropout: in train mode each entry is kept with probability
/// 1 - p and rescaled by 1 / (1 - p); in eval mode the identity.
Var dropout(Var x, double p, bool train, Rng* rng);

/// Per-sample GroupNorm on [C x T]: statistics over (channels of the group x
/// time), then per-channel affine gamma, beta.
Var group_norm(Var x, std::size_t groups, Var gamma, Var beta,
               double eps = 1e-5);

/// weight * (logsumexp(logits) - logits[label]) as a 1-element tensor.
Var weighted_cross_entropy(Var logits, std::size_t label, double weight);

/// Cyclic shift along time: out[c, t] = x[c, (t - tau) mod T].
Tensor shift_time(const Tensor& x, long tau);

}  // namespace catequiv::core::ops
