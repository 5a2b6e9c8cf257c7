#pragma once

#include "duallag/csr.hpp"
#include "duallag/rng.hpp"
#include "duallag/tensor.hpp"

#include <cstdint>
#include <vector>

namespace duallag {

// Differentiable tensor operations. Every op validates shapes, computes the
// forward value, and (when gradients are enabled and an input requires them)
// records its backward closure on the tape.

/// a (m x k) times b (k x n).
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// Sparse-dense product s * x. The sparse operator is a constant; the
/// backward pass propagates s^T * g into x. The reference overload requires
/// s to outlive the tape; the shared_ptr overload keeps the operator alive
/// itself.
Tensor spmm(Tape& tape, std::shared_ptr<const CsrMatrix> s, const Tensor& x);
Tensor spmm(Tape& tape, const CsrMatrix& s, const Tensor& x);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);

/// Elementwise a * x + b with constant a, b.
Tensor affine(Tape& tape, const Tensor& x, double a, double b);

/// s * x where s is a 1x1 tensor (gradients flow into both).
Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s);

/// Broadcast-add a 1 x cols bias row to every row of x.
Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias);

Tensor relu(Tape& tape, const Tensor& x);

/// Inverted dropout: in training mode zeroes entries with probability p and
/// scales survivors by 1/(1-p), drawing the mask from `rng`; in eval mode
/// returns the input unchanged. Requires 0 <= p < 1.
Tensor dropout(Tape& tape, const Tensor& x, double p, bool training, RngStream* rng);

/// Per-row standardization (x - mean) / sqrt(var + eps) with 1/cols variance
/// normalization and no learnable affine.
Tensor layer_norm(Tape& tape, const Tensor& x, double eps = 1e-5);

/// Column-wise concatenation in argument order; all parts share a row count.
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);

/// Elementwise ln(1 + e^x), overflow-safe; gradient sigma(x).
Tensor softplus(Tape& tape, const Tensor& x);

/// Row-wise log-softmax, max-subtracted for stability.
Tensor log_softmax(Tape& tape, const Tensor& logits);

/// Negative log-likelihood of `labels` under row-wise log-probabilities,
/// averaged over the rows listed in `mask`. Throws on an empty mask.
Tensor nll_masked(Tape& tape, const Tensor& log_probs,
                  const std::vector<std::uint32_t>& labels,
                  const std::vector<std::uint32_t>& mask);

/// log_softmax followed by masked NLL.
Tensor log_softmax_nll(Tape& tape, const Tensor& logits,
                       const std::vector<std::uint32_t>& labels,
                       const std::vector<std::uint32_t>& mask);

/// Sum of all entries, 1x1.
Tensor sum(Tape& tape, const Tensor& x);

/// Sum of squared entries, 1x1.
Tensor sum_squares(Tape& tape, const Tensor& x);

}  // namespace duallag
