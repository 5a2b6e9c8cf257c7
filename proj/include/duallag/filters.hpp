#pragma once

#include "duallag/csr.hpp"
#include "duallag/ops.hpp"
#include "duallag/tensor.hpp"

namespace duallag {

// Monic generalized-Laguerre recurrence over a sparse operator with a
// learnable shape parameter, plus the static Chebyshev baseline. The
// recurrence coefficients are
//     b_k = 2k + alpha + 1,   c_k = k (k + alpha),
// and the filter parameter is reparameterized alpha = -1 + softplus(theta)
// so alpha > -1 holds for every finite theta with d(alpha)/d(theta) > 0.

/// alpha = -1 + softplus(theta), plain-value version.
double alpha_of(double theta);

/// Inverse of alpha_of: the theta whose alpha is the given value. alpha = 0
/// (the standard Laguerre basis, used as the neutral init) maps to ln(e-1).
double theta_for_alpha(double alpha);

/// Tape version of the reparameterization; theta is a 1x1 tensor.
Tensor alpha_of(Tape& tape, const Tensor& theta);

/// Scalar monic recurrence P_0 = 1, P_1 = x - (alpha+1),
/// P_{k+1} = (x - b_k) P_k - c_k P_{k-1}. Equals (-1)^k k! L_k^{(alpha)}(x)
/// for the classical generalized Laguerre polynomial. Test oracle; no
/// normalization. Requires k >= 0 and alpha > -1.
double laguerre_poly_scalar(double x, double alpha, int k);

/// K stacked recurrence terms over a sparse operator:
///   T_0 = X,  T_{k+1} = L T^_k - b_k T^_k - c_k T^_{k-1},
/// where T^_k = layer_norm(T_k) when `normalize` is set (the default) and
/// T^_k = T_k otherwise. Returns concat(T^_0, ..., T^_{K-1}), shape
/// rows x (cols * K), differentiable in X and theta (gradients flow through
/// b_k and c_k). A non-finite intermediate is a hard error: it signals
/// stabilization failure.
Tensor laguerre_basis(Tape& tape, const CsrMatrix& op, const Tensor& x,
                      const Tensor& theta, int num_terms, bool normalize = true);

/// K stacked static Chebyshev terms T_0 = X, T_1 = L~ X,
/// T_{k+1} = 2 L~ T_k - T_{k-1} with L~ = L_sym - I (lambda_max = 2 exactly
/// for L_sym). No normalization, no learnable parameter.
Tensor cheby_basis(Tape& tape, const CsrMatrix& l_sym, const Tensor& x,
                   int num_terms);

/// Largest |entry| within term block k of a stacked basis whose per-term
/// width is `term_cols`. Convenience for the stabilization checks.
double term_block_max_abs(const Tensor& stacked, std::size_t term_cols,
                          std::size_t k);

}  // namespace duallag
