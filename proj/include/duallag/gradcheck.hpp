#pragma once

#include "duallag/tensor.hpp"

#include <functional>
#include <span>

namespace duallag {

/// Central finite-difference check. `build_loss` must deterministically
/// rebuild the scalar loss on a fresh tape from the current parameter
/// values (dropout disabled, or its mask frozen by reseeding). Compares
/// (f(p+h) - f(p-h)) / 2h against the analytic gradients per coordinate and
/// returns the maximum relative error, with denominator
/// max(|analytic|, |numeric|, 1e-8). Throws on a non-finite loss.
double grad_check(const std::function<Tensor(Tape&)>& build_loss,
                  std::span<const Tensor> params, double h = 1e-5);

}  // namespace duallag
