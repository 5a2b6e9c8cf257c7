#include "duallag/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace duallag {

double grad_check(const std::function<Tensor(Tape&)>& build_loss,
                  std::span<const Tensor> params, double h) {
    // Analytic pass.
    std::vector<std::vector<double>> analytic;
    {
        Tape tape;
        Tensor loss = build_loss(tape);
        if (!loss.all_finite()) throw std::runtime_error("grad_check: non-finite loss");
        tape.backward(loss);
        for (const Tensor& p : params) {
            analytic.emplace_back(p.grad().begin(), p.grad().end());
        }
    }

    auto eval = [&]() {
        Tape tape;
        tape.set_grad_enabled(false);
        const double v = build_loss(tape).item();
        if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
        return v;
    };

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi];
        auto values = p.values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double f_plus = eval();
            values[i] = saved - h;
            const double f_minus = eval();
            values[i] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double a = analytic[pi][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace duallag
