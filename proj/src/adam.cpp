#include "duallag/adam.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace duallag {

Adam::Adam(std::vector<Tensor> params, const AdamConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        auto grad = p.grad();
        auto value = p.values();
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double g = grad[i];
            if (!std::isfinite(g)) {
                std::ostringstream msg;
                msg << "adam: non-finite gradient in parameter " << pi
                    << " element " << i << " at step " << t_;
                throw std::runtime_error(msg.str());
            }
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace duallag
