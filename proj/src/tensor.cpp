#include "duallag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace duallag {

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    Tensor t;
    t.d_->rows = rows;
    t.d_->cols = cols;
    t.d_->value.assign(rows * cols, 0.0);
    t.set_requires_grad(requires_grad);
    return t;
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double fill,
                    bool requires_grad) {
    Tensor t = zeros(rows, cols, requires_grad);
    std::fill(t.d_->value.begin(), t.d_->value.end(), fill);
    return t;
}

Tensor Tensor::from_values(std::size_t rows, std::size_t cols,
                           std::vector<double> values, bool requires_grad) {
    if (values.size() != rows * cols) {
        throw std::invalid_argument("tensor: value count does not match shape");
    }
    Tensor t;
    t.d_->rows = rows;
    t.d_->cols = cols;
    t.d_->value = std::move(values);
    t.set_requires_grad(requires_grad);
    return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from_values(1, 1, {v}, requires_grad);
}

void Tensor::set_requires_grad(bool on) {
    d_->requires_grad = on;
    if (on) {
        d_->grad.assign(d_->value.size(), 0.0);
    } else {
        d_->grad.clear();
    }
}

void Tensor::zero_grad() {
    std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
}

double Tensor::item() const {
    if (!is_scalar()) throw std::invalid_argument("tensor: item() on non-scalar");
    return d_->value[0];
}

bool Tensor::all_finite() const {
    for (double v : d_->value) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tape::touch(const Tensor& t) {
    if (t.requires_grad()) touched_.push_back(t.data());
}

void Tape::record(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
}

void Tape::backward(const Tensor& loss) {
    if (!loss.is_scalar()) {
        throw std::invalid_argument("backward: loss must be a 1x1 tensor");
    }
    if (!loss.requires_grad()) return;  // nothing depends on a parameter
    // Reset every participating gradient so repeated backward passes over
    // one tape are identical; fan-out accumulation then works through +=.
    for (auto& d : touched_) {
        std::fill(d->grad.begin(), d->grad.end(), 0.0);
    }
    loss.data()->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        (*it)();
    }
}

}  // namespace duallag
