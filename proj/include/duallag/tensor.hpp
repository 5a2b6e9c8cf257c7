#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace duallag {

/// Shared storage behind a Tensor handle. `grad` is sized rows*cols exactly
/// when requires_grad is set.
struct TensorData {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
};

/// 2-D double tensor participating in reverse-mode differentiation. Copying
/// a Tensor copies the handle, not the buffer; ops return fresh buffers.
class Tensor {
public:
    Tensor() : d_(std::make_shared<TensorData>()) {}

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor full(std::size_t rows, std::size_t cols, double fill,
                       bool requires_grad = false);
    static Tensor from_values(std::size_t rows, std::size_t cols,
                              std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    std::size_t rows() const { return d_->rows; }
    std::size_t cols() const { return d_->cols; }
    std::size_t size() const { return d_->value.size(); }
    bool is_scalar() const { return d_->rows == 1 && d_->cols == 1; }

    double at(std::size_t r, std::size_t c) const { return d_->value[r * d_->cols + c]; }
    double& at(std::size_t r, std::size_t c) { return d_->value[r * d_->cols + c]; }

    std::span<double> values() { return d_->value; }
    std::span<const double> values() const { return d_->value; }

    /// Gradient buffer; empty span when requires_grad is off.
    std::span<double> grad() { return d_->grad; }
    std::span<const double> grad() const { return d_->grad; }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool on);
    void zero_grad();

    /// Value of a 1x1 tensor; throws otherwise.
    double item() const;

    bool all_finite() const;

    const std::shared_ptr<TensorData>& data() const { return d_; }

private:
    std::shared_ptr<TensorData> d_;
};

/// Records the backward closures of one forward computation. Backward
/// zeroes every registered gradient buffer, seeds d(loss)/d(loss) = 1 and
/// replays the closures in reverse recording order, so repeated backward
/// passes over the same tape produce identical gradients, and fan-out
/// accumulates naturally through +=.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool grad_enabled() const { return grad_enabled_; }
    void set_grad_enabled(bool on) { grad_enabled_ = on; }

    /// Registers a tensor whose grad participates in this tape.
    void touch(const Tensor& t);

    /// Appends one backward closure; closures run in reverse order.
    void record(std::function<void()> backward_fn);

    /// Reverse pass from a scalar loss recorded on this tape. Throws if the
    /// loss is not 1x1. A loss that requires no grad is a no-op.
    void backward(const Tensor& loss);

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    std::vector<std::function<void()>> nodes_;
    std::vector<std::shared_ptr<TensorData>> touched_;
    bool grad_enabled_ = true;
};

}  // namespace duallag
