#include "duallag/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace duallag {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs "
        << b.rows() << "x" << b.cols();
    throw std::invalid_argument(msg.str());
}

// Marks the output differentiable and registers grads iff gradients are
// flowing; returns whether the op must record a backward closure.
bool setup_grad(Tape& tape, Tensor& out, std::initializer_list<const Tensor*> inputs) {
    if (!tape.grad_enabled()) return false;
    bool any = false;
    for (const Tensor* in : inputs) {
        any = any || in->requires_grad();
    }
    if (!any) return false;
    out.set_requires_grad(true);
    for (const Tensor* in : inputs) tape.touch(*in);
    tape.touch(out);
    return true;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a, b);
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros(m, n);
    {
        const double* pa = a.values().data();
        const double* pb = b.values().data();
        double* po = out.values().data();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = pa[i * k + p];
                if (aip == 0.0) continue;
                const double* brow = pb + p * n;
                double* orow = po + i * n;
                for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
            }
        }
    }
    if (setup_grad(tape, out, {&a, &b})) {
        auto da = a.data(), db = b.data(), dout = out.data();
        tape.record([da, db, dout, m, k, n] {
            const double* g = dout->grad.data();
            if (da->requires_grad) {
                // dL/da = g * b^T
                double* ga = da->grad.data();
                const double* pb = db->value.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        const double* grow = g + i * n;
                        const double* brow = pb + p * n;
                        for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        ga[i * k + p] += acc;
                    }
                }
            }
            if (db->requires_grad) {
                // dL/db = a^T * g
                double* gb = db->grad.data();
                const double* pa = da->value.data();
                for (std::size_t p = 0; p < k; ++p) {
                    for (std::size_t i = 0; i < m; ++i) {
                        const double aip = pa[i * k + p];
                        if (aip == 0.0) continue;
                        const double* grow = g + i * n;
                        double* gbrow = gb + p * n;
                        for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

Tensor spmm(Tape& tape, std::shared_ptr<const CsrMatrix> s, const Tensor& x) {
    if (s->cols != x.rows()) {
        std::ostringstream msg;
        msg << "spmm: operator is " << s->rows << "x" << s->cols
            << " but input has " << x.rows() << " rows";
        throw std::invalid_argument(msg.str());
    }
    const std::size_t n = x.cols();
    Tensor out = Tensor::zeros(s->rows, n);
    {
        const double* px = x.values().data();
        double* po = out.values().data();
        for (std::size_t r = 0; r < s->rows; ++r) {
            double* orow = po + r * n;
            for (std::size_t e = s->row_ptr[r]; e < s->row_ptr[r + 1]; ++e) {
                const double w = s->values[e];
                const double* xrow = px + static_cast<std::size_t>(s->col_idx[e]) * n;
                for (std::size_t j = 0; j < n; ++j) orow[j] += w * xrow[j];
            }
        }
    }
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout, sp = std::move(s), n] {
            // dL/dx = s^T * g, computed by scattering each output row.
            double* gx = dx->grad.data();
            const double* g = dout->grad.data();
            for (std::size_t r = 0; r < sp->rows; ++r) {
                const double* grow = g + r * n;
                for (std::size_t e = sp->row_ptr[r]; e < sp->row_ptr[r + 1]; ++e) {
                    const double w = sp->values[e];
                    double* xrow = gx + static_cast<std::size_t>(sp->col_idx[e]) * n;
                    for (std::size_t j = 0; j < n; ++j) xrow[j] += w * grow[j];
                }
            }
        });
    }
    return out;
}

Tensor spmm(Tape& tape, const CsrMatrix& s, const Tensor& x) {
    // Non-owning alias: the caller guarantees s outlives the tape.
    return spmm(tape, std::shared_ptr<const CsrMatrix>(std::shared_ptr<void>(), &s), x);
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("add", a, b);
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = a.values()[i] + b.values()[i];
    }
    if (setup_grad(tape, out, {&a, &b})) {
        auto da = a.data(), db = b.data(), dout = out.data();
        tape.record([da, db, dout] {
            const auto& g = dout->grad;
            if (da->requires_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) da->grad[i] += g[i];
            }
            if (db->requires_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) db->grad[i] += g[i];
            }
        });
    }
    return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("sub", a, b);
    Tensor out = Tensor::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = a.values()[i] - b.values()[i];
    }
    if (setup_grad(tape, out, {&a, &b})) {
        auto da = a.data(), db = b.data(), dout = out.data();
        tape.record([da, db, dout] {
            const auto& g = dout->grad;
            if (da->requires_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) da->grad[i] += g[i];
            }
            if (db->requires_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) db->grad[i] -= g[i];
            }
        });
    }
    return out;
}

Tensor affine(Tape& tape, const Tensor& x, double a, double b) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = a * x.values()[i] + b;
    }
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout, a] {
            for (std::size_t i = 0; i < dout->grad.size(); ++i) {
                dx->grad[i] += a * dout->grad[i];
            }
        });
    }
    return out;
}

Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s) {
    if (!s.is_scalar()) throw std::invalid_argument("scale_by: scale must be 1x1");
    const double sv = s.item();
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = sv * x.values()[i];
    }
    if (setup_grad(tape, out, {&x, &s})) {
        auto dx = x.data(), ds = s.data(), dout = out.data();
        tape.record([dx, ds, dout] {
            const auto& g = dout->grad;
            if (dx->requires_grad) {
                const double sval = ds->value[0];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    dx->grad[i] += sval * g[i];
                }
            }
            if (ds->requires_grad) {
                double acc = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    acc += g[i] * dx->value[i];
                }
                ds->grad[0] += acc;
            }
        });
    }
    return out;
}

Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) shape_error("add_row_bias", x, bias);
    const std::size_t n = x.cols();
    Tensor out = Tensor::zeros(x.rows(), n);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            out.at(r, j) = x.at(r, j) + bias.values()[j];
        }
    }
    if (setup_grad(tape, out, {&x, &bias})) {
        auto dx = x.data(), db = bias.data(), dout = out.data();
        const std::size_t rows = x.rows();
        tape.record([dx, db, dout, rows, n] {
            const double* g = dout->grad.data();
            if (dx->requires_grad) {
                for (std::size_t i = 0; i < rows * n; ++i) dx->grad[i] += g[i];
            }
            if (db->requires_grad) {
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < n; ++j) {
                        db->grad[j] += g[r * n + j];
                    }
                }
            }
        });
    }
    return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = x.values()[i] > 0.0 ? x.values()[i] : 0.0;
    }
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout] {
            // Subgradient 0 at exactly 0.
            for (std::size_t i = 0; i < dout->grad.size(); ++i) {
                if (dx->value[i] > 0.0) dx->grad[i] += dout->grad[i];
            }
        });
    }
    return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double p, bool training, RngStream* rng) {
    if (p < 0.0 || p >= 1.0) {
        throw std::invalid_argument("dropout: p must be in [0,1)");
    }
    if (!training || p == 0.0) return x;  // identity, shares the input buffer
    if (!rng) throw std::invalid_argument("dropout: training mode needs an rng");

    const double scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<std::uint8_t>>(x.size());
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool keep = rng->uniform() >= p;
        (*mask)[i] = keep;
        out.values()[i] = keep ? x.values()[i] * scale : 0.0;
    }
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout, mask, scale] {
            for (std::size_t i = 0; i < dout->grad.size(); ++i) {
                if ((*mask)[i]) dx->grad[i] += scale * dout->grad[i];
            }
        });
    }
    return out;
}

Tensor layer_norm(Tape& tape, const Tensor& x, double eps) {
    if (x.cols() < 1) throw std::invalid_argument("layer_norm: need cols >= 1");
    const std::size_t rows = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros(rows, n);
    auto inv_std = std::make_shared<std::vector<double>>(rows);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x.values().data() + r * n;
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += xr[j];
        mean *= inv_n;
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = xr[j] - mean;
            var += d * d;
        }
        var *= inv_n;
        const double inv = 1.0 / std::sqrt(var + eps);
        (*inv_std)[r] = inv;
        double* yr = out.values().data() + r * n;
        for (std::size_t j = 0; j < n; ++j) yr[j] = (xr[j] - mean) * inv;
    }
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout, inv_std, rows, n, inv_n] {
            // dx = inv * (g - mean(g) - y * mean(g .* y)), means over cols.
            const double* g = dout->grad.data();
            const double* y = dout->value.data();
            double* gx = dx->grad.data();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = g + r * n;
                const double* yr = y + r * n;
                double g_mean = 0.0, gy_mean = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    g_mean += gr[j];
                    gy_mean += gr[j] * yr[j];
                }
                g_mean *= inv_n;
                gy_mean *= inv_n;
                const double inv = (*inv_std)[r];
                double* gxr = gx + r * n;
                for (std::size_t j = 0; j < n; ++j) {
                    gxr[j] += inv * (gr[j] - g_mean - yr[j] * gy_mean);
                }
            }
        });
    }
    return out;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    const std::size_t rows = parts[0].rows();
    std::size_t total = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) shape_error("concat_cols", parts[0], p);
        total += p.cols();
    }
    Tensor out = Tensor::zeros(rows, total);
    std::size_t offset = 0;
    for (const Tensor& p : parts) {
        for (std::size_t r = 0; r < rows; ++r) {
            const double* src = p.values().data() + r * p.cols();
            double* dst = out.values().data() + r * total + offset;
            std::copy(src, src + p.cols(), dst);
        }
        offset += p.cols();
    }
    bool any = false;
    for (const Tensor& p : parts) any = any || p.requires_grad();
    if (tape.grad_enabled() && any) {
        out.set_requires_grad(true);
        for (const Tensor& p : parts) tape.touch(p);
        tape.touch(out);
        std::vector<std::shared_ptr<TensorData>> dparts;
        dparts.reserve(parts.size());
        for (const Tensor& p : parts) dparts.push_back(p.data());
        auto dout = out.data();
        tape.record([dparts, dout, rows, total] {
            std::size_t off = 0;
            for (const auto& dp : dparts) {
                const std::size_t cols = dp->cols;
                if (dp->requires_grad) {
                    for (std::size_t r = 0; r < rows; ++r) {
                        const double* g = dout->grad.data() + r * total + off;
                        double* gp = dp->grad.data() + r * cols;
                        for (std::size_t j = 0; j < cols; ++j) gp[j] += g[j];
                    }
                }
                off += cols;
            }
        });
    }
    return out;
}

Tensor softplus(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.values()[i];
        // ln(1 + e^v) without overflow: v + ln(1 + e^-v) for positive v.
        out.values()[i] = v > 0.0 ? v + std::log1p(std::exp(-v))
                                  : std::log1p(std::exp(v));
    }
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout] {
            for (std::size_t i = 0; i < dout->grad.size(); ++i) {
                dx->grad[i] += sigmoid(dx->value[i]) * dout->grad[i];
            }
        });
    }
    return out;
}

Tensor log_softmax(Tape& tape, const Tensor& logits) {
    const std::size_t rows = logits.rows(), n = logits.cols();
    if (n < 1) throw std::invalid_argument("log_softmax: need cols >= 1");
    Tensor out = Tensor::zeros(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = logits.values().data() + r * n;
        double mx = xr[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += std::exp(xr[j] - mx);
        const double lse = mx + std::log(sum);
        double* yr = out.values().data() + r * n;
        for (std::size_t j = 0; j < n; ++j) yr[j] = xr[j] - lse;
    }
    if (setup_grad(tape, out, {&logits})) {
        auto dx = logits.data(), dout = out.data();
        tape.record([dx, dout, rows, n] {
            // dx = g - softmax(x) * rowsum(g); softmax = exp(y).
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = dout->grad.data() + r * n;
                const double* yr = dout->value.data() + r * n;
                double gsum = 0.0;
                for (std::size_t j = 0; j < n; ++j) gsum += gr[j];
                double* gxr = dx->grad.data() + r * n;
                for (std::size_t j = 0; j < n; ++j) {
                    gxr[j] += gr[j] - std::exp(yr[j]) * gsum;
                }
            }
        });
    }
    return out;
}

Tensor nll_masked(Tape& tape, const Tensor& log_probs,
                  const std::vector<std::uint32_t>& labels,
                  const std::vector<std::uint32_t>& mask) {
    if (mask.empty()) throw std::invalid_argument("nll_masked: empty mask");
    const std::size_t n = log_probs.cols();
    double acc = 0.0;
    for (std::uint32_t id : mask) {
        if (id >= log_probs.rows() || id >= labels.size()) {
            throw std::invalid_argument("nll_masked: mask id out of range");
        }
        if (labels[id] >= n) {
            throw std::invalid_argument("nll_masked: label out of range");
        }
        acc -= log_probs.at(id, labels[id]);
    }
    const double inv_m = 1.0 / static_cast<double>(mask.size());
    Tensor out = Tensor::scalar(acc * inv_m);
    if (setup_grad(tape, out, {&log_probs})) {
        auto dx = log_probs.data(), dout = out.data();
        auto ids = std::make_shared<std::vector<std::uint32_t>>(mask);
        auto labs = std::make_shared<std::vector<std::uint32_t>>(labels);
        tape.record([dx, dout, ids, labs, n, inv_m] {
            const double g = dout->grad[0];
            for (std::uint32_t id : *ids) {
                dx->grad[id * n + (*labs)[id]] -= g * inv_m;
            }
        });
    }
    return out;
}

Tensor log_softmax_nll(Tape& tape, const Tensor& logits,
                       const std::vector<std::uint32_t>& labels,
                       const std::vector<std::uint32_t>& mask) {
    return nll_masked(tape, log_softmax(tape, logits), labels, mask);
}

Tensor sum(Tape& tape, const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    Tensor out = Tensor::scalar(acc);
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout] {
            const double g = dout->grad[0];
            for (std::size_t i = 0; i < dx->grad.size(); ++i) dx->grad[i] += g;
        });
    }
    return out;
}

Tensor sum_squares(Tape& tape, const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v * v;
    Tensor out = Tensor::scalar(acc);
    if (setup_grad(tape, out, {&x})) {
        auto dx = x.data(), dout = out.data();
        tape.record([dx, dout] {
            const double g = dout->grad[0];
            for (std::size_t i = 0; i < dx->grad.size(); ++i) {
                dx->grad[i] += 2.0 * dx->value[i] * g;
            }
        });
    }
    return out;
}

}  // namespace duallag
