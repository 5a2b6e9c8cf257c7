#include "duallag/filters.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace duallag {

double alpha_of(double theta) {
    const double sp = theta > 0.0 ? theta + std::log1p(std::exp(-theta))
                                  : std::log1p(std::exp(theta));
    return sp - 1.0;
}

double theta_for_alpha(double alpha) {
    if (alpha <= -1.0) {
        throw std::invalid_argument("theta_for_alpha: alpha must be > -1");
    }
    // softplus(theta) = alpha + 1  =>  theta = ln(e^{alpha+1} - 1), computed
    // via expm1 so small alpha + 1 stays accurate.
    return std::log(std::expm1(alpha + 1.0));
}

Tensor alpha_of(Tape& tape, const Tensor& theta) {
    if (!theta.is_scalar()) {
        throw std::invalid_argument("alpha_of: theta must be 1x1");
    }
    return affine(tape, softplus(tape, theta), 1.0, -1.0);
}

double laguerre_poly_scalar(double x, double alpha, int k) {
    if (k < 0) throw std::invalid_argument("laguerre_poly_scalar: k must be >= 0");
    if (alpha <= -1.0) {
        throw std::invalid_argument("laguerre_poly_scalar: alpha must be > -1");
    }
    if (k == 0) return 1.0;
    double prev = 1.0;                  // P_0
    double cur = x - (alpha + 1.0);     // P_1 = x - b_0
    for (int i = 1; i < k; ++i) {
        const double b = 2.0 * i + alpha + 1.0;
        const double c = i * (i + alpha);
        const double next = (x - b) * cur - c * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

[[noreturn]] void stabilization_failure(const char* basis, int term, const Tensor& t) {
    double worst = 0.0;
    for (double v : t.values()) {
        if (std::isfinite(v)) worst = std::max(worst, std::abs(v));
    }
    std::ostringstream msg;
    msg << basis << ": non-finite entries in term " << term
        << " (largest finite magnitude " << worst
        << "); recurrence stabilization failed";
    throw std::runtime_error(msg.str());
}

}  // namespace

Tensor laguerre_basis(Tape& tape, const CsrMatrix& op, const Tensor& x,
                      const Tensor& theta, int num_terms, bool normalize) {
    if (num_terms < 1) throw std::invalid_argument("laguerre_basis: need K >= 1");
    if (op.rows != op.cols || op.cols != x.rows()) {
        std::ostringstream msg;
        msg << "laguerre_basis: operator " << op.rows << "x" << op.cols
            << " does not match input rows " << x.rows();
        throw std::invalid_argument(msg.str());
    }

    const Tensor alpha = alpha_of(tape, theta);
    auto normed = [&](const Tensor& t) {
        return normalize ? layer_norm(tape, t) : t;
    };

    std::vector<Tensor> stacked;
    stacked.reserve(static_cast<std::size_t>(num_terms));

    Tensor prev2;                     // T^_{k-1}
    Tensor prev = normed(x);          // T^_0
    stacked.push_back(prev);

    for (int k = 0; k + 1 < num_terms; ++k) {
        // T_{k+1} = L T^_k - b_k T^_k - c_k T^_{k-1},
        // b_k = 2k + alpha + 1, c_k = k (k + alpha).
        const Tensor b_k = affine(tape, alpha, 1.0, 2.0 * k + 1.0);
        Tensor next = sub(tape, spmm(tape, op, prev), scale_by(tape, prev, b_k));
        if (k >= 1) {
            const Tensor c_k =
                affine(tape, alpha, static_cast<double>(k),
                       static_cast<double>(k) * static_cast<double>(k));
            next = sub(tape, next, scale_by(tape, prev2, c_k));
        }
        if (!next.all_finite()) stabilization_failure("laguerre_basis", k + 1, next);
        const Tensor next_normed = normed(next);
        stacked.push_back(next_normed);
        prev2 = prev;
        prev = next_normed;
    }
    return concat_cols(tape, stacked);
}

Tensor cheby_basis(Tape& tape, const CsrMatrix& l_sym, const Tensor& x,
                   int num_terms) {
    if (num_terms < 1) throw std::invalid_argument("cheby_basis: need K >= 1");
    if (l_sym.rows != l_sym.cols || l_sym.cols != x.rows()) {
        std::ostringstream msg;
        msg << "cheby_basis: operator " << l_sym.rows << "x" << l_sym.cols
            << " does not match input rows " << x.rows();
        throw std::invalid_argument(msg.str());
    }

    // L~ = L_sym - I; lambda_max = 2 exactly for L_sym, no estimation.
    auto shifted = std::make_shared<const CsrMatrix>(
        csr_add(l_sym, csr_scale(CsrMatrix::identity(l_sym.rows), -1.0)));

    std::vector<Tensor> stacked;
    stacked.reserve(static_cast<std::size_t>(num_terms));
    stacked.push_back(x);
    if (num_terms >= 2) {
        stacked.push_back(spmm(tape, shifted, x));
    }
    for (int k = 2; k < num_terms; ++k) {
        // T_{k} = 2 L~ T_{k-1} - T_{k-2}.
        Tensor t = sub(tape, affine(tape, spmm(tape, shifted, stacked[k - 1]), 2.0, 0.0),
                       stacked[k - 2]);
        if (!t.all_finite()) stabilization_failure("cheby_basis", k, t);
        stacked.push_back(t);
    }
    return concat_cols(tape, stacked);
}

double term_block_max_abs(const Tensor& stacked, std::size_t term_cols,
                          std::size_t k) {
    const std::size_t total = stacked.cols();
    if (term_cols == 0 || (k + 1) * term_cols > total) {
        throw std::invalid_argument("term_block_max_abs: block out of range");
    }
    double worst = 0.0;
    for (std::size_t r = 0; r < stacked.rows(); ++r) {
        for (std::size_t j = k * term_cols; j < (k + 1) * term_cols; ++j) {
            worst = std::max(worst, std::abs(stacked.at(r, j)));
        }
    }
    return worst;
}

}  // namespace duallag
