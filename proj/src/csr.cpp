#include "duallag/csr.hpp"

#include <sstream>
#include <stdexcept>

namespace duallag {

void CsrMatrix::validate() const {
    if (row_ptr.size() != rows + 1) {
        throw std::runtime_error("csr: row_ptr size mismatch");
    }
    if (row_ptr.front() != 0 || row_ptr.back() != values.size() ||
        col_idx.size() != values.size()) {
        throw std::runtime_error("csr: offset/nnz mismatch");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_ptr[r] > row_ptr[r + 1]) {
            throw std::runtime_error("csr: row_ptr not monotone");
        }
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col_idx[k] >= cols) {
                std::ostringstream msg;
                msg << "csr: column " << col_idx[k] << " out of range in row " << r;
                throw std::runtime_error(msg.str());
            }
            if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
                throw std::runtime_error("csr: columns not strictly increasing");
            }
        }
    }
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        if (col_idx[k] == c) return values[k];
        if (col_idx[k] > c) break;
    }
    return 0.0;
}

std::vector<double> CsrMatrix::densify() const {
    std::vector<double> dense(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            dense[r * cols + col_idx[k]] = values[k];
        }
    }
    return dense;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    CsrMatrix m;
    m.rows = m.cols = n;
    m.row_ptr.resize(n + 1);
    m.col_idx.resize(n);
    m.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ptr[i] = i;
        m.col_idx[i] = static_cast<std::uint32_t>(i);
    }
    m.row_ptr[n] = n;
    return m;
}

CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument("csr_add: shape mismatch");
    }
    CsrMatrix out;
    out.rows = a.rows;
    out.cols = a.cols;
    out.row_ptr.resize(a.rows + 1, 0);
    out.col_idx.reserve(a.nnz() + b.nnz());
    out.values.reserve(a.nnz() + b.nnz());
    for (std::size_t r = 0; r < a.rows; ++r) {
        std::size_t i = a.row_ptr[r], iend = a.row_ptr[r + 1];
        std::size_t j = b.row_ptr[r], jend = b.row_ptr[r + 1];
        // Merge the two sorted rows; keep cancelled entries so the union
        // pattern is preserved.
        while (i < iend || j < jend) {
            if (j >= jend || (i < iend && a.col_idx[i] < b.col_idx[j])) {
                out.col_idx.push_back(a.col_idx[i]);
                out.values.push_back(a.values[i]);
                ++i;
            } else if (i >= iend || b.col_idx[j] < a.col_idx[i]) {
                out.col_idx.push_back(b.col_idx[j]);
                out.values.push_back(b.values[j]);
                ++j;
            } else {
                out.col_idx.push_back(a.col_idx[i]);
                out.values.push_back(a.values[i] + b.values[j]);
                ++i;
                ++j;
            }
        }
        out.row_ptr[r + 1] = out.values.size();
    }
    return out;
}

CsrMatrix csr_scale(const CsrMatrix& a, double s) {
    CsrMatrix out = a;
    for (double& v : out.values) v *= s;
    return out;
}

}  // namespace duallag
