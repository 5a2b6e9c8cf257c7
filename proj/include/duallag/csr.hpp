#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace duallag {

/// Compressed-sparse-row matrix with double values. Column indices are
/// strictly increasing within each row; Laplacian-derived operators are
/// structurally symmetric.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;    // size rows + 1, row_ptr.back() == nnz
    std::vector<std::uint32_t> col_idx;  // sorted strictly increasing per row
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }

    /// Throws std::runtime_error if the structural invariants are violated.
    void validate() const;

    /// Value at (r, c); zero when the entry is not stored.
    double at(std::size_t r, std::size_t c) const;

    /// Row-major dense copy, rows x cols. Intended for small matrices
    /// (oracle checks, debugging).
    std::vector<double> densify() const;

    static CsrMatrix identity(std::size_t n);
};

/// Entrywise a + b over the union sparsity pattern. Exact zeros produced by
/// cancellation are kept so identities like L_low + L_high = I are testable
/// entry by entry.
CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b);

/// Entrywise s * a, same pattern.
CsrMatrix csr_scale(const CsrMatrix& a, double s);

}  // namespace duallag
