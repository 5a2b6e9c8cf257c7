#include "duallag/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace duallag {

CsrMatrix build_sym_laplacian(const GraphDataset& ds) {
    const std::size_t n = ds.num_nodes;
    std::vector<std::size_t> degree(n, 0);
    for (auto [u, v] : ds.edges) {
        ++degree[u];
        ++degree[v];
    }
    // d^{-1/2}, with the degree-zero convention d^{-1/2} = 0 so isolated
    // nodes end up with the pure-diagonal row e_i.
    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (degree[i] > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(degree[i]));
    }

    // Adjacency lists; the diagonal is always stored (value 1, no self-loops
    // in A).
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].reserve(degree[i] + 1);
    }
    for (auto [u, v] : ds.edges) {
        const double w = -inv_sqrt[u] * inv_sqrt[v];
        rows[u].emplace_back(v, w);
        rows[v].emplace_back(u, w);
    }

    CsrMatrix m;
    m.rows = m.cols = n;
    m.row_ptr.resize(n + 1, 0);
    m.col_idx.reserve(ds.edges.size() * 2 + n);
    m.values.reserve(ds.edges.size() * 2 + n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = rows[i];
        row.emplace_back(static_cast<std::uint32_t>(i), 1.0);
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [c, w] : row) {
            m.col_idx.push_back(c);
            m.values.push_back(w);
        }
        m.row_ptr[i + 1] = m.values.size();
    }
    return m;
}

CsrMatrix build_l_low(const CsrMatrix& l_sym) {
    return csr_scale(l_sym, 0.5);
}

CsrMatrix build_l_high(const CsrMatrix& l_sym) {
    // 0.5 * (2I - L_sym) = I - 0.5 * L_sym, computed so that adding
    // build_l_low cancels exactly: off-diagonals are -(0.5 v) and diagonals
    // 1 - (0.5 v) for the stored diagonal value v.
    CsrMatrix m = l_sym;
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            const double half = 0.5 * m.values[k];
            m.values[k] = (m.col_idx[k] == r) ? 1.0 - half : -half;
        }
    }
    return m;
}

GraphOperators build_operators(const GraphDataset& ds) {
    GraphOperators ops;
    ops.sym = build_sym_laplacian(ds);
    ops.low = build_l_low(ops.sym);
    ops.high = build_l_high(ops.sym);
    return ops;
}

}  // namespace duallag
