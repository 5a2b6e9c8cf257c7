#pragma once

#include "duallag/csr.hpp"
#include "duallag/dataset.hpp"

namespace duallag {

/// Symmetric normalized Laplacian L_sym = I - D^{-1/2} A D^{-1/2}, built
/// without self-loops. Isolated nodes get the row e_i (d^{-1/2} = 0 for
/// degree 0), keeping the spectrum inside [0, 2].
CsrMatrix build_sym_laplacian(const GraphDataset& ds);

/// Low-frequency operator 0.5 * L_sym, spectrum in [0, 1].
CsrMatrix build_l_low(const CsrMatrix& l_sym);

/// High-frequency operator 0.5 * (2I - L_sym) with explicit diagonal,
/// spectrum in [0, 1]. Satisfies L_low + L_high = I entrywise.
CsrMatrix build_l_high(const CsrMatrix& l_sym);

/// The full operator family for one graph.
struct GraphOperators {
    CsrMatrix sym;   // L_sym, spectrum [0, 2]
    CsrMatrix low;   // 0.5 * L_sym
    CsrMatrix high;  // 0.5 * (2I - L_sym)
};

GraphOperators build_operators(const GraphDataset& ds);

}  // namespace duallag
