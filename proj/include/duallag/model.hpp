#pragma once

#include "duallag/laplacian.hpp"
#include "duallag/rng.hpp"
#include "duallag/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace duallag {

/// Filter variants of the 2-layer polynomial model.
enum class Variant {
    cheby,          // static Chebyshev terms on L_sym - I
    laguerre,       // one adaptive branch on L_low
    dual_laguerre,  // independent adaptive branches on L_low and L_high
};

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);  // throws on unknown name

struct ModelConfig {
    Variant variant = Variant::dual_laguerre;
    int num_terms = 3;  // K: polynomial terms per branch (degrees 0..K-1)
    int hidden = 16;    // H: channel width between the two layers
    std::size_t feature_dim = 0;
    std::size_t num_classes = 0;
    double dropout_p = 0.5;

    void validate() const;
};

/// 1 for single-branch variants, 2 for the dual model.
int branch_count(Variant v);

/// Stacked width feeding layer 1: feature_dim * K * branches.
std::size_t layer1_in_width(const ModelConfig& cfg);

/// Stacked width feeding the output layer: H * K * branches. This is the
/// pre-output dimension the dual model doubles relative to single-branch
/// variants.
std::size_t layer2_in_width(const ModelConfig& cfg);

/// All learnable state of one model instance. theta_low / theta_high are
/// present exactly when the variant learns them (laguerre: low only;
/// dual_laguerre: both; cheby: neither). Thetas are shared across layers,
/// so each branch contributes exactly one filter parameter.
struct ParamSet {
    Tensor w1, b1;  // layer 1: layer1_in_width x H, 1 x H
    Tensor w2, b2;  // layer 2: layer2_in_width x C, 1 x C
    std::optional<Tensor> theta_low;
    std::optional<Tensor> theta_high;

    std::vector<Tensor> all() const;      // everything, optimizer order
    std::vector<Tensor> weights() const;  // w1, w2 (weight-decay set)
    std::size_t scalar_count() const;     // total trainable scalars
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))) from the seeded
/// stream, zero biases, thetas at ln(e-1) so training starts at alpha = 0.
ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Single-branch convolution: stacked basis of x times w plus bias. Uses
/// the Chebyshev basis on ops.sym for the cheby variant and the adaptive
/// Laguerre basis on ops.low otherwise (theta required then).
Tensor poly_conv_forward(Tape& tape, const GraphOperators& ops, const Tensor& x,
                         const Tensor& w, const Tensor& b,
                         const std::optional<Tensor>& theta, const ModelConfig& cfg);

/// Dual-branch convolution: concat(basis(ops.low, x; theta_low),
/// basis(ops.high, x; theta_high)) times w plus bias. The two thetas
/// receive independent gradients.
Tensor dual_conv_forward(Tape& tape, const GraphOperators& ops, const Tensor& x,
                         const Tensor& w, const Tensor& b,
                         const Tensor& theta_low, const Tensor& theta_high,
                         const ModelConfig& cfg);

/// conv1 -> ReLU -> dropout -> conv2 -> log-softmax. Training mode draws
/// the dropout mask from `rng`; eval mode is deterministic and ignores it.
Tensor model_forward(Tape& tape, const GraphOperators& ops, const Tensor& x,
                     const ParamSet& params, const ModelConfig& cfg,
                     bool training, RngStream* rng);

/// Checkpoint format: magic "DLPS", u32 entry count, then per entry a
/// u32-length name, u32 rows, u32 cols and rows*cols f64 little-endian
/// values.
void save_params(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_params(const std::filesystem::path& path);

}  // namespace duallag
