#include "duallag/model.hpp"

#include "duallag/filters.hpp"
#include "duallag/ops.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace duallag {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::cheby: return "cheby";
        case Variant::laguerre: return "laguerre";
        case Variant::dual_laguerre: return "dual_laguerre";
    }
    throw std::logic_error("variant_name: unknown variant");
}

Variant parse_variant(const std::string& name) {
    if (name == "cheby") return Variant::cheby;
    if (name == "laguerre") return Variant::laguerre;
    if (name == "dual_laguerre") return Variant::dual_laguerre;
    throw std::invalid_argument("unknown variant '" + name +
                                "' (want cheby|laguerre|dual_laguerre)");
}

void ModelConfig::validate() const {
    if (num_terms < 1) throw std::invalid_argument("model: K must be >= 1");
    if (hidden < 1) throw std::invalid_argument("model: H must be >= 1");
    if (feature_dim < 1 || num_classes < 1) {
        throw std::invalid_argument("model: feature_dim and num_classes must be >= 1");
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) {
        throw std::invalid_argument("model: dropout must be in [0,1)");
    }
}

int branch_count(Variant v) {
    return v == Variant::dual_laguerre ? 2 : 1;
}

std::size_t layer1_in_width(const ModelConfig& cfg) {
    return cfg.feature_dim * static_cast<std::size_t>(cfg.num_terms) *
           static_cast<std::size_t>(branch_count(cfg.variant));
}

std::size_t layer2_in_width(const ModelConfig& cfg) {
    return static_cast<std::size_t>(cfg.hidden) *
           static_cast<std::size_t>(cfg.num_terms) *
           static_cast<std::size_t>(branch_count(cfg.variant));
}

std::vector<Tensor> ParamSet::all() const {
    std::vector<Tensor> out = {w1, b1, w2, b2};
    if (theta_low) out.push_back(*theta_low);
    if (theta_high) out.push_back(*theta_high);
    return out;
}

std::vector<Tensor> ParamSet::weights() const {
    return {w1, w2};
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const Tensor& t : all()) n += t.size();
    return n;
}

namespace {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros(fan_in, fan_out, true);
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    RngStream rng(seed);
    ParamSet p;
    const std::size_t in1 = layer1_in_width(cfg);
    const std::size_t in2 = layer2_in_width(cfg);
    p.w1 = glorot_uniform(in1, static_cast<std::size_t>(cfg.hidden), rng);
    p.b1 = Tensor::zeros(1, static_cast<std::size_t>(cfg.hidden), true);
    p.w2 = glorot_uniform(in2, cfg.num_classes, rng);
    p.b2 = Tensor::zeros(1, cfg.num_classes, true);
    const double theta0 = theta_for_alpha(0.0);  // ln(e - 1)
    if (cfg.variant != Variant::cheby) {
        p.theta_low = Tensor::scalar(theta0, true);
    }
    if (cfg.variant == Variant::dual_laguerre) {
        p.theta_high = Tensor::scalar(theta0, true);
    }
    return p;
}

namespace {

Tensor branch_stack(Tape& tape, const GraphOperators& ops, const Tensor& x,
                    const ParamSet& params, const ModelConfig& cfg) {
    switch (cfg.variant) {
        case Variant::cheby:
            return cheby_basis(tape, ops.sym, x, cfg.num_terms);
        case Variant::laguerre:
            return laguerre_basis(tape, ops.low, x, *params.theta_low, cfg.num_terms);
        case Variant::dual_laguerre:
            return concat_cols(
                tape,
                {laguerre_basis(tape, ops.low, x, *params.theta_low, cfg.num_terms),
                 laguerre_basis(tape, ops.high, x, *params.theta_high, cfg.num_terms)});
    }
    throw std::logic_error("branch_stack: unknown variant");
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_row_bias(tape, matmul(tape, x, w), b);
}

}  // namespace

Tensor poly_conv_forward(Tape& tape, const GraphOperators& ops, const Tensor& x,
                         const Tensor& w, const Tensor& b,
                         const std::optional<Tensor>& theta, const ModelConfig& cfg) {
    Tensor stack;
    if (cfg.variant == Variant::cheby) {
        stack = cheby_basis(tape, ops.sym, x, cfg.num_terms);
    } else {
        if (!theta) throw std::invalid_argument("poly_conv_forward: theta required");
        stack = laguerre_basis(tape, ops.low, x, *theta, cfg.num_terms);
    }
    return linear(tape, stack, w, b);
}

Tensor dual_conv_forward(Tape& tape, const GraphOperators& ops, const Tensor& x,
                         const Tensor& w, const Tensor& b,
                         const Tensor& theta_low, const Tensor& theta_high,
                         const ModelConfig& cfg) {
    Tensor stack = concat_cols(
        tape, {laguerre_basis(tape, ops.low, x, theta_low, cfg.num_terms),
               laguerre_basis(tape, ops.high, x, theta_high, cfg.num_terms)});
    return linear(tape, stack, w, b);
}

Tensor model_forward(Tape& tape, const GraphOperators& ops, const Tensor& x,
                     const ParamSet& params, const ModelConfig& cfg,
                     bool training, RngStream* rng) {
    Tensor h = linear(tape, branch_stack(tape, ops, x, params, cfg), params.w1, params.b1);
    h = relu(tape, h);
    h = dropout(tape, h, cfg.dropout_p, training, rng);
    Tensor logits = linear(tape, branch_stack(tape, ops, h, params, cfg), params.w2, params.b2);
    return log_softmax(tape, logits);
}

// ---------------------------------------------------------------------------
// Checkpoint format: "DLPS", u32 count, then per entry u32 name length, name
// bytes, u32 rows, u32 cols, rows*cols f64 little-endian.

namespace {

constexpr char kMagic[4] = {'D', 'L', 'P', 'S'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4)) {
        throw std::runtime_error(path + ": truncated checkpoint");
    }
    return v;
}

void write_entry(std::ofstream& out, const std::string& name, const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.cols()));
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * 8));
}

}  // namespace

void save_params(const ParamSet& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": unwritable");
    out.write(kMagic, 4);
    std::vector<std::pair<std::string, Tensor>> entries = {
        {"w1", params.w1}, {"b1", params.b1}, {"w2", params.w2}, {"b2", params.b2}};
    if (params.theta_low) entries.emplace_back("theta_low", *params.theta_low);
    if (params.theta_high) entries.emplace_back("theta_high", *params.theta_high);
    put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, tensor] : entries) write_entry(out, name, tensor);
    if (!out) throw std::runtime_error(path.string() + ": short write");
}

ParamSet load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": missing or unreadable");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error(path.string() + ": not a parameter checkpoint");
    }
    const std::uint32_t count = get_u32(in, path.string());
    std::map<std::string, Tensor> entries;
    for (std::uint32_t e = 0; e < count; ++e) {
        const std::uint32_t name_len = get_u32(in, path.string());
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) {
            throw std::runtime_error(path.string() + ": truncated checkpoint");
        }
        const std::uint32_t rows = get_u32(in, path.string());
        const std::uint32_t cols = get_u32(in, path.string());
        std::vector<double> values(static_cast<std::size_t>(rows) * cols);
        if (!in.read(reinterpret_cast<char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * 8))) {
            throw std::runtime_error(path.string() + ": truncated checkpoint");
        }
        entries.emplace(name, Tensor::from_values(rows, cols, std::move(values), true));
    }
    auto take = [&](const std::string& name) {
        auto it = entries.find(name);
        if (it == entries.end()) {
            throw std::runtime_error(path.string() + ": missing entry '" + name + "'");
        }
        return it->second;
    };
    ParamSet p;
    p.w1 = take("w1");
    p.b1 = take("b1");
    p.w2 = take("w2");
    p.b2 = take("b2");
    if (entries.count("theta_low")) p.theta_low = entries.at("theta_low");
    if (entries.count("theta_high")) p.theta_high = entries.at("theta_high");
    return p;
}

}  // namespace duallag
