// The 2-layer polynomial model across its three filter variants: parameter
// shapes and counts, branch isolation, full-model gradients, checkpoints.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "duallag/filters.hpp"
#include "duallag/gradcheck.hpp"
#include "duallag/model.hpp"
#include "duallag/ops.hpp"
#include "duallag/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace duallag;

namespace {

GraphDataset path2_dataset() {
    GraphDataset ds;
    ds.num_nodes = 2;
    ds.edges = {{0, 1}};
    ds.feature_dim = 2;
    ds.features = {1.0, 0.0, 0.0, 1.0};
    ds.labels = {0, 1};
    ds.num_classes = 2;
    return ds;
}

GraphDataset edgeless_dataset(std::size_t n) {
    GraphDataset ds;
    ds.num_nodes = n;
    ds.feature_dim = 2;
    ds.features.assign(n * 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        ds.features[i * 2] = 0.1 * static_cast<double>(i) - 0.3;
        ds.features[i * 2 + 1] = 1.0 - 0.2 * static_cast<double>(i);
    }
    ds.labels.assign(n, 0);
    ds.num_classes = 1;
    return ds;
}

ModelConfig make_config(Variant v, int k, int h, std::size_t f, std::size_t c,
                        double dropout = 0.0) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.num_terms = k;
    cfg.hidden = h;
    cfg.feature_dim = f;
    cfg.num_classes = c;
    cfg.dropout_p = dropout;
    return cfg;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.values()[i] != b.values()[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::cheby, Variant::laguerre, Variant::dual_laguerre}) {
        CHECK(parse_variant(variant_name(v)) == v);
    }
    CHECK_THROWS_AS(parse_variant("gat"), std::invalid_argument);
}

TEST_CASE("init_params determinism and variant contract") {
    ModelConfig cfg = make_config(Variant::dual_laguerre, 3, 16, 4, 2);
    ParamSet a = init_params(cfg, 7);
    ParamSet b = init_params(cfg, 7);
    CHECK(tensors_equal(a.w1, b.w1));
    CHECK(tensors_equal(a.w2, b.w2));
    CHECK(a.theta_low->item() == b.theta_low->item());

    ParamSet c = init_params(cfg, 8);
    CHECK(!tensors_equal(a.w1, c.w1));

    ParamSet cheby = init_params(make_config(Variant::cheby, 3, 16, 4, 2), 7);
    CHECK(!cheby.theta_low.has_value());
    CHECK(!cheby.theta_high.has_value());

    ParamSet laguerre = init_params(make_config(Variant::laguerre, 3, 16, 4, 2), 7);
    CHECK(laguerre.theta_low.has_value());
    CHECK(!laguerre.theta_high.has_value());

    // Thetas start at alpha = 0.
    CHECK(alpha_of(laguerre.theta_low->item()) ==
          doctest::Approx(0.0).epsilon(1e-14));

    // Biases start at zero; weights stay inside the Glorot bound.
    for (double v : a.b1.values()) CHECK(v == 0.0);
    const double bound1 = std::sqrt(6.0 / (24.0 + 16.0));
    for (double v : a.w1.values()) CHECK(std::abs(v) <= bound1);
}

TEST_CASE("dual dimension law: F=4 K=3 H=16 C=2 gives 24x16 and 96x2") {
    ModelConfig cfg = make_config(Variant::dual_laguerre, 3, 16, 4, 2);
    CHECK(layer1_in_width(cfg) == 24);
    CHECK(layer2_in_width(cfg) == 96);
    ParamSet p = init_params(cfg, 0);
    CHECK(p.w1.rows() == 24);
    CHECK(p.w1.cols() == 16);
    CHECK(p.w2.rows() == 96);
    CHECK(p.w2.cols() == 2);
}

TEST_CASE("parameter-count law: dual doubles the linear weights and filter scalars") {
    const ModelConfig dual = make_config(Variant::dual_laguerre, 3, 16, 4, 2);
    const ModelConfig single = make_config(Variant::laguerre, 3, 16, 4, 2);
    ParamSet pd = init_params(dual, 0);
    ParamSet ps = init_params(single, 0);

    CHECK(pd.w1.size() == 2 * ps.w1.size());
    CHECK(pd.w2.size() == 2 * ps.w2.size());

    std::size_t dual_thetas = (pd.theta_low ? 1 : 0) + (pd.theta_high ? 1 : 0);
    std::size_t single_thetas = (ps.theta_low ? 1 : 0) + (ps.theta_high ? 1 : 0);
    CHECK(dual_thetas == 2);
    CHECK(single_thetas == 1);
}

TEST_CASE("poly_conv collapses to the base term at K=1") {
    GraphDataset ds = path2_dataset();
    GraphOperators ops = build_operators(ds);
    Tensor x = Tensor::from_values(2, 2, ds.features);

    // W = identity (F = H = 2), b = 0.
    Tensor w = Tensor::from_values(2, 2, {1, 0, 0, 1});
    Tensor b = Tensor::zeros(1, 2);

    SUBCASE("laguerre variant gives layer_norm(X)") {
        ModelConfig cfg = make_config(Variant::laguerre, 1, 2, 2, 2);
        Tensor theta = Tensor::scalar(theta_for_alpha(0.0));
        Tape tape;
        Tensor out = poly_conv_forward(tape, ops, x, w, b, theta, cfg);
        Tensor normed = layer_norm(tape, x);
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out.values()[i] == doctest::Approx(normed.values()[i]));
        }
    }

    SUBCASE("cheby variant gives X itself") {
        ModelConfig cfg = make_config(Variant::cheby, 1, 2, 2, 2);
        Tape tape;
        Tensor out = poly_conv_forward(tape, ops, x, w, b, std::nullopt, cfg);
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out.values()[i] == doctest::Approx(x.values()[i]));
        }
    }

    SUBCASE("zero W leaves only the bias rows") {
        ModelConfig cfg = make_config(Variant::laguerre, 1, 3, 2, 2);
        Tensor zero_w = Tensor::zeros(2, 3);
        Tensor bias = Tensor::from_values(1, 3, {0.5, -1.0, 2.0});
        Tensor theta = Tensor::scalar(theta_for_alpha(0.0));
        Tape tape;
        Tensor out = poly_conv_forward(tape, ops, x, zero_w, bias, theta, cfg);
        for (std::size_t r = 0; r < 2; ++r) {
            CHECK(out.at(r, 0) == 0.5);
            CHECK(out.at(r, 1) == -1.0);
            CHECK(out.at(r, 2) == 2.0);
        }
    }
}

TEST_CASE("dual branch projection consistency and theta isolation") {
    GraphDataset ds = synth_graph(10, 2, 0.5, 3.0, 2, 3);
    GraphOperators ops = build_operators(ds);
    Tensor x = Tensor::from_values(10, 2, ds.features);
    const int terms = 3;
    ModelConfig dual_cfg = make_config(Variant::dual_laguerre, terms, 4, 2, 2);
    ModelConfig single_cfg = make_config(Variant::laguerre, terms, 4, 2, 2);

    Tensor theta1 = Tensor::scalar(theta_for_alpha(0.3));
    Tensor theta2 = Tensor::scalar(theta_for_alpha(-0.4));

    // Dual W whose high-branch block is zero: output must equal the
    // single-branch result with theta1.
    const std::size_t low_width = 2 * terms;
    Tensor w_single = Tensor::zeros(low_width, 4);
    {
        RngStream rng(5);
        for (double& v : w_single.values()) v = rng.uniform(-1, 1);
    }
    Tensor w_dual = Tensor::zeros(2 * low_width, 4);
    for (std::size_t r = 0; r < low_width; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            w_dual.at(r, c) = w_single.at(r, c);
        }
    }
    Tensor b = Tensor::from_values(1, 4, {0.1, 0.2, -0.3, 0.0});

    Tape tape;
    Tensor dual_out =
        dual_conv_forward(tape, ops, x, w_dual, b, theta1, theta2, dual_cfg);
    Tensor single_out =
        poly_conv_forward(tape, ops, x, w_single, b, theta1, single_cfg);
    for (std::size_t i = 0; i < dual_out.size(); ++i) {
        CHECK(dual_out.values()[i] == single_out.values()[i]);
    }

    // Perturbing theta2 with the high block zeroed changes nothing,
    // bit for bit.
    Tensor theta2b = Tensor::scalar(theta_for_alpha(1.5));
    Tensor dual_out2 =
        dual_conv_forward(tape, ops, x, w_dual, b, theta1, theta2b, dual_cfg);
    CHECK(tensors_equal(dual_out, dual_out2));
}

TEST_CASE("edgeless graph: both branch stacks coincide when thetas agree") {
    GraphDataset ds = edgeless_dataset(6);
    GraphOperators ops = build_operators(ds);
    // L_low = L_high = 0.5 I.
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(ops.low.at(i, i) == 0.5);
        CHECK(ops.high.at(i, i) == 0.5);
    }
    Tensor x = Tensor::from_values(6, 2, ds.features);
    Tensor theta = Tensor::scalar(theta_for_alpha(0.1));
    Tape tape;
    Tensor low_stack = laguerre_basis(tape, ops.low, x, theta, 3);
    Tensor high_stack = laguerre_basis(tape, ops.high, x, theta, 3);
    CHECK(tensors_equal(low_stack, high_stack));
}

TEST_CASE("dual thetas receive independent, correct gradients") {
    GraphDataset ds = synth_graph(9, 3, 0.4, 3.0, 3, 17);
    GraphOperators ops = build_operators(ds);
    Tensor x = Tensor::from_values(9, 3, ds.features);
    ModelConfig cfg = make_config(Variant::dual_laguerre, 3, 4, 3, 3);
    ParamSet p = init_params(cfg, 2);
    // Move the thetas off the shared init so the branches differ.
    p.theta_low->values()[0] = theta_for_alpha(0.25);
    p.theta_high->values()[0] = theta_for_alpha(-0.55);

    std::vector<std::uint32_t> mask = {0, 2, 4, 6};
    auto loss_fn = [&](Tape& t) {
        Tensor out = dual_conv_forward(t, ops, x, p.w1, p.b1, *p.theta_low,
                                       *p.theta_high, cfg);
        return log_softmax_nll(t, out, ds.labels, mask);
    };

    std::vector<Tensor> params = p.all();
    const double err = grad_check(loss_fn, params);
    CHECK(err < 1e-4);

    Tape t;
    Tensor loss = loss_fn(t);
    t.backward(loss);
    CHECK(p.theta_low->grad()[0] != p.theta_high->grad()[0]);
}

TEST_CASE("model_forward determinism, normalization and gradients") {
    GraphDataset ds = path2_dataset();
    GraphOperators ops = build_operators(ds);
    Tensor x = Tensor::from_values(2, 2, ds.features);
    ModelConfig cfg = make_config(Variant::dual_laguerre, 3, 4, 2, 2, 0.0);
    ParamSet p = init_params(cfg, 11);

    Tape t1, t2;
    Tensor out1 = model_forward(t1, ops, x, p, cfg, false, nullptr);
    Tensor out2 = model_forward(t2, ops, x, p, cfg, false, nullptr);
    CHECK(tensors_equal(out1, out2));

    // Rows exponentiate-and-sum to one.
    for (std::size_t r = 0; r < out1.rows(); ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < out1.cols(); ++c) {
            total += std::exp(out1.at(r, c));
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }

    // Full-model gradient over every parameter, dropout disabled.
    std::vector<std::uint32_t> mask = {0, 1};
    auto loss_fn = [&](Tape& t) {
        Tensor logp = model_forward(t, ops, x, p, cfg, false, nullptr);
        return nll_masked(t, logp, ds.labels, mask);
    };
    std::vector<Tensor> params = p.all();
    const double err = grad_check(loss_fn, params);
    CHECK(err < 1e-4);
}

TEST_CASE("model_forward with frozen dropout passes grad_check") {
    GraphDataset ds = synth_graph(8, 2, 0.7, 3.0, 2, 23);
    GraphOperators ops = build_operators(ds);
    Tensor x = Tensor::from_values(8, 2, ds.features);
    ModelConfig cfg = make_config(Variant::laguerre, 2, 3, 2, 2, 0.5);
    ParamSet p = init_params(cfg, 4);

    std::vector<std::uint32_t> mask = {0, 1, 2, 3, 4};
    auto loss_fn = [&](Tape& t) {
        RngStream frozen(42);
        Tensor logp = model_forward(t, ops, x, p, cfg, true, &frozen);
        return nll_masked(t, logp, ds.labels, mask);
    };
    std::vector<Tensor> params = p.all();
    const double err = grad_check(loss_fn, params);
    CHECK(err < 1e-4);
}

TEST_CASE("parameter checkpoints round-trip") {
    namespace fs = std::filesystem;
    const fs::path path =
        fs::temp_directory_path() /
        ("duallag_params_" + std::to_string(::getpid()) + ".bin");

    ModelConfig cfg = make_config(Variant::dual_laguerre, 3, 5, 4, 3);
    ParamSet p = init_params(cfg, 19);
    p.theta_high->values()[0] = theta_for_alpha(0.8);
    save_params(p, path);
    ParamSet q = load_params(path);
    CHECK(tensors_equal(p.w1, q.w1));
    CHECK(tensors_equal(p.b1, q.b1));
    CHECK(tensors_equal(p.w2, q.w2));
    CHECK(tensors_equal(p.b2, q.b2));
    REQUIRE(q.theta_low.has_value());
    REQUIRE(q.theta_high.has_value());
    CHECK(q.theta_low->item() == p.theta_low->item());
    CHECK(q.theta_high->item() == p.theta_high->item());

    ParamSet cheby = init_params(make_config(Variant::cheby, 2, 3, 2, 2), 1);
    save_params(cheby, path);
    ParamSet cheby_back = load_params(path);
    CHECK(!cheby_back.theta_low.has_value());

    fs::remove(path);
    CHECK_THROWS_AS(load_params(path), std::runtime_error);
}
