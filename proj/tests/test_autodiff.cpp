// Tensor ops, the tape, Adam and the finite-difference checker. Gradient
// claims are verified against central differences; Adam's first step is
// checked against a hand computation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "duallag/adam.hpp"
#include "duallag/gradcheck.hpp"
#include "duallag/ops.hpp"
#include "duallag/rng.hpp"
#include "duallag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace duallag;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, RngStream& rng,
                     bool requires_grad = true) {
    Tensor t = Tensor::zeros(rows, cols, requires_grad);
    for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
}

}  // namespace

TEST_CASE("matmul values") {
    Tape tape;
    Tensor id = Tensor::from_values(2, 2, {1, 0, 0, 1});
    Tensor m = Tensor::from_values(2, 2, {3, -1, 2, 5});
    Tensor out = matmul(tape, id, m);
    CHECK(out.values()[0] == 3);
    CHECK(out.values()[1] == -1);
    CHECK(out.values()[2] == 2);
    CHECK(out.values()[3] == 5);

    Tensor a = Tensor::from_values(1, 2, {1, 2});
    Tensor b = Tensor::from_values(2, 1, {3, 4});
    CHECK(matmul(tape, a, b).item() == 11);

    CHECK_THROWS_AS(matmul(tape, b, m), std::invalid_argument);
}

TEST_CASE("matmul gradients match finite differences") {
    RngStream rng(7);
    Tensor a = random_tensor(5, 4, rng);
    Tensor b = random_tensor(4, 3, rng);
    std::vector<Tensor> params = {a, b};
    const double err = grad_check(
        [&](Tape& tape) { return sum(tape, matmul(tape, a, b)); }, params);
    CHECK(err < 1e-6);
}

TEST_CASE("spmm identity, kernel vector and dense oracle") {
    Tape tape;
    CsrMatrix id = CsrMatrix::identity(3);
    Tensor x = Tensor::from_values(3, 2, {1, 2, 3, 4, 5, 6});
    Tensor out = spmm(tape, id, x);
    for (std::size_t i = 0; i < 6; ++i) CHECK(out.values()[i] == x.values()[i]);

    // L_sym of the 2-node path kills the constant vector.
    CsrMatrix l;
    l.rows = l.cols = 2;
    l.row_ptr = {0, 2, 4};
    l.col_idx = {0, 1, 0, 1};
    l.values = {1, -1, -1, 1};
    Tensor ones = Tensor::from_values(2, 1, {1, 1});
    Tensor zero = spmm(tape, l, ones);
    CHECK(zero.values()[0] == 0.0);
    CHECK(zero.values()[1] == 0.0);

    // Random symmetric CSR vs densify + matmul.
    RngStream rng(3);
    CsrMatrix sym;
    sym.rows = sym.cols = 6;
    sym.row_ptr.assign(7, 0);
    {
        // Symmetric band with random values.
        std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(6);
        for (std::uint32_t i = 0; i < 6; ++i) {
            rows[i].push_back({i, rng.uniform(-1, 1)});
            if (i + 1 < 6) {
                const double v = rng.uniform(-1, 1);
                rows[i].push_back({i + 1, v});
                rows[i + 1].push_back({i, v});
            }
        }
        for (std::uint32_t i = 0; i < 6; ++i) {
            std::sort(rows[i].begin(), rows[i].end());
            for (auto& [c, v] : rows[i]) {
                sym.col_idx.push_back(c);
                sym.values.push_back(v);
            }
            sym.row_ptr[i + 1] = sym.values.size();
        }
    }
    Tensor xr = random_tensor(6, 4, rng, false);
    Tensor via_sparse = spmm(tape, sym, xr);
    Tensor dense = Tensor::from_values(6, 6, sym.densify());
    Tensor via_dense = matmul(tape, dense, xr);
    for (std::size_t i = 0; i < via_sparse.size(); ++i) {
        CHECK(std::abs(via_sparse.values()[i] - via_dense.values()[i]) < 1e-12);
    }

    Tensor xg = random_tensor(6, 3, rng);
    std::vector<Tensor> params = {xg};
    const double err = grad_check(
        [&](Tape& tape2) { return sum_squares(tape2, spmm(tape2, sym, xg)); },
        params);
    CHECK(err < 1e-6);
}

TEST_CASE("relu forward and gradient") {
    Tape tape;
    Tensor x = Tensor::from_values(1, 3, {-1, 0, 2});
    Tensor y = relu(tape, x);
    CHECK(y.values()[0] == 0);
    CHECK(y.values()[1] == 0);
    CHECK(y.values()[2] == 2);

    // All-positive input: identity with gradient all ones.
    Tensor pos = Tensor::from_values(2, 2, {1, 2, 3, 4}, true);
    Tape t2;
    Tensor loss = sum(t2, relu(t2, pos));
    t2.backward(loss);
    for (double g : pos.grad()) CHECK(g == 1.0);

    // Away from zero the gradient matches finite differences.
    RngStream rng(11);
    Tensor xr = Tensor::zeros(4, 4, true);
    for (double& v : xr.values()) {
        v = rng.uniform(0.2, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    std::vector<Tensor> params = {xr};
    const double err = grad_check(
        [&](Tape& tape3) { return sum_squares(tape3, relu(tape3, xr)); }, params);
    CHECK(err < 1e-6);
}

TEST_CASE("dropout eval identity, p=0 identity, statistics") {
    RngStream rng(5);
    Tensor x = random_tensor(4, 4, rng, false);

    Tape tape;
    Tensor eval_out = dropout(tape, x, 0.5, false, nullptr);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(eval_out.values()[i] == x.values()[i]);
    }

    Tensor p0 = dropout(tape, x, 0.0, true, &rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(p0.values()[i] == x.values()[i]);
    }

    CHECK_THROWS_AS(dropout(tape, x, 1.0, true, &rng), std::invalid_argument);

    // Survivor fraction and mean preservation at p = 0.5 over 1e5 entries.
    Tensor big = Tensor::full(100, 1000, 1.0);
    Tensor dropped = dropout(tape, big, 0.5, true, &rng);
    std::size_t survivors = 0;
    double total = 0.0;
    for (double v : dropped.values()) {
        survivors += v != 0.0;
        total += v;
    }
    const double frac = static_cast<double>(survivors) / 1e5;
    CHECK(frac > 0.49);
    CHECK(frac < 0.51);
    const double mean = total / 1e5;
    CHECK(std::abs(mean - 1.0) < 0.02);

    // Frozen-mask gradient check: the closure reseeds the stream so every
    // evaluation sees the same mask.
    Tensor xg = random_tensor(3, 5, rng);
    std::vector<Tensor> params = {xg};
    const double err = grad_check(
        [&](Tape& t) {
            RngStream frozen(99);
            return sum_squares(t, dropout(t, xg, 0.4, true, &frozen));
        },
        params);
    CHECK(err < 1e-6);
}

TEST_CASE("layer_norm values and gradient") {
    Tape tape;
    Tensor constant_row = Tensor::from_values(1, 3, {5, 5, 5});
    Tensor normed = layer_norm(tape, constant_row);
    for (double v : normed.values()) CHECK(v == doctest::Approx(0.0));

    // [1,-1] is already standardized up to the eps factor.
    Tensor pm = Tensor::from_values(1, 2, {1, -1});
    Tensor pm_normed = layer_norm(tape, pm, 1e-5);
    CHECK(pm_normed.values()[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(pm_normed.values()[1] == doctest::Approx(-1.0).epsilon(1e-4));

    RngStream rng(13);
    Tensor x = random_tensor(6, 8, rng);
    std::vector<Tensor> params = {x};
    const double err = grad_check(
        [&](Tape& t) {
            // A non-symmetric reduction so mean/variance paths both matter.
            Tensor y = layer_norm(t, x);
            Tensor w = Tensor::from_values(
                8, 1, {0.9, -0.3, 0.4, 1.2, -0.8, 0.1, 0.7, -1.1});
            return sum_squares(t, matmul(t, y, w));
        },
        params);
    CHECK(err < 1e-5);
}

TEST_CASE("concat_cols stacks and routes gradients") {
    Tape tape;
    Tensor a = Tensor::from_values(2, 1, {1, 2});
    Tensor b = Tensor::from_values(2, 1, {3, 4});
    Tensor ab = concat_cols(tape, {a, b});
    CHECK(ab.cols() == 2);
    CHECK(ab.at(0, 0) == 1);
    CHECK(ab.at(0, 1) == 3);
    CHECK(ab.at(1, 1) == 4);

    Tensor single = concat_cols(tape, {a});
    CHECK(single.at(1, 0) == 2);

    RngStream rng(17);
    Tensor p1 = random_tensor(3, 2, rng);
    Tensor p2 = random_tensor(3, 3, rng);
    Tensor p3 = random_tensor(3, 1, rng);
    // Backward slices must hand each part exactly its share.
    Tape t2;
    Tensor stacked = concat_cols(t2, {p1, p2, p3});
    Tensor loss = sum_squares(t2, stacked);
    t2.backward(loss);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(p1.grad()[r * 2] == doctest::Approx(2.0 * p1.at(r, 0)));
        CHECK(p2.grad()[r * 3 + 1] == doctest::Approx(2.0 * p2.at(r, 1)));
        CHECK(p3.grad()[r] == doctest::Approx(2.0 * p3.at(r, 0)));
    }
}

TEST_CASE("log_softmax_nll values, stability, gradient") {
    Tape tape;
    Tensor uniform = Tensor::from_values(1, 2, {0, 0});
    Tensor loss = log_softmax_nll(tape, uniform, {0}, {0});
    CHECK(loss.item() == doctest::Approx(std::log(2.0)));

    Tensor extreme = Tensor::from_values(1, 2, {1000, 0});
    Tensor stable = log_softmax_nll(tape, extreme, {0}, {0});
    CHECK(std::isfinite(stable.item()));
    CHECK(stable.item() == doctest::Approx(0.0).epsilon(1e-12));

    Tensor logits = Tensor::from_values(1, 3, {0.3, -0.7, 1.1});
    Tensor probs = log_softmax(tape, logits);
    double total = 0.0;
    for (double v : probs.values()) total += std::exp(v);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(log_softmax_nll(tape, uniform, {0}, {}), std::invalid_argument);

    RngStream rng(23);
    Tensor lg = random_tensor(7, 4, rng);
    std::vector<std::uint32_t> labels = {0, 1, 2, 3, 0, 1, 2};
    std::vector<std::uint32_t> mask = {1, 4, 6};
    std::vector<Tensor> params = {lg};
    const double err = grad_check(
        [&](Tape& t) { return log_softmax_nll(t, lg, labels, mask); }, params);
    CHECK(err < 1e-6);
}

TEST_CASE("softplus values and gradient") {
    Tape tape;
    Tensor zero = Tensor::scalar(0.0);
    CHECK(softplus(tape, zero).item() == doctest::Approx(std::log(2.0)));

    Tensor big = Tensor::scalar(50.0);
    CHECK(softplus(tape, big).item() == doctest::Approx(50.0));

    Tensor theta = Tensor::scalar(0.0, true);
    Tape t2;
    Tensor out = softplus(t2, theta);
    t2.backward(out);
    CHECK(theta.grad()[0] == doctest::Approx(0.5));

    std::vector<Tensor> params = {theta};
    const double err =
        grad_check([&](Tape& t) { return softplus(t, theta); }, params);
    CHECK(err < 1e-7);
}

TEST_CASE("backward fan-out accumulates and repeats deterministically") {
    Tensor x = Tensor::from_values(2, 2, {1, 2, 3, 4}, true);

    // loss = sum(x): gradient all ones.
    {
        Tape tape;
        Tensor loss = sum(tape, x);
        tape.backward(loss);
        for (double g : x.grad()) CHECK(g == 1.0);
    }

    // y used twice: gradient 2 everywhere.
    {
        Tape tape;
        Tensor y = affine(tape, x, 1.0, 0.0);
        Tensor loss = add(tape, sum(tape, y), sum(tape, y));
        tape.backward(loss);
        for (double g : x.grad()) CHECK(g == 2.0);

        // Second pass over the same tape gives identical gradients.
        tape.backward(loss);
        for (double g : x.grad()) CHECK(g == 2.0);
    }

    Tape tape;
    Tensor not_scalar = affine(tape, x, 2.0, 0.0);
    CHECK_THROWS_AS(tape.backward(not_scalar), std::invalid_argument);
}

TEST_CASE("scale_by and add_row_bias gradients") {
    RngStream rng(29);
    Tensor x = random_tensor(4, 3, rng);
    Tensor s = Tensor::scalar(0.7, true);
    Tensor bias = random_tensor(1, 3, rng);
    std::vector<Tensor> params = {x, s, bias};
    const double err = grad_check(
        [&](Tape& t) {
            return sum_squares(t, add_row_bias(t, scale_by(t, x, s), bias));
        },
        params);
    CHECK(err < 1e-6);
}

TEST_CASE("adam steps") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Tensor w = Tensor::from_values(2, 2, {1, 2, 3, 4}, true);
        Adam adam({w}, {});
        w.zero_grad();
        adam.step();
        CHECK(w.values()[0] == 1.0);
        CHECK(w.values()[3] == 4.0);
    }

    SUBCASE("first step with unit gradient is about -lr") {
        // Hand computation: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1,
        // update = -lr / (1 + eps).
        Tensor w = Tensor::from_values(1, 3, {0, 0, 0}, true);
        Adam adam({w}, {.lr = 0.01});
        for (double& g : w.grad()) g = 1.0;
        adam.step();
        for (double v : w.values()) {
            CHECK(v == doctest::Approx(-0.01).epsilon(1e-6));
        }
        CHECK(adam.step_count() == 1);
    }

    SUBCASE("minimizes w^2 from w=1") {
        Tensor w = Tensor::scalar(1.0, true);
        Adam adam({w}, {.lr = 0.01});
        for (int i = 0; i < 500; ++i) {
            Tape tape;
            Tensor loss = sum_squares(tape, w);
            tape.backward(loss);
            adam.step();
        }
        CHECK(std::abs(w.item()) < 1e-2);
    }

    SUBCASE("non-finite gradient aborts with a diagnostic") {
        Tensor w = Tensor::scalar(1.0, true);
        Adam adam({w}, {});
        w.grad()[0] = std::numeric_limits<double>::infinity();
        CHECK_THROWS_WITH_AS(adam.step(), doctest::Contains("non-finite"),
                             std::runtime_error);
    }
}

TEST_CASE("grad_check on a linear loss is near machine precision") {
    Tensor x = Tensor::from_values(2, 2, {0.3, -0.2, 0.9, 1.4}, true);
    std::vector<Tensor> params = {x};
    const double err = grad_check(
        [&](Tape& t) { return sum(t, affine(t, x, 3.0, 1.0)); }, params);
    CHECK(err < 1e-9);
}
