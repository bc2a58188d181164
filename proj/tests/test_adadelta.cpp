#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "digitsum/adadelta.hpp"
#include "digitsum/model.hpp"
#include "digitsum/rng.hpp"

using namespace digitsum;

namespace {

// Drive the element-wise kernel through minimal legal models: a 1-unit head,
// optionally behind a hidden layer whose weight tensor provides a vector of
// independent parameters.
Model<double> scalar_model() {
    std::vector<LayerSpec> specs = {FlattenSpec{}, DenseSpec{1, Activation::Identity}};
    return Model<double>(std::move(specs), 1, 1, 1);
}

Model<double> hidden_model(std::size_t units) {
    std::vector<LayerSpec> specs = {FlattenSpec{}, DenseSpec{units, Activation::Identity},
                                    DenseSpec{1, Activation::Identity}};
    return Model<double>(std::move(specs), 1, 1, 1);
}

GradientSet<double> zero_gradients(const Model<double>& m) {
    return m.make_gradient_set();
}

}  // namespace

TEST_CASE("first step from fresh state matches the hand-derived value") {
    Model<double> m = scalar_model();
    m.weights()[0].fill(0.5);
    m.biases()[0].fill(0.0);
    AdadeltaState<double> state(m, 0.95, 1e-6);

    // g = 1: E[g^2] = 0.05, dx = -sqrt(1e-6)/sqrt(0.05 + 1e-6) * 1.
    GradientSet<double> g = zero_gradients(m);
    g.weights[0].fill(1.0);
    adadelta_step(m, g, state);

    const double expect_g2 = 0.05;
    const double expect_dx = -std::sqrt(1e-6) / std::sqrt(0.05 + 1e-6);
    REQUIRE_THAT(state.g2_weights[0].data[0],
                 Catch::Matchers::WithinRel(expect_g2, 1e-12));
    REQUIRE_THAT(m.weights()[0].data[0],
                 Catch::Matchers::WithinRel(0.5 + expect_dx, 1e-12));
    // dx ~ -4.472e-3
    REQUIRE_THAT(expect_dx, Catch::Matchers::WithinAbs(-4.472e-3, 1e-5));
    // E[dx^2] accumulated from the applied step.
    REQUIRE_THAT(state.dx2_weights[0].data[0],
                 Catch::Matchers::WithinRel(0.05 * expect_dx * expect_dx, 1e-12));
    // Bias had zero gradient and must be untouched.
    CHECK(m.biases()[0].data[0] == 0.0);
}

TEST_CASE("zero gradient leaves parameters unchanged and decays accumulators") {
    Model<double> m = scalar_model();
    m.weights()[0].fill(2.0);
    AdadeltaState<double> state(m, 0.95, 1e-6);
    state.g2_weights[0].fill(0.8);
    state.dx2_weights[0].fill(0.4);

    adadelta_step(m, zero_gradients(m), state);
    CHECK(m.weights()[0].data[0] == 2.0);
    REQUIRE_THAT(state.g2_weights[0].data[0], Catch::Matchers::WithinRel(0.76, 1e-12));
    REQUIRE_THAT(state.dx2_weights[0].data[0], Catch::Matchers::WithinRel(0.38, 1e-12));
}

TEST_CASE("first step is odd in the gradient") {
    Model<double> a = scalar_model();
    Model<double> b = scalar_model();
    a.weights()[0].fill(1.0);
    b.weights()[0].fill(1.0);
    AdadeltaState<double> sa(a), sb(b);

    GradientSet<double> ga = zero_gradients(a), gb = zero_gradients(b);
    ga.weights[0].fill(0.37);
    ga.biases[0].fill(0.11);
    gb.weights[0].fill(-0.37);
    gb.biases[0].fill(-0.11);
    adadelta_step(a, ga, sa);
    adadelta_step(b, gb, sb);

    const double da = a.weights()[0].data[0] - 1.0;
    const double db = b.weights()[0].data[0] - 1.0;
    REQUIRE_THAT(da, Catch::Matchers::WithinAbs(-db, 1e-15));
    REQUIRE_THAT(a.biases()[0].data[0],
                 Catch::Matchers::WithinAbs(-b.biases()[0].data[0], 1e-15));
}

TEST_CASE("vector update equals element-wise scalar updates") {
    // The hidden layer's weight tensor is 4 independent parameters.
    Model<double> m = hidden_model(4);
    Rng rng(17);
    for (auto& v : m.weights()[0].data) v = rng.next_symmetric(1.0);
    AdadeltaState<double> state(m);

    GradientSet<double> g = zero_gradients(m);
    const std::vector<double> gvals = {0.9, -0.2, 0.0, 1.7};
    g.weights[0].data = gvals;

    std::vector<double> expected = m.weights()[0].data;
    std::vector<double> eg2(4, 0.0), edx2(4, 0.0);
    for (int step = 0; step < 5; ++step) {
        adadelta_step(m, g, state);
        for (int i = 0; i < 4; ++i) {
            eg2[i] = 0.95 * eg2[i] + 0.05 * gvals[i] * gvals[i];
            const double dx =
                -std::sqrt(edx2[i] + 1e-6) / std::sqrt(eg2[i] + 1e-6) * gvals[i];
            edx2[i] = 0.95 * edx2[i] + 0.05 * dx * dx;
            expected[i] += dx;
        }
    }
    for (int i = 0; i < 4; ++i) {
        REQUIRE_THAT(m.weights()[0].data[i],
                     Catch::Matchers::WithinRel(expected[i], 1e-12));
        REQUIRE(state.g2_weights[0].data[i] >= 0.0);
        REQUIRE(state.dx2_weights[0].data[i] >= 0.0);
    }
}

TEST_CASE("accumulators stay non-negative under random gradients") {
    Model<double> m = hidden_model(8);
    AdadeltaState<double> state(m);
    Rng rng(55);
    for (int step = 0; step < 200; ++step) {
        GradientSet<double> g = m.make_gradient_set();
        for (auto& t : g.weights) {
            for (auto& v : t.data) v = rng.next_symmetric(3.0);
        }
        for (auto& t : g.biases) {
            for (auto& v : t.data) v = rng.next_symmetric(3.0);
        }
        adadelta_step(m, g, state);
        for (const auto& t : state.g2_weights) {
            for (double v : t.data) REQUIRE(v >= 0.0);
        }
        for (const auto& t : state.dx2_weights) {
            for (double v : t.data) REQUIRE(v >= 0.0);
        }
    }
    for (const auto& t : m.weights()) {
        REQUIRE(t.all_finite());
    }
}

TEST_CASE("non-finite gradients abort the step") {
    Model<double> m = scalar_model();
    AdadeltaState<double> state(m);
    GradientSet<double> g = zero_gradients(m);
    g.weights[0].fill(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(adadelta_step(m, g, state), NonFiniteGradient);
    g.weights[0].fill(std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(adadelta_step(m, g, state), NonFiniteGradient);
}

TEST_CASE("mismatched state is rejected") {
    Model<double> m = scalar_model();
    Model<double> m4 = hidden_model(4);
    AdadeltaState<double> state4(m4);
    const GradientSet<double> g = zero_gradients(m);
    CHECK_THROWS_AS(adadelta_step(m, g, state4), ShapeMismatch);
}
