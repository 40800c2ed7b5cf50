#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace alf;

TEST(LossMse, Examples) {
    Mat<double> a(1, 1), b(1, 1);
    a << 1.0;
    b << 0.0;
    EXPECT_EQ(loss_mse(a, b), 1.0);
    EXPECT_EQ(loss_mse(a, a), 0.0);
    Mat<double> p = Mat<double>::Zero(1, 2), t = Mat<double>::Ones(1, 2);
    EXPECT_EQ(loss_mse(p, t), 1.0);
    // Squared L2 over channels, mean over samples.
    Mat<double> p3 = Mat<double>::Zero(3, 2), t3 = Mat<double>::Ones(3, 2);
    EXPECT_EQ(loss_mse(p3, t3), 3.0);
}

TEST(LossMse, Errors) {
    EXPECT_THROW(loss_mse(Mat<double>(1, 0), Mat<double>(1, 0)), InputError);
    EXPECT_THROW(loss_mse(Mat<double>(Mat<double>::Zero(1, 2)), Mat<double>(Mat<double>::Zero(2, 2))), ShapeError);
}

class GradientOracle : public ::testing::TestWithParam<std::tuple<Activation, std::uint64_t, double>> {};

TEST_P(GradientOracle, MatchesCentralDifferences) {
    const auto [act, seed, tv] = GetParam();
    const auto p = oracle::tiny_problem(act, seed);
    const auto r = oracle::check_gradients(p.model, p.coords, p.target, tv);
    // (4*8 + 8) + (8*8 + 8) + (8*2 + 2) network parameters and 4 grid nodes.
    EXPECT_EQ(r.compared, 134u);
    EXPECT_EQ(r.failed, 0u) << r.first_failure << " (worst relative error " << r.worst_rel << ")";
}

std::string gradient_case_name(const ::testing::TestParamInfo<GradientOracle::ParamType>& info) {
    const auto [act, seed, tv] = info.param;
    const char* tv_name = tv == 0.0 ? "tv0" : (tv < 0.01 ? "tv1em3" : "tv0p5");
    return std::string(act == Activation::relu ? "relu" : "sine") + "_seed" + std::to_string(seed) + "_" + tv_name;
}

INSTANTIATE_TEST_SUITE_P(TinyModels, GradientOracle,
                         ::testing::Combine(::testing::Values(Activation::relu, Activation::sine),
                                            ::testing::Values(1u, 2u, 3u), ::testing::Values(0.0, 1e-3, 0.5)),
                         gradient_case_name);

TEST(Backward, TwoDimensionalGridGradients) {
    ModelSpec s;
    s.d_in = 2;
    s.d_out = 3;
    s.levels = 2;
    s.hidden_layers = 1;
    s.hidden_width = 6;
    s.omega0 = 2.0;
    s.grid_resolution = {3, 3};
    auto m = make_model<double>(s, 4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : m.alpha.nodes()) v = 12.0 + 4.0 * u(rng);
    const Eigen::MatrixXd coords = random_coords(2, 7, 6);
    Eigen::MatrixXd target(3, 7);
    for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = u(rng);
    const auto r = oracle::check_gradients(m, coords, target, 1e-3);
    EXPECT_EQ(r.failed, 0u) << r.first_failure;
}

TEST(Backward, AlphaGradientIsWeightTimesPointGradient) {
    const auto p = oracle::tiny_problem(Activation::sine, 7);
    // A single sample: every node gradient is its interpolation weight times
    // d loss / d alpha at the query point.
    const Eigen::MatrixXd x = p.coords.leftCols(1);
    const Eigen::MatrixXd y = p.target.leftCols(1);
    const auto batch = make_batch(p.model, x);
    const auto br = backward(p.model, batch, y, 0.0);
    auto shifted = p.model;
    const double h = 1e-6;
    for (double& v : shifted.alpha.nodes()) v += h;
    auto down = p.model;
    for (double& v : down.alpha.nodes()) v -= h;
    // Shifting every node by h shifts alpha(x) by exactly h.
    const double dl_dalpha = static_cast<double>(
        (oracle::loss(shifted, x, y, 0.0) - oracle::loss(down, x, y, 0.0)) / (2 * h));
    const auto w = p.model.alpha.query_weights(std::span<const double>(x.data(), 1));
    double covered = 0.0;
    for (const auto& e : w) {
        EXPECT_TRUE(testutil::close(br.grads.alpha[e.node], e.weight * dl_dalpha, 1e-5, 1e-10));
        covered += br.grads.alpha[e.node];
    }
    double total = 0.0;
    for (double g : br.grads.alpha) total += g;
    EXPECT_EQ(total, covered);
}

TEST(Backward, ZeroResidualGivesZeroGradients) {
    const auto p = oracle::tiny_problem(Activation::sine, 8);
    const auto batch = make_batch(p.model, p.coords);
    const Mat<double> exact = forward_batch(p.model, batch);
    const auto br = backward(p.model, batch, exact, 0.0);
    EXPECT_EQ(br.loss.mse, 0.0);
    for (const auto& g : br.grads.weight) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
    for (const auto& g : br.grads.bias) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
    for (double g : br.grads.alpha) EXPECT_EQ(g, 0.0);
}

TEST(Backward, TvWeightOnlyAddsTvSubgradient) {
    const auto p = oracle::tiny_problem(Activation::relu, 9);
    const auto batch = make_batch(p.model, p.coords);
    const auto plain = backward(p.model, batch, p.target, 0.0);
    const auto reg = backward(p.model, batch, p.target, 0.25);
    const auto sub = p.model.alpha.tv_subgradient();
    for (std::size_t i = 0; i < sub.size(); ++i) {
        EXPECT_NEAR(reg.grads.alpha[i], plain.grads.alpha[i] + 0.25 * sub[i], 1e-15);
    }
    EXPECT_EQ(reg.loss.mse, plain.loss.mse);
    EXPECT_NEAR(reg.loss.total, plain.loss.mse + 0.25 * p.model.alpha.tv_penalty(), 1e-15);
}

TEST(Backward, AllPassHasNoDataTermAlphaGradient) {
    auto p = oracle::tiny_problem(Activation::sine, 10);
    p.model.mode = FilterMode::all_pass;
    const auto br = backward(p.model, make_batch(p.model, p.coords), p.target, 0.0);
    for (double g : br.grads.alpha) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NonFiniteIsReported) {
    auto p = oracle::tiny_problem(Activation::relu, 11);
    p.model.mlp.layers[0].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(backward(p.model, make_batch(p.model, p.coords), p.target, 0.0), NumericalError);
    auto q = oracle::tiny_problem(Activation::relu, 11);
    Eigen::MatrixXd bad = q.target;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(backward(q.model, make_batch(q.model, q.coords), bad, 0.0), NumericalError);
    EXPECT_THROW(backward(q.model, make_batch(q.model, q.coords), Eigen::MatrixXd(1, 5), 0.0), ShapeError);
}

TEST(LrSchedule, Examples) {
    EXPECT_EQ(lr_at(0, 1e-3), 1e-3);
    EXPECT_NEAR(lr_at(1250, 1e-3), 6e-4, 1e-18);
    EXPECT_NEAR(lr_at(5000, 1e-3), 1.296e-4, 1e-18);
    EXPECT_THROW(lr_at(-1, 1e-3), InputError);
}

TEST(LrSchedule, PiecewiseConstant) {
    for (int k = 0; k < 5; ++k) {
        const double first = lr_at(k * 1250, 3e-3);
        for (int s = k * 1250; s < (k + 1) * 1250; s += 7) EXPECT_EQ(lr_at(s, 3e-3), first);
        EXPECT_EQ(lr_at((k + 1) * 1250 - 1, 3e-3), first);
        EXPECT_LT(lr_at((k + 1) * 1250, 3e-3), first);
    }
}

namespace {

// Scalar Adam reference for one parameter.
struct RefAdam {
    double m = 0.0, v = 0.0;
    int t = 0;
    double step(double p, double g, double lr) {
        ++t;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        return p - lr * mh / (std::sqrt(vh) + 1e-8);
    }
};

}  // namespace

TEST(Adam, MatchesScalarReferenceWithSchedule) {
    auto p = oracle::tiny_problem(Activation::sine, 12);
    AdamSettings s;
    s.step_size = 3;  // exercise the decay within a short run
    auto state = make_optim_state(p.model, s);
    RefAdam ref_w, ref_a;
    double w = p.model.mlp.layers[1].weight(2, 3);
    double a = p.model.alpha.nodes()[1];
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int it = 0; it < 10; ++it) {
        GradientSet<double> g;
        for (const auto& l : p.model.mlp.layers) {
            g.weight.push_back(Mat<double>::Zero(l.weight.rows(), l.weight.cols()));
            g.bias.push_back(Vec<double>::Zero(l.bias.size()));
        }
        g.alpha.assign(p.model.alpha.size(), 0.0);
        const double gw = n(rng), ga = n(rng);
        g.weight[1](2, 3) = gw;
        g.alpha[1] = ga;
        const double lr_n = lr_at(it, 1e-3, 3), lr_a = lr_at(it, 3e-3, 3);
        w = ref_w.step(w, gw, lr_n);
        a = ref_a.step(a, ga, lr_a);
        adam_step(p.model, g, state);
        EXPECT_NEAR(p.model.mlp.layers[1].weight(2, 3), w, 1e-15);
        EXPECT_NEAR(p.model.alpha.nodes()[1], a, 1e-15);
    }
    EXPECT_EQ(state.step, 10);
}

TEST(Adam, ZeroGradientLeavesParameterAndFirstStepHasUnitMagnitude) {
    auto p = oracle::tiny_problem(Activation::relu, 13);
    const auto before = p.model;
    auto state = make_optim_state(p.model, AdamSettings{});
    GradientSet<double> g;
    for (const auto& l : p.model.mlp.layers) {
        g.weight.push_back(Mat<double>::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vec<double>::Zero(l.bias.size()));
    }
    g.alpha.assign(p.model.alpha.size(), 0.0);
    g.weight[0](0, 0) = 0.37;
    g.alpha[2] = -5.0;
    adam_step(p.model, g, state);
    EXPECT_NEAR(p.model.mlp.layers[0].weight(0, 0) - before.mlp.layers[0].weight(0, 0), -1e-3, 1e-10);
    EXPECT_NEAR(p.model.alpha.nodes()[2] - before.alpha.nodes()[2], 3e-3, 1e-10);
    for (std::size_t i = 0; i < p.model.mlp.layers.size(); ++i) {
        for (Eigen::Index k = 0; k < p.model.mlp.layers[i].weight.size(); ++k) {
            if (i == 0 && k == 0) continue;
            EXPECT_EQ(p.model.mlp.layers[i].weight.data()[k], before.mlp.layers[i].weight.data()[k]);
        }
        EXPECT_EQ(p.model.mlp.layers[i].bias, before.mlp.layers[i].bias);
    }
    EXPECT_EQ(p.model.alpha.nodes()[0], before.alpha.nodes()[0]);
}

TEST(Adam, FrozenAlpha) {
    auto p = oracle::tiny_problem(Activation::relu, 14);
    AdamSettings s;
    s.train_alpha = false;
    auto state = make_optim_state(p.model, s);
    const auto before = p.model.alpha;
    const auto br = backward(p.model, make_batch(p.model, p.coords), p.target, 1e-3);
    adam_step(p.model, br.grads, state);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(p.model.alpha.nodes()[i], before.nodes()[i]);
}

TEST(Adam, DeterministicTrajectories) {
    auto run = [] {
        auto p = oracle::tiny_problem(Activation::sine, 15);
        auto state = make_optim_state(p.model, AdamSettings{});
        const auto batch = make_batch(p.model, p.coords);
        for (int i = 0; i < 30; ++i) adam_step(p.model, backward(p.model, batch, p.target, 1e-3).grads, state);
        return p.model;
    };
    const auto a = run();
    const auto b = run();
    for (std::size_t i = 0; i < a.mlp.layers.size(); ++i) EXPECT_EQ(a.mlp.layers[i].weight, b.mlp.layers[i].weight);
    for (std::size_t i = 0; i < a.alpha.size(); ++i) EXPECT_EQ(a.alpha.nodes()[i], b.alpha.nodes()[i]);
}

TEST(Training, TwoHundredStepsReduceMseTenfold) {
    const ImageSignal img = testutil::pattern_image(16, 16, 3, 1);
    TrainConfig cfg;
    cfg.iterations = 200;
    cfg.seed = 3;
    cfg.hidden_width = 64;
    cfg.log_every = 1;
    const auto r = fit_image<double>(img, cfg);
    ASSERT_GE(r.log.size(), 2u);
    EXPECT_LE(r.log.back().mse * 10.0, r.log.front().mse)
        << "initial " << r.log.front().mse << " final " << r.log.back().mse;
}
