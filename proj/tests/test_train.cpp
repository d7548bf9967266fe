#include <doctest.h>

#include "aisllm/rng.hpp"
#include "aisllm/train.hpp"

#include <cmath>
#include <sstream>

using namespace aisllm;

namespace {

ModelConfig train_test_config() {
    ModelConfig c;
    c.d_model = 8;
    c.n_heads = 2;
    c.n_layers = 1;
    c.d_prompt = 8;
    c.prompt_layers = 1;
    c.lm_layers = 1;
    c.scales = {1, 4};
    c.dropout = 0.0;
    return c;
}

std::vector<PreparedSampleT<double>> toy_samples(std::size_t n, std::uint64_t seed) {
    const SyntheticTraffic traffic = generate_synthetic_traffic(seed, 4);
    const LabeledDataset ds = build_labeled_dataset(traffic, 0.3, seed, PipelineProfile::piraeus());
    std::vector<std::uint32_t> idx;
    for (std::uint32_t i = 0; i < ds.windows.size() && i < n; ++i) idx.push_back(i);
    return prepare_samples<double>(ds.windows, idx, ds.stats, train_test_config());
}

} // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("trajectory loss") {
    Graph g;
    Tensor a({3, 4});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.25 * static_cast<double>(i);
    CHECK(loss_trajectory(g, a, a).item() == doctest::Approx(0.0));
    Tensor b = a;
    Tensor offset({3, 4});
    for (std::size_t i = 0; i < b.size(); ++i) offset[i] = 0.5;
    b = g.add(a, offset);
    CHECK(loss_trajectory(g, b, a).item() == doctest::Approx(0.5));

    SplitMix64 rng(1);
    Tensor x({4, 4}), y({4, 4});
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(-1, 1);
        y[i] = rng.uniform(-1, 1);
    }
    double expect = 0;
    for (std::size_t i = 0; i < x.size(); ++i) expect += std::abs(x[i] - y[i]);
    expect /= static_cast<double>(x.size());
    CHECK(std::abs(loss_trajectory(g, x, y).item() - expect) < 1e-12);
}

TEST_CASE("anomaly loss") {
    Graph g;
    const double eps = 0.1;

    SUBCASE("loss at the smoothed target equals weighted target entropy") {
        // q = (1-eps) one-hot(1) + eps/2
        Tensor p({2}, {eps / 2.0, 1.0 - eps / 2.0});
        const double h_q = -((eps / 2.0) * std::log(eps / 2.0) +
                             (1.0 - eps / 2.0) * std::log(1.0 - eps / 2.0));
        CHECK(loss_anomaly(g, p, 1, eps).item() == doctest::Approx(0.7 * h_q).epsilon(1e-12));
    }
    SUBCASE("unsmoothed confident prediction approaches zero") {
        Tensor p({2}, {1e-15, 1.0});
        CHECK(loss_anomaly(g, p, 1, 0.0).item() < 1e-10);
    }
    SUBCASE("class weights set the loss ratio on symmetric probabilities") {
        Tensor p({2}, {0.5, 0.5});
        const double l0 = loss_anomaly(g, p, 0, eps).item();
        const double l1 = loss_anomaly(g, p, 1, eps).item();
        CHECK(l0 / l1 == doctest::Approx(0.3 / 0.7).epsilon(1e-12));
    }
}

TEST_CASE("collision loss worked examples") {
    Graph g;
    SUBCASE("zero at equality") {
        Tensor p({2}, {0.3, 0.7});
        CHECK(loss_collision(g, p, p).item() == doctest::Approx(0.0));
    }
    SUBCASE("quadratic branch") {
        Tensor pred({1}, {0.05});
        Tensor target({1}, {0.0});
        CHECK(loss_collision(g, pred, target).item() == doctest::Approx(0.00125).epsilon(1e-12));
    }
    SUBCASE("linear branch with risk weighting") {
        Tensor pred({1}, {0.5});
        Tensor target({1}, {1.0});
        CHECK(loss_collision(g, pred, target).item() == doctest::Approx(0.135).epsilon(1e-12));
    }
}

TEST_CASE("total loss weighting") {
    Graph g;
    auto s = [](double v) { return Tensor::scalar(v); };
    const LossWeights w;
    CHECK(total_loss(g, s(1), s(1), s(1), s(1), w).item() == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(total_loss(g, s(0), s(0), s(0), s(0), w).item() == doctest::Approx(0.0));
    CHECK(total_loss(g, s(0.5), s(0.2), s(0.1), s(0.4), w).item() ==
          doctest::Approx(1.85).epsilon(1e-12));
    // linearity in each part
    const double base = total_loss(g, s(0.5), s(0.2), s(0.1), s(0.4), w).item();
    CHECK(total_loss(g, s(0.5 + 1.0), s(0.2), s(0.1), s(0.4), w).item() - base ==
          doctest::Approx(w.traj));
    CHECK(total_loss(g, s(0.5), s(0.2), s(0.1), s(0.4 + 1.0), w).item() - base ==
          doctest::Approx(w.expl));
}

TEST_CASE("learning-rate schedule") {
    OptimizerConfig c;
    CHECK(lr_at(0, c) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(std::abs(lr_at(5, c) - (1e-6 + (1e-4 - 1e-6) / 2.0)) < 1e-9);
    CHECK(lr_at(10, c) == doctest::Approx(1e-4).epsilon(1e-12)); // warm restart
    for (std::size_t t = 0; t < 40; ++t) {
        CHECK(lr_at(t, c) >= c.lr_min - 1e-15);
        CHECK(lr_at(t, c) <= c.lr_max + 1e-15);
    }
}

TEST_CASE("adamw steps") {
    OptimizerConfig cfg;
    SUBCASE("zero gradient and zero decay leave parameters unchanged") {
        NamedTensors<double> params;
        params.emplace_back("w", Tensor({2}, {1.0, -2.0}));
        params.back().second.set_requires_grad(true);
        cfg.weight_decay = 0.0;
        AdamW opt(params, cfg);
        opt.step(1e-3);
        CHECK(params[0].second[0] == doctest::Approx(1.0));
        CHECK(params[0].second[1] == doctest::Approx(-2.0));
    }
    SUBCASE("first bias-corrected step with unit gradient moves by about lr") {
        NamedTensors<double> params;
        params.emplace_back("w", Tensor({1}, {0.0}));
        params.back().second.set_requires_grad(true);
        params[0].second.grad()[0] = 1.0;
        cfg.weight_decay = 0.0;
        AdamW opt(params, cfg);
        opt.step(1e-3);
        CHECK(params[0].second[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    }
    SUBCASE("decoupled decay scales the parameter") {
        NamedTensors<double> params;
        params.emplace_back("w", Tensor({1}, {2.0}));
        params.back().second.set_requires_grad(true);
        cfg.weight_decay = 0.1;
        AdamW opt(params, cfg);
        opt.step(1e-2);
        CHECK(params[0].second[0] == doctest::Approx(2.0 * (1.0 - 1e-2 * 0.1)).epsilon(1e-12));
    }
    SUBCASE("non-finite gradients abort the step") {
        NamedTensors<double> params;
        params.emplace_back("w", Tensor({1}, {1.0}));
        params.back().second.set_requires_grad(true);
        params[0].second.grad()[0] = std::numeric_limits<double>::quiet_NaN();
        AdamW opt(params, cfg);
        CHECK_THROWS_AS(opt.step(1e-3), NonFiniteGradient);
        CHECK(params[0].second[0] == doctest::Approx(1.0));
        CHECK(opt.aborted_steps() == 1);
    }
    SUBCASE("clipping caps the global norm") {
        NamedTensors<double> params;
        params.emplace_back("a", Tensor({2}, {0.0, 0.0}));
        params.emplace_back("b", Tensor({2}, {0.0, 0.0}));
        for (auto& [n, t] : params) {
            t.set_requires_grad(true);
            t.grad()[0] = 3.0;
            t.grad()[1] = -4.0;
        }
        AdamW opt(params, cfg);
        const double pre = opt.clip_gradients();
        CHECK(pre == doctest::Approx(std::sqrt(50.0)));
        double post_sq = 0;
        for (auto& [n, t] : params)
            for (int i = 0; i < 2; ++i) post_sq += t.grad()[i] * t.grad()[i];
        CHECK(std::sqrt(post_sq) <= 1.0 + 1e-9);
    }
}

TEST_CASE("gradient accumulation reproduces one large batch") {
    const std::vector<PreparedSampleT<double>> samples = toy_samples(32, 5);
    REQUIRE(samples.size() == 32);

    FitConfig small;
    small.opt.batch_train = 8;
    small.opt.accum_steps = 4;
    small.opt.max_epochs = 1;
    small.opt.seed = 77;
    FitConfig big = small;
    big.opt.batch_train = 32;
    big.opt.accum_steps = 1;

    Model m1(train_test_config(), 123);
    Model m2(train_test_config(), 123);
    const FitResult r1 = fit(m1, samples, {}, small);
    const FitResult r2 = fit(m2, samples, {}, big);
    CHECK(std::abs(r1.log[0].train_total - r2.log[0].train_total) < 1e-9);
    // identical gradients mean identical AdamW updates
    for (std::size_t p = 0; p < m1.params().size(); ++p) {
        const Tensor& a = m1.params()[p].second;
        const Tensor& b = m2.params()[p].second;
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
    }
}

TEST_CASE("early stopping with a frozen model") {
    std::vector<PreparedSampleT<double>> samples = toy_samples(12, 9);
    const std::vector<PreparedSampleT<double>> val(samples.begin() + 8, samples.end());
    samples.resize(8);

    Model m(train_test_config(), 11);
    for (auto& [name, t] : m.params()) t.set_requires_grad(false); // freeze
    FitConfig cfg;
    cfg.opt.patience = 1;
    cfg.opt.max_epochs = 10;
    const FitResult r = fit(m, samples, val, cfg);
    CHECK(r.stopped_early);
    CHECK(r.log.size() == 2); // one improving epoch, one non-improving
}

TEST_CASE("fixed seed reproduces epoch-zero losses") {
    const std::vector<PreparedSampleT<double>> samples = toy_samples(16, 21);
    FitConfig cfg;
    cfg.opt.max_epochs = 1;
    Model m1(train_test_config(), 55);
    Model m2(train_test_config(), 55);
    const FitResult r1 = fit(m1, samples, samples, cfg);
    const FitResult r2 = fit(m2, samples, samples, cfg);
    CHECK(r1.log[0].train_total == r2.log[0].train_total);
    CHECK(r1.log[0].val_total == r2.log[0].val_total);
}

TEST_CASE("metrics log format") {
    const std::vector<PreparedSampleT<double>> samples = toy_samples(8, 31);
    Model m(train_test_config(), 3);
    FitConfig cfg;
    cfg.opt.max_epochs = 2;
    cfg.opt.patience = 5;
    std::ostringstream log;
    fit(m, samples, samples, cfg, &log);
    std::istringstream lines(log.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        ++count;
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(count == 2);
}

TEST_CASE("evaluate_model produces finite metrics on an untrained model") {
    const SyntheticTraffic traffic = generate_synthetic_traffic(3, 6);
    const LabeledDataset ds = build_labeled_dataset(traffic, 0.3, 3, PipelineProfile::piraeus());
    Model m(train_test_config(), 77);
    const EvalReport rep = evaluate_model(m, ds.windows, ds.val_idx, ds.stats, 2);
    CHECK(std::isfinite(rep.ade_nm));
    CHECK(std::isfinite(rep.mse));
    CHECK(std::isfinite(rep.cri_mae));
    CHECK(std::isfinite(rep.expl_ce));
    CHECK(rep.baseline_ade_nm >= 0.0);
    CHECK(rep.windows == ds.val_idx.size());
}

TEST_SUITE_END();
